fn main() -> std::process::ExitCode {
    nonradial::cli::main()
}
