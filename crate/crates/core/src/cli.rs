//! Command-line front end.
//!
//! Every command writes CSV into the output directory; the first line of each
//! file is a `#` comment naming the command and the seed. Exit codes: 0 success,
//! 1 configuration error, 2 solver failure, 3 I/O failure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;
use crate::cylindrical::{break_sweep, SweepResult};
use crate::error::Error;
use crate::exponents::{classify_region, nu, p_star_curve, TheoremHypotheses};
use crate::fit::loglog_fit;
use crate::params::ProblemParams;
use crate::radial::{fit_level_scaling, ground_state_radial, Field1D, RadialGrid};
use crate::testfn::{endpoint_ubar, integrals, threshold_ak, BumpSpec};

#[derive(Debug, Parser)]
#[command(name = "nonradial", version, about = "Ground states of -Δu + A|x|^-α u = f(u): radial, cylindrical and test-function estimates")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON run configuration (built-in default when omitted).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "NONRADIAL_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Seed of the initial-guess perturbation, recorded in every output header.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also write a JSON mirror of every CSV.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Existence regions on an (α, p) grid, plus the curve p = p*_α.
    Classify {
        #[arg(long = "dim", default_value_t = 4)]
        dim: u32,
        /// `lo:hi:count`, endpoints included.
        #[arg(long, default_value = "0.1:8:80")]
        alpha: String,
        #[arg(long, default_value = "2.1:12:100")]
        p: String,
    },
    /// ν and the admissible K over a range of dimensions.
    Nu {
        /// `lo:hi`, inclusive.
        #[arg(long = "dims", default_value = "4:10")]
        dims: String,
        /// Exponent of the potential `A|x|^-α`.
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 3.0)]
        p1: f64,
        #[arg(long, default_value_t = 8.0)]
        p2: f64,
    },
    /// Test-function integrals, threshold A_K and the straight-path bound.
    Testfn,
    /// Radial ground states over `A_list` and the scaling fit.
    Radial,
    /// Cylindrical ground state at `problem.A` for every K in `K_list`.
    Cyl,
    /// Radial against cylindrical levels over `A_list` for every K in `K_list`.
    Break,
}

#[derive(Debug)]
pub enum Failure {
    Config(Error),
    Solver(Error),
    Io(Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Solver(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e}"),
            Failure::Solver(e) => write!(f, "solver failure: {e}"),
            Failure::Io(e) => write!(f, "I/O failure: {e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn io<E: Into<Error>>(e: E) -> Failure {
    Failure::Io(e.into())
}

/// Parses the arguments, runs the command and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let cfg = load_config(&cli.global)?;
    let out = Output::new(&cfg, &cli.global)?;
    match &cli.command {
        Command::Classify { dim, alpha, p } => cmd_classify(&out, *dim, alpha, p),
        Command::Nu { dims, alpha, p1, p2 } => cmd_nu(&out, dims, *alpha, *p1, *p2),
        Command::Testfn => cmd_testfn(&out, &cfg),
        Command::Radial => cmd_radial(&out, &cfg),
        Command::Cyl => cmd_cyl(&out, &cfg),
        Command::Break => cmd_break(&out, &cfg),
    }
}

/// Reads `--config` (or the default), applies `--workers`/`--seed` and validates.
pub fn load_config(g: &GlobalArgs) -> CliResult<RunConfig> {
    let mut cfg = match &g.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(Error::Io(e)))?;
            RunConfig::from_json(&text).map_err(Failure::Config)?
        }
        None => RunConfig::default(),
    };
    if let Some(w) = g.workers {
        cfg.workers = w;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if g.json {
        cfg.output.json = true;
    }
    cfg.validate().map_err(Failure::Config)?;
    Ok(cfg)
}

struct Output {
    dir: PathBuf,
    json: bool,
    fields: bool,
    seed: u64,
}

impl Output {
    fn new(cfg: &RunConfig, g: &GlobalArgs) -> CliResult<Self> {
        let dir = g.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
        std::fs::create_dir_all(&dir).map_err(io)?;
        Ok(Output { dir, json: cfg.output.json, fields: cfg.output.fields, seed: cfg.seed })
    }

    fn header(&self, command: &str) -> String {
        format!("# nonradial {command} seed={}\n", self.seed)
    }

    fn table<T: Serialize>(&self, command: &str, name: &str, columns: &[&str], rows: &[T]) -> CliResult<()> {
        let path = self.dir.join(format!("{name}.csv"));
        let mut f = BufWriter::new(File::create(&path).map_err(io)?);
        f.write_all(self.header(command).as_bytes()).map_err(io)?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(f);
        w.write_record(columns).map_err(io)?;
        for r in rows {
            w.serialize(r).map_err(io)?;
        }
        w.flush().map_err(io)?;
        if self.json {
            let path = self.dir.join(format!("{name}.json"));
            let text = serde_json::to_string_pretty(rows).map_err(io)?;
            std::fs::write(path, text + "\n").map_err(io)?;
        }
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn field_dir(&self) -> CliResult<PathBuf> {
        let d = self.dir.join("fields");
        std::fs::create_dir_all(&d).map_err(io)?;
        Ok(d)
    }
}

/// `lo:hi:count` with both endpoints included; `count = 0` is empty.
pub fn parse_range(text: &str) -> crate::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::InvalidParameter(format!("range '{text}' is not lo:hi:count"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !lo.is_finite() || !hi.is_finite() || hi < lo {
        return Err(bad());
    }
    Ok(match count {
        0 => vec![],
        1 => vec![lo],
        c => (0..c).map(|i| lo + (hi - lo) * i as f64 / (c - 1) as f64).collect(),
    })
}

fn parse_dims(text: &str) -> crate::Result<Vec<u32>> {
    let bad = || Error::InvalidParameter(format!("dimension range '{text}' is not lo:hi"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo < 3 || hi < lo {
        return Err(Error::InvalidParameter(format!("need 3 <= lo <= hi in '{text}'")));
    }
    Ok((lo..=hi).collect())
}

#[derive(Serialize)]
struct ClassifyRow {
    alpha: f64,
    p: f64,
    label: &'static str,
    citations: String,
}

#[derive(Serialize)]
struct CurveRow {
    alpha: f64,
    p_star: f64,
}

fn cmd_classify(out: &Output, dim: u32, alpha: &str, p: &str) -> CliResult<()> {
    let alphas = parse_range(alpha).map_err(Failure::Config)?;
    let ps = parse_range(p).map_err(Failure::Config)?;
    let mut rows = Vec::with_capacity(alphas.len() * ps.len());
    for &a in &alphas {
        for &q in &ps {
            let l = classify_region(dim, a, q).map_err(Failure::Config)?;
            rows.push(ClassifyRow { alpha: a, p: q, label: l.region.as_str(), citations: l.citation_string() });
        }
    }
    out.table("classify", "classify", &["alpha", "p", "label", "citations"], &rows)?;
    let curve: Vec<CurveRow> =
        p_star_curve(dim, &alphas).into_iter().map(|(alpha, p_star)| CurveRow { alpha, p_star }).collect();
    out.table("classify", "p_star", &["alpha", "p_star"], &curve)
}

#[derive(Serialize)]
struct NuRow {
    #[serde(rename = "N")]
    dim: u32,
    alpha: f64,
    p1: f64,
    p2: f64,
    nu: Option<i64>,
    applicable: bool,
    #[serde(rename = "K_range")]
    k_range: String,
    error: String,
}

fn cmd_nu(out: &Output, dims: &str, alpha: f64, p1: f64, p2: f64) -> CliResult<()> {
    let dims = parse_dims(dims).map_err(Failure::Config)?;
    let rows: Vec<NuRow> = dims
        .into_iter()
        .map(|dim| {
            let app = TheoremHypotheses::new(dim, alpha, p1, p2).applicability();
            let (value, error) = match nu(dim, alpha, p1, p2) {
                Ok(v) => (Some(v), app.reasons.join("; ")),
                Err(e) => (None, e.to_string()),
            };
            let k_range = app.k_range.map_or(String::new(), |(lo, hi)| format!("{lo}..{hi}"));
            NuRow { dim, alpha, p1, p2, nu: value, applicable: app.applicable, k_range, error }
        })
        .collect();
    out.table("nu", "nu", &["N", "alpha", "p1", "p2", "nu", "applicable", "K_range", "error"], &rows)
}

#[derive(Serialize)]
struct TestFnRow {
    #[serde(rename = "K")]
    k: u32,
    #[serde(rename = "A")]
    a: f64,
    grad2: f64,
    pot2: f64,
    #[serde(rename = "Fint")]
    fint: f64,
    ratio: f64,
    lambda: Option<f64>,
    energy: Option<f64>,
    bound: Option<f64>,
    discrepancy: f64,
}

#[derive(Serialize)]
struct TestFnFitRow {
    #[serde(rename = "K")]
    k: u32,
    #[serde(rename = "A_K")]
    a_k: f64,
    ratio_monotone: bool,
    ratio_slope: Option<f64>,
    bound_slope: Option<f64>,
    bound_slope_expected: f64,
}

/// Growth exponent of the straight-path bound in `A`.
pub fn expected_bound_slope(dim: u32, alpha: f64, k: u32) -> f64 {
    let base = (k as f64 - 1.0) / 2.0;
    if alpha < 2.0 {
        base + dim as f64 * (1.0 / alpha - 0.5)
    } else {
        base
    }
}

fn cmd_testfn(out: &Output, cfg: &RunConfig) -> CliResult<()> {
    let nl = cfg.params().map_err(Failure::Config)?.nonlinearity;
    let (dim, alpha) = (cfg.problem.dim, cfg.problem.alpha);
    let order = cfg.tolerances.quadrature_order;
    let spec = match cfg.testfn.amplitude {
        Some(h) => BumpSpec::with_amplitude(nl.s_star, h),
        None => BumpSpec::new(nl.s_star),
    }
    .map_err(Failure::Config)?;
    let sweep = &cfg.testfn.a_list;
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &k in &cfg.k_list {
        let th = threshold_ak(&spec, k, dim, alpha, &nl, sweep, order).map_err(Failure::Solver)?;
        let mut bounds = Vec::new();
        for &a in sweep {
            let ints = integrals(&spec, a, k, dim, alpha, &nl, order).map_err(Failure::Solver)?;
            let ep = match endpoint_ubar(&ints, th.a_k, dim, alpha, nl.mu) {
                Ok(ep) => Some(ep),
                Err(Error::BelowThreshold { .. }) => None,
                Err(e) => return Err(Failure::Solver(e)),
            };
            if let Some(ep) = ep {
                bounds.push((a, ep.bound));
            }
            rows.push(TestFnRow {
                k,
                a,
                grad2: ints.grad2,
                pot2: ints.pot2,
                fint: ints.fint,
                ratio: ints.ratio,
                lambda: ep.map(|e| e.lambda),
                energy: ep.map(|e| e.energy),
                bound: ep.map(|e| e.bound),
                discrepancy: ints.discrepancy,
            });
        }
        fits.push(TestFnFitRow {
            k,
            a_k: th.a_k,
            ratio_monotone: th.monotone,
            ratio_slope: loglog_fit(&th.ratios).ok().map(|f| f.0),
            bound_slope: loglog_fit(&bounds).ok().map(|f| f.0),
            bound_slope_expected: expected_bound_slope(dim, alpha, k),
        });
    }
    let cols = ["K", "A", "grad2", "pot2", "Fint", "ratio", "lambda", "energy", "bound", "discrepancy"];
    out.table("testfn", "testfn", &cols, &rows)?;
    let cols = ["K", "A_K", "ratio_monotone", "ratio_slope", "bound_slope", "bound_slope_expected"];
    out.table("testfn", "testfn_fit", &cols, &fits)
}

#[derive(Serialize)]
struct RadialRow {
    #[serde(rename = "A")]
    a: f64,
    level: f64,
    iterations: usize,
    residual: f64,
    min_value: f64,
    nehari_t: f64,
}

#[derive(Serialize)]
struct RadialFitRow {
    slope: f64,
    intercept: f64,
    lower_bound_exponent: Option<f64>,
    min_expression: Option<f64>,
}

fn cmd_radial(out: &Output, cfg: &RunConfig) -> CliResult<()> {
    let template = cfg.params().map_err(Failure::Config)?;
    let g = &cfg.grids.radial;
    let grid = Arc::new(RadialGrid::geometric(template.dim, g.r_min, cfg.r_max(), g.nodes).map_err(Failure::Config)?);
    let dir = if out.fields { Some(out.field_dir()?) } else { None };
    let mut rows = Vec::new();
    for &a in &cfg.a_list {
        let params = template.with_a(a);
        let (u, rep) =
            ground_state_radial(&params, grid.clone(), None, &cfg.tolerances.solver).map_err(Failure::Solver)?;
        if let Some(d) = &dir {
            write_radial_field(&d.join(format!("radial_A{a}.csv")), out, "radial", &u)?;
        }
        rows.push(RadialRow {
            a,
            level: rep.level,
            iterations: rep.iterations,
            residual: rep.residual,
            min_value: rep.min_value,
            nehari_t: rep.nehari_t,
        });
    }
    out.table("radial", "radial", &["A", "level", "iterations", "residual", "min_value", "nehari_t"], &rows)?;
    let levels: Vec<(f64, f64)> = rows.iter().map(|r| (r.a, r.level)).collect();
    let nl = &template.nonlinearity;
    let fit: Vec<RadialFitRow> = fit_level_scaling(&levels, template.dim, template.alpha, nl.p1, nl.p2)
        .ok()
        .map(|f| RadialFitRow {
            slope: f.slope,
            intercept: f.intercept,
            lower_bound_exponent: f.lower_bound_exponent,
            min_expression: f.min_expression,
        })
        .into_iter()
        .collect();
    out.table("radial", "radial_fit", &["slope", "intercept", "lower_bound_exponent", "min_expression"], &fit)
}

fn write_radial_field(path: &Path, out: &Output, command: &str, u: &Field1D) -> CliResult<()> {
    let mut f = BufWriter::new(File::create(path).map_err(io)?);
    f.write_all(out.header(command).as_bytes()).map_err(io)?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(["r", "u"]).map_err(io)?;
    for (r, v) in u.grid().nodes().iter().zip(u.values()) {
        w.write_record([r.to_string(), v.to_string()]).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

fn write_fields(out: &Output, command: &str, res: &SweepResult) -> CliResult<()> {
    if !out.fields {
        return Ok(());
    }
    let dir = out.field_dir()?;
    for p in &res.points {
        let Some(r) = &p.report else { continue };
        let path = dir.join(format!("cyl_K{}_A{}.csv", res.k, p.a));
        let mut f = BufWriter::new(File::create(&path).map_err(io)?);
        f.write_all(out.header(command).as_bytes()).map_err(io)?;
        r.minimizer.write_csv(&mut f).map_err(io)?;
        f.flush().map_err(io)?;
        write_radial_field(&dir.join(format!("radial_A{}.csv", p.a)), out, command, &r.radial_minimizer)?;
    }
    Ok(())
}

fn warn_applicability(cfg: &RunConfig, params: &ProblemParams) {
    let nl = &params.nonlinearity;
    let app = TheoremHypotheses::new(params.dim, params.alpha, nl.p1, nl.p2).applicability();
    if !app.applicable {
        log::warn!("multiplicity hypotheses do not hold ({}); running anyway", app.reasons.join("; "));
    }
    if let Some((lo, hi)) = app.k_range {
        for k in cfg.k_list.iter().filter(|k| !(lo..=hi).contains(*k)) {
            log::warn!("K = {k} lies outside the admissible range {lo}..{hi}");
        }
    }
}

#[derive(Serialize)]
struct CylRow {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "K")]
    k: u32,
    level: f64,
    iterations: usize,
    residual: f64,
    min_value: f64,
    deviation: f64,
    init: String,
}

fn cmd_cyl(out: &Output, cfg: &RunConfig) -> CliResult<()> {
    let params = cfg.params().map_err(Failure::Config)?;
    warn_applicability(cfg, &params);
    let sweep = cfg.sweep_config();
    let mut rows = Vec::new();
    for &k in &cfg.k_list {
        let res = break_sweep(&params, k, &[params.a], &sweep).map_err(Failure::Config)?;
        let p = &res.points[0];
        let r = p.report.as_ref().ok_or_else(|| {
            Failure::Solver(Error::LinearSolve(p.error.clone().unwrap_or_else(|| "unknown failure".into())))
        })?;
        rows.push(CylRow {
            a: p.a,
            k,
            level: r.cyl.level,
            iterations: r.cyl.iterations,
            residual: r.cyl.residual,
            min_value: r.cyl.min_value,
            deviation: r.deviation,
            init: r.chosen_init.clone(),
        });
        write_fields(out, "cyl", &res)?;
    }
    let cols = ["A", "K", "level", "iterations", "residual", "min_value", "deviation", "init"];
    out.table("cyl", "cyl", &cols, &rows)
}

#[derive(Serialize)]
struct BreakRow {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "K")]
    k: u32,
    #[serde(rename = "m_A")]
    m_a: Option<f64>,
    #[serde(rename = "c_AK")]
    c_ak: Option<f64>,
    deviation: Option<f64>,
    broken: Option<bool>,
    margin: Option<f64>,
    level_slack: f64,
    deviation_threshold: f64,
    init: String,
    error: String,
}

#[derive(Serialize)]
struct ThresholdRow {
    #[serde(rename = "K")]
    k: String,
    #[serde(rename = "A_tilde")]
    a_tilde: String,
}

const NOT_REACHED: &str = "not reached";

fn cmd_break(out: &Output, cfg: &RunConfig) -> CliResult<()> {
    let params = cfg.params().map_err(Failure::Config)?;
    warn_applicability(cfg, &params);
    let sweep = cfg.sweep_config();
    let mut rows = Vec::new();
    let mut thresholds = Vec::new();
    let mut a_star: Option<f64> = Some(f64::NEG_INFINITY);
    let mut any_ok = false;
    for &k in &cfg.k_list {
        let res = break_sweep(&params, k, &cfg.a_list, &sweep).map_err(Failure::Config)?;
        for p in &res.points {
            any_ok |= p.report.is_some();
            let r = p.report.as_ref();
            rows.push(BreakRow {
                a: p.a,
                k,
                m_a: r.map(|r| r.m_a),
                c_ak: r.map(|r| r.c_ak),
                deviation: r.map(|r| r.deviation),
                broken: r.map(|r| r.broken),
                margin: r.map(|r| r.margin),
                level_slack: sweep.level_slack,
                deviation_threshold: sweep.deviation_threshold,
                init: r.map_or(String::new(), |r| r.chosen_init.clone()),
                error: p.error.clone().unwrap_or_default(),
            });
        }
        write_fields(out, "break", &res)?;
        let t = res.empirical_threshold;
        a_star = match (a_star, t) {
            (Some(s), Some(t)) => Some(s.max(t)),
            _ => None,
        };
        thresholds.push(ThresholdRow { k: k.to_string(), a_tilde: t.map_or(NOT_REACHED.into(), |v| v.to_string()) });
    }
    let a_star = a_star.filter(|v| v.is_finite());
    thresholds.push(ThresholdRow { k: "max".into(), a_tilde: a_star.map_or(NOT_REACHED.into(), |v| v.to_string()) });
    let cols = [
        "A",
        "K",
        "m_A",
        "c_AK",
        "deviation",
        "broken",
        "margin",
        "level_slack",
        "deviation_threshold",
        "init",
        "error",
    ];
    out.table("break", "break", &cols, &rows)?;
    out.table("break", "break_threshold", &["K", "A_tilde"], &thresholds)?;
    if !any_ok && !rows.is_empty() {
        return Err(Failure::Solver(Error::LinearSolve("every sweep point failed".into())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1:3:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_range("4:4:1").unwrap(), vec![4.0]);
        assert!(parse_range("0:1:0").unwrap().is_empty());
        assert!(parse_range("1:0:2").is_err());
        assert!(parse_range("1:2").is_err());
        assert_eq!(parse_dims("4:6").unwrap(), vec![4, 5, 6]);
        assert!(parse_dims("2:6").is_err());
    }

    #[test]
    fn bound_slopes() {
        assert_eq!(expected_bound_slope(4, 3.0, 2), 0.5);
        assert_eq!(expected_bound_slope(4, 1.0, 2), 2.5);
    }
}
