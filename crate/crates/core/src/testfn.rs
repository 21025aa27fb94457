//! The angular-sector test function `v_A` and its energy estimates.
//!
//! In polar coordinates `(ρ, θ)` of the quadrant `(|y|, |z|)`, with `y ∈ R^K`
//! and `z ∈ R^{N-K}`, a bump `ψ` supported in `E = (1/4, 3/4) × (π/6, π/3)` is
//! pulled back by `(r, φ) = (ρ^{√A}, θ√A)`:
//!
//! ```text
//! v_A = ψ_A(ρ, θ) = ψ(ρ^{√A}, θ√A),   supported in
//! E_A = ((1/4)^{1/√A}, (3/4)^{1/√A}) × (π/(6√A), π/(3√A)).
//! ```
//!
//! The volume element is `σ_K σ_{N-K} ρ^{N-1} H(θ) dρ dθ` with
//! `H(θ) = cos^{K-1}θ sin^{N-K-1}θ`. After the change of variables
//!
//! ```text
//! ∫ v_A²/|x|^α = σ_K σ_{N-K}/A ∫_E ψ² r^{(N-α)/√A - 1} H(φ/√A)
//! ∫ F(v_A)     = σ_K σ_{N-K}/A ∫_E F(ψ) r^{N/√A - 1} H(φ/√A)
//! ∫ |∇v_A|²    = σ_K σ_{N-K}   ∫_E (r² ψ_r² + ψ_φ²) r^{(N-2)/√A - 1} H(φ/√A)
//! ```

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;
use crate::params::sphere_measure;
use crate::quadrature::GaussLegendre;

pub const DEFAULT_ORDER: usize = 64;

const R_LO: f64 = 0.25;
const R_HI: f64 = 0.75;
const PHI_LO: f64 = PI / 6.0;
const PHI_HI: f64 = PI / 3.0;

/// `exp(-1/(x(1-x)))` on `(0, 1)` and its derivative.
fn beta(x: f64) -> (f64, f64) {
    if x <= 0.0 || x >= 1.0 {
        return (0.0, 0.0);
    }
    let q = x * (1.0 - x);
    let b = (-1.0 / q).exp();
    (b, b * (1.0 - 2.0 * x) / (q * q))
}

/// Product bump `c β((r - 1/4)/(1/2)) β((φ - π/6)/(π/6))` with peak value `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BumpSpec {
    pub s_star: f64,
    pub amplitude: f64,
}

impl BumpSpec {
    /// Amplitude `0.9 s_*`, or `0.9` when `s_* = ∞`.
    pub fn new(s_star: f64) -> Result<Self> {
        let amplitude = if s_star.is_finite() { 0.9 * s_star } else { 0.9 };
        Self::with_amplitude(s_star, amplitude)
    }

    pub fn with_amplitude(s_star: f64, amplitude: f64) -> Result<Self> {
        if !(s_star > 0.0) {
            return Err(Error::param(format!("s_star must be positive, got {s_star}")));
        }
        if !(amplitude > 0.0 && amplitude < s_star) {
            return Err(Error::param(format!("bump amplitude {amplitude} must lie in (0, s_star = {s_star})")));
        }
        Ok(BumpSpec { s_star, amplitude })
    }

    fn scale(&self) -> f64 {
        // β(1/2)² = e^{-8}
        self.amplitude * 8f64.exp()
    }

    /// `(ψ, ψ_r, ψ_φ)` at `(r, φ)`.
    pub fn psi(&self, r: f64, phi: f64) -> (f64, f64, f64) {
        let x = (r - R_LO) / (R_HI - R_LO);
        let y = (phi - PHI_LO) / (PHI_HI - PHI_LO);
        let (bx, dbx) = beta(x);
        let (by, dby) = beta(y);
        let c = self.scale();
        (c * bx * by, c * dbx * by / (R_HI - R_LO), c * bx * dby / (PHI_HI - PHI_LO))
    }

    /// `v_A` at the quadrant point `(s, t) = (|y|, |z|)`.
    pub fn eval_va(&self, a: f64, s: f64, t: f64) -> f64 {
        let rho = s.hypot(t);
        if rho == 0.0 {
            return 0.0;
        }
        let theta = t.atan2(s);
        let q = a.sqrt();
        self.psi(rho.powf(q), theta * q).0
    }

    /// `E_A` as `((ρ_lo, ρ_hi), (θ_lo, θ_hi))`.
    pub fn support(a: f64) -> ((f64, f64), (f64, f64)) {
        let q = a.sqrt();
        ((R_LO.powf(1.0 / q), R_HI.powf(1.0 / q)), (PHI_LO / q, PHI_HI / q))
    }
}

/// `H(θ) = cos^{K-1}θ sin^{N-K-1}θ`.
pub fn h_weight(dim: u32, k: u32, theta: f64) -> f64 {
    theta.cos().powi(k as i32 - 1) * theta.sin().powi((dim - k) as i32 - 1)
}

fn check_dims(dim: u32, k: u32) -> Result<()> {
    if dim < 4 || k < 2 || k > dim - 2 {
        return Err(Error::param(format!("need 2 <= K <= N - 2 (got N = {dim}, K = {k})")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestFnIntegrals {
    pub a: f64,
    /// `∫ |∇v_A|²`.
    pub grad2: f64,
    /// `∫ v_A²/|x|^α`.
    pub pot2: f64,
    /// `∫ F(v_A)`.
    pub fint: f64,
    /// `‖v_A‖_A² / ∫F(v_A) = (grad2 + A·pot2)/fint`.
    pub ratio: f64,
    /// `[grad2, pot2, fint]` by quadrature directly over `E_A`.
    pub direct: [f64; 3],
    /// `[grad2, pot2, fint]` by quadrature over `E` after the change of variables.
    pub transformed: [f64; 3],
    /// Largest relative difference between the two routes.
    pub discrepancy: f64,
}

/// The three integrals by both routes, tensor Gauss-Legendre of the given order.
#[allow(clippy::too_many_arguments)]
pub fn integrals(
    spec: &BumpSpec,
    a: f64,
    k: u32,
    dim: u32,
    alpha: f64,
    nl: &Nonlinearity,
    order: usize,
) -> Result<TestFnIntegrals> {
    check_dims(dim, k)?;
    if !(a >= 1.0) {
        return Err(Error::param(format!("test function needs A >= 1, got {a}")));
    }
    let gl = GaussLegendre::new(order);
    let c = sphere_measure(k) * sphere_measure(dim - k);
    let q = a.sqrt();
    let n = dim as f64;

    let mut tr = [0.0; 3];
    for (r, wr) in gl.mapped(R_LO, R_HI) {
        for (phi, wp) in gl.mapped(PHI_LO, PHI_HI) {
            let (p, pr, pp) = spec.psi(r, phi);
            let h = h_weight(dim, k, phi / q);
            let w = wr * wp * h;
            tr[0] += w * (r * r * pr * pr + pp * pp) * r.powf((n - 2.0) / q - 1.0);
            tr[1] += w * p * p * r.powf((n - alpha) / q - 1.0);
            tr[2] += w * nl.primitive(p)? * r.powf(n / q - 1.0);
        }
    }
    let transformed = [c * tr[0], c * tr[1] / a, c * tr[2] / a];

    let ((rho_lo, rho_hi), (th_lo, th_hi)) = BumpSpec::support(a);
    let mut di = [0.0; 3];
    for (rho, wr) in gl.mapped(rho_lo, rho_hi) {
        let r = rho.powf(q);
        let dr = q * rho.powf(q - 1.0);
        for (th, wt) in gl.mapped(th_lo, th_hi) {
            let (p, pr, pp) = spec.psi(r, th * q);
            let w = wr * wt * h_weight(dim, k, th) * rho.powf(n - 1.0);
            let d_rho = pr * dr;
            let d_th = pp * q;
            di[0] += w * (d_rho * d_rho + d_th * d_th / (rho * rho));
            di[1] += w * p * p * rho.powf(-alpha);
            di[2] += w * nl.primitive(p)?;
        }
    }
    let direct = [c * di[0], c * di[1], c * di[2]];

    let discrepancy = (0..3)
        .map(|i| (direct[i] - transformed[i]).abs() / transformed[i].abs())
        .fold(0.0, f64::max);
    let [grad2, pot2, fint] = transformed;
    Ok(TestFnIntegrals { a, grad2, pot2, fint, ratio: (grad2 + a * pot2) / fint, direct, transformed, discrepancy })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    /// Smallest sweep value with ratio > 1, `+∞` if none.
    pub a_k: f64,
    pub ratios: Vec<(f64, f64)>,
    /// Whether the ratio increased along the whole sweep (observation only).
    pub monotone: bool,
}

/// Smallest `A` in the increasing sweep with `‖v_A‖_A² / ∫F(v_A) > 1`.
#[allow(clippy::too_many_arguments)]
pub fn threshold_ak(
    spec: &BumpSpec,
    k: u32,
    dim: u32,
    alpha: f64,
    nl: &Nonlinearity,
    sweep: &[f64],
    order: usize,
) -> Result<Threshold> {
    if sweep.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("A sweep must be strictly increasing"));
    }
    let mut ratios = Vec::with_capacity(sweep.len());
    for &a in sweep {
        ratios.push((a, integrals(spec, a, k, dim, alpha, nl, order)?.ratio));
    }
    let a_k = ratios.iter().find(|r| r.1 > 1.0).map_or(f64::INFINITY, |r| r.0);
    let monotone = ratios.windows(2).all(|w| w[1].1 > w[0].1);
    Ok(Threshold { a_k, ratios, monotone })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Endpoint {
    pub lambda: f64,
    /// `I(ū_K)` for `ū_K(x) = v_A(x/λ)`.
    pub energy: f64,
    /// `m ‖ū_K‖_A^{2μ/(μ-2)} / (∫F(ū_K))^{2/(μ-2)}`.
    pub bound: f64,
}

/// Endpoint `ū_K = v_A(·/λ)` of the straight path and the resulting level bound.
///
/// `λ = ratio^{1/α}` for `α < 2` and `ratio^{1/2}` for `α > 2`; then
/// `‖∇ū‖² = λ^{N-2} grad2`, `A∫ū²/|x|^α = λ^{N-α} A pot2`, `∫F(ū) = λ^N fint`.
pub fn endpoint_ubar(ints: &TestFnIntegrals, a_k: f64, dim: u32, alpha: f64, mu: f64) -> Result<Endpoint> {
    if !(ints.a > a_k) || !(ints.ratio > 1.0) {
        return Err(Error::BelowThreshold { a: ints.a, ratio: ints.ratio });
    }
    if alpha == 2.0 || !(alpha > 0.0) {
        return Err(Error::param("endpoint needs alpha > 0, alpha != 2"));
    }
    if !(mu > 2.0) {
        return Err(Error::param(format!("mu must exceed 2, got {mu}")));
    }
    let n = dim as f64;
    let lambda = if alpha < 2.0 { ints.ratio.powf(1.0 / alpha) } else { ints.ratio.sqrt() };
    let grad = lambda.powf(n - 2.0) * ints.grad2;
    let pot = lambda.powf(n - alpha) * ints.a * ints.pot2;
    let fint = lambda.powf(n) * ints.fint;
    let energy = 0.5 * (grad + pot) - fint;
    let m = (1.0 / mu).powf(2.0 / (mu - 2.0)) * (0.5 - 1.0 / mu);
    let bound = m * (grad + pot).powf(mu / (mu - 2.0)) / fint.powf(2.0 / (mu - 2.0));
    Ok(Endpoint { lambda, energy, bound })
}

/// `(min, max)` of `H(φ/√A) A^{(N-K-1)/2}` over `samples` points of `(π/6, π/3)`.
pub fn h_bounds(dim: u32, k: u32, a: f64, samples: usize) -> Result<(f64, f64)> {
    check_dims(dim, k)?;
    let scale = a.powf(((dim - k) as f64 - 1.0) / 2.0);
    let q = a.sqrt();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..samples {
        let phi = PHI_LO + (PHI_HI - PHI_LO) * (i as f64 + 0.5) / samples as f64;
        let v = h_weight(dim, k, phi / q) * scale;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}
