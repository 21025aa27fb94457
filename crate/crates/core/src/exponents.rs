//! Exponent thresholds for `-Δu + A|x|^{-α} u = f(u)` in dimension N.
//!
//! The four exponents are
//!
//! * `2* = 2N/(N-2)` (Sobolev),
//! * `2_α = 2N/(N-α)`, taken as `+∞` for `α ≥ N`,
//! * `2*_α = 2(2N-2+α)/(2N-2-α)`, taken as `+∞` for `α ≥ 2N-2`,
//! * `p*_α`, a two-branch rational function of α defined on `(0, 2N-2) \ {2}`.
//!
//! On top of them sit the region classifier of the (α, p) half plane, the
//! multiplicity count ν and the applicability check for the multiplicity
//! theorem on nonradial solutions.

use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Slack used when a floating point exponent is compared with a threshold.
pub const EXPONENT_EPS: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    if a.is_infinite() || b.is_infinite() {
        return a == b;
    }
    (a - b).abs() <= EXPONENT_EPS * a.abs().max(b.abs()).max(1.0)
}

/// The threshold exponents for a given `(N, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentSet {
    pub dim: u32,
    pub alpha: f64,
    pub two_star: f64,
    /// `+∞` when `α ≥ N`.
    pub two_alpha: f64,
    /// `+∞` when `α ≥ 2N - 2`.
    pub two_star_alpha: f64,
    /// `None` at `α = 2` and for `α ≥ 2N - 2`.
    pub p_star_alpha: Option<f64>,
}

fn check_dim_alpha(dim: u32, alpha: f64) -> Result<()> {
    if dim < 3 {
        return Err(Error::param(format!("dimension N must be >= 3, got {dim}")));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::param(format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(())
}

pub fn exponent_set(dim: u32, alpha: f64) -> Result<ExponentSet> {
    check_dim_alpha(dim, alpha)?;
    let n = dim as f64;
    let two_star = 2.0 * n / (n - 2.0);
    let two_alpha = if alpha < n { 2.0 * n / (n - alpha) } else { f64::INFINITY };
    let edge = 2.0 * n - 2.0;
    let two_star_alpha = if alpha < edge {
        2.0 * (edge + alpha) / (edge - alpha)
    } else {
        f64::INFINITY
    };
    Ok(ExponentSet {
        dim,
        alpha,
        two_star,
        two_alpha,
        two_star_alpha,
        p_star_alpha: p_star_alpha(dim, alpha),
    })
}

fn p_star_alpha(dim: u32, alpha: f64) -> Option<f64> {
    let n = dim as f64;
    if alpha <= 0.0 || alpha >= 2.0 * n - 2.0 || close(alpha, 2.0) {
        return None;
    }
    if alpha < 2.0 {
        let a2 = alpha * alpha * (n - 1.0);
        let num = a2 - 2.0 * alpha * (n - 1.0) + 4.0 * n;
        let den = a2 - 2.0 * alpha * (n + 1.0) + 4.0 * n;
        Some(2.0 * num / den)
    } else {
        Some(2.0 * (2.0 * n + 2.0 - alpha) / (2.0 * n - 2.0 - alpha))
    }
}

/// Exact counterpart of [`ExponentSet`] for rational α. `None` stands for `+∞`
/// (or "undefined" for `p_star_alpha`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactExponentSet {
    pub two_star: Rational64,
    pub two_alpha: Option<Rational64>,
    pub two_star_alpha: Option<Rational64>,
    pub p_star_alpha: Option<Rational64>,
}

pub fn exponent_set_exact(dim: u32, alpha: Rational64) -> Result<ExactExponentSet> {
    if dim < 3 {
        return Err(Error::param(format!("dimension N must be >= 3, got {dim}")));
    }
    let zero = Rational64::from_integer(0);
    if alpha <= zero {
        return Err(Error::param(format!("alpha must be positive, got {alpha}")));
    }
    let r = Rational64::from_integer;
    let n = r(dim as i64);
    let two = r(2);
    let edge = two * n - two;
    let two_star = two * n / (n - two);
    let two_alpha = (alpha < n).then(|| two * n / (n - alpha));
    let two_star_alpha = (alpha < edge).then(|| two * (edge + alpha) / (edge - alpha));
    let p_star_alpha = if alpha >= edge || alpha == two {
        None
    } else if alpha < two {
        let a2 = alpha * alpha * (n - r(1));
        let num = a2 - two * alpha * (n - r(1)) + r(4) * n;
        let den = a2 - two * alpha * (n + r(1)) + r(4) * n;
        Some(two * num / den)
    } else {
        Some(two * (two * n + two - alpha) / (two * n - two - alpha))
    };
    Ok(ExactExponentSet { two_star, two_alpha, two_star_alpha, p_star_alpha })
}

/// Existence picture of the (α, p) plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    /// No solution at all.
    NoSolution,
    /// No radial solution.
    NoRadialSolution,
    /// At least one radial solution.
    RadialExists,
    /// `(α, p) = (2, 2*)`: radial solutions known in closed form.
    ExplicitRadial,
    /// `p ≤ 2`, outside the superlinear regime.
    Excluded,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::NoSolution => "NoSolution",
            Region::NoRadialSolution => "NoRadialSolution",
            Region::RadialExists => "RadialExists",
            Region::ExplicitRadial => "ExplicitRadial",
            Region::Excluded => "Excluded",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Literature source of a region boundary.
///
/// * `[21]` Terracini (1996): `α = 2, p ≠ 2*` and `α ≠ 2, p = 2*`.
/// * `[11]` Conti, Crotti, Pardo (1998).
/// * `[7]` Badiale, Rolando (2006).
/// * `[19,20]` Su, Wang, Willem (2007).
/// * `[3]` Badiale, Guida, Rolando (2015).
/// * `[10]` Catrina (2014).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Citation {
    Terracini,
    ContiCrottiPardo,
    BadialeRolando,
    SuWangWillem,
    BadialeGuidaRolando,
    Catrina,
}

impl Citation {
    pub fn tag(self) -> &'static str {
        match self {
            Citation::Terracini => "[21]",
            Citation::ContiCrottiPardo => "[11]",
            Citation::BadialeRolando => "[7]",
            Citation::SuWangWillem => "[19,20]",
            Citation::BadialeGuidaRolando => "[3]",
            Citation::Catrina => "[10]",
        }
    }
}

impl fmt::Display for Citation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RegionLabel {
    pub region: Region,
    pub citations: Vec<Citation>,
}

impl RegionLabel {
    fn new(region: Region, citations: Vec<Citation>) -> Self {
        RegionLabel { region, citations }
    }

    /// Citation tags joined by spaces, e.g. `"[19,20] [11]"`.
    pub fn citation_string(&self) -> String {
        self.citations.iter().map(|c| c.tag()).collect::<Vec<_>>().join(" ")
    }
}

/// Region of the point `(α, p)` in dimension N.
///
/// Boundary points follow the closures of the cited inequalities, e.g.
/// `p = 2_α` for `0 < α < 2` is `NoSolution` and `p = 2*_α` for `2 < α < 2N-2`
/// is `NoRadialSolution`.
pub fn classify_region(dim: u32, alpha: f64, p: f64) -> Result<RegionLabel> {
    let e = exponent_set(dim, alpha)?;
    if !(p > 2.0) || close(p, 2.0) {
        return Err(Error::param(format!("exponent p must exceed 2, got {p}")));
    }
    Ok(classify_with(&e, p))
}

fn classify_with(e: &ExponentSet, p: f64) -> RegionLabel {
    use Citation::*;
    use Region::*;

    let n = e.dim as f64;
    let alpha = e.alpha;
    let at_star = close(p, e.two_star);

    if close(alpha, 2.0) {
        return if at_star {
            RegionLabel::new(ExplicitRadial, vec![Terracini])
        } else {
            RegionLabel::new(NoSolution, vec![Terracini])
        };
    }
    if at_star {
        return RegionLabel::new(NoSolution, vec![Terracini]);
    }

    // Older, narrower existence windows that also contain the point.
    let older_windows = |p: f64| {
        let mut extra = Vec::new();
        let shift = (alpha - 2.0) / (n - 2.0);
        let (lo1, hi1) = ordered(e.two_star + shift, e.two_star);
        if p > lo1 && p < hi1 {
            extra.push(ContiCrottiPardo);
        }
        let (lo2, hi2) = ordered(e.two_star + 2.0 * shift, e.two_star);
        if p > lo2 && p < hi2 {
            extra.push(BadialeRolando);
        }
        extra
    };

    if alpha < 2.0 {
        if p > e.two_star {
            return RegionLabel::new(NoSolution, vec![ContiCrottiPardo]);
        }
        if p < e.two_alpha || close(p, e.two_alpha) {
            return RegionLabel::new(NoSolution, vec![BadialeRolando]);
        }
        if p < e.two_star_alpha || close(p, e.two_star_alpha) {
            return RegionLabel::new(NoRadialSolution, vec![BadialeGuidaRolando]);
        }
        let mut cites = vec![SuWangWillem];
        cites.extend(older_windows(p));
        return RegionLabel::new(RadialExists, cites);
    }

    // α > 2
    if p < e.two_star {
        return RegionLabel::new(NoSolution, vec![ContiCrottiPardo]);
    }
    if e.two_star_alpha.is_infinite() {
        // α ≥ 2N - 2: radial solutions for every p > 2*.
        let mut cites = vec![SuWangWillem];
        cites.extend(older_windows(p));
        return RegionLabel::new(RadialExists, cites);
    }
    if p < e.two_star_alpha && !close(p, e.two_star_alpha) {
        let mut cites = vec![SuWangWillem];
        cites.extend(older_windows(p));
        return RegionLabel::new(RadialExists, cites);
    }
    if alpha < n && (p > e.two_alpha || close(p, e.two_alpha)) {
        return RegionLabel::new(NoSolution, vec![BadialeRolando]);
    }
    RegionLabel::new(NoRadialSolution, vec![Catrina])
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b { (a, b) } else { (b, a) }
}

/// Ceiling that snaps values within round-off of an integer onto it.
fn snapped_ceil(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as i64
    } else {
        x.ceil() as i64
    }
}

fn check_nu_alpha(dim: u32, alpha: f64) -> Result<()> {
    check_dim_alpha(dim, alpha)?;
    let edge = 2.0 * dim as f64 - 2.0;
    if close(alpha, 2.0) {
        return Err(Error::param("nu is undefined at alpha = 2"));
    }
    if alpha >= edge {
        return Err(Error::param(format!("nu needs alpha < 2N-2 = {edge}, got {alpha}")));
    }
    Ok(())
}

/// The multiplicity count ν. For `α < 2` only `p1` is used, for `α > 2` only `p2`.
/// The value can be `≤ 0` outside the theorem's hypotheses.
pub fn nu(dim: u32, alpha: f64, p1: f64, p2: f64) -> Result<i64> {
    check_nu_alpha(dim, alpha)?;
    let n = dim as f64;
    let two_star = 2.0 * n / (n - 2.0);
    let x = if alpha < 2.0 {
        if !(p1 > 2.0) {
            return Err(Error::param(format!("p1 must exceed 2, got {p1}")));
        }
        let m = ((n - 1.0) / alpha).min((n - 2.0) / (2.0 - alpha) * (two_star - p1) / (p1 - 2.0));
        2.0 * m - 2.0 * n * (1.0 / alpha - 0.5)
    } else {
        if !(p2 > 2.0) {
            return Err(Error::param(format!("p2 must exceed 2, got {p2}")));
        }
        let m = ((n - 1.0) / alpha).min((n - 2.0) / (alpha - 2.0) * (p2 - two_star) / (p2 - 2.0));
        2.0 * m
    };
    Ok(snapped_ceil(x) - 1)
}

/// ν in exact rational arithmetic.
pub fn nu_exact(dim: u32, alpha: Rational64, p1: Rational64, p2: Rational64) -> Result<i64> {
    let r = Rational64::from_integer;
    let n = r(dim as i64);
    let two = r(2);
    if dim < 3 || alpha <= r(0) || alpha == two || alpha >= two * n - two {
        return Err(Error::param("alpha outside (0, 2N-2) \\ {2}"));
    }
    let two_star = two * n / (n - two);
    let x = if alpha < two {
        if p1 <= two {
            return Err(Error::param("p1 must exceed 2"));
        }
        let a = (n - r(1)) / alpha;
        let b = (n - two) / (two - alpha) * (two_star - p1) / (p1 - two);
        two * a.min(b) - two * n * (r(1) / alpha - r(1) / two)
    } else {
        if p2 <= two {
            return Err(Error::param("p2 must exceed 2"));
        }
        let a = (n - r(1)) / alpha;
        let b = (n - two) / (alpha - two) * (p2 - two_star) / (p2 - two);
        two * a.min(b)
    };
    Ok(x.ceil().to_integer() - 1)
}

/// Hypotheses on `(N, α, p1, p2)` of the multiplicity theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremHypotheses {
    pub dim: u32,
    pub alpha: f64,
    pub p1: f64,
    pub p2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Applicability {
    pub applicable: bool,
    /// `None` when α lies outside the domain of ν.
    pub nu: Option<i64>,
    /// Inclusive `[2, ν + 1]` when applicable.
    pub k_range: Option<(u32, u32)>,
    /// Human readable reasons for inapplicability.
    pub reasons: Vec<String>,
}

impl TheoremHypotheses {
    pub fn new(dim: u32, alpha: f64, p1: f64, p2: f64) -> Self {
        TheoremHypotheses { dim, alpha, p1, p2 }
    }

    pub fn applicability(&self) -> Applicability {
        let mut reasons = Vec::new();
        let n = self.dim as f64;
        if self.dim < 4 {
            reasons.push(format!("N = {} < 4", self.dim));
        }
        let lo = 2.0 / (n - 1.0);
        let hi = 2.0 * n - 2.0;
        if !(self.alpha > lo && self.alpha < hi) || close(self.alpha, lo) {
            reasons.push(format!("alpha = {} outside ({lo}, {hi})", self.alpha));
        }
        if close(self.alpha, 2.0) {
            reasons.push("alpha = 2".to_string());
        }
        let nu_value = if self.dim >= 3 { nu(self.dim, self.alpha, self.p1, self.p2).ok() } else { None };

        if reasons.is_empty() {
            let two_star = 2.0 * n / (n - 2.0);
            let p_star = p_star_alpha(self.dim, self.alpha).expect("alpha checked above");
            if self.alpha < 2.0 {
                if !(self.p1 > 2.0 && self.p1 < p_star) {
                    reasons.push(format!("need 2 < p1 < p*_alpha = {p_star}, got p1 = {}", self.p1));
                }
                if !(self.p2 > two_star) {
                    reasons.push(format!("need p2 > 2* = {two_star}, got p2 = {}", self.p2));
                }
            } else {
                if !(self.p1 > 2.0 && self.p1 < two_star) {
                    reasons.push(format!("need 2 < p1 < 2* = {two_star}, got p1 = {}", self.p1));
                }
                if !(self.p2 > p_star) {
                    reasons.push(format!("need p2 > p*_alpha = {p_star}, got p2 = {}", self.p2));
                }
            }
        }
        let applicable = reasons.is_empty();
        let k_range = match (applicable, nu_value) {
            (true, Some(v)) if v >= 1 => Some((2, v as u32 + 1)),
            _ => None,
        };
        Applicability { applicable, nu: nu_value, k_range, reasons }
    }
}

/// Samples of the curve `p = p*_α` over `alphas`, skipping points where it is undefined.
pub fn p_star_curve(dim: u32, alphas: &[f64]) -> Vec<(f64, f64)> {
    alphas
        .iter()
        .filter_map(|&a| p_star_alpha(dim, a).map(|p| (a, p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64 as Q;

    #[test]
    fn all_thresholds_meet_at_alpha_two() {
        let e = exponent_set(4, 2.0).unwrap();
        assert_eq!(e.two_star, 4.0);
        assert_eq!(e.two_alpha, 4.0);
        assert_eq!(e.two_star_alpha, 4.0);
        assert_eq!(e.p_star_alpha, None);
    }

    #[test]
    fn n4_alpha3_by_hand() {
        let e = exponent_set(4, 3.0).unwrap();
        assert_eq!(e.two_star, 4.0);
        assert_eq!(e.two_star_alpha, 6.0);
        assert_eq!(e.two_alpha, 8.0);
        assert!((e.p_star_alpha.unwrap() - 14.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn p_star_meets_two_star_alpha_at_lower_edge() {
        let e = exponent_set_exact(4, Q::new(2, 3)).unwrap();
        assert_eq!(e.p_star_alpha, Some(Q::new(5, 2)));
        assert_eq!(e.two_star_alpha, Some(Q::new(5, 2)));
        let f = exponent_set(4, 2.0 / 3.0).unwrap();
        assert!((f.p_star_alpha.unwrap() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn infinite_sentinels() {
        let e = exponent_set(4, 7.0).unwrap();
        assert!(e.two_alpha.is_infinite());
        assert!(e.two_star_alpha.is_infinite());
        assert_eq!(e.p_star_alpha, None);
        let e = exponent_set(4, 5.0).unwrap();
        assert!(e.two_alpha.is_infinite());
        assert_eq!(e.two_star_alpha, 2.0 * 11.0 / 1.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(exponent_set(2, 1.0).is_err());
        assert!(exponent_set(4, 0.0).is_err());
        assert!(exponent_set(4, -1.0).is_err());
        assert!(classify_region(4, 1.0, 2.0).is_err());
        assert!(classify_region(4, 1.0, 1.5).is_err());
    }

    #[test]
    fn region_examples() {
        assert_eq!(classify_region(4, 1.0, 3.0).unwrap().region, Region::RadialExists);
        let l = classify_region(4, 1.0, 2.7).unwrap();
        assert_eq!(l.region, Region::NoRadialSolution);
        assert_eq!(l.citations, vec![Citation::BadialeGuidaRolando]);
        assert_eq!(classify_region(4, 2.0, 4.0).unwrap().region, Region::ExplicitRadial);
        let l = classify_region(4, 3.0, 3.5).unwrap();
        assert_eq!(l.region, Region::NoSolution);
        assert_eq!(l.citations, vec![Citation::ContiCrottiPardo]);
    }

    #[test]
    fn region_boundaries_follow_closures() {
        // p = 2_α with 0 < α < 2
        let e = exponent_set(4, 1.0).unwrap();
        assert_eq!(classify_region(4, 1.0, e.two_alpha).unwrap().region, Region::NoSolution);
        // p = 2*_α with 0 < α < 2 is closed on the nonradial side
        assert_eq!(
            classify_region(4, 1.0, e.two_star_alpha).unwrap().region,
            Region::NoRadialSolution
        );
        // p = 2*_α with 2 < α < 2N - 2
        assert_eq!(classify_region(4, 3.0, 6.0).unwrap().region, Region::NoRadialSolution);
        // p = 2_α with 2 < α < N
        assert_eq!(classify_region(4, 3.0, 8.0).unwrap().region, Region::NoSolution);
        // p = 2* away from α = 2
        assert_eq!(classify_region(4, 3.0, 4.0).unwrap().region, Region::NoSolution);
        assert_eq!(classify_region(4, 1.0, 4.0).unwrap().region, Region::NoSolution);
        // α = 2, p ≠ 2*
        assert_eq!(classify_region(4, 2.0, 3.0).unwrap().region, Region::NoSolution);
        // α ≥ 2N - 2
        assert_eq!(classify_region(4, 6.0, 4.0).unwrap().citations, vec![Citation::Terracini]);
        assert_eq!(classify_region(4, 6.0, 9.0).unwrap().region, Region::RadialExists);
        assert_eq!(classify_region(4, 6.0, 3.0).unwrap().region, Region::NoSolution);
        // N ≤ α < 2N - 2: the nonradial strip is unbounded above
        assert_eq!(classify_region(4, 5.0, 100.0).unwrap().region, Region::NoRadialSolution);
    }

    #[test]
    fn older_existence_windows_are_cited() {
        // α = 1, N = 4: [11] window (3.5, 4), [7] window (3, 4)
        let l = classify_region(4, 1.0, 3.75).unwrap();
        assert_eq!(
            l.citations,
            vec![Citation::SuWangWillem, Citation::ContiCrottiPardo, Citation::BadialeRolando]
        );
        assert_eq!(l.citation_string(), "[19,20] [11] [7]");
        let l = classify_region(4, 1.0, 2.9).unwrap();
        assert_eq!(l.citations, vec![Citation::SuWangWillem]);
    }

    #[test]
    fn nu_spot_values() {
        assert_eq!(nu(4, 3.0, 3.0, 8.0).unwrap(), 1);
        assert_eq!(nu(10, 3.0, 3.0, 8.0).unwrap(), 5);
        assert_eq!(nu(4, 1.0, 2.5, 5.0).unwrap(), 1);
        assert_eq!(nu_exact(4, Q::from_integer(3), Q::from_integer(3), Q::from_integer(8)).unwrap(), 1);
        assert_eq!(nu_exact(10, Q::from_integer(3), Q::from_integer(3), Q::from_integer(8)).unwrap(), 5);
        assert_eq!(nu_exact(4, Q::from_integer(1), Q::new(5, 2), Q::from_integer(5)).unwrap(), 1);
    }

    #[test]
    fn nu_rejects_alpha_two_and_out_of_range() {
        assert!(nu(4, 2.0, 3.0, 8.0).is_err());
        assert!(nu(4, 6.0, 3.0, 8.0).is_err());
        assert!(nu(4, 0.0, 3.0, 8.0).is_err());
    }

    #[test]
    fn applicability_examples() {
        let a = TheoremHypotheses::new(4, 3.0, 3.0, 8.0).applicability();
        assert!(a.applicable);
        assert_eq!(a.nu, Some(1));
        assert_eq!(a.k_range, Some((2, 2)));

        let a = TheoremHypotheses::new(4, 2.0, 3.0, 8.0).applicability();
        assert!(!a.applicable);

        let a = TheoremHypotheses::new(4, 1.0, 2.5, 5.0).applicability();
        assert!(a.applicable, "{:?}", a.reasons);
        assert_eq!(a.nu, Some(1));

        // p1 above p*_α
        assert!(!TheoremHypotheses::new(4, 1.0, 3.0, 5.0).applicability().applicable);
        // N = 3 is excluded
        assert!(!TheoremHypotheses::new(3, 1.5, 2.5, 7.0).applicability().applicable);
        // α at the lower edge 2/(N-1)
        assert!(!TheoremHypotheses::new(4, 2.0 / 3.0, 2.2, 5.0).applicability().applicable);
    }

    #[test]
    fn p_star_curve_skips_undefined_points() {
        let c = p_star_curve(4, &[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(c.len(), 2);
        assert!((c[0].1 - 26.0 / 9.0).abs() < 1e-12);
    }
}
