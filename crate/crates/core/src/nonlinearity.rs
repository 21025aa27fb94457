//! Nonlinearities `f` with primitive `F(s) = ∫_0^s f`, and grid certificates
//! for the growth and monotonicity hypotheses
//!
//! * (h0)  `0 < f(s) ≤ M min{s^{p1-1}, s^{p2-1}}` for `s > 0`,
//! * (h'1) `f(s)/s` nondecreasing on `(0, ∞)`,
//! * (h'2) `F(s)/s^μ` nonincreasing on `(0, s_*)`.
//!
//! Every `f` here vanishes for `s ≤ 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{adaptive, GaussLegendre};

/// Relative tolerance of the adaptive quadrature used for `F` when no closed form exists.
pub const PRIMITIVE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Kind {
    /// `f(s) = s^{p-1}`.
    PurePower { p: f64 },
    /// `f(s) = min{s, s^{p2-1}}`.
    DoublePowerMin { p2: f64 },
    /// `f(s) = s^{p2-1} / (1 + s^{p2-2})`.
    RationalPower { p2: f64 },
    /// Monotone cubic interpolant of user samples.
    Tabulated(MonotoneCubic),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    pub kind: Kind,
    pub p1: f64,
    pub p2: f64,
    /// Growth constant in (h0).
    pub m: f64,
    pub mu: f64,
    /// `f64::INFINITY` allowed.
    pub s_star: f64,
}

#[inline]
fn pow(s: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < 64.0 {
        s.powi(e as i32)
    } else {
        s.powf(e)
    }
}

impl Nonlinearity {
    pub fn pure_power(p: f64) -> Self {
        Nonlinearity { kind: Kind::PurePower { p }, p1: p, p2: p, m: 1.0, mu: p, s_star: f64::INFINITY }
    }

    /// `min{s, s^{p2-1}}` with `μ = p2`, `s_* = 1`.
    pub fn double_power_min(p1: f64, p2: f64) -> Self {
        Nonlinearity { kind: Kind::DoublePowerMin { p2 }, p1, p2, m: 1.0, mu: p2, s_star: 1.0 }
    }

    /// `s^{p2-1}/(1 + s^{p2-2})` with `μ = p2`, `s_* = ∞`.
    pub fn rational_power(p1: f64, p2: f64) -> Self {
        Nonlinearity { kind: Kind::RationalPower { p2 }, p1, p2, m: 1.0, mu: p2, s_star: f64::INFINITY }
    }

    pub fn tabulated(samples: &[(f64, f64)], p1: f64, p2: f64, m: f64, mu: f64, s_star: f64) -> Result<Self> {
        Ok(Nonlinearity { kind: Kind::Tabulated(MonotoneCubic::new(samples)?), p1, p2, m, mu, s_star })
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_s_star(mut self, s_star: f64) -> Self {
        self.s_star = s_star;
        self
    }

    pub fn with_m(mut self, m: f64) -> Self {
        self.m = m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p1 > 2.0 && self.p2 > 2.0) {
            return Err(Error::param(format!("p1, p2 must exceed 2 (got {}, {})", self.p1, self.p2)));
        }
        if !(self.m > 0.0) {
            return Err(Error::param(format!("growth constant M must be positive, got {}", self.m)));
        }
        if !(self.mu > 2.0) {
            return Err(Error::param(format!("mu must exceed 2, got {}", self.mu)));
        }
        if !(self.s_star > 0.0) {
            return Err(Error::param(format!("s_star must be positive, got {}", self.s_star)));
        }
        match &self.kind {
            Kind::PurePower { p } if !(*p > 2.0) => Err(Error::param(format!("pure power needs p > 2, got {p}"))),
            Kind::DoublePowerMin { p2 } | Kind::RationalPower { p2 } if !(*p2 > 2.0) => {
                Err(Error::param(format!("p2 must exceed 2, got {p2}")))
            }
            _ => Ok(()),
        }
    }

    /// `f(s)`; zero for `s ≤ 0`.
    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return 0.0;
        }
        match &self.kind {
            Kind::PurePower { p } => pow(s, p - 1.0),
            Kind::DoublePowerMin { p2 } => {
                if s >= 1.0 { s } else { pow(s, p2 - 1.0) }
            }
            Kind::RationalPower { p2 } => {
                let q = pow(s, p2 - 2.0);
                s * q / (1.0 + q)
            }
            Kind::Tabulated(t) => t.eval(s),
        }
    }

    /// `F(s) = ∫_0^s f(t) dt`; zero for `s ≤ 0`.
    pub fn primitive(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Ok(0.0);
        }
        match &self.kind {
            Kind::PurePower { p } => Ok(pow(s, *p) / p),
            Kind::DoublePowerMin { p2 } => {
                if s <= 1.0 {
                    Ok(pow(s, *p2) / p2)
                } else {
                    Ok(1.0 / p2 + 0.5 * (s * s - 1.0))
                }
            }
            Kind::RationalPower { .. } => {
                // f(t) ~ t for t ≫ 1; split at 1 so the adaptive rule sees one regime at a time
                let f = |t: f64| self.f(t);
                if s <= 1.0 {
                    adaptive(f, 0.0, s, PRIMITIVE_REL_TOL)
                } else {
                    Ok(adaptive(f, 0.0, 1.0, PRIMITIVE_REL_TOL)? + adaptive(f, 1.0, s, PRIMITIVE_REL_TOL)?)
                }
            }
            Kind::Tabulated(t) => Ok(t.integral(s)),
        }
    }

    /// Bound `|F(s)| ≤ M' min{|s|^{p1}, |s|^{p2}}` with `M' = M / min{p1, p2}`.
    pub fn m_prime(&self) -> f64 {
        self.m / self.p1.min(self.p2)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::PurePower { .. } => "pure_power",
            Kind::DoublePowerMin { .. } => "double_power_min",
            Kind::RationalPower { .. } => "rational_power",
            Kind::Tabulated(_) => "tabulated",
        }
    }
}

/// Fritsch-Carlson monotone cubic through `(0, 0)` and the user samples.
/// Past the last knot the interpolant continues linearly with its end slope.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    // cumulative integral at each knot
    cum: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::param("tabulated nonlinearity needs at least one sample"));
        }
        let mut x = vec![0.0];
        let mut y = vec![0.0];
        for &(s, v) in samples {
            if !(s > *x.last().unwrap()) || !v.is_finite() {
                return Err(Error::param("tabulated samples must have strictly increasing positive s and finite f"));
            }
            x.push(s);
            y.push(v);
        }
        let n = x.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut d = vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            d[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { 0.5 * (delta[i - 1] + delta[i]) };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                d[i] = 0.0;
                d[i + 1] = 0.0;
                continue;
            }
            let a = d[i] / delta[i];
            let b = d[i + 1] / delta[i];
            let h = a * a + b * b;
            if h > 9.0 {
                let t = 3.0 / h.sqrt();
                d[i] = t * a * delta[i];
                d[i + 1] = t * b * delta[i];
            }
        }
        let mut c = MonotoneCubic { x, y, d, cum: vec![0.0; n] };
        let gl = GaussLegendre::new(3);
        for i in 0..n - 1 {
            let seg = gl.integrate(c.x[i], c.x[i + 1], |s| c.segment(i, s));
            c.cum[i + 1] = c.cum[i] + seg;
        }
        Ok(c)
    }

    fn segment(&self, i: usize, s: f64) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let t = (s - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    fn locate(&self, s: f64) -> usize {
        match self.x.binary_search_by(|v| v.partial_cmp(&s).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let last = self.x.len() - 1;
        if s >= self.x[last] {
            return self.y[last] + self.d[last] * (s - self.x[last]);
        }
        self.segment(self.locate(s), s)
    }

    /// `∫_0^s` of the interpolant, exact for each cubic piece.
    pub fn integral(&self, s: f64) -> f64 {
        let last = self.x.len() - 1;
        if s >= self.x[last] {
            let ds = s - self.x[last];
            return self.cum[last] + self.y[last] * ds + 0.5 * self.d[last] * ds * ds;
        }
        let i = self.locate(s);
        let gl = GaussLegendre::new(3);
        self.cum[i] + gl.integrate(self.x[i], s, |t| self.segment(i, t))
    }
}

/// Worst grid point of one hypothesis check. `margin ≥ 0` means satisfied there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub s: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub ok: bool,
    /// `None` only when no grid point was tested.
    pub witness: Option<Witness>,
    pub points: usize,
}

impl Check {
    fn from_margins(margins: impl Iterator<Item = (f64, f64)>, tol: f64) -> Self {
        let mut worst: Option<Witness> = None;
        let mut points = 0;
        for (s, margin) in margins {
            points += 1;
            let m = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
            if worst.is_none_or(|w| m < w.margin) {
                worst = Some(Witness { s, margin: m });
            }
        }
        let ok = worst.is_none_or(|w| w.margin >= -tol);
        Check { ok, witness: worst, points }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub h0: Check,
    pub h1p: Check,
    pub h2p: Check,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_len: usize,
    /// Slack allowed on the sign of each margin.
    pub tolerance: f64,
}

impl HypothesisReport {
    pub fn all_ok(&self) -> bool {
        self.h0.ok && self.h1p.ok && self.h2p.ok
    }
}

/// Slack on margins; `F` from quadrature is only good to `PRIMITIVE_REL_TOL`.
pub const HYPOTHESIS_TOL: f64 = 1e-9;

/// Log-spaced grid with `n ≥ 2` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Grid certificate for (h0), (h'1), (h'2).
///
/// * h0: relative margin `1 - f/(M·min{s^{p1-1}, s^{p2-1}})` at each point,
///   `-1` where `f(s) ≤ 0`.
/// * h'1: relative increase of `f(s)/s` between consecutive points.
/// * h'2: relative decrease of `F(s)/s^μ` between consecutive points below `s_*`.
pub fn check_hypotheses(nl: &Nonlinearity, grid: &[f64]) -> Result<HypothesisReport> {
    if grid.is_empty() {
        return Err(Error::param("hypothesis grid is empty"));
    }
    if grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("hypothesis grid must be strictly increasing and positive"));
    }
    let tol = HYPOTHESIS_TOL;
    let fs: Vec<f64> = grid.iter().map(|&s| nl.f(s)).collect();

    let h0 = Check::from_margins(
        grid.iter().zip(&fs).map(|(&s, &f)| {
            let bound = nl.m * pow(s, nl.p1 - 1.0).min(pow(s, nl.p2 - 1.0));
            let margin = if f > 0.0 { 1.0 - f / bound } else { -1.0 };
            (s, margin)
        }),
        1e-12,
    );

    let ratio: Vec<f64> = grid.iter().zip(&fs).map(|(&s, &f)| f / s).collect();
    let h1p = Check::from_margins(
        (1..grid.len()).map(|i| {
            let scale = ratio[i - 1].abs().max(f64::MIN_POSITIVE);
            (grid[i], (ratio[i] - ratio[i - 1]) / scale)
        }),
        1e-12,
    );

    let below: Vec<f64> = grid.iter().copied().filter(|&s| s < nl.s_star).collect();
    let mut q = Vec::with_capacity(below.len());
    for &s in &below {
        q.push(nl.primitive(s)? / pow(s, nl.mu));
    }
    let h2p = Check::from_margins(
        (1..below.len()).map(|i| {
            let scale = q[i - 1].abs().max(f64::MIN_POSITIVE);
            (below[i], (q[i - 1] - q[i]) / scale)
        }),
        tol,
    );

    Ok(HypothesisReport {
        h0,
        h1p,
        h2p,
        grid_min: grid[0],
        grid_max: *grid.last().unwrap(),
        grid_len: grid.len(),
        tolerance: tol,
    })
}

/// Serialized form of a nonlinearity:
/// `{"kind": "...", "p1":, "p2":, "M":, "mu":, "s_star":}`; `s_star: null` means `+∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p2: Option<f64>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Absent: kind default. `null`: `+∞`.
    #[serde(default, with = "s_star_field", skip_serializing_if = "Option::is_none")]
    pub s_star: Option<Option<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<(f64, f64)>>,
}

mod s_star_field {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Option<f64>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(Some(x)) => s.serialize_f64(*x),
            _ => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Option<f64>>, D::Error> {
        Ok(Some(Option::<f64>::deserialize(d)?))
    }
}

impl NonlinearityConfig {
    pub fn build(&self) -> Result<Nonlinearity> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::param(format!("nonlinearity '{}' needs '{name}'", self.kind)))
        };
        let mut nl = match self.kind.as_str() {
            "pure_power" => {
                let p = self.p.or(self.p2).ok_or_else(|| Error::param("pure_power needs 'p' or 'p2'"))?;
                let mut nl = Nonlinearity::pure_power(p);
                if let Some(p1) = self.p1 {
                    nl.p1 = p1;
                }
                if let Some(p2) = self.p2 {
                    nl.p2 = p2;
                }
                nl
            }
            "double_power_min" => Nonlinearity::double_power_min(need(self.p1, "p1")?, need(self.p2, "p2")?),
            "rational_power" => Nonlinearity::rational_power(need(self.p1, "p1")?, need(self.p2, "p2")?),
            "tabulated" => {
                let samples = self.samples.as_ref().ok_or_else(|| Error::param("tabulated needs 'samples'"))?;
                let s_star = match self.s_star {
                    Some(Some(v)) => v,
                    Some(None) => f64::INFINITY,
                    None => return Err(Error::param("tabulated needs 's_star'")),
                };
                Nonlinearity::tabulated(
                    samples,
                    need(self.p1, "p1")?,
                    need(self.p2, "p2")?,
                    self.m.unwrap_or(1.0),
                    need(self.mu, "mu")?,
                    s_star,
                )?
            }
            other => return Err(Error::param(format!("unknown nonlinearity kind '{other}'"))),
        };
        if let Some(m) = self.m {
            nl.m = m;
        }
        if let Some(mu) = self.mu {
            nl.mu = mu;
        }
        match self.s_star {
            Some(Some(v)) => nl.s_star = v,
            Some(None) => nl.s_star = f64::INFINITY,
            None => {}
        }
        nl.validate()?;
        Ok(nl)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f_examples() {
        let dp = Nonlinearity::double_power_min(3.0, 8.0);
        assert_eq!(dp.f(0.5), 0.0078125);
        assert_eq!(dp.f(-1.0), 0.0);
        assert_eq!(Nonlinearity::pure_power(4.0).f(-1.0), 0.0);
        assert_eq!(Nonlinearity::rational_power(3.0, 4.0).f(1.0), 0.5);
        assert_eq!(Nonlinearity::rational_power(3.0, 4.0).f(-2.0), 0.0);
        assert_eq!(dp.f(3.0), 3.0);
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(Nonlinearity::pure_power(4.0).primitive(2.0).unwrap(), 4.0);
        let dp = Nonlinearity::double_power_min(3.0, 8.0);
        assert_eq!(dp.primitive(1.0).unwrap(), 0.125);
        let q = adaptive(|t| dp.f(t), 0.0, 1.0, 1e-13).unwrap();
        assert!((q - 0.125).abs() < 1e-12);
        assert_eq!(dp.primitive(0.0).unwrap(), 0.0);
        assert_eq!(dp.primitive(-3.0).unwrap(), 0.0);
        assert!((dp.primitive(2.0).unwrap() - (0.125 + 1.5)).abs() < 1e-15);
    }

    #[test]
    fn rational_power_primitive_closed_form_p2_4() {
        // s³/(1+s²) integrates to s²/2 - ln(1+s²)/2
        let nl = Nonlinearity::rational_power(3.0, 4.0);
        for s in [0.01f64, 0.3, 1.0, 2.5, 40.0] {
            let x = s * s;
            let exact = if s < 0.1 {
                // ½(x - ln(1 + x)) = x²/4 - x³/6 + x⁴/8 - ...
                x * x / 4.0 - x * x * x / 6.0 + x.powi(4) / 8.0 - x.powi(5) / 10.0
            } else {
                0.5 * (x - x.ln_1p())
            };
            let got = nl.primitive(s).unwrap();
            assert!(((got - exact) / exact).abs() < 1e-9, "s = {s}: {got} vs {exact}");
        }
    }

    #[test]
    fn hypotheses_double_power_min() {
        let nl = Nonlinearity::double_power_min(3.0, 8.0);
        let r = check_hypotheses(&nl, &log_grid(1e-4, 1e3, 400)).unwrap();
        assert!(r.all_ok(), "{r:?}");
    }

    #[test]
    fn hypotheses_pure_power_with_mismatched_p1() {
        let mut nl = Nonlinearity::pure_power(4.0);
        nl.p1 = 3.0;
        let r = check_hypotheses(&nl, &log_grid(1e-4, 1e3, 200)).unwrap();
        assert!(!r.h0.ok);
        let w = r.h0.witness.unwrap();
        assert!(w.margin < 0.0);
        // s³ ≤ M min{s², s³} breaks where min picks s², i.e. above s = 1
        assert!(w.s > 1.0);
        assert!(r.h1p.ok && r.h2p.ok);
    }

    #[test]
    fn hypotheses_rational_power_h2p() {
        let nl = Nonlinearity::rational_power(3.0, 4.0).with_mu(4.0).with_s_star(f64::INFINITY);
        let r = check_hypotheses(&nl, &log_grid(1e-3, 1e3, 120)).unwrap();
        assert!(r.h2p.ok, "{:?}", r.h2p);
        assert!(r.all_ok());
    }

    #[test]
    fn failing_check_carries_witness() {
        // f(s)/s decreasing: violates h'1
        let nl = Nonlinearity::tabulated(&[(1.0, 1.0), (2.0, 1.1), (3.0, 1.2)], 3.0, 3.0, 1.0, 3.0, 1.0).unwrap();
        let r = check_hypotheses(&nl, &log_grid(0.5, 3.0, 30)).unwrap();
        assert!(!r.h1p.ok);
        assert!(r.h1p.witness.is_some());
    }

    #[test]
    fn grid_is_validated() {
        let nl = Nonlinearity::pure_power(3.0);
        assert!(check_hypotheses(&nl, &[]).is_err());
        assert!(check_hypotheses(&nl, &[0.0, 1.0]).is_err());
        assert!(check_hypotheses(&nl, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn tabulated_reproduces_power_samples() {
        let samples: Vec<(f64, f64)> = (1..=200).map(|i| {
            let s = i as f64 * 0.02;
            (s, s.powi(3))
        }).collect();
        let t = Nonlinearity::tabulated(&samples, 4.0, 4.0, 1.0, 4.0, f64::INFINITY).unwrap();
        for s in [0.1, 0.77, 1.5, 3.9] {
            assert!((t.f(s) - s.powi(3)).abs() < 1e-3 * s.powi(3).max(1e-3));
            let exact = s.powi(4) / 4.0;
            assert!((t.primitive(s).unwrap() - exact).abs() < 1e-3 * exact.max(1e-4));
        }
        // linear extension past the last knot is continuous
        let last = 4.0;
        assert!((t.f(last + 1e-9) - t.f(last - 1e-9)).abs() < 1e-6);
    }

    #[test]
    fn tabulated_is_monotone_between_knots() {
        let t = MonotoneCubic::new(&[(1.0, 0.1), (1.1, 0.2), (3.0, 5.0), (3.2, 5.01)]).unwrap();
        let mut prev = 0.0;
        for i in 1..400 {
            let v = t.eval(i as f64 * 0.01);
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn config_defaults_and_round_trip() {
        let json = r#"{"kind": "double_power_min", "p1": 3, "p2": 8}"#;
        let cfg: NonlinearityConfig = serde_json::from_str(json).unwrap();
        let nl = cfg.build().unwrap();
        assert_eq!(nl.mu, 8.0);
        assert_eq!(nl.s_star, 1.0);

        let json = r#"{"kind": "rational_power", "p1": 3, "p2": 4, "M": 1, "mu": 4, "s_star": null}"#;
        let cfg: NonlinearityConfig = serde_json::from_str(json).unwrap();
        assert!(cfg.build().unwrap().s_star.is_infinite());
        let back: NonlinearityConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);

        assert!(serde_json::from_str::<NonlinearityConfig>(r#"{"kind": "pure_power", "q": 3}"#).is_err());
        let bad: NonlinearityConfig = serde_json::from_str(r#"{"kind": "cubic"}"#).unwrap();
        assert!(bad.build().is_err());
        let bad: NonlinearityConfig = serde_json::from_str(r#"{"kind": "pure_power", "p": 1.5}"#).unwrap();
        assert!(bad.build().is_err());
    }

    #[test]
    fn m_prime_bounds_primitive() {
        let nl = Nonlinearity::double_power_min(3.0, 8.0);
        for s in log_grid(1e-3, 1e3, 100) {
            let bound = nl.m_prime() * s.powf(nl.p1).min(s.powf(nl.p2));
            assert!(nl.primitive(s).unwrap() <= bound * (1.0 + 1e-12));
        }
    }
}
