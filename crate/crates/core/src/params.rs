use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

/// A full problem instance `-Δu + A|x|^{-α} u = f(u)` in `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParams {
    pub dim: u32,
    pub alpha: f64,
    pub a: f64,
    pub nonlinearity: Nonlinearity,
}

impl ProblemParams {
    pub fn new(dim: u32, alpha: f64, a: f64, nonlinearity: Nonlinearity) -> Result<Self> {
        let p = ProblemParams { dim, alpha, a, nonlinearity };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(Error::param(format!("dimension N must be >= 3, got {}", self.dim)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::param(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::param(format!("A must be positive, got {}", self.a)));
        }
        self.nonlinearity.validate()
    }

    pub fn with_a(&self, a: f64) -> Self {
        ProblemParams { a, ..self.clone() }
    }
}

/// Surface measure of the unit sphere in `R^d`, `2π^{d/2}/Γ(d/2)`.
pub fn sphere_measure(d: u32) -> f64 {
    use std::f64::consts::PI;
    assert!(d >= 1);
    let (mut s, mut k) = if d.is_multiple_of(2) { (2.0 * PI, 2) } else { (2.0, 1) };
    while k < d {
        s *= 2.0 * PI / k as f64;
        k += 2;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_measures() {
        assert_eq!(sphere_measure(1), 2.0);
        assert_eq!(sphere_measure(2), 2.0 * PI);
        assert!((sphere_measure(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_measure(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_measure(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
        assert!((sphere_measure(6) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_problems() {
        let nl = Nonlinearity::pure_power(4.0);
        assert!(ProblemParams::new(2, 1.0, 1.0, nl.clone()).is_err());
        assert!(ProblemParams::new(4, 0.0, 1.0, nl.clone()).is_err());
        assert!(ProblemParams::new(4, 1.0, -1.0, nl.clone()).is_err());
        let p = ProblemParams::new(4, 3.0, 1.0, nl).unwrap();
        assert_eq!(p.with_a(7.0).a, 7.0);
    }
}
