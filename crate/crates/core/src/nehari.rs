//! Discrete energy, its gradient in the `A`-metric and Nehari-manifold descent.
//!
//! A discretization supplies a symmetric positive definite matrix `L` with
//! `uᵀLu ≈ ‖u‖_A²` and lumped mass weights `w` with `Σ w_i g(u_i) ≈ ∫ g(u)`.
//! The discrete energy is `I(u) = ½ uᵀLu - Σ w_i F(u_i)`.

use serde::{Deserialize, Serialize};

use crate::banded::{BandedCholesky, SymBanded};
use crate::error::{Error, Result};
use crate::nonlinearity::Nonlinearity;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Stop when `‖grad‖_A / ‖u‖_A` falls below this.
    pub residual: f64,
    pub max_iterations: usize,
    /// Descent step in the `A`-metric.
    pub step: f64,
    /// Relative plateau tolerance of the fibering derivative.
    pub nehari_rel: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: 1e-8, max_iterations: 5000, step: 1.0, nehari_rel: 1e-12, t_min: 1e-8, t_max: 1e8 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.residual > 0.0) || self.max_iterations == 0 {
            return Err(Error::param("residual tolerance and max_iterations must be positive"));
        }
        if !(self.step > 0.0 && self.step <= 1.0) {
            return Err(Error::param(format!("descent step must lie in (0, 1], got {}", self.step)));
        }
        if !(self.nehari_rel >= 0.0) || !(self.t_min > 0.0 && self.t_max > self.t_min) {
            return Err(Error::param("need nehari_rel >= 0 and 0 < t_min < t_max"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub level: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Projection factor of the last Nehari step.
    pub nehari_t: f64,
    pub min_value: f64,
    /// Provenance of the initial guess.
    pub init: String,
    /// Symmetry deviation, filled in by the cylindrical solver.
    pub deviation: Option<f64>,
}

/// `L`, its Cholesky factor and the lumped mass weights.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    matrix: SymBanded,
    chol: BandedCholesky,
    weights: Vec<f64>,
}

impl QuadraticForm {
    pub fn new(matrix: SymBanded, weights: Vec<f64>) -> Result<Self> {
        if matrix.dim() != weights.len() {
            return Err(Error::InvalidGrid(format!(
                "operator has {} rows but {} weights",
                matrix.dim(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidGrid("mass weights must be positive and finite".into()));
        }
        let chol = matrix.cholesky()?;
        Ok(QuadraticForm { matrix, chol, weights })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn matrix(&self) -> &SymBanded {
        &self.matrix
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `uᵀLu`.
    pub fn norm2(&self, u: &[f64]) -> f64 {
        self.matrix.bilinear(u, u)
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.matrix.bilinear(u, v)
    }

    /// `Σ w_i g(u_i)`.
    pub fn integrate<G: Fn(f64) -> f64>(&self, u: &[f64], g: G) -> f64 {
        self.weights.iter().zip(u).map(|(w, &x)| w * g(x)).sum()
    }

    pub fn potential_energy(&self, nl: &Nonlinearity, u: &[f64]) -> Result<f64> {
        let mut s = 0.0;
        for (w, &x) in self.weights.iter().zip(u) {
            s += w * nl.primitive(x)?;
        }
        Ok(s)
    }

    pub fn energy(&self, nl: &Nonlinearity, u: &[f64]) -> Result<f64> {
        Ok(0.5 * self.norm2(u) - self.potential_energy(nl, u)?)
    }

    /// Riesz representative of `I'(u)` in the `L` inner product, `u - L⁻¹(w ∘ f(u))`.
    pub fn grad(&self, nl: &Nonlinearity, u: &[f64]) -> Vec<f64> {
        let mut load: Vec<f64> = self.weights.iter().zip(u).map(|(w, &x)| w * nl.f(x)).collect();
        self.chol.solve_in_place(&mut load);
        u.iter().zip(&load).map(|(a, b)| a - b).collect()
    }

    /// `I'(u)[v] = vᵀLu - Σ w_i f(u_i) v_i`.
    pub fn directional(&self, nl: &Nonlinearity, u: &[f64], v: &[f64]) -> f64 {
        self.inner(u, v) - self.weights.iter().zip(u).zip(v).map(|((w, &x), y)| w * nl.f(x) * y).sum::<f64>()
    }

    /// `g'(t) = t uᵀLu - Σ w_i f(t u_i) u_i` for the fibering map `g(t) = I(tu)`.
    pub fn fibering_derivative(&self, nl: &Nonlinearity, u: &[f64], t: f64) -> f64 {
        t * self.norm2(u) - self.integrate_pair(nl, u, t)
    }

    fn integrate_pair(&self, nl: &Nonlinearity, u: &[f64], t: f64) -> f64 {
        self.weights.iter().zip(u).map(|(w, &x)| w * nl.f(t * x) * x).sum()
    }

    /// Smallest `t > 0` with `g'(t) = 0`, up to a relative plateau tolerance.
    ///
    /// Works with `h(t) = g'(t)/t = uᵀLu - Σ w f(tu) u / t`, nonincreasing
    /// in `t` when `f(s)/s` is nondecreasing. The bracket starts at `t = 1`
    /// and is widened geometrically inside `[t_min, t_max]`.
    pub fn nehari_project(&self, nl: &Nonlinearity, u: &[f64], tol: &Tolerances) -> Result<f64> {
        let q = self.norm2(u);
        if !(q > 0.0) {
            return Err(Error::param("Nehari projection of the zero field"));
        }
        let thr = tol.nehari_rel * q;
        let h = |t: f64| q - self.integrate_pair(nl, u, t) / t;
        let no_root = Error::NoSignChange { t_min: tol.t_min, t_max: tol.t_max };
        let (mut lo, mut hi) = if h(1.0) > thr {
            let mut lo = 1.0;
            let mut hi = 2.0;
            while h(hi) > thr {
                if hi >= tol.t_max {
                    return Err(no_root);
                }
                lo = hi;
                hi = (hi * 2.0).min(tol.t_max);
            }
            (lo, hi)
        } else {
            let mut hi = 1.0;
            let mut lo = 0.5;
            while h(lo) <= thr {
                if lo <= tol.t_min {
                    return Err(no_root);
                }
                hi = lo;
                lo = (lo * 0.5).max(tol.t_min);
            }
            (lo, hi)
        };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid) > thr {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi {
                break;
            }
        }
        Ok(hi)
    }

    /// Nehari descent `u ← t*(u) · max(u - τ grad I(u), 0)` from `init`.
    pub fn ground_state(
        &self,
        nl: &Nonlinearity,
        init: &[f64],
        tol: &Tolerances,
        provenance: &str,
    ) -> Result<(Vec<f64>, SolveReport)> {
        tol.validate()?;
        if init.len() != self.dim() {
            return Err(Error::InvalidGrid(format!("init has {} values, grid has {}", init.len(), self.dim())));
        }
        if init.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("init contains non-finite values"));
        }
        let mut u: Vec<f64> = init.iter().map(|x| x.max(0.0)).collect();
        if u.iter().all(|&x| x == 0.0) {
            return Err(Error::param("init must have a nonzero positive part"));
        }
        let mut best: Option<(f64, Vec<f64>, f64)> = None;
        let mut t = 1.0;
        let mut residual = f64::INFINITY;
        for it in 0..=tol.max_iterations {
            t = self.nehari_project(nl, &u, tol)?;
            u.iter_mut().for_each(|x| *x *= t);
            let g = self.grad(nl, &u);
            residual = (self.norm2(&g) / self.norm2(&u)).sqrt();
            if residual < tol.residual {
                let report = self.report(nl, &u, it, residual, t, provenance)?;
                log::debug!("{provenance}: converged after {it} iterations, level {}", report.level);
                return Ok((u, report));
            }
            if best.as_ref().is_none_or(|b| residual < b.0) {
                best = Some((residual, u.clone(), t));
            }
            if it == tol.max_iterations {
                break;
            }
            for (x, gi) in u.iter_mut().zip(&g) {
                *x = (*x - tol.step * gi).max(0.0);
            }
            if u.iter().all(|&x| x == 0.0) {
                return Err(Error::param("descent step removed the whole positive part"));
            }
        }
        let (res, ub, tb) = best.unwrap_or((residual, u, t));
        let report = self.report(nl, &ub, tol.max_iterations, res, tb, provenance)?;
        Err(Error::MaxIterations(Box::new(report)))
    }

    fn report(&self, nl: &Nonlinearity, u: &[f64], it: usize, residual: f64, t: f64, init: &str) -> Result<SolveReport> {
        Ok(SolveReport {
            level: self.energy(nl, u)?,
            iterations: it,
            residual,
            nehari_t: t,
            min_value: u.iter().copied().fold(f64::INFINITY, f64::min),
            init: init.to_string(),
            deviation: None,
        })
    }
}
