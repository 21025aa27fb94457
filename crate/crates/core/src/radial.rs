//! Radial problem on the annulus `r_0 ≤ |x| ≤ R_max`.
//!
//! `‖u‖_A² = σ_N ∫ (u'² + A r^{-α} u²) r^{N-1} dr` is discretized with P1
//! elements (exact weight integrals per element), lumped mass and
//! cell-integrated potential. `u(R_max) = 0`; nothing is imposed at `r_0`.

use std::sync::Arc;

use serde::Serialize;

use crate::banded::SymBanded;
use crate::error::{Error, Result};
use crate::exponents::exponent_set;
use crate::fit::loglog_fit;
use crate::mesh::{power_integral, Axis};
use crate::nehari::{QuadraticForm, SolveReport, Tolerances};
use crate::params::{sphere_measure, ProblemParams};

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: u32,
    axis: Axis,
}

impl RadialGrid {
    /// `n` geometrically spaced nodes from `r_min` to `r_max`; the last one carries the Dirichlet condition.
    pub fn geometric(dim: u32, r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) || n < 3 {
            return Err(Error::InvalidGrid(format!(
                "geometric grid needs 0 < r_min < r_max and n >= 3 (got {r_min}, {r_max}, {n})"
            )));
        }
        let q = (r_max / r_min).ln() / (n - 1) as f64;
        let mut nodes: Vec<f64> = (0..n).map(|i| r_min * (q * i as f64).exp()).collect();
        nodes[n - 1] = r_max;
        Self::from_nodes(dim, nodes)
    }

    /// Explicit nodes, strictly increasing and positive; the last one is the Dirichlet node.
    pub fn from_nodes(dim: u32, mut nodes: Vec<f64>) -> Result<Self> {
        if dim < 3 {
            return Err(Error::param(format!("dimension N must be >= 3, got {dim}")));
        }
        if nodes.len() < 3 || !(nodes[0] > 0.0) {
            return Err(Error::InvalidGrid("radial grid needs >= 3 positive nodes".into()));
        }
        let boundary = nodes.pop().unwrap();
        // the first cell reaches the origin, where u is continued by u(r_1)
        Ok(RadialGrid { dim, axis: Axis::new(nodes, boundary, 0.0, dim as f64 - 1.0)? })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// Free nodes (the Dirichlet node excluded).
    pub fn nodes(&self) -> &[f64] {
        self.axis.nodes()
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.axis.nodes()[0]
    }

    pub fn r_max(&self) -> f64 {
        self.axis.boundary()
    }

    /// Quadrature weights `σ_N ∫_{cell} r^{N-1} dr`.
    pub fn weights(&self) -> Vec<f64> {
        let s = sphere_measure(self.dim);
        self.axis.mass().into_iter().map(|m| s * m).collect()
    }

    pub(crate) fn axis(&self) -> &Axis {
        &self.axis
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl Field1D {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("field has {} values, grid has {}", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("field contains non-finite values"));
        }
        Ok(Field1D { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Linear interpolation in `r`; zero beyond `R_max`.
    pub fn at(&self, r: f64) -> f64 {
        self.grid.axis.interpolate(&self.values, r)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Node of the largest value.
    pub fn argmax(&self) -> f64 {
        let (i, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        self.grid.nodes()[i]
    }
}

/// Assembled radial operator for one problem instance.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    params: ProblemParams,
    grid: Arc<RadialGrid>,
    form: QuadraticForm,
    potential: Vec<f64>,
}

pub fn assemble_radial(params: &ProblemParams, grid: Arc<RadialGrid>) -> Result<RadialOperator> {
    params.validate()?;
    if grid.dim() != params.dim {
        return Err(Error::InvalidGrid(format!("grid dimension {} differs from N = {}", grid.dim(), params.dim)));
    }
    let peak = params.a * grid.r_min().powf(-params.alpha);
    if !peak.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "A r^-alpha overflows at the first node r = {:e}",
            grid.r_min()
        )));
    }
    let s = sphere_measure(params.dim);
    let axis = grid.axis();
    let e = params.dim as f64 - 1.0 - params.alpha;
    let potential: Vec<f64> = (0..axis.len())
        .map(|i| {
            let (a, b) = axis.cell(i);
            // r^{N-1-α} is not integrable at 0 for α >= N; cut at the first node there
            let a = if i == 0 && e <= -1.0 { grid.r_min() } else { a };
            s * params.a * power_integral(a, b, e)
        })
        .collect();
    if potential.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidGrid("potential cell integral overflows".into()));
    }
    let (diag, off) = axis.stiffness();
    let n = axis.len();
    let mut m = SymBanded::zeros(n, 1);
    for i in 0..n {
        m.add(i, i, s * diag[i] + potential[i]);
        if i + 1 < n {
            m.add(i + 1, i, s * off[i]);
        }
    }
    let form = QuadraticForm::new(m, grid.weights())?;
    Ok(RadialOperator { params: params.clone(), grid, form, potential })
}

impl RadialOperator {
    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn form(&self) -> &QuadraticForm {
        &self.form
    }

    fn check(&self, u: &Field1D) -> Result<()> {
        if !Arc::ptr_eq(&u.grid, &self.grid) && *u.grid != *self.grid {
            return Err(Error::InvalidGrid("field lives on a different grid".into()));
        }
        Ok(())
    }

    /// `‖u‖_A²`.
    pub fn norm2(&self, u: &Field1D) -> f64 {
        self.form.norm2(&u.values)
    }

    /// `A ∫ |x|^{-α} u²`.
    pub fn potential_part(&self, u: &Field1D) -> f64 {
        self.potential.iter().zip(&u.values).map(|(p, x)| p * x * x).sum()
    }

    pub fn energy(&self, u: &Field1D) -> Result<f64> {
        self.check(u)?;
        self.form.energy(&self.params.nonlinearity, &u.values)
    }

    pub fn grad(&self, u: &Field1D) -> Result<Field1D> {
        self.check(u)?;
        let g = self.form.grad(&self.params.nonlinearity, &u.values);
        Ok(Field1D { grid: self.grid.clone(), values: g })
    }

    /// `I'(u)[v]`.
    pub fn directional(&self, u: &Field1D, v: &Field1D) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.form.directional(&self.params.nonlinearity, &u.values, &v.values))
    }

    pub fn nehari_project(&self, u: &Field1D, tol: &Tolerances) -> Result<f64> {
        self.check(u)?;
        self.form.nehari_project(&self.params.nonlinearity, &u.values, tol)
    }

    pub fn ground_state(&self, init: &Field1D, tol: &Tolerances, provenance: &str) -> Result<(Field1D, SolveReport)> {
        self.check(init)?;
        let (u, rep) = self.form.ground_state(&self.params.nonlinearity, &init.values, tol, provenance)?;
        Ok((Field1D { grid: self.grid.clone(), values: u }, rep))
    }

    /// Gaussian shell `exp(-((r - c)/c)²)` with `c = 2 max{A^{1/α}, 1}`, clipped to the grid.
    pub fn default_init(&self) -> Field1D {
        let c = (2.0 * self.params.a.powf(1.0 / self.params.alpha).max(1.0)).min(0.25 * self.grid.r_max());
        Field1D::from_fn(self.grid.clone(), |r| (-((r - c) / c).powi(2)).exp()).expect("finite profile")
    }
}

/// Ground state on `grid`, started from `init` or the default shell.
pub fn ground_state_radial(
    params: &ProblemParams,
    grid: Arc<RadialGrid>,
    init: Option<&Field1D>,
    tol: &Tolerances,
) -> Result<(Field1D, SolveReport)> {
    let op = assemble_radial(params, grid)?;
    match init {
        Some(u) => op.ground_state(u, tol, "user"),
        None => op.ground_state(&op.default_init(), tol, "gaussian_shell"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    /// Least-squares slope of `log level` against `log A`.
    pub slope: f64,
    pub intercept: f64,
    /// `(N-2)/(α-2) · (p-2*)/(p-2)` with `p = max{2*_α, p1}` (α < 2) or `min{2*_α, p2}` (α > 2).
    pub lower_bound_exponent: Option<f64>,
    /// The equivalent min-expression in terms of `(N-1)/α` and `p1` or `p2`.
    pub min_expression: Option<f64>,
}

pub fn fit_level_scaling(levels: &[(f64, f64)], dim: u32, alpha: f64, p1: f64, p2: f64) -> Result<ScalingFit> {
    if levels.iter().any(|&(a, l)| !(a > 0.0) || !(l > 0.0)) {
        return Err(Error::param("level scaling needs positive A values and positive levels"));
    }
    let mut distinct: Vec<f64> = levels.iter().map(|l| l.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::param("level scaling needs at least 3 distinct A values"));
    }
    let (slope, intercept) = loglog_fit(levels)?;
    let (lower_bound_exponent, min_expression) = scaling_exponents(dim, alpha, p1, p2);
    Ok(ScalingFit { slope, intercept, lower_bound_exponent, min_expression })
}

fn scaling_exponents(dim: u32, alpha: f64, p1: f64, p2: f64) -> (Option<f64>, Option<f64>) {
    let Ok(e) = exponent_set(dim, alpha) else { return (None, None) };
    let n = dim as f64;
    if alpha == 2.0 || alpha >= 2.0 * n - 2.0 {
        return (None, None);
    }
    let ts = e.two_star;
    let p = if alpha < 2.0 { e.two_star_alpha.max(p1) } else { e.two_star_alpha.min(p2) };
    let lb = (n - 2.0) / (alpha - 2.0) * (p - ts) / (p - 2.0);
    let second = if alpha < 2.0 {
        (n - 2.0) / (2.0 - alpha) * (ts - p1) / (p1 - 2.0)
    } else {
        (n - 2.0) / (alpha - 2.0) * (p2 - ts) / (p2 - 2.0)
    };
    (Some(lb), Some(((n - 1.0) / alpha).min(second)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Nonlinearity;

    fn params(a: f64) -> ProblemParams {
        ProblemParams::new(4, 3.0, a, Nonlinearity::pure_power(5.0)).unwrap()
    }

    #[test]
    fn zero_field_and_linearity_in_a() {
        let g = Arc::new(RadialGrid::geometric(4, 1e-3, 50.0, 400).unwrap());
        let op1 = assemble_radial(&params(2.0), g.clone()).unwrap();
        let op2 = assemble_radial(&params(4.0), g.clone()).unwrap();
        let z = Field1D::new(g.clone(), vec![0.0; g.len()]).unwrap();
        assert_eq!(op1.norm2(&z), 0.0);
        let u = Field1D::from_fn(g.clone(), |r| (-r * r).exp()).unwrap();
        assert!((op2.potential_part(&u) - 2.0 * op1.potential_part(&u)).abs() < 1e-12 * op2.potential_part(&u));
        let grad1 = op1.norm2(&u) - op1.potential_part(&u);
        let grad2 = op2.norm2(&u) - op2.potential_part(&u);
        assert!((grad1 - grad2).abs() < 1e-12 * grad1);
    }

    #[test]
    fn grid_validation() {
        assert!(RadialGrid::geometric(4, 0.0, 1.0, 10).is_err());
        assert!(RadialGrid::geometric(4, 1.0, 0.5, 10).is_err());
        assert!(RadialGrid::geometric(2, 1e-3, 1.0, 10).is_err());
        let g = Arc::new(RadialGrid::geometric(4, 1e-300, 1.0, 50).unwrap());
        let p = ProblemParams::new(4, 3.0, 1.0, Nonlinearity::pure_power(5.0)).unwrap();
        assert!(matches!(assemble_radial(&p, g), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn exact_power_data_fit() {
        let data: Vec<(f64, f64)> = [1.0, 3.0, 10.0, 40.0].iter().map(|&a: &f64| (a, 2.5 * a.powf(0.37))).collect();
        let fit = fit_level_scaling(&data, 4, 3.0, 5.0, 5.0).unwrap();
        assert!((fit.slope - 0.37).abs() < 1e-12);
        assert!(fit_level_scaling(&data[..2], 4, 3.0, 5.0, 5.0).is_err());
        assert!(fit_level_scaling(&[(1.0, 1.0), (2.0, -1.0), (3.0, 1.0)], 4, 3.0, 5.0, 5.0).is_err());
    }

    #[test]
    fn scaling_exponent_values() {
        let (lb, mn) = scaling_exponents(4, 3.0, 5.0, 5.0);
        assert!((lb.unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!((mn.unwrap() - 2.0 / 3.0).abs() < 1e-14);
        let (lb, mn) = scaling_exponents(4, 3.0, 3.0, 8.0);
        assert!((mn.unwrap() - 1.0).abs() < 1e-14);
        assert!((lb.unwrap() - 1.0).abs() < 1e-14);
        // α < 2: p = max{2*_α, p1}
        let (lb, mn) = scaling_exponents(4, 1.0, 2.5, 8.0);
        assert!((lb.unwrap() - mn.unwrap()).abs() < 1e-12);
    }
}
