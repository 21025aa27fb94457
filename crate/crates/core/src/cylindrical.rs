//! The reduced problem for `u(x) = u(|y|, |z|)`, `x = (y, z) ∈ R^K × R^{N-K}`.
//!
//! On the quadrant `(s, t) = (|y|, |z|)` the form is
//!
//! ```text
//! ‖u‖_A² = σ_K σ_{N-K} ∫∫ (u_s² + u_t² + A (s²+t²)^{-α/2} u²) s^{K-1} t^{N-K-1} ds dt.
//! ```
//!
//! over the quarter disc `s² + t² < R_max²`, the same ball the radial solver
//! uses. Each axis carries `n` cell-centred nodes `(i + 1/2) h`, `h = R_max/n`;
//! nodes with `√(s² + t²) ≥ R_max` carry the Dirichlet condition. The stencil
//! is the tensor product of the 1D P1 stiffness with lumped mass (5 points).
//! The axes `s = 0`, `t = 0` get no boundary condition.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::banded::SymBanded;
use crate::error::{Error, Result};
use crate::mesh::Axis;
use crate::nehari::{QuadraticForm, SolveReport, Tolerances};
use crate::params::{sphere_measure, ProblemParams};
use crate::quadrature::GaussLegendre;
use crate::radial::{assemble_radial, Field1D, RadialGrid};
use crate::testfn::{h_weight, BumpSpec};

/// Gauss-Legendre order per direction for potential cell integrals.
const CELL_ORDER: usize = 4;
/// Order for the cell touching the origin (angular factor, or the whole cell when `α >= N`).
const ORIGIN_CELL_ORDER: usize = 16;
/// Angular order for `radialize`.
const ANGLE_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct CylGrid {
    dim: u32,
    k: u32,
    n: usize,
    r_max: f64,
    s_axis: Axis,
    t_axis: Axis,
    // full index of each free node, and the inverse map (usize::MAX when pinned)
    active: Vec<usize>,
    slot: Vec<usize>,
}

impl CylGrid {
    pub fn new(dim: u32, k: u32, n: usize, r_max: f64) -> Result<Self> {
        if dim < 4 || k < 2 || k > dim - 2 {
            return Err(Error::param(format!("need 2 <= K <= N - 2 (got N = {dim}, K = {k})")));
        }
        if n < 2 || !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("need n >= 2 and R_max > 0 (got {n}, {r_max})")));
        }
        let h = r_max / n as f64;
        let nodes: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let s_axis = Axis::new(nodes.clone(), r_max, 0.0, k as f64 - 1.0)?;
        let t_axis = Axis::new(nodes.clone(), r_max, 0.0, (dim - k) as f64 - 1.0)?;
        let mut active = Vec::new();
        let mut slot = vec![usize::MAX; n * n];
        for i in 0..n {
            for j in 0..n {
                if nodes[i].hypot(nodes[j]) < r_max {
                    slot[i * n + j] = active.len();
                    active.push(i * n + j);
                }
            }
        }
        Ok(CylGrid { dim, k, n, r_max, s_axis, t_axis, active, slot })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn h(&self) -> f64 {
        self.r_max / self.n as f64
    }

    /// Nodes of the full `n × n` square, pinned ones included.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    /// Free nodes (inside the quarter disc).
    pub fn free_len(&self) -> usize {
        self.active.len()
    }

    pub fn is_free(&self, i: usize, j: usize) -> bool {
        self.slot[i * self.n + j] != usize::MAX
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Node coordinates (identical on both axes).
    pub fn nodes(&self) -> &[f64] {
        self.s_axis.nodes()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Same mesh with the roles of `K` and `N - K` exchanged.
    pub fn transposed(&self) -> CylGrid {
        CylGrid::new(self.dim, self.dim - self.k, self.n, self.r_max).expect("transposed grid is valid")
    }

    /// `σ_K σ_{N-K} m_s(i) m_t(j)` on the free nodes.
    pub fn weights(&self) -> Vec<f64> {
        let c = sphere_measure(self.k) * sphere_measure(self.dim - self.k);
        let ms = self.s_axis.mass();
        let mt = self.t_axis.mass();
        self.active.iter().map(|&f| c * ms[f / self.n] * mt[f % self.n]).collect()
    }

    fn gather(&self, values: &[f64]) -> Vec<f64> {
        self.active.iter().map(|&f| values[f]).collect()
    }

    fn scatter(&self, free: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        for (&f, &x) in self.active.iter().zip(free) {
            v[f] = x;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: Arc<CylGrid>,
    values: Vec<f64>,
}

impl Field2D {
    /// Values on the full square; entries at pinned nodes are set to zero.
    pub fn new(grid: Arc<CylGrid>, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("field has {} values, grid has {}", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("field contains non-finite values"));
        }
        for (f, v) in values.iter_mut().enumerate() {
            if grid.slot[f] == usize::MAX {
                *v = 0.0;
            }
        }
        Ok(Field2D { grid, values })
    }

    pub fn from_fn(grid: Arc<CylGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let x = grid.nodes();
        let mut values = Vec::with_capacity(grid.len());
        for &s in x {
            for &t in x {
                values.push(f(s, t));
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<CylGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Bilinear interpolation; zero on and beyond the Dirichlet edges.
    pub fn at(&self, s: f64, t: f64) -> f64 {
        let n = self.grid.n;
        let mut v = 0.0;
        for (i, wi) in self.grid.s_axis.stencil(s) {
            if i >= n || wi == 0.0 {
                continue;
            }
            for (j, wj) in self.grid.t_axis.stencil(t) {
                if j >= n || wj == 0.0 {
                    continue;
                }
                v += wi * wj * self.values[i * n + j];
            }
        }
        v
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(s, t)` of the largest value.
    pub fn argmax(&self) -> (f64, f64) {
        let (k, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &v)| if v > acc.1 { (k, v) } else { acc });
        let x = self.grid.nodes();
        (x[k / self.grid.n], x[k % self.grid.n])
    }

    /// `u(t, s)` on the grid with `K` and `N - K` exchanged.
    pub fn transpose(&self) -> Field2D {
        let g = Arc::new(self.grid.transposed());
        let n = g.n;
        let mut values = vec![0.0; g.len()];
        for i in 0..n {
            for j in 0..n {
                values[j * n + i] = self.values[i * n + j];
            }
        }
        Field2D { grid: g, values }
    }

    /// Rows `s,t,u` for external plotting.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["s", "t", "u"])?;
        let x = self.grid.nodes();
        for (i, &s) in x.iter().enumerate() {
            for (j, &t) in x.iter().enumerate() {
                wr.write_record([s.to_string(), t.to_string(), self.get(i, j).to_string()])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct CylOperator {
    params: ProblemParams,
    grid: Arc<CylGrid>,
    form: QuadraticForm,
    rho_grid: Arc<RadialGrid>,
}

fn cell_potential(grid: &CylGrid, alpha: f64, i: usize, j: usize, gl: &GaussLegendre, gl0: &GaussLegendre) -> f64 {
    let (a0, b0) = grid.s_axis.cell(i);
    let (a1, b1) = grid.t_axis.cell(j);
    let es = grid.k as i32 - 1;
    let et = (grid.dim - grid.k) as i32 - 1;
    let degree = (grid.dim - 2) as f64 - alpha;
    if i == 0 && j == 0 && degree + 2.0 > 0.0 {
        // Duffy split of [0, b]²: on t = s v the integrand is s^degree (1 + v²)^{-α/2} v^et
        let radial = b0.powf(degree + 2.0) / (degree + 2.0);
        let angular = |e: i32| gl0.integrate(0.0, 1.0, |v| (1.0 + v * v).powf(-0.5 * alpha) * v.powi(e));
        return radial * (angular(et) + angular(es));
    }
    let rule = if i == 0 && j == 0 { gl0 } else { gl };
    rule.integrate_2d((a0, b0), (a1, b1), |s, t| (s * s + t * t).powf(-0.5 * alpha) * s.powi(es) * t.powi(et))
}

pub fn assemble_cyl(params: &ProblemParams, grid: Arc<CylGrid>) -> Result<CylOperator> {
    params.validate()?;
    if grid.dim != params.dim {
        return Err(Error::InvalidGrid(format!("grid dimension {} differs from N = {}", grid.dim, params.dim)));
    }
    let n = grid.n;
    let c = sphere_measure(grid.k) * sphere_measure(grid.dim - grid.k);
    let (ds, os) = grid.s_axis.stiffness();
    let (dt, ot) = grid.t_axis.stiffness();
    let ms = grid.s_axis.mass();
    let mt = grid.t_axis.mass();
    let gl = GaussLegendre::new(CELL_ORDER);
    let gl0 = GaussLegendre::new(ORIGIN_CELL_ORDER);
    let mut m = SymBanded::zeros(grid.free_len(), n);
    for (idx, &f) in grid.active.iter().enumerate() {
        let (i, j) = (f / n, f % n);
        let p = params.a * cell_potential(&grid, params.alpha, i, j, &gl, &gl0);
        if !p.is_finite() {
            return Err(Error::InvalidGrid(format!("potential cell integral overflows at ({i}, {j})")));
        }
        m.add(idx, idx, c * (ds[i] * mt[j] + ms[i] * dt[j] + p));
        // couplings to pinned neighbours drop out (Dirichlet)
        if j + 1 < n && grid.is_free(i, j + 1) {
            m.add(grid.slot[f + 1], idx, c * ms[i] * ot[j]);
        }
        if i + 1 < n && grid.is_free(i + 1, j) {
            m.add(grid.slot[f + n], idx, c * os[i] * mt[j]);
        }
    }
    let form = QuadraticForm::new(m, grid.weights())?;
    let h = grid.h();
    let mut rho: Vec<f64> = Vec::new();
    let mut k = 0;
    loop {
        let r = (k as f64 + 0.5) * 0.5 * h;
        if r >= grid.r_max {
            break;
        }
        rho.push(r);
        k += 1;
    }
    rho.push(grid.r_max);
    let rho_grid = Arc::new(RadialGrid::from_nodes(grid.dim, rho)?);
    Ok(CylOperator { params: params.clone(), grid, form, rho_grid })
}

impl CylOperator {
    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn grid(&self) -> &Arc<CylGrid> {
        &self.grid
    }

    pub fn form(&self) -> &QuadraticForm {
        &self.form
    }

    /// ρ-grid (spacing `h/2`) that `radialize` projects onto.
    pub fn rho_grid(&self) -> &Arc<RadialGrid> {
        &self.rho_grid
    }

    fn check(&self, u: &Field2D) -> Result<()> {
        if !Arc::ptr_eq(&u.grid, &self.grid) && *u.grid != *self.grid {
            return Err(Error::InvalidGrid("field lives on a different grid".into()));
        }
        Ok(())
    }

    /// Values at the free nodes, in the operator's ordering.
    pub fn free_values(&self, u: &Field2D) -> Vec<f64> {
        self.grid.gather(&u.values)
    }

    pub fn from_free(&self, free: &[f64]) -> Field2D {
        Field2D { grid: self.grid.clone(), values: self.grid.scatter(free) }
    }

    pub fn norm2(&self, u: &Field2D) -> f64 {
        self.form.norm2(&self.free_values(u))
    }

    pub fn energy(&self, u: &Field2D) -> Result<f64> {
        self.check(u)?;
        self.form.energy(&self.params.nonlinearity, &self.free_values(u))
    }

    pub fn grad(&self, u: &Field2D) -> Result<Field2D> {
        self.check(u)?;
        Ok(self.from_free(&self.form.grad(&self.params.nonlinearity, &self.free_values(u))))
    }

    pub fn directional(&self, u: &Field2D, v: &Field2D) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.form.directional(&self.params.nonlinearity, &self.free_values(u), &self.free_values(v)))
    }

    pub fn nehari_project(&self, u: &Field2D, tol: &Tolerances) -> Result<f64> {
        self.check(u)?;
        self.form.nehari_project(&self.params.nonlinearity, &self.free_values(u), tol)
    }

    /// `u(s, t) = v(√(s² + t²))`.
    pub fn embed_radial(&self, v: &Field1D) -> Field2D {
        Field2D::from_fn(self.grid.clone(), |s, t| v.at(s.hypot(t))).expect("finite profile")
    }

    /// `H`-weighted average of `u` over the quarter circle of each radius of the ρ-grid.
    pub fn radialize(&self, u: &Field2D) -> Result<Field1D> {
        self.check(u)?;
        let gl = GaussLegendre::new(ANGLE_ORDER);
        let ang: Vec<(f64, f64, f64)> = gl
            .mapped(0.0, FRAC_PI_2)
            .map(|(th, w)| (th.cos(), th.sin(), w * h_weight(self.grid.dim, self.grid.k, th)))
            .collect();
        let total: f64 = ang.iter().map(|a| a.2).sum();
        Field1D::from_fn(self.rho_grid.clone(), |rho| {
            ang.iter().map(|&(c, s, w)| w * u.at(rho * c, rho * s)).sum::<f64>() / total
        })
    }

    /// `‖u - radialize(u)‖_A / ‖u‖_A` with the average embedded back on the grid.
    pub fn symmetry_deviation(&self, u: &Field2D) -> Result<f64> {
        self.check(u)?;
        let q = self.norm2(u);
        if !(q > 0.0) {
            return Err(Error::param("symmetry deviation of the zero field"));
        }
        let e = self.embed_radial(&self.radialize(u)?);
        let d: Vec<f64> = self.free_values(u).iter().zip(self.free_values(&e)).map(|(a, b)| a - b).collect();
        Ok((self.form.norm2(&d) / q).sqrt())
    }

    pub fn ground_state(&self, init: &Field2D, tol: &Tolerances, provenance: &str) -> Result<(Field2D, SolveReport)> {
        self.check(init)?;
        let (u, mut rep) = self.form.ground_state(&self.params.nonlinearity, &self.free_values(init), tol, provenance)?;
        let u = self.from_free(&u);
        rep.deviation = Some(self.symmetry_deviation(&u)?);
        Ok((u, rep))
    }
}

/// Ground state in `H_K` from `init`.
pub fn ground_state_cyl(
    params: &ProblemParams,
    grid: Arc<CylGrid>,
    init: &Field2D,
    tol: &Tolerances,
) -> Result<(Field2D, SolveReport)> {
    assemble_cyl(params, grid)?.ground_state(init, tol, "user")
}

/// Seeded smooth multiplicative perturbation of initial guesses: random low-frequency cosine modes of
/// relative size `amplitude`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub seed: u64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Nodes per axis of the 2D grid.
    pub n: usize,
    /// Radius of the ball shared by the radial and 2D problems.
    pub r_max: f64,
    pub radial_nodes: usize,
    pub radial_r_min: f64,
    /// `broken` needs `c_AK < (1 - level_slack) m_A`.
    pub level_slack: f64,
    /// `broken` needs deviation above this.
    pub deviation_threshold: f64,
    /// Growth factor of the dilation ladder for the test-function initial guess.
    pub dilation_factor: f64,
    /// Rungs of the ladder (sector widenings plus dilations).
    pub max_dilations: usize,
    pub workers: usize,
    pub perturbation: Option<Perturbation>,
    pub tolerances: Tolerances,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n: 128,
            r_max: 40.0,
            radial_nodes: 3000,
            radial_r_min: 1e-3,
            level_slack: 0.02,
            deviation_threshold: 0.1,
            dilation_factor: 1.25,
            max_dilations: 40,
            workers: 1,
            perturbation: None,
            tolerances: Tolerances::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !(self.r_max > 0.0) || self.radial_nodes < 3 || !(self.radial_r_min > 0.0) {
            return Err(Error::param("sweep grid sizes must be positive"));
        }
        if !(self.radial_r_min < self.r_max) {
            return Err(Error::param("radial_r_min must be below r_max"));
        }
        if !(0.0..1.0).contains(&self.level_slack) || !(self.deviation_threshold >= 0.0) {
            return Err(Error::param("level_slack must lie in [0, 1) and deviation_threshold >= 0"));
        }
        if !(self.dilation_factor > 1.0) || self.workers == 0 {
            return Err(Error::param("dilation_factor must exceed 1 and workers must be positive"));
        }
        if let Some(p) = self.perturbation {
            if !(0.0..1.0).contains(&p.amplitude) {
                return Err(Error::param("perturbation amplitude must lie in [0, 1)"));
            }
        }
        self.tolerances.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakReport {
    pub a: f64,
    pub k: u32,
    pub m_a: f64,
    pub c_ak: f64,
    pub deviation: f64,
    pub broken: bool,
    /// `(m_A - c_AK)/m_A`.
    pub margin: f64,
    pub level_slack: f64,
    pub deviation_threshold: f64,
    /// Provenance of the run whose level is reported.
    pub chosen_init: String,
    pub radial: SolveReport,
    pub cyl: SolveReport,
    /// Every 2D run attempted, successful or not.
    pub runs: Vec<RunOutcome>,
    #[serde(skip)]
    pub radial_minimizer: Field1D,
    #[serde(skip)]
    pub minimizer: Field2D,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub init: String,
    pub level: Option<f64>,
    pub deviation: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub a: f64,
    pub k: u32,
    pub report: Option<BreakReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub k: u32,
    pub points: Vec<SweepPoint>,
    /// Least swept `A` with `broken = true`.
    pub empirical_threshold: Option<f64>,
}

const PERTURBATION_MODES: usize = 4;

/// Random coefficients `c_k ∈ [-1, 1]`, normalised so `Σ|c_k| = 1`.
fn mode_coefficients(p: Perturbation, stream: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(stream);
    let c: Vec<f64> = (0..count).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let total: f64 = c.iter().map(|x: &f64| x.abs()).sum();
    c.iter().map(|x| x / total.max(f64::MIN_POSITIVE)).collect()
}

/// `u ← u (1 + amplitude Σ_k c_k cos(kπr/R))`, smooth so the gradient energy stays bounded.
fn perturb_radial(u: &Field1D, p: Option<Perturbation>, stream: u64) -> Result<Field1D> {
    let Some(p) = p else { return Ok(u.clone()) };
    let c = mode_coefficients(p, stream, PERTURBATION_MODES);
    let r_max = u.grid().r_max();
    let nodes = u.grid().nodes();
    let values = u
        .values()
        .iter()
        .zip(nodes)
        .map(|(&v, &r)| {
            let m: f64 = c.iter().enumerate().map(|(k, ck)| ck * ((k + 1) as f64 * PI * r / r_max).cos()).sum();
            v * (1.0 + p.amplitude * m)
        })
        .collect();
    Field1D::new(u.grid().clone(), values)
}

/// 2D counterpart of [`perturb_radial`] with tensor modes `cos(kπs/R) cos(lπt/R)`.
fn perturb_cyl(u: &Field2D, p: Option<Perturbation>, stream: u64) -> Result<Field2D> {
    let Some(p) = p else { return Ok(u.clone()) };
    let k = PERTURBATION_MODES;
    let c = mode_coefficients(p, stream, k * k);
    let g = u.grid().clone();
    let x = g.nodes();
    let r = g.r_max();
    let mut values = u.values().to_vec();
    for (i, &s) in x.iter().enumerate() {
        for (j, &t) in x.iter().enumerate() {
            let mut m = 0.0;
            for a in 0..k {
                for b in 0..k {
                    m += c[a * k + b] * (a as f64 * PI * s / r).cos() * ((b + 1) as f64 * PI * t / r).cos();
                }
            }
            values[i * g.n() + j] *= 1.0 + p.amplitude * m;
        }
    }
    Field2D::new(g, values)
}

fn solve_from(
    op: &CylOperator,
    init: Field2D,
    tol: &Tolerances,
    label: String,
) -> (RunOutcome, Option<(Field2D, SolveReport)>) {
    match op.ground_state(&init, tol, &label) {
        Ok((u, rep)) => (
            RunOutcome { init: label, level: Some(rep.level), deviation: rep.deviation, error: None },
            Some((u, rep)),
        ),
        Err(e) => (RunOutcome { init: label, level: None, deviation: None, error: Some(e.to_string()) }, None),
    }
}

/// Smallest sector parameter used when widening the test-function guess.
const MIN_SECTOR_A: f64 = 4.0;

/// Initial guess `x ↦ v_{A'}(x/τ)` built from the test function.
///
/// The support centre is placed at `r_peak`. With `A' = A` the sector is
/// usually too thin for a Nehari projection to exist on the grid, so `A'`
/// is halved (down to `MIN_SECTOR_A`) and then `τ` grown geometrically until
/// one does. Returns the guess with its `(A', τ)`.
fn test_function_guess(op: &CylOperator, bump: &BumpSpec, r_peak: f64, cfg: &SweepConfig) -> Result<(Field2D, f64, f64)> {
    let centre = |a: f64| {
        let ((lo, hi), _) = BumpSpec::support(a);
        (0.5 * (lo + hi), hi)
    };
    let mut sector_a = op.params.a.max(1.0);
    let mut tau = r_peak / centre(sector_a).0;
    for _ in 0..cfg.max_dilations {
        if tau * centre(sector_a).1 >= op.grid.r_max {
            break;
        }
        let u = Field2D::from_fn(op.grid.clone(), |s, t| bump.eval_va(sector_a, s / tau, t / tau))?;
        if u.max() > 0.0 && op.nehari_project(&u, &cfg.tolerances).is_ok() {
            return Ok((u, sector_a, tau));
        }
        if sector_a / 2.0 >= MIN_SECTOR_A {
            sector_a /= 2.0;
            tau = r_peak / centre(sector_a).0;
        } else {
            tau *= cfg.dilation_factor;
        }
    }
    Err(Error::NoSignChange { t_min: cfg.tolerances.t_min, t_max: cfg.tolerances.t_max })
}

fn sweep_point(template: &ProblemParams, k: u32, a: f64, index: usize, cfg: &SweepConfig) -> Result<BreakReport> {
    let params = template.with_a(a);
    let rgrid = Arc::new(RadialGrid::geometric(params.dim, cfg.radial_r_min, cfg.r_max, cfg.radial_nodes)?);
    let rop = assemble_radial(&params, rgrid)?;
    let rinit = perturb_radial(&rop.default_init(), cfg.perturbation, 2 * index as u64)?;
    let (v, radial) = rop.ground_state(&rinit, &cfg.tolerances, "gaussian_shell")?;

    let grid = Arc::new(CylGrid::new(params.dim, k, cfg.n, cfg.r_max)?);
    let op = assemble_cyl(&params, grid)?;
    let tol = &cfg.tolerances;
    let mut runs = Vec::new();
    let mut best: Option<(Field2D, SolveReport)> = None;

    let embed = perturb_cyl(&op.embed_radial(&v), cfg.perturbation, 2 * index as u64 + 1)?;
    let (out, sol) = solve_from(&op, embed, tol, "radial_embed".into());
    runs.push(out);
    best = pick(best, sol);

    let bump = BumpSpec::new(params.nonlinearity.s_star)?;
    match test_function_guess(&op, &bump, v.argmax(), cfg) {
        Ok((init, sector_a, tau)) => {
            let label = format!("test_function(A'={sector_a:.6},tau={tau:.6})");
            let (out, sol) = solve_from(&op, init, tol, label);
            runs.push(out);
            best = pick(best, sol);
        }
        Err(e) => runs.push(RunOutcome { init: "test_function".into(), level: None, deviation: None, error: Some(e.to_string()) }),
    }

    let Some((minimizer, cyl)) = best else {
        let msg: Vec<String> = runs.iter().filter_map(|r| r.error.clone()).collect();
        return Err(Error::LinearSolve(format!("every 2D run failed: {}", msg.join("; "))));
    };
    let deviation = cyl.deviation.unwrap_or(0.0);
    let m_a = radial.level;
    let c_ak = cyl.level;
    let broken = c_ak < (1.0 - cfg.level_slack) * m_a && deviation > cfg.deviation_threshold;
    Ok(BreakReport {
        a,
        k,
        m_a,
        c_ak,
        deviation,
        broken,
        margin: (m_a - c_ak) / m_a,
        level_slack: cfg.level_slack,
        deviation_threshold: cfg.deviation_threshold,
        chosen_init: cyl.init.clone(),
        radial,
        cyl,
        runs,
        radial_minimizer: v,
        minimizer,
    })
}

fn pick(best: Option<(Field2D, SolveReport)>, new: Option<(Field2D, SolveReport)>) -> Option<(Field2D, SolveReport)> {
    match (best, new) {
        (Some(b), Some(n)) => Some(if n.1.level < b.1.level { n } else { b }),
        (b, n) => b.or(n),
    }
}

/// Radial and cylindrical levels for every `A` in `a_list`.
///
/// Points are independent and run on `cfg.workers` threads; the output order
/// follows `a_list`. A failing point is recorded and the sweep goes on.
pub fn break_sweep(template: &ProblemParams, k: u32, a_list: &[f64], cfg: &SweepConfig) -> Result<SweepResult> {
    template.validate()?;
    cfg.validate()?;
    CylGrid::new(template.dim, k, cfg.n, cfg.r_max)?;
    if a_list.iter().any(|a| !(*a > 0.0)) || a_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("A list must be positive and strictly increasing"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::param(format!("thread pool: {e}")))?;
    let points: Vec<SweepPoint> = pool.install(|| {
        a_list
            .par_iter()
            .enumerate()
            .map(|(idx, &a)| match sweep_point(template, k, a, idx, cfg) {
                Ok(r) => {
                    log::info!("K = {k}, A = {a}: m_A = {}, c_AK = {}, deviation = {}", r.m_a, r.c_ak, r.deviation);
                    SweepPoint { a, k, report: Some(r), error: None }
                }
                Err(e) => {
                    log::warn!("K = {k}, A = {a}: {e}");
                    SweepPoint { a, k, report: None, error: Some(e.to_string()) }
                }
            })
            .collect()
    });
    let empirical_threshold = points.iter().find(|p| p.report.as_ref().is_some_and(|r| r.broken)).map(|p| p.a);
    Ok(SweepResult { k, points, empirical_threshold })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Nonlinearity;

    fn params(a: f64) -> ProblemParams {
        ProblemParams::new(4, 3.0, a, Nonlinearity::double_power_min(3.0, 8.0)).unwrap()
    }

    #[test]
    fn rejects_bad_k() {
        assert!(CylGrid::new(4, 1, 8, 1.0).is_err());
        assert!(CylGrid::new(4, 3, 8, 1.0).is_err());
        assert!(CylGrid::new(5, 3, 8, 1.0).is_ok());
    }

    #[test]
    fn zero_field_form() {
        let g = Arc::new(CylGrid::new(4, 2, 10, 5.0).unwrap());
        let op = assemble_cyl(&params(2.0), g.clone()).unwrap();
        assert_eq!(op.norm2(&Field2D::new(g, vec![0.0; 100]).unwrap()), 0.0);
    }

    #[test]
    fn transpose_symmetry() {
        let p = ProblemParams::new(5, 3.0, 2.0, Nonlinearity::double_power_min(3.0, 8.0)).unwrap();
        let g = Arc::new(CylGrid::new(5, 2, 12, 6.0).unwrap());
        let op = assemble_cyl(&p, g.clone()).unwrap();
        let opt = assemble_cyl(&p, Arc::new(g.transposed())).unwrap();
        let u = Field2D::from_fn(g, |s, t| (-(s - 1.0).powi(2) - 0.5 * t * t).exp()).unwrap();
        let (a, b) = (op.norm2(&u), opt.norm2(&u.transpose()));
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn bilinear_interpolation_reproduces_nodes() {
        let g = Arc::new(CylGrid::new(4, 2, 6, 3.0).unwrap());
        let u = Field2D::from_fn(g.clone(), |s, t| s + 2.0 * t).unwrap();
        let x = g.nodes();
        assert!((u.at(x[2], x[3]) - u.get(2, 3)).abs() < 1e-15);
        let (s, t) = (0.5 * (x[1] + x[2]), x[4]);
        assert!((u.at(s, t) - (s + 2.0 * t)).abs() < 1e-13);
        assert_eq!(u.at(3.0, 1.0), 0.0);
    }
}
