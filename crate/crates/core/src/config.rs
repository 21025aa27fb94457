//! JSON run configuration shared by the `testfn`, `radial`, `cyl` and `break` commands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cylindrical::{Perturbation, SweepConfig};
use crate::error::{Error, Result};
use crate::nehari::Tolerances;
use crate::nonlinearity::NonlinearityConfig;
use crate::params::ProblemParams;
use crate::testfn::DEFAULT_ORDER;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(rename = "N")]
    pub dim: u32,
    pub alpha: f64,
    /// Coupling used by the single-solve commands; sweeps use `A_list`.
    #[serde(rename = "A", default = "one")]
    pub a: f64,
    pub nonlinearity: NonlinearityConfig,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialGridConfig {
    pub r_min: f64,
    pub nodes: usize,
}

impl Default for RadialGridConfig {
    fn default() -> Self {
        RadialGridConfig { r_min: 1e-3, nodes: 3000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CylGridConfig {
    /// Nodes per axis.
    pub n: usize,
}

impl Default for CylGridConfig {
    fn default() -> Self {
        CylGridConfig { n: 128 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct GridsConfig {
    /// Outer radius shared by both grids. `None`: `max(40, 10 A_max^{1/α})`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    pub radial: RadialGridConfig,
    pub cylindrical: CylGridConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TolerancesConfig {
    pub solver: Tolerances,
    /// Gauss-Legendre order per axis for the test-function integrals.
    pub quadrature_order: usize,
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        TolerancesConfig { solver: Tolerances::default(), quadrature_order: DEFAULT_ORDER }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BreakConfig {
    pub level_slack: f64,
    pub deviation_threshold: f64,
    pub dilation_factor: f64,
    pub max_dilations: usize,
    /// Relative amplitude of the seeded multiplicative noise on initial guesses; 0 disables it.
    pub perturbation: f64,
}

impl Default for BreakConfig {
    fn default() -> Self {
        let s = SweepConfig::default();
        BreakConfig {
            level_slack: s.level_slack,
            deviation_threshold: s.deviation_threshold,
            dilation_factor: s.dilation_factor,
            max_dilations: s.max_dilations,
            perturbation: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestFnConfig {
    #[serde(rename = "A_list")]
    pub a_list: Vec<f64>,
    /// Bump height; `None` picks `0.9 s*` (or 0.9 when `s* = ∞`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

impl Default for TestFnConfig {
    fn default() -> Self {
        // 10^2 .. 10^6, four points per decade
        let a_list = (0..=16).map(|i| 10f64.powf(2.0 + i as f64 / 4.0)).collect();
        TestFnConfig { a_list, amplitude: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Also write a JSON mirror of every CSV.
    pub json: bool,
    /// Dump minimizer fields (`cyl`, `break`).
    pub fields: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out"), json: false, fields: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub grids: GridsConfig,
    #[serde(default)]
    pub tolerances: TolerancesConfig,
    #[serde(rename = "A_list")]
    pub a_list: Vec<f64>,
    #[serde(rename = "K_list")]
    pub k_list: Vec<u32>,
    #[serde(default, rename = "break")]
    pub break_: BreakConfig,
    #[serde(default)]
    pub testfn: TestFnConfig,
    #[serde(default = "one_worker")]
    pub workers: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one_worker() -> usize {
    1
}

impl Default for RunConfig {
    /// `N = 4`, `α = 3`, `f(s) = min{s², s⁷}`, `K = 2`, six couplings from 1.5 to 64.
    fn default() -> Self {
        RunConfig {
            problem: ProblemConfig {
                dim: 4,
                alpha: 3.0,
                a: 1.0,
                nonlinearity: NonlinearityConfig {
                    kind: "double_power_min".into(),
                    p: None,
                    p1: Some(3.0),
                    p2: Some(8.0),
                    m: None,
                    mu: None,
                    s_star: None,
                    samples: None,
                },
            },
            grids: GridsConfig::default(),
            tolerances: TolerancesConfig::default(),
            a_list: vec![1.5, 3.0, 8.0, 16.0, 32.0, 64.0],
            k_list: vec![2],
            break_: BreakConfig::default(),
            testfn: TestFnConfig::default(),
            workers: 1,
            seed: 0,
            output: OutputConfig::default(),
        }
    }
}

fn increasing_positive(list: &[f64], name: &str) -> Result<()> {
    if list.iter().any(|a| !(*a > 0.0 && a.is_finite())) || list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(format!("{name} must be positive and strictly increasing")));
    }
    Ok(())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Problem with coupling `problem.A`.
    pub fn params(&self) -> Result<ProblemParams> {
        let nl = self.problem.nonlinearity.build()?;
        ProblemParams::new(self.problem.dim, self.problem.alpha, self.problem.a, nl)
    }

    pub fn r_max(&self) -> f64 {
        self.grids.r_max.unwrap_or_else(|| {
            let a_max = self.a_list.iter().copied().fold(self.problem.a, f64::max);
            (10.0 * a_max.powf(1.0 / self.problem.alpha)).max(40.0)
        })
    }

    pub fn sweep_config(&self) -> SweepConfig {
        let b = &self.break_;
        SweepConfig {
            n: self.grids.cylindrical.n,
            r_max: self.r_max(),
            radial_nodes: self.grids.radial.nodes,
            radial_r_min: self.grids.radial.r_min,
            level_slack: b.level_slack,
            deviation_threshold: b.deviation_threshold,
            dilation_factor: b.dilation_factor,
            max_dilations: b.max_dilations,
            workers: self.workers,
            perturbation: (b.perturbation > 0.0).then_some(Perturbation { seed: self.seed, amplitude: b.perturbation }),
            tolerances: self.tolerances.solver,
        }
    }

    /// Every check that can be made without solving anything.
    pub fn validate(&self) -> Result<()> {
        let (dim, alpha) = (self.problem.dim, self.problem.alpha);
        if dim < 3 {
            return Err(Error::param(format!("dimension N must be >= 3, got {dim}")));
        }
        if alpha == 2.0 {
            return Err(Error::param("alpha = 2 is not supported"));
        }
        for &k in &self.k_list {
            if k < 2 || k + 2 > dim {
                return Err(Error::param(format!("K = {k} outside [2, N - 2] = [2, {}]", dim as i64 - 2)));
            }
        }
        self.params()?;
        increasing_positive(&self.a_list, "A_list")?;
        increasing_positive(&self.testfn.a_list, "testfn.A_list")?;
        if self.testfn.a_list.iter().any(|&a| a < 1.0) {
            return Err(Error::param("testfn.A_list values must be >= 1"));
        }
        if let Some(h) = self.testfn.amplitude {
            if !(h > 0.0) {
                return Err(Error::param("testfn amplitude must be positive"));
            }
        }
        if self.tolerances.quadrature_order < 2 {
            return Err(Error::param("quadrature_order must be at least 2"));
        }
        if !(0.0..1.0).contains(&self.break_.perturbation) {
            return Err(Error::param("perturbation must lie in [0, 1)"));
        }
        self.sweep_config().validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn minimal_json() {
        let cfg = RunConfig::from_json(
            r#"{"problem": {"N": 4, "alpha": 1, "nonlinearity": {"kind": "pure_power", "p": 3}},
                "A_list": [1, 2], "K_list": [2]}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.r_max(), 40.0);
        assert_eq!(cfg.workers, 1);
    }

    #[test]
    fn rejects_bad_configs() {
        let c = RunConfig { k_list: vec![3], ..RunConfig::default() };
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.problem.alpha = 2.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.problem.dim = 2;
        assert!(c.validate().is_err());
        let c = RunConfig { a_list: vec![3.0, 2.0], ..RunConfig::default() };
        assert!(c.validate().is_err());
        assert!(RunConfig::from_json(r#"{"problem": {}, "bogus": 1}"#).is_err());
    }
}
