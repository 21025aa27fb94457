//! One-dimensional P1 element data with a power weight `x^e`.
//!
//! An axis has free nodes `x_0 < … < x_{m-1}` and a Dirichlet node `x_m`.
//! Below `x_0` the field is continued by its value at `x_0` down to the lower
//! limit `a_0` (natural condition there). Mass is lumped onto the dual cells
//! `[a_i, b_i]` bounded by element midpoints.

use crate::error::{Error, Result};

/// `∫_a^b x^e dx` for `0 ≤ a ≤ b`.
pub fn power_integral(a: f64, b: f64, e: f64) -> f64 {
    if (e + 1.0).abs() < 1e-14 {
        return (b / a).ln();
    }
    (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    nodes: Vec<f64>,
    boundary: f64,
    lower: f64,
    weight_exp: f64,
}

impl Axis {
    pub fn new(nodes: Vec<f64>, boundary: f64, lower: f64, weight_exp: f64) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidGrid("axis needs at least one free node".into()));
        }
        if !(lower >= 0.0 && lower <= nodes[0]) {
            return Err(Error::InvalidGrid(format!("lower limit {lower} must lie in [0, {}]", nodes[0])));
        }
        let ok = nodes.windows(2).all(|w| w[1] > w[0]) && boundary > *nodes.last().unwrap();
        if !ok || nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidGrid("axis nodes must be finite and strictly increasing".into()));
        }
        if lower == 0.0 && weight_exp <= -1.0 {
            return Err(Error::InvalidGrid("weight is not integrable at 0".into()));
        }
        Ok(Axis { nodes, boundary, lower, weight_exp })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn boundary(&self) -> f64 {
        self.boundary
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    fn node(&self, i: usize) -> f64 {
        if i < self.nodes.len() { self.nodes[i] } else { self.boundary }
    }

    /// Dual cell `[a_i, b_i]` of free node `i`.
    pub fn cell(&self, i: usize) -> (f64, f64) {
        let a = if i == 0 { self.lower } else { 0.5 * (self.nodes[i - 1] + self.nodes[i]) };
        let b = 0.5 * (self.nodes[i] + self.node(i + 1));
        (a, b)
    }

    /// Lumped mass `∫_{cell} x^e`.
    pub fn mass(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.cell(i);
                power_integral(a, b, self.weight_exp)
            })
            .collect()
    }

    /// Element stiffness `∫_{x_i}^{x_{i+1}} x^e dx / h_i²` for `i = 0..m`;
    /// the last element couples node `m-1` to the Dirichlet node.
    pub fn element_stiffness(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let (a, b) = (self.node(i), self.node(i + 1));
                power_integral(a, b, self.weight_exp) / ((b - a) * (b - a))
            })
            .collect()
    }

    /// Stiffness as (diagonal, sub-diagonal) of the tridiagonal matrix.
    pub fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.element_stiffness();
        let m = self.len();
        let mut diag = vec![0.0; m];
        let mut off = vec![0.0; m.saturating_sub(1)];
        for i in 0..m {
            diag[i] += k[i];
            if i + 1 < m {
                diag[i + 1] += k[i];
                off[i] = -k[i];
            }
        }
        (diag, off)
    }

    /// Linear interpolation stencil at `x`: two `(index, weight)` pairs, where
    /// index `len()` stands for the Dirichlet node.
    pub fn stencil(&self, x: f64) -> [(usize, f64); 2] {
        let m = self.len();
        if x >= self.boundary {
            return [(m, 1.0), (m, 0.0)];
        }
        if x <= self.nodes[0] {
            return [(0, 1.0), (0, 0.0)];
        }
        let i = self.nodes.partition_point(|&v| v <= x) - 1;
        let (a, b) = (self.node(i), self.node(i + 1));
        let w = (x - a) / (b - a);
        [(i, 1.0 - w), (i + 1, w)]
    }

    /// Piecewise linear interpolation of nodal `values` (zero at and beyond the Dirichlet node,
    /// constant below the first node).
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        if x >= self.boundary {
            return 0.0;
        }
        if x <= self.nodes[0] {
            return values[0];
        }
        let i = self.nodes.partition_point(|&v| v <= x) - 1;
        let (a, b) = (self.node(i), self.node(i + 1));
        let (va, vb) = (values[i], if i + 1 < values.len() { values[i + 1] } else { 0.0 });
        va + (vb - va) * (x - a) / (b - a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_integrals() {
        assert!((power_integral(0.0, 2.0, 3.0) - 4.0).abs() < 1e-15);
        assert!((power_integral(1.0, std::f64::consts::E, -1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn mass_covers_the_axis() {
        let ax = Axis::new(vec![0.5, 1.5, 2.5], 3.0, 0.0, 1.0).unwrap();
        let total: f64 = ax.mass().iter().sum();
        // cells tile [0, (2.5 + 3)/2]
        assert!((total - 0.5 * 2.75f64.powi(2)).abs() < 1e-14);
    }

    #[test]
    fn stiffness_of_linear_function() {
        // u = 3 - x vanishes at the Dirichlet node; energy ∫_{x0}^{3} x dx
        let ax = Axis::new(vec![0.5, 1.0, 2.0], 3.0, 0.5, 1.0).unwrap();
        let (d, o) = ax.stiffness();
        let u: Vec<f64> = ax.nodes().iter().map(|x| 3.0 - x).collect();
        let mut e = 0.0;
        for i in 0..3 {
            e += d[i] * u[i] * u[i];
            if i + 1 < 3 {
                e += 2.0 * o[i] * u[i] * u[i + 1];
            }
        }
        assert!((e - 0.5 * (9.0 - 0.25)).abs() < 1e-13);
    }

    #[test]
    fn interpolation() {
        let ax = Axis::new(vec![1.0, 2.0], 4.0, 0.0, 0.0).unwrap();
        let v = [1.0, 3.0];
        assert_eq!(ax.interpolate(&v, 0.2), 1.0);
        assert_eq!(ax.interpolate(&v, 1.5), 2.0);
        assert_eq!(ax.interpolate(&v, 3.0), 1.5);
        assert_eq!(ax.interpolate(&v, 5.0), 0.0);
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Axis::new(vec![], 1.0, 0.0, 1.0).is_err());
        assert!(Axis::new(vec![1.0, 0.5], 2.0, 0.0, 1.0).is_err());
        assert!(Axis::new(vec![1.0], 0.5, 0.0, 1.0).is_err());
        assert!(Axis::new(vec![1.0], 2.0, 0.0, -1.0).is_err());
    }
}
