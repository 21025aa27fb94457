//! Gauss-Legendre rules and an adaptive 1D integrator built on them.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Rule with `n ≥ 1` points, exact for polynomials of degree `2n - 1`.
    ///
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Tricomi initial guess; weights are `2 / ((1 - x²) P_n'(x)²)`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
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

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(x, w)` pairs mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Tensor-product rule on `[a0, b0] × [a1, b1]`.
    pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
        &self,
        (a0, b0): (f64, f64),
        (a1, b1): (f64, f64),
        mut f: F,
    ) -> f64 {
        let inner: Vec<(f64, f64)> = self.mapped(a1, b1).collect();
        let mut total = 0.0;
        for (x, wx) in self.mapped(a0, b0) {
            let mut row = 0.0;
            for &(y, wy) in &inner {
                row += wy * f(x, y);
            }
            total += wx * row;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    if n == 1 { (x, 1.0) } else { (p1, d) }
}

/// Adaptive integration of `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// Each interval is accepted when a 10-point rule agrees with the sum of the
/// 10-point rules on its halves.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 40;
    if a == b {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(10);
    let whole = rule.integrate(a, b, &f);
    let mut worst = 0.0_f64;
    let total = refine(&rule, &f, a, b, whole, rel_tol, whole.abs(), MAX_DEPTH, &mut worst);
    let achieved = if total != 0.0 { worst / total.abs() } else { worst };
    if achieved > rel_tol && worst > f64::EPSILON * total.abs() * 16.0 {
        return Err(Error::Quadrature { requested: rel_tol, achieved });
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn refine<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    rel_tol: f64,
    scale: f64,
    depth: u32,
    worst: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    let err = (left + right - whole).abs();
    let scale = scale.max((left + right).abs());
    if err <= rel_tol * scale || depth == 0 || m <= a || m >= b {
        if depth == 0 {
            *worst += err;
        }
        return left + right;
    }
    refine(rule, f, a, m, left, rel_tol, scale, depth - 1, worst)
        + refine(rule, f, m, b, right, rel_tol, scale, depth - 1, worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for n in [1, 2, 5, 10, 33, 64, 128] {
            let gl = GaussLegendre::new(n);
            let s: f64 = gl.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n = {n}: {s}");
            for i in 0..n {
                assert!((gl.nodes()[i] + gl.nodes()[n - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let gl = GaussLegendre::new(5);
        // ∫_0^2 x^9 dx = 2^10 / 10
        let v = gl.integrate(0.0, 2.0, |x| x.powi(9));
        assert!((v - 102.4).abs() < 1e-11);
    }

    #[test]
    fn known_three_point_rule() {
        let gl = GaussLegendre::new(3);
        assert!((gl.nodes()[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((gl.weights()[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_rule() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate_2d((0.0, 1.0), (0.0, 2.0), |x, y| x * x * y);
        assert!((v - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = adaptive(|x: f64| x.min(x.powi(7)), 0.0, 2.0, 1e-12).unwrap();
        assert!((v - (0.125 + 1.5)).abs() < 1e-11, "{v}");
        let v = adaptive(|x: f64| x.sqrt(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }
}
