//! Uniform grids on [0, 1] and the trapezoid-rule inner product used everywhere
//! a grid function is integrated.

use serde::{Deserialize, Serialize};

/// Uniform partition of [0, 1] with `nodes` points (both endpoints included).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nodes: usize,
}

impl Grid {
    /// Panics if `nodes < 3`; every caller validates resolution first.
    pub fn new(nodes: usize) -> Self {
        assert!(nodes >= 3, "a grid needs at least 3 nodes, got {nodes}");
        Self { nodes }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.nodes - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.nodes {
            1.0
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.x(i)).collect()
    }

    /// Trapezoid weights: `dx/2` at the endpoints, `dx` inside.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nodes {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.nodes).map(|i| self.weight(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.nodes).map(|i| f(self.x(i))).collect()
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.nodes);
        let dx = self.dx();
        let n = f.len();
        let inner: f64 = f[1..n - 1].iter().sum();
        dx * (inner + 0.5 * (f[0] + f[n - 1]))
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.nodes);
        debug_assert_eq!(g.len(), self.nodes);
        let n = f.len();
        let inner: f64 = (1..n - 1).map(|i| f[i] * g[i]).sum();
        self.dx() * (inner + 0.5 * (f[0] * g[0] + f[n - 1] * g[n - 1]))
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).max(0.0).sqrt()
    }

    /// Cumulative trapezoid integral `F(x_i) = ∫₀^{x_i} f`.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        let dx = self.dx();
        let mut out = Vec::with_capacity(f.len());
        let mut acc = 0.0;
        out.push(0.0);
        for i in 1..f.len() {
            acc += 0.5 * dx * (f[i - 1] + f[i]);
            out.push(acc);
        }
        out
    }

    /// True when `coarse` nodes are a subset of `self` (uniform refinement).
    pub fn refines(&self, coarse: &Grid) -> Option<usize> {
        let (fine, c) = (self.nodes - 1, coarse.nodes - 1);
        (fine % c == 0).then_some(fine / c)
    }

    /// Piecewise-linear interpolation of grid samples at an arbitrary point.
    pub fn interpolate(&self, f: &[f64], x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let s = x / self.dx();
        let i = (s.floor() as usize).min(self.nodes - 2);
        let t = s - i as f64;
        f[i] * (1.0 - t) + f[i + 1] * t
    }
}

pub fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Second-order one-sided derivative estimates at x = 0 and x = 1.
pub fn endpoint_derivatives(grid: &Grid, f: &[f64]) -> (f64, f64) {
    let n = f.len();
    let dx = grid.dx();
    let d0 = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dx);
    let d1 = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dx);
    (d0, d1)
}

/// Fourth-order finite-difference second derivative on the grid.
///
/// Interior nodes use the five-point stencil; the two nodes next to each
/// boundary use six-point one-sided stencils of the same order.
pub fn second_derivative_4th(grid: &Grid, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    assert!(n >= 6, "fourth-order second derivative needs at least 6 nodes");
    let h2 = grid.dx() * grid.dx();
    let mut out = vec![0.0; n];
    for i in 2..n - 2 {
        out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) / (12.0 * h2);
    }
    let left0 = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
    let left1 = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
    out[0] = (0..6).map(|k| left0[k] * f[k]).sum::<f64>() / (12.0 * h2);
    out[1] = (0..6).map(|k| left1[k] * f[k]).sum::<f64>() / (12.0 * h2);
    out[n - 1] = (0..6).map(|k| left0[k] * f[n - 1 - k]).sum::<f64>() / (12.0 * h2);
    out[n - 2] = (0..6).map(|k| left1[k] * f[n - 1 - k]).sum::<f64>() / (12.0 * h2);
    out
}
