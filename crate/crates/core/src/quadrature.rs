//! Composite Gauss–Legendre quadrature on [0, 1] for closed-form integrands.
//!
//! Grid functions are integrated with the trapezoid rule in [`crate::grid`];
//! this rule is reserved for quantities that enter certificates, where the
//! trapezoid error would be visible.

use std::sync::OnceLock;

const POINTS: usize = 16;
const PANELS: usize = 128;

pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Composite rule with `panels` equal panels of an `order`-point rule.
    pub fn new(order: usize, panels: usize) -> Self {
        let (ref_nodes, ref_weights) = legendre_nodes(order);
        let width = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(order * panels);
        let mut weights = Vec::with_capacity(order * panels);
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * width;
            for (x, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(mid + 0.5 * width * x);
                weights.push(0.5 * width * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        compensated_sum(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }

    /// Integral over each panel separately, in order.
    pub fn panel_integrals(&self, order: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes
            .chunks(order)
            .zip(self.weights.chunks(order))
            .map(|(xs, ws)| xs.iter().zip(ws).map(|(&x, &w)| w * f(x)).sum())
            .collect()
    }
}

/// Shared default rule (16 points × 128 panels).
pub fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(POINTS, PANELS))
}

pub fn integrate(f: impl Fn(f64) -> f64) -> f64 {
    rule().integrate(f)
}

/// Neumaier summation; the composite rule adds thousands of small terms.
pub fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
