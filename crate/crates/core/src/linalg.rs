//! Tridiagonal systems: pivoted LU factorisation and the Sturm-sequence
//! bisection / inverse-iteration eigensolver for the symmetric case.

/// General tridiagonal matrix stored by diagonals.
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Self {
        assert_eq!(sub.len() + 1, diag.len());
        assert_eq!(sup.len() + 1, diag.len());
        Self { sub, diag, sup }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.sup[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting. Exactly singular pivots
    /// are replaced by a tiny multiple of the matrix scale, which is what
    /// inverse iteration wants and never triggers for the well-posed
    /// Crank–Nicolson systems.
    pub fn factor(&self) -> TridiagonalLu {
        let n = self.len();
        let mut dl = self.sub.clone();
        let mut d = self.diag.clone();
        let mut du = self.sup.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n];
        let scale = d.iter().chain(&dl).chain(&du).fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let tiny = f64::EPSILON * scale;
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        TridiagonalLu { dl, d, du, du2, swapped }
    }
}

#[derive(Clone, Debug)]
pub struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        if n == 0 {
            return;
        }
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Symmetric tridiagonal matrix (diagonal `a`, off-diagonal `b`).
#[derive(Clone, Debug)]
pub struct SymTridiagonal {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl SymTridiagonal {
    /// Number of eigenvalues strictly below `x` (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.a.len() {
            let off = if i == 0 { 0.0 } else { self.b[i - 1] * self.b[i - 1] };
            d = self.a[i] - x - if i == 0 { 0.0 } else { off / d };
            if d == 0.0 {
                d = -f64::EPSILON * (self.a[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.a.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.b[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.b[i].abs() } else { 0.0 };
            lo = lo.min(self.a[i] - r);
            hi = hi.max(self.a[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let span = (hi - lo).max(1.0);
        lo -= 1e-9 * span;
        hi += 1e-9 * span;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * mid.abs().max(1e-300) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `count` eigenpairs; eigenvectors have unit Euclidean norm.
    pub fn lowest_eigenpairs(&self, count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.a.len();
        let values: Vec<f64> = (0..count).map(|k| self.eigenvalue(k)).collect();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
        for &lambda in &values {
            let shifted = Tridiagonal::new(
                self.b.clone(),
                self.a.iter().map(|a| a - lambda).collect(),
                self.b.clone(),
            );
            let lu = shifted.factor();
            let mut y: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_75 + 0.3).sin())
                .collect();
            for _ in 0..4 {
                lu.solve_in_place(&mut y);
                for v in &vectors {
                    let dot: f64 = v.iter().zip(&y).map(|(a, b)| a * b).sum();
                    y.iter_mut().zip(v).for_each(|(yi, vi)| *yi -= dot * vi);
                }
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                y.iter_mut().for_each(|v| *v /= norm);
            }
            vectors.push(y);
        }
        (values, vectors)
    }
}
