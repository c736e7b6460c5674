use nalgebra::DMatrix;
use serde::Serialize;

use super::DesignError;
use crate::profile::Profile;
use crate::sturm_liouville::SpectralBasis;

/// Modes in the tail window used for the truncation diagnostic of K.
pub const K_TAIL_WINDOW: usize = 50;

/// `A_{ij} = −λᵢ δᵢⱼ + Σ_r L_{ir} c_{rj}` for i, j ≤ N.
pub fn build_a(eigenvalues: &[f64], l: &DMatrix<f64>, c_coeffs: &[Vec<f64>]) -> Result<DMatrix<f64>, DesignError> {
    let n = eigenvalues.len();
    let m = c_coeffs.len();
    if l.nrows() != n || l.ncols() != m {
        return Err(DesignError::DimensionMismatch(format!(
            "L is {}×{}, expected {n}×{m}",
            l.nrows(),
            l.ncols()
        )));
    }
    if let Some(row) = c_coeffs.iter().find(|row| row.len() < n) {
        return Err(DesignError::DimensionMismatch(format!(
            "c coefficients cover {} modes, need {n}",
            row.len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let coupling: f64 = (0..m).map(|r| l[(i, r)] * c_coeffs[r][j]).sum();
        if i == j {
            -eigenvalues[i] + coupling
        } else {
            coupling
        }
    }))
}

/// Injection kernel `lᵢ = Σₙ φₙ L_{n,i}`.
#[derive(Clone, Debug)]
pub struct InjectionKernel {
    pub samples: Vec<f64>,
    pub profile: Profile,
    /// ‖lᵢ‖, exact by orthonormality: the Euclidean norm of column i of L.
    pub norm: f64,
}

pub fn injection_kernels(l: &DMatrix<f64>, basis: &SpectralBasis) -> Result<Vec<InjectionKernel>, DesignError> {
    let n = l.nrows();
    if basis.len() < n {
        return Err(DesignError::DimensionMismatch(format!("basis has {} modes, L needs {n}", basis.len())));
    }
    let nodes = basis.grid().nodes();
    Ok((0..l.ncols())
        .map(|i| {
            let mut samples = vec![0.0; nodes];
            for k in 0..n {
                let coef = l[(k, i)];
                samples.iter_mut().zip(basis.mode(k + 1)).for_each(|(s, phi)| *s += coef * phi);
            }
            let profile = if basis.is_analytic() {
                Profile::Sum { parts: (0..n).map(|k| basis.mode_profile(k + 1).scaled(l[(k, i)])).collect() }
            } else {
                Profile::Sampled { values: samples.clone() }
            };
            let norm = l.column(i).norm();
            InjectionKernel { samples, profile, norm }
        })
        .collect())
}

/// Truncated tail norm of the approximant coefficients beyond mode N.
#[derive(Clone, Debug, Serialize)]
pub struct CouplingK {
    pub k: f64,
    pub j_max: usize,
    /// Share of K² contributed by the last [`K_TAIL_WINDOW`] modes.
    pub tail_share: f64,
    pub truncation_warning: bool,
}

pub fn coupling_constant_k(c_coeffs: &[Vec<f64>], n: usize, j_max: usize) -> CouplingK {
    let window_start = j_max.saturating_sub(K_TAIL_WINDOW).max(n);
    let mut total = 0.0;
    let mut window = 0.0;
    for row in c_coeffs {
        for (j, c) in row.iter().enumerate().take(j_max).skip(n) {
            total += c * c;
            if j >= window_start {
                window += c * c;
            }
        }
    }
    let tail_share = if total > 0.0 { window / total } else { 0.0 };
    // K at rounding level relative to the cᵢ themselves carries no tail information.
    let scale: f64 = c_coeffs.iter().flatten().map(|c| c * c).sum();
    let negligible = total <= 1e-24 * scale;
    CouplingK { k: total.sqrt(), j_max, tail_share, truncation_warning: !negligible && tail_share > 0.01 }
}

/// Gain column for a single output placing the eigenvalues of `A` at
/// `targets`. Requires distinct eigenvalues and c_{1,j} ≠ 0 for j ≤ N.
pub fn place_poles(eigenvalues: &[f64], c_row: &[f64], targets: &[f64]) -> Result<DMatrix<f64>, DesignError> {
    let n = eigenvalues.len();
    if targets.len() != n {
        return Err(DesignError::PlacementImpossible(format!("{} targets for {n} modes", targets.len())));
    }
    let scale = c_row.iter().take(n).fold(0.0_f64, |m, c| m.max(c.abs())).max(1.0);
    let mut l = DMatrix::zeros(n, 1);
    for j in 0..n {
        let cj = c_row[j];
        if cj.abs() < 1e-12 * scale {
            return Err(DesignError::PlacementImpossible(format!("c_{{1,{}}} vanishes", j + 1)));
        }
        let num: f64 = targets.iter().map(|t| -eigenvalues[j] - t).product();
        let den: f64 = (0..n).filter(|&k| k != j).map(|k| eigenvalues[k] - eigenvalues[j]).product();
        l[(j, 0)] = -num / (cj * den);
    }
    Ok(l)
}
