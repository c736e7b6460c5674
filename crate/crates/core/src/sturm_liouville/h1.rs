use serde::Serialize;

use super::{SLProblem, SlError, SpectralBasis};
use crate::grid::sup_norm;

/// Slope slack for the n⁻² tail test.
const SLOPE_SLACK: f64 = 0.1;

#[derive(Clone, Debug, Serialize)]
pub struct H1Report {
    /// b0, a1, b1 ≥ 0 and a0 ≤ 0.
    pub sign_condition: bool,
    pub m: usize,
    /// λₙ⁻¹ max|φₙ| for n = M..=M+J_tail.
    pub terms: Vec<f64>,
    pub partial_sum: f64,
    /// Least-squares slope of log(term) against log(n) over the last half.
    pub tail_slope: f64,
    pub convergent: bool,
}

/// Certificate of the sufficient sign condition plus a tail-decay diagnostic
/// for Σ λₙ⁻¹ max|φₙ|. `m` is 1-based.
pub fn check_h1(problem: &SLProblem, basis: &SpectralBasis, m: usize, j_tail: usize) -> Result<H1Report, SlError> {
    let need = m + j_tail;
    if m == 0 || basis.len() < need {
        return Err(SlError::TooFewModes { have: basis.len(), need });
    }
    let lambda_m = basis.lambda(m);
    if lambda_m <= 0.0 {
        return Err(SlError::InvalidM { m, lambda: lambda_m });
    }
    let terms: Vec<f64> = (m..=need).map(|n| sup_norm(basis.mode(n)) / basis.lambda(n)).collect();
    let partial_sum = terms.iter().sum();
    let half = terms.len() / 2;
    let pts: Vec<(f64, f64)> = (m + half..=need)
        .zip(&terms[half..])
        .map(|(n, t)| ((n as f64).ln(), t.ln()))
        .collect();
    let tail_slope = slope(&pts);
    Ok(H1Report {
        sign_condition: problem.sign_condition(),
        m,
        terms,
        partial_sum,
        tail_slope,
        convergent: tail_slope <= -2.0 + SLOPE_SLACK,
    })
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
