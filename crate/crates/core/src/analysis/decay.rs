use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::AnalysisError;

/// Norms at or below `FLOOR_RATIO · initial` are treated as rounding noise.
pub const FLOOR_RATIO: f64 = 1e-13;
/// The automatic window ends at the last time the norm is above this ratio.
pub const FIT_FLOOR: f64 = 1e-10;

/// Least-squares fit of log‖e‖ = a − κ̂ t.
#[derive(Clone, Debug, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    /// Half width of the 95% confidence interval for the rate.
    pub ci_half_width: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub residual_sd: f64,
}

impl DecayFit {
    pub fn lower(&self) -> f64 {
        self.rate - self.ci_half_width
    }

    pub fn upper(&self) -> f64 {
        self.rate + self.ci_half_width
    }

    /// κ̂ ≥ κ within the confidence interval.
    pub fn supports_at_least(&self, kappa: f64) -> bool {
        self.upper() >= kappa
    }
}

/// From `start` to the last time the norm still exceeds `FIT_FLOOR · norms[0]`.
pub fn default_window(times: &[f64], norms: &[f64], start: f64) -> (f64, f64) {
    let floor = FIT_FLOOR * norms.first().copied().unwrap_or(0.0);
    let end = times
        .iter()
        .zip(norms)
        .filter(|(_, n)| **n > floor)
        .map(|(t, _)| *t)
        .fold(start, f64::max);
    (start, end)
}

pub fn fit_decay_rate(times: &[f64], norms: &[f64], window: (f64, f64)) -> Result<DecayFit, AnalysisError> {
    if times.len() != norms.len() {
        return Err(AnalysisError::InvalidInput(format!("{} times for {} norms", times.len(), norms.len())));
    }
    let initial = norms.first().copied().unwrap_or(0.0);
    let floor = FLOOR_RATIO * initial;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &n) in times.iter().zip(norms) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(n > floor) || n <= 0.0 {
            return Err(AnalysisError::DecayedToFloor { t, norm: n, floor });
        }
        xs.push(t);
        ys.push(n.ln());
    }
    let k = xs.len();
    if k < 3 {
        return Err(AnalysisError::InsufficientData(format!("{k} points in window [{}, {}]", window.0, window.1)));
    }
    let kf = k as f64;
    let mx = xs.iter().sum::<f64>() / kf;
    let my = ys.iter().sum::<f64>() / kf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(AnalysisError::InsufficientData("all window times coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let dof = kf - 2.0;
    let residual_sd = (sse / dof).sqrt();
    let t975 = StudentsT::new(0.0, 1.0, dof).expect("dof ≥ 1").inverse_cdf(0.975);
    Ok(DecayFit {
        rate: -slope,
        ci_half_width: t975 * residual_sd / sxx.sqrt(),
        intercept,
        window,
        points: k,
        residual_sd,
    })
}
