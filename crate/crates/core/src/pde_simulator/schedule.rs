use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Uniform { h: f64 },
    /// Gaps drawn uniformly in [h_min, h_max]; the last gap is cut at the horizon.
    RandomBounded {
        h_min: f64,
        h_max: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Sampling instants starting at 0; instants past the horizon are dropped.
    Explicit { times: Vec<f64> },
}

/// Sampling instants t₀ = 0 < t₁ < … < t_J = horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingSchedule {
    times: Vec<f64>,
    diameter: f64,
}

impl SamplingSchedule {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("schedule is never empty")
    }

    /// Declared h with sup(t_{j+1} − t_j) ≤ h.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn max_gap(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// η(t): last sampling instant not after t.
    pub fn last_sample(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        self.times[k.saturating_sub(1)]
    }
}

pub fn make_schedule(spec: &ScheduleSpec, horizon: f64, seed: u64) -> Result<SamplingSchedule, SimError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(SimError::InvalidSpec(format!("horizon must be positive and finite, got {horizon}")));
    }
    match spec {
        ScheduleSpec::Uniform { h } => {
            if !(*h > 0.0) {
                return Err(SimError::InvalidSpec(format!("sampling period must be positive, got {h}")));
            }
            let count = (horizon / h * (1.0 + 1e-12)).floor() as usize;
            let mut times: Vec<f64> = (0..=count).map(|j| j as f64 * h).collect();
            close_at_horizon(&mut times, horizon, *h);
            Ok(SamplingSchedule { times, diameter: *h })
        }
        ScheduleSpec::RandomBounded { h_min, h_max, seed: own } => {
            if !(*h_min > 0.0 && h_min <= h_max) {
                return Err(SimError::InvalidSpec(format!("need 0 < h_min ≤ h_max, got {h_min}, {h_max}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(own.unwrap_or(seed));
            let mut times = vec![0.0];
            let mut t = 0.0;
            while t < horizon {
                t += if h_min == h_max { *h_min } else { rng.random_range(*h_min..=*h_max) };
                times.push(t.min(horizon));
            }
            close_at_horizon(&mut times, horizon, *h_max);
            Ok(SamplingSchedule { times, diameter: *h_max })
        }
        ScheduleSpec::Explicit { times } => {
            if times.first() != Some(&0.0) {
                return Err(SimError::InvalidSpec("explicit schedules must start at t = 0".into()));
            }
            if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0])) {
                return Err(SimError::InvalidSpec(format!("sampling times must increase: {} then {}", w[0], w[1])));
            }
            let last = *times.last().expect("checked non-empty");
            if last < horizon * (1.0 - 1e-12) {
                return Err(SimError::ScheduleHorizonMismatch { last, horizon });
            }
            let mut kept: Vec<f64> = times.iter().copied().filter(|&t| t < horizon).collect();
            kept.push(horizon);
            let diameter = kept.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            Ok(SamplingSchedule { times: kept, diameter })
        }
    }
}

// Ends the list exactly at the horizon, merging a sliver left by rounding.
fn close_at_horizon(times: &mut Vec<f64>, horizon: f64, h: f64) {
    let last = *times.last().expect("non-empty");
    if (horizon - last).abs() <= 1e-9 * h {
        *times.last_mut().expect("non-empty") = horizon;
    } else if last < horizon {
        times.push(horizon);
    }
    while times.len() > 2 && times[times.len() - 1] - times[times.len() - 2] <= 1e-9 * h {
        let n = times.len();
        times.remove(n - 2);
    }
}
