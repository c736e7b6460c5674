//! Post-processing of simulated trajectories: error norms, decay-rate fits,
//! the IOS estimate check, the Lyapunov-functional oracle, and end-to-end
//! runners for the two worked examples.

mod decay;
mod examples;
mod ios;
mod lyapunov;
mod norms;

pub use decay::{default_window, fit_decay_rate, DecayFit, FIT_FLOOR, FLOOR_RATIO};
pub(crate) use examples::snapshot_cadence;
pub use examples::{
    example31_design, example32_design, example32_printed_kc, example32_printed_omega, run_example_31, run_example_32, verdict,
    Example31Params, Example31Report, Example32Params, Example32Report, Verdict,
};
pub use ios::{check_ios_bound, IosBoundCheck, IosSignals, IOS_SLACK};
pub use lyapunov::{lyapunov_oracle, self_consistent_constants, IntegralBound, LyapunovTrace, TAIL_DEFICIT_LIMIT};
pub use norms::{error_norms, roundoff_floor, ErrorNorms};

use thiserror::Error;

use crate::observer_design::DesignError;
use crate::pde_simulator::SimError;
use crate::sturm_liouville::SlError;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("norm reached the floor ({norm:.3e} ≤ {floor:.3e}) at t = {t} inside the fit window")]
    DecayedToFloor { t: f64, norm: f64, floor: f64 },
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error("small-gain condition fails (Ω = {0}); the estimate does not apply")]
    InfeasibleReport(f64),
    #[error("Parseval deficit {share:.3} of ‖e‖² at t = {t} exceeds the limit; use more modes")]
    TailTooShort { t: f64, share: f64 },
    #[error("reaction coefficient out of range: need −9pπ² < 4q < 7pπ², got p = {p}, q = {q}")]
    ReactionOutOfRange { p: f64, q: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Spectral(#[from] SlError),
}
