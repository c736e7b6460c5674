use serde::Serialize;

use crate::grid;
use crate::pde_simulator::Trajectory;

#[derive(Clone, Debug, Default, Serialize)]
pub struct ErrorNorms {
    pub times: Vec<f64>,
    pub l2: Vec<f64>,
    pub sup: Vec<f64>,
}

pub fn error_norms(traj: &Trajectory) -> ErrorNorms {
    ErrorNorms { times: traj.times(), l2: traj.error_l2(), sup: traj.error_sup() }
}

/// Smallest error norm that is distinguishable from rounding in `w − u`.
pub fn roundoff_floor(traj: &Trajectory) -> f64 {
    let scale = traj
        .snapshots
        .iter()
        .map(|s| traj.grid.norm(&s.u).max(traj.grid.norm(&s.w)).max(grid::sup_norm(&s.u)))
        .fold(0.0, f64::max);
    1e-12 * scale
}
