use serde::Serialize;

use super::{norms::roundoff_floor, AnalysisError};
use crate::grid;
use crate::observer_design::{IosCoefficients, SmallGainReport, Variant};
use crate::pde_simulator::{Scenario, Trajectory};

/// Relative slack allowed before a point counts as a violation.
pub const IOS_SLACK: f64 = 0.02;

/// Histories of the inputs entering the estimate, aligned with the snapshots.
#[derive(Clone, Debug, Default)]
pub struct IosSignals {
    /// |ξᵢ| at each snapshot that is a sampling instant, `None` elsewhere.
    pub xi: Vec<Option<Vec<f64>>>,
    /// ‖v − ṽ‖ at each snapshot.
    pub mismatch: Vec<f64>,
}

impl IosSignals {
    /// Noise from the recorded sample events, mismatch from the scenario signals.
    pub fn from_run(scenario: &Scenario, traj: &Trajectory) -> Result<Self, AnalysisError> {
        let g = &traj.grid;
        let v = scenario.v.sampled(g)?;
        let vt = scenario.v_tilde.sampled(g)?;
        let mut xi = Vec::with_capacity(traj.snapshots.len());
        let mut mismatch = Vec::with_capacity(traj.snapshots.len());
        for s in &traj.snapshots {
            xi.push(s.sample.map(|j| traj.events[j].xi.iter().map(|x| x.abs()).collect()));
            mismatch.push(g.norm(&grid::sub(&v.at(s.t), &vt.at(s.t))));
        }
        Ok(Self { xi, mismatch })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IosBoundCheck {
    pub variant: Variant,
    pub kappa: f64,
    pub omega: f64,
    pub coefficients: IosCoefficients,
    pub slack: f64,
    /// Absolute tolerance for errors at rounding level.
    pub floor: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub rhs: Vec<f64>,
    /// RHS(t) − ‖e[t]‖
    pub margin: Vec<f64>,
    /// sup_{s≤t} |ξᵢ(s)| e^{−κ(t−s)} per channel.
    pub xi_sup: Vec<Vec<f64>>,
    /// sup_{s≤t} ‖v − ṽ‖(s) e^{−κ(t−s)}
    pub mismatch_sup: Vec<f64>,
    pub violations: usize,
    /// max ‖e[t]‖ / RHS(t) over points above the floor.
    pub worst_ratio: f64,
}

impl IosBoundCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }

    /// CSV with t, ‖e‖, RHS, margin.
    pub fn margin_csv(&self) -> String {
        use crate::pde_simulator::fmt;
        let mut out = String::from("t,e_l2,rhs,margin\n");
        for k in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt(self.times[k]),
                fmt(self.norms[k]),
                fmt(self.rhs[k]),
                fmt(self.margin[k])
            ));
        }
        out
    }
}

/// Evaluates the right-hand side of the IOS estimate at every snapshot.
///
/// The weighted suprema are carried as running maxima:
/// `S(t_k) = max(S(t_{k−1}) e^{−κ(t_k − t_{k−1})}, x(t_k))`.
pub fn check_ios_bound(
    traj: &Trajectory,
    report: &SmallGainReport,
    signals: &IosSignals,
) -> Result<IosBoundCheck, AnalysisError> {
    if !report.feasible {
        return Err(AnalysisError::InfeasibleReport(report.omega));
    }
    let count = traj.snapshots.len();
    if signals.xi.len() != count || signals.mismatch.len() != count {
        return Err(AnalysisError::InvalidInput(format!(
            "signal histories have {} / {} entries for {count} snapshots",
            signals.xi.len(),
            signals.mismatch.len()
        )));
    }
    let m = report.coefficients.noise.len();
    let kappa = report.kappa;
    let c = &report.coefficients;
    let times = traj.times();
    let norms = traj.error_l2();
    let e0 = norms.first().copied().unwrap_or(0.0);
    let floor = roundoff_floor(traj);

    let mut xi_run = vec![0.0; m];
    let mut mis_run = 0.0;
    let mut xi_sup = vec![Vec::with_capacity(count); m];
    let mut mismatch_sup = Vec::with_capacity(count);
    let mut rhs = Vec::with_capacity(count);
    let mut margin = Vec::with_capacity(count);
    let mut violations = 0;
    let mut worst_ratio = 0.0_f64;
    for k in 0..count {
        let decay = if k == 0 { 1.0 } else { (-kappa * (times[k] - times[k - 1])).exp() };
        mis_run = (mis_run * decay).max(signals.mismatch[k]);
        for (i, r) in xi_run.iter_mut().enumerate() {
            *r *= decay;
            if let Some(x) = &signals.xi[k] {
                *r = r.max(x.get(i).copied().unwrap_or(0.0));
            }
            xi_sup[i].push(*r);
        }
        mismatch_sup.push(mis_run);
        let value = c.initial * (-kappa * times[k]).exp() * e0
            + c.noise.iter().zip(&xi_run).map(|(g, s)| g * s).sum::<f64>()
            + c.mismatch * mis_run;
        let e = norms[k];
        if e > (1.0 + IOS_SLACK) * value + floor {
            violations += 1;
        }
        if e > floor && value > 0.0 {
            worst_ratio = worst_ratio.max(e / value);
        }
        rhs.push(value);
        margin.push(value - e);
    }
    Ok(IosBoundCheck {
        variant: report.variant,
        kappa,
        omega: report.omega,
        coefficients: report.coefficients.clone(),
        slack: IOS_SLACK,
        floor,
        times,
        norms,
        rhs,
        margin,
        xi_sup,
        mismatch_sup,
        violations,
        worst_ratio,
    })
}
