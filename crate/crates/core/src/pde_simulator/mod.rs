//! Method-of-lines co-simulation of the plant and the two sampled-data
//! observers (with inter-sample predictor and with zero-order hold).

mod nonlinearity;
mod schedule;
mod signals;
mod stepping;
mod trajectory;

pub use nonlinearity::{KernelTerm, LipschitzData, NonlinearTerm, SampledNonlinearity, SaturatedTerm};
pub use schedule::{make_schedule, SamplingSchedule, ScheduleSpec};
pub use signals::{Noise, NoiseSource, SampledSignal, SeparableTerm, Signal, TimeFn};
pub use stepping::{boundary_residual, CrankNicolson, Model};
pub use trajectory::{fmt, SampleEvent, Snapshot, Trajectory, TrajectoryMeta};

use thiserror::Error;

use crate::grid::Grid;
use crate::observer_design::{report, DesignError, ObserverDesign, Variant};
use crate::profile::{Profile, ProfileError};
use crate::sturm_liouville::{SLProblem, SlError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidSpec(String),
    #[error("schedule ends at {last} before the horizon {horizon}")]
    ScheduleHorizonMismatch { last: f64, horizon: f64 },
    #[error("step rejected: dt·(explicit Lipschitz constant) = {product:.3} exceeds the corrector limit")]
    StepRejected { product: f64 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Spectral(#[from] SlError),
    #[error(transparent)]
    Design(#[from] DesignError),
}

/// Everything needed for one co-simulation run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub problem: SLProblem,
    pub design: ObserverDesign,
    pub variant: Variant,
    pub grid: Grid,
    pub nonlinearity: NonlinearTerm,
    pub u0: Profile,
    pub w0: Profile,
    pub v: Signal,
    pub v_tilde: Signal,
    /// One entry per output channel; missing entries are zero.
    pub noise: Vec<Noise>,
    pub schedule: SamplingSchedule,
    /// Upper bound on the step; default min(dx, h/20).
    pub dt: Option<f64>,
    /// Store a snapshot every this many steps inside each sampling interval.
    pub snapshot_every: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn dt_max(&self) -> f64 {
        self.dt.unwrap_or_else(|| self.grid.dx().min(self.schedule.diameter() / 20.0))
    }

    pub fn noise_for(&self, i: usize) -> Noise {
        self.noise.get(i).cloned().unwrap_or_default()
    }

    pub fn model(&self) -> Result<Model, SimError> {
        let channels: Vec<(Profile, Profile, Profile)> = self
            .design
            .channels
            .iter()
            .zip(&self.design.injection)
            .map(|(ch, l)| (ch.k.clone(), ch.c.clone(), l.profile.clone()))
            .collect();
        Model::new(
            &self.problem,
            &self.grid,
            &channels,
            self.nonlinearity.sampled(&self.grid)?,
            self.v.sampled(&self.grid)?,
            self.v_tilde.sampled(&self.grid)?,
        )
    }

    /// Initial fields with the Dirichlet nodes pinned.
    pub fn initial_fields(&self, model: &Model) -> Result<(Vec<f64>, Vec<f64>), SimError> {
        let mut u = self.u0.sample(&self.grid)?;
        let mut w = self.w0.sample(&self.grid)?;
        model.op.project_to_domain(&mut u);
        model.op.project_to_domain(&mut w);
        Ok((u, w))
    }
}

/// Runs plant and observer over the schedule's horizon.
///
/// Every sampling instant is a step boundary: each interval is split into
/// the smallest number of equal steps not exceeding [`Scenario::dt_max`].
pub fn simulate(scenario: &Scenario) -> Result<Trajectory, SimError> {
    let m = scenario.design.m();
    if scenario.noise.len() > m {
        return Err(SimError::InvalidSpec(format!("{} noise signals for {m} channels", scenario.noise.len())));
    }
    if scenario.snapshot_every == 0 {
        return Err(SimError::InvalidSpec("snapshot_every must be at least 1".into()));
    }
    let dt_max = scenario.dt_max();
    if !(dt_max > 0.0) {
        return Err(SimError::InvalidSpec(format!("time step must be positive, got {dt_max}")));
    }
    let model = scenario.model()?;
    let lip = scenario.nonlinearity.lipschitz(&scenario.problem, &scenario.grid)?;
    let mut stiffness = lip.r;
    if scenario.variant == Variant::Predictor {
        stiffness += (0..m).map(|i| model.grid.norm(&model.l[i]) * model.grid.norm(&model.c[i])).sum::<f64>();
    }
    if dt_max * stiffness > Model::CONTRACTION_LIMIT {
        return Err(SimError::StepRejected { product: dt_max * stiffness });
    }
    let h = scenario.schedule.diameter();
    if let Ok(r) = report(&scenario.design.small_gain_inputs(), scenario.variant, h, 0.0) {
        if !r.feasible {
            log::warn!("small-gain condition fails at h = {h} (Ω = {:.4}); running anyway", r.omega);
        }
    }

    let (mut u, mut w) = scenario.initial_fields(&model)?;
    let noise: Vec<Noise> = (0..m).map(|i| scenario.noise_for(i)).collect();
    let mut noise_src = NoiseSource::new(&noise, scenario.seed);
    let mut zeta = vec![0.0; m];
    let mut held = vec![0.0; m];
    let times = scenario.schedule.times();
    let mut snapshots = Vec::new();
    let mut events = Vec::new();
    let mut cn: Option<CrankNicolson> = None;
    let mut steps = 0;
    let innovation = |w: &[f64], zeta: &[f64], held: &[f64]| match scenario.variant {
        Variant::Predictor => model.predictor_innovation(w, zeta),
        Variant::Zoh => held.to_vec(),
    };

    for j in 0..times.len() - 1 {
        let (t0, t1) = (times[j], times[j + 1]);
        let before = (j > 0).then(|| innovation(&w, &zeta, &held));
        let xi = noise_src.next_sample(t0);
        let y = model.measure(&u, &xi);
        let zeta_before = zeta.clone();
        match scenario.variant {
            Variant::Predictor => zeta = model.reset_predictor(&y, &w),
            Variant::Zoh => held = model.zoh_innovation(&y, &w),
        }
        events.push(SampleEvent {
            t: t0,
            y,
            xi,
            zeta_before: if scenario.variant == Variant::Predictor { zeta_before } else { Vec::new() },
            zeta_after: if scenario.variant == Variant::Predictor { zeta.clone() } else { Vec::new() },
            held: if scenario.variant == Variant::Zoh { held.clone() } else { Vec::new() },
        });
        snapshots.push(snapshot(scenario.variant, t0, &u, &w, &zeta, innovation(&w, &zeta, &held), before, Some(j)));

        let gap = t1 - t0;
        let n = ((gap / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = gap / n as f64;
        if cn.as_ref().is_none_or(|c| c.dt() != dt) {
            cn = Some(CrankNicolson::new(&model.op, dt));
        }
        let cn = cn.as_ref().expect("set above");
        for s in 0..n {
            let t = t0 + s as f64 * dt;
            let u_next = model.step_plant(cn, &u, t);
            match scenario.variant {
                Variant::Predictor => {
                    let (w_next, z_next) = model.step_observer_predictor(cn, &w, &zeta, t);
                    w = w_next;
                    zeta = z_next;
                }
                Variant::Zoh => w = model.step_observer_zoh(cn, &w, &held, t),
            }
            u = u_next;
            steps += 1;
            if (s + 1) % scenario.snapshot_every == 0 && s + 1 < n {
                let tn = t0 + (s + 1) as f64 * dt;
                snapshots.push(snapshot(scenario.variant, tn, &u, &w, &zeta, innovation(&w, &zeta, &held), None, None));
            }
        }
    }
    let horizon = scenario.schedule.horizon();
    snapshots.push(snapshot(scenario.variant, horizon, &u, &w, &zeta, innovation(&w, &zeta, &held), None, None));

    Ok(Trajectory {
        meta: TrajectoryMeta {
            variant: scenario.variant,
            nodes: scenario.grid.nodes(),
            dt_max,
            steps,
            diameter: h,
            horizon,
            scheme: "IMEX Crank-Nicolson / Heun",
            seed: scenario.seed,
        },
        grid: scenario.grid.clone(),
        snapshots,
        events,
    })
}

#[allow(clippy::too_many_arguments)]
fn snapshot(
    variant: Variant,
    t: f64,
    u: &[f64],
    w: &[f64],
    zeta: &[f64],
    innovation: Vec<f64>,
    innovation_before: Option<Vec<f64>>,
    sample: Option<usize>,
) -> Snapshot {
    Snapshot {
        t,
        u: u.to_vec(),
        w: w.to_vec(),
        zeta: if variant == Variant::Predictor { zeta.to_vec() } else { Vec::new() },
        innovation,
        innovation_before,
        sample,
    }
}

#[cfg(test)]
mod tests;
