use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::decay::{default_window, fit_decay_rate, DecayFit};
use super::ios::{check_ios_bound, IosBoundCheck, IosSignals};
use super::AnalysisError;
use crate::grid::{self, Grid};
use crate::observer_design::{
    max_diameter, report, ChannelSpec, DesignSpec, GainSpec, LipschitzBounds, LyapunovSpec, ObserverDesign,
    SmallGainReport, Variant,
};
use crate::pde_simulator::{
    make_schedule, simulate, NonlinearTerm, Noise, SamplingSchedule, Scenario, ScheduleSpec, Signal, Trajectory,
};
use crate::profile::Profile;
use crate::sturm_liouville::{analytic_eigensystem, RobinBc, SLProblem, SpectralBasis};

/// ‖k₁ − c₁‖ for the boundary-output example in its printed form
/// (√2/π)√(π² − 8); the directly evaluated norm is √(π² − 8)/π.
pub fn example32_printed_kc() -> f64 {
    2f64.sqrt() / PI * (PI * PI - 8.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    Divergent,
    Indeterminate,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Convergent => "convergent",
            Verdict::Divergent => "divergent",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

/// Divergent above 10‖e[0]‖, convergent below 0.1‖e[0]‖.
pub fn verdict(initial: f64, last: f64) -> Verdict {
    if !last.is_finite() || last > 10.0 * initial {
        Verdict::Divergent
    } else if last < 0.1 * initial {
        Verdict::Convergent
    } else {
        Verdict::Indeterminate
    }
}

fn default_nodes() -> usize {
    201
}

fn zero_profile() -> Profile {
    Profile::zero()
}

fn example31_u0() -> Profile {
    Profile::Sum { parts: vec![Profile::constant(1.0), Profile::cosine(1.0, PI)] }
}

fn example32_u0() -> Profile {
    Profile::Trig {
        terms: vec![
            crate::profile::TrigTerm { cos: 2f64.sqrt(), sin: 0.0, freq: 0.5 * PI },
            crate::profile::TrigTerm { cos: 0.5 * 2f64.sqrt(), sin: 0.0, freq: 1.5 * PI },
        ],
    }
}

fn basis_size(nodes: usize) -> usize {
    nodes - 1
}

/// Heat equation with Neumann ends, output ∫x u, N = 1, c₁ = 1/2, P = [1],
/// L₁₁ = −pπ².
pub fn example31_design(p: f64, nodes: usize) -> Result<(SLProblem, SpectralBasis, ObserverDesign), AnalysisError> {
    let problem = SLProblem::new(p, Profile::zero(), RobinBc::NEUMANN_NEUMANN)?;
    let grid = Grid::new(nodes);
    let j = basis_size(nodes);
    let basis = analytic_eigensystem(&problem, j, &grid)?;
    let spec = DesignSpec {
        modes: 1,
        channels: vec![ChannelSpec { label: "y".into(), k: Profile::polynomial(vec![0.0, 1.0]), c: Profile::constant(0.5) }],
        gain: GainSpec::Matrix { rows: vec![vec![-p * PI * PI]] },
        lyapunov: LyapunovSpec { p: Some(vec![vec![1.0]]), sigma: Some(0.5 * p * PI * PI), ..Default::default() },
        q: 2.0,
        j_max: j,
    };
    let design = ObserverDesign::synthesize(&problem, &basis, &spec, LipschitzBounds::default())?;
    Ok((problem, basis, design))
}

/// The derivative system ũ = u_x: Neumann at 0, Dirichlet at 1, output ∫ũ,
/// N = 1, c₁ = (4/π)cos(πx/2), P = [1], L₁₁ = π(4q − 7pπ²)/(16√2).
pub fn example32_design(
    p: f64,
    q: f64,
    nodes: usize,
) -> Result<(SLProblem, SpectralBasis, ObserverDesign), AnalysisError> {
    if !(-9.0 * p * PI * PI < 4.0 * q && 4.0 * q < 7.0 * p * PI * PI) {
        return Err(AnalysisError::ReactionOutOfRange { p, q });
    }
    let problem = SLProblem::new(p, Profile::constant(q), RobinBc::NEUMANN_DIRICHLET)?;
    let grid = Grid::new(nodes);
    let j = basis_size(nodes);
    let basis = analytic_eigensystem(&problem, j, &grid)?;
    let sigma = 9.0 * p * PI * PI / 8.0 + 0.5 * q;
    let spec = DesignSpec {
        modes: 1,
        channels: vec![ChannelSpec {
            label: "y".into(),
            k: Profile::constant(1.0),
            c: Profile::cosine(4.0 / PI, 0.5 * PI),
        }],
        gain: GainSpec::Matrix { rows: vec![vec![PI * (4.0 * q - 7.0 * p * PI * PI) / (16.0 * 2f64.sqrt())]] },
        lyapunov: LyapunovSpec { p: Some(vec![vec![1.0]]), sigma: Some(sigma), ..Default::default() },
        q: 2.0,
        j_max: j,
    };
    let design = ObserverDesign::synthesize(&problem, &basis, &spec, LipschitzBounds::default())?;
    Ok((problem, basis, design))
}

/// Ω of the boundary-output example exactly as printed, for comparison.
pub fn example32_printed_omega(p: f64, q: f64, h: f64, omega: f64) -> f64 {
    let s = 9.0 * p * PI * PI + 4.0 * q;
    (omega * h * s / 8.0).exp() * (7.0 * p * PI * PI - 4.0 * q) / (2.0 * 2f64.sqrt() * s * (1.0 - omega).sqrt())
        * ((p * PI * PI + 4.0 * q).abs() / (4.0 * 2f64.sqrt()) * PI * h + (PI * PI - 8.0).sqrt())
}

pub(crate) fn snapshot_cadence(requested: Option<usize>, schedule: &SamplingSchedule, dt_max: f64) -> usize {
    requested.unwrap_or_else(|| {
        let per_interval = (schedule.diameter() / dt_max).ceil() as usize;
        (per_interval / 10).max(1)
    })
}

fn build_schedule(spec: Option<&ScheduleSpec>, h: f64, horizon: f64, seed: u64) -> Result<SamplingSchedule, AnalysisError> {
    let uniform = ScheduleSpec::Uniform { h };
    let schedule = make_schedule(spec.unwrap_or(&uniform), horizon, seed)?;
    if schedule.max_gap() > h * (1.0 + 1e-12) {
        return Err(AnalysisError::InvalidInput(format!(
            "schedule has a gap of {} above the declared diameter {h}",
            schedule.max_gap()
        )));
    }
    Ok(schedule)
}

fn steady_error(times: &[f64], norms: &[f64], horizon: f64) -> f64 {
    times
        .iter()
        .zip(norms)
        .filter(|(t, _)| **t >= 0.8 * horizon)
        .map(|(_, n)| *n)
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example31Params {
    pub p: f64,
    pub h: f64,
    /// κ = ω·μ.
    #[serde(default)]
    pub omega: f64,
    pub variant: Variant,
    #[serde(default)]
    pub noise: Noise,
    /// Plant input v ≡ mismatch while the observer uses ṽ = 0.
    #[serde(default)]
    pub mismatch: f64,
    /// Defaults to 200/(pπ²).
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Defaults to uniform sampling with period h.
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "example31_u0")]
    pub u0: Profile,
    #[serde(default = "zero_profile")]
    pub w0: Profile,
}

impl Example31Params {
    pub fn new(p: f64, h: f64, omega: f64, variant: Variant) -> Self {
        Self {
            p,
            h,
            omega,
            variant,
            noise: Noise::Zero,
            mismatch: 0.0,
            horizon: None,
            nodes: default_nodes(),
            schedule: None,
            dt: None,
            snapshot_every: None,
            seed: 0,
            u0: example31_u0(),
            w0: Profile::zero(),
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon.unwrap_or(200.0 / (self.p * PI * PI))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Example31Report {
    pub params: Example31Params,
    pub mu: f64,
    pub kappa: f64,
    pub omega: f64,
    /// Ω from the specialised closed form, for comparison with `omega`.
    pub omega_closed_form: f64,
    pub feasible: bool,
    /// Largest admissible diameter for this variant and κ (∞ when unbounded).
    pub h_star: Option<f64>,
    /// 4/(pπ²), the uniform-sampling limit of the hold observer.
    pub zoh_threshold: f64,
    pub horizon: f64,
    pub error_initial: f64,
    pub error_final: f64,
    /// max ‖e‖ over the final sampling interval; the verdict uses this
    /// rather than ‖e[T]‖, which can pass through zero inside an interval.
    pub error_last_interval: f64,
    /// max ‖e‖ over the last 20% of the horizon.
    pub steady_error: f64,
    pub verdict: Verdict,
    pub decay: Option<DecayFit>,
    pub decay_note: Option<String>,
    pub ios_violations: Option<usize>,
    pub ios_worst_ratio: Option<f64>,
    pub small_gain: SmallGainReport,
    #[serde(skip)]
    pub ios: Option<IosBoundCheck>,
    #[serde(skip)]
    pub trajectory: Trajectory,
    #[serde(skip)]
    pub scenario: Scenario,
    #[serde(skip)]
    pub basis: SpectralBasis,
}

pub fn run_example_31(params: &Example31Params) -> Result<Example31Report, AnalysisError> {
    if !(0.0..1.0).contains(&params.omega) {
        return Err(AnalysisError::InvalidInput(format!("ω must lie in [0, 1), got {}", params.omega)));
    }
    let p = params.p;
    let (problem, basis, design) = example31_design(p, params.nodes)?;
    let mu = design.certificate.mu;
    let kappa = params.omega * mu;
    let small_gain = report(&design.small_gain_inputs(), params.variant, params.h, kappa)?;
    let growth = (params.omega * p * PI * PI * params.h / 2.0).exp() / (6.0 * (1.0 - params.omega)).sqrt();
    let omega_closed_form = match params.variant {
        Variant::Predictor => growth,
        Variant::Zoh => growth * (params.h * p * PI * PI + 1.0),
    };
    let h_star = max_diameter(&design, kappa, params.variant).ok();

    let horizon = params.horizon();
    let schedule = build_schedule(params.schedule.as_ref(), params.h, horizon, params.seed)?;
    let grid = Grid::new(params.nodes);
    let mut scenario = Scenario {
        problem,
        design,
        variant: params.variant,
        grid,
        nonlinearity: NonlinearTerm::Zero,
        u0: params.u0.clone(),
        w0: params.w0.clone(),
        v: if params.mismatch == 0.0 { Signal::zero() } else { Signal::constant(params.mismatch) },
        v_tilde: Signal::zero(),
        noise: vec![params.noise.clone()],
        schedule,
        dt: params.dt,
        snapshot_every: 1,
        seed: params.seed,
    };
    scenario.snapshot_every = snapshot_cadence(params.snapshot_every, &scenario.schedule, scenario.dt_max());
    let trajectory = simulate(&scenario)?;

    let times = trajectory.times();
    let norms = trajectory.error_l2();
    let error_initial = norms[0];
    let error_final = *norms.last().expect("at least one snapshot");
    let sample_times = scenario.schedule.times();
    let last_sample = sample_times[sample_times.len() - 2];
    let error_last_interval =
        times.iter().zip(&norms).filter(|(t, _)| **t >= last_sample).map(|(_, n)| *n).fold(0.0, f64::max);
    let (decay, decay_note) = if error_initial > 0.0 {
        match fit_decay_rate(&times, &norms, default_window(&times, &norms, 3.0 * params.h)) {
            Ok(fit) => (Some(fit), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, Some("zero initial error".into()))
    };
    let ios = if small_gain.feasible {
        let signals = IosSignals::from_run(&scenario, &trajectory)?;
        Some(check_ios_bound(&trajectory, &small_gain, &signals)?)
    } else {
        None
    };
    Ok(Example31Report {
        params: params.clone(),
        mu,
        kappa,
        omega: small_gain.omega,
        omega_closed_form,
        feasible: small_gain.feasible,
        h_star,
        zoh_threshold: 4.0 / (p * PI * PI),
        horizon,
        error_initial,
        error_final,
        error_last_interval,
        steady_error: steady_error(&times, &norms, horizon),
        verdict: verdict(error_initial, error_last_interval),
        decay,
        decay_note,
        ios_violations: ios.as_ref().map(|c| c.violations),
        ios_worst_ratio: ios.as_ref().map(|c| c.worst_ratio),
        small_gain,
        ios,
        trajectory,
        scenario,
        basis,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Example32Params {
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    /// Defaults to half the largest admissible diameter at κ = ωμ.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub noise: Noise,
    /// Defaults to 200/(pπ²).
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub snapshot_every: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Initial ũ = ∂u/∂x.
    #[serde(default = "example32_u0")]
    pub u0: Profile,
    #[serde(default = "zero_profile")]
    pub w0: Profile,
}

impl Example32Params {
    pub fn new(p: f64, q: f64, omega: f64) -> Self {
        Self {
            p,
            q,
            h: None,
            omega,
            noise: Noise::Zero,
            horizon: None,
            nodes: default_nodes(),
            dt: None,
            snapshot_every: None,
            seed: 0,
            u0: example32_u0(),
            w0: Profile::zero(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Example32Report {
    pub params: Example32Params,
    pub h: f64,
    pub mu: f64,
    pub kappa: f64,
    pub a11: f64,
    pub c11: f64,
    pub l1_norm: f64,
    pub kc_distance: f64,
    pub kc_distance_printed: f64,
    pub omega: f64,
    /// Ω from the printed closed form at the same (h, ω).
    pub omega_printed: f64,
    pub h_star: f64,
    pub feasible: bool,
    /// max of the three IOS coefficients.
    pub theta: f64,
    pub horizon: f64,
    /// Worst |ũ(t,1)| and one-sided |∂ũ/∂x(t,0)| over the run.
    pub bc_residual: (f64, f64),
    pub l2_violations: usize,
    pub l2_worst_ratio: f64,
    pub sup_violations: usize,
    pub sup_worst_ratio: f64,
    pub sup_error_initial: f64,
    pub sup_error_final: f64,
    pub sup_decay: Option<DecayFit>,
    pub sup_decay_note: Option<String>,
    pub small_gain: SmallGainReport,
    /// max_x |û(t,x) − u(t,x)| per snapshot.
    #[serde(skip)]
    pub sup_error: Vec<f64>,
    #[serde(skip)]
    pub trajectory: Trajectory,
    #[serde(skip)]
    pub scenario: Scenario,
}

/// Runs the derivative system with v ≡ 0. Then ṽ ≡ 0, the output is
/// ξ + ∫ũ, u = ∫₀ˣũ and û = ∫₀ˣw, so û − u = ∫₀ˣe.
pub fn run_example_32(params: &Example32Params) -> Result<Example32Report, AnalysisError> {
    if !(0.0..1.0).contains(&params.omega) {
        return Err(AnalysisError::InvalidInput(format!("ω must lie in [0, 1), got {}", params.omega)));
    }
    let (p, q) = (params.p, params.q);
    let (problem, _basis, design) = example32_design(p, q, params.nodes)?;
    let mu = design.certificate.mu;
    let kappa = params.omega * mu;
    let h_star = max_diameter(&design, kappa, Variant::Predictor)?;
    let h = params.h.unwrap_or(0.5 * h_star);
    let small_gain = report(&design.small_gain_inputs(), Variant::Predictor, h, kappa)?;
    let c = &small_gain.coefficients;
    let theta = c.noise.iter().copied().fold(c.initial.max(c.mismatch), f64::max);

    let horizon = params.horizon.unwrap_or(200.0 / (p * PI * PI));
    let schedule = build_schedule(None, h, horizon, params.seed)?;
    let a11 = design.a[(0, 0)];
    let c11 = design.c_coeffs[0][0];
    let l1_norm = design.terms[0].l_norm;
    let kc_distance = design.terms[0].kc_distance;
    let mut scenario = Scenario {
        problem,
        design,
        variant: Variant::Predictor,
        grid: Grid::new(params.nodes),
        nonlinearity: NonlinearTerm::Zero,
        u0: params.u0.clone(),
        w0: params.w0.clone(),
        v: Signal::zero(),
        v_tilde: Signal::zero(),
        noise: vec![params.noise.clone()],
        schedule,
        dt: params.dt,
        snapshot_every: 1,
        seed: params.seed,
    };
    scenario.snapshot_every = snapshot_cadence(params.snapshot_every, &scenario.schedule, scenario.dt_max());
    let trajectory = simulate(&scenario)?;

    let g = &trajectory.grid;
    let times = trajectory.times();
    let l2 = trajectory.error_l2();
    let sup_error: Vec<f64> =
        (0..trajectory.snapshots.len()).map(|k| grid::sup_norm(&g.cumulative(&trajectory.error(k)))).collect();
    let mut bc_residual = (0.0_f64, 0.0_f64);
    for s in &trajectory.snapshots {
        let (d0, _) = grid::endpoint_derivatives(g, &s.u);
        bc_residual.0 = bc_residual.0.max(s.u[s.u.len() - 1].abs());
        bc_residual.1 = bc_residual.1.max(d0.abs());
    }

    let floor = super::norms::roundoff_floor(&trajectory);
    let e0 = l2[0];
    let mut xi_sup = 0.0_f64;
    let (mut l2_violations, mut sup_violations) = (0, 0);
    let (mut l2_worst_ratio, mut sup_worst_ratio) = (0.0_f64, 0.0_f64);
    for (k, s) in trajectory.snapshots.iter().enumerate() {
        if let Some(j) = s.sample {
            xi_sup = xi_sup.max(trajectory.events[j].xi[0].abs());
        }
        let rhs = theta * (-kappa * times[k]).exp() * e0 + theta * xi_sup;
        for (value, violations, worst) in
            [(l2[k], &mut l2_violations, &mut l2_worst_ratio), (sup_error[k], &mut sup_violations, &mut sup_worst_ratio)]
        {
            if value > (1.0 + super::IOS_SLACK) * rhs + floor {
                *violations += 1;
            }
            if value > floor && rhs > 0.0 {
                *worst = worst.max(value / rhs);
            }
        }
    }
    let (sup_decay, sup_decay_note) = if sup_error[0] > 0.0 {
        match fit_decay_rate(&times, &sup_error, default_window(&times, &sup_error, 3.0 * h)) {
            Ok(fit) => (Some(fit), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, Some("zero initial error".into()))
    };

    Ok(Example32Report {
        params: params.clone(),
        h,
        mu,
        kappa,
        a11,
        c11,
        l1_norm,
        kc_distance,
        kc_distance_printed: example32_printed_kc(),
        omega: small_gain.omega,
        omega_printed: example32_printed_omega(p, q, h, params.omega),
        h_star,
        feasible: small_gain.feasible,
        theta,
        horizon,
        bc_residual,
        l2_violations,
        l2_worst_ratio,
        sup_violations,
        sup_worst_ratio,
        sup_error_initial: sup_error[0],
        sup_error_final: *sup_error.last().expect("at least one snapshot"),
        sup_decay,
        sup_decay_note,
        small_gain,
        sup_error,
        trajectory,
        scenario,
    })
}
