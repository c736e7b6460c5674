use nalgebra::DVector;
use serde::Serialize;

use super::{norms::roundoff_floor, AnalysisError};
use crate::observer_design::ObserverDesign;
use crate::pde_simulator::{Model, Scenario, Trajectory};
use crate::sturm_liouville::SpectralBasis;

/// Largest admissible share of ‖e‖² missed by the first J modes.
pub const TAIL_DEFICIT_LIMIT: f64 = 0.05;
const SLACK: f64 = 0.02;

/// Check of V(t) ≤ e^{−2μt}V(0) + g̃∫₀ᵗ e^{−2μ(t−s)}‖v̄[s]‖² ds for one (μ, g̃).
#[derive(Clone, Debug, Serialize)]
pub struct IntegralBound {
    pub label: String,
    pub mu: f64,
    pub g_tilde: f64,
    pub rhs: Vec<f64>,
    pub violations: usize,
    /// max V/RHS over points above the rounding floor.
    pub worst_ratio: f64,
    pub worst_time: f64,
}

impl IntegralBound {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovTrace {
    pub times: Vec<f64>,
    pub v: Vec<f64>,
    /// (r₁ … r_N) per snapshot.
    pub xi: Vec<Vec<f64>>,
    /// r_{N+1} … r_J per snapshot.
    pub tail: Vec<Vec<f64>>,
    /// ‖e‖² − Σ_{n≤J} rₙ²
    pub parseval_deficit: Vec<f64>,
    pub error_sq: Vec<f64>,
    /// ‖v̄‖ just after each snapshot time, and the left limit at sampling instants.
    pub vbar_norm: Vec<f64>,
    pub vbar_norm_before: Vec<Option<f64>>,
    /// Violations of ‖e[t]‖² ≤ V(t).
    pub energy_violations: usize,
    /// V(0) and max(|P|, Q/2)‖e[0]‖².
    pub v0: f64,
    pub v0_bound: f64,
    pub design: IntegralBound,
    pub consistent: IntegralBound,
    pub floor: f64,
}

impl LyapunovTrace {
    pub fn initial_bound_holds(&self) -> bool {
        self.v0 <= (1.0 + SLACK) * self.v0_bound + self.floor
    }

    pub fn sandwich_holds(&self) -> bool {
        self.energy_violations == 0 && self.initial_bound_holds()
    }
}

/// (μ_ε, g̃_ε) read directly off the dissipation inequality before the choice
/// of ε: μ_ε = min(σ − ε, λ_{N+1}/2 − |LᵀPL|K²/(εQ)), g̃_ε = max(|P|/ε, Q/(2λ_{N+1})),
/// with ε the balancing root (or σ/2 when that root is smaller).
pub fn self_consistent_constants(design: &ObserverDesign) -> (f64, f64) {
    let sigma = design.sigma;
    let lam = design.lambda_next();
    let q = design.certificate.q;
    let k2 = design.coupling.k.powi(2);
    let d = 2.0 * sigma - lam;
    let root = (d + (d * d + 16.0 * design.ltpl_norm * k2 / q).sqrt()) / 4.0;
    let eps = root.max(0.5 * sigma);
    let mu = (sigma - eps).min(0.5 * lam - design.ltpl_norm * k2 / (eps * q));
    let g = (design.p_norm / eps).max(q / (2.0 * lam));
    (mu, g)
}

fn integral_bound(label: &str, mu: f64, g: f64, times: &[f64], v: &[f64], a: &[(f64, f64)], floor: f64) -> IntegralBound {
    let v0 = v.first().copied().unwrap_or(0.0);
    let mut integral = 0.0;
    let mut rhs = Vec::with_capacity(times.len());
    let mut violations = 0;
    let mut worst_ratio = 0.0_f64;
    let mut worst_time = 0.0;
    for k in 0..times.len() {
        if k > 0 {
            let dt = times[k] - times[k - 1];
            let damp = (-2.0 * mu * dt).exp();
            integral = damp * integral + 0.5 * dt * (damp * a[k - 1].1 + a[k].0);
        }
        let value = (-2.0 * mu * times[k]).exp() * v0 + g * integral;
        if v[k] > (1.0 + SLACK) * value + floor {
            violations += 1;
        }
        if v[k] > floor && value > 0.0 && v[k] / value > worst_ratio {
            worst_ratio = v[k] / value;
            worst_time = times[k];
        }
        rhs.push(value);
    }
    IntegralBound { label: label.into(), mu, g_tilde: g, rhs, violations, worst_ratio, worst_time }
}

/// Lyapunov functional V = ξᵀPξ + (Q/2)Σ_{n>N} rₙ² along a trajectory, with
/// the tail taken as ‖e‖² − Σ_{n≤N} rₙ², and the integral inequality
/// checked for the design's (μ, g̃) and for the self-consistent pair.
///
/// v̄ is rebuilt from the stored fields: f(w) − f(u) + ṽ − v plus
/// Σ lᵢ(sᵢ − ∫cᵢe), where sᵢ is the scalar the observer actually injected.
pub fn lyapunov_oracle(
    traj: &Trajectory,
    scenario: &Scenario,
    basis: &SpectralBasis,
    j_tail: usize,
) -> Result<LyapunovTrace, AnalysisError> {
    let design = &scenario.design;
    let n = design.n;
    if j_tail < n + 1 {
        return Err(AnalysisError::InvalidInput(format!("need at least N + 1 = {} modes, got {j_tail}", n + 1)));
    }
    let g = &traj.grid;
    let modes = basis.sample_modes_on(g, j_tail)?;
    if modes.len() < j_tail {
        return Err(AnalysisError::InvalidInput(format!("basis has {} modes, {j_tail} requested", modes.len())));
    }
    let model = scenario.model()?;
    let q_half = 0.5 * design.certificate.q;
    let floor = roundoff_floor(traj);
    let energy_floor = floor * floor * design.p_norm.max(q_half);

    let count = traj.snapshots.len();
    let mut times = Vec::with_capacity(count);
    let mut v = Vec::with_capacity(count);
    let mut xi = Vec::with_capacity(count);
    let mut tail = Vec::with_capacity(count);
    let mut parseval_deficit = Vec::with_capacity(count);
    let mut error_sq = Vec::with_capacity(count);
    let mut vbar_norm = Vec::with_capacity(count);
    let mut vbar_norm_before = Vec::with_capacity(count);
    let mut energy_violations = 0;
    for (k, s) in traj.snapshots.iter().enumerate() {
        let e = traj.error(k);
        let r: Vec<f64> = modes.iter().map(|phi| g.inner(&e, phi)).collect();
        let e2 = g.inner(&e, &e);
        let head = DVector::from_row_slice(&r[..n]);
        let head_sq = head.norm_squared();
        let deficit = e2 - r.iter().map(|x| x * x).sum::<f64>();
        if e2 > floor * floor && deficit > TAIL_DEFICIT_LIMIT * e2 {
            return Err(AnalysisError::TailTooShort { t: s.t, share: deficit / e2 });
        }
        let value = head.dot(&(&design.p * &head)) + q_half * (e2 - head_sq).max(0.0);
        if e2 > (1.0 + 1e-9) * value + energy_floor {
            energy_violations += 1;
        }
        let after = vbar(&model, s.t, &s.u, &s.w, &e, &s.innovation);
        let before = s.innovation_before.as_ref().map(|b| vbar(&model, s.t, &s.u, &s.w, &e, b));
        times.push(s.t);
        v.push(value);
        xi.push(r[..n].to_vec());
        tail.push(r[n..].to_vec());
        parseval_deficit.push(deficit);
        error_sq.push(e2);
        vbar_norm.push(after);
        vbar_norm_before.push(before);
    }
    let a: Vec<(f64, f64)> = vbar_norm
        .iter()
        .zip(&vbar_norm_before)
        .map(|(after, before)| (before.unwrap_or(*after).powi(2), after.powi(2)))
        .collect();
    let cert = design.certificate;
    let design_bound = integral_bound("design", cert.mu, cert.g_tilde, &times, &v, &a, energy_floor);
    let (mu_c, g_c) = self_consistent_constants(design);
    let consistent = integral_bound("self-consistent", mu_c, g_c, &times, &v, &a, energy_floor);
    let v0 = v.first().copied().unwrap_or(0.0);
    let v0_bound = design.p_norm.max(q_half) * error_sq.first().copied().unwrap_or(0.0);
    Ok(LyapunovTrace {
        times,
        v,
        xi,
        tail,
        parseval_deficit,
        error_sq,
        vbar_norm,
        vbar_norm_before,
        energy_violations,
        v0,
        v0_bound,
        design: design_bound,
        consistent,
        floor: energy_floor,
    })
}

fn vbar(model: &Model, t: f64, u: &[f64], w: &[f64], e: &[f64], injected: &[f64]) -> f64 {
    let g = &model.grid;
    let fw = model.f.eval(g, w);
    let fu = model.f.eval(g, u);
    let mut out: Vec<f64> = fw.iter().zip(&fu).map(|(a, b)| a - b).collect();
    model.v_tilde.add_to(t, 1.0, &mut out);
    model.v.add_to(t, -1.0, &mut out);
    for ((inj, c), l) in injected.iter().zip(&model.c).zip(&model.l) {
        let s = inj - g.inner(c, e);
        out.iter_mut().zip(l).for_each(|(o, v)| *o += s * v);
    }
    g.norm(&out)
}
