use serde::{Deserialize, Serialize};

use super::{DesignError, ObserverDesign};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Predictor,
    Zoh,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Predictor => "predictor",
            Variant::Zoh => "zoh",
        })
    }
}

/// Q-dependent constants: H(Q), μ, g̃.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub q: f64,
    pub h_q: f64,
    pub mu: f64,
    pub g_tilde: f64,
}

/// H(Q), μ and g̃ from |P|, |LᵀPL|, K, σ and λ_{N+1}.
pub fn certificate_constants(
    p_norm: f64,
    ltpl_norm: f64,
    k: f64,
    sigma: f64,
    lambda_next: f64,
    q: f64,
) -> Result<Certificate, DesignError> {
    let bound = 2.0 * ltpl_norm * k * k / (sigma * lambda_next);
    if !(q >= 2.0) || q <= bound {
        return Err(DesignError::QInfeasible { q, bound: bound.max(2.0) });
    }
    let d = 2.0 * sigma - lambda_next;
    let h_q = d - (d * d + 16.0 * ltpl_norm * k * k / q).sqrt();
    let mu = (h_q + 2.0 * lambda_next) / 4.0;
    if mu <= 0.0 {
        return Err(DesignError::QInfeasible { q, bound });
    }
    let g_tilde = (4.0 * p_norm / (4.0 * sigma + h_q)).max(q / (2.0 * lambda_next));
    Ok(Certificate { q, h_q, mu, g_tilde })
}

/// Per-channel norms entering Ω.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelTerms {
    /// ‖lᵢ‖
    pub l_norm: f64,
    /// ‖cᵢ‖
    pub c_norm: f64,
    /// ‖kᵢ‖
    pub k_norm: f64,
    /// ‖kᵢ − cᵢ‖
    pub kc_distance: f64,
    /// ‖p cᵢ″ − q cᵢ‖
    pub drift_norm: f64,
    /// ∫ cᵢ l_r for r = 1..m
    pub c_dot_l: Vec<f64>,
}

/// Everything Ω depends on, stored so a report can be re-evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallGainInputs {
    pub lipschitz_r: f64,
    pub p_norm: f64,
    pub certificate: Certificate,
    pub channels: Vec<ChannelTerms>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IosCoefficients {
    /// √max(|P|, Q/2)/(1 − Ω)
    pub initial: f64,
    /// Per-channel gains on the exp-weighted sup of |ξᵢ|.
    pub noise: Vec<f64>,
    /// Gain on the exp-weighted sup of ‖v − ṽ‖.
    pub mismatch: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallGainReport {
    pub variant: Variant,
    pub h: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub omega: f64,
    pub feasible: bool,
    pub coefficients: IosCoefficients,
    pub inputs: SmallGainInputs,
}

impl SmallGainReport {
    /// Ω re-evaluated from the stored inputs.
    pub fn recompute_omega(&self) -> f64 {
        omega(&self.inputs, self.variant, self.h, self.kappa).1
    }
}

fn gamma(inputs: &SmallGainInputs, kappa: f64) -> f64 {
    let c = &inputs.certificate;
    (c.g_tilde / (2.0 * (c.mu - kappa))).sqrt()
}

/// Σᵢ‖lᵢ‖‖kᵢ−cᵢ‖ and the coefficient of h inside the bracket.
fn bracket(inputs: &SmallGainInputs, variant: Variant) -> (f64, f64) {
    let r = inputs.lipschitz_r;
    let k_norms: Vec<f64> = inputs.channels.iter().map(|c| c.k_norm).collect();
    inputs.channels.iter().fold((0.0, 0.0), |(s0, s1), ch| {
        let mut rate = ch.drift_norm + r * ch.c_norm;
        if variant == Variant::Zoh {
            rate += ch.c_dot_l.iter().zip(&k_norms).map(|(cl, k)| cl.abs() * k).sum::<f64>();
        }
        (s0 + ch.l_norm * ch.kc_distance, s1 + ch.l_norm * rate)
    })
}

/// (γ, Ω) for the given variant.
pub fn omega(inputs: &SmallGainInputs, variant: Variant, h: f64, kappa: f64) -> (f64, f64) {
    let g = gamma(inputs, kappa);
    let (s0, s1) = bracket(inputs, variant);
    (g, g * (inputs.lipschitz_r + (kappa * h).exp() * (s1 * h + s0)))
}

pub fn report(inputs: &SmallGainInputs, variant: Variant, h: f64, kappa: f64) -> Result<SmallGainReport, DesignError> {
    if !(h > 0.0) {
        return Err(DesignError::InvalidSpec(format!("sampling diameter must be positive, got {h}")));
    }
    let mu = inputs.certificate.mu;
    if !(kappa >= 0.0 && kappa < mu) {
        return Err(DesignError::KappaOutOfRange { kappa, mu });
    }
    let (g, om) = omega(inputs, variant, h, kappa);
    let feasible = om < 1.0;
    let denom = if feasible { 1.0 - om } else { 0.0 };
    let ekh = (kappa * h).exp();
    let cert = &inputs.certificate;
    let initial = inputs.p_norm.max(cert.q / 2.0).sqrt() / denom;
    let l_norms: Vec<f64> = inputs.channels.iter().map(|c| c.l_norm).collect();
    let noise = (0..inputs.channels.len())
        .map(|i| {
            let base = l_norms[i];
            let extra = match variant {
                Variant::Predictor => 0.0,
                Variant::Zoh => h * inputs
                    .channels
                    .iter()
                    .zip(&l_norms)
                    .map(|(cr, lr)| lr * cr.c_dot_l[i].abs())
                    .sum::<f64>(),
            };
            ekh * g * (base + extra) / denom
        })
        .collect();
    let lc: f64 = inputs.channels.iter().map(|c| c.l_norm * c.c_norm).sum();
    let mismatch = g * (1.0 + h * ekh * lc) / denom;
    Ok(SmallGainReport {
        variant,
        h,
        kappa,
        gamma: g,
        omega: om,
        feasible,
        coefficients: IosCoefficients { initial, noise, mismatch },
        inputs: inputs.clone(),
    })
}

pub fn small_gain_predictor(design: &ObserverDesign, h: f64, kappa: f64) -> Result<SmallGainReport, DesignError> {
    report(&design.small_gain_inputs(), Variant::Predictor, h, kappa)
}

pub fn small_gain_zoh(design: &ObserverDesign, h: f64, kappa: f64) -> Result<SmallGainReport, DesignError> {
    report(&design.small_gain_inputs(), Variant::Zoh, h, kappa)
}

/// Largest h with Ω(h) ≤ 1, or +∞ when Ω stays below one for every h.
pub fn max_diameter_from_inputs(inputs: &SmallGainInputs, kappa: f64, variant: Variant) -> Result<f64, DesignError> {
    let mu = inputs.certificate.mu;
    if !(kappa >= 0.0 && kappa < mu) {
        return Err(DesignError::KappaOutOfRange { kappa, mu });
    }
    let f = |h: f64| omega(inputs, variant, h, kappa).1;
    let at_zero = f(0.0);
    if at_zero >= 1.0 {
        return Err(DesignError::InfeasibleAtZero(at_zero));
    }
    let (s0, s1) = bracket(inputs, variant);
    if s1 == 0.0 && (kappa == 0.0 || s0 == 0.0) {
        return Ok(f64::INFINITY);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < 1.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Ok(f64::INFINITY);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn max_diameter(design: &ObserverDesign, kappa: f64, variant: Variant) -> Result<f64, DesignError> {
    max_diameter_from_inputs(&design.small_gain_inputs(), kappa, variant)
}

/// Candidate Q with the smallest Ω (ties go to the smaller Q).
pub fn select_q(
    design: &ObserverDesign,
    candidates: &[f64],
    h: f64,
    kappa: f64,
    variant: Variant,
) -> Result<(f64, SmallGainReport), DesignError> {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best: Option<(f64, SmallGainReport)> = None;
    for q in sorted {
        let Ok(inputs) = design.small_gain_inputs_with_q(q) else { continue };
        let Ok(rep) = report(&inputs, variant, h, kappa) else { continue };
        let better = match &best {
            None => true,
            Some((_, b)) => rep.omega < b.omega * (1.0 - 1e-14),
        };
        if better {
            best = Some((q, rep));
        }
    }
    best.ok_or(DesignError::NoFeasibleQ)
}
