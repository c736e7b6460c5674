//! Finite-dimensional observer data (A, L, lᵢ, P, σ, K, Q) and the
//! small-gain certificates of the predictor and zero-order-hold observers.

mod gain;
mod lyapunov;
mod small_gain;

pub use gain::{build_a, coupling_constant_k, injection_kernels, place_poles, CouplingK, InjectionKernel, K_TAIL_WINDOW};
pub use lyapunov::{certificate_margins, lyapunov_certificate, spectral_abscissa};
pub use small_gain::{
    certificate_constants, max_diameter, max_diameter_from_inputs, omega, report, select_q, small_gain_predictor,
    small_gain_zoh, Certificate, ChannelTerms, IosCoefficients, SmallGainInputs, SmallGainReport, Variant,
};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::{self, Profile, ProfileError};
use crate::sturm_liouville::{project, SLProblem, SlError, SpectralBasis};

#[derive(Debug, Error)]
pub enum DesignError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("A is not Hurwitz (spectral abscissa {0})")]
    NotHurwitz(f64),
    #[error("Lyapunov solve is near singular: {0}")]
    NearSingular(String),
    #[error("pole placement impossible: {0}")]
    PlacementImpossible(String),
    #[error("κ = {kappa} is outside [0, μ = {mu})")]
    KappaOutOfRange { kappa: f64, mu: f64 },
    #[error("Q = {q} violates Q ≥ 2 and Q > {bound}")]
    QInfeasible { q: f64, bound: f64 },
    #[error("small-gain condition fails as h → 0 (Ω = {0})")]
    InfeasibleAtZero(f64),
    #[error("no candidate Q is feasible")]
    NoFeasibleQ,
    #[error("λ_(N+1) = {0} must be positive")]
    InvalidN(f64),
    #[error("channel {label}: approximant violates the boundary conditions (residuals {r0:.3e}, {r1:.3e})")]
    ChannelNotInDomain { label: String, r0: f64, r1: f64 },
    #[error("invalid design: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Spectral(#[from] SlError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

fn default_sigma_fraction() -> f64 {
    0.9
}

fn default_q() -> f64 {
    2.0
}

fn default_j_max() -> usize {
    200
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    #[serde(default)]
    pub label: String,
    /// Output kernel kᵢ.
    pub k: Profile,
    /// Approximant cᵢ ∈ D.
    pub c: Profile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GainSpec {
    /// N rows of m entries.
    Matrix { rows: Vec<Vec<f64>> },
    /// Eigenvalue targets for a single output (m = 1).
    Placement { targets: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovSpec {
    #[serde(default = "default_sigma_fraction")]
    pub sigma_fraction: f64,
    /// Explicit P (row-major); requires `sigma` as well.
    #[serde(default)]
    pub p: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub sigma: Option<f64>,
}

impl Default for LyapunovSpec {
    fn default() -> Self {
        Self { sigma_fraction: default_sigma_fraction(), p: None, sigma: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSpec {
    /// Number N of modes handled by the finite-dimensional observer part.
    pub modes: usize,
    pub channels: Vec<ChannelSpec>,
    pub gain: GainSpec,
    #[serde(default)]
    pub lyapunov: LyapunovSpec,
    #[serde(default = "default_q")]
    pub q: f64,
    /// Truncation for K.
    #[serde(default = "default_j_max")]
    pub j_max: usize,
}

/// R of the global Lipschitz inequality and the informational L̄.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBounds {
    pub r: f64,
    pub sup: f64,
}

#[derive(Clone, Debug)]
pub struct ObserverDesign {
    pub n: usize,
    pub channels: Vec<ChannelSpec>,
    pub diffusion: f64,
    /// λ₁ … λ_{N+1}
    pub eigenvalues: Vec<f64>,
    pub gain: DMatrix<f64>,
    pub a: DMatrix<f64>,
    /// m rows of c_{i,j}, j = 1..J.
    pub c_coeffs: Vec<Vec<f64>>,
    pub injection: Vec<InjectionKernel>,
    pub coupling: CouplingK,
    pub p: DMatrix<f64>,
    pub sigma: f64,
    pub p_norm: f64,
    pub ltpl_norm: f64,
    pub certificate: Certificate,
    pub lipschitz: LipschitzBounds,
    pub terms: Vec<ChannelTerms>,
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, DesignError> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(DesignError::DimensionMismatch(format!("{what} must be a non-empty rectangular matrix")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Spectral norm of a symmetric matrix.
fn sym_norm(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigenvalues().iter().fold(0.0_f64, |a, v| a.max(v.abs()))
}

impl ObserverDesign {
    pub fn synthesize(
        problem: &SLProblem,
        basis: &SpectralBasis,
        spec: &DesignSpec,
        lipschitz: LipschitzBounds,
    ) -> Result<Self, DesignError> {
        let n = spec.modes;
        if n == 0 {
            return Err(DesignError::InvalidSpec("N must be at least 1".into()));
        }
        if basis.len() < n + 1 {
            return Err(SlError::TooFewModes { have: basis.len(), need: n + 1 }.into());
        }
        let lambda_next = basis.lambda(n + 1);
        if lambda_next <= 0.0 {
            return Err(DesignError::InvalidN(lambda_next));
        }
        if spec.channels.is_empty() {
            return Err(DesignError::InvalidSpec("at least one output channel is required".into()));
        }
        let grid = basis.grid();
        for (idx, ch) in spec.channels.iter().enumerate() {
            let (r0, r1) = problem.bc_residuals(&ch.c)?;
            let scale = 1.0 + profile::norm(&ch.c, grid)?;
            let tol = if ch.c.is_closed_form() { 1e-8 } else { 1e-4 } * scale;
            if r0.abs() > tol || r1.abs() > tol {
                let label = if ch.label.is_empty() { format!("#{}", idx + 1) } else { ch.label.clone() };
                return Err(DesignError::ChannelNotInDomain { label, r0, r1 });
            }
        }

        let j = spec.j_max.min(basis.len());
        let c_coeffs: Vec<Vec<f64>> =
            spec.channels.iter().map(|ch| project(&ch.c, basis, j)).collect::<Result<_, _>>()?;
        let eigenvalues: Vec<f64> = (1..=n + 1).map(|k| basis.lambda(k)).collect();
        let m = spec.channels.len();

        let gain = match &spec.gain {
            GainSpec::Matrix { rows } => matrix_from_rows(rows, "gain matrix")?,
            GainSpec::Placement { targets } => {
                if m != 1 {
                    return Err(DesignError::PlacementImpossible(format!("placement needs m = 1, got {m}")));
                }
                place_poles(&eigenvalues[..n], &c_coeffs[0], targets)?
            }
        };
        let a = build_a(&eigenvalues[..n], &gain, &c_coeffs)?;
        let (p, sigma) = match (&spec.lyapunov.p, spec.lyapunov.sigma) {
            (Some(rows), Some(sigma)) => {
                let p = matrix_from_rows(rows, "P")?;
                if p.nrows() != n || p.ncols() != n {
                    return Err(DesignError::DimensionMismatch(format!("P must be {n}×{n}")));
                }
                let (abscissa, lmin, lmax) = certificate_margins(&a, &p, sigma);
                if abscissa >= 0.0 {
                    return Err(DesignError::NotHurwitz(abscissa));
                }
                if sigma <= 0.0 || lmin < 1.0 - 1e-10 || lmax > 1e-10 {
                    return Err(DesignError::InvalidSpec(format!(
                        "supplied (P, σ) is not a certificate: λ_min(P) = {lmin}, λ_max(PA+AᵀP+2σP) = {lmax}"
                    )));
                }
                (p, sigma)
            }
            (None, None) => lyapunov_certificate(&a, spec.lyapunov.sigma_fraction)?,
            _ => return Err(DesignError::InvalidSpec("P and σ must be given together".into())),
        };
        let injection = injection_kernels(&gain, basis)?;
        let coupling = coupling_constant_k(&c_coeffs, n, j);
        if coupling.truncation_warning {
            log::warn!(
                "the last {K_TAIL_WINDOW} modes carry {:.2}% of K²; increase j_max",
                100.0 * coupling.tail_share
            );
        }
        let p_norm = sym_norm(&p);
        let ltpl_norm = sym_norm(&(gain.transpose() * &p * &gain));
        let certificate = certificate_constants(p_norm, ltpl_norm, coupling.k, sigma, lambda_next, spec.q)?;

        let terms = spec
            .channels
            .iter()
            .enumerate()
            .map(|(i, ch)| {
                let c_dot_l =
                    (0..m).map(|r| (0..n).map(|k| gain[(k, r)] * c_coeffs[i][k]).sum()).collect();
                Ok(ChannelTerms {
                    l_norm: injection[i].norm,
                    c_norm: profile::norm(&ch.c, grid)?,
                    k_norm: profile::norm(&ch.k, grid)?,
                    kc_distance: profile::distance(&ch.k, &ch.c, grid)?,
                    drift_norm: profile::reaction_diffusion_norm(&ch.c, problem.p, &problem.q, grid)?,
                    c_dot_l,
                })
            })
            .collect::<Result<Vec<_>, DesignError>>()?;

        Ok(Self {
            n,
            channels: spec.channels.clone(),
            diffusion: problem.p,
            eigenvalues,
            gain,
            a,
            c_coeffs,
            injection,
            coupling,
            p,
            sigma,
            p_norm,
            ltpl_norm,
            certificate,
            lipschitz,
            terms,
        })
    }

    pub fn m(&self) -> usize {
        self.channels.len()
    }

    pub fn lambda_next(&self) -> f64 {
        self.eigenvalues[self.n]
    }

    pub fn small_gain_inputs(&self) -> SmallGainInputs {
        SmallGainInputs {
            lipschitz_r: self.lipschitz.r,
            p_norm: self.p_norm,
            certificate: self.certificate,
            channels: self.terms.clone(),
        }
    }

    pub fn small_gain_inputs_with_q(&self, q: f64) -> Result<SmallGainInputs, DesignError> {
        let certificate =
            certificate_constants(self.p_norm, self.ltpl_norm, self.coupling.k, self.sigma, self.lambda_next(), q)?;
        Ok(SmallGainInputs { certificate, ..self.small_gain_inputs() })
    }

    /// Copy of the design with a different Q.
    pub fn with_q(&self, q: f64) -> Result<Self, DesignError> {
        let certificate =
            certificate_constants(self.p_norm, self.ltpl_norm, self.coupling.k, self.sigma, self.lambda_next(), q)?;
        Ok(Self { certificate, ..self.clone() })
    }

    /// Copy with P scaled by α (σ unchanged).
    pub fn with_scaled_p(&self, alpha: f64) -> Result<Self, DesignError> {
        let p = &self.p * alpha;
        let p_norm = sym_norm(&p);
        let ltpl_norm = sym_norm(&(self.gain.transpose() * &p * &self.gain));
        let certificate =
            certificate_constants(p_norm, ltpl_norm, self.coupling.k, self.sigma, self.lambda_next(), self.certificate.q)?;
        Ok(Self { p, p_norm, ltpl_norm, certificate, ..self.clone() })
    }

    /// Re-checks the matrix inequalities and the formula for A.
    pub fn verify(&self) -> CertificateCheck {
        let (abscissa, p_min_eigenvalue, lmi_max_eigenvalue) = certificate_margins(&self.a, &self.p, self.sigma);
        let a_again = build_a(&self.eigenvalues[..self.n], &self.gain, &self.c_coeffs).expect("dimensions were checked");
        CertificateCheck {
            abscissa,
            p_min_eigenvalue,
            lmi_max_eigenvalue,
            a_formula_error: (&a_again - &self.a).abs().max(),
        }
    }

    /// JSON document with the scalar and matrix data (matrices row-major).
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "m": self.m(),
            "diffusion": self.diffusion,
            "eigenvalues": self.eigenvalues,
            "lambda_next": self.lambda_next(),
            "L": matrix_rows(&self.gain),
            "A": matrix_rows(&self.a),
            "c_coeffs": self.c_coeffs,
            "l_norms": self.injection.iter().map(|l| l.norm).collect::<Vec<_>>(),
            "K": self.coupling,
            "P": matrix_rows(&self.p),
            "sigma": self.sigma,
            "P_norm": self.p_norm,
            "LtPL_norm": self.ltpl_norm,
            "Q": self.certificate.q,
            "H_Q": self.certificate.h_q,
            "mu": self.certificate.mu,
            "g_tilde": self.certificate.g_tilde,
            "lipschitz_R": self.lipschitz.r,
            "lipschitz_sup": self.lipschitz.sup,
            "channels": self.channels.iter().zip(&self.terms).map(|(c, t)| serde_json::json!({
                "label": c.label,
                "k": c.k,
                "c": c.c,
                "terms": t,
            })).collect::<Vec<_>>(),
            "check": self.verify(),
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CertificateCheck {
    pub abscissa: f64,
    pub p_min_eigenvalue: f64,
    pub lmi_max_eigenvalue: f64,
    pub a_formula_error: f64,
}

impl CertificateCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.abscissa < 0.0 && self.p_min_eigenvalue >= 1.0 - tol && self.lmi_max_eigenvalue <= tol && self.a_formula_error <= tol
    }
}
