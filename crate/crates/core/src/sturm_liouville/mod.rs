//! The Sturm–Liouville operator `B u = −p u″ + q(x) u` on [0, 1] with
//! separated Robin conditions, its eigenbasis, and related utilities.

mod analytic;
mod h1;
mod io;
mod liouville;
mod numeric;

pub use analytic::{analytic_eigensystem, BoundaryCase};
pub use h1::{check_h1, H1Report};
pub use io::{read_basis_csv, write_basis_csv};
pub use liouville::{liouville_transform, CoordinateMap, GeneralSLProblem};
pub use numeric::{discrete_operator, numeric_eigensystem, DiscreteOperator};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::Grid;
use crate::profile::{self, Profile, ProfileError};

#[derive(Debug, Error)]
pub enum SlError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("no closed-form eigensystem: {0}")]
    UnsupportedAnalyticCase(String),
    #[error("resolution too coarse: {0}")]
    ResolutionTooCoarse(String),
    #[error("λ_{m} = {lambda} is not positive")]
    InvalidM { m: usize, lambda: f64 },
    #[error("basis has {have} modes, {need} required")]
    TooFewModes { have: usize, need: usize },
    #[error("non-positive coefficient: {0}")]
    NonPositiveCoefficient(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(#[from] ProfileError),
    #[error("basis file: {0}")]
    Io(String),
}

/// Robin coefficients: `a0 u(0) + b0 u′(0) = 0`, `a1 u(1) + b1 u′(1) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobinBc {
    pub a0: f64,
    pub b0: f64,
    pub a1: f64,
    pub b1: f64,
}

impl RobinBc {
    pub const NEUMANN_NEUMANN: RobinBc = RobinBc { a0: 0.0, b0: 1.0, a1: 0.0, b1: 1.0 };
    pub const NEUMANN_DIRICHLET: RobinBc = RobinBc { a0: 0.0, b0: 1.0, a1: 1.0, b1: 0.0 };
    pub const DIRICHLET_DIRICHLET: RobinBc = RobinBc { a0: 1.0, b0: 0.0, a1: 1.0, b1: 0.0 };
    pub const DIRICHLET_NEUMANN: RobinBc = RobinBc { a0: 1.0, b0: 0.0, a1: 0.0, b1: 1.0 };

    /// Residuals of both conditions for endpoint data `(u(0), u′(0), u(1), u′(1))`.
    pub fn residuals(&self, data: (f64, f64, f64, f64)) -> (f64, f64) {
        let (u0, d0, u1, d1) = data;
        (self.a0 * u0 + self.b0 * d0, self.a1 * u1 + self.b1 * d1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SLProblem {
    pub p: f64,
    pub q: Profile,
    pub bc: RobinBc,
}

impl SLProblem {
    pub fn new(p: f64, q: Profile, bc: RobinBc) -> Result<Self, SlError> {
        let problem = Self { p, q, bc };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<(), SlError> {
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(SlError::InvalidProblem(format!("p must be positive, got {}", self.p)));
        }
        let RobinBc { a0, b0, a1, b1 } = self.bc;
        if a0 * a0 + b0 * b0 <= 0.0 || a1 * a1 + b1 * b1 <= 0.0 {
            return Err(SlError::InvalidProblem("a² + b² must be positive at both ends".into()));
        }
        Ok(())
    }

    /// Sufficient sign condition b0, a1, b1 ≥ 0, a0 ≤ 0.
    pub fn sign_condition(&self) -> bool {
        let RobinBc { a0, b0, a1, b1 } = self.bc;
        b0 >= 0.0 && a1 >= 0.0 && b1 >= 0.0 && a0 <= 0.0
    }

    /// Residuals of the boundary conditions for a function.
    pub fn bc_residuals(&self, f: &Profile) -> Result<(f64, f64), SlError> {
        Ok(self.bc.residuals(f.endpoint_data()?))
    }
}

/// First J eigenpairs on a uniform grid.
#[derive(Clone, Debug)]
pub struct SpectralBasis {
    eigenvalues: Vec<f64>,
    grid: Grid,
    modes: Vec<Vec<f64>>,
    endpoint_derivatives: Vec<(f64, f64)>,
    closed_forms: Option<Vec<Profile>>,
}

impl SpectralBasis {
    pub(crate) fn from_parts(
        eigenvalues: Vec<f64>,
        grid: Grid,
        modes: Vec<Vec<f64>>,
        endpoint_derivatives: Vec<(f64, f64)>,
        closed_forms: Option<Vec<Profile>>,
    ) -> Self {
        debug_assert_eq!(eigenvalues.len(), modes.len());
        Self { eigenvalues, grid, modes, endpoint_derivatives, closed_forms }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// λₙ with 1-based numbering.
    pub fn lambda(&self, n: usize) -> f64 {
        self.eigenvalues[n - 1]
    }

    /// Grid samples of φₙ, 1-based.
    pub fn mode(&self, n: usize) -> &[f64] {
        &self.modes[n - 1]
    }

    pub fn modes(&self) -> &[Vec<f64>] {
        &self.modes
    }

    pub fn endpoint_derivatives(&self, n: usize) -> (f64, f64) {
        self.endpoint_derivatives[n - 1]
    }

    /// Closed-form φₙ when the basis is analytic, else grid samples.
    pub fn mode_profile(&self, n: usize) -> Profile {
        match &self.closed_forms {
            Some(forms) => forms[n - 1].clone(),
            None => Profile::Sampled { values: self.modes[n - 1].clone() },
        }
    }

    pub fn is_analytic(&self) -> bool {
        self.closed_forms.is_some()
    }

    /// First `count` modes, sharing the grid.
    pub fn truncated(&self, count: usize) -> SpectralBasis {
        let count = count.min(self.len());
        SpectralBasis {
            eigenvalues: self.eigenvalues[..count].to_vec(),
            grid: self.grid.clone(),
            modes: self.modes[..count].to_vec(),
            endpoint_derivatives: self.endpoint_derivatives[..count].to_vec(),
            closed_forms: self.closed_forms.as_ref().map(|f| f[..count].to_vec()),
        }
    }

    /// Modes restricted to a coarser grid (exact subsampling) or, for
    /// analytic bases, re-evaluated on any grid.
    pub fn sample_modes_on(&self, grid: &Grid, count: usize) -> Result<Vec<Vec<f64>>, SlError> {
        (1..=count.min(self.len()))
            .map(|n| Ok(self.mode_profile(n).sample(grid)?))
            .collect()
    }

    /// max |∫φₙφₘ − δₙₘ| by the trapezoid rule on the basis grid.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for n in 0..self.len() {
            for m in n..self.len() {
                let ip = self.grid.inner(&self.modes[n], &self.modes[m]);
                let target = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }

    /// Worst boundary-condition residual over all modes.
    pub fn bc_residual(&self, bc: &RobinBc) -> f64 {
        self.modes
            .iter()
            .zip(&self.endpoint_derivatives)
            .map(|(m, &(d0, d1))| {
                let (r0, r1) = bc.residuals((m[0], d0, m[m.len() - 1], d1));
                r0.abs().max(r1.abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Coefficients ∫ f φₙ for n = 1..=J.
pub fn project(f: &Profile, basis: &SpectralBasis, j: usize) -> Result<Vec<f64>, SlError> {
    if j > basis.len() {
        return Err(SlError::TooFewModes { have: basis.len(), need: j });
    }
    if basis.is_analytic() && f.is_closed_form() {
        (1..=j)
            .map(|n| Ok(profile::inner(f, &basis.mode_profile(n), basis.grid())?))
            .collect()
    } else {
        let samples = f.sample(basis.grid())?;
        Ok(project_samples(&samples, basis, j))
    }
}

/// Trapezoid projections of grid samples that already live on the basis grid.
pub fn project_samples(samples: &[f64], basis: &SpectralBasis, j: usize) -> Vec<f64> {
    (1..=j.min(basis.len())).map(|n| basis.grid().inner(samples, basis.mode(n))).collect()
}
