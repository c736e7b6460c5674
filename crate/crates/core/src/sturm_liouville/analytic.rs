use std::f64::consts::{PI, SQRT_2};

use super::{RobinBc, SLProblem, SlError, SpectralBasis};
use crate::grid::Grid;
use crate::profile::Profile;

/// The four constant-coefficient cases with closed-form eigenpairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryCase {
    NeumannNeumann,
    NeumannDirichlet,
    DirichletDirichlet,
    DirichletNeumann,
}

impl BoundaryCase {
    pub fn detect(bc: &RobinBc) -> Option<Self> {
        let left_neumann = bc.a0 == 0.0 && bc.b0 != 0.0;
        let left_dirichlet = bc.b0 == 0.0 && bc.a0 != 0.0;
        let right_neumann = bc.a1 == 0.0 && bc.b1 != 0.0;
        let right_dirichlet = bc.b1 == 0.0 && bc.a1 != 0.0;
        match (left_neumann, left_dirichlet, right_neumann, right_dirichlet) {
            (true, _, true, _) => Some(Self::NeumannNeumann),
            (true, _, _, true) => Some(Self::NeumannDirichlet),
            (_, true, _, true) => Some(Self::DirichletDirichlet),
            (_, true, true, _) => Some(Self::DirichletNeumann),
            _ => None,
        }
    }

    /// Spatial frequency kₙ with φₙ″ = −kₙ² φₙ (n is 1-based).
    pub fn frequency(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Self::NeumannNeumann => (n - 1.0) * PI,
            Self::DirichletDirichlet => n * PI,
            Self::NeumannDirichlet | Self::DirichletNeumann => (2.0 * n - 1.0) * PI / 2.0,
        }
    }

    pub fn eigenfunction(self, n: usize) -> Profile {
        let k = self.frequency(n);
        match self {
            Self::NeumannNeumann if n == 1 => Profile::constant(1.0),
            Self::NeumannNeumann | Self::NeumannDirichlet => Profile::cosine(SQRT_2, k),
            Self::DirichletDirichlet | Self::DirichletNeumann => Profile::sine(SQRT_2, k),
        }
    }
}

/// Exact eigenpairs for constant q and one of the four standard cases,
/// sampled on `grid`.
pub fn analytic_eigensystem(problem: &SLProblem, j: usize, grid: &Grid) -> Result<SpectralBasis, SlError> {
    problem.validate()?;
    let q = problem.q.as_constant().ok_or_else(|| {
        SlError::UnsupportedAnalyticCase("reaction profile q is not constant".into())
    })?;
    let case = BoundaryCase::detect(&problem.bc).ok_or_else(|| {
        SlError::UnsupportedAnalyticCase("boundary conditions are genuinely Robin".into())
    })?;
    let mut eigenvalues = Vec::with_capacity(j);
    let mut modes = Vec::with_capacity(j);
    let mut derivs = Vec::with_capacity(j);
    let mut forms = Vec::with_capacity(j);
    for n in 1..=j {
        let k = case.frequency(n);
        let phi = case.eigenfunction(n);
        eigenvalues.push(problem.p * k * k + q);
        modes.push(phi.sample(grid)?);
        let (_, d0, _, d1) = phi.endpoint_data()?;
        derivs.push((d0, d1));
        forms.push(phi);
    }
    Ok(SpectralBasis::from_parts(eigenvalues, grid.clone(), modes, derivs, Some(forms)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(bc: RobinBc, q: f64) -> SLProblem {
        SLProblem::new(1.0, Profile::constant(q), bc).unwrap()
    }

    #[test]
    fn neumann_neumann_first_two() {
        let b = analytic_eigensystem(&problem(RobinBc::NEUMANN_NEUMANN, 0.0), 2, &Grid::new(101)).unwrap();
        assert_eq!(b.lambda(1), 0.0);
        assert!((b.lambda(2) - PI * PI).abs() < 1e-12);
        assert!(b.mode(1).iter().all(|v| *v == 1.0));
        assert!((b.mode(2)[0] - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn neumann_dirichlet_with_reaction() {
        let b = analytic_eigensystem(&problem(RobinBc::NEUMANN_DIRICHLET, 0.0), 1, &Grid::new(101)).unwrap();
        assert!((b.lambda(1) - PI * PI / 4.0).abs() < 1e-14);
        let b = analytic_eigensystem(&problem(RobinBc::NEUMANN_DIRICHLET, 5.0), 1, &Grid::new(101)).unwrap();
        assert!((b.lambda(1) - (PI * PI / 4.0 + 5.0)).abs() < 1e-14);
    }

    #[test]
    fn all_cases_are_orthonormal_and_satisfy_bcs() {
        for bc in [
            RobinBc::NEUMANN_NEUMANN,
            RobinBc::NEUMANN_DIRICHLET,
            RobinBc::DIRICHLET_DIRICHLET,
            RobinBc::DIRICHLET_NEUMANN,
        ] {
            let b = analytic_eigensystem(&problem(bc, 1.0), 8, &Grid::new(1001)).unwrap();
            assert!(b.orthonormality_error() < 1e-6);
            assert!(b.bc_residual(&bc) < 1e-12);
            assert!(b.eigenvalues().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn unsupported_cases() {
        let robin = RobinBc { a0: -1.0, b0: 1.0, a1: 0.0, b1: 1.0 };
        assert!(matches!(
            analytic_eigensystem(&problem(robin, 0.0), 2, &Grid::new(11)),
            Err(SlError::UnsupportedAnalyticCase(_))
        ));
        let p = SLProblem::new(1.0, Profile::polynomial(vec![0.0, 1.0]), RobinBc::NEUMANN_NEUMANN).unwrap();
        assert!(matches!(
            analytic_eigensystem(&p, 2, &Grid::new(11)),
            Err(SlError::UnsupportedAnalyticCase(_))
        ));
    }
}
