use super::{SLProblem, SlError, SpectralBasis};
use crate::grid::{self, Grid};
use crate::linalg::{SymTridiagonal, Tridiagonal};

/// Second-order finite-difference discretisation `B_h` of the SL operator.
///
/// Robin ends are eliminated with a ghost node; Dirichlet ends are removed
/// from the unknowns (their value is pinned to zero).
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    grid: Grid,
    first: usize,
    last: usize,
    matrix: Tridiagonal,
    weights: Vec<f64>,
}

impl DiscreteOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Indices of the unknowns (inclusive range).
    pub fn free_range(&self) -> std::ops::RangeInclusive<usize> {
        self.first..=self.last
    }

    pub fn dirichlet_left(&self) -> bool {
        self.first == 1
    }

    pub fn dirichlet_right(&self) -> bool {
        self.last + 2 == self.grid.nodes()
    }

    /// `B_h` restricted to the unknowns.
    pub fn matrix(&self) -> &Tridiagonal {
        &self.matrix
    }

    /// `B_h u` on the full grid, zero at Dirichlet nodes.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        let bu = self.matrix.apply(&u[self.first..=self.last]);
        out[self.first..=self.last].copy_from_slice(&bu);
        out
    }

    /// Zero the Dirichlet nodes of a full-grid vector.
    pub fn project_to_domain(&self, u: &mut [f64]) {
        if self.dirichlet_left() {
            u[0] = 0.0;
        }
        if self.dirichlet_right() {
            let n = u.len();
            u[n - 1] = 0.0;
        }
    }

    // Symmetrised form W^{1/2} B_h W^{-1/2}.
    fn symmetric(&self) -> SymTridiagonal {
        let n = self.matrix.len();
        let b = (0..n - 1)
            .map(|i| {
                let s = (self.weights[i] / self.weights[i + 1]).sqrt();
                self.matrix.sup[i] * s
            })
            .collect();
        SymTridiagonal { a: self.matrix.diag.clone(), b }
    }
}

pub fn discrete_operator(problem: &SLProblem, grid: &Grid) -> Result<DiscreteOperator, SlError> {
    problem.validate()?;
    let n = grid.nodes();
    let dx = grid.dx();
    let p = problem.p;
    let q = problem.q.sample(grid)?;
    let bc = problem.bc;
    let first = usize::from(bc.b0 == 0.0);
    let last = if bc.b1 == 0.0 { n - 2 } else { n - 1 };
    let size = last + 1 - first;
    let c = p / (dx * dx);
    let mut diag = vec![0.0; size];
    let mut sub = vec![-c; size - 1];
    let mut sup = vec![-c; size - 1];
    let mut weights = vec![1.0; size];
    for (k, i) in (first..=last).enumerate() {
        diag[k] = 2.0 * c + q[i];
    }
    if bc.b0 != 0.0 {
        diag[0] = c * (2.0 - 2.0 * dx * bc.a0 / bc.b0) + q[0];
        sup[0] = -2.0 * c;
        weights[0] = 0.5;
    }
    if bc.b1 != 0.0 {
        diag[size - 1] = c * (2.0 + 2.0 * dx * bc.a1 / bc.b1) + q[n - 1];
        sub[size - 2] = -2.0 * c;
        weights[size - 1] = 0.5;
    }
    Ok(DiscreteOperator {
        grid: grid.clone(),
        first,
        last,
        matrix: Tridiagonal::new(sub, diag, sup),
        weights,
    })
}

/// Lowest `j` eigenpairs of `B_h` on a `nodes`-point grid, normalised in the
/// trapezoid inner product.
pub fn numeric_eigensystem(problem: &SLProblem, j: usize, nodes: usize) -> Result<SpectralBasis, SlError> {
    if nodes < 8 * j || nodes < 8 {
        return Err(SlError::ResolutionTooCoarse(format!(
            "{nodes} nodes cannot resolve {j} modes (need at least {})",
            8 * j.max(1)
        )));
    }
    let grid = Grid::new(nodes);
    let op = discrete_operator(problem, &grid)?;
    let (values, vectors) = op.symmetric().lowest_eigenpairs(j);

    let dx = grid.dx();
    let qbar = grid.integrate(&problem.q.sample(&grid)?);
    let err = |lambda: f64| (lambda - qbar).powi(2) * dx * dx / (12.0 * problem.p);
    for k in 1..values.len() {
        let gap = values[k] - values[k - 1];
        if gap < 10.0 * err(values[k]) {
            return Err(SlError::ResolutionTooCoarse(format!(
                "λ_{} and λ_{} are {gap:.3e} apart, estimated discretisation error {:.3e}",
                k,
                k + 1,
                err(values[k])
            )));
        }
    }

    let bc = problem.bc;
    let mut modes = Vec::with_capacity(j);
    let mut derivs = Vec::with_capacity(j);
    for y in vectors {
        let mut phi = vec![0.0; nodes];
        for (k, i) in op.free_range().enumerate() {
            phi[i] = y[k] / op.weights[k].sqrt();
        }
        let norm = grid.norm(&phi);
        let lead = if bc.b0 == 0.0 { phi[1] } else { phi[0] };
        let scale = if lead < 0.0 { -1.0 / norm } else { 1.0 / norm };
        phi.iter_mut().for_each(|v| *v *= scale);
        let (fd0, fd1) = grid::endpoint_derivatives(&grid, &phi);
        let d0 = if bc.b0 == 0.0 { fd0 } else { -bc.a0 / bc.b0 * phi[0] };
        let d1 = if bc.b1 == 0.0 { fd1 } else { -bc.a1 / bc.b1 * phi[nodes - 1] };
        modes.push(phi);
        derivs.push((d0, d1));
    }
    Ok(SpectralBasis::from_parts(values, grid, modes, derivs, None))
}

#[cfg(test)]
mod tests {
    use super::super::{analytic_eigensystem, RobinBc};
    use super::*;
    use crate::profile::Profile;

    fn problem(bc: RobinBc, q: Profile) -> SLProblem {
        SLProblem::new(1.0, q, bc).unwrap()
    }

    #[test]
    fn matches_analytic_cases() {
        for bc in [
            RobinBc::NEUMANN_NEUMANN,
            RobinBc::NEUMANN_DIRICHLET,
            RobinBc::DIRICHLET_DIRICHLET,
            RobinBc::DIRICHLET_NEUMANN,
        ] {
            let pr = problem(bc, Profile::zero());
            let num = numeric_eigensystem(&pr, 4, 1001).unwrap();
            let exact = analytic_eigensystem(&pr, 4, num.grid()).unwrap();
            for n in 1..=4 {
                let (a, b) = (num.lambda(n), exact.lambda(n));
                let rel = if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
                assert!(rel < 1e-3, "{bc:?} n={n}: {a} vs {b}");
                let diff = grid::sub(num.mode(n), exact.mode(n));
                assert!(num.grid().norm(&diff) < 1e-3, "{bc:?} mode {n}");
            }
            assert!(num.orthonormality_error() < 1e-10);
            assert!(num.bc_residual(&bc) < 1e-3);
        }
    }

    #[test]
    fn constant_shift_is_exact() {
        let base = numeric_eigensystem(&problem(RobinBc::NEUMANN_DIRICHLET, Profile::zero()), 5, 401).unwrap();
        let shifted =
            numeric_eigensystem(&problem(RobinBc::NEUMANN_DIRICHLET, Profile::constant(3.5)), 5, 401).unwrap();
        for n in 1..=5 {
            let d = shifted.lambda(n) - base.lambda(n) - 3.5;
            assert!(d.abs() < 1e-9 * (1.0 + base.lambda(n)), "n={n} d={d}");
        }
    }

    #[test]
    fn eigen_residual_is_small() {
        let pr = problem(
            RobinBc { a0: -1.0, b0: 1.0, a1: 2.0, b1: 1.0 },
            Profile::polynomial(vec![1.0, -2.0, 3.0]),
        );
        let basis = numeric_eigensystem(&pr, 6, 801).unwrap();
        let op = discrete_operator(&pr, basis.grid()).unwrap();
        for n in 1..=6 {
            let phi = basis.mode(n);
            let bphi = op.apply(phi);
            let r: Vec<f64> = bphi.iter().zip(phi).map(|(b, p)| b - basis.lambda(n) * p).collect();
            assert!(basis.grid().norm(&r) < 1e-8 * (1.0 + basis.lambda(n).abs()), "n={n}");
        }
    }

    #[test]
    fn coarse_resolution_is_rejected() {
        let pr = problem(RobinBc::NEUMANN_NEUMANN, Profile::zero());
        assert!(matches!(numeric_eigensystem(&pr, 20, 100), Err(SlError::ResolutionTooCoarse(_))));
        assert!(matches!(numeric_eigensystem(&pr, 100, 801), Err(SlError::ResolutionTooCoarse(_))));
    }

    #[test]
    fn sign_convention() {
        let pr = problem(RobinBc::DIRICHLET_NEUMANN, Profile::zero());
        let b = numeric_eigensystem(&pr, 3, 201).unwrap();
        for n in 1..=3 {
            assert_eq!(b.mode(n)[0], 0.0);
            assert!(b.mode(n)[1] > 0.0);
            assert!(b.endpoint_derivatives(n).0 > 0.0);
        }
    }
}
