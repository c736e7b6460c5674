use super::nonlinearity::SampledNonlinearity;
use super::signals::SampledSignal;
use super::SimError;
use crate::grid::{self, Grid};
use crate::linalg::{Tridiagonal, TridiagonalLu};
use crate::profile::{Profile, ProfileError};
use crate::sturm_liouville::{discrete_operator, DiscreteOperator, SLProblem};

/// Crank–Nicolson factorisation of `I + dt/2·B_h` for one step size.
pub struct CrankNicolson {
    dt: f64,
    lu: TridiagonalLu,
}

impl CrankNicolson {
    pub fn new(op: &DiscreteOperator, dt: f64) -> Self {
        let m = op.matrix();
        let a = 0.5 * dt;
        let lhs = Tridiagonal::new(
            m.sub.iter().map(|v| a * v).collect(),
            m.diag.iter().map(|v| 1.0 + a * v).collect(),
            m.sup.iter().map(|v| a * v).collect(),
        );
        Self { dt, lu: lhs.factor() }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Solves `(I + dt/2 B_h) y = (I − dt/2 B_h) x + dt·e` on the unknowns.
    fn step(&self, op: &DiscreteOperator, x: &[f64], e: &[f64]) -> Vec<f64> {
        let range = op.free_range();
        let bx = op.matrix().apply(&x[range.clone()]);
        let mut rhs: Vec<f64> = range
            .clone()
            .zip(&bx)
            .map(|(i, b)| x[i] - 0.5 * self.dt * b + self.dt * e[i])
            .collect();
        self.lu.solve_in_place(&mut rhs);
        let mut y = vec![0.0; x.len()];
        y[range].copy_from_slice(&rhs);
        y
    }
}

/// The discretised plant and observer data on the simulation grid.
pub struct Model {
    pub grid: Grid,
    pub op: DiscreteOperator,
    /// kᵢ, cᵢ, lᵢ samples and gᵢ = −B_h cᵢ, the discrete p cᵢ″ − q cᵢ.
    pub k: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub l: Vec<Vec<f64>>,
    pub g: Vec<Vec<f64>>,
    pub f: SampledNonlinearity,
    pub v: SampledSignal,
    pub v_tilde: SampledSignal,
}

impl Model {
    pub fn new(
        problem: &SLProblem,
        grid: &Grid,
        channels: &[(Profile, Profile, Profile)],
        f: SampledNonlinearity,
        v: SampledSignal,
        v_tilde: SampledSignal,
    ) -> Result<Self, SimError> {
        let op = discrete_operator(problem, grid)?;
        let sample = |p: &Profile| -> Result<Vec<f64>, ProfileError> {
            let mut s = p.sample(grid)?;
            op.project_to_domain(&mut s);
            Ok(s)
        };
        let mut k = Vec::new();
        let mut c = Vec::new();
        let mut l = Vec::new();
        let mut g = Vec::new();
        for (ki, ci, li) in channels {
            k.push(ki.sample(grid)?);
            let cs = sample(ci)?;
            g.push(op.apply(&cs).iter().map(|v| -v).collect());
            c.push(cs);
            l.push(sample(li)?);
        }
        Ok(Self { grid: grid.clone(), op, k, c, l, g, f, v, v_tilde })
    }

    pub fn m(&self) -> usize {
        self.c.len()
    }

    /// yᵢ = ξᵢ + ∫ kᵢ u
    pub fn measure(&self, u: &[f64], xi: &[f64]) -> Vec<f64> {
        self.k.iter().zip(xi).map(|(k, x)| x + self.grid.inner(k, u)).collect()
    }

    /// ζᵢ(tⱼ) = yᵢ(tⱼ) − ∫ (kᵢ − cᵢ) w(tⱼ)
    pub fn reset_predictor(&self, y: &[f64], w: &[f64]) -> Vec<f64> {
        (0..self.m())
            .map(|i| y[i] - (self.grid.inner(&self.k[i], w) - self.grid.inner(&self.c[i], w)))
            .collect()
    }

    /// ∫ kᵢ w(tⱼ) − yᵢ(tⱼ), held until the next sample.
    pub fn zoh_innovation(&self, y: &[f64], w: &[f64]) -> Vec<f64> {
        (0..self.m()).map(|i| self.grid.inner(&self.k[i], w) - y[i]).collect()
    }

    /// ∫ cᵢ w − ζᵢ
    pub fn predictor_innovation(&self, w: &[f64], zeta: &[f64]) -> Vec<f64> {
        (0..self.m()).map(|i| self.grid.inner(&self.c[i], w) - zeta[i]).collect()
    }

    fn source(&self, x: &[f64], signal: &SampledSignal, t: f64) -> Vec<f64> {
        let mut e = self.f.eval(&self.grid, x);
        signal.add_to(t, 1.0, &mut e);
        e
    }

    fn inject(&self, e: &mut [f64], s: &[f64]) {
        for (l, si) in self.l.iter().zip(s) {
            e.iter_mut().zip(l).for_each(|(o, v)| *o += si * v);
        }
    }

    /// IMEX step of the plant: CN on the SL part, Heun on f(u) + v.
    pub fn step_plant(&self, cn: &CrankNicolson, u: &[f64], t: f64) -> Vec<f64> {
        let dt = cn.dt();
        let e0 = self.source(u, &self.v, t);
        let star = cn.step(&self.op, u, &e0);
        let e1 = self.source(&star, &self.v, t + dt);
        cn.step(&self.op, u, &average(&e0, &e1))
    }

    /// Joint step of (w, ζ). ζ is advanced with the trapezoid rule on the
    /// same stages as w, so ∫cᵢw − ζᵢ is preserved exactly when it vanishes.
    pub fn step_observer_predictor(
        &self,
        cn: &CrankNicolson,
        w: &[f64],
        zeta: &[f64],
        t: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let dt = cn.dt();
        let m = self.m();
        let s0 = self.source(w, &self.v_tilde, t);
        let drive0: Vec<f64> = (0..m).map(|i| self.grid.inner(&self.c[i], &s0)).collect();
        let gw0: Vec<f64> = (0..m).map(|i| self.grid.inner(&self.g[i], w)).collect();
        let mut e0 = s0;
        self.inject(&mut e0, &self.predictor_innovation(w, zeta));

        let w_star = cn.step(&self.op, w, &e0);
        let zeta_star: Vec<f64> = (0..m)
            .map(|i| zeta[i] + 0.5 * dt * (gw0[i] + self.grid.inner(&self.g[i], &w_star)) + dt * drive0[i])
            .collect();
        let s1 = self.source(&w_star, &self.v_tilde, t + dt);
        let drive1: Vec<f64> = (0..m).map(|i| self.grid.inner(&self.c[i], &s1)).collect();
        let mut e1 = s1;
        self.inject(&mut e1, &self.predictor_innovation(&w_star, &zeta_star));

        let w_next = cn.step(&self.op, w, &average(&e0, &e1));
        let zeta_next = (0..m)
            .map(|i| {
                zeta[i]
                    + 0.5 * dt * (gw0[i] + self.grid.inner(&self.g[i], &w_next))
                    + 0.5 * dt * (drive0[i] + drive1[i])
            })
            .collect();
        (w_next, zeta_next)
    }

    /// Step of the zero-order-hold observer with the innovation `held`.
    pub fn step_observer_zoh(&self, cn: &CrankNicolson, w: &[f64], held: &[f64], t: f64) -> Vec<f64> {
        let dt = cn.dt();
        let mut e0 = self.source(w, &self.v_tilde, t);
        self.inject(&mut e0, held);
        let star = cn.step(&self.op, w, &e0);
        let mut e1 = self.source(&star, &self.v_tilde, t + dt);
        self.inject(&mut e1, held);
        cn.step(&self.op, w, &average(&e0, &e1))
    }

    /// Largest dt·(Lipschitz constant of the explicit part) the Heun corrector accepts.
    pub const CONTRACTION_LIMIT: f64 = 1.0;
}

fn average(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// ψ = c(1)u′(1) − c(0)u′(0) − c′(1)u(1) + c′(0)u(0), the boundary term of
/// ∫c u″ − ∫c″u; vanishes when c and u satisfy the same Robin conditions.
pub fn boundary_residual(c: &Profile, grid: &Grid, u: &[f64]) -> Result<f64, ProfileError> {
    let (c0, dc0, c1, dc1) = c.endpoint_data()?;
    let (du0, du1) = grid::endpoint_derivatives(grid, u);
    let n = u.len();
    Ok(c1 * du1 - c0 * du0 - dc1 * u[n - 1] + dc0 * u[0])
}
