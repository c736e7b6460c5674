use serde::{Deserialize, Serialize};

use super::SimError;
use crate::grid::{sup_norm, Grid};
use crate::profile::{self, Profile};
use crate::sturm_liouville::SLProblem;

/// One separable piece `a(x) ∫ b(s) u(s) ds` of a non-local linear operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTerm {
    pub a: Profile,
    pub b: Profile,
}

/// One saturated functional `g(x)·level·tanh(∫ w(s) u(s) ds / level)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaturatedTerm {
    pub shape: Profile,
    pub weight: Profile,
    #[serde(default = "unit")]
    pub level: f64,
}

fn unit() -> f64 {
    1.0
}

/// f(u) = K(u) + g(x, P̄u) restricted to a library with closed-form Lipschitz bounds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearTerm {
    #[default]
    Zero,
    /// K(u)(x) = Σₖ aₖ(x) ∫ bₖ u, i.e. the kernel G(x, s) = Σₖ aₖ(x) bₖ(s).
    LinearNonlocal { terms: Vec<KernelTerm> },
    /// g(x, P̄u) = Σᵣ gᵣ(x)·level·tanh((∫ wᵣ u)/level)
    GainSaturated { terms: Vec<SaturatedTerm> },
}

/// Lipschitz data of a nonlinearity: R of the L² inequality and L̄.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LipschitzData {
    pub r: f64,
    pub sup: f64,
}

impl NonlinearTerm {
    pub fn is_zero(&self) -> bool {
        match self {
            NonlinearTerm::Zero => true,
            NonlinearTerm::LinearNonlocal { terms } => terms.is_empty(),
            NonlinearTerm::GainSaturated { terms } => terms.is_empty(),
        }
    }

    pub fn is_linear(&self) -> bool {
        !matches!(self, NonlinearTerm::GainSaturated { terms } if !terms.is_empty())
    }

    /// R is the Hilbert–Schmidt norm of the kernel for the linear term and
    /// Σ‖gᵣ‖‖wᵣ‖ for the saturated one (tanh is 1-Lipschitz). Both are taken
    /// as the larger of the exact and the grid value so that R also bounds
    /// the discretised map.
    pub fn lipschitz(&self, problem: &SLProblem, grid: &Grid) -> Result<LipschitzData, SimError> {
        match self {
            NonlinearTerm::Zero => Ok(LipschitzData { r: 0.0, sup: 0.0 }),
            NonlinearTerm::LinearNonlocal { terms } => {
                let samples: Vec<(Vec<f64>, Vec<f64>)> =
                    terms.iter().map(|s| Ok((s.a.sample(grid)?, s.b.sample(grid)?))).collect::<Result<_, SimError>>()?;
                let (mut hs, mut hs_grid) = (0.0, 0.0);
                for (s, (sa, sb)) in terms.iter().zip(&samples) {
                    for (t, (ta, tb)) in terms.iter().zip(&samples) {
                        hs += profile::inner(&s.a, &t.a, grid)? * profile::inner(&s.b, &t.b, grid)?;
                        hs_grid += grid.inner(sa, ta) * grid.inner(sb, tb);
                    }
                }
                let mut sup_bound = 0.0;
                let mut graph_bound = 0.0;
                for s in terms {
                    let b_l1 = grid.integrate(&s.b.sample(grid)?.iter().map(|v| v.abs()).collect::<Vec<_>>());
                    sup_bound += sup_norm(&s.a.sample(grid)?) * b_l1;
                    graph_bound += profile::reaction_diffusion_norm(&s.a, problem.p, &problem.q, grid)? * b_l1;
                }
                Ok(LipschitzData { r: hs.max(hs_grid).max(0.0).sqrt(), sup: f64::max(sup_bound, graph_bound) })
            }
            NonlinearTerm::GainSaturated { terms } => {
                let mut r = 0.0;
                let mut sup2 = 0.0;
                for s in terms {
                    if !(s.level > 0.0) {
                        return Err(SimError::InvalidSpec(format!("saturation level must be positive, got {}", s.level)));
                    }
                    let (g, w) = (s.shape.sample(grid)?, s.weight.sample(grid)?);
                    let exact = profile::norm(&s.shape, grid)? * profile::norm(&s.weight, grid)?;
                    r += exact.max(grid.norm(&g) * grid.norm(&w));
                    sup2 += sup_norm(&g).powi(2);
                }
                Ok(LipschitzData { r, sup: sup2.sqrt() })
            }
        }
    }

    pub fn sampled(&self, grid: &Grid) -> Result<SampledNonlinearity, SimError> {
        let pairs = |a: &Profile, b: &Profile| -> Result<(Vec<f64>, Vec<f64>), SimError> {
            Ok((a.sample(grid)?, b.sample(grid)?))
        };
        Ok(match self {
            NonlinearTerm::Zero => SampledNonlinearity::Zero,
            NonlinearTerm::LinearNonlocal { terms } => SampledNonlinearity::Linear(
                terms.iter().map(|s| pairs(&s.a, &s.b)).collect::<Result<_, _>>()?,
            ),
            NonlinearTerm::GainSaturated { terms } => SampledNonlinearity::Saturated(
                terms
                    .iter()
                    .map(|s| Ok((pairs(&s.shape, &s.weight)?, s.level)))
                    .collect::<Result<_, SimError>>()?,
            ),
        })
    }
}

/// Grid form of a [`NonlinearTerm`].
#[derive(Clone, Debug)]
pub enum SampledNonlinearity {
    Zero,
    Linear(Vec<(Vec<f64>, Vec<f64>)>),
    Saturated(Vec<((Vec<f64>, Vec<f64>), f64)>),
}

impl SampledNonlinearity {
    pub fn is_zero(&self) -> bool {
        match self {
            SampledNonlinearity::Zero => true,
            SampledNonlinearity::Linear(t) => t.is_empty(),
            SampledNonlinearity::Saturated(t) => t.is_empty(),
        }
    }

    /// out += f(u)
    pub fn add_to(&self, grid: &Grid, u: &[f64], out: &mut [f64]) {
        match self {
            SampledNonlinearity::Zero => {}
            SampledNonlinearity::Linear(terms) => {
                for (a, b) in terms {
                    let s = grid.inner(b, u);
                    out.iter_mut().zip(a).for_each(|(o, v)| *o += s * v);
                }
            }
            SampledNonlinearity::Saturated(terms) => {
                for ((g, w), level) in terms {
                    let s = level * (grid.inner(w, u) / level).tanh();
                    out.iter_mut().zip(g).for_each(|(o, v)| *o += s * v);
                }
            }
        }
    }

    pub fn eval(&self, grid: &Grid, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.add_to(grid, u, &mut out);
        out
    }
}
