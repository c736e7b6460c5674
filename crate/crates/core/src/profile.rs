//! Functions on [0, 1]: a small closed-form library plus grid samples.
//!
//! Closed-form profiles carry exact first and second derivatives so that the
//! norms entering the small-gain certificates do not pick up finite-difference
//! error. Sampled profiles fall back to fourth-order differences.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{self, Grid};
use crate::quadrature;

#[derive(Debug, Error, PartialEq)]
pub enum ProfileError {
    #[error("sampled profile has {have} values but the grid has {want} nodes and is not an exact subsampling")]
    GridMismatch { have: usize, want: usize },
    #[error("sampled profile needs at least 6 values, got {0}")]
    TooFewSamples(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
    /// Angular frequency in x (e.g. π/2 for cos(πx/2)).
    pub freq: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Constant { value: f64 },
    /// Σ coeffs[k]·x^k
    Polynomial { coeffs: Vec<f64> },
    /// Σ cos·cos(freq·x) + sin·sin(freq·x)
    Trig { terms: Vec<TrigTerm> },
    Sum { parts: Vec<Profile> },
    /// Values on a uniform grid over [0, 1], endpoints included.
    Sampled { values: Vec<f64> },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn zero() -> Self {
        Profile::Constant { value: 0.0 }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Profile::Polynomial { coeffs }
    }

    pub fn cosine(amplitude: f64, freq: f64) -> Self {
        Profile::Trig {
            terms: vec![TrigTerm { cos: amplitude, sin: 0.0, freq }],
        }
    }

    pub fn sine(amplitude: f64, freq: f64) -> Self {
        Profile::Trig {
            terms: vec![TrigTerm { cos: 0.0, sin: amplitude, freq }],
        }
    }

    /// `a · self`, preserving the closed form.
    pub fn scaled(&self, a: f64) -> Profile {
        match self {
            Profile::Constant { value } => Profile::Constant { value: a * value },
            Profile::Polynomial { coeffs } => Profile::Polynomial { coeffs: coeffs.iter().map(|c| a * c).collect() },
            Profile::Trig { terms } => Profile::Trig {
                terms: terms
                    .iter()
                    .map(|t| TrigTerm { cos: a * t.cos, sin: a * t.sin, freq: t.freq })
                    .collect(),
            },
            Profile::Sum { parts } => Profile::Sum { parts: parts.iter().map(|p| p.scaled(a)).collect() },
            Profile::Sampled { values } => Profile::Sampled { values: values.iter().map(|v| a * v).collect() },
        }
    }

    /// Exact derivative of a closed-form profile; `None` for samples.
    pub fn derivative(&self) -> Option<Profile> {
        Some(match self {
            Profile::Constant { .. } => Profile::zero(),
            Profile::Polynomial { coeffs } => Profile::Polynomial {
                coeffs: coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect(),
            },
            Profile::Trig { terms } => Profile::Trig {
                terms: terms
                    .iter()
                    .map(|t| TrigTerm { cos: t.freq * t.sin, sin: -t.freq * t.cos, freq: t.freq })
                    .collect(),
            },
            Profile::Sum { parts } => {
                Profile::Sum { parts: parts.iter().map(Profile::derivative).collect::<Option<_>>()? }
            }
            Profile::Sampled { .. } => return None,
        })
    }

    pub fn is_closed_form(&self) -> bool {
        match self {
            Profile::Sampled { .. } => false,
            Profile::Sum { parts } => parts.iter().all(Profile::is_closed_form),
            _ => true,
        }
    }

    /// Constant value if the profile is (syntactically) constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Profile::Constant { value } => Some(*value),
            Profile::Polynomial { coeffs } => {
                if coeffs.iter().skip(1).all(|c| *c == 0.0) {
                    Some(coeffs.first().copied().unwrap_or(0.0))
                } else {
                    None
                }
            }
            Profile::Trig { terms } => terms
                .iter()
                .all(|t| t.freq == 0.0 || (t.cos == 0.0 && t.sin == 0.0))
                .then(|| terms.iter().filter(|t| t.freq == 0.0).map(|t| t.cos).sum()),
            Profile::Sum { parts } => parts.iter().map(Profile::as_constant).sum(),
            Profile::Sampled { values } => {
                let first = *values.first()?;
                values.iter().all(|v| *v == first).then_some(first)
            }
        }
    }

    /// Value, first and second derivative at `x`.
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        match self {
            Profile::Constant { value } => (*value, 0.0, 0.0),
            Profile::Polynomial { coeffs } => {
                let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for c in coeffs.iter().rev() {
                    v = v * x + c;
                }
                for (k, c) in coeffs.iter().enumerate().skip(1).rev() {
                    d1 = d1 * x + c * k as f64;
                }
                for (k, c) in coeffs.iter().enumerate().skip(2).rev() {
                    d2 = d2 * x + c * (k * (k - 1)) as f64;
                }
                (v, d1, d2)
            }
            Profile::Trig { terms } => terms.iter().fold((0.0, 0.0, 0.0), |acc, t| {
                let (s, c) = (t.freq * x).sin_cos();
                let v = t.cos * c + t.sin * s;
                let d1 = t.freq * (-t.cos * s + t.sin * c);
                let d2 = -t.freq * t.freq * v;
                (acc.0 + v, acc.1 + d1, acc.2 + d2)
            }),
            Profile::Sum { parts } => parts.iter().fold((0.0, 0.0, 0.0), |acc, p| {
                let (v, d1, d2) = p.eval3(x);
                (acc.0 + v, acc.1 + d1, acc.2 + d2)
            }),
            Profile::Sampled { values } => {
                let g = Grid::new(values.len());
                let v = g.interpolate(values, x);
                let d1v = sampled_first_derivative(&g, values);
                let d2v = grid::second_derivative_4th(&g, values);
                (v, g.interpolate(&d1v, x), g.interpolate(&d2v, x))
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Sampled { values } => Grid::new(values.len()).interpolate(values, x),
            _ => self.eval3(x).0,
        }
    }

    /// Samples on `grid`. Sampled profiles must live on the same grid or on
    /// an exact refinement of it.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<f64>, ProfileError> {
        match self {
            Profile::Sampled { values } => {
                if values.len() == grid.nodes() {
                    return Ok(values.clone());
                }
                let own = Grid::new(values.len().max(3));
                match own.refines(grid) {
                    Some(stride) if values.len() >= 3 => {
                        Ok((0..grid.nodes()).map(|i| values[i * stride]).collect())
                    }
                    _ => Err(ProfileError::GridMismatch {
                        have: values.len(),
                        want: grid.nodes(),
                    }),
                }
            }
            Profile::Sum { parts } => {
                let mut out = vec![0.0; grid.nodes()];
                for p in parts {
                    for (o, v) in out.iter_mut().zip(p.sample(grid)?) {
                        *o += v;
                    }
                }
                Ok(out)
            }
            _ => Ok(grid.sample(|x| self.eval(x))),
        }
    }

    /// Second derivative on `grid`: exact for closed forms, fourth-order
    /// differences for sampled data.
    pub fn second_derivative(&self, grid: &Grid) -> Result<Vec<f64>, ProfileError> {
        match self {
            Profile::Sampled { values } => {
                if values.len() < 6 {
                    return Err(ProfileError::TooFewSamples(values.len()));
                }
                let own = Grid::new(values.len());
                let d2 = grid::second_derivative_4th(&own, values);
                Profile::Sampled { values: d2 }.sample(grid)
            }
            Profile::Sum { parts } => {
                let mut out = vec![0.0; grid.nodes()];
                for p in parts {
                    for (o, v) in out.iter_mut().zip(p.second_derivative(grid)?) {
                        *o += v;
                    }
                }
                Ok(out)
            }
            _ => Ok(grid.sample(|x| self.eval3(x).2)),
        }
    }

    /// (u(0), u'(0), u(1), u'(1)).
    pub fn endpoint_data(&self) -> Result<(f64, f64, f64, f64), ProfileError> {
        match self {
            Profile::Sampled { values } => {
                if values.len() < 6 {
                    return Err(ProfileError::TooFewSamples(values.len()));
                }
                let g = Grid::new(values.len());
                let d = sampled_first_derivative(&g, values);
                Ok((values[0], d[0], values[values.len() - 1], d[values.len() - 1]))
            }
            _ => {
                let (v0, d0, _) = self.eval3(0.0);
                let (v1, d1, _) = self.eval3(1.0);
                Ok((v0, d0, v1, d1))
            }
        }
    }

    /// Minimum over `grid` (used for positivity checks).
    pub fn min_on(&self, grid: &Grid) -> Result<f64, ProfileError> {
        Ok(self.sample(grid)?.into_iter().fold(f64::INFINITY, f64::min))
    }
}

/// ∫₀¹ f·g, by Gauss–Legendre when both are closed-form, otherwise by the
/// trapezoid rule on `grid`.
pub fn inner(f: &Profile, g: &Profile, grid: &Grid) -> Result<f64, ProfileError> {
    if f.is_closed_form() && g.is_closed_form() {
        Ok(quadrature::integrate(|x| f.eval(x) * g.eval(x)))
    } else {
        Ok(grid.inner(&f.sample(grid)?, &g.sample(grid)?))
    }
}

pub fn norm(f: &Profile, grid: &Grid) -> Result<f64, ProfileError> {
    Ok(inner(f, f, grid)?.max(0.0).sqrt())
}

/// ‖f − g‖ with the same quadrature choice as [`inner`].
pub fn distance(f: &Profile, g: &Profile, grid: &Grid) -> Result<f64, ProfileError> {
    if f.is_closed_form() && g.is_closed_form() {
        Ok(quadrature::integrate(|x| (f.eval(x) - g.eval(x)).powi(2)).sqrt())
    } else {
        let d = grid::sub(&f.sample(grid)?, &g.sample(grid)?);
        Ok(grid.norm(&d))
    }
}

/// ‖p f″ − q f‖ for a diffusion constant `p` and reaction profile `q`.
pub fn reaction_diffusion_norm(
    f: &Profile,
    p: f64,
    q: &Profile,
    grid: &Grid,
) -> Result<f64, ProfileError> {
    if f.is_closed_form() && q.is_closed_form() {
        Ok(quadrature::integrate(|x| {
            let (v, _, d2) = f.eval3(x);
            (p * d2 - q.eval(x) * v).powi(2)
        })
        .sqrt())
    } else {
        let d2 = f.second_derivative(grid)?;
        let fv = f.sample(grid)?;
        let qv = q.sample(grid)?;
        let g: Vec<f64> = (0..grid.nodes()).map(|i| p * d2[i] - qv[i] * fv[i]).collect();
        Ok(grid.norm(&g))
    }
}

// Fourth-order first derivative, one-sided near the boundary.
fn sampled_first_derivative(g: &Grid, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let h = g.dx();
    let mut out = vec![0.0; n];
    if n < 6 {
        for i in 0..n {
            let (a, b) = if i == 0 { (0, 1) } else if i == n - 1 { (n - 2, n - 1) } else { (i - 1, i + 1) };
            out[i] = (f[b] - f[a]) / ((b - a) as f64 * h);
        }
        return out;
    }
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h);
    }
    let s0 = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let s1 = [-3.0, -10.0, 18.0, -6.0, 1.0];
    out[0] = (0..5).map(|k| s0[k] * f[k]).sum::<f64>() / (12.0 * h);
    out[1] = (0..5).map(|k| s1[k] * f[k]).sum::<f64>() / (12.0 * h);
    out[n - 1] = -(0..5).map(|k| s0[k] * f[n - 1 - k]).sum::<f64>() / (12.0 * h);
    out[n - 2] = -(0..5).map(|k| s1[k] * f[n - 1 - k]).sum::<f64>() / (12.0 * h);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_derivatives() {
        let p = Profile::polynomial(vec![1.0, 2.0, 3.0, 4.0]);
        let (v, d1, d2) = p.eval3(0.5);
        assert!((v - (1.0 + 1.0 + 0.75 + 0.5)).abs() < 1e-15);
        assert!((d1 - (2.0 + 3.0 + 3.0)).abs() < 1e-15);
        assert!((d2 - (6.0 + 12.0)).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_eval3() {
        let f = Profile::Sum {
            parts: vec![Profile::polynomial(vec![1.0, -2.0, 0.5]), Profile::cosine(1.5, PI / 2.0), Profile::sine(0.3, 4.0)],
        };
        let df = f.derivative().unwrap();
        for x in [0.0, 0.13, 0.5, 1.0] {
            let (_, d1, d2) = f.eval3(x);
            let (v, e1, _) = df.eval3(x);
            assert!((v - d1).abs() < 1e-13 && (e1 - d2).abs() < 1e-12);
        }
        assert!(Profile::Sampled { values: vec![0.0; 8] }.derivative().is_none());
    }

    #[test]
    fn trig_derivatives() {
        let c = Profile::cosine(4.0 / PI, PI / 2.0);
        let (v, d1, d2) = c.eval3(1.0);
        assert!(v.abs() < 1e-15);
        assert!((d1 + 2.0).abs() < 1e-14);
        assert!(d2.abs() < 1e-14);
    }

    #[test]
    fn distance_of_x_and_half() {
        let g = Grid::new(101);
        let d = distance(&Profile::polynomial(vec![0.0, 1.0]), &Profile::constant(0.5), &g).unwrap();
        assert!((d - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn sampled_subsampling_and_mismatch() {
        let fine = Grid::new(21);
        let s = Profile::Sampled { values: fine.sample(|x| x * x) };
        let coarse = s.sample(&Grid::new(11)).unwrap();
        assert!((coarse[5] - 0.25).abs() < 1e-15);
        assert!(matches!(s.sample(&Grid::new(8)), Err(ProfileError::GridMismatch { .. })));
    }

    #[test]
    fn sampled_endpoint_derivative_is_accurate() {
        let g = Grid::new(201);
        let s = Profile::Sampled { values: g.sample(|x| (PI * x / 2.0).cos()) };
        let (v0, d0, v1, d1) = s.endpoint_data().unwrap();
        assert!((v0 - 1.0).abs() < 1e-14 && v1.abs() < 1e-12);
        assert!(d0.abs() < 1e-8);
        assert!((d1 + PI / 2.0).abs() < 1e-8);
    }

    #[test]
    fn serde_round_trip() {
        let p = Profile::Sum {
            parts: vec![Profile::constant(1.0), Profile::cosine(1.0, PI)],
        };
        let s = serde_json::to_string(&p).unwrap();
        let back: Profile = serde_json::from_str(&s).unwrap();
        assert_eq!(p, back);
    }
}
