use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::grid::Grid;
use crate::profile::Profile;

/// Scalar time factor with an exact derivative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeFn {
    Constant { value: f64 },
    /// amplitude·sin(frequency·t + phase), frequency in rad per unit time.
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// amplitude·exp(rate·t)
    Exponential { amplitude: f64, rate: f64 },
}

impl TimeFn {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeFn::Constant { value } => value,
            TimeFn::Sinusoid { amplitude, frequency, phase } => amplitude * (frequency * t + phase).sin(),
            TimeFn::Exponential { amplitude, rate } => amplitude * (rate * t).exp(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TimeFn::Constant { .. } => 0.0,
            TimeFn::Sinusoid { amplitude, frequency, phase } => amplitude * frequency * (frequency * t + phase).cos(),
            TimeFn::Exponential { amplitude, rate } => amplitude * rate * (rate * t).exp(),
        }
    }

    fn derivative_fn(&self) -> TimeFn {
        match *self {
            TimeFn::Constant { .. } => TimeFn::Constant { value: 0.0 },
            TimeFn::Sinusoid { amplitude, frequency, phase } => TimeFn::Sinusoid {
                amplitude: amplitude * frequency,
                frequency,
                phase: phase + std::f64::consts::FRAC_PI_2,
            },
            TimeFn::Exponential { amplitude, rate } => TimeFn::Exponential { amplitude: amplitude * rate, rate },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparableTerm {
    pub time: TimeFn,
    pub space: Profile,
}

/// Distributed input `Σₖ aₖ(t) bₖ(x)`; the empty sum is the zero signal.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Signal {
    #[serde(default)]
    pub terms: Vec<SeparableTerm>,
}

impl Signal {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn separable(time: TimeFn, space: Profile) -> Self {
        Self { terms: vec![SeparableTerm { time, space }] }
    }

    /// v(t, x) ≡ value.
    pub fn constant(value: f64) -> Self {
        Self::separable(TimeFn::Constant { value: 1.0 }, Profile::constant(value))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, t: f64, x: f64) -> f64 {
        self.terms.iter().map(|s| s.time.eval(t) * s.space.eval(x)).sum()
    }

    pub fn sampled(&self, grid: &Grid) -> Result<SampledSignal, SimError> {
        let terms = self
            .terms
            .iter()
            .map(|s| Ok((s.time.clone(), s.space.sample(grid)?)))
            .collect::<Result<_, SimError>>()?;
        Ok(SampledSignal { nodes: grid.nodes(), terms })
    }

    /// The input of the derivative variable ũ = ∂u/∂x + p(x−1)v(t,0):
    /// pq(x−1)v(t,0) + ∂v/∂x + p(x−1)∂v/∂t(t,0).
    pub fn derivative_transform(&self, p: f64, q: f64) -> Result<Signal, SimError> {
        let mut terms = Vec::new();
        for s in &self.terms {
            let b0 = s.space.eval(0.0);
            let db = s.space.derivative().ok_or_else(|| {
                SimError::InvalidSpec("the derivative transform needs closed-form spatial profiles".into())
            })?;
            terms.push(SeparableTerm { time: s.time.clone(), space: db });
            if b0 != 0.0 {
                let ramp = Profile::polynomial(vec![-p * b0, p * b0]);
                terms.push(SeparableTerm { time: s.time.clone(), space: ramp.scaled(q) });
                terms.push(SeparableTerm { time: s.time.derivative_fn(), space: ramp });
            }
        }
        Ok(Signal { terms })
    }
}

/// A signal with its spatial factors sampled on the simulation grid.
#[derive(Clone, Debug)]
pub struct SampledSignal {
    nodes: usize,
    terms: Vec<(TimeFn, Vec<f64>)>,
}

impl SampledSignal {
    pub fn at(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes];
        self.add_to(t, 1.0, &mut out);
        out
    }

    /// out += scale · v(t, ·)
    pub fn add_to(&self, t: f64, scale: f64, out: &mut [f64]) {
        for (a, b) in &self.terms {
            let c = scale * a.eval(t);
            if c != 0.0 {
                out.iter_mut().zip(b).for_each(|(o, v)| *o += c * v);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Measurement error of one output channel.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Noise {
    #[default]
    Zero,
    Constant { value: f64 },
    Sinusoid {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Independent uniform draws in [−amplitude, amplitude], one per sample.
    RandomBounded {
        amplitude: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl Noise {
    /// Declared bound on |ξ|.
    pub fn amplitude(&self) -> f64 {
        match *self {
            Noise::Zero => 0.0,
            Noise::Constant { value } => value.abs(),
            Noise::Sinusoid { amplitude, .. } | Noise::RandomBounded { amplitude, .. } => amplitude.abs(),
        }
    }

    pub fn scaled(&self, a: f64) -> Noise {
        match *self {
            Noise::Zero => Noise::Zero,
            Noise::Constant { value } => Noise::Constant { value: a * value },
            Noise::Sinusoid { amplitude, frequency, phase } => {
                Noise::Sinusoid { amplitude: a * amplitude, frequency, phase }
            }
            Noise::RandomBounded { amplitude, seed } => Noise::RandomBounded { amplitude: a * amplitude, seed },
        }
    }
}

/// Evaluates the noise of every channel at successive sampling instants.
pub struct NoiseSource {
    channels: Vec<(Noise, Option<ChaCha8Rng>)>,
}

impl NoiseSource {
    pub fn new(noise: &[Noise], seed: u64) -> Self {
        let channels = noise
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let rng = match n {
                    Noise::RandomBounded { seed: s, .. } => {
                        let mut rng = ChaCha8Rng::seed_from_u64(s.unwrap_or(seed));
                        rng.set_stream(i as u64);
                        Some(rng)
                    }
                    _ => None,
                };
                (n.clone(), rng)
            })
            .collect();
        Self { channels }
    }

    /// ξ(t) for the next sample; must be called once per sample, in order.
    pub fn next_sample(&mut self, t: f64) -> Vec<f64> {
        self.channels
            .iter_mut()
            .map(|(n, rng)| match *n {
                Noise::Zero => 0.0,
                Noise::Constant { value } => value,
                Noise::Sinusoid { amplitude, frequency, phase } => amplitude * (frequency * t + phase).sin(),
                Noise::RandomBounded { amplitude, .. } => {
                    let rng = rng.as_mut().expect("random channel has a generator");
                    amplitude * rng.random_range(-1.0..=1.0)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn time_derivatives() {
        let fs = [
            TimeFn::Constant { value: 2.0 },
            TimeFn::Sinusoid { amplitude: 1.5, frequency: 3.0, phase: 0.2 },
            TimeFn::Exponential { amplitude: 0.5, rate: -0.7 },
        ];
        for f in fs {
            for t in [0.0, 0.4, 2.0] {
                let fd = (f.eval(t + 1e-6) - f.eval(t - 1e-6)) / 2e-6;
                assert!((fd - f.derivative(t)).abs() < 1e-8);
                assert!((f.derivative_fn().eval(t) - f.derivative(t)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn derivative_transform_of_separable_input() {
        let (p, q) = (0.7, 1.3);
        let a = TimeFn::Sinusoid { amplitude: 1.0, frequency: 2.0, phase: 0.3 };
        let b = Profile::Sum { parts: vec![Profile::constant(0.4), Profile::cosine(1.0, PI)] };
        let v = Signal::separable(a.clone(), b.clone());
        let vt = v.derivative_transform(p, q).unwrap();
        for (t, x) in [(0.1, 0.2), (1.0, 0.9), (2.5, 0.0)] {
            let b0 = b.eval(0.0);
            let expect = p * q * (x - 1.0) * a.eval(t) * b0 + a.eval(t) * b.eval3(x).1 + p * (x - 1.0) * a.derivative(t) * b0;
            assert!((vt.eval(t, x) - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn sampled_signal_matches_pointwise() {
        let g = Grid::new(11);
        let v = Signal::separable(TimeFn::Exponential { amplitude: 2.0, rate: -1.0 }, Profile::polynomial(vec![0.0, 1.0]));
        let s = v.sampled(&g).unwrap();
        let at = s.at(0.5);
        for (i, val) in at.iter().enumerate() {
            assert!((val - v.eval(0.5, g.x(i))).abs() < 1e-15);
        }
        assert!(Signal::zero().sampled(&g).unwrap().is_zero());
    }

    #[test]
    fn random_noise_is_bounded_and_reproducible() {
        let spec = [Noise::RandomBounded { amplitude: 0.1, seed: Some(7) }, Noise::Constant { value: -0.2 }];
        let mut a = NoiseSource::new(&spec, 1);
        let mut b = NoiseSource::new(&spec, 99);
        for j in 0..100 {
            let (x, y) = (a.next_sample(j as f64), b.next_sample(j as f64));
            assert_eq!(x, y);
            assert!(x[0].abs() <= 0.1);
            assert_eq!(x[1], -0.2);
        }
    }
}
