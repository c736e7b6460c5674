#![allow(dead_code)]

use std::f64::consts::PI;

use pdeobs::grid::Grid;
use pdeobs::observer_design::{ChannelSpec, DesignSpec, GainSpec, LipschitzBounds, LyapunovSpec, ObserverDesign, Variant};
use pdeobs::pde_simulator::{make_schedule, NonlinearTerm, Scenario, ScheduleSpec, Signal};
use pdeobs::profile::{Profile, TrigTerm};
use pdeobs::sturm_liouville::{analytic_eigensystem, RobinBc, SLProblem, SpectralBasis};

pub fn cosines(terms: &[(f64, f64)]) -> Profile {
    Profile::Trig { terms: terms.iter().map(|&(cos, freq)| TrigTerm { cos, sin: 0.0, freq }).collect() }
}

/// A small family of designs: the two worked examples plus two-mode and
/// Lipschitz variants on the Neumann heat problem.
pub fn designs() -> Vec<(String, SLProblem, SpectralBasis, ObserverDesign)> {
    let mut out = Vec::new();
    for p in [0.5, 1.0, 2.0] {
        let (problem, basis, design) = pdeobs::analysis::example31_design(p, 101).unwrap();
        out.push((format!("heat p={p}"), problem, basis, design));
    }
    for q in [0.0, 3.0] {
        let (problem, basis, design) = pdeobs::analysis::example32_design(1.0, q, 101).unwrap();
        out.push((format!("derivative q={q}"), problem, basis, design));
    }
    let problem = SLProblem::new(1.0, Profile::constant(0.5), RobinBc::NEUMANN_NEUMANN).unwrap();
    let basis = analytic_eigensystem(&problem, 100, &Grid::new(101)).unwrap();
    for (r, targets, c) in [
        (0.0, vec![-6.0, -15.0], cosines(&[(0.6, 0.0), (-0.4, PI), (0.05, 2.0 * PI)])),
        (0.3, vec![-4.0, -20.0], cosines(&[(0.5, 0.0), (-0.3, PI)])),
        (1.0, vec![-8.0, -11.0], cosines(&[(0.4, 0.0), (-0.35, PI), (0.1, 3.0 * PI)])),
    ] {
        let spec = DesignSpec {
            modes: 2,
            channels: vec![ChannelSpec { label: "y".into(), k: Profile::polynomial(vec![0.0, 0.0, 1.0]), c }],
            gain: GainSpec::Placement { targets },
            lyapunov: LyapunovSpec::default(),
            q: 2.0,
            j_max: 100,
        };
        let design =
            ObserverDesign::synthesize(&problem, &basis, &spec, LipschitzBounds { r, sup: r }).unwrap();
        out.push((format!("two-mode R={r}"), problem.clone(), basis.clone(), design));
    }
    out
}

/// Example 3.1 scenario on a coarse grid for short property runs.
pub fn heat_scenario(p: f64, h: f64, horizon: f64, variant: Variant) -> Scenario {
    let (problem, _, design) = pdeobs::analysis::example31_design(p, 101).unwrap();
    Scenario {
        problem,
        design,
        variant,
        grid: Grid::new(101),
        nonlinearity: NonlinearTerm::Zero,
        u0: Profile::Sum { parts: vec![Profile::constant(1.0), Profile::cosine(1.0, PI)] },
        w0: Profile::zero(),
        v: Signal::zero(),
        v_tilde: Signal::zero(),
        noise: vec![],
        schedule: make_schedule(&ScheduleSpec::Uniform { h }, horizon, 0).unwrap(),
        dt: None,
        snapshot_every: 2,
        seed: 0,
    }
}
