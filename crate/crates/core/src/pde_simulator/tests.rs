use std::f64::consts::PI;

use super::*;
use crate::grid;
use crate::observer_design::{ChannelSpec, DesignSpec, GainSpec, LipschitzBounds, LyapunovSpec};
use crate::sturm_liouville::{analytic_eigensystem, RobinBc};

fn example31(p: f64, nodes: usize) -> (SLProblem, ObserverDesign, Grid) {
    let problem = SLProblem::new(p, Profile::zero(), RobinBc::NEUMANN_NEUMANN).unwrap();
    let grid = Grid::new(nodes);
    let basis = analytic_eigensystem(&problem, 20, &grid).unwrap();
    let spec = DesignSpec {
        modes: 1,
        channels: vec![ChannelSpec { label: "y".into(), k: Profile::polynomial(vec![0.0, 1.0]), c: Profile::constant(0.5) }],
        gain: GainSpec::Matrix { rows: vec![vec![-p * PI * PI]] },
        lyapunov: LyapunovSpec::default(),
        q: 2.0,
        j_max: 20,
    };
    let design = ObserverDesign::synthesize(&problem, &basis, &spec, LipschitzBounds::default()).unwrap();
    (problem, design, grid)
}

fn scenario(p: f64, h: f64, horizon: f64, variant: Variant) -> Scenario {
    let (problem, design, grid) = example31(p, 101);
    Scenario {
        problem,
        design,
        variant,
        grid,
        nonlinearity: NonlinearTerm::Zero,
        u0: Profile::Sum { parts: vec![Profile::constant(1.0), Profile::cosine(1.0, PI)] },
        w0: Profile::zero(),
        v: Signal::zero(),
        v_tilde: Signal::zero(),
        noise: vec![],
        schedule: make_schedule(&ScheduleSpec::Uniform { h }, horizon, 0).unwrap(),
        dt: None,
        snapshot_every: 5,
        seed: 1,
    }
}

#[test]
fn measurement_of_unit_state() {
    let sc = scenario(1.0, 0.1, 1.0, Variant::Predictor);
    let model = sc.model().unwrap();
    let u = vec![1.0; sc.grid.nodes()];
    assert!((model.measure(&u, &[0.0])[0] - 0.5).abs() < 1e-15);
    assert!((model.measure(&u, &[0.25])[0] - 0.75).abs() < 1e-15);
    assert_eq!(model.measure(&vec![0.0; sc.grid.nodes()], &[0.0]), vec![0.0]);
}

#[test]
fn reset_matches_closed_form() {
    let sc = scenario(1.0, 0.1, 1.0, Variant::Predictor);
    let model = sc.model().unwrap();
    let u = sc.grid.sample(|x| 1.0 + (PI * x).cos() + x * x * (1.0 - x).powi(2));
    let y = model.measure(&u, &[0.0]);
    let zeta = model.reset_predictor(&y, &u);
    assert!((zeta[0] - 0.5 * sc.grid.integrate(&u)).abs() < 1e-14);
    let w = sc.grid.sample(|x| (2.0 * PI * x).cos());
    let expect = y[0] - sc.grid.inner(&sc.grid.sample(|x| x - 0.5), &w);
    assert!((model.reset_predictor(&y, &w)[0] - expect).abs() < 1e-15);
}

#[test]
fn heat_mode_decays_at_its_eigenvalue() {
    let mut sc = scenario(1.0, 0.05, 0.2, Variant::Predictor);
    sc.grid = Grid::new(201);
    sc.u0 = Profile::cosine(2f64.sqrt(), PI);
    sc.w0 = sc.u0.clone();
    let traj = simulate(&sc).unwrap();
    let last = traj.snapshots.last().unwrap();
    let exact = sc.grid.sample(|x| (-PI * PI * 0.2).exp() * 2f64.sqrt() * (PI * x).cos());
    let err = sc.grid.norm(&grid::sub(&last.u, &exact)) / sc.grid.norm(&exact);
    assert!(err < 1e-3, "{err}");
}

#[test]
fn mean_mode_is_conserved() {
    let mut sc = scenario(1.0, 0.1, 2.0, Variant::Zoh);
    sc.u0 = Profile::constant(1.0);
    sc.w0 = Profile::constant(1.0);
    let traj = simulate(&sc).unwrap();
    for s in &traj.snapshots {
        assert!(s.u.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }
    sc.u0 = Profile::zero();
    sc.w0 = Profile::zero();
    let traj = simulate(&sc).unwrap();
    assert!(traj.snapshots.iter().all(|s| s.u.iter().all(|v| *v == 0.0)));
}

#[test]
fn zero_error_is_invariant() {
    for variant in [Variant::Predictor, Variant::Zoh] {
        let mut sc = scenario(0.5, 0.3, 3.0, variant);
        sc.w0 = sc.u0.clone();
        sc.v = Signal::separable(TimeFn::Sinusoid { amplitude: 0.5, frequency: 2.0, phase: 0.1 }, Profile::cosine(1.0, 2.0 * PI));
        sc.v_tilde = sc.v.clone();
        sc.nonlinearity = NonlinearTerm::GainSaturated {
            terms: vec![SaturatedTerm { shape: Profile::cosine(0.3, PI), weight: Profile::constant(1.0), level: 0.5 }],
        };
        let traj = simulate(&sc).unwrap();
        for (s, e) in traj.snapshots.iter().zip(traj.error_l2()) {
            assert!(e <= 1e-9 * sc.grid.norm(&s.u).max(1e-300), "{variant}: {e}");
        }
    }
}

#[test]
fn samples_are_step_boundaries() {
    let mut sc = scenario(1.0, 0.1, 2.0, Variant::Predictor);
    sc.schedule = make_schedule(&ScheduleSpec::RandomBounded { h_min: 0.03, h_max: 0.1, seed: Some(4) }, 2.0, 0).unwrap();
    let traj = simulate(&sc).unwrap();
    let times = traj.times();
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    for (j, ev) in traj.events.iter().enumerate() {
        assert_eq!(ev.t, sc.schedule.times()[j]);
        assert!(times.contains(&ev.t));
    }
    assert_eq!(traj.events.len(), sc.schedule.times().len() - 1);
}

#[test]
fn predictor_converges_for_long_sampling() {
    let sc = scenario(1.0, 1.0, 10.0, Variant::Predictor);
    let traj = simulate(&sc).unwrap();
    let e = traj.error_l2();
    assert!(e.last().unwrap() < &(1e-3 * e[0]), "{:?}", e.last());
}

#[test]
fn zoh_diverges_above_threshold() {
    let sc = scenario(1.0, 0.5, 20.0, Variant::Zoh);
    let traj = simulate(&sc).unwrap();
    let e = traj.error_l2();
    assert!(e.last().unwrap() > &(10.0 * e[0]));
}

#[test]
fn boundary_residual_vanishes() {
    let mut sc = scenario(1.0, 0.2, 1.0, Variant::Predictor);
    sc.grid = Grid::new(401);
    let traj = simulate(&sc).unwrap();
    for s in traj.snapshots.iter().skip(1) {
        let r = boundary_residual(&Profile::constant(0.5), &sc.grid, &s.u).unwrap();
        assert!(r.abs() < 1e-3, "{r}");
    }
}

#[test]
fn error_dynamics_are_linear() {
    let base = scenario(1.0, 0.2, 2.0, Variant::Zoh);
    let e1 = simulate(&base).unwrap().error_l2();
    let mut scaled = base.clone();
    scaled.u0 = base.u0.scaled(3.0);
    let e3 = simulate(&scaled).unwrap().error_l2();
    for (a, b) in e1.iter().zip(&e3) {
        assert!((3.0 * a - b).abs() <= 1e-8 * b + 1e-13 * e3[0], "{a} {b}");
    }
}

#[test]
fn csv_has_one_row_per_snapshot() {
    let sc = scenario(1.0, 0.5, 1.0, Variant::Predictor);
    let traj = simulate(&sc).unwrap();
    let csv = traj.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,e_l2,e_sup,zeta_1,sample_flag"));
    assert_eq!(lines.count(), traj.snapshots.len());
}

#[test]
fn stiff_explicit_part_is_rejected() {
    let mut sc = scenario(1.0, 0.5, 1.0, Variant::Predictor);
    sc.dt = Some(0.5);
    assert!(matches!(simulate(&sc), Err(SimError::StepRejected { .. })));
}
