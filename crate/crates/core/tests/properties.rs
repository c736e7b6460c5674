mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use pdeobs::analysis::{error_norms, example31_design};
use pdeobs::grid::Grid;
use pdeobs::observer_design::{
    lyapunov_certificate, max_diameter, omega, report, small_gain_predictor, small_gain_zoh, Variant,
};
use pdeobs::pde_simulator::{make_schedule, simulate, ScheduleSpec};
use pdeobs::profile::Profile;
use pdeobs::sturm_liouville::{analytic_eigensystem, numeric_eigensystem, project_samples, RobinBc, SLProblem};

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Predictor), Just(Variant::Zoh)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn omega_is_monotone(idx in 0usize..8, v in variant(), h in 0.001f64..2.0, dh in 0.0f64..1.0,
                         w in 0.0f64..0.95, dw in 0.0f64..0.04) {
        let designs = common::designs();
        let d = &designs[idx].3;
        let mu = d.certificate.mu;
        let inputs = d.small_gain_inputs();
        let base = omega(&inputs, v, h, w * mu).1;
        prop_assert!(omega(&inputs, v, h + dh, w * mu).1 >= base);
        prop_assert!(omega(&inputs, v, h, (w + dw) * mu).1 >= base);
    }

    #[test]
    fn zoh_dominates_predictor(idx in 0usize..8, h in 0.001f64..2.0, w in 0.0f64..0.99) {
        let designs = common::designs();
        let d = &designs[idx].3;
        let k = w * d.certificate.mu;
        prop_assert!(small_gain_zoh(d, h, k).unwrap().omega >= small_gain_predictor(d, h, k).unwrap().omega);
    }

    #[test]
    fn stored_report_reproduces_omega(idx in 0usize..8, v in variant(), h in 0.001f64..2.0, w in 0.0f64..0.99) {
        let designs = common::designs();
        let d = &designs[idx].3;
        let r = report(&d.small_gain_inputs(), v, h, w * d.certificate.mu).unwrap();
        prop_assert!((r.recompute_omega() - r.omega).abs() <= 1e-12 * r.omega.max(1.0));
        prop_assert_eq!(r.feasible, r.omega < 1.0);
    }

    #[test]
    fn scaling_p_keeps_certificate(idx in 0usize..8, alpha in 1.0f64..20.0, h in 0.01f64..1.0) {
        let designs = common::designs();
        let d = &designs[idx].3;
        let s = d.with_scaled_p(alpha).unwrap();
        prop_assert!(s.verify().holds(1e-10 * alpha));
        let before = small_gain_predictor(d, h, 0.0).unwrap().omega;
        prop_assert!(small_gain_predictor(&s, h, 0.0).unwrap().omega >= before * (1.0 - 1e-14));
    }

    #[test]
    fn synthesized_certificates_hold(a11 in -20.0f64..-0.5, a22 in -20.0f64..-0.5, a12 in -5.0f64..5.0,
                                      a21 in -5.0f64..5.0, frac in 0.1f64..0.95) {
        let a = nalgebra::DMatrix::from_row_slice(2, 2, &[a11, a12, a21, a22]);
        prop_assume!(pdeobs::observer_design::spectral_abscissa(&a) < -0.1);
        let (p, sigma) = lyapunov_certificate(&a, frac).unwrap();
        let (abscissa, pmin, lmi) = pdeobs::observer_design::certificate_margins(&a, &p, sigma);
        prop_assert!(abscissa < 0.0);
        prop_assert!(pmin >= 1.0 - 1e-10);
        prop_assert!(lmi <= 1e-10 * p.norm().max(1.0));
    }

    #[test]
    fn zoh_boundary_matches_closed_form(p in 0.05f64..10.0) {
        let (_, _, d) = example31_design(p, 51).unwrap();
        let h = max_diameter(&d, 0.0, Variant::Zoh).unwrap();
        let exact = (6f64.sqrt() - 1.0) / (p * PI * PI);
        prop_assert!((h - exact).abs() <= 1e-10 * exact);
    }

    #[test]
    fn parseval_holds(c in prop::collection::vec(-1.0f64..1.0, 4), j in 1usize..100) {
        let problem = SLProblem::new(1.0, Profile::zero(), RobinBc::NEUMANN_DIRICHLET).unwrap();
        let basis = analytic_eigensystem(&problem, 100, &Grid::new(101)).unwrap();
        let f = basis.grid().sample(|x| c[0] + c[1] * x + c[2] * (5.0 * x).sin() + c[3] * x.powi(3));
        let norm2 = basis.grid().inner(&f, &f);
        let s = |j: usize| project_samples(&f, &basis, j).iter().map(|r| r * r).sum::<f64>();
        prop_assert!(s(j) <= norm2 * (1.0 + 1e-6) + 1e-15);
        prop_assert!(s(j + 1) >= s(j));
    }

    #[test]
    fn numeric_basis_is_orthonormal(q0 in -3.0f64..3.0, q1 in -3.0f64..3.0, a0 in -1.0f64..0.0, a1 in 0.0f64..3.0) {
        let bc = RobinBc { a0, b0: 1.0, a1, b1: 1.0 };
        let problem = SLProblem::new(1.0, Profile::polynomial(vec![q0, q1]), bc).unwrap();
        let basis = numeric_eigensystem(&problem, 10, 401).unwrap();
        prop_assert!(basis.orthonormality_error() <= 1e-6);
        prop_assert!(basis.eigenvalues().windows(2).all(|w| w[1] > w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn zero_error_is_invariant(v in variant(), h in 0.05f64..0.6, a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut sc = common::heat_scenario(1.0, h, 1.5, v);
        sc.u0 = Profile::Sum { parts: vec![Profile::constant(a), Profile::cosine(b, 2.0 * PI)] };
        sc.w0 = sc.u0.clone();
        let traj = simulate(&sc).unwrap();
        for (s, e) in traj.snapshots.iter().zip(error_norms(&traj).l2) {
            prop_assert!(e <= 1e-9 * traj.grid.norm(&s.u).max(1e-300));
        }
    }

    #[test]
    fn error_dynamics_are_linear(v in variant(), h in 0.05f64..0.6, alpha in 0.1f64..10.0, seed in 0u64..1000) {
        let mut base = common::heat_scenario(1.0, h, 1.5, v);
        base.schedule = make_schedule(&ScheduleSpec::RandomBounded { h_min: 0.5 * h, h_max: h, seed: Some(seed) }, 1.5, 0).unwrap();
        let e1 = simulate(&base).unwrap().error_l2();
        let mut sc = base.clone();
        sc.u0 = base.u0.scaled(alpha);
        let ea = simulate(&sc).unwrap().error_l2();
        for (x, y) in e1.iter().zip(&ea) {
            prop_assert!((alpha * x - y).abs() <= 1e-8 * alpha * e1[0]);
        }
    }

    #[test]
    fn random_schedules_respect_the_diameter(h_min in 0.01f64..0.2, extra in 0.0f64..0.3, seed in any::<u64>()) {
        let h_max = h_min + extra;
        let s = make_schedule(&ScheduleSpec::RandomBounded { h_min, h_max, seed: Some(seed) }, 5.0, 0).unwrap();
        let t = s.times();
        prop_assert_eq!(t[0], 0.0);
        prop_assert_eq!(*t.last().unwrap(), 5.0);
        prop_assert!(t.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= h_max * (1.0 + 1e-12)));
        let again = make_schedule(&ScheduleSpec::RandomBounded { h_min, h_max, seed: Some(seed) }, 5.0, 0).unwrap();
        prop_assert_eq!(s, again);
    }
}
