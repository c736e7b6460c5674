//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always reach the output; exits non-zero only when a
//! criterion outside the documented known failures fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use pdeobs::analysis::{
    example31_design, example32_design, example32_printed_kc, lyapunov_oracle, run_example_31, run_example_32,
    Example31Params, Example32Params, Verdict,
};
use pdeobs::grid::Grid;
use pdeobs::observer_design::{max_diameter, small_gain_predictor, small_gain_zoh, Variant};
use pdeobs::pde_simulator::{simulate, Noise, NonlinearTerm, SaturatedTerm, Signal, TimeFn};
use pdeobs::profile::Profile;
use pdeobs::sturm_liouville::{analytic_eigensystem, numeric_eigensystem, project_samples, RobinBc, SLProblem};

struct Outcome {
    pass: bool,
    details: Vec<String>,
    /// Set when the failure is explained and recorded rather than a defect.
    known: Option<&'static str>,
}

impl Outcome {
    fn new() -> Self {
        Self { pass: true, details: Vec::new(), known: None }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.details.push(format!("[{}] {what}", if ok { "ok" } else { "FAIL" }));
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    for p in [0.5, 1.0, 2.0] {
        let (_, _, d) = example31_design(p, 201).unwrap();
        let a = d.a[(0, 0)];
        let l = &d.injection[0];
        let l_dev = l.samples.iter().map(|v| (v + p * PI * PI).abs()).fold(0.0, f64::max);
        let kc = d.terms[0].kc_distance;
        o.check(close(a, -p * PI * PI / 2.0, 1e-12), format!("heat p={p}: A11 = {a}"));
        o.check(l_dev <= 1e-12 * p * PI * PI, format!("heat p={p}: max |l1 + p pi^2| = {l_dev:e}"));
        o.check(d.coupling.k <= 1e-12, format!("heat p={p}: K = {:e}", d.coupling.k));
        o.check(close(kc, 1.0 / (2.0 * 3f64.sqrt()), 1e-12), format!("heat p={p}: |k1 - c1| = {kc}"));
    }
    for (p, q) in [(1.0, 0.0), (0.5, 2.0), (2.0, -5.0)] {
        let (_, _, d) = example32_design(p, q, 201).unwrap();
        let a = d.a[(0, 0)];
        let c11 = d.c_coeffs[0][0];
        o.check(close(a, -9.0 * p * PI * PI / 8.0 - q / 2.0, 1e-12), format!("derivative p={p} q={q}: A11 = {a}"));
        o.check(close(c11, 2.0 * 2f64.sqrt() / PI, 1e-12), format!("derivative p={p} q={q}: c11 = {c11}"));
        o.check(d.coupling.k <= 1e-12, format!("derivative p={p} q={q}: K = {:e}", d.coupling.k));
    }
    let (_, _, d) = example32_design(1.0, 0.0, 201).unwrap();
    let kc = d.terms[0].kc_distance;
    let first_principles = (PI * PI - 8.0).sqrt() / PI;
    o.check(
        close(kc, first_principles, 1e-12),
        format!("derivative: |k1 - c1| = {kc}, direct integral sqrt(pi^2 - 8)/pi = {first_principles}"),
    );
    let printed = example32_printed_kc();
    o.check(close(kc, printed, 1e-12), format!("derivative: |k1 - c1| = {kc} vs printed (sqrt2/pi)sqrt(pi^2-8) = {printed}"));
    o.known = Some("the printed boundary-example |k1 - c1| is sqrt(2) times the integral of (1 - (4/pi)cos(pi x/2))^2");
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let mut worst: f64 = 0.0;
    for p in [0.5, 1.0, 2.0] {
        let (_, _, d) = example31_design(p, 201).unwrap();
        let mu = d.certificate.mu;
        for i in 0..20 {
            let h = 0.01 + 0.05 * i as f64;
            for k in 0..20 {
                let w = 0.045 * k as f64;
                let growth = (w * p * PI * PI * h / 2.0).exp() / (6.0 * (1.0 - w)).sqrt();
                let pred = small_gain_predictor(&d, h, w * mu).unwrap().omega;
                let zoh = small_gain_zoh(&d, h, w * mu).unwrap().omega;
                worst = worst.max((pred - growth).abs() / growth);
                worst = worst.max((zoh - growth * (h * p * PI * PI + 1.0)).abs() / zoh);
            }
        }
        let h_star = max_diameter(&d, 0.0, Variant::Zoh).unwrap();
        let exact = (6f64.sqrt() - 1.0) / (p * PI * PI);
        o.check((h_star - exact).abs() <= 1e-10 * exact, format!("p={p}: h* = {h_star}, (sqrt6 - 1)/(p pi^2) = {exact}"));
        o.check(max_diameter(&d, 0.0, Variant::Predictor).unwrap().is_infinite(), format!("p={p}: predictor h* = inf"));
    }
    o.check(worst <= 1e-12, format!("20x20 (h, omega) lattice, 3 values of p: worst relative deviation {worst:e}"));
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    for (name, bc, q) in [
        ("Neumann-Neumann", RobinBc::NEUMANN_NEUMANN, 0.0),
        ("Neumann-Dirichlet", RobinBc::NEUMANN_DIRICHLET, 0.0),
        ("Neumann-Dirichlet q=5", RobinBc::NEUMANN_DIRICHLET, 5.0),
    ] {
        let problem = SLProblem::new(1.0, Profile::constant(q), bc).unwrap();
        let exact = analytic_eigensystem(&problem, 8, &Grid::new(1001)).unwrap();
        let fine = numeric_eigensystem(&problem, 8, 1001).unwrap();
        let coarse = numeric_eigensystem(&problem, 8, 501).unwrap();
        let mut worst_rel: f64 = 0.0;
        let mut min_ratio = f64::INFINITY;
        for n in 1..=8 {
            let l = exact.lambda(n);
            let ef = (fine.lambda(n) - l).abs();
            let ec = (coarse.lambda(n) - l).abs();
            if l == 0.0 {
                worst_rel = worst_rel.max(ef);
                continue;
            }
            worst_rel = worst_rel.max(ef / l);
            min_ratio = min_ratio.min(ec / ef);
        }
        o.check(worst_rel <= 1e-3, format!("{name}: worst relative error at 1001 nodes {worst_rel:e}"));
        o.check(min_ratio >= 3.5, format!("{name}: min error ratio 501 -> 1001 nodes {min_ratio:.4}"));
    }
    o
}

fn criterion_4_run() -> pdeobs::analysis::Example31Report {
    let prm = Example31Params::new(0.1, 1.0, 0.1, Variant::Predictor);
    run_example_31(&prm).unwrap()
}

fn criterion_4(r: &pdeobs::analysis::Example31Report) -> Outcome {
    let mut o = Outcome::new();
    o.check(r.feasible, format!("Omega = {} (closed form {})", r.omega, r.omega_closed_form));
    match &r.decay {
        Some(f) => o.check(
            f.supports_at_least(r.kappa),
            format!("fitted rate {} +/- {} on {:?} vs kappa = {}", f.rate, f.ci_half_width, f.window, r.kappa),
        ),
        None => o.check(false, format!("no decay fit: {:?}", r.decay_note)),
    }
    o.check(
        r.ios_violations == Some(0),
        format!("IOS estimate: {:?} violations, worst ratio {:?}", r.ios_violations, r.ios_worst_ratio),
    );
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    for p in [0.5, 1.0, 2.0] {
        let threshold = 4.0 / (p * PI * PI);
        for (factor, expect) in [(0.9, Verdict::Convergent), (1.1, Verdict::Divergent)] {
            let r = run_example_31(&Example31Params::new(p, factor * threshold, 0.0, Variant::Zoh)).unwrap();
            o.check(
                r.verdict == expect,
                format!(
                    "p={p}, h={factor}*4/(p pi^2): {} (|e0| = {:.3e}, max |e| over last interval = {:.3e})",
                    r.verdict, r.error_initial, r.error_last_interval
                ),
            );
        }
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let mut ratios = Vec::new();
    for a in [0.005, 0.01, 0.02] {
        let mut prm = Example31Params::new(0.1, 1.0, 0.1, Variant::Predictor);
        prm.noise = Noise::Sinusoid { amplitude: a, frequency: 1.0, phase: 0.0 };
        let r = run_example_31(&prm).unwrap();
        o.check(
            r.ios_violations == Some(0),
            format!("sinusoidal noise {a}: {:?} violations, worst ratio {:?}", r.ios_violations, r.ios_worst_ratio),
        );
        ratios.push(r.steady_error / a);
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), v| (l.min(*v), h.max(*v)));
    o.check(hi <= 1.05 * lo, format!("steady error / amplitude: {ratios:?}"));
    let mut prm = Example31Params::new(0.1, 1.0, 0.1, Variant::Predictor);
    prm.mismatch = 0.01;
    let r = run_example_31(&prm).unwrap();
    o.check(
        r.ios_violations == Some(0),
        format!("input mismatch 0.01: {:?} violations, worst ratio {:?}", r.ios_violations, r.ios_worst_ratio),
    );
    o
}

fn criterion_7(r: &pdeobs::analysis::Example31Report) -> Outcome {
    let mut o = Outcome::new();
    let tr = lyapunov_oracle(&r.trajectory, &r.scenario, &r.basis, r.basis.len()).unwrap();
    o.check(tr.energy_violations == 0, format!("|e|^2 <= V: {} violations", tr.energy_violations));
    o.check(tr.initial_bound_holds(), format!("V(0) = {} <= max(|P|, Q/2)|e0|^2 = {}", tr.v0, tr.v0_bound));
    o.check(
        tr.consistent.holds(),
        format!(
            "integral inequality, constants read off the dissipation inequality (mu = {}, g = {}): {} violations",
            tr.consistent.mu, tr.consistent.g_tilde, tr.consistent.violations
        ),
    );
    o.check(
        tr.design.holds(),
        format!(
            "integral inequality, printed constants (mu = {}, g = {}): {} violations, worst V/RHS = {:.4} at t = {}",
            tr.design.mu, tr.design.g_tilde, tr.design.violations, tr.design.worst_ratio, tr.design.worst_time
        ),
    );
    if tr.consistent.holds() && tr.sandwich_holds() && !tr.design.holds() {
        o.known = Some("with the printed (mu, g) the inequality needs more decay than the dissipation estimate provides");
    }
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let r = run_example_32(&Example32Params::new(1.0, 0.0, 0.1)).unwrap();
    o.check(r.feasible, format!("h = {} = h*/2 with h* = {}, kappa = {}, Omega = {}", r.h, r.h_star, r.kappa, r.omega));
    match &r.sup_decay {
        Some(f) => o.check(
            f.supports_at_least(r.kappa),
            format!("sup-norm error rate {} +/- {} vs kappa = {}", f.rate, f.ci_half_width, r.kappa),
        ),
        None => o.check(false, format!("no decay fit: {:?}", r.sup_decay_note)),
    }
    o.check(r.l2_violations == 0, format!("L2 estimate with Theta = {}: {} violations", r.theta, r.l2_violations));
    o.check(r.sup_violations == 0, format!("sup estimate: {} violations", r.sup_violations));

    let mut prm = Example32Params::new(1.0, 0.0, 0.1);
    prm.w0 = prm.u0.clone();
    prm.noise = Noise::Constant { value: 0.01 };
    let r = run_example_32(&prm).unwrap();
    let worst = r.sup_error.iter().copied().fold(0.0, f64::max);
    o.check(
        worst <= 1.02 * r.theta * 0.01,
        format!("constant noise 0.01, zero initial error: max sup error {worst:e} vs Theta*0.01 = {:e}", r.theta * 0.01),
    );
    o.check(r.sup_violations == 0, format!("constant noise: {} sup-estimate violations", r.sup_violations));
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    let designs = common::designs();
    let mut monotone = true;
    let mut dominance = true;
    let mut certificates = true;
    let mut scaling = true;
    for (_, _, _, d) in &designs {
        let mu = d.certificate.mu;
        certificates &= d.verify().holds(1e-10);
        for variant in [Variant::Predictor, Variant::Zoh] {
            let om = |h: f64, k: f64| pdeobs::observer_design::omega(&d.small_gain_inputs(), variant, h, k).1;
            for i in 0..10 {
                for k in 0..10 {
                    let (h, kappa) = (0.02 + 0.1 * i as f64, 0.09 * k as f64 * mu);
                    let here = om(h, kappa);
                    if i < 9 {
                        monotone &= om(h + 0.1, kappa) >= here;
                    }
                    if k < 9 {
                        monotone &= om(h, kappa + 0.09 * mu) >= here;
                    }
                }
            }
        }
        for i in 0..10 {
            for k in 0..10 {
                let (h, kappa) = (0.02 + 0.1 * i as f64, 0.09 * k as f64 * mu);
                dominance &= small_gain_zoh(d, h, kappa).unwrap().omega >= small_gain_predictor(d, h, kappa).unwrap().omega;
            }
        }
        let base = small_gain_predictor(d, 0.1, 0.0).unwrap().omega;
        for alpha in [1.0, 1.5, 4.0] {
            let scaled = d.with_scaled_p(alpha).unwrap();
            scaling &= scaled.verify().holds(1e-10 * alpha);
            scaling &= small_gain_predictor(&scaled, 0.1, 0.0).unwrap().omega >= base * (1.0 - 1e-14);
        }
    }
    o.check(monotone, format!("Omega nondecreasing in h and kappa on 10x10 lattices, {} designs", designs.len()));
    o.check(dominance, "Omega_zoh >= Omega_pred on every lattice point".into());
    o.check(certificates, "Hurwitz, P >= I, PA + A'P + 2 sigma P <= 0 to 1e-10".into());
    o.check(scaling, "P -> alpha P keeps the certificate and does not decrease Omega".into());

    let mut worst_zero: f64 = 0.0;
    for variant in [Variant::Predictor, Variant::Zoh] {
        let mut sc = common::heat_scenario(0.5, 0.3, 3.0, variant);
        sc.w0 = sc.u0.clone();
        sc.v = Signal::separable(TimeFn::Sinusoid { amplitude: 0.5, frequency: 2.0, phase: 0.1 }, Profile::cosine(1.0, 2.0 * PI));
        sc.v_tilde = sc.v.clone();
        sc.nonlinearity = NonlinearTerm::GainSaturated {
            terms: vec![SaturatedTerm { shape: Profile::cosine(0.3, PI), weight: Profile::constant(1.0), level: 0.5 }],
        };
        let traj = simulate(&sc).unwrap();
        for (s, e) in traj.snapshots.iter().zip(traj.error_l2()) {
            worst_zero = worst_zero.max(e / traj.grid.norm(&s.u));
        }
    }
    o.check(worst_zero <= 1e-9, format!("zero-error invariance: max |e|/|u| = {worst_zero:e}"));

    let mut worst_lin: f64 = 0.0;
    for variant in [Variant::Predictor, Variant::Zoh] {
        let base = common::heat_scenario(1.0, 0.2, 2.0, variant);
        let e1 = simulate(&base).unwrap().error_l2();
        for alpha in [0.25, 3.0] {
            let mut sc = base.clone();
            sc.u0 = base.u0.scaled(alpha);
            let ea = simulate(&sc).unwrap().error_l2();
            for (a, b) in e1.iter().zip(&ea) {
                worst_lin = worst_lin.max((alpha * a - b).abs() / (alpha * e1[0]).max(1e-300));
            }
        }
    }
    o.check(worst_lin <= 1e-8, format!("linearity: max |alpha e1 - e_alpha| / |alpha e1(0)| = {worst_lin:e}"));

    let mut worst_ortho: f64 = 0.0;
    for bc in [RobinBc::NEUMANN_NEUMANN, RobinBc::NEUMANN_DIRICHLET, RobinBc { a0: -0.5, b0: 1.0, a1: 2.0, b1: 1.0 }] {
        let problem = SLProblem::new(1.0, Profile::polynomial(vec![1.0, 2.0]), bc).unwrap();
        worst_ortho = worst_ortho.max(numeric_eigensystem(&problem, 20, 1001).unwrap().orthonormality_error());
    }
    o.check(worst_ortho <= 1e-6, format!("orthonormality at 1001 nodes: {worst_ortho:e}"));

    let problem = SLProblem::new(1.0, Profile::zero(), RobinBc::NEUMANN_NEUMANN).unwrap();
    let basis = analytic_eigensystem(&problem, 200, &Grid::new(201)).unwrap();
    let f = basis.grid().sample(|x| x * x * (1.5 - x) + (3.0 * x).sin());
    let norm2 = basis.grid().inner(&f, &f);
    let mut parseval = true;
    let mut last = f64::INFINITY;
    for j in [1, 2, 5, 10, 50, 200] {
        let r = project_samples(&f, &basis, j);
        let s: f64 = r.iter().map(|v| v * v).sum();
        parseval &= s <= norm2 * (1.0 + 1e-6);
        parseval &= norm2 - s <= last + 1e-15;
        last = norm2 - s;
    }
    o.check(parseval && last <= 1e-6 * norm2, format!("Parseval: sum of r_n^2 <= |f|^2, deficit monotone, final {last:e}"));
    o
}

fn main() {
    let mut unexpected = Vec::new();
    let mut report = |n: usize, title: &str, started: Instant, o: Outcome| {
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n} {status}: {title} ({:.1} s)", started.elapsed().as_secs_f64());
        for d in &o.details {
            println!("    {d}");
        }
        if !o.pass {
            match o.known {
                Some(why) => println!("    known failure: {why}"),
                None => unexpected.push(n),
            }
        }
    };
    let t = Instant::now();
    report(1, "example constants", t, criterion_1());
    let t = Instant::now();
    report(2, "small-gain formulas and ZOH feasibility boundary", t, criterion_2());
    let t = Instant::now();
    report(3, "eigensolver against closed forms, second-order convergence", t, criterion_3());
    let t = Instant::now();
    let run4 = criterion_4_run();
    report(4, "predictor convergence, p=0.1, h=1, omega=0.1", t, criterion_4(&run4));
    let t = Instant::now();
    report(5, "ZOH threshold 4/(p pi^2)", t, criterion_5());
    let t = Instant::now();
    report(6, "IOS estimate under noise and input mismatch", t, criterion_6());
    let t = Instant::now();
    report(7, "Lyapunov functional on the criterion 4 run", t, criterion_7(&run4));
    let t = Instant::now();
    report(8, "boundary-derivative example end to end", t, criterion_8());
    let t = Instant::now();
    report(9, "property suites", t, criterion_9());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
