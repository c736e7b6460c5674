use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use super::config::ScenarioConfig;
use super::{CliError, ConfigError};
use crate::analysis::{
    check_ios_bound, default_window, fit_decay_rate, lyapunov_oracle, run_example_31, run_example_32, Example31Params,
    Example32Params, IntegralBound, IosSignals, LyapunovTrace,
};
use crate::observer_design::{max_diameter, report, ObserverDesign, SmallGainReport, Variant};
use crate::pde_simulator::{fmt, make_schedule, simulate as run_simulation, ScheduleSpec};
use crate::sturm_liouville::{check_h1, write_basis_csv};

/// Result of a command: what was printed plus the invariant violations found.
#[derive(Debug, Default)]
pub struct Outcome {
    pub summary: String,
    pub violations: Vec<String>,
}

const CERTIFICATE_TOL: f64 = 1e-10;

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn variants() -> [Variant; 2] {
    [Variant::Predictor, Variant::Zoh]
}

fn diameter(cfg: &ScenarioConfig) -> Result<f64, CliError> {
    Ok(make_schedule(&cfg.schedule, cfg.time.horizon, cfg.seed)?.diameter())
}

fn certificate_violations(design: &ObserverDesign, out: &mut Vec<String>) {
    let check = design.verify();
    if !check.holds(CERTIFICATE_TOL) {
        out.push(format!(
            "certificate: abscissa {:e}, min eig P {:e}, max eig LMI {:e}, A error {:e}",
            check.abscissa, check.p_min_eigenvalue, check.lmi_max_eigenvalue, check.a_formula_error
        ));
    }
}

/// `design`: design JSON, basis CSV and a certificate summary.
pub fn design(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    let basis = cfg.basis()?;
    let design = cfg.design(&basis)?;
    let h = diameter(cfg)?;
    let kappa = cfg.kappa(&design);
    std::fs::create_dir_all(out)?;
    write_basis_csv(&basis, std::io::BufWriter::new(std::fs::File::create(out.join("basis.csv"))?))?;

    let mut outcome = Outcome::default();
    certificate_violations(&design, &mut outcome.violations);
    let c = design.certificate;
    let check = design.verify();
    let s = &mut outcome.summary;
    let _ = writeln!(s, "N = {}, m = {}, Q = {}", design.n, design.m(), c.q);
    let _ = writeln!(s, "spectral abscissa of A = {}", check.abscissa);
    let _ = writeln!(s, "min eig P = {}", check.p_min_eigenvalue);
    let _ = writeln!(s, "max eig (PA + AᵀP + 2σP) = {}", check.lmi_max_eigenvalue);
    let _ = writeln!(s, "σ = {}, |P| = {}, |LᵀPL| = {}, K = {}", design.sigma, design.p_norm, design.ltpl_norm, design.coupling.k);
    let _ = writeln!(s, "H(Q) = {}, μ = {}, g̃ = {}", c.h_q, c.mu, c.g_tilde);
    let mut gains = serde_json::Map::new();
    for variant in variants() {
        let rep = report(&design.small_gain_inputs(), variant, h, kappa);
        let h_star = max_diameter(&design, kappa, variant);
        match &rep {
            Ok(r) => {
                let _ = writeln!(s, "{variant}: Ω = {} at h = {h}, κ = {kappa}; feasible={}", r.omega, r.feasible);
            }
            Err(e) => {
                let _ = writeln!(s, "{variant}: {e}");
            }
        }
        match &h_star {
            Ok(hs) => {
                let _ = writeln!(s, "{variant}: h* = {hs}");
            }
            Err(e) => {
                let _ = writeln!(s, "{variant}: h*: {e}");
            }
        }
        gains.insert(
            variant.to_string(),
            json!({
                "report": rep.as_ref().map(|r| json!(r)).unwrap_or_else(|e| json!({"error": e.to_string()})),
                "h_star": h_star.as_ref().map(|v| json!(if v.is_finite() { json!(v) } else { json!("inf") }))
                    .unwrap_or_else(|e| json!({"error": e.to_string()})),
            }),
        );
    }
    let first_positive = (1..=basis.len()).find(|&n| basis.lambda(n) > 0.0).unwrap_or(1);
    let h1 = check_h1(&cfg.problem, &basis, first_positive, 50.min(basis.len().saturating_sub(first_positive)))
        .map(|r| json!(r))
        .unwrap_or_else(|e| json!({"error": e.to_string()}));
    let doc = json!({
        "version": super::SCHEMA_VERSION,
        "design": design.to_json(),
        "h": h,
        "kappa": kappa,
        "small_gain": gains,
        "h1": h1,
        "basis_csv": "basis.csv",
        "violations": outcome.violations,
    });
    write_json(&out.join("design.json"), &doc)?;
    Ok(outcome)
}

fn integral_summary(b: &IntegralBound) -> Value {
    json!({
        "mu": b.mu,
        "g_tilde": b.g_tilde,
        "violations": b.violations,
        "worst_ratio": b.worst_ratio,
        "worst_time": b.worst_time,
    })
}

fn lyapunov_summary(tr: &LyapunovTrace) -> Value {
    let deficit_share = tr
        .parseval_deficit
        .iter()
        .zip(&tr.error_sq)
        .filter(|(_, e)| **e > 0.0)
        .map(|(d, e)| d / e)
        .fold(0.0, f64::max);
    json!({
        "v0": tr.v0,
        "v0_bound": tr.v0_bound,
        "initial_bound_holds": tr.initial_bound_holds(),
        "energy_violations": tr.energy_violations,
        "max_parseval_deficit_share": deficit_share,
        "printed_constants": integral_summary(&tr.design),
        "self_consistent_constants": integral_summary(&tr.consistent),
    })
}

/// `simulate`: trajectory CSV, IOS margin CSV and a JSON report.
pub fn simulate(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    let built = cfg.build()?;
    let sc = &built.scenario;
    let traj = run_simulation(sc)?;
    std::fs::create_dir_all(out)?;
    traj.write_csv(&out.join("trajectory.csv"))?;
    if cfg.analysis.fields {
        traj.write_fields(&out.join("fields"))?;
    }
    let mut outcome = Outcome::default();
    certificate_violations(&sc.design, &mut outcome.violations);

    let h = sc.schedule.diameter();
    let kappa = cfg.kappa(&sc.design);
    let times = traj.times();
    let norms = traj.error_l2();
    let (e0, e_final) = (norms[0], *norms.last().expect("non-empty"));
    let decay = if e0 > 0.0 {
        match fit_decay_rate(&times, &norms, default_window(&times, &norms, 3.0 * h)) {
            Ok(f) => json!(f),
            Err(e) => json!({"note": e.to_string()}),
        }
    } else {
        json!({"note": "zero initial error"})
    };

    let small_gain: Option<SmallGainReport> = report(&sc.design.small_gain_inputs(), sc.variant, h, kappa).ok();
    let ios = match &small_gain {
        Some(r) if r.feasible => {
            let chk = check_ios_bound(&traj, r, &IosSignals::from_run(sc, &traj)?)?;
            std::fs::write(out.join("ios_margin.csv"), chk.margin_csv())?;
            if !chk.holds() {
                outcome.violations.push(format!("IOS bound: {} violations, worst ratio {}", chk.violations, chk.worst_ratio));
            }
            json!({
                "coefficients": chk.coefficients,
                "violations": chk.violations,
                "worst_ratio": chk.worst_ratio,
                "margin_csv": "ios_margin.csv",
            })
        }
        Some(r) => json!({"note": format!("Ω = {} ≥ 1, no IOS estimate", r.omega)}),
        None => json!({"note": "κ is out of range for this design"}),
    };

    let lyapunov = if cfg.analysis.lyapunov {
        let j = cfg.analysis.j_tail.unwrap_or(built.basis.len());
        match lyapunov_oracle(&traj, sc, &built.basis, j) {
            Ok(tr) => {
                if !tr.sandwich_holds() {
                    outcome.violations.push(format!(
                        "Lyapunov sandwich: {} energy violations, V(0) = {} vs bound {}",
                        tr.energy_violations, tr.v0, tr.v0_bound
                    ));
                }
                if !tr.consistent.holds() {
                    outcome.violations.push(format!(
                        "Lyapunov decay (self-consistent constants): {} violations, worst ratio {}",
                        tr.consistent.violations, tr.consistent.worst_ratio
                    ));
                }
                lyapunov_summary(&tr)
            }
            Err(e) => json!({"note": e.to_string()}),
        }
    } else {
        Value::Null
    };

    let _ = writeln!(
        outcome.summary,
        "{}: ‖e[0]‖ = {e0:e}, ‖e[T]‖ = {e_final:e}, {} snapshots, {} samples",
        sc.variant,
        times.len(),
        traj.events.len()
    );
    if let Some(r) = &small_gain {
        let _ = writeln!(outcome.summary, "Ω = {} feasible={}", r.omega, r.feasible);
    }
    let doc = json!({
        "version": super::SCHEMA_VERSION,
        "trajectory": traj.meta,
        "trajectory_csv": "trajectory.csv",
        "h": h,
        "kappa": kappa,
        "small_gain": small_gain,
        "error_initial": e0,
        "error_final": e_final,
        "decay": decay,
        "ios": ios,
        "lyapunov": lyapunov,
        "violations": outcome.violations,
    });
    write_json(&out.join("report.json"), &doc)?;
    Ok(outcome)
}

/// `check-gain`: Ω for the configured variant, no simulation.
pub fn check_gain(cfg: &ScenarioConfig) -> Result<Outcome, CliError> {
    let basis = cfg.basis()?;
    let design = cfg.design(&basis)?;
    let h = diameter(cfg)?;
    let kappa = cfg.kappa(&design);
    let rep = report(&design.small_gain_inputs(), cfg.analysis.variant, h, kappa)?;
    let mut outcome = Outcome::default();
    certificate_violations(&design, &mut outcome.violations);
    let _ = writeln!(outcome.summary, "Ω = {} feasible={}", rep.omega, rep.feasible);
    let _ = writeln!(outcome.summary, "variant={} h={h} κ={kappa} γ={}", rep.variant, rep.gamma);
    Ok(outcome)
}

/// κ used at a grid point and the named quantities computed there.
type PointRow = (f64, Vec<(&'static str, f64)>);

struct SweepPoint {
    h: f64,
    kappa: Option<f64>,
    omega: Option<f64>,
    q: f64,
    noise_scale: f64,
}

fn or_default(v: &[f64], d: f64) -> Vec<f64> {
    if v.is_empty() {
        vec![d]
    } else {
        v.to_vec()
    }
}

/// `sweep`: long-format CSV `index,h,kappa,q,noise_scale,quantity,value`,
/// ordered by grid index.
pub fn sweep(cfg: &ScenarioConfig, out: &Path) -> Result<Outcome, CliError> {
    let built = cfg.build()?;
    let s = &cfg.sweep;
    let hs = or_default(&s.h, built.scenario.schedule.diameter());
    let ks: Vec<(Option<f64>, Option<f64>)> = if !s.kappa.is_empty() {
        s.kappa.iter().map(|k| (Some(*k), None)).collect()
    } else if !s.omega.is_empty() {
        s.omega.iter().map(|w| (None, Some(*w))).collect()
    } else {
        vec![(cfg.analysis.kappa, Some(cfg.analysis.omega))]
    };
    let qs = or_default(&s.q, built.scenario.design.certificate.q);
    let ns = or_default(&s.noise_scale, 1.0);
    let mut points = Vec::new();
    for &h in &hs {
        for &(kappa, omega) in &ks {
            for &q in &qs {
                for &noise_scale in &ns {
                    points.push(SweepPoint { h, kappa, omega, q, noise_scale });
                }
            }
        }
    }
    let rows: Vec<Result<PointRow, CliError>> =
        points.par_iter().map(|pt| sweep_point(cfg, &built, pt)).collect();

    let mut csv = String::from("index,h,kappa,q,noise_scale,quantity,value\n");
    let mut outcome = Outcome::default();
    for (i, (pt, row)) in points.iter().zip(rows).enumerate() {
        let (kappa, quantities) = row?;
        for (name, value) in quantities {
            let _ = writeln!(
                csv,
                "{i},{},{},{},{},{name},{}",
                fmt(pt.h),
                fmt(kappa),
                fmt(pt.q),
                fmt(pt.noise_scale),
                fmt(value)
            );
            if name == "ios_violations" && value > 0.0 {
                outcome.violations.push(format!("sweep point {i}: {value} IOS violations"));
            }
        }
    }
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("sweep.csv"), &csv)?;
    let _ = writeln!(outcome.summary, "{} grid points written to sweep.csv", points.len());
    Ok(outcome)
}

fn sweep_point(cfg: &ScenarioConfig, built: &super::config::Built, pt: &SweepPoint) -> Result<PointRow, CliError> {
    let design = built.scenario.design.with_q(pt.q)?;
    let kappa = pt.kappa.unwrap_or_else(|| pt.omega.unwrap_or(0.0) * design.certificate.mu);
    let variant = cfg.analysis.variant;
    let mut q = Vec::new();
    let rep = report(&design.small_gain_inputs(), variant, pt.h, kappa).ok();
    q.push(("omega", rep.as_ref().map_or(f64::NAN, |r| r.omega)));
    q.push(("feasible", rep.as_ref().map_or(0.0, |r| f64::from(u8::from(r.feasible)))));
    q.push(("h_star", max_diameter(&design, kappa, variant).unwrap_or(f64::NAN)));
    if !cfg.sweep.simulate {
        return Ok((kappa, q));
    }
    let mut sc = built.scenario.clone();
    sc.design = design;
    if !cfg.sweep.h.is_empty() {
        sc.schedule = make_schedule(&ScheduleSpec::Uniform { h: pt.h }, cfg.time.horizon, cfg.seed)?;
        sc.snapshot_every = crate::analysis::snapshot_cadence(cfg.time.snapshot_every, &sc.schedule, sc.dt_max());
    }
    sc.noise = sc.noise.iter().map(|n| n.scaled(pt.noise_scale)).collect();
    let traj = run_simulation(&sc)?;
    let times = traj.times();
    let norms = traj.error_l2();
    q.push(("error_final", *norms.last().expect("non-empty")));
    let fit = (norms[0] > 0.0)
        .then(|| fit_decay_rate(&times, &norms, default_window(&times, &norms, 3.0 * pt.h)).ok())
        .flatten();
    q.push(("decay_rate", fit.as_ref().map_or(f64::NAN, |f| f.rate)));
    q.push(("decay_ci", fit.as_ref().map_or(f64::NAN, |f| f.ci_half_width)));
    if let Some(r) = rep.filter(|r| r.feasible) {
        let chk = check_ios_bound(&traj, &r, &IosSignals::from_run(&sc, &traj)?)?;
        q.push(("ios_violations", chk.violations as f64));
        q.push(("ios_worst_ratio", chk.worst_ratio));
        q.push(("ios_min_margin", chk.margin.iter().copied().fold(f64::INFINITY, f64::min)));
    }
    Ok((kappa, q))
}

fn load_params<T: serde::de::DeserializeOwned>(
    config: Option<&Path>,
    base: Value,
    sets: &[String],
) -> Result<T, ConfigError> {
    let mut value = match config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Read(p.display().to_string(), e.to_string()))?;
            let mut file: Value = serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
            // Fields missing from the file fall back to the defaults.
            if let (Value::Object(b), Value::Object(f)) = (&base, &mut file) {
                for (k, v) in b {
                    f.entry(k.clone()).or_insert_with(|| v.clone());
                }
            }
            file
        }
        None => base,
    };
    for s in sets {
        super::apply_override(&mut value, s)?;
    }
    serde_path_to_error::deserialize(value)
        .map_err(|e| ConfigError::Field { path: e.path().to_string(), message: e.inner().to_string() })
}

/// `example31`: the heat-equation example end to end.
pub fn example31(config: Option<&Path>, sets: &[String], out: &Path) -> Result<Outcome, CliError> {
    let base = json!(Example31Params::new(1.0, 0.3, 0.0, Variant::Predictor));
    let params: Example31Params = load_params(config, base, sets)?;
    let r = run_example_31(&params)?;
    std::fs::create_dir_all(out)?;
    write_json(&out.join("example31.json"), &r)?;
    r.trajectory.write_csv(&out.join("example31_trajectory.csv"))?;
    let mut outcome = Outcome::default();
    if let Some(chk) = &r.ios {
        std::fs::write(out.join("example31_ios_margin.csv"), chk.margin_csv())?;
        if !chk.holds() {
            outcome.violations.push(format!("IOS bound: {} violations", chk.violations));
        }
    }
    if let (true, Some(fit)) = (r.feasible, &r.decay) {
        if !fit.supports_at_least(r.kappa) {
            outcome.violations.push(format!("fitted rate {} ± {} below κ = {}", fit.rate, fit.ci_half_width, r.kappa));
        }
    }
    let s = &mut outcome.summary;
    let _ = writeln!(s, "Ω = {} feasible={} (closed form {})", r.omega, r.feasible, r.omega_closed_form);
    let _ = writeln!(s, "κ = {}, μ = {}, 4/(pπ²) = {}", r.kappa, r.mu, r.zoh_threshold);
    let _ = writeln!(s, "‖e[0]‖ = {:e}, ‖e[T]‖ = {:e}, verdict = {}", r.error_initial, r.error_final, r.verdict);
    if let Some(f) = &r.decay {
        let _ = writeln!(s, "fitted rate {} ± {}", f.rate, f.ci_half_width);
    }
    Ok(outcome)
}

/// `example32`: the boundary-derivative example end to end.
pub fn example32(config: Option<&Path>, sets: &[String], out: &Path) -> Result<Outcome, CliError> {
    let base = json!(Example32Params::new(1.0, 0.0, 0.1));
    let params: Example32Params = load_params(config, base, sets)?;
    let r = run_example_32(&params)?;
    std::fs::create_dir_all(out)?;
    write_json(&out.join("example32.json"), &r)?;
    let mut csv = String::from("t,sup_error\n");
    for (t, e) in r.trajectory.times().iter().zip(&r.sup_error) {
        let _ = writeln!(csv, "{},{}", fmt(*t), fmt(*e));
    }
    std::fs::write(out.join("example32_sup_error.csv"), csv)?;
    let mut outcome = Outcome::default();
    if r.l2_violations > 0 {
        outcome.violations.push(format!("L² bound: {} violations", r.l2_violations));
    }
    if r.sup_violations > 0 {
        outcome.violations.push(format!("sup bound: {} violations", r.sup_violations));
    }
    let s = &mut outcome.summary;
    let _ = writeln!(s, "h = {} (h* = {}), κ = {}, Ω = {} feasible={}", r.h, r.h_star, r.kappa, r.omega, r.feasible);
    let _ = writeln!(s, "A₁₁ = {}, c₁₁ = {}, ‖k₁ − c₁‖ = {}, Θ = {}", r.a11, r.c11, r.kc_distance, r.theta);
    let _ = writeln!(s, "sup error {:e} → {:e}", r.sup_error_initial, r.sup_error_final);
    Ok(outcome)
}
