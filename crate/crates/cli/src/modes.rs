//! Implementations of the four CLI modes.
//!
//! * `spectrum` — eigenvalue scan of `R(t)` over the window (diagnostic:
//!   runs anywhere, including across exceptional points);
//! * `metric` — metric reconstruction scan plus a polynomial-vs-pointwise
//!   agreement audit;
//! * `evolve` — conjugate-pair integration with invariant monitoring and
//!   the textbook cross-check;
//! * `verify` — the full invariant battery with seeded randomised inputs.
//!
//! `evolve` and `verify` refuse windows that approach an exceptional
//! point (`max |τ| > 0.95` anywhere in the window) unless `--force-ep` is
//! given; the structural refusals of the library still apply beyond that.

use ndarray::Array1;
use nip_core::linalg::{to_complex, vec_norm};
use nip_core::{
    evolve_heisenberg, evolve_pair, expectation, heisenberg_exact, solve_metric_pointwise,
    textbook_crosscheck, HamiltonianSpec, StatePair, System, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::PathBuf;

use crate::config::{CompanionKind, Config, ScheduleConfig};
use crate::output::{linspace, write_json, Cell, Csv};
use crate::CliError;

/// Windows whose coupling exceeds this anywhere require `--force-ep`
/// for the evolution modes.
pub const FORCE_EP_TAU: f64 = 0.95;

/// Relative pseudo-norm drift accepted by the evolve mode.
pub const NORM_DRIFT_TOL: f64 = 1e-6;

/// Relative cross-picture state deviation accepted by evolve/verify.
pub const CROSSCHECK_TOL: f64 = 1e-6;

/// Everything a mode needs to run.
pub struct RunContext {
    pub config: Config,
    pub system: System,
    pub out_dir: PathBuf,
    pub force_ep: bool,
}

impl RunContext {
    fn window(&self) -> (f64, f64, f64) {
        let w = self.config.window;
        (w.t0, w.t1, w.step)
    }

    fn summary_base(&self, mode: &str) -> serde_json::Value {
        json!({
            "tool": "nip",
            "version": env!("CARGO_PKG_VERSION"),
            "mode": mode,
            "seed": self.config.seed,
            "force_ep": self.force_ep,
            "config": serde_json::to_value(&self.config).unwrap_or(serde_json::Value::Null),
        })
    }

    /// Largest |τ| the window touches (dense sample).
    fn max_abs_tau(&self) -> f64 {
        let (t0, t1, _) = self.window();
        let sched = self.system.model().schedule();
        linspace(t0, t1, 512)
            .into_iter()
            .map(|t| sched.tau(t).abs())
            .fold(0.0, f64::max)
    }

    /// Near-EP policy for the evolution modes.
    fn guard_window(&self) -> Result<(), CliError> {
        let peak = self.max_abs_tau();
        if peak > FORCE_EP_TAU {
            if self.force_ep {
                eprintln!(
                    "warning: window reaches |tau| = {peak:.6} (beyond the safe band \
                     |tau| <= {FORCE_EP_TAU}); proceeding under --force-ep"
                );
            } else {
                return Err(CliError::Usage(format!(
                    "window reaches |tau| = {peak:.6}, too close to an exceptional point \
                     (safe band is |tau| <= {FORCE_EP_TAU}); pass --force-ep to proceed anyway"
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

pub fn run_spectrum(ctx: &RunContext) -> Result<bool, CliError> {
    let (t0, t1, _) = ctx.window();
    let n = ctx.system.n();
    let grid = linspace(t0, t1, ctx.config.output.grid_points);

    let mut header = vec!["t".to_string(), "tau".to_string(), "sigma".to_string()];
    for k in 1..=n {
        header.push(format!("eig{k}_re"));
        header.push(format!("eig{k}_im"));
    }
    header.extend(
        ["is_real", "min_gap", "eigvec_condition"]
            .iter()
            .map(|s| s.to_string()),
    );
    let mut csv = Csv::create(ctx.out_dir.join("spectrum.csv"), &header)?;

    let sched = ctx.system.model().schedule();
    let mut real_count = 0usize;
    for &t in &grid {
        let report = ctx.system.model().spectrum(t)?;
        let mut cells: Vec<Cell> = vec![t.into(), sched.tau(t).into(), sched.sigma(t).into()];
        for z in &report.eigenvalues {
            cells.push(z.re.into());
            cells.push(z.im.into());
        }
        cells.push(report.is_real.into());
        cells.push(report.min_gap.into());
        cells.push(report.eigvec_condition.into());
        csv.row(&cells)?;
        real_count += report.is_real as usize;
    }
    csv.finish()?;

    // Near-EP gap-scaling fit, when the window reaches into the asymptotic
    // region of the EP at t = 0 (standard schedule only).  Log-spaced
    // samples keep the fit inside the regime where the power law holds.
    let ep_fit = if matches!(ctx.config.schedule, ScheduleConfig::Standard) && t0 < 0.1 {
        let lo = t0.max(1e-3);
        let hi = t1.min(0.1);
        let samples: Vec<f64> = (0..9)
            .map(|i| lo * (hi / lo).powf(i as f64 / 8.0))
            .collect();
        ctx.system.model().ep_scaling_fit(&samples).ok().map(|fit| {
            json!({
                "exponent": fit.exponent,
                "intercept": fit.intercept,
                "samples": fit.samples.len(),
            })
        })
    } else {
        None
    };

    let mut summary = ctx.summary_base("spectrum");
    summary["results"] = json!({
        "grid_points": grid.len(),
        "window": { "t0": t0, "t1": t1 },
        "real_count": real_count,
        "all_real": real_count == grid.len(),
        "ep_fit": ep_fit,
        "files": { "csv": "spectrum.csv" },
    });
    write_json(&ctx.out_dir.join("summary.json"), &summary)?;
    Ok(true)
}

// ---------------------------------------------------------------------------
// metric
// ---------------------------------------------------------------------------

/// Agreement tolerance between the two metric reconstructions.
pub const PATHS_AGREEMENT_TOL: f64 = 1e-9;

pub fn run_metric(ctx: &RunContext) -> Result<bool, CliError> {
    let (t0, t1, _) = ctx.window();
    let n = ctx.system.n();
    let grid = linspace(t0, t1, ctx.config.output.grid_points);
    let pm = ctx.system.polynomial_metric();
    let sched = ctx.system.model().schedule();

    let mut header = vec![
        "t".to_string(),
        "tau".to_string(),
        "theta_min".to_string(),
        "theta_max".to_string(),
        "positive".to_string(),
        "dieudonne_residual".to_string(),
    ];
    for i in 1..=n {
        for j in 1..=n {
            header.push(format!("theta_{i}_{j}"));
        }
    }
    let mut csv = Csv::create(ctx.out_dir.join("metric.csv"), &header)?;

    let mut positive_ts: Vec<f64> = Vec::new();
    let mut max_resid = 0.0_f64;
    for &t in &grid {
        let tau = sched.tau(t);
        let metric = pm.metric_at(tau)?;
        let resid = ctx.system.dieudonne_residual(t)?;
        max_resid = max_resid.max(resid);
        if metric.positive {
            positive_ts.push(t);
        }
        let mut cells: Vec<Cell> = vec![
            t.into(),
            tau.into(),
            metric.eigenvalues[0].into(),
            metric.eigenvalues[n - 1].into(),
            metric.positive.into(),
            resid.into(),
        ];
        for x in metric.matrix.iter() {
            cells.push((*x).into());
        }
        csv.row(&cells)?;
    }
    csv.finish()?;

    // Polynomial-vs-pointwise audit on couplings drawn from the window
    // (clamped into the solvable band).  The shift is irrelevant to the
    // metric, so the pointwise solve uses σ = 0.
    let taus_in_window: Vec<f64> = grid.iter().map(|&t| sched.tau(t)).collect();
    let lo = taus_in_window.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = taus_in_window
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let lo = lo.max(-0.995);
    let hi = hi.min(0.995);
    let mut audit = Vec::new();
    let mut max_dev = 0.0_f64;
    if hi - lo > 1e-9 {
        for tau in linspace(lo, hi, ctx.config.output.pointwise_samples) {
            let r = ctx.system.model().radius_from_params(tau, 0.0);
            let pointwise = solve_metric_pointwise(&r, tau)?;
            let reference = pm.theta(tau);
            let scale = reference.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
            let dev = pointwise
                .matrix
                .iter()
                .zip(reference.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / scale.max(1e-300);
            max_dev = max_dev.max(dev);
            audit.push(json!({ "tau": tau, "deviation": dev }));
        }
    }
    let paths_ok = max_dev <= PATHS_AGREEMENT_TOL;

    let mut summary = ctx.summary_base("metric");
    summary["results"] = json!({
        "grid_points": grid.len(),
        "window": { "t0": t0, "t1": t1 },
        "positive_fraction": positive_ts.len() as f64 / grid.len() as f64,
        "first_positive_t": positive_ts.first(),
        "last_positive_t": positive_ts.last(),
        "max_dieudonne_residual": max_resid,
        "paths_audit": {
            "samples": audit,
            "max_deviation": max_dev,
            "tolerance": PATHS_AGREEMENT_TOL,
            "pass": paths_ok,
        },
        "files": { "csv": "metric.csv" },
    });
    write_json(&ctx.out_dir.join("summary.json"), &summary)?;
    Ok(paths_ok)
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

pub fn run_evolve(ctx: &RunContext) -> Result<bool, CliError> {
    ctx.guard_window()?;
    let (t0, t1, step) = ctx.window();
    let n = ctx.system.n();

    let initial = ctx.config.initial.to_pair(&ctx.system, t0)?;
    let traj = evolve_pair(&ctx.system, &initial, t0, t1, step)?;
    let norms = traj.pseudo_norms();
    let norm0 = norms[0];
    let norm_scale = norm0.norm().max(1e-15);

    let mut header = vec![
        "t".to_string(),
        "norm_re".to_string(),
        "norm_im".to_string(),
        "norm_drift".to_string(),
    ];
    for k in 1..=n {
        header.push(format!("ket{k}_re"));
        header.push(format!("ket{k}_im"));
    }
    for k in 1..=n {
        header.push(format!("left{k}_re"));
        header.push(format!("left{k}_im"));
    }
    header.push("exp_radius_re".to_string());
    header.push("exp_radius_im".to_string());
    let mut csv = Csv::create(ctx.out_dir.join("evolve.csv"), &header)?;

    let stride = ctx.config.output.stride;
    let last = traj.len() - 1;
    for i in (0..traj.len()).filter(|&i| i % stride == 0 || i == last) {
        let t = traj.times[i];
        let drift = (norms[i] - norm0).norm();
        let mut cells: Vec<Cell> = vec![
            t.into(),
            norms[i].re.into(),
            norms[i].im.into(),
            drift.into(),
        ];
        for z in traj.kets[i].iter() {
            cells.push(z.re.into());
            cells.push(z.im.into());
        }
        for z in traj.lefts[i].iter() {
            cells.push(z.re.into());
            cells.push(z.im.into());
        }
        let pair = traj.pair(i)?;
        let radius = ctx.system.model().radius(t)?;
        let (er, ei) = match expectation(&to_complex(&radius), &pair) {
            Ok(e) => (e.value.re, e.value.im),
            Err(_) => (f64::NAN, f64::NAN),
        };
        cells.push(er.into());
        cells.push(ei.into());
        csv.row(&cells)?;
    }
    csv.finish()?;

    let max_drift_rel = traj.pseudo_norm_drift() / norm_scale;
    let drift_ok = max_drift_rel <= NORM_DRIFT_TOL;

    // Companion consistency (only meaningful for the metric pairing).
    let companion_deviation = if ctx.config.initial.companion == CompanionKind::Metric {
        let end = traj.final_pair()?;
        let theta1 = ctx.system.frame(t1)?.theta;
        let want = to_complex(&theta1).dot(&end.ket);
        let dev = end
            .left
            .iter()
            .zip(want.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        Some(dev / vec_norm(&want).max(1e-300))
    } else {
        None
    };

    // Cross-picture consistency along the same window.
    let report = textbook_crosscheck(&ctx.system, &initial.ket, t0, t1, step)?;
    let crosscheck_ok = report.max_state_deviation <= CROSSCHECK_TOL;

    let pass = drift_ok && crosscheck_ok;
    let mut summary = ctx.summary_base("evolve");
    summary["results"] = json!({
        "window": { "t0": t0, "t1": t1, "step": step },
        "steps": traj.len() - 1,
        "initial_norm": { "re": norm0.re, "im": norm0.im },
        "pseudo_norm": {
            "max_relative_drift": max_drift_rel,
            "tolerance": NORM_DRIFT_TOL,
            "pass": drift_ok,
        },
        "companion_relative_deviation": companion_deviation,
        "crosscheck": {
            "max_state_deviation": report.max_state_deviation,
            "max_hermiticity_deviation": report.max_hermiticity_deviation,
            "textbook_norm_drift": report.textbook_norm_drift,
            "tolerance": CROSSCHECK_TOL,
            "pass": crosscheck_ok,
        },
        "files": { "csv": "evolve.csv" },
    });
    write_json(&ctx.out_dir.join("summary.json"), &summary)?;
    Ok(pass)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckList {
    checks: Vec<serde_json::Value>,
    all_pass: bool,
}

impl CheckList {
    fn new() -> Self {
        Self {
            checks: Vec::new(),
            all_pass: true,
        }
    }

    fn push(&mut self, name: &str, measured: f64, tolerance: f64, pass: bool) {
        self.all_pass &= pass;
        self.checks.push(json!({
            "name": name,
            "measured": measured,
            "tolerance": tolerance,
            "pass": pass,
        }));
    }

    fn upper(&mut self, name: &str, measured: f64, tolerance: f64) {
        self.push(name, measured, tolerance, measured <= tolerance);
    }
}

fn random_ket(rng: &mut ChaCha8Rng, n: usize) -> Array1<C64> {
    Array1::from_iter((0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
}

pub fn run_verify(ctx: &RunContext) -> Result<bool, CliError> {
    ctx.guard_window()?;
    let (t0, t1, step) = ctx.window();
    let n = ctx.system.n();
    let sched = ctx.system.model().schedule();
    let pm = ctx.system.polynomial_metric();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    let mut checks = CheckList::new();

    // Residual scan (also written as CSV).
    let grid = linspace(t0, t1, ctx.config.output.grid_points.min(61));
    let mut csv = Csv::create(
        ctx.out_dir.join("verify.csv"),
        &[
            "t".to_string(),
            "tau".to_string(),
            "dieudonne_residual".to_string(),
            "theta_min".to_string(),
            "positive".to_string(),
        ],
    )?;
    let mut max_resid = 0.0_f64;
    let mut all_real = true;
    let mut max_branch_dev = 0.0_f64;
    for &t in &grid {
        let tau = sched.tau(t);
        let resid = ctx.system.dieudonne_residual(t)?;
        max_resid = max_resid.max(resid);
        let metric = pm.metric_at(tau)?;
        csv.row(&[
            t.into(),
            tau.into(),
            resid.into(),
            metric.eigenvalues[0].into(),
            metric.positive.into(),
        ])?;
        if tau.abs() <= FORCE_EP_TAU {
            all_real &= ctx.system.model().spectrum(t)?.is_real;
            let mut branch = nip_core::eigenvalues_closed_form(n, tau)?;
            branch.sort_by(f64::total_cmp);
            let scale = branch.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
            let dev = metric
                .eigenvalues
                .iter()
                .zip(branch.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                / scale.max(1e-300);
            max_branch_dev = max_branch_dev.max(dev);
        }
    }
    csv.finish()?;

    checks.push("spectrum-reality", all_real as i64 as f64, 1.0, all_real);
    checks.upper("dieudonne-residual", max_resid, 1e-10);
    checks.upper("metric-eigenvalue-branch", max_branch_dev, 1e-9);

    // Polynomial vs pointwise at seeded couplings.
    let mut max_paths_dev = 0.0_f64;
    for _ in 0..4 {
        let tau = rng.gen_range(-FORCE_EP_TAU..FORCE_EP_TAU);
        let r = ctx.system.model().radius_from_params(tau, 0.0);
        let pointwise = solve_metric_pointwise(&r, tau)?;
        let reference = pm.theta(tau);
        let scale = reference.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        let dev = pointwise
            .matrix
            .iter()
            .zip(reference.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
            / scale.max(1e-300);
        max_paths_dev = max_paths_dev.max(dev);
    }
    checks.upper("metric-paths-agreement", max_paths_dev, PATHS_AGREEMENT_TOL);

    // Pseudo-norm conservation on random pairs.
    let mut max_drift = 0.0_f64;
    for _ in 0..3 {
        let pair = StatePair::new(random_ket(&mut rng, n), random_ket(&mut rng, n))?;
        let traj = evolve_pair(&ctx.system, &pair, t0, t1, step)?;
        let scale = pair.physical_norm().norm().max(1e-3);
        max_drift = max_drift.max(traj.pseudo_norm_drift() / scale);
    }
    checks.upper("pseudo-norm-conservation", max_drift, 1e-8);

    // Metric-companion propagation.
    let theta0 = ctx.system.frame(t0)?.theta;
    let ket0 = {
        let raw = random_ket(&mut rng, n);
        let norm = vec_norm(&raw);
        raw.mapv(|z| z / norm)
    };
    let pair = StatePair::with_metric_companion(ket0.clone(), &theta0)?;
    let traj = evolve_pair(&ctx.system, &pair, t0, t1, step)?;
    let end = traj.final_pair()?;
    let want = to_complex(&ctx.system.frame(t1)?.theta).dot(&end.ket);
    let companion_dev = end
        .left
        .iter()
        .zip(want.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
        / vec_norm(&want).max(1e-300);
    checks.upper("companion-propagation", companion_dev, 1e-7);

    // Cross-picture agreement (and Hermiticity of the textbook image for
    // metric-compatible Hamiltonians).
    let report = textbook_crosscheck(&ctx.system, &ket0, t0, t1, step)?;
    checks.upper(
        "textbook-crosscheck",
        report.max_state_deviation,
        CROSSCHECK_TOL,
    );
    if !matches!(ctx.system.hamiltonian_spec(), HamiltonianSpec::Direct(_)) {
        checks.upper(
            "textbook-hermiticity",
            report.max_hermiticity_deviation,
            1e-10,
        );
    }

    // Heisenberg flow against the closed-form transport.
    let a0 = to_complex(&ctx.system.model().radius(t0)?);
    let optraj = evolve_heisenberg(&ctx.system, &a0, t0, t1, step)?;
    let exact = heisenberg_exact(&ctx.system, &a0, t0, t1)?;
    let got = optraj.final_operator()?;
    let scale = exact.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let heis_dev = got
        .iter()
        .zip(exact.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / scale.max(1e-300);
    checks.upper("heisenberg-transport", heis_dev, 1e-6);

    // Fourth-order convergence of the integrator on a subwindow.
    let sub1 = (t1 - t0).min(0.4);
    let coarse = 4e-3;
    let reference = evolve_pair(&ctx.system, &pair, t0, t0 + sub1, 2.5e-4)?;
    let refk = reference.final_pair()?.ket;
    let err = |h: f64| -> Result<f64, CliError> {
        let traj = evolve_pair(&ctx.system, &pair, t0, t0 + sub1, h)?;
        Ok(traj
            .final_pair()?
            .ket
            .iter()
            .zip(refk.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    };
    let ratio = err(coarse)? / err(coarse / 2.0)?.max(1e-300);
    checks.push("rk4-order", ratio, 16.0, (13.0..19.0).contains(&ratio));

    let mut summary = ctx.summary_base("verify");
    summary["results"] = json!({
        "window": { "t0": t0, "t1": t1, "step": step },
        "checks": checks.checks,
        "pass": checks.all_pass,
        "files": { "csv": "verify.csv" },
    });
    write_json(&ctx.out_dir.join("summary.json"), &summary)?;
    Ok(checks.all_pass)
}
