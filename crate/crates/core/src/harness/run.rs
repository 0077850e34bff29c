use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fdesolve::{lipschitz_extension, solve_abm, solve_scalar_comparison, IVProblem};
use crate::fracops::SampledTrajectory;
use crate::lyapcheck::sampling::ball_points;
use crate::lyapcheck::{
    audit_comparison, audit_inequality, audit_tolerance, classify_stability, comparison_tolerance,
    delta_for_epsilon, linear_quadratic_certificate, remark4_fixture, verify_decay, verify_envelope,
    ComparisonAudit, DerivativeSource, Sampling, StabilityReport, Verdict, DECAY_TOLERANCE,
};

use super::config::{join, ScenarioConfig};
use super::csv::emit_csv;

/// Outcome of one initial point.
#[derive(Debug, Clone)]
pub struct TrajectorySummary {
    pub x0: Vec<f64>,
    pub csv_path: Option<PathBuf>,
    pub final_state: Vec<f64>,
    pub max_norm: f64,
    /// Largest margin over nodes `k >= 1`.
    pub max_margin: f64,
    pub node0_margin: f64,
    pub audit_tolerance: f64,
    pub audit_passed: bool,
    pub comparison: Option<ComparisonAudit>,
    pub clamp_events: usize,
    /// Set when the solver or an audit failed on this point.
    pub error: Option<String>,
}

impl TrajectorySummary {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.audit_passed && self.comparison.as_ref().is_none_or(|c| c.passed)
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub csv_paths: Vec<PathBuf>,
    pub report_path: PathBuf,
    pub verdict: Verdict,
    pub report: StabilityReport,
    pub trajectories: Vec<TrajectorySummary>,
    /// Verdict is not inconclusive and every trajectory passed its audits.
    pub all_passed: bool,
    pub wall_time: Duration,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Comparison equation `D^α y = A y^p` with `A = −C3/C2^{c/b}`, `p = c/b`,
/// or the reason it does not apply.
fn comparison_equation(cfg: &ScenarioConfig) -> std::result::Result<(f64, f64), String> {
    let k = &cfg.constants;
    if k.c3 <= 0.0 {
        return Err("C3 = 0".into());
    }
    let p = k.c / k.b;
    if p < 1.0 {
        return Err(format!("c/b = {p} < 1"));
    }
    Ok((-k.c3 / k.c2.powf(p), p))
}

fn run_point(cfg: &ScenarioConfig, index: usize, x0: &[f64]) -> Result<TrajectorySummary> {
    let dt = cfg.horizon / cfg.steps as f64;
    let tolerance = audit_tolerance(cfg.alpha, dt);
    let mut summary = TrajectorySummary {
        x0: x0.to_vec(),
        csv_path: None,
        final_state: Vec::new(),
        max_norm: f64::NAN,
        max_margin: f64::NAN,
        node0_margin: f64::NAN,
        audit_tolerance: tolerance,
        audit_passed: false,
        comparison: None,
        clamp_events: 0,
        error: None,
    };
    let field = lipschitz_extension(cfg.field.clone(), cfg.constants.r)?;
    let problem = IVProblem::new(cfg.alpha, field, x0.to_vec(), cfg.horizon, cfg.steps)?;
    let u = match solve_abm(&problem) {
        Ok(u) => u,
        Err(e @ Error::Divergence { .. }) => {
            summary.error = Some(e.to_string());
            return Ok(summary);
        }
        Err(e) => return Err(e),
    };
    summary.final_state = u.node(u.steps()).to_vec();
    summary.max_norm = u.nodes().map(norm).fold(0.0, f64::max);

    let audit = audit_inequality(&u, &cfg.lyapunov, cfg.alpha, DerivativeSource::Numerical)?;
    summary.max_margin = audit.max_margin;
    summary.node0_margin = audit.node0_margin;
    summary.audit_passed = audit.max_margin <= tolerance;

    if let Ok((a, p)) = comparison_equation(cfg) {
        let y0 = audit.v[0];
        if y0 > 0.0 {
            let phi = solve_scalar_comparison(a, p, y0, cfg.alpha, cfg.horizon, cfg.steps)?;
            let v = SampledTrajectory::scalar(dt, audit.v.clone())?;
            summary.comparison = Some(audit_comparison(&v, &phi.trajectory, comparison_tolerance(cfg.alpha, dt))?);
            summary.clamp_events = phi.clamp_events;
        }
    }

    let path = cfg.output_dir.join(format!("{}_{index}.csv", cfg.name));
    emit_csv(&u, &audit, &path)?;
    summary.csv_path = Some(path);
    Ok(summary)
}

fn delta_epsilons(cfg: &ScenarioConfig) -> Vec<f64> {
    let r = cfg.constants.r;
    let mut eps = vec![r, r / 2.0, r / 10.0];
    if let Some(p) = &cfg.probe {
        if !eps.contains(&p.eps) {
            eps.push(p.eps);
        }
    }
    eps
}

/// Solves every initial point, audits the trajectories, verifies the
/// envelope and decay conditions and writes the CSV files and the report
/// into `cfg.output_dir`.
///
/// Failed checks are recorded in the artifacts; errors are reserved for
/// I/O and invalid input.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunArtifacts> {
    let start = Instant::now();
    ensure_dir(&cfg.output_dir)?;

    let trajectories = cfg
        .initial_points
        .par_iter()
        .enumerate()
        .map(|(i, x0)| run_point(cfg, i, x0))
        .collect::<Result<Vec<_>>>()?;

    let sampling = Sampling::new(cfg.samples, cfg.seed)?;
    let envelope = verify_envelope(&cfg.lyapunov, &cfg.constants, sampling)?;
    let decay = verify_decay(&cfg.lyapunov, &cfg.field, &cfg.constants, sampling, DECAY_TOLERANCE)?;
    let mut report = classify_stability(&envelope, &decay, &cfg.constants);
    report.certificate = linear_quadratic_certificate(&cfg.lyapunov, &cfg.field);
    report.audit_margin_max = trajectories
        .iter()
        .map(|t| t.max_margin)
        .filter(|m| !m.is_nan())
        .reduce(f64::max);
    if report.constants_valid {
        report.delta_table = delta_epsilons(cfg)
            .into_iter()
            .map(|eps| delta_for_epsilon(eps, &cfg.constants, cfg.big_k))
            .collect::<Result<_>>()?;
    }
    if let Err(reason) = comparison_equation(cfg) {
        report.notes.push(format!("comparison audit skipped: {reason}"));
    }
    if cfg.initial_points.iter().any(|x| norm(x) > cfg.constants.r) {
        report.notes.push("some initial points lie outside the ball of radius r".into());
    }

    let all_passed = report.verdict != Verdict::Inconclusive && trajectories.iter().all(TrajectorySummary::passed);

    let mut text = cfg.describe();
    text.push_str(&report.to_text());
    let _ = writeln!(text, "envelope_points_checked: {}", envelope.checked);
    let _ = writeln!(text, "envelope_violations: {}", envelope.violations);
    let _ = writeln!(text, "decay_points_checked: {}", decay.checked);
    let _ = writeln!(text, "decay_violations: {}", decay.violations);
    for (i, t) in trajectories.iter().enumerate() {
        let _ = writeln!(text, "traj_{i}_x0: {}", join(&t.x0));
        if let Some(e) = &t.error {
            let _ = writeln!(text, "traj_{i}_error: {e}");
            continue;
        }
        if let Some(name) = t.csv_path.as_deref().and_then(Path::file_name) {
            let _ = writeln!(text, "traj_{i}_csv: {}", name.to_string_lossy());
        }
        let _ = writeln!(text, "traj_{i}_final_state: {}", join(&t.final_state));
        let _ = writeln!(text, "traj_{i}_max_norm: {}", t.max_norm);
        let _ = writeln!(text, "traj_{i}_max_margin: {:e}", t.max_margin);
        let _ = writeln!(text, "traj_{i}_node0_margin: {:e}", t.node0_margin);
        let _ = writeln!(text, "traj_{i}_audit_tolerance: {:e}", t.audit_tolerance);
        let _ = writeln!(text, "traj_{i}_audit_passed: {}", t.audit_passed);
        if let Some(c) = &t.comparison {
            let _ = writeln!(text, "traj_{i}_comparison_worst_gap: {:e}", c.worst_gap);
            let _ = writeln!(text, "traj_{i}_comparison_worst_node: {}", c.worst_node);
            let _ = writeln!(text, "traj_{i}_comparison_tolerance: {:e}", c.tolerance);
            let _ = writeln!(text, "traj_{i}_comparison_passed: {}", c.passed);
            let _ = writeln!(text, "traj_{i}_comparison_clamp_events: {}", t.clamp_events);
        }
    }
    let _ = writeln!(text, "all_checks_passed: {all_passed}");

    let report_path = cfg.output_dir.join(format!("{}_report.txt", cfg.name));
    write_text(&report_path, &text)?;

    Ok(RunArtifacts {
        csv_paths: trajectories.iter().filter_map(|t| t.csv_path.clone()).collect(),
        report_path,
        verdict: report.verdict,
        report,
        trajectories,
        all_passed,
        wall_time: start.elapsed(),
    })
}

/// Result of [`stability_probe`].
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub eps: f64,
    pub delta: f64,
    pub k_used: f64,
    /// Norm of every probe start, `δ(1 − 1e−9)`.
    pub start_norm: f64,
    pub points: usize,
    pub horizon: f64,
    pub steps: usize,
    /// `sup ‖φ(t)‖` over all probe trajectories and grid nodes.
    pub sup_norm: f64,
    pub stayed_below_eps: bool,
}

impl ProbeReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "probe_scope: finite horizon and finitely many starts, not a proof");
        let _ = writeln!(s, "eps: {}", self.eps);
        let _ = writeln!(s, "delta: {}", self.delta);
        let _ = writeln!(s, "K_used: {}", self.k_used);
        let _ = writeln!(s, "start_norm: {}", self.start_norm);
        let _ = writeln!(s, "points: {}", self.points);
        let _ = writeln!(s, "horizon: {}", self.horizon);
        let _ = writeln!(s, "steps: {}", self.steps);
        let _ = writeln!(s, "sup_norm: {}", self.sup_norm);
        let _ = writeln!(s, "stayed_below_eps: {}", self.stayed_below_eps);
        s
    }
}

/// Starts on the sphere of radius `radius`: `±radius` in one dimension,
/// normalized sampling directions otherwise.
fn sphere_points(dim: usize, radius: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim == 1 {
        return Ok((0..count)
            .map(|i| vec![if i % 2 == 0 { radius } else { -radius }])
            .collect());
    }
    Ok(ball_points(dim, 1.0, count, seed)?
        .into_iter()
        .map(|p| {
            let n = norm(&p);
            p.into_iter().map(|v| radius * v / n).collect()
        })
        .collect())
}

/// Finite-horizon check of the `ε-δ` statement: starts at norm just below
/// `δ(ε)` and reports whether `‖φ(t)‖ < ε` on the whole grid.
///
/// `eps` overrides the `[probe]` value; one of the two must be present.
pub fn stability_probe(cfg: &ScenarioConfig, eps: Option<f64>) -> Result<ProbeReport> {
    let eps = eps
        .or(cfg.probe.as_ref().map(|p| p.eps))
        .ok_or_else(|| Error::Constraint("no probe eps given".into()))?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Constraint(format!("probe eps must be positive, got {eps}")));
    }
    if eps > cfg.constants.r {
        return Err(Error::Constraint(format!(
            "probe eps {eps} exceeds the ball radius r = {}",
            cfg.constants.r
        )));
    }
    let points = cfg.probe.as_ref().map_or(super::config::DEFAULT_PROBE_POINTS, |p| p.points);
    let choice = delta_for_epsilon(eps, &cfg.constants, cfg.big_k)?;
    let start_norm = choice.delta * (1.0 - 1e-9);
    let starts = sphere_points(cfg.lyapunov.dim(), start_norm, points, cfg.seed)?;
    let sups = starts
        .par_iter()
        .map(|x0| {
            let field = lipschitz_extension(cfg.field.clone(), cfg.constants.r)?;
            let problem = IVProblem::new(cfg.alpha, field, x0.clone(), cfg.horizon, cfg.steps)?;
            Ok(match solve_abm(&problem) {
                Ok(u) => u.nodes().map(norm).fold(0.0, f64::max),
                Err(Error::Divergence { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let sup_norm = sups.into_iter().fold(0.0, f64::max);
    Ok(ProbeReport {
        eps,
        delta: choice.delta,
        k_used: choice.k_used,
        start_norm,
        points,
        horizon: cfg.horizon,
        steps: cfg.steps,
        sup_norm,
        stayed_below_eps: sup_norm < eps,
    })
}

/// Files written by [`run_remark4`].
#[derive(Debug, Clone)]
pub struct Remark4Artifacts {
    pub csv_path: PathBuf,
    pub report_path: PathBuf,
    pub positive: bool,
    pub non_convergent: bool,
}

pub const REMARK4_HORIZON: f64 = 110.0;
pub const REMARK4_STEPS: usize = 99_999;

/// Samples `x(t) = 1/(1+t) + sin t + 1` on `[0, 110]`, a positive function
/// with no limit, and writes `remark4.csv` and `remark4_report.txt`.
pub fn run_remark4(output_dir: &Path) -> Result<Remark4Artifacts> {
    ensure_dir(output_dir)?;
    let fixture = remark4_fixture(REMARK4_HORIZON, REMARK4_STEPS)?;
    let mut csv = String::from("t,x\n");
    for (k, x) in fixture.trajectory.nodes().enumerate() {
        let _ = writeln!(csv, "{:?},{:?}", fixture.trajectory.time(k), x[0]);
    }
    let csv_path = output_dir.join("remark4.csv");
    write_text(&csv_path, &csv)?;

    let mut text = String::new();
    let _ = writeln!(text, "scenario: remark4");
    let _ = writeln!(text, "function: 1/(1+t) + sin(t) + 1");
    let _ = writeln!(text, "horizon: {REMARK4_HORIZON}");
    let _ = writeln!(text, "steps: {REMARK4_STEPS}");
    let _ = writeln!(text, "min_value: {}", fixture.min_value);
    let _ = writeln!(text, "max_value: {}", fixture.max_value);
    let _ = writeln!(text, "positive: {}", fixture.positive());
    let _ = writeln!(text, "non_convergent: {}", fixture.non_convergent());
    for (k, t, x) in &fixture.dips {
        let _ = writeln!(text, "dip_{k}: t {t} x {x}");
    }
    let report_path = output_dir.join("remark4_report.txt");
    write_text(&report_path, &text)?;
    Ok(Remark4Artifacts {
        csv_path,
        report_path,
        positive: fixture.positive(),
        non_convergent: fixture.non_convergent(),
    })
}
