use std::path::Path;
use std::process::Command;

use fraclyap::fracops::{mittag_leffler, SampledTrajectory};
use fraclyap::harness::{
    builtin_document, emit_csv, parse_config, run_scenario, stability_probe, ScenarioConfig, DEFAULT_STEPS,
};
use fraclyap::lyapcheck::{audit_tolerance, InequalityAudit, Verdict};
use fraclyap::Error;

const MINIMAL: &str = "\
[scenario]
name = minimal
alpha = 0.6
horizon = 2

[field]
dim = 1
f0 = -x0

[initial]
point = 0.5

[lyapunov]
kind = quadratic
P = 1

[constants]
C1 = 1
C2 = 1
C3 = 2
a = 2
b = 2
c = 2
r = 1
";

fn config_error(text: &str) -> (usize, String) {
    match parse_config(text) {
        Err(Error::Config { line, message }) => (line, message),
        other => panic!("expected a config error, got {other:?}"),
    }
}

fn with_dir(doc: &str, dir: &Path) -> ScenarioConfig {
    let mut cfg = parse_config(doc).unwrap();
    cfg.output_dir = dir.to_path_buf();
    cfg
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fraclyap"))
}

#[test]
fn example2_document() {
    let cfg = parse_config(builtin_document("example2").unwrap()).unwrap();
    assert_eq!(cfg.alpha.value(), 0.8);
    assert_eq!(cfg.field.to_string(), "f0 = -1*x0^3");
    assert_eq!(cfg.initial_points, vec![vec![1.0], vec![0.6], vec![-0.8]]);
    assert_eq!(cfg.horizon, 1000.0);
    assert_eq!(cfg.steps, 16384);
}

#[test]
fn defaults_are_applied_and_recorded() {
    let cfg = parse_config(MINIMAL).unwrap();
    assert_eq!(cfg.steps, DEFAULT_STEPS);
    assert_eq!(cfg.seed, 0);
    assert_eq!(cfg.big_k, 2.0);
    let text = cfg.describe();
    assert!(text.contains("defaults_applied: steps = 4096, seed = 0, K = 2"), "{text}");
}

#[test]
fn validation_errors_name_rule_and_line() {
    let (line, msg) = config_error(&MINIMAL.replace("alpha = 0.6", "alpha = 1.2"));
    assert_eq!(line, 3);
    assert!(msg.contains("alpha must lie strictly inside (0, 1)"), "{msg}");

    let (_, msg) = config_error("");
    assert!(msg.contains("missing required"), "{msg}");
    let (_, msg) = config_error("# only a comment\n");
    assert!(msg.contains("missing required"), "{msg}");

    let (line, msg) = config_error(&MINIMAL.replace("horizon = 2", "horizon = 2\ncolour = red"));
    assert_eq!(line, 5);
    assert!(msg.contains("unknown key 'colour'"), "{msg}");

    let (line, msg) = config_error(&MINIMAL.replace("f0 = -x0", "f0 = -x0 + 0.1"));
    assert_eq!(line, 8);
    assert!(msg.contains("degree-0"), "{msg}");

    let (line, msg) = config_error(&MINIMAL.replace("P = 1", "P = -1"));
    assert_eq!(line, 15);
    assert!(msg.contains("semi-definite"), "{msg}");

    let (_, msg) = config_error(&MINIMAL.replace("horizon = 2\n", ""));
    assert!(msg.contains("'horizon'"), "{msg}");

    let (_, msg) = config_error(&format!("{MINIMAL}\n[probe]\neps = 2\n"));
    assert!(msg.contains("exceeds the ball radius"), "{msg}");
}

#[test]
fn csv_shape_for_single_step() {
    let dir = tempfile::tempdir().unwrap();
    let x = SampledTrajectory::scalar(0.5, vec![1.0, 0.25]).unwrap();
    let audit = InequalityAudit {
        v: vec![1.0, 0.0625],
        caputo_v: vec![-2.0, -0.5],
        rhs_inner: vec![-2.0, -0.25],
        margin: vec![0.0, -0.25],
        max_margin: -0.25,
        max_abs_margin: 0.25,
        node0_margin: 0.0,
    };
    let path = dir.path().join("one.csv");
    emit_csv(&x, &audit, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text,
        "t,x_0,V,caputoV,rhs_inner,margin\n0.0,1.0,1.0,-2.0,-2.0,0.0\n0.5,0.25,0.0625,-0.5,-0.25,-0.25\n"
    );

    let short = InequalityAudit { margin: vec![0.0], ..audit.clone() };
    assert!(matches!(emit_csv(&x, &short, &path), Err(Error::Shape(_))));
    let missing = dir.path().join("no/such/dir/x.csv");
    match emit_csv(&x, &audit, &missing) {
        Err(e @ Error::Io { .. }) => assert!(e.to_string().contains("no/such/dir/x.csv")),
        other => panic!("expected an i/o error, got {other:?}"),
    }
}

#[test]
fn example2_run_and_csv_contents() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_dir(builtin_document("example2").unwrap(), dir.path());
    let run = run_scenario(&cfg).unwrap();
    assert_eq!(run.verdict, Verdict::AsymptoticallyStable);
    assert!(run.all_passed);
    assert!(run.report_path.exists());
    assert_eq!(run.csv_paths.len(), 3);
    let tol = audit_tolerance(cfg.alpha, cfg.horizon / cfg.steps as f64);
    for (i, path) in run.csv_paths.iter().enumerate() {
        let text = std::fs::read_to_string(path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x_0,V,caputoV,rhs_inner,margin"));
        let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), cfg.steps + 1);
        assert_eq!(rows[0][0], 0.0);
        assert_eq!(rows[0][1], cfg.initial_points[i][0]);
        assert!(rows[1..].iter().all(|r| r[5] <= tol));
        // band reached and kept through the horizon
        let entry = rows.iter().position(|r| r[1].abs() <= 0.1).unwrap();
        assert!(rows[entry..].iter().all(|r| r[1].abs() <= 0.1));
        assert!(text.ends_with('\n'));
    }
    let report = std::fs::read_to_string(&run.report_path).unwrap();
    assert!(report.contains("verdict: asymptotically-stable"));
    assert!(report.contains("defaults_applied: seed = 0, K = 2"));
    assert!(report.contains("traj_1_comparison_passed: true"));
}

#[test]
fn runs_are_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let doc = builtin_document("example1").unwrap();
    let ra = run_scenario(&with_dir(doc, a.path())).unwrap();
    let rb = run_scenario(&with_dir(doc, b.path())).unwrap();
    for (x, y) in ra.csv_paths.iter().zip(&rb.csv_paths) {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }
    assert_eq!(std::fs::read(&ra.report_path).unwrap(), std::fs::read(&rb.report_path).unwrap());
}

#[test]
fn example1_identity_matches_mittag_leffler() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = with_dir(builtin_document("example1-identity").unwrap(), dir.path());
    let run = run_scenario(&cfg).unwrap();
    assert_eq!(run.verdict, Verdict::AsymptoticallyStable);
    let a = cfg.alpha.value();
    for (x0, path) in cfg.initial_points.iter().zip(&run.csv_paths) {
        let text = std::fs::read_to_string(path).unwrap();
        for line in text.lines().skip(1) {
            let row: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
            let e = mittag_leffler(a, -row[0].powf(a)).unwrap();
            for d in 0..2 {
                assert!((row[1 + d] - x0[d] * e).abs() <= 1e-3, "t = {}", row[0]);
            }
        }
    }
    let default = run_scenario(&with_dir(builtin_document("example1").unwrap(), dir.path())).unwrap();
    assert_eq!(default.verdict, Verdict::AsymptoticallyStable);
    assert!(default.report.certificate.unwrap().min_eigenvalue > 1.99);
}

#[test]
fn failing_decay_gives_inconclusive_and_status_1() {
    let doc = MINIMAL.replace("f0 = -x0", "f0 = x0").replace("C3 = 2", "C3 = 0");
    let dir = tempfile::tempdir().unwrap();
    let run = run_scenario(&with_dir(&doc, dir.path())).unwrap();
    assert_eq!(run.verdict, Verdict::Inconclusive);
    assert!(!run.report.witnesses.is_empty());
    assert!(!run.all_passed);

    let cfg_path = dir.path().join("grow.cfg");
    std::fs::write(&cfg_path, &doc).unwrap();
    let out = bin().arg("run").arg("--config").arg(&cfg_path).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn probe_examples() {
    let cfg = parse_config(builtin_document("example2").unwrap()).unwrap();
    let p = stability_probe(&cfg, Some(0.1)).unwrap();
    assert_eq!(p.delta, 0.05);
    assert_eq!(p.k_used, 2.0);
    assert!(p.stayed_below_eps && p.sup_norm < 0.1);
    assert!(p.to_text().contains("finite horizon"));

    let zero = parse_config(&MINIMAL.replace("f0 = -x0", "f0 = 0").replace("C3 = 2", "C3 = 0")).unwrap();
    let p = stability_probe(&zero, Some(0.5)).unwrap();
    assert_eq!(p.sup_norm, p.start_norm);
    assert!((p.sup_norm - p.delta).abs() <= 1e-9 * p.delta);
    assert!(p.stayed_below_eps);

    assert!(matches!(stability_probe(&cfg, Some(2.0)), Err(Error::Constraint(_))));
    assert!(matches!(stability_probe(&cfg, Some(0.0)), Err(Error::Constraint(_))));
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.cfg");
    std::fs::write(&good, MINIMAL).unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, MINIMAL.replace("alpha = 0.6", "alpha = 1.2")).unwrap();

    let out = bin().arg("run").arg("--config").arg(&good).arg("--out").arg(dir.path()).args(["--steps", "256", "--seed", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("minimal_report.txt")).unwrap();
    assert!(report.contains("steps: 256") && report.contains("seed: 3"));

    let out = bin().arg("run").arg("--config").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = bin().args(["run", "--config", "/nonexistent/x.cfg"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["ml", "--alpha", "1", "--z", "-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((v - (-1f64).exp()).abs() < 1e-14);
    let out = bin().args(["ml", "--alpha", "0.5", "--z", "40"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().args(["probe", "--config"]).arg(&good).args(["--eps", "0.3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("stayed_below_eps: true"));

    let out = bin().args(["builtin", "--name", "nope", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn remark4_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["builtin", "--name", "remark4", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.path().join("remark4_report.txt")).unwrap();
    assert!(report.contains("positive: true") && report.contains("non_convergent: true"));
    let csv = std::fs::read_to_string(dir.path().join("remark4.csv")).unwrap();
    assert_eq!(csv.lines().count(), 100_001);
}
