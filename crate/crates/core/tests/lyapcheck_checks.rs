use fraclyap::fdesolve::{solve_abm, solve_scalar_comparison, IVProblem, VectorFieldSpec};
use fraclyap::fracops::{mittag_leffler, FractionalOrder, SampledTrajectory};
use fraclyap::lyapcheck::sampling::ball_points;
use fraclyap::lyapcheck::{
    audit_comparison, audit_inequality, audit_tolerance, classify_stability, comparison_tolerance,
    delta_for_epsilon, linear_quadratic_certificate, remark4_fixture, verify_decay, verify_envelope,
    DerivativeSource, EnvelopeConstants, LyapunovCandidate, Sampling, Verdict, DECAY_TOLERANCE,
};
use fraclyap::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn order(a: f64) -> FractionalOrder {
    FractionalOrder::new(a).unwrap()
}

fn example2_constants() -> EnvelopeConstants {
    EnvelopeConstants { c1: 1.0, c2: 1.0, c3: 2.0, a: 2.0, b: 2.0, c: 4.0, r: 1.0 }
}

fn square() -> LyapunovCandidate {
    LyapunovCandidate::squared_norm(1)
}

fn cubic_decay() -> VectorFieldSpec {
    VectorFieldSpec::diagonal_power(1, -1.0, 3).unwrap()
}

fn sampling() -> Sampling {
    Sampling::default()
}

fn shipped_candidates() -> Vec<LyapunovCandidate> {
    vec![
        LyapunovCandidate::squared_norm(2),
        LyapunovCandidate::quadratic(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap(),
        LyapunovCandidate::even_power_sum(vec![1.0, 1.0], vec![4, 4]).unwrap(),
        LyapunovCandidate::even_power_sum(vec![0.5, 2.0], vec![2, 6]).unwrap(),
        LyapunovCandidate::linear(vec![1.0, -2.0]).unwrap(),
    ]
}

#[test]
fn envelope_examples() {
    let k = example2_constants();
    assert!(verify_envelope(&square(), &k, sampling()).unwrap().passed);

    let tight = EnvelopeConstants { c1: 2.0, ..k };
    let res = verify_envelope(&square(), &tight, sampling()).unwrap();
    assert!(!res.passed);
    assert!(!res.witnesses.is_empty() && res.witnesses.len() <= 10);
    assert!(res.witnesses.iter().all(|w| w.condition == "lower envelope" && w.point[0] != 0.0));

    let identity = LyapunovCandidate::quadratic(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
    assert!(verify_envelope(&identity, &k, sampling()).unwrap().passed);
}

#[test]
fn envelope_rejects_bad_input() {
    let k = EnvelopeConstants { c1: 0.0, ..example2_constants() };
    assert!(matches!(verify_envelope(&square(), &k, sampling()), Err(Error::Constraint(_))));
    assert!(matches!(Sampling::new(999, 0), Err(Error::Constraint(_))));
}

#[test]
fn decay_examples() {
    let k = example2_constants();
    assert!(verify_decay(&square(), &cubic_decay(), &k, sampling(), DECAY_TOLERANCE).unwrap().passed);

    let zero = VectorFieldSpec::zero(1).unwrap();
    let k0 = EnvelopeConstants { c3: 0.0, ..k };
    assert!(verify_decay(&square(), &zero, &k0, sampling(), DECAY_TOLERANCE).unwrap().passed);

    let growth = VectorFieldSpec::linear(&[vec![1.0]]).unwrap();
    let res = verify_decay(&square(), &growth, &k0, sampling(), DECAY_TOLERANCE).unwrap();
    assert!(!res.passed && !res.witnesses.is_empty());
}

#[test]
fn classification_examples() {
    let k = example2_constants();
    let env = verify_envelope(&square(), &k, sampling()).unwrap();
    let dec = verify_decay(&square(), &cubic_decay(), &k, sampling(), DECAY_TOLERANCE).unwrap();
    assert_eq!(classify_stability(&env, &dec, &k).verdict, Verdict::AsymptoticallyStable);

    let k0 = EnvelopeConstants { c3: 0.0, ..k };
    let dec0 = verify_decay(&square(), &cubic_decay(), &k0, sampling(), DECAY_TOLERANCE).unwrap();
    assert_eq!(classify_stability(&env, &dec0, &k0).verdict, Verdict::Stable);

    let growth = VectorFieldSpec::linear(&[vec![1.0]]).unwrap();
    let bad = verify_decay(&square(), &growth, &k0, sampling(), DECAY_TOLERANCE).unwrap();
    let report = classify_stability(&env, &bad, &k0);
    assert_eq!(report.verdict, Verdict::Inconclusive);
    assert!(!report.witnesses.is_empty());
    assert!(report.to_text().contains("verdict: inconclusive"));

    // C3 > 0 with c < b is outside the asymptotic regime
    let k_small_c = EnvelopeConstants { c: 1.0, ..k };
    assert_eq!(classify_stability(&env, &dec, &k_small_c).verdict, Verdict::Inconclusive);
}

#[test]
fn delta_examples() {
    let k = example2_constants();
    let d = delta_for_epsilon(0.1, &k, 2.0).unwrap();
    assert_eq!(d.delta, 0.05);
    assert_eq!(d.k_used, 2.0);
    let k4 = EnvelopeConstants { c2: 4.0, ..k };
    assert_eq!(delta_for_epsilon(0.1, &k4, 2.0).unwrap().delta, 0.025);
    // a < b makes ε^{a/b} > ε, so K has to grow
    let ka = EnvelopeConstants { a: 1.0, ..k };
    let d = delta_for_epsilon(0.1, &ka, 2.0).unwrap();
    assert_eq!(d.k_used, 4.0);
    assert!(d.delta < 0.1);
    assert!(delta_for_epsilon(0.1, &k, 1.0).is_err());
}

proptest! {
    #[test]
    fn delta_is_below_eps(
        eps in 1e-4f64..10.0,
        c1 in 0.1f64..10.0,
        c2 in 0.1f64..10.0,
        a in 0.5f64..4.0,
        b in 0.5f64..4.0,
        big_k in 1.01f64..5.0,
    ) {
        let k = EnvelopeConstants { c1, c2, c3: 0.0, a, b, c: 1.0, r: 1.0 };
        let d = delta_for_epsilon(eps, &k, big_k).unwrap();
        prop_assert!(d.delta > 0.0 && d.delta < eps);
        prop_assert!(d.k_used >= big_k);
    }

    #[test]
    fn verdict_is_scale_invariant(scale in 1e-3f64..1e3, case in 0usize..3) {
        let (v, f, k) = match case {
            0 => (square(), cubic_decay(), example2_constants()),
            1 => (square(), cubic_decay(), EnvelopeConstants { c3: 0.0, ..example2_constants() }),
            _ => (square(), VectorFieldSpec::linear(&[vec![1.0]]).unwrap(), EnvelopeConstants { c3: 0.0, ..example2_constants() }),
        };
        let verdict = |v: &LyapunovCandidate, k: &EnvelopeConstants| {
            let s = Sampling::new(1000, 3).unwrap();
            let env = verify_envelope(v, k, s).unwrap();
            let dec = verify_decay(v, &f, k, s, DECAY_TOLERANCE).unwrap();
            classify_stability(&env, &dec, k).verdict
        };
        prop_assert_eq!(verdict(&v, &k), verdict(&v.scaled(scale), &k.scaled(scale)));
    }
}

#[test]
fn gradients_match_finite_differences() {
    let h = 1e-5;
    for v in shipped_candidates() {
        for x in ball_points(2, 1.0, 100, 11).unwrap() {
            let g = v.gradient(&x);
            let scale = g.iter().fold(1.0f64, |m, c| m.max(c.abs()));
            for i in 0..2 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (v.evaluate(&xp) - v.evaluate(&xm)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-6 * scale, "{v}: at {x:?} fd {fd} vs {}", g[i]);
            }
        }
    }
}

#[test]
fn convexity_gap_is_non_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for v in shipped_candidates() {
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let inner: f64 = v.gradient(&y).iter().zip(y.iter().zip(&x)).map(|(g, (a, b))| g * (a - b)).sum();
            let gap = v.evaluate(&y) - v.evaluate(&x) - inner;
            assert!(gap <= 1e-12, "{v}: gap {gap}");
        }
    }
}

#[test]
fn linear_quadratic_certificate_for_example1() {
    let a = VectorFieldSpec::linear(&[vec![-2.0, -1.0], vec![-1.0, -2.0]]).unwrap();
    let cert = linear_quadratic_certificate(&LyapunovCandidate::squared_norm(2), &a).unwrap();
    // Q = 2A has eigenvalues 2 and 6
    assert!((cert.min_eigenvalue - 2.0).abs() < 1e-12);
    let k = EnvelopeConstants { c1: 1.0, c2: 1.0, c3: 2.0, a: 2.0, b: 2.0, c: 2.0, r: 1.0 };
    assert!(cert.certifies(&k));
    assert!(!cert.certifies(&EnvelopeConstants { c3: 2.5, ..k }));
    assert!(linear_quadratic_certificate(&LyapunovCandidate::squared_norm(1), &cubic_decay()).is_none());
}

#[test]
fn audit_linear_candidate_is_equality() {
    let f = VectorFieldSpec::linear(&[vec![-2.0, -1.0], vec![-1.0, -2.0]]).unwrap();
    let x = solve_abm(&IVProblem::new(order(0.7), f, vec![0.5, -0.4], 5.0, 4096).unwrap()).unwrap();
    let v = LyapunovCandidate::linear(vec![1.5, -0.25]).unwrap();
    let audit = audit_inequality(&x, &v, order(0.7), DerivativeSource::Numerical).unwrap();
    assert!(audit.max_abs_margin <= 1e-8, "{}", audit.max_abs_margin);
}

#[test]
fn audit_constant_trajectory_is_exactly_zero() {
    let x = SampledTrajectory::constant(0.01, 64, &[0.3, -0.2]).unwrap();
    for v in shipped_candidates() {
        let audit = audit_inequality(&x, &v, order(0.4), DerivativeSource::Numerical).unwrap();
        assert!(audit.margin.iter().all(|&m| m == 0.0));
    }
}

#[test]
fn audit_square_norm_on_linear_decay() {
    let alpha = 0.8;
    let n = 4096;
    let f = VectorFieldSpec::linear(&[vec![-1.0]]).unwrap();
    let x = solve_abm(&IVProblem::new(order(alpha), f, vec![1.0], 10.0, n).unwrap()).unwrap();
    let audit = audit_inequality(&x, &square(), order(alpha), DerivativeSource::Numerical).unwrap();
    let tol = audit_tolerance(order(alpha), x.dt());
    assert!(audit.max_margin <= tol, "{} > {tol}", audit.max_margin);

    // same audit on exact E_α(−t^α) samples, 4× finer
    let exact = SampledTrajectory::from_scalar_fn(10.0, 4 * n, |t| mittag_leffler(alpha, -t.powf(alpha)).unwrap()).unwrap();
    let fine = audit_inequality(&exact, &square(), order(alpha), DerivativeSource::Numerical).unwrap();
    assert!(fine.max_margin <= tol);
    // margins agree where the grids meet, away from the start
    let worst = (1..=n)
        .filter(|&k| x.time(k) >= 1.0)
        .map(|k| (audit.margin[k] - fine.margin[4 * k]).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3, "coarse and fine margins differ by {worst}");
}

#[test]
fn comparison_audit_examples() {
    let alpha = order(0.8);
    let (t, n) = (100.0, 8192);
    let x = solve_abm(&IVProblem::new(alpha, cubic_decay(), vec![0.6], t, n).unwrap()).unwrap();
    let vtraj = x.map_scalar(|p| square().evaluate(p)).unwrap();
    let phi = solve_scalar_comparison(-2.0, 2.0, 0.36, alpha, t, n).unwrap();
    let tol = comparison_tolerance(alpha, t / n as f64);
    let res = audit_comparison(&vtraj, &phi.trajectory, tol).unwrap();
    assert!(res.passed, "gap {}", res.worst_gap);

    let doubled = vtraj.map_scalar(|v| 2.0 * v[0]).unwrap();
    assert!(!audit_comparison(&doubled, &phi.trajectory, tol).unwrap().passed);

    let flat = SampledTrajectory::constant(0.1, 50, &[0.36]).unwrap();
    let phi0 = solve_scalar_comparison(0.0, 2.0, 0.36, alpha, 5.0, 50).unwrap();
    let res = audit_comparison(&flat, &phi0.trajectory, tol).unwrap();
    assert!(res.passed && res.worst_gap == 0.0);

    let short = SampledTrajectory::constant(0.1, 10, &[0.36]).unwrap();
    assert!(matches!(audit_comparison(&short, &phi0.trajectory, tol), Err(Error::Shape(_))));
}

#[test]
fn remark4_examples() {
    let r = remark4_fixture(110.0, 100_000).unwrap();
    assert_eq!(r.trajectory.node(0)[0], 2.0);
    assert!(r.positive());
    assert!(r.non_convergent());
    let (k, tk, xk) = r.dips[16];
    assert_eq!(k, 17);
    assert!((tk - 105.24).abs() < 0.01);
    assert!((xk - 1.0 / (1.0 + tk)).abs() < 1e-6);
    assert!((xk - 0.00941).abs() < 1e-5);
    assert!(remark4_fixture(100.0, 10).is_err());
}

#[test]
fn example1_lyapunov_values_decrease() {
    let alpha = order(0.7);
    let f = VectorFieldSpec::linear(&[vec![-2.0, -1.0], vec![-1.0, -2.0]]).unwrap();
    let v = LyapunovCandidate::squared_norm(2);
    for x0 in [vec![0.5, 0.5], vec![0.7, -0.2], vec![-0.3, 0.6]] {
        let x = solve_abm(&IVProblem::new(alpha, f.clone(), x0, 10.0, 4096).unwrap()).unwrap();
        let tol = audit_tolerance(alpha, x.dt());
        let vals: Vec<f64> = x.nodes().map(|p| v.evaluate(p)).collect();
        assert!(vals.windows(2).all(|w| w[1] <= w[0] + tol));
    }
}
