use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::fdesolve::{VectorField, VectorFieldSpec};

use super::candidate::{min_eigenvalue, LyapunovCandidate};
use super::sampling::ball_points;

/// Default absolute tolerance of the decay check.
pub const DECAY_TOLERANCE: f64 = 1e-12;
/// Relative tolerance of the envelope check (rounding in `‖x‖^a`).
pub const ENVELOPE_REL_TOLERANCE: f64 = 1e-12;
/// At most this many violating points are kept.
pub const MAX_WITNESSES: usize = 10;
pub const MIN_SAMPLES: usize = 1000;

const EVIDENCE_NOTE: &str = "numerical evidence on a finite point set, not a proof";

/// Constants of the envelope `C1‖x‖^a <= V(x) <= C2‖x‖^b` and of the decay
/// bound `⟨∇V(x), f(x)⟩ <= −C3‖x‖^c` on the ball of radius `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r: f64,
}

impl EnvelopeConstants {
    pub fn validate(&self) -> Result<()> {
        let all = [self.c1, self.c2, self.c3, self.a, self.b, self.c, self.r];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Constraint("envelope constants must be finite".into()));
        }
        for (name, v) in [("C1", self.c1), ("C2", self.c2), ("a", self.a), ("b", self.b), ("c", self.c), ("r", self.r)] {
            if v <= 0.0 {
                return Err(Error::Constraint(format!("{name} must be positive, got {v}")));
            }
        }
        if self.c3 < 0.0 {
            return Err(Error::Constraint(format!("C3 must be non-negative, got {}", self.c3)));
        }
        Ok(())
    }

    /// Whether the asymptotic-stability conclusion applies: `C3 > 0` and
    /// `c >= b`.
    pub fn asymptotic_regime(&self) -> bool {
        self.c3 > 0.0 && self.c >= self.b
    }

    /// Constants for `k·V`: `C1`, `C2` and `C3` scale by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        EnvelopeConstants { c1: k * self.c1, c2: k * self.c2, c3: k * self.c3, ..*self }
    }
}

/// Sampling parameters for the ball checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub samples: usize,
    pub seed: u64,
}

impl Sampling {
    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        if samples < MIN_SAMPLES {
            return Err(Error::Constraint(format!(
                "at least {MIN_SAMPLES} sample points required, got {samples}"
            )));
        }
        Ok(Sampling { samples, seed })
    }
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { samples: 4000, seed: 0 }
    }
}

/// A sampled point where a condition failed, with the signed excess.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub condition: &'static str,
    pub point: Vec<f64>,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub passed: bool,
    pub checked: usize,
    pub violations: usize,
    pub witnesses: Vec<Witness>,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn check_points(
    dim: usize,
    k: &EnvelopeConstants,
    sampling: Sampling,
    mut excesses: impl FnMut(&[f64], &mut Vec<(&'static str, f64)>),
) -> Result<Verification> {
    k.validate()?;
    if sampling.samples < MIN_SAMPLES {
        return Err(Error::Constraint(format!(
            "at least {MIN_SAMPLES} sample points required, got {}",
            sampling.samples
        )));
    }
    let points = ball_points(dim, k.r, sampling.samples, sampling.seed)?;
    let mut witnesses = Vec::new();
    let mut violations = 0;
    let mut found = Vec::new();
    for p in &points {
        found.clear();
        excesses(p, &mut found);
        for &(condition, excess) in &found {
            violations += 1;
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push(Witness { condition, point: p.clone(), excess });
            }
        }
    }
    Ok(Verification { passed: violations == 0, checked: points.len(), violations, witnesses })
}

fn check_dim(v: &LyapunovCandidate, dim: usize) -> Result<()> {
    if v.dim() != dim {
        return Err(Error::Shape(format!("candidate has dimension {}, expected {dim}", v.dim())));
    }
    Ok(())
}

/// Checks `C1‖x‖^a <= V(x) <= C2‖x‖^b` on the sampled ball.
pub fn verify_envelope(v: &LyapunovCandidate, k: &EnvelopeConstants, sampling: Sampling) -> Result<Verification> {
    check_points(v.dim(), k, sampling, |x, out| {
        let n = norm(x);
        let value = v.evaluate(x);
        let lower = k.c1 * n.powf(k.a);
        let upper = k.c2 * n.powf(k.b);
        let slack = |p: f64, q: f64| ENVELOPE_REL_TOLERANCE * p.abs().max(q.abs());
        if lower - value > slack(lower, value) {
            out.push(("lower envelope", lower - value));
        }
        if value - upper > slack(upper, value) {
            out.push(("upper envelope", value - upper));
        }
    })
}

/// Checks `⟨∇V(x), f(x)⟩ + C3‖x‖^c <= tolerance` on the sampled ball.
pub fn verify_decay(
    v: &LyapunovCandidate,
    f: &VectorFieldSpec,
    k: &EnvelopeConstants,
    sampling: Sampling,
    tolerance: f64,
) -> Result<Verification> {
    check_dim(v, f.dim())?;
    check_points(v.dim(), k, sampling, |x, out| {
        let inner: f64 = v.gradient(x).iter().zip(f.eval(x)).map(|(g, fx)| g * fx).sum();
        let excess = inner + k.c3 * norm(x).powf(k.c);
        if excess > tolerance {
            out.push(("decay", excess));
        }
    })
}

/// Exact decay certificate for `V = xᵀPx` and linear `f(x) = Mx`:
/// `⟨∇V, f⟩ = −xᵀQx` with `Q = −(PM + MᵀP)`, so `⟨∇V, f⟩ <= −λ_min(Q)‖x‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearQuadraticCertificate {
    pub min_eigenvalue: f64,
}

impl LinearQuadraticCertificate {
    /// Whether the certificate proves the decay bound for these constants,
    /// which needs `c = 2` and `C3 <= λ_min(Q)`.
    pub fn certifies(&self, k: &EnvelopeConstants) -> bool {
        self.min_eigenvalue >= 0.0 && (k.c3 == 0.0 || (k.c == 2.0 && k.c3 <= self.min_eigenvalue))
    }
}

/// Returns the certificate when `V` is quadratic and every term of `f` is
/// linear; `None` otherwise.
pub fn linear_quadratic_certificate(
    v: &LyapunovCandidate,
    f: &VectorFieldSpec,
) -> Option<LinearQuadraticCertificate> {
    let LyapunovCandidate::Quadratic { dim, p } = v else {
        return None;
    };
    let d = *dim;
    if f.dim() != d || f.terms().iter().any(|t| t.degree() != 1) {
        return None;
    }
    let mut m = vec![0.0; d * d];
    for t in f.terms() {
        let j = t.exponents.iter().position(|&e| e == 1)?;
        m[t.target * d + j] += t.coeff;
    }
    let mut q = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let pm: f64 = (0..d).map(|l| p[i * d + l] * m[l * d + j]).sum();
            let mtp: f64 = (0..d).map(|l| m[l * d + i] * p[l * d + j]).sum();
            q[i * d + j] = -(pm + mtp);
        }
    }
    Some(LinearQuadraticCertificate { min_eigenvalue: min_eigenvalue(d, &q) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    AsymptoticallyStable,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::AsymptoticallyStable => "asymptotically-stable",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// `δ(ε)` together with the factor `K` that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaChoice {
    pub eps: f64,
    pub delta: f64,
    pub k_used: f64,
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub constants: EnvelopeConstants,
    pub constants_valid: bool,
    pub witnesses: Vec<Witness>,
    pub delta_table: Vec<DeltaChoice>,
    pub audit_margin_max: Option<f64>,
    pub certificate: Option<LinearQuadraticCertificate>,
    pub notes: Vec<String>,
}

/// Applies the decision rule: both checks pass and `C3 = 0` gives stable;
/// both pass, `C3 > 0` and `c >= b` gives asymptotically stable; anything
/// else is inconclusive.
pub fn classify_stability(envelope: &Verification, decay: &Verification, k: &EnvelopeConstants) -> StabilityReport {
    let constants_valid = k.validate().is_ok();
    let mut witnesses: Vec<Witness> = envelope.witnesses.iter().chain(&decay.witnesses).cloned().collect();
    witnesses.truncate(MAX_WITNESSES);
    let mut notes = Vec::new();
    let verdict = if !constants_valid {
        notes.push("envelope constants are invalid".to_string());
        Verdict::Inconclusive
    } else if !(envelope.passed && decay.passed) {
        Verdict::Inconclusive
    } else if k.c3 == 0.0 {
        Verdict::Stable
    } else if k.asymptotic_regime() {
        Verdict::AsymptoticallyStable
    } else {
        notes.push(format!("C3 > 0 but c = {} < b = {}", k.c, k.b));
        Verdict::Inconclusive
    };
    StabilityReport {
        verdict,
        constants: *k,
        constants_valid,
        witnesses,
        delta_table: Vec::new(),
        audit_margin_max: None,
        certificate: None,
        notes,
    }
}

/// `δ = (1/K)(C1/C2)^{1/b} ε^{a/b}`, doubling `K` until `δ < ε`.
pub fn delta_for_epsilon(eps: f64, k: &EnvelopeConstants, big_k: f64) -> Result<DeltaChoice> {
    k.validate()?;
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Constraint(format!("eps must be positive, got {eps}")));
    }
    if !(big_k.is_finite() && big_k > 1.0) {
        return Err(Error::Constraint(format!("K must exceed 1, got {big_k}")));
    }
    let base = (k.c1 / k.c2).powf(1.0 / k.b) * eps.powf(k.a / k.b);
    let mut k_used = big_k;
    while base / k_used >= eps {
        k_used *= 2.0;
    }
    Ok(DeltaChoice { eps, delta: base / k_used, k_used })
}

impl StabilityReport {
    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let k = &self.constants;
        let _ = writeln!(s, "verdict: {}", self.verdict);
        let _ = writeln!(s, "verdict_basis: {EVIDENCE_NOTE}");
        let _ = writeln!(s, "constants_valid: {}", self.constants_valid);
        for (name, v) in [("C1", k.c1), ("C2", k.c2), ("C3", k.c3), ("a", k.a), ("b", k.b), ("c", k.c), ("r", k.r)] {
            let _ = writeln!(s, "{name}: {v}");
        }
        if let Some(cert) = &self.certificate {
            let _ = writeln!(s, "linear_quadratic_min_eigenvalue: {:e}", cert.min_eigenvalue);
            let _ = writeln!(s, "linear_quadratic_certified: {}", cert.certifies(k));
        }
        let _ = writeln!(s, "witness_count: {}", self.witnesses.len());
        for (i, w) in self.witnesses.iter().enumerate() {
            let pt: Vec<String> = w.point.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(s, "witness_{i}: {} at [{}] excess {:e}", w.condition, pt.join(" "), w.excess);
        }
        for (i, d) in self.delta_table.iter().enumerate() {
            let _ = writeln!(s, "delta_{i}: eps {} delta {} K {}", d.eps, d.delta, d.k_used);
        }
        if let Some(m) = self.audit_margin_max {
            let _ = writeln!(s, "audit_margin_max: {m:e}");
        }
        for (i, n) in self.notes.iter().enumerate() {
            let _ = writeln!(s, "note_{i}: {n}");
        }
        s
    }
}
