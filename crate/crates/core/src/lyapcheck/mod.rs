//! Lyapunov candidates, sampled checks of the envelope and decay conditions,
//! the stability decision rule, and audits of the Caputo convexity
//! inequality and of the comparison bound along computed trajectories.

mod audit;
mod candidate;
mod envelope;
pub mod sampling;

pub use audit::{
    audit_comparison, audit_inequality, audit_tolerance, comparison_tolerance, remark4_fixture,
    remark4_function, ComparisonAudit, DerivativeSource, InequalityAudit, Remark4Report,
    AUDIT_TOLERANCE_COEFF, COMPARISON_TOLERANCE_COEFF,
};
pub use candidate::LyapunovCandidate;
pub use envelope::{
    classify_stability, delta_for_epsilon, linear_quadratic_certificate, verify_decay,
    verify_envelope, DeltaChoice, EnvelopeConstants, LinearQuadraticCertificate, Sampling,
    StabilityReport, Verdict, Verification, Witness, DECAY_TOLERANCE, ENVELOPE_REL_TOLERANCE,
    MAX_WITNESSES, MIN_SAMPLES,
};
