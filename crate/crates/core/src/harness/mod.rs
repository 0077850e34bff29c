//! Scenario configs, the built-in examples, CSV output and the
//! finite-horizon stability probe.
//!
//! The document grammar is described in [`config`].

pub mod config;
mod csv;
mod run;

pub use config::{
    builtin_document, parse_config, parse_polynomial, ProbeConfig, ScenarioConfig, BUILTIN_SCENARIOS,
    DEFAULT_K, DEFAULT_PROBE_POINTS, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_STEPS,
};
pub use csv::emit_csv;
pub use run::{
    run_remark4, run_scenario, stability_probe, ProbeReport, Remark4Artifacts, RunArtifacts, TrajectorySummary,
    REMARK4_HORIZON, REMARK4_STEPS,
};
