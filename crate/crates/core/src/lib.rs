//! Fractional calculus on sampled trajectories and Lyapunov-type stability
//! checks for Caputo systems `D^α x = f(x)` with `0 < α < 1`.
//!
//! The crate is split into four layers:
//!
//! * [`fracops`]: Gamma and Mittag-Leffler functions, the Riemann-Liouville
//!   integral and the Caputo derivative acting on uniform-grid trajectories.
//! * [`fdesolve`]: polynomial vector fields, a fractional Adams predictor-corrector
//!   solver, the scalar comparison equation and the radial Lipschitz extension.
//! * [`lyapcheck`]: Lyapunov candidates, sampled verification of the envelope
//!   and decay conditions, the stability verdict and trajectory audits.
//! * [`harness`]: scenario configs, built-in scenarios, CSV output and the
//!   finite-horizon stability probe behind the `fraclyap` binary.

pub mod error;
pub mod fdesolve;
pub mod fracops;
pub mod harness;
pub mod lyapcheck;

pub use error::{Error, Result};
