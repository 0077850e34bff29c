//! Special functions and fractional operators on uniform grids.

mod operators;
pub(crate) mod quad;
mod special;
mod trajectory;
pub(crate) mod weights;

use std::fmt;

use crate::error::{Error, Result};

pub use operators::{caputo_derivative, gamma_limit, rl_integral, rl_integral_with_start, GammaLimit};
pub use special::{gamma_fn, ln_gamma, mittag_leffler, ML_GUARANTEED_MAX_ABS_Z};
pub use trajectory::SampledTrajectory;

/// Order of a fractional operator, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
            Ok(FractionalOrder(alpha))
        } else {
            Err(Error::Domain(format!(
                "fractional order must satisfy 0 < alpha < 1, got {alpha}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        FractionalOrder::new(alpha)
    }
}
