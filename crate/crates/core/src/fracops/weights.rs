//! Product-integration weights on a uniform grid.
//!
//! Every weight is an integral of a power kernel against a linear hat or
//! ramp over one or two cells. The textbook closed forms are differences of
//! nearly equal powers and lose up to `m²·ε` relative accuracy at large
//! offsets `m`, so beyond [`SERIES_FROM`] each weight is evaluated from the
//! binomial expansion of the kernel around the cell instead.

const SERIES_FROM: usize = 8;

/// `Σ_j C(e, j) x^j · coeff(j)` truncated once terms are negligible.
fn binomial_series(e: f64, x: f64, coeff: impl Fn(usize) -> f64) -> f64 {
    let mut binom_pow = 1.0;
    let mut sum = 0.0;
    for j in 0..80 {
        sum += binom_pow * coeff(j);
        // every coefficient used here is at most 1 in magnitude
        if j > 2 && binom_pow.abs() <= 1e-18 * sum.abs() {
            break;
        }
        binom_pow *= (e - j as f64) / (j + 1) as f64 * x;
    }
    sum
}

/// `(m+1)^α − m^α`, the rectangle-rule weight for a cell at offset `m`.
pub(crate) fn rect(alpha: f64, m: usize) -> f64 {
    if m < SERIES_FROM {
        let m = m as f64;
        (m + 1.0).powf(alpha) - m.powf(alpha)
    } else {
        let mf = m as f64;
        alpha * mf.powf(alpha - 1.0) * binomial_series(alpha - 1.0, 1.0 / mf, |j| 1.0 / (j + 1) as f64)
    }
}

/// `(m+1)^{α+1} − 2m^{α+1} + (m−1)^{α+1}` for `m >= 1`: trapezoid weight of an
/// interior node at offset `m`.
pub(crate) fn hat(alpha: f64, m: usize) -> f64 {
    debug_assert!(m >= 1);
    let b = alpha + 1.0;
    if m < SERIES_FROM {
        let m = m as f64;
        (m + 1.0).powf(b) - 2.0 * m.powf(b) + (m - 1.0).powf(b)
    } else {
        let mf = m as f64;
        alpha
            * b
            * mf.powf(alpha - 1.0)
            * binomial_series(alpha - 1.0, 1.0 / mf, |j| {
                if j % 2 == 0 {
                    2.0 / ((j + 1) * (j + 2)) as f64
                } else {
                    0.0
                }
            })
    }
}

/// `(n−1)^{α+1} − (n−1−α) n^α` for `n >= 1`: trapezoid weight of the
/// starting node seen from node `n`.
pub(crate) fn hat_start(alpha: f64, n: usize) -> f64 {
    debug_assert!(n >= 1);
    let b = alpha + 1.0;
    if n < SERIES_FROM {
        let n = n as f64;
        (n - 1.0).powf(b) - (n - 1.0 - alpha) * n.powf(alpha)
    } else {
        let nf = n as f64;
        alpha
            * b
            * nf.powf(alpha - 1.0)
            * binomial_series(alpha - 1.0, -1.0 / nf, |j| 1.0 / ((j + 1) * (j + 2)) as f64)
    }
}

/// `∫₀¹ (k+u)^{-α-1} du` for `k >= 1`.
pub(crate) fn hyper_const(alpha: f64, k: usize) -> f64 {
    debug_assert!(k >= 1);
    let kf = k as f64;
    if k < SERIES_FROM {
        (kf.powf(-alpha) - (kf + 1.0).powf(-alpha)) / alpha
    } else {
        kf.powf(-alpha - 1.0) * binomial_series(-alpha - 1.0, 1.0 / kf, |j| 1.0 / (j + 1) as f64)
    }
}

/// `∫₀¹ u (k+u)^{-α-1} du` for `k >= 1`.
pub(crate) fn hyper_ramp(alpha: f64, k: usize) -> f64 {
    debug_assert!(k >= 1);
    let kf = k as f64;
    if k < SERIES_FROM {
        ((kf + 1.0).powf(1.0 - alpha) - kf.powf(1.0 - alpha)) / (1.0 - alpha)
            - kf * hyper_const(alpha, k)
    } else {
        kf.powf(-alpha - 1.0) * binomial_series(-alpha - 1.0, 1.0 / kf, |j| 1.0 / (j + 2) as f64)
    }
}

/// Weights of the trapezoidal product rule for `I^α` up to `n_max`:
/// `hat[m]` for interior offsets `m >= 1` (index 0 unused) and
/// `start[n]` for the first node seen from node `n >= 1` (index 0 unused).
#[derive(Debug, Clone)]
pub(crate) struct TrapezoidWeights {
    pub hat: Vec<f64>,
    pub start: Vec<f64>,
}

impl TrapezoidWeights {
    pub fn new(alpha: f64, n_max: usize) -> Self {
        let mut hat_w = vec![0.0; n_max + 1];
        let mut start = vec![0.0; n_max + 1];
        for m in 1..=n_max {
            hat_w[m] = hat(alpha, m);
            start[m] = hat_start(alpha, m);
        }
        TrapezoidWeights { hat: hat_w, start }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        ((a - b) / b).abs() < tol
    }

    // At offsets just above the switch point the closed forms are still
    // accurate, so both branches must agree.
    #[test]
    fn series_matches_closed_forms_near_switch() {
        for alpha in [0.1, 0.3, 0.5, 0.8, 0.95] {
            for m in SERIES_FROM..SERIES_FROM + 5 {
                let mf = m as f64;
                let b = alpha + 1.0;
                let rect_cf = (mf + 1.0).powf(alpha) - mf.powf(alpha);
                let hat_cf = (mf + 1.0).powf(b) - 2.0 * mf.powf(b) + (mf - 1.0).powf(b);
                let start_cf = (mf - 1.0).powf(b) - (mf - 1.0 - alpha) * mf.powf(alpha);
                let hc_cf = (mf.powf(-alpha) - (mf + 1.0).powf(-alpha)) / alpha;
                let hr_cf = ((mf + 1.0).powf(1.0 - alpha) - mf.powf(1.0 - alpha)) / (1.0 - alpha)
                    - mf * hc_cf;
                assert!(close(rect(alpha, m), rect_cf, 1e-12));
                assert!(close(hat(alpha, m), hat_cf, 1e-10));
                assert!(close(hat_start(alpha, m), start_cf, 1e-10));
                assert!(close(hyper_const(alpha, m), hc_cf, 1e-12));
                assert!(close(hyper_ramp(alpha, m), hr_cf, 1e-10));
            }
        }
    }

    #[test]
    fn trapezoid_weights_sum_to_constant_integral() {
        // Σ weights = (α+1) n^α makes the rule exact on constants.
        let alpha = 0.37;
        let n = 5000;
        let w = TrapezoidWeights::new(alpha, n);
        let sum: f64 = w.start[n] + w.hat[1..n].iter().sum::<f64>() + 1.0;
        let expected = (alpha + 1.0) * (n as f64).powf(alpha);
        assert!(close(sum, expected, 1e-13), "{sum} vs {expected}");
    }
}
