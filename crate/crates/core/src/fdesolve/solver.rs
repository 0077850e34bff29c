use crate::error::{Error, Result};
use crate::fracops::weights::{rect, TrapezoidWeights};
use crate::fracops::{gamma_fn, FractionalOrder, SampledTrajectory};

use super::field::VectorField;

/// States with a component above this magnitude count as blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Caputo initial value problem `D^α x = f(x)`, `x(0) = x0`, on `[0, T]` with
/// `N` uniform steps.
#[derive(Debug, Clone)]
pub struct IVProblem<F> {
    pub alpha: FractionalOrder,
    pub field: F,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub steps: usize,
}

impl<F: VectorField> IVProblem<F> {
    pub fn new(alpha: FractionalOrder, field: F, x0: Vec<f64>, horizon: f64, steps: usize) -> Result<Self> {
        if x0.len() != field.dim() {
            return Err(Error::Shape(format!(
                "initial point has {} components, field has dimension {}",
                x0.len(),
                field.dim()
            )));
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("initial point is not finite".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Domain(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::Domain("at least one step is required".into()));
        }
        Ok(IVProblem { alpha, field, x0, horizon, steps })
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }
}

/// Fractional Adams-Bashforth-Moulton predictor-corrector.
///
/// Predictor: product rectangle rule, weights `(m+1)^α − m^α`. Corrector:
/// product trapezoid rule (the weights of `rl_integral`), one pass per step.
/// History sums run in a fixed order so results are bit-reproducible.
pub fn solve_abm<F: VectorField>(p: &IVProblem<F>) -> Result<SampledTrajectory> {
    let values = abm(p.alpha.value(), p.dt(), p.steps, &p.x0, |x, out| p.field.eval_into(x, out), None)?;
    SampledTrajectory::new(p.dt(), p.x0.len(), values)
}

/// Output of [`solve_scalar_comparison`].
#[derive(Debug, Clone)]
pub struct ComparisonSolution {
    pub trajectory: SampledTrajectory,
    /// Number of predictor or corrector values that came out negative and
    /// were set to 0.
    pub clamp_events: usize,
}

/// Solves `D^α y = A y^p`, `y(0) = y0`, with the same scheme as
/// [`solve_abm`]; negative predictor or corrector values are clamped to 0.
pub fn solve_scalar_comparison(
    a: f64,
    p: f64,
    y0: f64,
    alpha: FractionalOrder,
    horizon: f64,
    steps: usize,
) -> Result<ComparisonSolution> {
    if !(a.is_finite() && a <= 0.0) {
        return Err(Error::Domain(format!("comparison coefficient A must be <= 0, got {a}")));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::Domain(format!("comparison exponent p must be >= 1, got {p}")));
    }
    if !(y0.is_finite() && y0 > 0.0) {
        return Err(Error::Domain(format!("comparison initial value must be > 0, got {y0}")));
    }
    if !(horizon.is_finite() && horizon > 0.0) || steps == 0 {
        return Err(Error::Domain(format!("invalid grid: T = {horizon}, N = {steps}")));
    }
    let dt = horizon / steps as f64;
    let mut clamps = 0;
    let values = abm(
        alpha.value(),
        dt,
        steps,
        &[y0],
        |y, out| out[0] = a * y[0].powf(p),
        Some(&mut clamps),
    )?;
    Ok(ComparisonSolution {
        trajectory: SampledTrajectory::new(dt, 1, values)?,
        clamp_events: clamps,
    })
}

fn check_state(x: &[f64], node: usize) -> Result<()> {
    if let Some(v) = x.iter().find(|v| !v.is_finite() || v.abs() > BLOWUP_THRESHOLD) {
        return Err(Error::Divergence {
            last_valid: node - 1,
            reason: format!("state component {v} at node {node}"),
        });
    }
    Ok(())
}

fn clamp(x: &mut [f64], counter: &mut Option<&mut usize>) {
    if let Some(c) = counter {
        for v in x.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
                **c += 1;
            }
        }
    }
}

fn abm(
    alpha: f64,
    dt: f64,
    steps: usize,
    x0: &[f64],
    eval: impl Fn(&[f64], &mut [f64]),
    mut clamp_counter: Option<&mut usize>,
) -> Result<Vec<f64>> {
    let d = x0.len();
    let trap = TrapezoidWeights::new(alpha, steps);
    let rect_w: Vec<f64> = (0..steps).map(|m| rect(alpha, m)).collect();
    let pred_scale = dt.powf(alpha) / gamma_fn(alpha + 1.0)?;
    let corr_scale = dt.powf(alpha) / gamma_fn(alpha + 2.0)?;

    let mut x = vec![0.0; (steps + 1) * d];
    let mut fx = vec![0.0; (steps + 1) * d];
    x[..d].copy_from_slice(x0);
    eval(x0, &mut fx[..d]);
    check_state(&fx[..d], 1).map_err(|_| Error::Divergence {
        last_valid: 0,
        reason: "field is not finite at the initial point".into(),
    })?;

    let mut pred_sum = vec![0.0; d];
    let mut corr_sum = vec![0.0; d];
    let mut xp = vec![0.0; d];
    let mut fp = vec![0.0; d];
    for n in 1..=steps {
        // history j = 0..n-1 for the step to node n
        for c in 0..d {
            pred_sum[c] = 0.0;
            corr_sum[c] = trap.start[n] * fx[c];
        }
        for j in 0..n {
            let b = rect_w[n - 1 - j];
            let a = if j == 0 { 0.0 } else { trap.hat[n - j] };
            let fj = &fx[j * d..(j + 1) * d];
            for c in 0..d {
                pred_sum[c] += b * fj[c];
                corr_sum[c] += a * fj[c];
            }
        }
        for c in 0..d {
            xp[c] = x0[c] + pred_scale * pred_sum[c];
        }
        clamp(&mut xp, &mut clamp_counter);
        check_state(&xp, n)?;
        eval(&xp, &mut fp);
        let xn = &mut x[n * d..(n + 1) * d];
        for c in 0..d {
            xn[c] = x0[c] + corr_scale * (corr_sum[c] + fp[c]);
        }
        clamp(xn, &mut clamp_counter);
        check_state(xn, n)?;
        let fn_ = &mut fx[n * d..(n + 1) * d];
        eval(&x[n * d..(n + 1) * d], fn_);
        check_state(fn_, n)?;
    }
    Ok(x)
}
