use crate::error::{Error, Result};

use super::special::gamma_fn;
use super::weights::{hyper_const, hyper_ramp, TrapezoidWeights};
use super::{FractionalOrder, SampledTrajectory};

/// Riemann-Liouville integral `I^α x` at every node.
///
/// The data are interpolated piecewise linearly and the kernel
/// `(t−τ)^{α−1}/Γ(α)` is integrated exactly on each cell, so the result is
/// exact for piecewise-linear input. Node 0 is 0.
pub fn rl_integral(x: &SampledTrajectory, alpha: FractionalOrder) -> Result<SampledTrajectory> {
    rl_integral_with_start(x, alpha, &[])
}

/// [`rl_integral`] with starting weights that make the rule exact for
/// `t^q`, `q ∈ singular_exponents`, in addition to piecewise-linear data.
///
/// Input that behaves like `c·t^q` near 0 with `0 < q < 1` (for example the
/// output of another fractional integral of order `q`) costs the plain rule
/// an `O(dt^{q+α})` error at the first nodes; the starting weights remove
/// that term. The weights act on nodes `0..=s+1` (`s` exponents) and are
/// fixed per target node, so the operator stays linear.
pub fn rl_integral_with_start(
    x: &SampledTrajectory,
    alpha: FractionalOrder,
    singular_exponents: &[f64],
) -> Result<SampledTrajectory> {
    let a = alpha.value();
    let n_max = x.steps();
    let dim = x.dim();
    let s = singular_exponents.len();
    if let Some(q) = singular_exponents.iter().find(|q| !(q.is_finite() && **q > 0.0)) {
        return Err(Error::Domain(format!("singular exponent must be positive, got {q}")));
    }
    if s > 0 && n_max < s + 1 {
        return Err(Error::InvalidTrajectory(format!(
            "{s} starting exponents need at least {} steps, got {n_max}",
            s + 1
        )));
    }
    let w = TrapezoidWeights::new(a, n_max);
    let g2 = gamma_fn(a + 2.0)?;
    let dt_a = x.dt().powf(a);
    let start = StartingWeights::new(a, singular_exponents, &w, g2, n_max)?;
    let mut out = vec![0.0; x.values().len()];
    for n in 1..=n_max {
        let acc = &mut out[n * dim..(n + 1) * dim];
        for (o, (x0, xn)) in acc.iter_mut().zip(x.node(0).iter().zip(x.node(n))) {
            *o = w.start[n] * x0 + xn;
        }
        for j in 1..n {
            let wj = w.hat[n - j];
            for (o, xj) in acc.iter_mut().zip(x.node(j)) {
                *o += wj * xj;
            }
        }
        for o in acc.iter_mut() {
            *o /= g2;
        }
        if let Some(start) = &start {
            for (j, omega) in start.row(n).iter().enumerate() {
                for (o, xj) in acc.iter_mut().zip(x.node(j)) {
                    *o += omega * xj;
                }
            }
        }
        for o in acc.iter_mut() {
            *o *= dt_a;
        }
    }
    SampledTrajectory::new(x.dt(), dim, out)
}

/// Correction weights `ω[n][j]`, `j = 0..=s+1`, in units where `dt = 1`.
struct StartingWeights {
    width: usize,
    rows: Vec<f64>,
}

impl StartingWeights {
    fn new(
        alpha: f64,
        exponents: &[f64],
        w: &TrapezoidWeights,
        g2: f64,
        n_max: usize,
    ) -> Result<Option<Self>> {
        if exponents.is_empty() {
            return Ok(None);
        }
        let width = exponents.len() + 2;
        // Basis 1, t, t^q on nodes 0..width; the plain rule is already exact on
        // 1 and t, so their rows of the right-hand side stay zero.
        let basis = |row: usize, j: usize| -> f64 {
            match row {
                0 => 1.0,
                1 => j as f64,
                r => (j as f64).powf(exponents[r - 2]),
            }
        };
        let m = nalgebra::DMatrix::from_fn(width, width, basis);
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(Error::Domain(format!(
                "starting exponents {exponents:?} give a singular system"
            )));
        }
        let exact_coeff: Vec<f64> = exponents
            .iter()
            .map(|&q| Ok(gamma_fn(q + 1.0)? / gamma_fn(q + alpha + 1.0)?))
            .collect::<Result<_>>()?;
        let mut rows = vec![0.0; (n_max + 1) * width];
        let mut rhs = nalgebra::DVector::zeros(width);
        for n in 1..=n_max {
            for (r, &q) in exponents.iter().enumerate() {
                // plain rule applied to j^q (the j = 0 term vanishes)
                let mut plain = (n as f64).powf(q);
                for j in 1..n {
                    plain += w.hat[n - j] * (j as f64).powf(q);
                }
                plain /= g2;
                rhs[r + 2] = exact_coeff[r] * (n as f64).powf(q + alpha) - plain;
            }
            let sol = lu.solve(&rhs).expect("checked invertible");
            rows[n * width..(n + 1) * width].copy_from_slice(sol.as_slice());
        }
        Ok(Some(StartingWeights { width, rows }))
    }

    fn row(&self, n: usize) -> &[f64] {
        &self.rows[n * self.width..(n + 1) * self.width]
    }
}

/// Estimate of `γ = lim_{t→0} (v(t) − v(0)) / t^α`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaLimit {
    pub gamma: Vec<f64>,
    /// `Γ(α+1)·γ`, the Caputo derivative at `t = 0`.
    pub caputo_at_zero: Vec<f64>,
    /// Disagreement between the extrapolations started at `dt` and at `2·dt`
    /// (max over components).
    pub stderr_estimate: f64,
    /// False when that disagreement exceeds a tenth of the spread of the raw
    /// quotients `(v(t) − v(0))/t^α`, or a value is not finite.
    pub reliable: bool,
}

/// Exponents `q` of the expansion `(v(t) − v(0))/t^α = γ + Σ c_q t^q`
/// eliminated by the extrapolation, `count` of them.
///
/// The first choices are the leading corrections of the three shapes seen in
/// practice: `α` (solutions of Caputo equations, `t^{2α}` terms), `1 − α`
/// (components that are C¹ at 0) and `1` (`x0 + I^α ψ` with smooth `ψ`).
/// Coincident values are skipped and the rest is filled from the lattice
/// `(i−1)α + k`.
fn richardson_exponents(alpha: f64, count: usize) -> Vec<f64> {
    let mut lattice: Vec<f64> = (0..=6)
        .flat_map(|i| (0..=4).map(move |k| (i, k)))
        .filter(|&(i, k)| !(i <= 1 && k == 0))
        .map(|(i, k)| (i as f64 - 1.0) * alpha + k as f64)
        .filter(|q| *q > 1e-9)
        .collect();
    lattice.sort_by(f64::total_cmp);
    let mut chosen: Vec<f64> = Vec::with_capacity(count);
    for q in [alpha, 1.0 - alpha, 1.0].into_iter().chain(lattice) {
        if chosen.len() == count {
            break;
        }
        if chosen.iter().all(|c| (c - q).abs() > 1e-9) {
            chosen.push(q);
        }
    }
    chosen
}

/// Richardson table for component `c` over the nodes `2^(shift+i)`,
/// `i = 0..levels`. Returns the extrapolated value and the raw quotients.
fn extrapolate(
    v: &SampledTrajectory,
    c: usize,
    alpha: f64,
    shift: usize,
    exponents: &[f64],
) -> (f64, Vec<f64>) {
    let v0 = v.node(0)[c];
    let raw: Vec<f64> = (0..=exponents.len())
        .map(|i| {
            let k = 1usize << (shift + i);
            (v.node(k)[c] - v0) / v.time(k).powf(alpha)
        })
        .collect();
    let mut col = raw.clone();
    for &q in exponents {
        let factor = 1.0 / (2f64.powf(q) - 1.0);
        col = col.windows(2).map(|w| w[0] + (w[0] - w[1]) * factor).collect();
    }
    (col[0], raw)
}

fn estimate_gamma(v: &SampledTrajectory, alpha: f64, max_levels: usize) -> GammaLimit {
    let dim = v.dim();
    let n = v.steps();
    let levels = (0..max_levels).take_while(|&i| (1usize << i) <= n).count();
    debug_assert!(levels >= 2);
    let exponents = richardson_exponents(alpha, levels - 1);
    // Second window starting at 2·dt, as long as the grid allows.
    let shifted_levels = (0..max_levels).take_while(|&i| (2usize << i) <= n).count();
    let shifted_exponents = richardson_exponents(alpha, shifted_levels.saturating_sub(1));

    let mut gamma = vec![0.0; dim];
    let mut spread = 0.0f64;
    let mut reliable = true;
    for c in 0..dim {
        let (value, raw) = extrapolate(v, c, alpha, 0, &exponents);
        gamma[c] = value;
        if shifted_levels >= 2 {
            let (other, _) = extrapolate(v, c, alpha, 1, &shifted_exponents);
            let gap = (value - other).abs();
            let raw_max = raw.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));
            let raw_min = raw.iter().fold(f64::INFINITY, |a, b| a.min(*b));
            let floor = 1e-12 * raw_max.abs().max(raw_min.abs());
            if !(gap <= 0.1 * (raw_max - raw_min) + floor) {
                reliable = false;
            }
            spread = spread.max(gap);
        }
        if !value.is_finite() {
            reliable = false;
        }
    }
    let g1 = gamma_fn(alpha + 1.0).expect("alpha + 1 is positive");
    GammaLimit {
        caputo_at_zero: gamma.iter().map(|g| g1 * g).collect(),
        gamma,
        stderr_estimate: spread,
        reliable,
    }
}

/// Richardson extrapolation of `(v(t) − v(0))/t^α` from `t = dt, 2dt, 4dt, 8dt`.
///
/// The same table started at `2dt` gives a second estimate; their gap is the
/// error estimate.
/// A table that fails to settle is reported through
/// [`GammaLimit::reliable`] rather than as an error.
pub fn gamma_limit(v: &SampledTrajectory, alpha: FractionalOrder) -> Result<GammaLimit> {
    if v.steps() < 8 {
        return Err(Error::InvalidTrajectory(format!(
            "gamma_limit needs at least 8 steps, got {}",
            v.steps()
        )));
    }
    Ok(estimate_gamma(v, alpha.value(), 4))
}

/// Caputo derivative `ᶜD^α v` at every node.
///
/// The singular `γ t^α` part of `v` (with `γ` from [`gamma_limit`]) is
/// differentiated exactly; the remainder `w = v − v(0) − γ t^α` goes through
///
/// ```text
/// ᶜD^α w(t) = w(t) / (Γ(1−α) t^α) + α/Γ(1−α) ∫₀ᵗ (w(t) − w(τ)) / (t−τ)^{α+1} dτ
/// ```
///
/// with `w` interpolated piecewise linearly and the hypersingular kernel
/// integrated exactly on every cell. On the cell ending at `t` the integrand
/// reduces to the interpolant's slope times `(t−τ)^{-α}`. Node 0 is
/// `Γ(α+1)·γ`.
pub fn caputo_derivative(v: &SampledTrajectory, alpha: FractionalOrder) -> Result<SampledTrajectory> {
    if v.steps() < 4 {
        return Err(Error::InvalidTrajectory(format!(
            "caputo_derivative needs at least 4 steps, got {}",
            v.steps()
        )));
    }
    let a = alpha.value();
    let dim = v.dim();
    let n_max = v.steps();
    let dt = v.dt();
    let limit = estimate_gamma(v, a, 4);

    let t_a: Vec<f64> = (0..=n_max).map(|k| v.time(k).powf(a)).collect();
    let hc: Vec<f64> = (0..n_max).map(|k| if k == 0 { 0.0 } else { hyper_const(a, k) }).collect();
    let hr: Vec<f64> = (0..n_max).map(|k| if k == 0 { 0.0 } else { hyper_ramp(a, k) }).collect();
    let g1m = gamma_fn(1.0 - a)?;
    let local_scale = 1.0 / g1m;
    let integral_scale = a / g1m * dt.powf(-a);
    let diag = 1.0 / (1.0 - a);

    let mut out = vec![0.0; v.values().len()];
    out[..dim].copy_from_slice(&limit.caputo_at_zero);
    for c in 0..dim {
        // w = v − v(0) − γ t^α for this component
        let v0 = v.node(0)[c];
        let w: Vec<f64> = (0..=n_max)
            .map(|k| if k == 0 { 0.0 } else { v.node(k)[c] - v0 - limit.gamma[c] * t_a[k] })
            .collect();
        for n in 1..=n_max {
            let wn = w[n];
            let mut acc = (wn - w[n - 1]) * diag;
            // cells [t_{n−k−1}, t_{n−k}] for k = 1..n−1
            for ((h, r), cell) in hc[1..n].iter().zip(&hr[1..n]).zip(w[..n].windows(2).rev()) {
                let (left, right) = (cell[0], cell[1]);
                acc += (wn - right) * h - (left - right) * r;
            }
            out[n * dim + c] = limit.caputo_at_zero[c] + wn * local_scale / t_a[n] + integral_scale * acc;
        }
    }
    SampledTrajectory::new(dt, dim, out)
}
