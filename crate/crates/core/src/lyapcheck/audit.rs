use crate::error::{Error, Result};
use crate::fdesolve::VectorField;
use crate::fracops::{caputo_derivative, FractionalOrder, SampledTrajectory};

use super::candidate::LyapunovCandidate;

/// Constant `A` of [`audit_tolerance`].
pub const AUDIT_TOLERANCE_COEFF: f64 = 1e-3;
/// Constant `B` of [`comparison_tolerance`].
pub const COMPARISON_TOLERANCE_COEFF: f64 = 1e-2;

/// Upper bound allowed for the margin: `A·dt^{min(α, 1−α)}`.
pub fn audit_tolerance(alpha: FractionalOrder, dt: f64) -> f64 {
    let a = alpha.value();
    AUDIT_TOLERANCE_COEFF * dt.powf(a.min(1.0 - a))
}

/// Allowed excess of `V(φ)` over `Φ`: `B·dt^{1+α}`.
pub fn comparison_tolerance(alpha: FractionalOrder, dt: f64) -> f64 {
    COMPARISON_TOLERANCE_COEFF * dt.powf(1.0 + alpha.value())
}

/// Where `D^α u` comes from in [`audit_inequality`].
#[derive(Clone, Copy)]
pub enum DerivativeSource<'a> {
    /// `caputo_derivative(u)`.
    Numerical,
    /// `f(u(t))`, valid when `u` solves `D^α u = f(u)`.
    Field(&'a dyn VectorField),
}

#[derive(Debug, Clone)]
pub struct InequalityAudit {
    /// `V(u(t_k))`.
    pub v: Vec<f64>,
    /// `D^α[V∘u](t_k)`.
    pub caputo_v: Vec<f64>,
    /// `⟨∇V(u(t_k)), D^α u(t_k)⟩`.
    pub rhs_inner: Vec<f64>,
    /// `caputo_v − rhs_inner`; non-positive in the continuum.
    pub margin: Vec<f64>,
    /// Largest margin over nodes `k >= 1`.
    pub max_margin: f64,
    /// Largest `|margin|` over all nodes.
    pub max_abs_margin: f64,
    /// Margin at `t = 0`. Both sides there come from extrapolated limits,
    /// so this value measures extrapolation error (the continuum margin at 0
    /// is exactly 0) and is kept out of `max_margin`.
    pub node0_margin: f64,
}

/// Margin `D^α[V∘u] − ⟨∇V(u), D^α u⟩` at every node.
///
/// `u` needs at least 4 steps.
pub fn audit_inequality(
    u: &SampledTrajectory,
    v: &LyapunovCandidate,
    alpha: FractionalOrder,
    source: DerivativeSource<'_>,
) -> Result<InequalityAudit> {
    if v.dim() != u.dim() {
        return Err(Error::Shape(format!(
            "candidate has dimension {}, trajectory has {}",
            v.dim(),
            u.dim()
        )));
    }
    let v_traj = u.map_scalar(|x| v.evaluate(x))?;
    let caputo_v = caputo_derivative(&v_traj, alpha)?.into_values();
    let du = match source {
        DerivativeSource::Numerical => caputo_derivative(u, alpha)?.into_values(),
        DerivativeSource::Field(f) => {
            if f.dim() != u.dim() {
                return Err(Error::Shape(format!(
                    "field has dimension {}, trajectory has {}",
                    f.dim(),
                    u.dim()
                )));
            }
            u.nodes().flat_map(|x| f.eval(x)).collect()
        }
    };
    let d = u.dim();
    let rhs_inner: Vec<f64> = u
        .nodes()
        .enumerate()
        .map(|(k, x)| v.gradient(x).iter().zip(&du[k * d..(k + 1) * d]).map(|(g, y)| g * y).sum())
        .collect();
    let margin: Vec<f64> = caputo_v.iter().zip(&rhs_inner).map(|(l, r)| l - r).collect();
    let max_margin = margin[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let max_abs_margin = margin.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(InequalityAudit {
        v: v_traj.into_values(),
        caputo_v,
        rhs_inner,
        max_margin,
        max_abs_margin,
        node0_margin: margin[0],
        margin,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonAudit {
    pub passed: bool,
    /// `max_k (vtraj(k) − phi(k))`; negative when the ordering holds strictly.
    pub worst_gap: f64,
    pub worst_node: usize,
    pub tolerance: f64,
}

/// Checks `vtraj(k) <= phi(k) + tolerance` at every node.
pub fn audit_comparison(vtraj: &SampledTrajectory, phi: &SampledTrajectory, tolerance: f64) -> Result<ComparisonAudit> {
    vtraj.check_same_grid(phi)?;
    if vtraj.dim() != 1 {
        return Err(Error::Shape("comparison audit needs scalar trajectories".into()));
    }
    let (worst_node, worst_gap) = vtraj
        .values()
        .iter()
        .zip(phi.values())
        .map(|(v, p)| v - p)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bk, bg), (k, g)| if g > bg { (k, g) } else { (bk, bg) });
    Ok(ComparisonAudit { passed: worst_gap <= tolerance, worst_gap, worst_node, tolerance })
}

/// `x(t) = 1/(1+t) + sin t + 1`.
pub fn remark4_function(t: f64) -> f64 {
    1.0 / (1.0 + t) + t.sin() + 1.0
}

#[derive(Debug, Clone)]
pub struct Remark4Report {
    pub trajectory: SampledTrajectory,
    pub min_value: f64,
    pub max_value: f64,
    /// `(k, t_k, x(t_k))` for `t_k = −π/2 + 2kπ <= T`, `k >= 1`.
    pub dips: Vec<(usize, f64, f64)>,
}

impl Remark4Report {
    pub fn positive(&self) -> bool {
        self.min_value > 0.0
    }

    /// The function keeps returning near 2, so it has no limit.
    pub fn non_convergent(&self) -> bool {
        self.max_value >= 1.9
    }
}

/// Samples the function on `[0, T]` and reports positivity, the dips toward
/// 0 and the recurring maxima.
pub fn remark4_fixture(horizon: f64, steps: usize) -> Result<Remark4Report> {
    if !(horizon >= 110.0 && horizon.is_finite()) {
        return Err(Error::Domain(format!("fixture needs T >= 110, got {horizon}")));
    }
    let trajectory = SampledTrajectory::from_scalar_fn(horizon, steps, remark4_function)?;
    let min_value = trajectory.values().iter().copied().fold(f64::INFINITY, f64::min);
    let max_value = trajectory.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dips = (1..)
        .map(|k| (k, -std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64))
        .take_while(|&(_, t)| t <= horizon)
        .map(|(k, t)| (k, t, remark4_function(t)))
        .collect();
    Ok(Remark4Report { trajectory, min_value, max_value, dips })
}
