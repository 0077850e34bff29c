use crate::error::{Error, Result};

/// Values of a `dim`-dimensional function on the uniform grid `t_k = k * dt`,
/// `k = 0..=n`.
///
/// Node values are stored row-major: node `k` occupies
/// `values[k * dim..(k + 1) * dim]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory {
    dt: f64,
    dim: usize,
    values: Vec<f64>,
}

impl SampledTrajectory {
    pub fn new(dt: f64, dim: usize, values: Vec<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTrajectory(format!(
                "time step must be positive and finite, got {dt}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidTrajectory("dimension must be >= 1".into()));
        }
        if values.len() % dim != 0 {
            return Err(Error::InvalidTrajectory(format!(
                "{} values do not split into nodes of dimension {dim}",
                values.len()
            )));
        }
        if values.len() / dim < 2 {
            return Err(Error::InvalidTrajectory(
                "a trajectory needs at least two nodes".into(),
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidTrajectory(format!(
                "non-finite value at node {}",
                pos / dim
            )));
        }
        Ok(SampledTrajectory { dt, dim, values })
    }

    /// Scalar trajectory from a slice of node values.
    pub fn scalar(dt: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(dt, 1, values)
    }

    /// Samples `f` at `t_k = k * horizon / steps` for `k = 0..=steps`.
    pub fn from_fn<F>(horizon: f64, steps: usize, dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64, &mut [f64]),
    {
        if steps == 0 {
            return Err(Error::InvalidTrajectory("steps must be >= 1".into()));
        }
        let dt = horizon / steps as f64;
        let mut values = vec![0.0; (steps + 1) * dim];
        for (k, node) in values.chunks_exact_mut(dim.max(1)).enumerate() {
            f(k as f64 * dt, node);
        }
        Self::new(dt, dim, values)
    }

    /// Scalar convenience wrapper around [`SampledTrajectory::from_fn`].
    pub fn from_scalar_fn<F>(horizon: f64, steps: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        Self::from_fn(horizon, steps, 1, |t, out| out[0] = f(t))
    }

    /// Constant trajectory equal to `value` at every node.
    pub fn constant(dt: f64, steps: usize, value: &[f64]) -> Result<Self> {
        let values = value
            .iter()
            .copied()
            .cycle()
            .take(value.len() * (steps + 1))
            .collect();
        Self::new(dt, value.len(), values)
    }

    #[inline]
    pub fn dt(&self) -> f64 {
        self.dt
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of steps `N`; the trajectory has `N + 1` nodes.
    #[inline]
    pub fn steps(&self) -> usize {
        self.values.len() / self.dim - 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.steps() + 1
    }

    /// Always false: a valid trajectory has at least two nodes.
    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.time(self.steps())
    }

    #[inline]
    pub fn node(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values of coordinate `i` at every node.
    pub fn component(&self, i: usize) -> Vec<f64> {
        assert!(i < self.dim, "component {i} out of range for dim {}", self.dim);
        self.values.iter().skip(i).step_by(self.dim).copied().collect()
    }

    /// Scalar trajectory obtained by applying `g` to every node.
    pub fn map_scalar<G>(&self, g: G) -> Result<Self>
    where
        G: Fn(&[f64]) -> f64,
    {
        Self::scalar(self.dt, self.nodes().map(g).collect())
    }

    /// `a * self + b * other`, node by node.
    pub fn lin_comb(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::new(self.dt, self.dim, values)
    }

    /// Adds `offset` to every node.
    pub fn shifted(&self, offset: &[f64]) -> Result<Self> {
        if offset.len() != self.dim {
            return Err(Error::Shape(format!(
                "offset of length {} for trajectory of dimension {}",
                offset.len(),
                self.dim
            )));
        }
        let mut values = self.values.clone();
        for node in values.chunks_exact_mut(self.dim) {
            for (v, o) in node.iter_mut().zip(offset) {
                *v += o;
            }
        }
        Self::new(self.dt, self.dim, values)
    }

    /// Largest absolute difference between corresponding values.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max))
    }

    /// Errors unless `other` has the same step, length and dimension.
    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim || self.values.len() != other.values.len() {
            return Err(Error::Shape(format!(
                "trajectory shapes differ: {}x{} vs {}x{}",
                self.len(),
                self.dim,
                other.len(),
                other.dim
            )));
        }
        if self.dt != other.dt {
            return Err(Error::Shape(format!(
                "time steps differ: {} vs {}",
                self.dt, other.dt
            )));
        }
        Ok(())
    }

    /// Same grid and length, possibly different dimension.
    pub fn check_same_time_grid(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() || self.dt != other.dt {
            return Err(Error::Shape(format!(
                "time grids differ: {} nodes at dt={} vs {} nodes at dt={}",
                self.len(),
                self.dt,
                other.len(),
                other.dt
            )));
        }
        Ok(())
    }
}
