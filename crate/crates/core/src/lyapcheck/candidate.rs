use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Lyapunov candidate with `V(0) = 0` and an exact gradient.
#[derive(Debug, Clone, PartialEq)]
pub enum LyapunovCandidate {
    /// `V(x) = xᵀPx` with `P` symmetric positive semi-definite (row-major).
    Quadratic { dim: usize, p: Vec<f64> },
    /// `V(x) = Σ w_i x_i^{e_i}` with `w_i > 0` and even `e_i >= 2`.
    EvenPowerSum { weights: Vec<f64>, exponents: Vec<u32> },
    /// `V(x) = ⟨w, x⟩`. Affine, so convex, but not sign-definite: only
    /// meaningful for the inequality audit, where it is the equality case.
    Linear { w: Vec<f64> },
}

/// Relative tolerance for symmetry and for the smallest eigenvalue of `P`.
const PSD_TOL: f64 = 1e-12;

impl LyapunovCandidate {
    /// Quadratic form from the rows of `P`; rejects non-symmetric or
    /// indefinite matrices.
    pub fn quadratic(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape("P must be a non-empty square matrix".into()));
        }
        let p: Vec<f64> = rows.iter().flatten().copied().collect();
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::Constraint("P has non-finite entries".into()));
        }
        let scale = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in 0..i {
                if (p[i * dim + j] - p[j * dim + i]).abs() > PSD_TOL * scale {
                    return Err(Error::Constraint(format!("P is not symmetric at ({i}, {j})")));
                }
            }
        }
        let min_eig = min_eigenvalue(dim, &p);
        if min_eig < -PSD_TOL * scale {
            return Err(Error::Constraint(format!(
                "P is not positive semi-definite (smallest eigenvalue {min_eig:e})"
            )));
        }
        Ok(LyapunovCandidate::Quadratic { dim, p })
    }

    /// `‖x‖²` in dimension `dim`.
    pub fn squared_norm(dim: usize) -> Self {
        let mut p = vec![0.0; dim * dim];
        for i in 0..dim {
            p[i * dim + i] = 1.0;
        }
        LyapunovCandidate::Quadratic { dim, p }
    }

    pub fn even_power_sum(weights: Vec<f64>, exponents: Vec<u32>) -> Result<Self> {
        if weights.is_empty() || weights.len() != exponents.len() {
            return Err(Error::Shape("one weight and one exponent per coordinate required".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::Constraint(format!("even-power weight must be positive, got {w}")));
        }
        if let Some(e) = exponents.iter().find(|e| **e < 2 || **e % 2 != 0) {
            return Err(Error::Constraint(format!("exponent {e} is not an even integer >= 2")));
        }
        Ok(LyapunovCandidate::EvenPowerSum { weights, exponents })
    }

    pub fn linear(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::Constraint("linear weights must be finite and non-empty".into()));
        }
        Ok(LyapunovCandidate::Linear { w })
    }

    pub fn dim(&self) -> usize {
        match self {
            LyapunovCandidate::Quadratic { dim, .. } => *dim,
            LyapunovCandidate::EvenPowerSum { weights, .. } => weights.len(),
            LyapunovCandidate::Linear { w } => w.len(),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            LyapunovCandidate::Quadratic { dim, p } => {
                let mut s = 0.0;
                for i in 0..*dim {
                    let row = &p[i * dim..(i + 1) * dim];
                    let px: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
                    s += x[i] * px;
                }
                s
            }
            LyapunovCandidate::EvenPowerSum { weights, exponents } => weights
                .iter()
                .zip(exponents)
                .zip(x)
                .map(|((w, &e), xi)| w * xi.powi(e as i32))
                .sum(),
            LyapunovCandidate::Linear { w } => w.iter().zip(x).map(|(a, b)| a * b).sum(),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        match self {
            LyapunovCandidate::Quadratic { dim, p } => (0..*dim)
                .map(|i| {
                    let row = &p[i * dim..(i + 1) * dim];
                    2.0 * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect(),
            LyapunovCandidate::EvenPowerSum { weights, exponents } => weights
                .iter()
                .zip(exponents)
                .zip(x)
                .map(|((w, &e), xi)| w * e as f64 * xi.powi(e as i32 - 1))
                .collect(),
            LyapunovCandidate::Linear { w } => w.clone(),
        }
    }

    /// `k·V` for `k > 0`.
    pub fn scaled(&self, k: f64) -> Self {
        match self {
            LyapunovCandidate::Quadratic { dim, p } => LyapunovCandidate::Quadratic {
                dim: *dim,
                p: p.iter().map(|v| k * v).collect(),
            },
            LyapunovCandidate::EvenPowerSum { weights, exponents } => LyapunovCandidate::EvenPowerSum {
                weights: weights.iter().map(|v| k * v).collect(),
                exponents: exponents.clone(),
            },
            LyapunovCandidate::Linear { w } => LyapunovCandidate::Linear {
                w: w.iter().map(|v| k * v).collect(),
            },
        }
    }
}

pub(crate) fn min_eigenvalue(dim: usize, sym: &[f64]) -> f64 {
    let m = DMatrix::from_row_slice(dim, dim, sym);
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

impl fmt::Display for LyapunovCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LyapunovCandidate::Quadratic { dim, p } => {
                write!(f, "quadratic P = [")?;
                for i in 0..*dim {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    let row: Vec<String> = p[i * dim..(i + 1) * dim].iter().map(|v| v.to_string()).collect();
                    write!(f, "{}", row.join(" "))?;
                }
                write!(f, "]")
            }
            LyapunovCandidate::EvenPowerSum { weights, exponents } => {
                let parts: Vec<String> = weights
                    .iter()
                    .zip(exponents)
                    .enumerate()
                    .map(|(i, (w, e))| format!("{w}*x{i}^{e}"))
                    .collect();
                write!(f, "even-power {}", parts.join(" + "))
            }
            LyapunovCandidate::Linear { w } => {
                let parts: Vec<String> = w.iter().map(|v| v.to_string()).collect();
                write!(f, "linear w = [{}]", parts.join(" "))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_indefinite_and_asymmetric() {
        assert!(LyapunovCandidate::quadratic(&[vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(LyapunovCandidate::quadratic(&[vec![1.0, 0.5], vec![0.0, 1.0]]).is_err());
        assert!(LyapunovCandidate::quadratic(&[vec![2.0, 1.0], vec![1.0, 2.0]]).is_ok());
        assert!(LyapunovCandidate::quadratic(&[vec![1.0, 1.0], vec![1.0, 1.0]]).is_ok());
    }

    #[test]
    fn rejects_odd_powers() {
        assert!(LyapunovCandidate::even_power_sum(vec![1.0], vec![3]).is_err());
        assert!(LyapunovCandidate::even_power_sum(vec![0.0], vec![4]).is_err());
    }

    #[test]
    fn values_and_gradients() {
        let v = LyapunovCandidate::quadratic(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(v.evaluate(&[1.0, -1.0]), 2.0);
        assert_eq!(v.gradient(&[1.0, 0.0]), vec![4.0, 2.0]);
        let e = LyapunovCandidate::even_power_sum(vec![1.0, 3.0], vec![4, 2]).unwrap();
        assert_eq!(e.evaluate(&[2.0, 1.0]), 19.0);
        assert_eq!(e.gradient(&[2.0, 1.0]), vec![32.0, 6.0]);
    }
}
