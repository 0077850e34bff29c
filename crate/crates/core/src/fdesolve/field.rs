use std::fmt;

use crate::error::{Error, Result};

/// Right-hand side of an autonomous system `D^α x = f(x)`.
pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    /// Writes `f(x)` into `out`; both slices have length [`dim`](Self::dim).
    fn eval_into(&self, x: &[f64], out: &mut [f64]);

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(x, &mut out);
        out
    }
}

/// One monomial `coeff · Π x_j^{e_j}` contributing to component `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub target: usize,
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

impl Term {
    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.exponents
            .iter()
            .zip(x)
            .fold(self.coeff, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }
}

/// Polynomial vector field with `f(0) = 0`: every term has total degree at
/// least one.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldSpec {
    dim: usize,
    terms: Vec<Term>,
}

impl VectorFieldSpec {
    pub fn new(dim: usize, terms: Vec<Term>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Constraint("vector field dimension must be at least 1".into()));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.target >= dim {
                return Err(Error::Constraint(format!(
                    "term {i}: target component {} out of range for dimension {dim}",
                    t.target
                )));
            }
            if t.exponents.len() != dim {
                return Err(Error::Constraint(format!(
                    "term {i}: {} exponents given for dimension {dim}",
                    t.exponents.len()
                )));
            }
            if t.degree() == 0 {
                return Err(Error::Constraint(format!(
                    "term {i}: degree-0 monomial violates f(0) = 0"
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::Constraint(format!("term {i}: coefficient is not finite")));
            }
        }
        Ok(VectorFieldSpec { dim, terms })
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    /// `f(x) = M x` for a square matrix given by rows.
    pub fn linear(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut terms = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Shape(format!("matrix row {i} has {} entries, expected {dim}", row.len())));
            }
            for (j, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    let mut exponents = vec![0; dim];
                    exponents[j] = 1;
                    terms.push(Term { target: i, coeff: c, exponents });
                }
            }
        }
        Self::new(dim, terms)
    }

    /// `f_i(x) = coeff · x_i^power` in every component.
    pub fn diagonal_power(dim: usize, coeff: f64, power: u32) -> Result<Self> {
        let terms = (0..dim)
            .map(|i| {
                let mut exponents = vec![0; dim];
                exponents[i] = power;
                Term { target: i, coeff, exponents }
            })
            .collect();
        Self::new(dim, terms)
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Row-major `d×d` Jacobian at `x`.
    pub fn jacobian(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut jac = vec![0.0; d * d];
        for t in &self.terms {
            for j in 0..d {
                let e = t.exponents[j];
                if e == 0 {
                    continue;
                }
                let mut v = t.coeff * e as f64;
                for (k, (&ek, &xk)) in t.exponents.iter().zip(x).enumerate() {
                    let ek = if k == j { ek - 1 } else { ek };
                    v *= xk.powi(ek as i32);
                }
                jac[t.target * d + j] += v;
            }
        }
        jac
    }

    /// Lipschitz constant of `f` on the closed Euclidean ball of radius `r`.
    ///
    /// Each Jacobian entry is bounded by `Σ |c|·e_j·r^{deg−1}` over the
    /// contributing terms; the Frobenius norm of that bound matrix dominates
    /// the spectral norm of the Jacobian everywhere on the ball.
    pub fn lipschitz_bound_on(&self, r: f64) -> f64 {
        let d = self.dim;
        let mut bound = vec![0.0; d * d];
        for t in &self.terms {
            let scale = t.coeff.abs() * r.powi(t.degree() as i32 - 1);
            for (j, &e) in t.exponents.iter().enumerate() {
                bound[t.target * d + j] += scale * e as f64;
            }
        }
        bound.iter().map(|b| b * b).sum::<f64>().sqrt()
    }
}

impl VectorField for VectorFieldSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for t in &self.terms {
            out[t.target] += t.value(x);
        }
    }
}

impl fmt::Display for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "f{i} =")?;
            let mut any = false;
            for t in self.terms.iter().filter(|t| t.target == i) {
                write!(f, " {:+}", t.coeff)?;
                for (j, &e) in t.exponents.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => write!(f, "*x{j}")?,
                        _ => write!(f, "*x{j}^{e}")?,
                    }
                }
                any = true;
            }
            if !any {
                write!(f, " 0")?;
            }
        }
        Ok(())
    }
}

/// `F(x) = f(x)` on the ball of radius `r1` and `f(r1·x/‖x‖)` outside.
///
/// Radial projection onto the ball is non-expansive, so `F` is globally
/// Lipschitz with the constant of `f` on the ball (in particular within
/// `2L`), and bounded by the maximum of `‖f‖` on the ball.
#[derive(Debug, Clone)]
pub struct LipschitzExtension {
    field: VectorFieldSpec,
    r1: f64,
}

impl LipschitzExtension {
    pub fn radius(&self) -> f64 {
        self.r1
    }

    pub fn inner(&self) -> &VectorFieldSpec {
        &self.field
    }

    /// Global Lipschitz constant guaranteed for `F`.
    pub fn lipschitz_bound(&self) -> f64 {
        2.0 * self.field.lipschitz_bound_on(self.r1)
    }
}

pub fn lipschitz_extension(f: VectorFieldSpec, r1: f64) -> Result<LipschitzExtension> {
    if !(r1.is_finite() && r1 > 0.0) {
        return Err(Error::Domain(format!("extension radius must be positive, got {r1}")));
    }
    Ok(LipschitzExtension { field: f, r1 })
}

impl VectorField for LipschitzExtension {
    fn dim(&self) -> usize {
        self.field.dim
    }

    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= self.r1 {
            self.field.eval_into(x, out);
        } else {
            let s = self.r1 / norm;
            let projected: Vec<f64> = x.iter().map(|v| v * s).collect();
            self.field.eval_into(&projected, out);
        }
    }
}
