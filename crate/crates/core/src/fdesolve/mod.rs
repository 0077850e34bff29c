//! Solvers for `D^α x = f(x)` with polynomial `f`, the scalar comparison
//! equation `D^α y = A y^p`, and the radial Lipschitz extension of `f`.

mod field;
mod solver;

pub use field::{lipschitz_extension, LipschitzExtension, Term, VectorField, VectorFieldSpec};
pub use solver::{
    solve_abm, solve_scalar_comparison, ComparisonSolution, IVProblem, BLOWUP_THRESHOLD,
};
