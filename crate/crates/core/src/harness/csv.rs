use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::fracops::SampledTrajectory;
use crate::lyapcheck::InequalityAudit;

/// Writes `t,x_0,...,x_{d-1},V,caputoV,rhs_inner,margin`, one row per node.
///
/// Numbers use the shortest representation that parses back to the same
/// `f64`, so equal runs give byte-identical files.
pub fn emit_csv(trajectory: &SampledTrajectory, audit: &InequalityAudit, path: &Path) -> Result<()> {
    let n = trajectory.len();
    for (name, col) in [
        ("V", &audit.v),
        ("caputoV", &audit.caputo_v),
        ("rhs_inner", &audit.rhs_inner),
        ("margin", &audit.margin),
    ] {
        if col.len() != n {
            return Err(Error::Shape(format!("column {name} has {} rows, trajectory has {n}", col.len())));
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_rows(&mut w, trajectory, audit).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_rows(w: &mut impl Write, trajectory: &SampledTrajectory, audit: &InequalityAudit) -> std::io::Result<()> {
    write!(w, "t")?;
    for i in 0..trajectory.dim() {
        write!(w, ",x_{i}")?;
    }
    writeln!(w, ",V,caputoV,rhs_inner,margin")?;
    for (k, x) in trajectory.nodes().enumerate() {
        write!(w, "{:?}", trajectory.time(k))?;
        for v in x {
            write!(w, ",{v:?}")?;
        }
        writeln!(
            w,
            ",{:?},{:?},{:?},{:?}",
            audit.v[k], audit.caputo_v[k], audit.rhs_inner[k], audit.margin[k]
        )?;
    }
    Ok(())
}
