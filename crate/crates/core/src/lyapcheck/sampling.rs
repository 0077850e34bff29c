//! Deterministic point sets in a ball: shifted Halton directions and
//! log-spaced radial shells.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Number of radial shells; the innermost starts at `r·1e−6`.
pub const SHELLS: usize = 20;
const INNER_RATIO: f64 = 1e-6;
const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// `count` points in the closed ball of radius `r` in dimension `dim`.
///
/// Points are spread over [`SHELLS`] log-spaced shells between `r·1e−6` and
/// `r`; the first point of the innermost shell has norm exactly `r·1e−6`
/// and the first point of the outermost shell has norm `r` (up to rounding).
/// Coordinates are a Halton sequence with a Cranley-Patterson shift drawn
/// from `seed`.
pub fn ball_points(dim: usize, r: f64, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim == 0 || dim + 1 > PRIMES.len() {
        return Err(Error::Constraint(format!(
            "sampling supports dimensions 1..={}, got {dim}",
            PRIMES.len() - 1
        )));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Constraint(format!("ball radius must be positive, got {r}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..=dim).map(|_| rng.random::<f64>()).collect();
    let coord = |i: u64, c: usize| (radical_inverse(i, PRIMES[c]) + shift[c]).fract();

    let edge = |s: usize| r * INNER_RATIO.powf(1.0 - s as f64 / SHELLS as f64);
    let mut points = Vec::with_capacity(count);
    let mut index = 1u64;
    for k in 0..count {
        let shell = k % SHELLS;
        let first_in_shell = k < SHELLS;
        let dir = loop {
            let raw: Vec<f64> = (0..dim).map(|c| 2.0 * coord(index, c) - 1.0).collect();
            index += 1;
            let n = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1e-3 {
                break raw.into_iter().map(|v| v / n).collect::<Vec<_>>();
            }
        };
        let radius = if first_in_shell && shell == 0 {
            edge(0)
        } else if first_in_shell && shell == SHELLS - 1 {
            r
        } else {
            let u = coord(index, dim);
            edge(shell).powf(1.0 - u) * edge(shell + 1).powf(u)
        };
        points.push(dir.into_iter().map(|v| v * radius).collect());
    }
    Ok(points)
}
