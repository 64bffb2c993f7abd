//! Cellwise linear scaling limiter that keeps the water height
//! non-negative at a set of check points without changing cell averages.

use crate::error::{Error, Result};

/// Means below `-MEAN_CLAMP` abort the run; smaller negative means are
/// rounding noise and are reset to zero.
pub const MEAN_CLAMP: f64 = 1e-13;

/// Scaling factor `theta = min(1, mean / (mean - min))` for a cell whose
/// minimum over the check points is `min`.
pub fn scaling_factor(mean: f64, min: f64) -> f64 {
    if min >= 0.0 {
        1.0
    } else {
        (mean / (mean - min)).clamp(0.0, 1.0)
    }
}

/// Limits one cell in place.
///
/// `h` holds the modes of the water height, `others` the modes of the
/// remaining conserved variables back to back (each `h.len()` long).
/// `check_table` holds one row of basis values per check point and
/// `mean_factor` converts mode 0 into the cell average.
pub fn limit_cell(
    h: &mut [f64],
    others: &mut [&mut [f64]],
    check_table: &[f64],
    mean_factor: f64,
    cell: usize,
) -> Result<()> {
    let nm = h.len();
    let mut mean = h[0] * mean_factor;
    if mean < -MEAN_CLAMP {
        return Err(Error::NegativeMean { cell, mean });
    }
    if mean < 0.0 {
        h[0] = 0.0;
        mean = 0.0;
    }
    let eval_min = |coeffs: &[f64]| {
        check_table
            .chunks(nm)
            .map(|row| row.iter().zip(coeffs).map(|(p, c)| p * c).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    };
    let min = eval_min(h);
    if min >= 0.0 {
        return Ok(());
    }
    // The scaled polynomial vanishes at its minimum only in exact
    // arithmetic; shrink theta until the evaluated values are non-negative,
    // so that limited states pass the same test and the limiter is
    // idempotent.
    let mut theta = scaling_factor(mean, min);
    let mut scaled = h.to_vec();
    let mut shrink = 16.0 * f64::EPSILON;
    loop {
        for (s, c) in scaled.iter_mut().zip(h.iter()).skip(1) {
            *s = theta * c;
        }
        if theta == 0.0 || eval_min(&scaled) >= 0.0 {
            break;
        }
        theta = if shrink < 1e-3 { theta * (1.0 - shrink) } else { 0.0 };
        shrink *= 2.0;
    }
    h.copy_from_slice(&scaled);
    for block in others.iter_mut() {
        for var in block.chunks_mut(nm) {
            var[1..].iter_mut().for_each(|c| *c *= theta);
        }
    }
    Ok(())
}
