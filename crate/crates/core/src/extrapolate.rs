//! Richardson extrapolation to `t -> 0` through Neville's scheme.

use crate::error::{Error, Result};

/// Differences below this (relative to the data scale) count as converged.
const NOISE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolation {
    pub value: f64,
    /// `|T_j - T_{j-1}|` between successive diagonal estimates.
    pub residuals: Vec<f64>,
}

/// Polynomial extrapolation of `values(t)` to `t = 0`.
///
/// `t` must be strictly decreasing and positive. Fails with
/// [`Error::NonConvergence`] when the last three residuals do not
/// decrease.
pub fn richardson_to_zero(t: &[f64], values: &[f64]) -> Result<Extrapolation> {
    if t.len() != values.len() || t.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need matching abscissae and values, got {} and {}",
            t.len(),
            values.len()
        )));
    }
    if t.windows(2).any(|w| !(w[1] < w[0])) || t.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput("abscissae must be positive and strictly decreasing".into()));
    }
    let scale = values.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    let floor = NOISE_FLOOR * scale;

    let n = t.len();
    let mut table = values.to_vec();
    let mut estimate = table[0];
    let mut residuals = Vec::with_capacity(n - 1);
    for level in 1..n {
        for i in 0..n - level {
            let (ti, tj) = (t[i], t[i + level]);
            table[i] = table[i + 1] + (table[i + 1] - table[i]) * tj / (ti - tj);
        }
        residuals.push((table[0] - estimate).abs());
        estimate = table[0];
    }

    let tail = &residuals[residuals.len().saturating_sub(3)..];
    let clamp = |r: f64| if r <= floor { 0.0 } else { r };
    let monotone = tail.windows(2).all(|w| clamp(w[1]) <= clamp(w[0]));
    if !monotone || !estimate.is_finite() {
        return Err(Error::NonConvergence(residuals));
    }
    Ok(Extrapolation { value: estimate, residuals })
}
