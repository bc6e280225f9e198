//! Characteristic exponent of the Mathieu equation u'' + (a − 2q cos 2τ) u = 0.

use crate::error::{Error, Result};

/// Tolerance on β between successive truncation depths.
pub const BETA_TOL: f64 = 1e-10;

const MAX_DEPTH: usize = 1 << 12;

/// Lowest-order estimate β ≈ √(a + q²/2).
pub fn beta_lowest_order(a: f64, q: f64) -> f64 {
    (a + 0.5 * q * q).max(0.0).sqrt()
}

/// Continued fraction Σ_{k=depth..1} tail for one sign of the ±2k shifts.
fn tail(beta: f64, a: f64, q2: f64, depth: usize, sign: f64) -> f64 {
    let mut s = 0.0;
    for k in (1..=depth).rev() {
        let b = beta + sign * 2.0 * k as f64;
        let den = b * b - a - s;
        s = q2 / den;
    }
    s
}

/// Solves β² = a + CF₊(β) + CF₋(β) at a fixed depth.
fn beta_at_depth(a: f64, q: f64, depth: usize) -> Option<f64> {
    let q2 = q * q;
    let mut beta = beta_lowest_order(a, q).max(1e-6);
    for _ in 0..500 {
        let b2 = a + tail(beta, a, q2, depth, 1.0) + tail(beta, a, q2, depth, -1.0);
        if !b2.is_finite() || b2 <= 0.0 {
            return None;
        }
        let next = b2.sqrt();
        if (next - beta).abs() < 1e-15 {
            return Some(next);
        }
        // damped update keeps the iteration inside the basin near the band edge
        beta = 0.5 * (beta + next);
    }
    None
}

/// β(a, q) in the lowest stability region, by continued fractions with adaptive depth.
pub fn characteristic_exponent(a: f64, q: f64) -> Result<f64> {
    if !a.is_finite() || !q.is_finite() {
        return Err(Error::InvalidParameter(
            "Mathieu parameters must be finite".into(),
        ));
    }
    let unstable = || Error::Unstable { a, q };
    if q == 0.0 {
        return if a > 0.0 && a < 1.0 {
            Ok(a.sqrt())
        } else {
            Err(unstable())
        };
    }
    let mut depth = 4;
    let mut prev = beta_at_depth(a, q, depth).ok_or_else(unstable)?;
    loop {
        depth *= 2;
        let b = beta_at_depth(a, q, depth).ok_or_else(unstable)?;
        if (b - prev).abs() < BETA_TOL {
            if !(b > 0.0 && b < 1.0) {
                return Err(unstable());
            }
            return Ok(b);
        }
        if depth >= MAX_DEPTH {
            return Err(unstable());
        }
        prev = b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_limit() {
        assert!((characteristic_exponent(0.25, 0.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn small_q_matches_lowest_order() {
        let b = characteristic_exponent(0.0, 0.01).unwrap();
        let b0 = beta_lowest_order(0.0, 0.01);
        assert!((b / b0 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn q_028_reference_value() {
        // value from an independent numpy continued-fraction evaluation
        let b = characteristic_exponent(0.0, 0.28).unwrap();
        assert!((b - 0.201_160_7).abs() < 1e-6, "{b}");
    }

    #[test]
    fn outside_first_region_is_unstable() {
        assert!(characteristic_exponent(0.0, 0.95).is_err());
        assert!(characteristic_exponent(-0.2, 0.1).is_err());
    }
}
