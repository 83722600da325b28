use super::{CatalogError, Result};

/// Term cap of the Gauss series.
pub const MAX_TERMS: usize = 10_000;

/// Stop once the estimated tail falls below this fraction of the sum. Far
/// tighter than the `1e-12` the callers need, so the identities hold to
/// that level even at `z = 0.9` where the tail is ten times the last term.
const TAIL_RTOL: f64 = 1e-16;

/// Gauss hypergeometric series `₂F₁(a, b; c; z)` for `|z| < 1`.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_sym(a + b, a * b, c, z)
}

/// `₂F₁` in terms of `s = a + b` and `p = ab`, which stay real when `a`
/// and `b` are a complex-conjugate pair. `(a + k)(b + k) = k² + sk + p`.
pub(crate) fn hyp2f1_sym(s: f64, p: f64, c: f64, z: f64) -> Result<f64> {
    if !(z.abs() < 1.0) {
        return Err(CatalogError::InvalidParameter(format!("hyp2f1 needs |z| < 1, got z = {z}")));
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(CatalogError::InvalidParameter(format!("hyp2f1 needs c not a non-positive integer, got c = {c}")));
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = (kf * kf + s * kf + p) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        // once the ratios settle below 1 the tail is bounded geometrically
        let r = ratio.abs().max(z.abs());
        if r < 1.0 && term.abs() * r / (1.0 - r) <= TAIL_RTOL * sum.abs() {
            return Ok(sum);
        }
    }
    Err(CatalogError::NoConvergence { terms: MAX_TERMS })
}
