use super::{NumericsError, Result};

const MAX_DEPTH: u32 = 50;
const DEFAULT_BUDGET: usize = 4_000_000;
const INITIAL_PANELS: usize = 16;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance
/// `tol`. The interval is first cut into a few panels so that integrands
/// vanishing at the three initial nodes are not mistaken for zero.
pub fn quad(f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    quad_with_budget(f, a, b, tol, DEFAULT_BUDGET)
}

/// As [`quad`], failing with `MaxDepth` after `budget` integrand evaluations.
pub fn quad_with_budget(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64, budget: usize) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut q = Simpson { f: &mut f, evals: 0, budget };
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut total = 0.0;
    let mut left = a;
    let mut f_left = q.eval(a)?;
    for i in 1..=INITIAL_PANELS {
        let right = if i == INITIAL_PANELS { b } else { a + width * i as f64 };
        let mid = 0.5 * (left + right);
        let f_mid = q.eval(mid)?;
        let f_right = q.eval(right)?;
        let whole = (right - left) / 6.0 * (f_left + 4.0 * f_mid + f_right);
        total += q.refine(left, right, f_left, f_mid, f_right, whole, tol / INITIAL_PANELS as f64, 0)?;
        left = right;
        f_left = f_right;
    }
    Ok(total)
}

struct Simpson<'f, F> {
    f: &'f mut F,
    evals: usize,
    budget: usize,
}

impl<F: FnMut(f64) -> f64> Simpson<'_, F> {
    fn eval(&mut self, x: f64) -> Result<f64> {
        self.evals += 1;
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(NumericsError::NonFiniteIntegrand { x })
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = self.eval(lm)?;
        let frm = self.eval(rm)?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol || (m - a).abs() <= f64::EPSILON * m.abs().max(1.0) {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= MAX_DEPTH || self.evals >= self.budget {
            return Err(NumericsError::MaxDepth { a, b });
        }
        let l = self.refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
        let r = self.refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
        Ok(l + r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sine_over_half_period() {
        assert!((quad(f64::sin, 0.0, PI, 1e-12).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn square_on_unit_interval() {
        assert!((quad(|x| x * x, 0.0, 1.0, 1e-12).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let fwd = quad(f64::exp, 0.0, 1.0, 1e-12).unwrap();
        let rev = quad(f64::exp, 1.0, 0.0, 1e-12).unwrap();
        assert!((fwd + rev).abs() < 1e-14);
    }

    #[test]
    fn integrand_vanishing_at_coarse_nodes() {
        // sin(16x)^2 is zero at every node of a 16-panel split of [0, pi]
        let got = quad(|x| (8.0 * x).sin().powi(2), 0.0, PI, 1e-11).unwrap();
        assert!((got - PI / 2.0).abs() < 1e-10, "{got}");
    }

    #[test]
    fn non_finite_integrand() {
        assert!(matches!(
            quad(|x| 1.0 / x, 0.0, 1.0, 1e-10),
            Err(NumericsError::NonFiniteIntegrand { .. })
        ));
    }

    #[test]
    fn unresolvable_integrand_exhausts_budget() {
        let r = quad_with_budget(|x| (1.0 / (x + 1e-300)).sin(), 0.0, 1.0, 1e-14, 20_000);
        assert!(matches!(r, Err(NumericsError::MaxDepth { .. })));
    }
}
