use super::{DeformError, DeformedOscillator, PhaseState, Result};
use crate::expr::Point;
use crate::numerics::{find_root_newton, NumericsError};
use std::f64::consts::PI;

/// First-integral evaluations refuse `|sin(ωt + α)|` below this.
pub const POLE_GUARD: f64 = 1e-9;

/// `ω cot(ωt + α)`, refusing points within [`POLE_GUARD`] of a pole.
pub(crate) fn cot_factor(osc: &DeformedOscillator, t: f64) -> Result<f64> {
    let theta = osc.theta(t);
    let s = theta.sin();
    if s.abs() < POLE_GUARD {
        return Err(DeformError::CotangentPole { t });
    }
    Ok(osc.omega * theta.cos() / s)
}

/// Explicit slope field `ẋ = ω cot(ωt + α)(x + g) − f` for deformations
/// that do not depend on `v`.
pub fn first_integral_rhs(osc: &DeformedOscillator, s: &PhaseState) -> Result<f64> {
    if osc.is_implicit() {
        return Err(DeformError::ImplicitRelation);
    }
    let k = cot_factor(osc, s.t)?;
    let (p, q) = osc.pq(&PhaseState { v: 0.0, ..*s })?;
    Ok(k * q - p)
}

/// Growth exponent `K` of first-integral perturbations near the crossing
/// `pole`: `δx ∝ |t − pole|^K`, estimated as `(t − pole) ∂v/∂x` at `s`.
/// The generated equation fixes the continuation across the crossing only
/// when `K ≤ 2`; beyond that a `|t − pole|^K` term may change freely there
/// while `x` stays twice differentiable.
pub fn crossing_exponent(osc: &DeformedOscillator, s: &PhaseState, pole: f64) -> Result<f64> {
    let k = cot_factor(osc, s.t)?;
    let pt = Point::txv(s.t, s.x, s.v);
    let p = osc.partials();
    let (f_x, f_v) = (p.f_x.eval(&pt)?, p.f_v.eval(&pt)?);
    let (g_x, g_v) = (p.g_x.eval(&pt)?, p.g_v.eval(&pt)?);
    let dv_dx = (k * (1.0 + g_x) - f_x) / (1.0 + f_v - k * g_v);
    Ok((s.t - pole) * dv_dx)
}

/// Obstruction to a smooth crossing at `pole`, projected from `s`: with
/// `x` moved onto `x + g = 0` at `t = pole` and `v` kept, returns
/// `(f − ġ, v + f)` when `g_v = 0` there. In that case the leading
/// coefficient of the generated equation vanishes at the crossing while the
/// rest tends to `(v + f)(f − ġ)`, so `ẋ` stays bounded only if `f = ġ`.
/// Returns `None` when `g_v ≠ 0` or the projection fails.
pub fn crossing_defect(osc: &DeformedOscillator, s: &PhaseState, pole: f64) -> Result<Option<(f64, f64)>> {
    let p = osc.partials();
    let mut x = s.x;
    for _ in 0..60 {
        let pt = Point::txv(pole, x, s.v);
        let (q, dq) = (x + osc.g.eval(&pt)?, 1.0 + p.g_x.eval(&pt)?);
        if !(dq.abs() > 0.0) || !q.is_finite() {
            return Ok(None);
        }
        let step = q / dq;
        x -= step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    let pt = Point::txv(pole, x, s.v);
    if (x + osc.g.eval(&pt)?).abs() > 1e-12 * x.abs().max(1.0) || p.g_v.eval(&pt)? != 0.0 {
        return Ok(None);
    }
    let f = osc.f.eval(&pt)?;
    let g_dot = p.g_t.eval(&pt)? + p.g_x.eval(&pt)? * s.v;
    Ok(Some((f - g_dot, s.v + f)))
}

/// `F(v) = v − ω cot θ (x + g) + f` and `dF/dv`.
fn implicit_residual(osc: &DeformedOscillator, k: f64, t: f64, x: f64, v: f64) -> Result<(f64, f64)> {
    let pt = Point::txv(t, x, v);
    let f = osc.f.eval(&pt)?;
    let g = osc.g.eval(&pt)?;
    let p = osc.partials();
    let f_v = p.f_v.eval(&pt)?;
    let g_v = p.g_v.eval(&pt)?;
    Ok((v - k * (x + g) + f, 1.0 - k * g_v + f_v))
}

/// Velocity satisfying the first integral at `(t, x)`. Explicit
/// deformations are evaluated directly; implicit ones are solved by
/// safeguarded Newton on a bracket grown symmetrically around `guess`.
pub fn solve_velocity(osc: &DeformedOscillator, t: f64, x: f64, guess: f64) -> Result<f64> {
    if !osc.is_implicit() {
        return first_integral_rhs(osc, &PhaseState::new(t, x, guess));
    }
    let k = cot_factor(osc, t)?;
    let eval = |v: f64| implicit_residual(osc, k, t, x, v).map_err(|e| e.to_string());
    let fail = |message: String| DeformError::ImplicitSolve { t, message };
    if let Ok((r, _)) = eval(guess) {
        if r == 0.0 {
            return Ok(guess);
        }
    }
    let mut w = 1e-3 * guess.abs().max(1.0);
    for _ in 0..80 {
        let (lo, hi) = (guess - w, guess + w);
        if let (Ok((flo, _)), Ok((fhi, _))) = (eval(lo), eval(hi)) {
            if flo.signum() != fhi.signum() {
                let tol = 4.0 * f64::EPSILON * guess.abs().max(1.0);
                return find_root_newton(eval, lo, hi, tol).map_err(|e| match e {
                    NumericsError::Eval { message, .. } => fail(message),
                    other => fail(other.to_string()),
                });
            }
        }
        w *= 2.0;
    }
    Err(fail(format!("no sign change found around v = {guess}")))
}

/// Phase constant `α` for which the first integral passes through `s`:
/// `ωt + α = atan2(ω(x + g), ẋ + f)`, so `sin(ωt + α)` has the sign of
/// `x + g`. Reduced to `(−π, π]`.
pub fn alpha_from_state(osc: &DeformedOscillator, s: &PhaseState) -> Result<f64> {
    let (p, q) = osc.pq(s)?;
    if p == 0.0 && q == 0.0 {
        return Err(DeformError::ZeroDenominator { t: s.t });
    }
    let alpha = (osc.omega * q).atan2(p) - osc.omega * s.t;
    let reduced = (alpha + PI).rem_euclid(2.0 * PI) - PI;
    Ok(if reduced == -PI { PI } else { reduced })
}

/// `(ẋ + f) − ω cot θ (x + g)` at `s`; zero on every solution.
pub fn first_integral_defect(osc: &DeformedOscillator, s: &PhaseState) -> Result<f64> {
    let k = cot_factor(osc, s.t)?;
    let (p, q) = osc.pq(s)?;
    Ok(p - k * q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;
    use std::f64::consts::FRAC_PI_2;

    fn osc(f: &str, g: &str, omega: f64) -> DeformedOscillator {
        DeformedOscillator::parse(f, g, omega, &Bindings::new()).unwrap()
    }

    #[test]
    fn harmonic_slope_vanishes_at_quarter_period() {
        let o = osc("0", "0", 1.0);
        assert!(first_integral_rhs(&o, &PhaseState::new(FRAC_PI_2, 1.0, 0.0)).unwrap().abs() < 1e-16);
    }

    #[test]
    fn case_one_slope() {
        let o = osc("sin(t)", "0", 1.0);
        for i in 1..30 {
            let t = 0.1 * i as f64;
            let x = (2.0 - t) * t.sin();
            let v = first_integral_rhs(&o, &PhaseState::new(t, x, 0.0)).unwrap();
            assert!((v - (-t.sin() + (2.0 - t) * t.cos())).abs() < 1e-10);
        }
    }

    #[test]
    fn pole_and_implicit_errors() {
        let o = osc("0", "0", 1.0);
        assert!(matches!(
            first_integral_rhs(&o, &PhaseState::new(0.0, 1.0, 0.0)),
            Err(DeformError::CotangentPole { .. })
        ));
        let o = osc("0", "0.5*v", 1.0);
        assert!(matches!(
            first_integral_rhs(&o, &PhaseState::new(1.0, 1.0, 0.0)),
            Err(DeformError::ImplicitRelation)
        ));
    }

    #[test]
    fn implicit_velocity_is_consistent() {
        let o = osc("-(3/4)*v + 1", "0", 1.0);
        let (t, x) = (0.7, 0.4);
        let v = solve_velocity(&o, t, x, 0.0).unwrap();
        // v/4 = cot t · x − 1
        assert!((v - 4.0 * (x / t.tan() - 1.0)).abs() < 1e-13);
        let o = osc("0", "0.5*v", 1.0);
        let v = solve_velocity(&o, 1.2, 0.9, 5.0).unwrap();
        let k = 1.0 / 1.2f64.tan();
        assert!((v - k * 0.9 / (1.0 - 0.5 * k)).abs() < 1e-13);
    }

    #[test]
    fn alpha_inversion_round_trip() {
        let o = osc("0.3*t", "0.2*x^2", 1.7);
        for &(t, x, v) in &[(0.2, 0.5, 1.0), (1.0, -0.8, 0.3), (2.5, 0.1, -2.0)] {
            let s = PhaseState::new(t, x, v);
            let alpha = alpha_from_state(&o, &s).unwrap();
            let o = o.clone().with_alpha(alpha);
            assert!(first_integral_defect(&o, &s).unwrap().abs() < 1e-12);
            let (_, q) = o.pq(&s).unwrap();
            assert_eq!(o.theta(t).sin().signum(), q.signum());
            assert!(alpha > -PI && alpha <= PI);
        }
    }
}
