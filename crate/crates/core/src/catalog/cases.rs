use super::{CaseId, CatalogError, CatalogSolution, Model, Result, QUAD_TOL};
use crate::expr::{Expr, Point};
use crate::numerics::{find_root_newton, quad};
use std::cell::Cell;
use std::f64::consts::PI;

/// Points this close to a pole (in `|sin θ|`) are evaluated as the mean of
/// the integrand at `±REMOVABLE_SHIFT`.
const REMOVABLE_GUARD: f64 = 1e-7;
const REMOVABLE_SHIFT: f64 = 1e-5;

pub(super) fn eval(sol: &CatalogSolution, t: f64) -> Result<f64> {
    let th = sol.theta(t);
    let (s, c) = th.sin_cos();
    let p = |k: &str| sol.p(k);
    match (&sol.model, sol.case_id) {
        (Model::Riccati(r), _) => r.riccati_path(t),
        (Model::TimeQuadrature { f, g }, _) => time_quadrature(sol, f, g, t),
        (_, CaseId::Harmonic) => Ok(p("A") * s),
        (_, CaseId::Case1) => Ok((p("A") - p("f0") * t) * s),
        (_, CaseId::Case2) => {
            let n = p("n") as i32;
            Ok(s * (p("A") + p("g0") * s.powi(n - 1) / (n - 1) as f64))
        }
        (_, CaseId::Case3) => case3(sol, t),
        (_, CaseId::Case5Power) => case5(p("g0"), p("n") as i32, p("A") * s, t),
        (_, CaseId::Case6) => {
            let (b, w) = (p("b"), sol.omega());
            Ok((2.0 * b * (2.0 * th).sin() + 8.0 * b * s.powi(3) * c + 3.0 * p("c1") * w * s.powi(4)) / (3.0 * w))
        }
        (_, CaseId::Case7) => {
            let (cc, w) = (p("c"), sol.omega());
            let d = cc * w * c - s;
            if d.abs() <= 1e-15 {
                return Err(CatalogError::NonSmoothPoint { t });
            }
            let k = cc * cc * w * w + 1.0;
            Ok(p("A") * (-cc * w * th / k).exp() * d.abs().powf(1.0 / k))
        }
        (Model::Plain, CaseId::TimeQuadrature | CaseId::Case4Riccati) => unreachable!("built with their own model"),
    }
}

/// Adaptive quadrature of `integrand` over `[a, b]`, failing with the first
/// error the integrand reports.
fn quad_checked(integrand: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let failure = Cell::new(None);
    let value = quad(
        |s| match integrand(s) {
            Ok(v) => v,
            Err(e) => {
                if let Some(prev) = failure.replace(None) {
                    failure.set(Some(prev));
                } else {
                    failure.set(Some(e));
                }
                f64::NAN
            }
        },
        a,
        b,
        QUAD_TOL,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(value?)
}

fn eval_t(e: &Expr, t: f64) -> Result<f64> {
    Ok(e.eval(&Point::txv(t, 0.0, 0.0))?)
}

/// Poles `(kπ − α)/ω` in the closed interval between `a` and `b`.
fn poles_between(omega: f64, alpha: f64, a: f64, b: f64) -> Vec<f64> {
    let (lo, hi) = (a.min(b), a.max(b));
    let k0 = ((omega * lo + alpha) / PI).ceil() as i64;
    let k1 = ((omega * hi + alpha) / PI).floor() as i64;
    (k0..=k1).map(|k| (k as f64 * PI - alpha) / omega).collect()
}

fn time_quadrature(sol: &CatalogSolution, f: &Expr, g: &Expr, t: f64) -> Result<f64> {
    let (w, al) = (sol.omega(), sol.alpha());
    let raw = |s: f64| -> Result<f64> {
        let (sn, cs) = (w * s + al).sin_cos();
        Ok((w * cs * eval_t(g, s)? - eval_t(f, s)? * sn) / (sn * sn))
    };
    let t0 = sol.t0();
    for pole in poles_between(w, al, t0, t) {
        let (near, far) = (1e-5 / w, 1e-3 / w);
        let j_near = raw(pole - near)?.abs().max(raw(pole + near)?.abs());
        let j_far = raw(pole - far)?.abs().max(raw(pole + far)?.abs());
        if !(j_near <= 10.0 * (j_far + 1.0)) {
            return Err(CatalogError::PoleInRange { t: pole });
        }
    }
    let integrand = |s: f64| {
        if (w * s + al).sin().abs() < REMOVABLE_GUARD {
            let h = REMOVABLE_SHIFT / w;
            Ok(0.5 * (raw(s - h)? + raw(s + h)?))
        } else {
            raw(s)
        }
    };
    Ok((w * t + al).sin() * (sol.p("A") + quad_checked(integrand, t0, t)?))
}

/// `s^e` for real `s`, refusing non-integer powers of negative numbers.
fn real_pow(s: f64, e: f64, t: f64) -> Result<f64> {
    if e.fract() == 0.0 {
        Ok(s.powi(e as i32))
    } else if s >= 0.0 {
        Ok(s.powf(e))
    } else {
        Err(CatalogError::BranchViolation { t })
    }
}

fn case3(sol: &CatalogSolution, t: f64) -> Result<f64> {
    let (beta, gamma, delta, a) = (sol.p("beta"), sol.p("gamma"), sol.p("delta"), sol.p("A"));
    let n = sol.p("n");
    let m = n - 1.0;
    let integrand = |s: f64| Ok(real_pow(sol.theta(s).sin(), m * beta, s)? * (m * gamma * s).exp());
    let bracket = a + m * delta * quad_checked(integrand, sol.t0(), t)?;
    if bracket == 0.0 || bracket.signum() != a.signum() {
        return Err(CatalogError::BranchViolation { t });
    }
    // W^{1/(1−n)}: an odd root keeps the sign of W
    let root = if bracket > 0.0 {
        bracket.powf(-1.0 / m)
    } else if (m as i64) % 2 == 1 {
        -(-bracket).powf(-1.0 / m)
    } else {
        return Err(CatalogError::BranchViolation { t });
    };
    Ok(real_pow(sol.theta(t).sin(), beta, t)? * (gamma * t).exp() * root)
}

/// Root `x` of `x (1 + g₀xᵐ)^{−1/m} = y`, `m = n − 1`, on the branch through
/// the origin where `1 + g₀xᵐ > 0`. There the left side is increasing with
/// derivative `(1 + g₀xᵐ)^{−1/m − 1}`.
fn case5(g0: f64, n: i32, y: f64, t: f64) -> Result<f64> {
    if g0 == 0.0 || y == 0.0 {
        return Ok(y);
    }
    let m = n - 1;
    let mf = m as f64;
    let base = |x: f64| 1.0 + g0 * x.powi(m);
    let lhs = |x: f64| x * base(x).powf(-1.0 / mf);
    let dir = y.signum();
    // the branch ends where 1 + g₀xᵐ = 0 in the direction of y, if anywhere
    let edge = {
        let r = (1.0 / g0.abs()).powf(1.0 / mf);
        let x = dir * r;
        if (base(x)).abs() < 1e-12 { Some(x) } else { None }
    };
    let mut lo = 0.0;
    let mut hi = y;
    for _ in 0..1100 {
        if let Some(e) = edge {
            if hi.abs() >= e.abs() {
                hi = e * (1.0 - 1e-15);
            }
        }
        let b = base(hi);
        if !(b > 0.0) || !b.is_finite() {
            return Err(CatalogError::NoRealRoot { t });
        }
        if dir * (lhs(hi) - y) >= 0.0 {
            let fdf = |x: f64| {
                let b = base(x);
                Ok((x * b.powf(-1.0 / mf) - y, b.powf(-1.0 / mf - 1.0)))
            };
            let tol = 1e-15 * y.abs().max(1e-300);
            let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
            return find_root_newton(fdf, a, b, tol).map_err(|_| CatalogError::NoRealRoot { t });
        }
        if edge.is_some_and(|e| hi == e * (1.0 - 1e-15)) || !hi.is_finite() {
            return Err(CatalogError::NoRealRoot { t });
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(CatalogError::NoRealRoot { t })
}
