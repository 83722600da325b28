use super::{DeformError, DeformedOscillator, PhaseState, Result};
use crate::expr::{Bindings, Expr, Point};
use crate::numerics::OdeResidual;
use std::fmt;

/// `|coeff_xdd|` at or below this is treated as singular.
pub const SINGULAR_EPS: f64 = 1e-12;

/// `coeff_xdd·ẍ + coeff_xd·ẋ + remainder = 0`, each coefficient an
/// expression over `(t, x, v)` whose parameters are taken from `params`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeForm {
    pub coeff_xdd: Expr,
    pub coeff_xd: Expr,
    pub remainder: Expr,
    pub params: Bindings,
}

impl OdeForm {
    pub fn coefficients(&self, t: f64, x: f64, v: f64) -> Result<(f64, f64, f64)> {
        let p = Point::txv(t, x, v);
        Ok((
            self.coeff_xdd.eval_with(&p, &self.params)?,
            self.coeff_xd.eval_with(&p, &self.params)?,
            self.remainder.eval_with(&p, &self.params)?,
        ))
    }

    pub fn residual_at(&self, t: f64, x: f64, v: f64, a: f64) -> Result<f64> {
        let (c2, c1, c0) = self.coefficients(t, x, v)?;
        Ok(c2 * a + c1 * v + c0)
    }

    /// Same form with every parameter replaced by its value.
    pub fn bound(&self) -> Result<OdeForm> {
        Ok(OdeForm {
            coeff_xdd: self.coeff_xdd.bind(&self.params)?,
            coeff_xd: self.coeff_xd.bind(&self.params)?,
            remainder: self.remainder.bind(&self.params)?,
            params: Bindings::new(),
        })
    }
}

impl OdeResidual for OdeForm {
    fn residual(&self, t: f64, x: f64, v: f64, a: f64) -> std::result::Result<f64, String> {
        self.residual_at(t, x, v, a).map_err(|e| e.to_string())
    }
}

impl fmt::Display for OdeForm {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (c, sym) in [(&self.coeff_xdd, "ẍ"), (&self.coeff_xd, "ẋ")] {
            match c.as_const() {
                Some(z) if z == 0.0 => {}
                Some(o) if o == 1.0 => terms.push(sym.to_string()),
                _ => terms.push(format!("({c})·{sym}")),
            }
        }
        if self.remainder.as_const() != Some(0.0) {
            terms.push(format!("{}", self.remainder));
        }
        if terms.is_empty() {
            terms.push("0".into());
        }
        write!(out, "{} = 0", terms.join(" + "))
    }
}

/// Build the generated equation of `osc` by substituting `f`, `g` and their
/// partials into the fixed template. `ω` stays symbolic as the parameter
/// `omega`.
pub fn generate_ode(osc: &DeformedOscillator) -> OdeForm {
    let (f, g) = (osc.f.clone(), osc.g.clone());
    let p = osc.partials().clone();
    let x = Expr::var(crate::expr::Var::X);
    let v = Expr::var(crate::expr::Var::V);
    let one = || Expr::num(1.0);
    let q = Expr::add(g.clone(), x);
    let omega2 = Expr::pow(Expr::param("omega"), Expr::num(2.0));

    let coeff_xdd = Expr::sub(
        Expr::mul(Expr::add(p.f_v, one()), q.clone()),
        Expr::mul(Expr::add(f.clone(), v.clone()), p.g_v),
    );
    let coeff_xd = Expr::sub(
        Expr::sub(
            Expr::sub(Expr::mul(p.f_x, q.clone()), Expr::mul(f.clone(), Expr::sub(p.g_x.clone(), one()))),
            p.g_t.clone(),
        ),
        Expr::mul(v, p.g_x),
    );
    let remainder = Expr::add(
        Expr::sub(
            Expr::mul(q.clone(), Expr::add(p.f_t, Expr::mul(omega2, q))),
            Expr::mul(f.clone(), p.g_t),
        ),
        Expr::pow(f, Expr::num(2.0)),
    );
    OdeForm { coeff_xdd, coeff_xd, remainder, params: [("omega".to_string(), osc.omega)].into() }
}

/// Solve the form for `ẍ` at `s`.
pub fn explicit_acceleration(form: &OdeForm, s: &PhaseState) -> Result<f64> {
    let (c2, c1, c0) = form.coefficients(s.t, s.x, s.v)?;
    if c2.abs() <= SINGULAR_EPS || !c2.is_finite() {
        return Err(DeformError::SingularCoefficient { t: s.t, x: s.x, v: s.v, value: c2 });
    }
    Ok(-(c1 * s.v + c0) / c2)
}

/// Half-width of the band `|coeff_xdd| < REGULAR_BAND` on which
/// [`regularized_acceleration`] averages.
pub const REGULAR_BAND: f64 = 1e-12;

/// [`explicit_acceleration`] off the band `|coeff_xdd| < REGULAR_BAND`.
/// Inside the band the value is the mean of the accelerations at `x ± δ`,
/// with `δ` chosen to put both points outside the band. This is the
/// removable limit, to O(δ²), when the numerator vanishes with the
/// coefficient. The band is kept narrow: averaging in `x` at fixed `(t, ẋ)`
/// drops the part of the limit carried by the time direction, which costs
/// about `|ẍ|` times the time spent inside the band.
pub fn regularized_acceleration(form: &OdeForm, s: &PhaseState) -> Result<f64> {
    let c2 = form.coeff_xdd.eval_with(&Point::txv(s.t, s.x, s.v), &form.params)?;
    if !(c2.abs() < REGULAR_BAND) {
        return explicit_acceleration(form, s);
    }
    let c2_at = |x: f64| form.coeff_xdd.eval_with(&Point::txv(s.t, x, s.v), &form.params);
    let probe = REGULAR_BAND * s.x.abs().max(1.0);
    let slope = (c2_at(s.x + probe)? - c2_at(s.x - probe)?) / (2.0 * probe);
    if !(slope.abs() > 0.0) || !slope.is_finite() {
        return Err(DeformError::SingularCoefficient { t: s.t, x: s.x, v: s.v, value: c2 });
    }
    let dx = 2.0 * REGULAR_BAND / slope.abs();
    let hi = explicit_acceleration(form, &PhaseState { x: s.x + dx, ..*s })?;
    let lo = explicit_acceleration(form, &PhaseState { x: s.x - dx, ..*s })?;
    Ok(0.5 * (hi + lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;

    fn osc(f: &str, g: &str, omega: f64) -> DeformedOscillator {
        DeformedOscillator::parse(f, g, omega, &Bindings::new()).unwrap()
    }

    #[test]
    fn undeformed_reduces_to_scaled_oscillator() {
        let form = generate_ode(&osc("0", "0", 2.0));
        assert_eq!(form.residual_at(0.0, 1.0, 0.0, -4.0).unwrap(), 0.0);
        assert_eq!(form.coeff_xdd.to_string(), "x");
        assert_eq!(form.coeff_xd.as_const(), Some(0.0));
        assert_eq!(form.to_string(), "(x)·ẍ + x*(omega^2*x) = 0");
    }

    #[test]
    fn harmonic_acceleration() {
        let form = generate_ode(&osc("0", "0", 1.0));
        assert_eq!(explicit_acceleration(&form, &PhaseState::new(0.0, 1.0, 0.0)).unwrap(), -1.0);
        assert!(matches!(
            explicit_acceleration(&form, &PhaseState::new(0.0, 0.0, 1.0)),
            Err(DeformError::SingularCoefficient { .. })
        ));
        let a = regularized_acceleration(&form, &PhaseState::new(0.0, 0.0, 1.0)).unwrap();
        assert!(a.abs() < 1e-12);
    }

    #[test]
    fn bound_form_agrees() {
        let form = generate_ode(&osc("sin(t)*x", "t*x^2", 1.5));
        let b = form.bound().unwrap();
        assert!(b.params.is_empty());
        let (p, q) = (form.coefficients(0.3, 0.7, -0.2).unwrap(), b.coefficients(0.3, 0.7, -0.2).unwrap());
        assert!((p.0 - q.0).abs() < 1e-15 && (p.1 - q.1).abs() < 1e-15 && (p.2 - q.2).abs() < 1e-14);
    }

    #[test]
    fn case_one_solution_has_zero_residual() {
        // x = (A - f0 t) sin t solves the f = f0 sin t deformation
        let form = generate_ode(&osc("0.8*sin(t)", "0", 1.0));
        for &t in &[0.3, 1.1, 2.0, 2.9] {
            let (a0, f0) = (2.0, 0.8);
            let x = (a0 - f0 * t) * f64::sin(t);
            let v = -f0 * t.sin() + (a0 - f0 * t) * t.cos();
            let acc = -2.0 * f0 * t.cos() - (a0 - f0 * t) * t.sin();
            assert!(form.residual_at(t, x, v, acc).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn template_matches_hand_expansion() {
        // every partial is nonzero
        let form = generate_ode(&osc("x*v + t", "t*v + x^2", 1.3));
        let (t, x, v) = (0.4, 0.9, -0.6);
        let (f, g) = (x * v + t, t * v + x * x);
        let (f_t, f_x, f_v, g_t, g_x, g_v) = (1.0, v, x, v, 2.0 * x, t);
        let q = g + x;
        let w2 = 1.3f64 * 1.3;
        let c2 = (f_v + 1.0) * q - (f + v) * g_v;
        let c1 = f_x * q - f * (g_x - 1.0) - g_t - v * g_x;
        let c0 = q * (f_t + w2 * q) - f * g_t + f * f;
        let got = form.coefficients(t, x, v).unwrap();
        assert!((got.0 - c2).abs() < 1e-14);
        assert!((got.1 - c1).abs() < 1e-14);
        assert!((got.2 - c0).abs() < 1e-14);
    }
}
