use super::ode::OdeForm;
use super::{DeformError, PhaseState, Result};
use crate::expr::{Bindings, Expr, Var};
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// The family `ẍ + (b/ω)ẋ²/x − ω(b − ω)x = 0` generated by the Riccati
/// equation `Ẋ = −2iωX − ibX² − ib` for `X = (ẋ − iωx)/(ẋ + iωx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiFamily {
    pub b: f64,
    pub omega: f64,
}

/// The equation of [`RiccatiFamily`] as an [`OdeForm`] with parameters
/// `b` and `omega`.
pub fn riccati_family(b: f64, omega: f64) -> Result<OdeForm> {
    Ok(RiccatiFamily::new(b, omega)?.form())
}

impl RiccatiFamily {
    pub fn new(b: f64, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(DeformError::InvalidOmega(omega));
        }
        if b == omega {
            return Err(DeformError::DegenerateParameters("b = omega".into()));
        }
        if b == 0.0 || !b.is_finite() {
            return Err(DeformError::DegenerateParameters(format!("b = {b}")));
        }
        Ok(RiccatiFamily { b, omega })
    }

    pub fn form(&self) -> OdeForm {
        let (b, w) = (Expr::param("b"), Expr::param("omega"));
        let (x, v) = (Expr::var(Var::X), Expr::var(Var::V));
        OdeForm {
            coeff_xdd: Expr::num(1.0),
            coeff_xd: Expr::div(Expr::mul(Expr::div(b.clone(), w.clone()), v), x.clone()),
            remainder: Expr::neg(Expr::mul(Expr::mul(w.clone(), Expr::sub(b, w)), x)),
            params: Bindings::from([("b".to_string(), self.b), ("omega".to_string(), self.omega)]),
        }
    }

    /// `ẍ` solved from the equation; requires `x ≠ 0`.
    pub fn acceleration(&self, x: f64, v: f64) -> std::result::Result<f64, String> {
        if x == 0.0 {
            return Err("x = 0".into());
        }
        Ok(-(self.b / self.omega) * v * v / x + self.omega * (self.b - self.omega) * x)
    }

    /// `X = (ẋ − iωx)/(ẋ + iωx)`.
    pub fn generating_function(&self, s: &PhaseState) -> Result<Complex64> {
        let den = Complex64::new(s.v, self.omega * s.x);
        if den.norm_sqr() == 0.0 {
            return Err(DeformError::ZeroDenominator { t: s.t });
        }
        Ok(Complex64::new(s.v, -self.omega * s.x) / den)
    }

    /// `k = √(b² − ω²)`, imaginary when `|b| < ω`.
    pub fn k(&self) -> Complex64 {
        Complex64::new(self.b * self.b - self.omega * self.omega, 0.0).sqrt()
    }

    /// `X(t) = −(ω + ik tanh(k(t + α)))/b` for a complex constant `α`.
    pub fn x_formula(&self, t: f64, alpha: Complex64) -> Complex64 {
        let k = self.k();
        -(self.omega + I * k * (k * (alpha + t)).tanh()) / self.b
    }

    /// `α` placing `X(t₀) = X₀` on the formula.
    pub fn alpha_from(&self, t0: f64, x0: Complex64) -> Complex64 {
        let k = self.k();
        (I * (self.b * x0 + self.omega) / k).atanh() / k - t0
    }

    /// Least-squares fit of `α` to the generating function along `states`,
    /// started from the inversion at the first state.
    pub fn fit_alpha(&self, states: &[PhaseState]) -> Result<Complex64> {
        let data = states
            .iter()
            .map(|s| Ok((s.t, self.generating_function(s)?)))
            .collect::<Result<Vec<_>>>()?;
        let (t0, x0) = *data.first().ok_or_else(|| DeformError::InvalidSpan("no states to fit".into()))?;
        let mut alpha = self.alpha_from(t0, x0);
        let k = self.k();
        for _ in 0..50 {
            let (mut num, mut den) = (Complex64::new(0.0, 0.0), 0.0);
            for &(t, x) in &data {
                let th = (k * (alpha + t)).tanh();
                let r = self.x_formula(t, alpha) - x;
                let j = -I * k * k * (1.0 - th * th) / self.b;
                num += j.conj() * r;
                den += j.norm_sqr();
            }
            if den == 0.0 {
                break;
            }
            let step = num / den;
            alpha -= step;
            if step.norm() < 1e-15 * alpha.norm().max(1.0) {
                break;
            }
        }
        Ok(alpha)
    }

    /// Largest `|X(t) − X_formula(t)|` along `states` for the given `α`.
    pub fn max_deviation(&self, states: &[PhaseState], alpha: Complex64) -> Result<f64> {
        states.iter().try_fold(0.0f64, |m, s| {
            Ok(m.max((self.generating_function(s)? - self.x_formula(s.t, alpha)).norm()))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_parameters() {
        assert!(matches!(RiccatiFamily::new(1.0, 1.0), Err(DeformError::DegenerateParameters(_))));
        assert!(matches!(RiccatiFamily::new(0.0, 1.0), Err(DeformError::DegenerateParameters(_))));
        assert!(riccati_family(2.0, 1.0).is_ok());
    }

    #[test]
    fn form_matches_equation() {
        let form = riccati_family(2.0, 1.0).unwrap();
        // ẍ + 2ẋ²/x − x
        let r = form.residual_at(0.0, 2.0, 3.0, 1.5).unwrap();
        assert!((r - (1.5 + 2.0 * 9.0 / 2.0 - 2.0)).abs() < 1e-14);
    }

    /// `y = x^{(b+ω)/ω}` obeys `ÿ = (b² − ω²) y`.
    fn exact(b: f64, w: f64, t: f64) -> (f64, f64) {
        let m = (b * b - w * w).abs().sqrt();
        let (y, yd) = if b * b > w * w { ((m * t).cosh(), m * (m * t).sinh()) } else { ((m * t).cos(), -m * (m * t).sin()) };
        let p = w / (b + w);
        (y.powf(p), p * y.powf(p - 1.0) * yd)
    }

    #[test]
    fn linearized_solution_satisfies_the_formula() {
        for &(b, w) in &[(2.0, 1.0), (0.5, 1.0)] {
            let fam = RiccatiFamily::new(b, w).unwrap();
            let states: Vec<PhaseState> = (0..15)
                .map(|i| {
                    let t = 0.1 * i as f64;
                    let (x, v) = exact(b, w, t);
                    PhaseState::new(t, x, v)
                })
                .collect();
            let alpha = fam.fit_alpha(&states).unwrap();
            assert!(fam.max_deviation(&states, alpha).unwrap() < 1e-12, "b = {b}");
        }
    }
}
