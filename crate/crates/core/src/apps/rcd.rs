use super::{AppsError, Result};
use crate::expr::{differentiate, parse, Bindings, Expr, Point, Var};
use crate::numerics::{fd_derivatives, quad, ResidualReport, FD_STEP};
use std::cell::Cell;
use std::fmt;

/// Tolerance of the quadratures in `D = D₀ exp ∫₁ᵘ α` and in the
/// travelling-wave bracket.
const QUAD_TOL: f64 = 1e-13;

/// Points of the `u + g ≠ 0`, `D > 0` scan over the requested domain.
const DOMAIN_SCAN: usize = 2001;

fn at(e: &Expr, u: f64) -> Result<f64> {
    Ok(e.eval(&Point::u(u))?)
}

/// `∫_a^b f`, failing with the first error `f` reports.
fn quad_checked(f: impl Fn(f64) -> Result<f64>, a: f64, b: f64) -> Result<f64> {
    let failure = Cell::new(None);
    let value = quad(
        |s| match f(s) {
            Ok(v) => v,
            Err(e) => {
                let first = failure.take().unwrap_or(e);
                failure.set(Some(first));
                f64::NAN
            }
        },
        a,
        b,
        QUAD_TOL,
    );
    match failure.into_inner() {
        Some(e) => Err(e),
        None => Ok(value?),
    }
}

/// The coefficient functions of `u″ + α(u)u′² + β(u)u′ + γ(u) = 0` that
/// make it a deformed oscillator with deformations `f(u)`, `g(u)`:
/// `α = −g′/(u + g)`, `β = f′ − f(g′ − 1)/(u + g)`,
/// `γ = ω²(u + g) + f²/(u + g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RcdRelations {
    pub f: Expr,
    pub g: Expr,
    pub omega: f64,
    f_u: Expr,
    g_u: Expr,
}

impl RcdRelations {
    /// `f` and `g` may depend on `u` only, with parameters already bound.
    pub fn new(f: &Expr, g: &Expr, omega: f64) -> Result<Self> {
        for (name, e) in [("f", f), ("g", g)] {
            if e.variables().iter().any(|v| *v != Var::U) || !e.parameters().is_empty() {
                return Err(AppsError::InvalidParameter(format!("{name} must depend on u only, got {e}")));
            }
        }
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(AppsError::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        Ok(RcdRelations { f: f.clone(), g: g.clone(), omega, f_u: differentiate(f, Var::U), g_u: differentiate(g, Var::U) })
    }

    fn q(&self, u: f64) -> Result<f64> {
        let q = u + at(&self.g, u)?;
        if q == 0.0 || !q.is_finite() {
            return Err(AppsError::DomainViolation { u });
        }
        Ok(q)
    }

    pub fn alpha(&self, u: f64) -> Result<f64> {
        Ok(-at(&self.g_u, u)? / self.q(u)?)
    }

    pub fn beta(&self, u: f64) -> Result<f64> {
        Ok(at(&self.f_u, u)? - at(&self.f, u)? * (at(&self.g_u, u)? - 1.0) / self.q(u)?)
    }

    pub fn gamma(&self, u: f64) -> Result<f64> {
        let (q, f) = (self.q(u)?, at(&self.f, u)?);
        Ok(self.omega * self.omega * q + f * f / q)
    }

    fn exprs(&self) -> (Expr, Expr, Expr) {
        let q = Expr::add(Expr::var(Var::U), self.g.clone());
        let a = Expr::neg(Expr::div(self.g_u.clone(), q.clone()));
        let b = Expr::sub(
            self.f_u.clone(),
            Expr::div(Expr::mul(self.f.clone(), Expr::sub(self.g_u.clone(), Expr::num(1.0))), q.clone()),
        );
        let c = Expr::add(
            Expr::mul(Expr::num(self.omega * self.omega), q.clone()),
            Expr::div(Expr::pow(self.f.clone(), Expr::num(2.0)), q),
        );
        (a, b, c)
    }
}

/// A function of `u`: a closed form, or `d₀ exp(∫₁ᵘ rate) · factor + offset`
/// when the exponent has no closed form.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Closed { expr: Expr, slope: Expr },
    Weighted { d0: f64, rate: Expr, factor: Expr, factor_slope: Expr, offset: f64 },
}

impl Profile {
    pub fn closed(expr: Expr) -> Self {
        let slope = differentiate(&expr, Var::U);
        Profile::Closed { expr, slope }
    }

    fn weighted(d0: f64, rate: &Expr, factor: Expr, offset: f64) -> Self {
        let factor_slope = differentiate(&factor, Var::U);
        Profile::Weighted { d0, rate: rate.clone(), factor, factor_slope, offset }
    }

    fn weight(d0: f64, rate: &Expr, u: f64) -> Result<f64> {
        let exponent = quad_checked(|s| at(rate, s).map_err(|_| AppsError::DomainViolation { u: s }), 1.0, u)?;
        Ok(d0 * exponent.exp())
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        match self {
            Profile::Closed { expr, .. } => at(expr, u),
            Profile::Weighted { d0, rate, factor, offset, .. } => Ok(Self::weight(*d0, rate, u)? * at(factor, u)? + offset),
        }
    }

    /// `d/du` of the profile.
    pub fn slope(&self, u: f64) -> Result<f64> {
        match self {
            Profile::Closed { slope, .. } => at(slope, u),
            Profile::Weighted { d0, rate, factor, factor_slope, .. } => {
                Ok(Self::weight(*d0, rate, u)? * (at(rate, u)? * at(factor, u)? + at(factor_slope, u)?))
            }
        }
    }

    pub fn as_closed(&self) -> Option<&Expr> {
        match self {
            Profile::Closed { expr, .. } => Some(expr),
            Profile::Weighted { .. } => None,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Closed { expr, .. } => write!(f, "{expr}"),
            Profile::Weighted { d0, rate, factor, offset, .. } => {
                write!(f, "{d0}*exp(int_1^u ({rate}) ds)*({factor})")?;
                if *offset != 0.0 {
                    write!(f, " + {offset}")?;
                }
                Ok(())
            }
        }
    }
}

/// `∂u/∂t = ∂_x[D(u)∂_x u] + B(u)∂_x u + Q(u)` reduced to travelling waves
/// `u(x − V_f t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RcdSystem {
    pub d: Profile,
    pub b: Profile,
    pub q: Profile,
    pub vf: f64,
    pub d0: f64,
    /// The `u` interval on which `u + g ≠ 0` and `D > 0` were checked.
    pub domain: (f64, f64),
}

impl RcdSystem {
    /// `(α, β, γ) = (D′/D, (V_f + B)/D, Q/D)` at `u`.
    pub fn coefficients(&self, u: f64) -> Result<(f64, f64, f64)> {
        let d = self.d.eval(u)?;
        if !(d > 0.0) || !d.is_finite() {
            return Err(AppsError::DomainViolation { u });
        }
        Ok((self.d.slope(u)? / d, (self.vf + self.b.eval(u)?) / d, self.q.eval(u)? / d))
    }
}

/// Build `D = D₀ exp ∫₁ᵘ α`, `B = βD − V_f`, `Q = γD` from the deformations
/// `f(u)`, `g(u)`. For `g = ku` the exponent integrates to
/// `D = D₀ u^{−k/(1+k)}` and all three profiles are closed forms.
pub fn rcd_from_fg(f: &Expr, g: &Expr, omega: f64, vf: f64, d0: f64, domain: (f64, f64)) -> Result<RcdSystem> {
    if !(vf >= 0.0) || !(d0 > 0.0) {
        return Err(AppsError::InvalidParameter(format!("need V_f >= 0 and D0 > 0, got {vf}, {d0}")));
    }
    if !(domain.0 < domain.1) || !domain.0.is_finite() || !domain.1.is_finite() {
        return Err(AppsError::InvalidParameter(format!("invalid u domain {domain:?}")));
    }
    let rel = RcdRelations::new(f, g, omega)?;
    let (a, b, c) = rel.exprs();
    let u = Expr::var(Var::U);
    let linear_g = match rel.g_u.as_const() {
        Some(k) if at(g, 0.0)? == 0.0 && k != -1.0 => Some(k),
        _ => None,
    };
    let sys = match linear_g {
        Some(k) => {
            let d = if k == 0.0 {
                Expr::num(d0)
            } else {
                Expr::mul(Expr::num(d0), Expr::pow(u, Expr::num(-k / (1.0 + k))))
            };
            RcdSystem {
                b: Profile::closed(Expr::sub(Expr::mul(d.clone(), b), Expr::num(vf))),
                q: Profile::closed(Expr::mul(d.clone(), c)),
                d: Profile::closed(d),
                vf,
                d0,
                domain,
            }
        }
        None => RcdSystem {
            d: Profile::weighted(d0, &a, Expr::num(1.0), 0.0),
            b: Profile::weighted(d0, &a, b, -vf),
            q: Profile::weighted(d0, &a, c, 0.0),
            vf,
            d0,
            domain,
        },
    };
    let mut prev_q: Option<f64> = None;
    for i in 0..DOMAIN_SCAN {
        let s = domain.0 + (domain.1 - domain.0) * i as f64 / (DOMAIN_SCAN - 1) as f64;
        let q = rel.q(s)?;
        if prev_q.is_some_and(|p| p.signum() != q.signum()) {
            return Err(AppsError::DomainViolation { u: s });
        }
        prev_q = Some(q);
        let d = sys.d.eval(s).map_err(|_| AppsError::DomainViolation { u: s })?;
        if !(d > 0.0) || !d.is_finite() {
            return Err(AppsError::DomainViolation { u: s });
        }
    }
    Ok(sys)
}

/// The system of `g = (β − 1)u`, `f = −γu + δu²`.
pub fn section_system(beta: f64, gamma: f64, delta: f64, omega: f64, vf: f64, d0: f64, domain: (f64, f64)) -> Result<RcdSystem> {
    let params: Bindings = [("beta", beta), ("gamma", gamma), ("delta", delta)].iter().map(|&(k, v)| (k.to_string(), v)).collect();
    let f = parse("-gamma*u + delta*u^2")?.bind(&params)?;
    let g = parse("(beta - 1)*u")?.bind(&params)?;
    rcd_from_fg(&f, &g, omega, vf, d0, domain)
}

/// Finite-difference residual of `u″ + α(u)u′² + β(u)u′ + γ(u)` along
/// `u_of_xi`, with the coefficients extracted from `sys`.
pub fn rcd_residual(sys: &RcdSystem, u_of_xi: &dyn Fn(f64) -> std::result::Result<f64, String>, xi_samples: &[f64]) -> ResidualReport {
    let mut report = ResidualReport::new();
    for &xi in xi_samples {
        let r = fd_derivatives(u_of_xi, xi, FD_STEP).and_then(|(u, du, ddu)| {
            let (a, b, c) = sys.coefficients(u).map_err(|e| e.to_string())?;
            Ok(ddu + a * du * du + b * du + c)
        });
        report.record(xi, r);
    }
    report
}

/// Travelling wave of [`section_system`]:
/// `u = sin^β θ e^{γξ}/W`, `θ = ωξ + α`,
/// `W(ξ) = A + δ ∫_{ξ₀}^ξ sin^β θ(s) e^{γs} ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravellingWave {
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub a: f64,
    pub omega: f64,
    pub alpha: f64,
    pub xi0: f64,
}

pub fn rcd_travelling_wave(beta: f64, gamma: f64, delta: f64, a: f64, omega: f64, alpha: f64, xi0: f64) -> Result<TravellingWave> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(AppsError::InvalidParameter(format!("omega must be positive, got {omega}")));
    }
    if a == 0.0 || !a.is_finite() {
        return Err(AppsError::InvalidParameter(format!("A must be finite and non-zero, got {a}")));
    }
    let w = TravellingWave { beta, gamma, delta, a, omega, alpha, xi0 };
    w.weight(xi0)?;
    Ok(w)
}

impl TravellingWave {
    fn theta(&self, xi: f64) -> f64 {
        self.omega * xi + self.alpha
    }

    /// `sin^β θ e^{γξ}`.
    fn weight(&self, xi: f64) -> Result<f64> {
        let s = self.theta(xi).sin();
        let p = if self.beta.fract() == 0.0 {
            s.powi(self.beta as i32)
        } else if s >= 0.0 {
            s.powf(self.beta)
        } else {
            return Err(AppsError::OutsideBranch { xi });
        };
        Ok(p * (self.gamma * xi).exp())
    }

    /// `W` by adaptive quadrature.
    pub fn bracket_quadrature(&self, xi: f64) -> Result<f64> {
        Ok(self.a + self.delta * quad_checked(|s| self.weight(s), self.xi0, xi)?)
    }

    /// `W` for `β = 1`, where `∫ sin θ e^{γs} ds = e^{γs}(γ sin θ − ω cos θ)/(γ² + ω²)`.
    pub fn bracket_closed(&self, xi: f64) -> Result<f64> {
        if self.beta != 1.0 {
            return Err(AppsError::InvalidParameter(format!("closed form needs beta = 1, got {}", self.beta)));
        }
        let anti = |s: f64| {
            let th = self.theta(s);
            (self.gamma * s).exp() * (self.gamma * th.sin() - self.omega * th.cos())
                / (self.gamma * self.gamma + self.omega * self.omega)
        };
        Ok(self.a + self.delta * (anti(xi) - anti(self.xi0)))
    }

    fn finish(&self, xi: f64, bracket: f64) -> Result<f64> {
        if bracket == 0.0 || bracket.signum() != self.a.signum() {
            return Err(AppsError::BracketZero { xi });
        }
        Ok(self.weight(xi)? / bracket)
    }

    /// The closed form when `β = 1`, the quadrature form otherwise.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        if self.beta == 1.0 {
            self.eval_closed(xi)
        } else {
            self.eval_quadrature(xi)
        }
    }

    pub fn eval_quadrature(&self, xi: f64) -> Result<f64> {
        self.finish(xi, self.bracket_quadrature(xi)?)
    }

    pub fn eval_closed(&self, xi: f64) -> Result<f64> {
        self.finish(xi, self.bracket_closed(xi)?)
    }

    /// `u′ = (βω cot θ + γ)u − δu²`.
    pub fn slope(&self, xi: f64, u: f64) -> f64 {
        let th = self.theta(xi);
        (self.beta * self.omega * th.cos() / th.sin() + self.gamma) * u - self.delta * u * u
    }
}
