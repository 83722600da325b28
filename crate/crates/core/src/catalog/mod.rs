//! Closed-form solutions of the particular deformations, used as oracles
//! for the [`deform`](crate::deform) machinery.
//!
//! Every [`CatalogSolution`] evaluates `x(t)` pointwise and knows the
//! deformation `(f, g, ω, α)` whose generated equation it solves. Its
//! `domain` is the maximal open interval containing `t₀` between the
//! points where that equation degenerates (cotangent poles, or the
//! non-smooth points of case 7). Evaluation outside the domain is allowed
//! where the formula stays valid.

mod cases;
mod hypergeometric;
mod riccati_case;

use crate::deform::{generate_ode, DeformError, DeformedOscillator, PhaseState};
use crate::expr::{Bindings, Expr, ExprError};
use crate::numerics::{fd_derivatives, residual_scan, NumericsError, ResidualReport};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use hypergeometric::{hyp2f1, MAX_TERMS};
pub use riccati_case::{RiccatiCase, RICCATI_SUBSTEP, SERIES_EPS};

/// Tolerance of every catalog quadrature. Adaptive refinement makes the
/// result a piecewise-smooth function of the upper limit, so its error
/// feeds straight into finite-difference second derivatives.
pub const QUAD_TOL: f64 = 1e-13;

/// Step of the finite differences that recover `ẋ` from an evaluator.
const VELOCITY_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("missing parameter `{0}`")]
    MissingParameter(String),
    #[error("integration interval contains the pole at t = {t} where the integrand is unbounded")]
    PoleInRange { t: f64 },
    #[error("the power bracket leaves its real branch at t = {t}")]
    BranchViolation { t: f64 },
    #[error("hypergeometric series diverges at z = {z}")]
    SeriesDivergence { z: f64 },
    #[error("hypergeometric series did not converge in {terms} terms")]
    NoConvergence { terms: usize },
    #[error("implicit relation has no real root at t = {t}")]
    NoRealRoot { t: f64 },
    #[error("solution is not smooth at t = {t}")]
    NonSmoothPoint { t: f64 },
    #[error("solution is unbounded at t = {t}")]
    Unbounded { t: f64 },
    #[error("evaluation failed at t = {t}: {message}")]
    Eval { t: f64, message: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Deform(#[from] DeformError),
}

pub type Result<T> = std::result::Result<T, CatalogError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    Harmonic,
    TimeQuadrature,
    Case1,
    Case2,
    Case3,
    Case4Riccati,
    Case5Power,
    Case6,
    Case7,
}

impl CaseId {
    pub const ALL: [CaseId; 9] = [
        CaseId::Harmonic,
        CaseId::TimeQuadrature,
        CaseId::Case1,
        CaseId::Case2,
        CaseId::Case3,
        CaseId::Case4Riccati,
        CaseId::Case5Power,
        CaseId::Case6,
        CaseId::Case7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Harmonic => "harmonic",
            CaseId::TimeQuadrature => "time_quadrature",
            CaseId::Case1 => "case1",
            CaseId::Case2 => "case2",
            CaseId::Case3 => "case3",
            CaseId::Case4Riccati => "case4_riccati",
            CaseId::Case5Power => "case5_power",
            CaseId::Case6 => "case6",
            CaseId::Case7 => "case7",
        }
    }

    /// Parameter names accepted by [`CatalogSolution::build`], in order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            CaseId::Harmonic => &["A", "omega", "alpha"],
            CaseId::TimeQuadrature => &["A", "omega", "alpha", "t0"],
            CaseId::Case1 => &["f0", "A", "omega", "alpha", "t0"],
            CaseId::Case2 => &["g0", "n", "A", "omega", "alpha", "t0"],
            CaseId::Case3 => &["beta", "gamma", "delta", "n", "A", "omega", "alpha", "t0"],
            CaseId::Case4Riccati => &["mu", "nu", "omega", "alpha", "t0", "x0"],
            CaseId::Case5Power => &["g0", "n", "A", "omega", "alpha", "t0"],
            CaseId::Case6 => &["b", "c1", "omega", "alpha", "t0"],
            CaseId::Case7 => &["c", "A", "omega", "alpha", "t0"],
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CatalogError::InvalidParameter(format!("unknown case `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Model {
    Plain,
    TimeQuadrature { f: Expr, g: Expr },
    Riccati(RiccatiCase),
}

/// A closed-form solution of one particular case.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogSolution {
    pub case_id: CaseId,
    /// Every constant of the solution, including `omega`, `alpha` and `t0`.
    pub params: Bindings,
    /// Open interval containing `t0`; infinite for the harmonic oscillator.
    pub domain: (f64, f64),
    model: Model,
}

/// Open interval between the cotangent poles around `t0`.
pub(crate) fn pole_interval(omega: f64, alpha: f64, t0: f64) -> Result<(f64, f64)> {
    check_omega(omega)?;
    let theta = omega * t0 + alpha;
    let k = (theta / PI).floor();
    if theta == k * PI {
        return Err(CatalogError::InvalidParameter(format!("t0 = {t0} lies on a pole")));
    }
    Ok(((k * PI - alpha) / omega, ((k + 1.0) * PI - alpha) / omega))
}

fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(CatalogError::InvalidParameter(format!("omega must be positive, got {omega}")))
    }
}

fn integer_above_one(n: f64) -> Result<i32> {
    if n.fract() == 0.0 && n > 1.0 && n < 1e6 {
        Ok(n as i32)
    } else {
        Err(CatalogError::InvalidParameter(format!("n must be an integer > 1, got {n}")))
    }
}

fn bindings(pairs: &[(&str, f64)]) -> Bindings {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

/// `A sin(ωt + α)`.
pub fn harmonic(a: f64, omega: f64, alpha: f64) -> Result<CatalogSolution> {
    check_omega(omega)?;
    Ok(CatalogSolution {
        case_id: CaseId::Harmonic,
        params: bindings(&[("A", a), ("omega", omega), ("alpha", alpha), ("t0", 0.0)]),
        domain: (f64::NEG_INFINITY, f64::INFINITY),
        model: Model::Plain,
    })
}

/// `x = sin θ [A + ∫_{t₀}^t (ω cot θ · g − f)/sin θ ds]` for `f(t)`, `g(t)`.
pub fn time_quadrature(f: &Expr, g: &Expr, a: f64, omega: f64, alpha: f64, t0: f64) -> Result<CatalogSolution> {
    for (name, e) in [("f", f), ("g", g)] {
        if e.variables().iter().any(|v| *v != crate::expr::Var::T) || !e.parameters().is_empty() {
            return Err(CatalogError::InvalidParameter(format!("{name} must depend on t only")));
        }
    }
    let domain = pole_interval(omega, alpha, t0)?;
    Ok(CatalogSolution {
        case_id: CaseId::TimeQuadrature,
        params: bindings(&[("A", a), ("omega", omega), ("alpha", alpha), ("t0", t0)]),
        domain,
        model: Model::TimeQuadrature { f: f.clone(), g: g.clone() },
    })
}

/// `f = f₀ sin θ`, `g = 0`: `x = (A − f₀t) sin θ`.
pub fn case1(f0: f64, a: f64, omega: f64, alpha: f64, t0: f64) -> Result<CatalogSolution> {
    plain(CaseId::Case1, &[("f0", f0), ("A", a)], omega, alpha, t0)
}

/// `f = 0`, `g = g₀ sinⁿ θ`: `x = sin θ [A + g₀ sinⁿ⁻¹ θ/(n − 1)]`.
pub fn case2(g0: f64, n: f64, a: f64, omega: f64, alpha: f64, t0: f64) -> Result<CatalogSolution> {
    integer_above_one(n)?;
    plain(CaseId::Case2, &[("g0", g0), ("n", n), ("A", a)], omega, alpha, t0)
}

/// `g = (β − 1)x`, `f = −γx + δxⁿ`: the Bernoulli first integral
/// `ẋ = (βω cot θ + γ)x − δxⁿ` gives
/// `x = sin^β θ e^{γt} W^{1/(1−n)}`,
/// `W = A + (n − 1)δ ∫_{t₀}^t sin^{(n−1)β} θ e^{(n−1)γs} ds`.
#[allow(clippy::too_many_arguments)]
pub fn case3(beta: f64, gamma: f64, delta: f64, n: f64, a: f64, omega: f64, alpha: f64, t0: f64) -> Result<CatalogSolution> {
    integer_above_one(n)?;
    if a == 0.0 {
        return Err(CatalogError::InvalidParameter("A = 0 makes x(t0) unbounded".into()));
    }
    plain(CaseId::Case3, &[("beta", beta), ("gamma", gamma), ("delta", delta), ("n", n), ("A", a)], omega, alpha, t0)
}

/// `f = μx² + ν`, `g = 0`, with `x(t₀) = x₀`. See [`RiccatiCase`].
pub fn case4_riccati(mu: f64, nu: f64, omega: f64, alpha: f64, t0: f64, x0: f64) -> Result<CatalogSolution> {
    let case = RiccatiCase::new(mu, nu, omega, alpha, t0, x0)?;
    Ok(CatalogSolution {
        case_id: CaseId::Case4Riccati,
        params: bindings(&[("mu", mu), ("nu", nu), ("omega", omega), ("alpha", alpha), ("t0", t0), ("x0", x0)]),
        domain: case.domain(),
        model: Model::Riccati(case),
    })
}

/// `f = 0`, `g = g₀xⁿ`: the root through the origin of
/// `x/(1 + g₀xⁿ⁻¹)^{1/(n−1)} = A sin θ`.
pub fn case5_power(g0: f64, n: f64, a: f64, omega: f64, alpha: f64, t0: f64) -> Result<CatalogSolution> {
    integer_above_one(n)?;
    plain(CaseId::Case5Power, &[("g0", g0), ("n", n), ("A", a)], omega, alpha, t0)
}

/// `f = −(3/4)ẋ + b`, `g = 0`:
/// `x = (1/3ω)[2b sin 2θ + 8b sin³θ cos θ + 3c₁ω sin⁴θ]`.
pub fn case6(b: f64, c1: f64, omega: f64, alpha: f64, t0: f64) -> Result<CatalogSolution> {
    plain(CaseId::Case6, &[("b", b), ("c1", c1)], omega, alpha, t0)
}

/// `f = 0`, `g = cẋ`:
/// `x = A e^{−cωθ/(c²ω²+1)} |cω cos θ − sin θ|^{1/(c²ω²+1)}`.
/// The domain is the branch between zeros of `cω cos θ − sin θ`.
pub fn case7(c: f64, a: f64, omega: f64, alpha: f64, t0: f64) -> Result<CatalogSolution> {
    check_omega(omega)?;
    let phi = (c * omega).atan();
    let theta = omega * t0 + alpha;
    let k = ((theta - phi) / PI).floor();
    if theta - phi == k * PI {
        return Err(CatalogError::NonSmoothPoint { t: t0 });
    }
    let params = bindings(&[("c", c), ("A", a), ("omega", omega), ("alpha", alpha), ("t0", t0)]);
    let domain = ((k * PI + phi - alpha) / omega, ((k + 1.0) * PI + phi - alpha) / omega);
    Ok(CatalogSolution { case_id: CaseId::Case7, params, domain, model: Model::Plain })
}

fn plain(case_id: CaseId, own: &[(&str, f64)], omega: f64, alpha: f64, t0: f64) -> Result<CatalogSolution> {
    let domain = pole_interval(omega, alpha, t0)?;
    let mut params = bindings(own);
    params.extend(bindings(&[("omega", omega), ("alpha", alpha), ("t0", t0)]));
    Ok(CatalogSolution { case_id, params, domain, model: Model::Plain })
}

impl CatalogSolution {
    /// Construct `case` from named parameters; `fg` supplies `f(t)` and
    /// `g(t)` for the time-quadrature case. Missing `t0` and `alpha`
    /// default to 0.
    pub fn build(case: CaseId, params: &Bindings, fg: Option<(&Expr, &Expr)>) -> Result<Self> {
        let get = |k: &str| match params.get(k) {
            Some(v) => Ok(*v),
            None if k == "t0" || k == "alpha" => Ok(0.0),
            None => Err(CatalogError::MissingParameter(k.to_string())),
        };
        if let Some(k) = params.keys().find(|k| !case.param_names().contains(&k.as_str())) {
            return Err(CatalogError::InvalidParameter(format!("`{k}` is not a parameter of {case}")));
        }
        let (w, al, t0) = (get("omega")?, get("alpha")?, get("t0")?);
        match case {
            CaseId::Harmonic => harmonic(get("A")?, w, al),
            CaseId::TimeQuadrature => {
                let (f, g) = fg.ok_or_else(|| CatalogError::MissingParameter("f and g".into()))?;
                time_quadrature(f, g, get("A")?, w, al, t0)
            }
            CaseId::Case1 => case1(get("f0")?, get("A")?, w, al, t0),
            CaseId::Case2 => case2(get("g0")?, get("n")?, get("A")?, w, al, t0),
            CaseId::Case3 => case3(get("beta")?, get("gamma")?, get("delta")?, get("n")?, get("A")?, w, al, t0),
            CaseId::Case4Riccati => case4_riccati(get("mu")?, get("nu")?, w, al, t0, get("x0")?),
            CaseId::Case5Power => case5_power(get("g0")?, get("n")?, get("A")?, w, al, t0),
            CaseId::Case6 => case6(get("b")?, get("c1")?, w, al, t0),
            CaseId::Case7 => case7(get("c")?, get("A")?, w, al, t0),
        }
    }

    fn p(&self, name: &str) -> f64 {
        self.params[name]
    }

    pub fn omega(&self) -> f64 {
        self.p("omega")
    }

    pub fn alpha(&self) -> f64 {
        self.p("alpha")
    }

    pub fn t0(&self) -> f64 {
        self.p("t0")
    }

    pub fn theta(&self, t: f64) -> f64 {
        self.omega() * t + self.alpha()
    }

    /// The Riccati data of case 4.
    pub fn riccati(&self) -> Option<&RiccatiCase> {
        match &self.model {
            Model::Riccati(r) => Some(r),
            _ => None,
        }
    }

    /// `x(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        cases::eval(self, t)
    }

    /// `(t, x, ẋ)` with `ẋ` from Richardson-extrapolated central
    /// differences of [`eval`](Self::eval).
    pub fn state(&self, t: f64) -> Result<PhaseState> {
        let x_of_t = |s: f64| self.eval(s).map_err(|e| e.to_string());
        let (x, v, _) = fd_derivatives(&x_of_t, t, VELOCITY_STEP).map_err(|message| CatalogError::Eval { t, message })?;
        Ok(PhaseState::new(t, x, v))
    }

    /// `f` and `g` as source strings over the parameter names.
    pub fn deformation_source(&self) -> (String, String) {
        let (f, g) = match (&self.model, self.case_id) {
            (Model::TimeQuadrature { f, g }, _) => return (f.to_string(), g.to_string()),
            (_, CaseId::Case1) => ("f0*sin(omega*t + alpha)", "0"),
            (_, CaseId::Case2) => ("0", "g0*sin(omega*t + alpha)^n"),
            (_, CaseId::Case3) => ("-gamma*x + delta*x^n", "(beta - 1)*x"),
            (_, CaseId::Case4Riccati) => ("mu*x^2 + nu", "0"),
            (_, CaseId::Case5Power) => ("0", "g0*x^n"),
            (_, CaseId::Case6) => ("-0.75*v + b", "0"),
            (_, CaseId::Case7) => ("0", "c*v"),
            _ => ("0", "0"),
        };
        (f.to_string(), g.to_string())
    }

    /// The deformation whose first integral this solution satisfies.
    pub fn oscillator(&self) -> Result<DeformedOscillator> {
        let (f, g) = self.deformation_source();
        Ok(DeformedOscillator::parse(&f, &g, self.omega(), &self.params)?.with_alpha(self.alpha()))
    }

    /// `n` points evenly spread over the domain shrunk by `margin` at both
    /// ends. An unbounded domain is replaced by one period from `t₀`.
    pub fn sample_times(&self, n: usize, margin: f64) -> Vec<f64> {
        let (lo, hi) = if self.domain.0.is_finite() && self.domain.1.is_finite() {
            (self.domain.0 + margin, self.domain.1 - margin)
        } else {
            (self.t0(), self.t0() + 2.0 * PI / self.omega())
        };
        let n = n.max(2);
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    /// Residual of the generated equation of [`oscillator`](Self::oscillator)
    /// along the evaluator, with finite-difference derivatives.
    pub fn residual_scan(&self, samples: &[f64]) -> Result<ResidualReport> {
        let ode = generate_ode(&self.oscillator()?);
        let x_of_t = |t: f64| self.eval(t).map_err(|e| e.to_string());
        Ok(residual_scan(&ode, &x_of_t, samples))
    }

    /// `(ẋ + f)/(x + g) − ω cot θ` at `t`.
    pub fn phase_law_defect(&self, t: f64) -> Result<f64> {
        let osc = self.oscillator()?;
        let s = self.state(t)?;
        let (p, q) = osc.pq(&s)?;
        let th = self.theta(t);
        Ok(p / q - self.omega() * th.cos() / th.sin())
    }
}
