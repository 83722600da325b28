//! Deformations `x → x + g`, `ẋ → ẋ + f` of the harmonic oscillator.
//!
//! With `P = ẋ + f`, `Q = x + g` and `θ = ωt + α`, every deformation has
//! the first integral `P = ω cot θ · Q`. Differentiating it gives the
//! generated second-order equation
//!
//! ```text
//! [(f_v + 1)Q − P g_v] ẍ + [f_x Q − f(g_x − 1) − g_t − ẋ g_x] ẋ
//!     + Q(f_t + ω²Q) − f g_t + f² = 0
//! ```
//!
//! which [`generate_ode`] builds symbolically.

mod drive;
mod first_integral;
mod ode;
mod phase;
mod riccati;
mod time_varying;

use crate::expr::{self, differentiate, Bindings, Expr, ExprError, Var};
use crate::numerics::NumericsError;
use thiserror::Error;

pub use drive::{
    local_flow, local_flow_second_order, solve_first_integral, solve_generated, trajectory_residual, SolveOptions,
    LOCAL_SUBSTEP, SINGULAR_CROSSING_TOL,
};
pub use first_integral::{alpha_from_state, crossing_defect, crossing_exponent, first_integral_defect, first_integral_rhs, solve_velocity, POLE_GUARD};
pub use ode::{explicit_acceleration, generate_ode, regularized_acceleration, OdeForm, REGULAR_BAND, SINGULAR_EPS};
pub use phase::{crossing_times, energy, energy_rate_formula, phase_function, unwrap_phase};
pub use riccati::{riccati_family, RiccatiFamily};
pub use time_varying::{generate_ode_time_varying, TimeVaryingOscillator};

pub use crate::numerics::{PhaseState, Trajectory, TrajectoryMeta};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeformError {
    #[error("omega must be positive and finite, got {0}")]
    InvalidOmega(f64),
    #[error("deformation functions may only use t, x and v; found {0}")]
    ForeignVariable(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("coefficient of the second derivative vanishes ({value:e}) at t = {t}, x = {x}, v = {v}")]
    SingularCoefficient { t: f64, x: f64, v: f64, value: f64 },
    #[error("cotangent pole at t = {t}")]
    CotangentPole { t: f64 },
    #[error("f or g depends on v: the first integral is implicit in the velocity")]
    ImplicitRelation,
    #[error("velocity could not be solved from the implicit first integral at t = {t}: {message}")]
    ImplicitSolve { t: f64, message: String },
    #[error("phase function denominator vanishes at t = {t}")]
    ZeroDenominator { t: f64 },
    #[error("x + g never changes sign along the trajectory")]
    NoCrossing,
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
    #[error("invalid span: {0}")]
    InvalidSpan(String),
    #[error("continuation across the crossing at t = {t} is not unique: perturbations grow like |t - t_n|^{exponent:.3}")]
    NonUniqueCrossing { t: f64, exponent: f64 },
    #[error("no continuously differentiable continuation across the crossing at t = {t}: f - dg/dt = {defect:e} there")]
    SingularCrossing { t: f64, defect: f64 },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub type Result<T> = std::result::Result<T, DeformError>;

/// The six first partials of `f` and `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partials {
    pub f_t: Expr,
    pub f_x: Expr,
    pub f_v: Expr,
    pub g_t: Expr,
    pub g_x: Expr,
    pub g_v: Expr,
}

/// One member of the generated family: deformation functions `f`, `g`
/// over `(t, x, v)` with parameters already bound, frequency `ω > 0` and
/// phase constant `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformedOscillator {
    pub f: Expr,
    pub g: Expr,
    pub omega: f64,
    pub alpha: f64,
    partials: Partials,
}

impl DeformedOscillator {
    /// Bind `params` into `f` and `g` and check the variable set.
    pub fn new(f: &Expr, g: &Expr, omega: f64, params: &Bindings) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(DeformError::InvalidOmega(omega));
        }
        let f = f.bind(params)?;
        let g = g.bind(params)?;
        for e in [&f, &g] {
            if e.depends_on(Var::U) {
                return Err(DeformError::ForeignVariable("u".into()));
            }
        }
        let partials = Partials {
            f_t: differentiate(&f, Var::T),
            f_x: differentiate(&f, Var::X),
            f_v: differentiate(&f, Var::V),
            g_t: differentiate(&g, Var::T),
            g_x: differentiate(&g, Var::X),
            g_v: differentiate(&g, Var::V),
        };
        Ok(DeformedOscillator { f, g, omega, alpha: 0.0, partials })
    }

    /// Parse `f` and `g` from text.
    pub fn parse(f: &str, g: &str, omega: f64, params: &Bindings) -> Result<Self> {
        Self::new(&expr::parse(f)?, &expr::parse(g)?, omega, params)
    }

    /// The undeformed oscillator `f = g = 0`.
    pub fn harmonic(omega: f64) -> Result<Self> {
        Self::new(&Expr::num(0.0), &Expr::num(0.0), omega, &Bindings::new())
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    /// Fix `α` so that the first integral passes through `s`.
    pub fn with_alpha_from_state(mut self, s: &PhaseState) -> Result<Self> {
        self.alpha = alpha_from_state(&self, s)?;
        Ok(self)
    }

    pub fn partials(&self) -> &Partials {
        &self.partials
    }

    /// True when `f` or `g` depends on `v`, which makes the first integral
    /// an implicit equation for the velocity.
    pub fn is_implicit(&self) -> bool {
        self.f.depends_on(Var::V) || self.g.depends_on(Var::V)
    }

    /// `θ = ωt + α`.
    pub fn theta(&self, t: f64) -> f64 {
        self.omega * t + self.alpha
    }

    /// Crossing times `(nπ − α)/ω` inside the open interval `(a, b)`.
    pub fn pole_times(&self, a: f64, b: f64) -> Vec<f64> {
        pole_times(self.omega, self.alpha, a, b)
    }

    pub fn f_at(&self, s: &PhaseState) -> Result<f64> {
        Ok(self.f.eval(&point(s))?)
    }

    pub fn g_at(&self, s: &PhaseState) -> Result<f64> {
        Ok(self.g.eval(&point(s))?)
    }

    /// `(P, Q) = (v + f, x + g)`.
    pub fn pq(&self, s: &PhaseState) -> Result<(f64, f64)> {
        Ok((s.v + self.f_at(s)?, s.x + self.g_at(s)?))
    }
}

pub(crate) fn point(s: &PhaseState) -> expr::Point {
    expr::Point::txv(s.t, s.x, s.v)
}

pub(crate) fn pole_times(omega: f64, alpha: f64, a: f64, b: f64) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    let n_lo = ((omega * a + alpha) / pi).floor() as i64;
    let n_hi = ((omega * b + alpha) / pi).ceil() as i64;
    (n_lo..=n_hi)
        .map(|n| (n as f64 * pi - alpha) / omega)
        .filter(|&t| t > a && t < b)
        .collect()
}
