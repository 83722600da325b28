use super::ode::OdeForm;
use super::{DeformError, PhaseState, Result, Trajectory};
use crate::expr::{differentiate, Bindings, Expr, Point, Var};
use crate::numerics::{fd_derivatives, integrate, quad, rk4_flow, IvpProblem, ResidualReport, Rhs, FD_STEP};

const PHASE_TOL: f64 = 1e-13;

fn check_time_only(name: &str, e: &Expr) -> Result<()> {
    match e.variables().into_iter().find(|v| *v != Var::T) {
        Some(v) => Err(DeformError::ForeignVariable(format!("{} in {name}", v.name()))),
        None => Ok(()),
    }
}

/// Deformation by `f(t)`, `g(t)` of the oscillator with frequency `ω(t)`:
/// first integral `ẋ + f = ω(t) cot(Φ(t) + α)(x + g)` with
/// `Φ(t) = ∫_{t_ref}^t ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVaryingOscillator {
    pub f: Expr,
    pub g: Expr,
    pub omega: Expr,
    pub alpha: f64,
    pub t_ref: f64,
}

impl TimeVaryingOscillator {
    pub fn new(f: &Expr, g: &Expr, omega: &Expr, params: &Bindings) -> Result<Self> {
        let (f, g, omega) = (f.bind(params)?, g.bind(params)?, omega.bind(params)?);
        check_time_only("f", &f)?;
        check_time_only("g", &g)?;
        check_time_only("omega", &omega)?;
        Ok(TimeVaryingOscillator { f, g, omega, alpha: 0.0, t_ref: 0.0 })
    }

    fn at(e: &Expr, t: f64) -> Result<f64> {
        Ok(e.eval(&Point::txv(t, 0.0, 0.0))?)
    }

    pub fn omega_at(&self, t: f64) -> Result<f64> {
        let w = Self::at(&self.omega, t)?;
        if w > 0.0 {
            Ok(w)
        } else {
            Err(DeformError::InvalidOmega(w))
        }
    }

    /// `Φ(t) = ∫_{t_ref}^t ω(s) ds` by adaptive quadrature.
    pub fn phi(&self, t: f64) -> Result<f64> {
        let mut failure = None;
        let value = quad(
            |s| match self.omega.eval(&Point::txv(s, 0.0, 0.0)) {
                Ok(w) => w,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            self.t_ref,
            t,
            PHASE_TOL,
        );
        if let Some(e) = failure {
            return Err(e.into());
        }
        Ok(value?)
    }

    /// Fix `t_ref = s.t` and `α` so that the first integral passes through `s`.
    pub fn with_state(mut self, s: &PhaseState) -> Result<Self> {
        let p = s.v + Self::at(&self.f, s.t)?;
        let q = s.x + Self::at(&self.g, s.t)?;
        if p == 0.0 && q == 0.0 {
            return Err(DeformError::ZeroDenominator { t: s.t });
        }
        self.t_ref = s.t;
        self.alpha = (self.omega_at(s.t)? * q).atan2(p);
        Ok(self)
    }

    /// `ẋ = ω(t) cot(Φ(t) + α)(x + g) − f`.
    pub fn first_integral_rhs(&self, t: f64, x: f64) -> Result<f64> {
        let theta = self.phi(t)? + self.alpha;
        let s = theta.sin();
        if s.abs() < super::POLE_GUARD {
            return Err(DeformError::CotangentPole { t });
        }
        Ok(self.omega_at(t)? * theta.cos() / s * (x + Self::at(&self.g, t)?) - Self::at(&self.f, t)?)
    }

    fn rhs(&self) -> Rhs<'_> {
        Rhs::first_order(move |t, x| self.first_integral_rhs(t, x).map_err(|e| e.to_string()))
    }

    /// Integrate the first integral from `(t_ref, x0)`; the span must avoid
    /// the zeros of `sin(Φ + α)`.
    pub fn solve(&self, x0: f64, t_end: f64, samples: &[f64]) -> Result<Trajectory> {
        let problem = IvpProblem::new(self.rhs(), self.t_ref, vec![x0], t_end).with_samples(samples.to_vec());
        Ok(integrate(&problem)?)
    }

    /// Residual of the generated equation along `traj`, by local
    /// re-integration of the first integral around each sample.
    pub fn trajectory_residual(&self, traj: &Trajectory) -> Result<ResidualReport> {
        let form = generate_ode_time_varying(&self.f, &self.g, &self.omega)?;
        let rhs = self.rhs();
        let mut report = ResidualReport::new();
        for s in &traj.states {
            let flow = |tau: f64| {
                rk4_flow(&rhs, s.t, &[s.x], tau, super::drive::LOCAL_SUBSTEP).map(|y| y[0]).map_err(|e| e.to_string())
            };
            let r = fd_derivatives(&flow, s.t, FD_STEP)
                .and_then(|(x, v, a)| form.residual_at(s.t, x, v, a).map_err(|e| e.to_string()));
            report.record(s.t, r);
        }
        Ok(report)
    }
}

/// Generated equation of the time-deformed oscillator with frequency
/// `ω(t)`:
///
/// ```text
/// Q ẍ + [f − ġ − (ω̇/ω)Q] ẋ + Q ḟ − (ω̇/ω) f Q + ω²Q² + f(f − ġ) = 0,   Q = x + g
/// ```
pub fn generate_ode_time_varying(f: &Expr, g: &Expr, omega: &Expr) -> Result<OdeForm> {
    check_time_only("f", f)?;
    check_time_only("g", g)?;
    check_time_only("omega", omega)?;
    let q = Expr::add(Expr::var(Var::X), g.clone());
    let f_dot = differentiate(f, Var::T);
    let g_dot = differentiate(g, Var::T);
    let log_rate = Expr::div(differentiate(omega, Var::T), omega.clone());
    let coeff_xd = Expr::sub(Expr::sub(f.clone(), g_dot.clone()), Expr::mul(log_rate.clone(), q.clone()));
    let remainder = Expr::add(
        Expr::add(
            Expr::sub(Expr::mul(q.clone(), f_dot), Expr::mul(Expr::mul(log_rate, f.clone()), q.clone())),
            Expr::mul(Expr::pow(omega.clone(), Expr::num(2.0)), Expr::pow(q.clone(), Expr::num(2.0))),
        ),
        Expr::mul(f.clone(), Expr::sub(f.clone(), g_dot)),
    );
    Ok(OdeForm { coeff_xdd: q, coeff_xd, remainder, params: Bindings::new() })
}
