//! Numerical kernels shared by the rest of the crate: an embedded
//! Runge–Kutta integrator, adaptive Simpson quadrature, a safeguarded
//! Newton/bisection root finder and finite-difference residual scans.

mod ivp;
mod quad;
mod residual;
mod roots;

use thiserror::Error;

pub use ivp::{integrate, rk4_flow, IvpProblem, PhaseState, Rhs, RhsResult, Trajectory, TrajectoryMeta};
pub use quad::{quad, quad_with_budget};
pub use residual::{fd_derivatives, residual_scan, residual_scan_with_step, OdeResidual, ResidualReport, FD_STEP};
pub use roots::{find_root, find_root_newton};

/// Default relative tolerance of the integrator.
pub const DEFAULT_RTOL: f64 = 1e-10;
/// Default absolute tolerance of the integrator.
pub const DEFAULT_ATOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("right-hand side failed at t = {t}: {message}")]
    Rhs { t: f64, message: String },
    #[error("too many steps ({steps}) before reaching t = {t_end}")]
    TooManySteps { steps: usize, t_end: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("quadrature on [{a}, {b}] exceeded its refinement budget")]
    MaxDepth { a: f64, b: f64 },
    #[error("non-finite integrand at {x}")]
    NonFiniteIntegrand { x: f64 },
    #[error("no sign change on [{lo}, {hi}] (f = {flo}, {fhi})")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("root finder did not converge in {0} iterations")]
    MaxIterations(usize),
    #[error("function evaluation failed at {x}: {message}")]
    Eval { x: f64, message: String },
}

pub type Result<T> = std::result::Result<T, NumericsError>;
