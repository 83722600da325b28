//! Reaction-convection-diffusion travelling waves and large-amplitude
//! cantilever-beam vibrations built from the deformation machinery.

mod beam;
mod rcd;

pub use beam::{
    approx_period, beam_g, beam_series_compare, beam_solve, crossing_period, BeamMode, BeamModel, SeriesComparison, APPROX_REGIME_TOL,
    SERIES_PATCH,
};
pub use rcd::{
    rcd_from_fg, rcd_residual, rcd_travelling_wave, section_system, Profile, RcdRelations, RcdSystem, TravellingWave,
};

use crate::catalog::CatalogError;
use crate::deform::DeformError;
use crate::expr::ExprError;
use crate::numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("u + g(u) vanishes or D(u) is not positive at u = {u}")]
    DomainViolation { u: f64 },
    #[error("the travelling-wave bracket vanishes before xi = {xi}")]
    BracketZero { xi: f64 },
    #[error("sin(omega*xi + alpha) < 0 at xi = {xi} with a non-integer exponent")]
    OutsideBranch { xi: f64 },
    #[error("the beam function g(u) needs alpha > 0, got {0}")]
    NegativeAlpha(f64),
    #[error("approximate beam mode needs beta = 2*alpha/3 (alpha = {alpha}, beta = {beta})")]
    ApproxOutOfRegime { alpha: f64, beta: f64 },
    #[error("implicit beam relation has no root at t = {t}")]
    ImplicitNoRoot { t: f64 },
    #[error("1 + alpha*u^2 is not positive at u = {u}")]
    InertiaSign { u: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Deform(#[from] DeformError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

pub type Result<T> = std::result::Result<T, AppsError>;
