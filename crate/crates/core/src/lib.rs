//! Generalized Liénard equations generated by deforming the phase-space
//! coordinates of the linear harmonic oscillator.
//!
//! The deformation `x → x + g`, `ẋ → ẋ + f` applied to the oscillator's
//! ladder functions `a = (ẋ + f) − iω(x + g)` and `a⁺ = ā` keeps the
//! generating equation `Ẋ = −2iωX` for `X = a/a⁺`, which turns into a
//! second-order equation for `x` together with the first integral
//!
//! ```text
//! (ẋ + f) / (x + g) = ω cot(ωt + α)
//! ```
//!
//! Modules:
//! - [`expr`]: expression language for `f` and `g` with symbolic derivatives.
//! - [`numerics`]: integrators, quadrature, root finding and residual scans.
//! - [`deform`]: equation generation, first integrals, energy, crossings.
//! - [`catalog`]: closed-form solutions of the particular cases.
//! - [`apps`]: travelling waves of reaction-convection-diffusion equations
//!   and large-amplitude cantilever beam vibrations.
//! - [`cli`]: the `lienard` command-line front end.

pub mod expr;
pub mod numerics;
pub mod deform;
pub mod catalog;
pub mod apps;
pub mod cli;
