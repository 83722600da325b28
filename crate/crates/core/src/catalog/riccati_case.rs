use super::hypergeometric::hyp2f1_sym;
use super::{pole_interval, CatalogError, Result};
use crate::numerics::{rk4_flow, Rhs};

/// Largest step of the fixed-step integration of the Riccati first
/// integral. A fixed step keeps the evaluator smooth in `t`, which the
/// finite-difference residual checks rely on.
pub const RICCATI_SUBSTEP: f64 = 2.5e-4;

/// Default margin `ε` of the series path: it is refused for `|τ/ω| > 1 − ε`.
pub const SERIES_EPS: f64 = 1e-3;

/// `f = μx² + ν`, `g = 0`. The first integral is the Riccati equation
/// `ẋ = ω cot θ · x − μx² − ν`, solved either by direct integration from
/// `x(t₀) = x₀` or through `x = v̇/(μv)` where `v` solves
/// `(1 − z²) v_zz + λ v = 0`, `z = τ/ω = −cos θ`, `λ = μν/ω²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiCase {
    pub mu: f64,
    pub nu: f64,
    pub omega: f64,
    pub alpha: f64,
    pub t0: f64,
    pub x0: f64,
}

/// `(E, E_z, O, O_z)`: even and odd solutions of the `z` equation.
type Basis = [f64; 4];

impl RiccatiCase {
    pub fn new(mu: f64, nu: f64, omega: f64, alpha: f64, t0: f64, x0: f64) -> Result<Self> {
        if mu == 0.0 || !mu.is_finite() {
            return Err(CatalogError::InvalidParameter(format!("mu must be non-zero, got {mu}")));
        }
        pole_interval(omega, alpha, t0)?;
        Ok(RiccatiCase { mu, nu, omega, alpha, t0, x0 })
    }

    pub fn domain(&self) -> (f64, f64) {
        pole_interval(self.omega, self.alpha, self.t0).expect("checked at construction")
    }

    pub fn lambda(&self) -> f64 {
        self.mu * self.nu / (self.omega * self.omega)
    }

    /// `ẋ = ω cot(ωt + α) x − μx² − ν`.
    pub fn slope(&self, t: f64, x: f64) -> f64 {
        let th = self.omega * t + self.alpha;
        self.omega * th.cos() / th.sin() * x - self.mu * x * x - self.nu
    }

    fn inside(&self, t: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if t > lo && t < hi {
            Ok(())
        } else {
            Err(CatalogError::PoleInRange { t: if t <= lo { lo } else { hi } })
        }
    }

    /// Path (i): the Riccati first integral integrated from `(t₀, x₀)`.
    pub fn riccati_path(&self, t: f64) -> Result<f64> {
        self.inside(t)?;
        let rhs = Rhs::first_order(|t, x| Ok(self.slope(t, x)));
        Ok(rk4_flow(&rhs, self.t0, &[self.x0], t, RICCATI_SUBSTEP)?[0])
    }

    fn basis(&self, z: f64) -> Result<Basis> {
        let w = z * z;
        let q = -self.lambda() / 4.0;
        let series = |s: f64, p: f64, c: f64| {
            hyp2f1_sym(s, p, c, w).map_err(|e| match e {
                CatalogError::NoConvergence { .. } => CatalogError::SeriesDivergence { z },
                other => other,
            })
        };
        // even: ₂F₁(a, b; 1/2; z²) with a + b = −1/2, ab = −λ/4
        let fe = series(-0.5, q, 0.5)?;
        let fe_w = q / 0.5 * series(1.5, q + 0.5, 1.5)?;
        // odd: z ₂F₁(a + 1/2, b + 1/2; 3/2; z²)
        let fo = series(0.5, q, 1.5)?;
        let fo_w = q / 1.5 * series(2.5, q + 1.5, 2.5)?;
        Ok([fe, 2.0 * z * fe_w, z * fo, fo + 2.0 * w * fo_w])
    }

    fn z_at(&self, t: f64, eps: f64) -> Result<f64> {
        let z = -(self.omega * t + self.alpha).cos();
        if z.abs() > 1.0 - eps {
            return Err(CatalogError::SeriesDivergence { z });
        }
        Ok(z)
    }

    /// `(C₁, C₂)` of `v = C₁E + C₂O` matching `x(t₀) = x₀`, scaled so the
    /// larger has unit modulus.
    pub fn constants(&self) -> Result<(f64, f64)> {
        let z = self.z_at(self.t0, SERIES_EPS)?;
        let [e, ez, o, oz] = self.basis(z)?;
        let rate = self.omega * (self.omega * self.t0 + self.alpha).sin();
        let mx = self.mu * self.x0;
        let (c1, c2) = (mx * o - rate * oz, -(mx * e - rate * ez));
        let scale = c1.abs().max(c2.abs());
        if scale == 0.0 {
            return Err(CatalogError::InvalidParameter("degenerate hypergeometric constants".into()));
        }
        Ok((c1 / scale, c2 / scale))
    }

    /// Path (ii): `x = v̇/(μv)` with `v` from the hypergeometric pair.
    pub fn series_path(&self, t: f64) -> Result<f64> {
        self.series_path_with(t, SERIES_EPS)
    }

    pub fn series_path_with(&self, t: f64, eps: f64) -> Result<f64> {
        let (c1, c2) = self.constants()?;
        let z = self.z_at(t, eps)?;
        let [e, ez, o, oz] = self.basis(z)?;
        let v = c1 * e + c2 * o;
        if v == 0.0 {
            return Err(CatalogError::Unbounded { t });
        }
        let rate = self.omega * (self.omega * t + self.alpha).sin();
        Ok(rate * (c1 * ez + c2 * oz) / (self.mu * v))
    }

    /// Path (ii) where the series converges, path (i) otherwise; the
    /// second value carries the reason for a fallback.
    pub fn eval_with_fallback(&self, t: f64) -> Result<(f64, Option<CatalogError>)> {
        match self.series_path(t) {
            Ok(x) => Ok((x, None)),
            Err(e @ CatalogError::SeriesDivergence { .. }) => Ok((self.riccati_path(t)?, Some(e))),
            Err(e) => Err(e),
        }
    }
}
