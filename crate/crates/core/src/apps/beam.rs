use super::{AppsError, Result};
use crate::deform::SolveOptions;
use crate::expr::{parse, Bindings, Expr};
use crate::numerics::{find_root_newton, integrate, quad, IvpProblem, PhaseState, Rhs, Trajectory, TrajectoryMeta};
use std::f64::consts::PI;

/// Approximate mode accepts `|β − 2α/3| ≤ APPROX_REGIME_TOL · max(1, |α|)`.
pub const APPROX_REGIME_TOL: f64 = 1e-9;

/// Below this `|√α u|` the factor `asinh(y)/(y√(1 + y²))` is summed as a
/// series, which avoids the cancellation in `1 − asinh(y)/(y√(1 + y²))`.
pub const SERIES_PATCH: f64 = 1e-2;

const QUAD_TOL: f64 = 1e-13;
const ROOT_TOL: f64 = 1e-15;

/// Single-mode cantilever model
/// `ü + αu u̇²/(1 + αu²) + ω²[u + (β − α)u³/(1 + αu²)] = 0`, with `c₁` the
/// integration constant of `g(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamModel {
    pub alpha_coef: f64,
    pub beta_coef: f64,
    pub omega: f64,
    pub c1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeamMode {
    /// The implicit relation obtained by replacing `h(u)` with `g(u)`.
    Approx,
    /// Direct integration of the model equation.
    Direct,
}

impl std::str::FromStr for BeamMode {
    type Err = AppsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approx" => Ok(BeamMode::Approx),
            "direct" => Ok(BeamMode::Direct),
            _ => Err(AppsError::InvalidParameter(format!("unknown beam mode `{s}` (expected approx or direct)"))),
        }
    }
}

impl BeamModel {
    pub fn new(alpha_coef: f64, beta_coef: f64, omega: f64, c1: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(AppsError::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        if ![alpha_coef, beta_coef, c1].iter().all(|p| p.is_finite()) {
            return Err(AppsError::InvalidParameter("beam coefficients must be finite".into()));
        }
        Ok(BeamModel { alpha_coef, beta_coef, omega, c1 })
    }

    fn check_alpha(&self) -> Result<f64> {
        if self.alpha_coef > 0.0 {
            Ok(self.alpha_coef)
        } else {
            Err(AppsError::NegativeAlpha(self.alpha_coef))
        }
    }

    /// `g(u) = ½[(2√α c₁ + asinh(√α u))/√(α(1 + αu²)) − u]`, the solution of
    /// `αu/(1 + αu²) = −g′/(u + g)`.
    pub fn g(&self, u: f64) -> Result<f64> {
        let a = self.check_alpha()?;
        let r = a.sqrt();
        Ok(0.5 * ((2.0 * r * self.c1 + (r * u).asinh()) / (a * (1.0 + a * u * u)).sqrt() - u))
    }

    /// [`g`](Self::g) as an expression in `u`.
    pub fn g_expr(&self) -> Result<Expr> {
        self.check_alpha()?;
        let params: Bindings = [("a", self.alpha_coef), ("c1", self.c1)].iter().map(|&(k, v)| (k.to_string(), v)).collect();
        Ok(parse("0.5*((2*sqrt(a)*c1 + asinh(sqrt(a)*u))/sqrt(a*(1 + a*u^2)) - u)")?.bind(&params)?)
    }

    /// `h(u) = (β − α)u³/(1 + αu²)`.
    pub fn h(&self, u: f64) -> f64 {
        (self.beta_coef - self.alpha_coef) * u.powi(3) / (1.0 + self.alpha_coef * u * u)
    }

    /// `ü` of the model equation.
    pub fn acceleration(&self, u: f64, v: f64) -> Result<f64> {
        let m = 1.0 + self.alpha_coef * u * u;
        if !(m > 0.0) {
            return Err(AppsError::InertiaSign { u });
        }
        let w2 = self.omega * self.omega;
        Ok(-(self.alpha_coef * u * v * v / m + w2 * (u + (self.beta_coef - self.alpha_coef) * u.powi(3) / m)))
    }
}

/// `u ↦ g(u)` for `model`.
pub fn beam_g(model: &BeamModel) -> Result<impl Fn(f64) -> f64 + '_> {
    model.check_alpha()?;
    Ok(move |u: f64| model.g(u).expect("alpha checked"))
}

/// Taylor coefficients about `u = 0` of `g` and `h`, index = power.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesComparison {
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    /// `|g₃ − h₃|`.
    pub u3_mismatch: f64,
    pub max_mismatch: f64,
}

/// `C(−1/2, j)`.
fn binom_minus_half(j: u32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (-0.5 - i as f64) / (i as f64 + 1.0))
}

/// Coefficient of `y^{2j+1}` in `asinh(y)/√(1 + y²)`:
/// `(−1)^j 4^j (j!)²/(2j + 1)!`.
fn asinh_ratio_coef(j: u32) -> f64 {
    let mut c = 1.0;
    for i in 1..=j {
        let i = i as f64;
        c *= -4.0 * i * i / ((2.0 * i) * (2.0 * i + 1.0));
    }
    c
}

pub fn beam_series_compare(model: &BeamModel, order: usize) -> Result<SeriesComparison> {
    if order > 6 {
        return Err(AppsError::InvalidParameter(format!("series order must be at most 6, got {order}")));
    }
    let (a, b) = (model.alpha_coef, model.beta_coef);
    let mut g = vec![0.0; order + 1];
    let mut h = vec![0.0; order + 1];
    for (k, gk) in g.iter_mut().enumerate() {
        let j = (k / 2) as u32;
        *gk = if k % 2 == 0 {
            model.c1 * binom_minus_half(j) * a.powi(j as i32)
        } else if k == 1 {
            0.0
        } else {
            0.5 * asinh_ratio_coef(j) * a.powi(j as i32)
        };
    }
    for (k, hk) in h.iter_mut().enumerate() {
        if k >= 3 && k % 2 == 1 {
            *hk = (b - a) * (-a).powi(((k - 3) / 2) as i32);
        }
    }
    let max_mismatch = g.iter().zip(&h).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let u3_mismatch = if order >= 3 { (g[3] - h[3]).abs() } else { 0.0 };
    Ok(SeriesComparison { g, h, u3_mismatch, max_mismatch })
}

/// The `c₁ = 0` relation `u e^{R(u)} = A sin θ`, where
/// `exp[2∫ du/(asinh(√α u)/√(α(1 + αu²)) + u)] = u e^{R(u)}` once the
/// logarithm of the integrand's `1/u` part is taken out analytically.
struct ApproxRelation {
    alpha: f64,
}

impl ApproxRelation {
    /// `P = 1 − asinh(y)/(y√(1 + y²))`, `y = √α s`; `u + g = u(2 − P)/2`.
    fn p(&self, s: f64) -> f64 {
        let y = self.alpha.sqrt() * s;
        if y.abs() < SERIES_PATCH {
            let y2 = y * y;
            (1..=5u32).fold(0.0, |acc, j| acc - asinh_ratio_coef(j) * y2.powi(j as i32))
        } else {
            1.0 - y.asinh() / (y * (1.0 + y * y).sqrt())
        }
    }

    /// `R(u) = ∫₀ᵘ [1/(s + g(s)) − 1/s] ds`; the integrand `P/(s(2 − P))` is
    /// odd and vanishes at the origin.
    fn r(&self, u: f64) -> Result<f64> {
        let integrand = |s: f64| {
            if s == 0.0 {
                0.0
            } else {
                let p = self.p(s);
                p / (s * (2.0 - p))
            }
        };
        Ok(quad(integrand, 0.0, u, QUAD_TOL)?)
    }

    /// `(L, dL/du)` with `L = u e^{R(u)}` and `dL/du = L/(u + g) = 2e^R/(2 − P)`.
    fn value(&self, u: f64) -> Result<(f64, f64)> {
        let e = self.r(u)?.exp();
        Ok((u * e, 2.0 * e / (2.0 - self.p(u))))
    }
}

/// Trajectory of `model` from `ic` to `t_end`, reported at `opts.samples`
/// (plus both ends).
pub fn beam_solve(model: &BeamModel, mode: BeamMode, ic: PhaseState, t_end: f64, opts: &SolveOptions) -> Result<Trajectory> {
    if !(t_end > ic.t) || !t_end.is_finite() {
        return Err(AppsError::InvalidParameter(format!("need t_end > t0, got [{}, {t_end}]", ic.t)));
    }
    match mode {
        BeamMode::Direct => solve_direct(model, ic, t_end, opts),
        BeamMode::Approx => solve_approx(model, ic, t_end, opts),
    }
}

fn solve_direct(model: &BeamModel, ic: PhaseState, t_end: f64, opts: &SolveOptions) -> Result<Trajectory> {
    let accel = |_t: f64, u: f64, v: f64| model.acceleration(u, v).map_err(|e| e.to_string());
    let problem = IvpProblem::new(Rhs::second_order(accel), ic.t, vec![ic.x, ic.v], t_end)
        .with_samples(opts.samples.clone())
        .with_tolerances(opts.rtol, opts.atol);
    let problem = IvpProblem { max_steps: opts.max_steps, ..problem };
    Ok(integrate(&problem)?)
}

fn solve_approx(model: &BeamModel, ic: PhaseState, t_end: f64, opts: &SolveOptions) -> Result<Trajectory> {
    let alpha = model.check_alpha()?;
    let (a, b) = (model.alpha_coef, model.beta_coef);
    if (b - 2.0 * a / 3.0).abs() > APPROX_REGIME_TOL * a.abs().max(1.0) {
        return Err(AppsError::ApproxOutOfRegime { alpha: a, beta: b });
    }
    if model.c1 != 0.0 {
        return Err(AppsError::InvalidParameter(format!("approximate mode uses c1 = 0, got {}", model.c1)));
    }
    let rel = ApproxRelation { alpha };
    let w = model.omega;
    // A sin θ₀ = L(u₀) and A ω cos θ₀ = L′(u₀) u̇₀
    let (l0, dl0) = rel.value(ic.x)?;
    let amp = l0.hypot(dl0 * ic.v / w);
    let theta0 = l0.atan2(dl0 * ic.v / w);

    let mut times: Vec<f64> = opts.samples.iter().copied().filter(|&t| t > ic.t && t < t_end).collect();
    times.push(t_end);
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut states = vec![ic];
    for t in times {
        let th = w * (t - ic.t) + theta0;
        let target = amp * th.sin();
        let u = if target == 0.0 {
            0.0
        } else {
            // L(u) ≥ u for u ≥ 0 and L is odd, so the root lies in [0, target]
            find_root_newton(
                |u| rel.value(u).map(|(l, dl)| (l - target, dl)).map_err(|e| e.to_string()),
                0.0,
                target,
                ROOT_TOL,
            )
            .map_err(|_| AppsError::ImplicitNoRoot { t })?
        };
        let (_, dl) = rel.value(u)?;
        states.push(PhaseState::new(t, u, amp * w * th.cos() / dl));
    }
    Ok(Trajectory {
        states,
        meta: TrajectoryMeta {
            integrator: "implicit/beam-approx".to_string(),
            rtol: ROOT_TOL,
            atol: QUAD_TOL,
            accepted_steps: 0,
            rejected_steps: 0,
        },
    })
}

/// Mean spacing of successive upward zero crossings of `x`, located by
/// cubic Hermite interpolation between samples. `None` with fewer than two
/// crossings.
pub fn crossing_period(traj: &Trajectory) -> Option<f64> {
    let mut ups = Vec::new();
    for w in traj.states.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        if s0.x < 0.0 && s1.x >= 0.0 {
            ups.push(hermite_zero(s0, s1));
        }
    }
    if ups.len() < 2 {
        return None;
    }
    Some((ups[ups.len() - 1] - ups[0]) / (ups.len() - 1) as f64)
}

fn hermite_zero(s0: PhaseState, s1: PhaseState) -> f64 {
    let h = s1.t - s0.t;
    let x = |r: f64| {
        let (r2, r3) = (r * r, r * r * r);
        (2.0 * r3 - 3.0 * r2 + 1.0) * s0.x
            + (r3 - 2.0 * r2 + r) * h * s0.v
            + (-2.0 * r3 + 3.0 * r2) * s1.x
            + (r3 - r2) * h * s1.v
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if x(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    s0.t + h * 0.5 * (lo + hi)
}

/// `2π/ω`, the period of the approximate relation.
pub fn approx_period(model: &BeamModel) -> f64 {
    2.0 * PI / model.omega
}
