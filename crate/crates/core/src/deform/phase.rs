use super::ode::{explicit_acceleration, generate_ode};
use super::{DeformError, DeformedOscillator, PhaseState, Result, Trajectory};
use crate::expr::{Point, Var};
use crate::numerics::find_root;
use num_complex::Complex64;
use std::f64::consts::PI;

/// `X̃ = ã/ã⁺` with `ã = (ẋ + f) − iω(x + g)` and `ã⁺` its conjugate.
/// Along every solution `X̃ = e^{−2i(ωt + α)}`.
pub fn phase_function(osc: &DeformedOscillator, s: &PhaseState) -> Result<Complex64> {
    let (p, q) = osc.pq(s)?;
    let a = Complex64::new(p, -osc.omega * q);
    if a.norm_sqr() == 0.0 {
        return Err(DeformError::ZeroDenominator { t: s.t });
    }
    Ok(a / a.conj())
}

/// `H = ã ã⁺ = (ẋ + f)² + ω²(x + g)²`.
pub fn energy(osc: &DeformedOscillator, s: &PhaseState) -> Result<f64> {
    let (p, q) = osc.pq(s)?;
    Ok(p * p + osc.omega * osc.omega * q * q)
}

/// `dH/dt = 2ω²(x + g)(ġ − f)/sin²(ωt + α)` along solutions, with `ġ`
/// the total derivative of `g`. When `g` depends on `v`, `ẍ` is taken from
/// the generated equation.
pub fn energy_rate_formula(osc: &DeformedOscillator, s: &PhaseState) -> Result<f64> {
    let pt = Point::txv(s.t, s.x, s.v);
    let p = osc.partials();
    let mut g_dot = p.g_t.eval(&pt)? + p.g_x.eval(&pt)? * s.v;
    if osc.g.depends_on(Var::V) {
        let a = explicit_acceleration(&generate_ode(osc), s)?;
        g_dot += p.g_v.eval(&pt)? * a;
    }
    let (_, q) = osc.pq(s)?;
    let f = osc.f_at(s)?;
    let sin = osc.theta(s.t).sin();
    if sin == 0.0 {
        return Err(DeformError::CotangentPole { t: s.t });
    }
    Ok(2.0 * osc.omega * osc.omega * q * (g_dot - f) / (sin * sin))
}

/// Times where `x + g` changes sign along `traj`, located by root finding
/// on the trajectory's Hermite interpolant. On a solution of the first
/// integral these are the crossing times `(nπ − α)/ω`.
pub fn crossing_times(osc: &DeformedOscillator, traj: &Trajectory) -> Result<Vec<f64>> {
    let q_at = |s: &PhaseState| osc.pq(s).map(|(_, q)| q);
    let qs = traj.states.iter().map(q_at).collect::<Result<Vec<f64>>>()?;
    let mut out = Vec::new();
    for i in 0..qs.len() {
        if qs[i] == 0.0 {
            out.push(traj.states[i].t);
            continue;
        }
        if i + 1 < qs.len() && qs[i + 1] != 0.0 && qs[i].signum() != qs[i + 1].signum() {
            let (lo, hi) = (traj.states[i].t, traj.states[i + 1].t);
            let q_of_t = |t: f64| {
                let s = traj.interpolate(t).ok_or_else(|| format!("{t} outside trajectory"))?;
                q_at(&s).map_err(|e| e.to_string())
            };
            out.push(find_root(q_of_t, lo, hi, 1e-14 * hi.abs().max(1.0))?);
        }
    }
    if out.is_empty() {
        return Err(DeformError::NoCrossing);
    }
    Ok(out)
}

/// Remove `2π` jumps from a sequence of angles.
pub fn unwrap_phase(angles: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(angles.len());
    let mut offset = 0.0;
    for (i, &a) in angles.iter().enumerate() {
        if i > 0 {
            let d = a + offset - out[i - 1];
            offset -= 2.0 * PI * (d / (2.0 * PI)).round();
        }
        out.push(a + offset);
    }
    out
}
