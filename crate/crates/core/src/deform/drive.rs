//! Integration drivers that carry solutions across the crossing times
//! `tₙ = (nπ − α)/ω`, where the first integral has a cotangent pole and the
//! generated equation has a vanishing leading coefficient.
//!
//! Each crossing is surrounded by a window `[tₙ − δ, tₙ + δ]`. The first
//! integral is integrated up to the window, the window is crossed with the
//! generated second-order equation (whose leading coefficient vanishes only
//! removably on solutions), and the first integral restarts on the far side.

use super::first_integral::{cot_factor, crossing_defect, crossing_exponent, solve_velocity};
use super::ode::{generate_ode, regularized_acceleration, OdeForm};
use super::{pole_times, DeformError, DeformedOscillator, PhaseState, Result, Trajectory, TrajectoryMeta};
use crate::numerics::{
    fd_derivatives, integrate, rk4_flow, IvpProblem, ResidualReport, Rhs, DEFAULT_ATOL, DEFAULT_RTOL, FD_STEP,
};
use std::cell::Cell;

/// Crossings whose perturbation exponent exceeds this are refused. The
/// exponent is estimated a window width away from the crossing, so the
/// limit sits slightly above the threshold value 2.
pub const MAX_CROSSING_EXPONENT: f64 = 2.05;

/// Crossings whose projected `|f − ġ|` exceeds this fraction of
/// `max(1, |v + f|)` are refused before the window is entered. The
/// projection keeps the velocity of the window edge, so the check is loose;
/// a window that then fails to integrate is attributed to the defect when
/// it is non-zero at all.
pub const SINGULAR_CROSSING_TOL: f64 = 1e-3;

/// Largest step of the local re-integrations used for residual checks.
pub const LOCAL_SUBSTEP: f64 = 5e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Output times; the start and end times are always reported.
    pub samples: Vec<f64>,
    /// Half-width of the window around each crossing; `1e-2/ω` when unset.
    pub pole_window: Option<f64>,
    pub max_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { rtol: DEFAULT_RTOL, atol: DEFAULT_ATOL, samples: Vec::new(), pole_window: None, max_steps: 2_000_000 }
    }
}

impl SolveOptions {
    /// `n` equally spaced output times over `[t0, t1]`.
    pub fn uniform(t0: f64, t1: f64, n: usize) -> Self {
        let n = n.max(2);
        let samples = (0..n).map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64).collect();
        SolveOptions { samples, ..Default::default() }
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    fn delta(&self, omega: f64) -> f64 {
        self.pole_window.unwrap_or(1e-2 / omega)
    }
}

/// Integrate the first integral `ẋ + f = ω cot(ωt + α)(x + g)` with the
/// oscillator's own `α` from `start` to `t_end`. `start.v` only seeds the
/// velocity solve; it is used as data when the start lies inside a
/// crossing window, where the generated second-order form takes over.
pub fn solve_first_integral(
    osc: &DeformedOscillator,
    start: PhaseState,
    t_end: f64,
    opts: &SolveOptions,
) -> Result<Trajectory> {
    let guess = Cell::new(start.v);
    let slope = |t: f64, x: f64| {
        let v = solve_velocity(osc, t, x, guess.get()).map_err(|e| e.to_string())?;
        guess.set(v);
        Ok(v)
    };
    let form = generate_ode(osc);
    let segment = |s: PhaseState, end: f64, times: &[f64]| {
        let problem = IvpProblem::new(Rhs::first_order(slope), s.t, vec![s.x], end)
            .with_samples(times.to_vec())
            .with_tolerances(opts.rtol, opts.atol);
        let problem = IvpProblem { max_steps: opts.max_steps, ..problem };
        Ok(integrate(&problem)?)
    };
    let restart = |s: PhaseState| -> Result<PhaseState> {
        let v = solve_velocity(osc, s.t, s.x, s.v)?;
        guess.set(v);
        Ok(PhaseState { v, ..s })
    };
    let first = if cot_factor(osc, start.t).is_ok() { restart(start)? } else { start };
    let inside = |s: PhaseState, end: f64, times: &[f64]| second_order_segment(&form, s, end, times, opts);
    let label = "dopri5/first-integral";
    drive(osc, first, t_end, opts, &segment, &inside, &restart, label)
}

/// Integrate the generated second-order equation of `osc` from the full
/// state `start`. The phase constant is refitted from `start`, and the
/// crossing windows of that phase are bridged.
pub fn solve_generated(
    osc: &DeformedOscillator,
    start: PhaseState,
    t_end: f64,
    opts: &SolveOptions,
) -> Result<Trajectory> {
    let osc = osc.clone().with_alpha_from_state(&start)?;
    let form = generate_ode(&osc);
    let segment = |s: PhaseState, end: f64, times: &[f64]| second_order_segment(&form, s, end, times, opts);
    let restart = |s: PhaseState| Ok(s);
    let label = "dopri5/generated";
    drive(&osc, start, t_end, opts, &segment, &segment, &restart, label)
}

fn second_order_segment(
    form: &OdeForm,
    s: PhaseState,
    end: f64,
    times: &[f64],
    opts: &SolveOptions,
) -> Result<Trajectory> {
    let accel = |t: f64, x: f64, v: f64| regularized_acceleration(form, &PhaseState::new(t, x, v)).map_err(|e| e.to_string());
    let problem = IvpProblem::new(Rhs::second_order(accel), s.t, vec![s.x, s.v], end)
        .with_samples(times.to_vec())
        .with_tolerances(opts.rtol, opts.atol);
    let problem = IvpProblem { max_steps: opts.max_steps, ..problem };
    Ok(integrate(&problem)?)
}

type Segment<'a> = dyn Fn(PhaseState, f64, &[f64]) -> Result<Trajectory> + 'a;

#[allow(clippy::too_many_arguments)]
fn drive(
    osc: &DeformedOscillator,
    start: PhaseState,
    t_end: f64,
    opts: &SolveOptions,
    segment: &Segment<'_>,
    inside_window: &Segment<'_>,
    restart: &dyn Fn(PhaseState) -> Result<PhaseState>,
    label: &str,
) -> Result<Trajectory> {
    if !(t_end > start.t) || !t_end.is_finite() {
        return Err(DeformError::InvalidSpan(format!("need t_end > t0, got [{}, {t_end}]", start.t)));
    }
    let (omega, alpha) = (osc.omega, osc.alpha);
    let delta = opts.delta(omega);
    let mut wanted: Vec<f64> = opts.samples.iter().copied().filter(|&t| t > start.t && t < t_end).collect();
    wanted.push(t_end);
    wanted.sort_by(f64::total_cmp);
    wanted.dedup();
    let is_wanted = |t: f64| wanted.binary_search_by(|w| w.total_cmp(&t)).is_ok();
    let wanted_in = |a: f64, b: f64| wanted.iter().copied().filter(move |&t| t > a && t <= b);

    let mut out = vec![start];
    let mut cur = start;
    let (mut accepted, mut rejected) = (0, 0);
    let mut tally = |traj: &Trajectory| {
        accepted += traj.meta.accepted_steps;
        rejected += traj.meta.rejected_steps;
    };

    for pole in pole_times(omega, alpha, start.t - delta, t_end + delta) {
        let (a, b) = (pole - delta, pole + delta);
        if b <= cur.t {
            continue;
        }
        if cur.t >= t_end {
            break;
        }
        if a > cur.t {
            let end = a.min(t_end);
            let times: Vec<f64> = wanted_in(cur.t, end).collect();
            let traj = segment(cur, end, &times)?;
            tally(&traj);
            out.extend(traj.states.iter().skip(1).filter(|s| is_wanted(s.t)));
            cur = *traj.states.last().expect("integrator returns the end state");
            if end >= t_end {
                break;
            }
        }
        let defect = if pole < t_end { refuse_ambiguous_crossing(osc, &cur, pole)? } else { None };
        let bend = b.min(t_end);
        let times: Vec<f64> = wanted_in(cur.t, bend).collect();
        let traj = inside_window(cur, bend, &times).map_err(|e| match defect {
            Some(d) if d != 0.0 => DeformError::SingularCrossing { t: pole, defect: d },
            _ => e,
        })?;
        tally(&traj);
        out.extend(traj.states.iter().skip(1).filter(|s| is_wanted(s.t)));
        cur = *traj.states.last().expect("integrator returns the end state");
        if bend < t_end {
            cur = restart(cur)?;
        }
    }
    if cur.t < t_end {
        let times: Vec<f64> = wanted_in(cur.t, t_end).collect();
        let traj = segment(cur, t_end, &times)?;
        tally(&traj);
        out.extend(traj.states.iter().skip(1).filter(|s| is_wanted(s.t)));
    }
    Ok(Trajectory {
        states: out,
        meta: TrajectoryMeta {
            integrator: label.to_string(),
            rtol: opts.rtol,
            atol: opts.atol,
            accepted_steps: accepted,
            rejected_steps: rejected,
        },
    })
}

/// Refuse crossings without a unique or a smooth continuation; returns the
/// projected `f − ġ` when it could be evaluated.
fn refuse_ambiguous_crossing(osc: &DeformedOscillator, s: &PhaseState, pole: f64) -> Result<Option<f64>> {
    if (s.t - pole).abs() < 1e-12 {
        return Ok(None);
    }
    let exponent = match crossing_exponent(osc, s, pole) {
        Ok(k) => k,
        Err(DeformError::CotangentPole { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    if exponent > MAX_CROSSING_EXPONENT {
        return Err(DeformError::NonUniqueCrossing { t: pole, exponent });
    }
    match crossing_defect(osc, s, pole)? {
        Some((d, p)) if d.abs() > SINGULAR_CROSSING_TOL * p.abs().max(1.0) => {
            Err(DeformError::SingularCrossing { t: pole, defect: d })
        }
        Some((d, _)) => Ok(Some(d)),
        None => Ok(None),
    }
}

/// `x(τ)` of the first-integral flow through `anchor`, by classical RK4
/// with steps of at most [`LOCAL_SUBSTEP`]. Smooth in `τ`, so it can be
/// differentiated by finite differences.
pub fn local_flow<'a>(osc: &'a DeformedOscillator, anchor: PhaseState) -> impl Fn(f64) -> std::result::Result<f64, String> + 'a {
    move |tau: f64| {
        let guess = Cell::new(anchor.v);
        let rhs = Rhs::first_order(|t, x| {
            let v = solve_velocity(osc, t, x, guess.get()).map_err(|e| e.to_string())?;
            guess.set(v);
            Ok(v)
        });
        rk4_flow(&rhs, anchor.t, &[anchor.x], tau, LOCAL_SUBSTEP).map(|y| y[0]).map_err(|e| e.to_string())
    }
}

/// `x(τ)` of the second-order flow `ẍ = accel(t, x, ẋ)` through `anchor`.
pub fn local_flow_second_order<'a>(
    accel: impl Fn(f64, f64, f64) -> std::result::Result<f64, String> + Clone + 'a,
    anchor: PhaseState,
) -> impl Fn(f64) -> std::result::Result<f64, String> + 'a {
    move |tau: f64| {
        let rhs = Rhs::second_order(accel.clone());
        rk4_flow(&rhs, anchor.t, &[anchor.x, anchor.v], tau, LOCAL_SUBSTEP).map(|y| y[0]).map_err(|e| e.to_string())
    }
}

/// Residual of the generated equation of `osc` along `traj`. At each
/// sample the first-integral flow is re-integrated locally and
/// differentiated by finite differences. Samples whose stencil comes within
/// `1e-2/ω` of a crossing are skipped.
pub fn trajectory_residual(osc: &DeformedOscillator, traj: &Trajectory) -> ResidualReport {
    let form = generate_ode(osc);
    let guard = 1e-2 / osc.omega + FD_STEP;
    let mut report = ResidualReport::new();
    for s in &traj.states {
        if !pole_times(osc.omega, osc.alpha, s.t - guard, s.t + guard).is_empty() {
            continue;
        }
        let flow = local_flow(osc, *s);
        let r = fd_derivatives(&flow, s.t, FD_STEP)
            .and_then(|(x, v, a)| form.residual_at(s.t, x, v, a).map_err(|e| e.to_string()));
        report.record(s.t, r);
    }
    report
}
