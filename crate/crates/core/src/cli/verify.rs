//! Named check suites behind `lienard verify`. Each check reduces to one
//! maximum deviation compared against a fixed threshold; a check that
//! cannot be evaluated reports an infinite deviation.

use super::config::RunConfig;
use super::CliError;
use crate::apps::{
    beam_series_compare, beam_solve, rcd_from_fg, rcd_residual, rcd_travelling_wave, section_system, BeamMode,
    BeamModel, RcdRelations,
};
use crate::catalog::{
    case2, case3, case4_riccati, case5_power, case6, case7, case1, harmonic, hyp2f1, time_quadrature, CatalogSolution,
    RiccatiCase,
};
use crate::deform::{
    crossing_times, energy, energy_rate_formula, local_flow, local_flow_second_order, phase_function,
    solve_first_integral, solve_generated, trajectory_residual, unwrap_phase, DeformedOscillator, PhaseState,
    RiccatiFamily, SolveOptions, Trajectory,
};
use crate::expr::{parse, Bindings, Point};
use crate::numerics::{fd_derivatives, integrate, IvpProblem, Rhs, FD_STEP};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use std::io::Write;

pub const SUITES: [&str; 10] =
    ["theorem", "catalog", "phase", "energy", "isochrony", "hypergeometric", "rcd", "beam", "riccati", "all"];

/// Tolerances of the integrations inside the suites. The thresholds of the
/// checks stay fixed, so loosening these can make checks fail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-12, atol: 1e-14 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub max: f64,
    pub threshold: f64,
    /// Why the check could not be evaluated, when it could not.
    pub detail: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max < self.threshold
    }
}

type Outcome = Result<f64, String>;

fn check(name: impl Into<String>, threshold: f64, f: impl FnOnce() -> Outcome) -> Check {
    let (max, detail) = match f() {
        Ok(m) if !m.is_nan() => (m, None),
        Ok(_) => (f64::INFINITY, Some("NaN deviation".to_string())),
        Err(e) => (f64::INFINITY, Some(e)),
    };
    Check { name: name.into(), max, threshold, detail }
}

fn err(e: impl ToString) -> String {
    e.to_string()
}

fn osc(f: &str, g: &str, omega: f64) -> Result<DeformedOscillator, String> {
    DeformedOscillator::parse(f, g, omega, &Bindings::new()).map_err(err)
}

fn opts(tol: Tolerances, t0: f64, t1: f64, n: usize) -> SolveOptions {
    SolveOptions::uniform(t0, t1, n).with_tolerances(tol.rtol, tol.atol)
}

/// Run `name` and return its checks; `all` runs every suite in order.
pub fn run_suite(name: &str, tol: Tolerances) -> Result<Vec<Check>, CliError> {
    Ok(match name {
        "theorem" => theorem(tol),
        "catalog" => catalog(tol),
        "phase" => phase(tol),
        "energy" => energy_suite(tol),
        "isochrony" => isochrony(tol),
        "hypergeometric" => hypergeometric(),
        "rcd" => rcd(),
        "beam" => beam(tol),
        "riccati" => riccati(tol),
        "all" => {
            let mut all = Vec::new();
            for s in &SUITES[..SUITES.len() - 1] {
                all.extend(run_suite(s, tol)?);
            }
            all
        }
        other => return Err(CliError::Usage(format!("unknown suite `{other}`; known: {}", SUITES.join(", ")))),
    })
}

pub fn verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let name = cfg.suite.as_deref().ok_or_else(|| CliError::Usage("verify needs --suite <name>".into()))?;
    let (rtol, atol) = cfg.tolerances((Tolerances::default().rtol, Tolerances::default().atol));
    let checks = run_suite(name, Tolerances { rtol, atol })?;
    let io = CliError::from;
    writeln!(out, "check,max_residual,threshold,status").map_err(io)?;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{},{:.6e},{:.1e},{status}", c.name, c.max, c.threshold).map_err(io)?;
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| match &c.detail {
            Some(d) => format!("{}: {d}", c.name),
            None => c.name.clone(),
        })
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed))
    }
}

/// Deformations spanning t-only, x-only, v-only and mixed dependence, with
/// a start state and an end time. `None` ends the run `0.05` before the
/// first crossing: those deformations have `f ≠ ġ` at their crossings, where
/// no smooth continuation exists.
pub const THEOREM_PAIRS: [(&str, &str, &str, f64, (f64, f64, f64), Option<f64>); 10] = [
    ("t-sin", "0.5*sin(t)", "0", 1.0, (0.3, 0.4, 0.2), None),
    ("t-cos-g", "0", "0.3*cos(2*t)", 1.3, (0.2, 0.5, -0.1), None),
    ("t-energy", "0.3*cos(t)", "0.3*sin(t)", 1.0, (0.2, 0.5, 0.4), Some(0.2 + 2.0 * PI)),
    ("x-quadratic", "0.5*x^2", "0", 1.0, (1.0, 0.3, 0.1), Some(1.0 + 2.0 * PI)),
    ("x-cubic-g", "0", "0.3*x^3", 1.2, (0.1, 0.4, 0.2), Some(5.5)),
    ("x-mixed", "0.4*x", "0.2*x^2", 1.0, (0.4, 0.3, 0.1), Some(6.0)),
    ("v-linear-f", "0.3*v", "0", 1.0, (0.3, 0.5, 0.2), None),
    ("v-linear-g", "0", "0.2*v", 1.0, (0.5, 0.6, 0.2), Some(2.5)),
    ("mixed-tx", "0.2*x^2 + 0.1*t", "0.3*sin(t)*x", 1.4, (0.1, 0.5, 0.3), None),
    ("mixed-xv", "0.1*x*v + 0.2*x^2", "0.1*x^3", 1.0, (0.2, 0.4, 0.3), Some(6.0)),
];

/// `t1`, or `0.05` before the first crossing after `t0`.
fn run_end(o: &DeformedOscillator, t0: f64, t1: Option<f64>) -> f64 {
    t1.unwrap_or_else(|| {
        let next = ((o.omega * t0 + o.alpha) / PI).floor() + 1.0;
        (next * PI - o.alpha) / o.omega - 0.05
    })
}

fn theorem(tol: Tolerances) -> Vec<Check> {
    THEOREM_PAIRS
        .iter()
        .map(|&(name, f, g, w, (t0, x0, v0), t1)| {
            check(format!("theorem/{name}"), 1e-6, || {
                let start = PhaseState::new(t0, x0, v0);
                let o = osc(f, g, w)?.with_alpha_from_state(&start).map_err(err)?;
                let t1 = run_end(&o, t0, t1);
                let traj = solve_first_integral(&o, start, t1, &opts(tol, t0, t1, 120)).map_err(err)?;
                Ok(trajectory_residual(&o, &traj).worst())
            })
        })
        .collect()
}

/// One parameter set per catalog entry.
pub fn reference_catalog() -> Result<Vec<CatalogSolution>, String> {
    let f = parse("0.3*sin(2*t)").map_err(err)?;
    let g = parse("0.2*sin(t)^2").map_err(err)?;
    Ok(vec![
        harmonic(1.5, 1.3, 0.4).map_err(err)?,
        time_quadrature(&f, &g, 1.2, 1.0, 0.0, 0.7).map_err(err)?,
        case1(0.5, 5.0, 1.0, 0.3, 0.5).map_err(err)?,
        case2(0.4, 3.0, 1.1, 1.2, 0.2, 0.5).map_err(err)?,
        case3(1.0, 0.3, 0.05, 2.0, 1.5, 1.0, 0.0, 1.0).map_err(err)?,
        case4_riccati(0.8, 0.4, 1.0, 0.0, 1.0, 0.3).map_err(err)?,
        case5_power(0.3, 3.0, 0.8, 1.0, 0.0, 0.5).map_err(err)?,
        case6(1.0, 0.5, 1.0, 0.0, 1.0).map_err(err)?,
        case7(0.4, 1.0, 1.0, 0.0, 1.0).map_err(err)?,
    ])
}

/// One period from `t₀` for unbounded domains. Otherwise the domain less
/// `margin` at both ends, cut `margin` before the first interior zero of
/// `x`: the generated forms of cases 4 and 6 have regular singular points
/// there.
pub fn comparison_span(sol: &CatalogSolution, margin: f64) -> Result<(f64, f64), String> {
    let (lo, hi) = sol.domain;
    if !(lo.is_finite() && hi.is_finite()) {
        return Ok((sol.t0(), sol.t0() + 2.0 * PI / sol.omega()));
    }
    let (a, b) = (lo + margin, hi - margin);
    let xa = sol.eval(a).map_err(err)?;
    for i in 1..=400 {
        let t = a + (b - a) * i as f64 / 400.0;
        if sol.eval(t).map_err(err)? * xa <= 0.0 {
            return Ok((a, t - margin));
        }
    }
    Ok((a, b))
}

fn catalog(tol: Tolerances) -> Vec<Check> {
    let sols = match reference_catalog() {
        Ok(s) => s,
        Err(e) => return vec![check("catalog/build", 0.0, || Err(e))],
    };
    let mut out = Vec::new();
    for sol in &sols {
        let name = sol.case_id.name();
        out.push(check(format!("catalog/{name}/residual"), 1e-6, || {
            Ok(sol.residual_scan(&sol.sample_times(200, 0.05)).map_err(err)?.worst())
        }));
        out.push(check(format!("catalog/{name}/integration"), 1e-6, || {
            let (a, b) = comparison_span(sol, 0.05)?;
            let o = sol.oscillator().map_err(err)?;
            let traj = solve_generated(&o, sol.state(a).map_err(err)?, b, &opts(tol, a, b, 101)).map_err(err)?;
            traj.states.iter().try_fold(0.0f64, |m, s| Ok(m.max((s.x - sol.eval(s.t).map_err(err)?).abs())))
        }));
    }
    out
}

const PHASE_OSCILLATORS: [(&str, &str, f64); 3] =
    [("0", "0", 1.0), ("0.3*sin(t) + 0.2*x^2", "0.1*x*t", 1.3), ("0.2*v + 0.1*x", "0.3*cos(t)", 0.8)];

fn phase(tol: Tolerances) -> Vec<Check> {
    let mut out = vec![check("phase/unit-modulus", 1e-12, || {
        let mut rng = StdRng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for i in 0..1000 {
            let (f, g, w) = PHASE_OSCILLATORS[i % PHASE_OSCILLATORS.len()];
            let o = osc(f, g, w)?.with_alpha(rng.gen_range(-PI..PI));
            let s = PhaseState::new(rng.gen_range(-5.0..5.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            worst = worst.max((phase_function(&o, &s).map_err(err)?.norm() - 1.0).abs());
        }
        Ok(worst)
    })];
    let runs = [
        ("0", "0", 1.0, (0.0, 0.5, 0.3)),
        ("0.3*cos(t)", "0.3*sin(t)", 1.0, (0.2, 0.5, 0.4)),
        ("0.5*x^2", "0", 1.0, (1.0, 0.3, 0.1)),
        ("0", "0.3*x^3", 1.2, (0.1, 0.4, 0.2)),
        ("0.1*x*v + 0.2*x^2", "0.1*x^3", 1.0, (0.2, 0.4, 0.3)),
    ];
    for (i, &(f, g, w, (t0, x0, v0))) in runs.iter().enumerate() {
        out.push(check(format!("phase/argument-{}", i + 1), 1e-7, || {
            let start = PhaseState::new(t0, x0, v0);
            let o = osc(f, g, w)?.with_alpha_from_state(&start).map_err(err)?;
            let t1 = t0 + 4.0 * PI / w;
            let traj = solve_first_integral(&o, start, t1, &opts(tol, t0, t1, 400)).map_err(err)?;
            let args = traj.states.iter().map(|s| Ok(phase_function(&o, s).map_err(err)?.arg())).collect::<VecOutcome>()?;
            let unwrapped = unwrap_phase(&args);
            let d: Vec<f64> = unwrapped.iter().zip(&traj.states).map(|(a, s)| a + 2.0 * o.theta(s.t)).collect();
            let k = (d[0] / (2.0 * PI)).round() * 2.0 * PI;
            Ok(d.iter().fold(0.0f64, |m, x| m.max((x - k).abs())))
        }));
    }
    out
}

type VecOutcome = Result<Vec<f64>, String>;

fn energy_drift(tol: Tolerances, f: &str, g: &str, w: f64, start: PhaseState, t1: f64) -> Outcome {
    let o = osc(f, g, w)?.with_alpha_from_state(&start).map_err(err)?;
    let traj = solve_first_integral(&o, start, t1, &opts(tol, start.t, t1, 200)).map_err(err)?;
    let h0 = energy(&o, &traj.states[0]).map_err(err)?;
    traj.states.iter().try_fold(0.0f64, |m, s| Ok(m.max((energy(&o, s).map_err(err)? - h0).abs())))
}

/// `dH/dt` by the chain rule from finite-difference derivatives of the
/// local flow, against the closed rate formula, away from the crossings.
fn energy_rate_defect(tol: Tolerances, f: &str, g: &str, w: f64, start: PhaseState, t1: Option<f64>) -> Outcome {
    let o = osc(f, g, w)?.with_alpha_from_state(&start).map_err(err)?;
    let t1 = run_end(&o, start.t, t1);
    let traj = solve_first_integral(&o, start, t1, &opts(tol, start.t, t1, 120)).map_err(err)?;
    let p = o.partials();
    let mut worst = 0.0f64;
    for s in &traj.states {
        if o.theta(s.t).sin().abs() < 0.1 {
            continue;
        }
        let (x, v, a) = fd_derivatives(&local_flow(&o, *s), s.t, FD_STEP)?;
        let pt = Point::txv(s.t, x, v);
        let e = |ex: &crate::expr::Expr| ex.eval(&pt).map_err(err);
        let st = PhaseState::new(s.t, x, v);
        let (pp, q) = o.pq(&st).map_err(err)?;
        let p_dot = a + e(&p.f_t)? + e(&p.f_x)? * v + e(&p.f_v)? * a;
        let q_dot = v + e(&p.g_t)? + e(&p.g_x)? * v + e(&p.g_v)? * a;
        let chain = 2.0 * pp * p_dot + 2.0 * w * w * q * q_dot;
        worst = worst.max((chain - energy_rate_formula(&o, &st).map_err(err)?).abs());
    }
    Ok(worst)
}

fn energy_suite(tol: Tolerances) -> Vec<Check> {
    vec![
        check("energy/harmonic-drift", 1e-8, || energy_drift(tol, "0", "0", 1.0, PhaseState::new(0.0, 0.5, 0.8), 4.0 * PI)),
        check("energy/g-dot-equals-f-drift", 1e-8, || {
            energy_drift(tol, "0.3*cos(t)", "0.3*sin(t)", 1.0, PhaseState::new(0.2, 0.5, 0.4), 0.2 + 4.0 * PI)
        }),
        check("energy/rate-formula", 1e-6, || {
            energy_rate_defect(tol, "0.2*x^2 + 0.1*t", "0.3*sin(t)*x", 1.4, PhaseState::new(0.1, 0.5, 0.3), None)
        }),
    ]
}

/// Largest distance from a crossing to the nearest `(nπ − α)/ω`, and the
/// crossings themselves.
fn crossings(o: &DeformedOscillator, traj: &Trajectory) -> Result<(f64, Vec<f64>), String> {
    let ts = crossing_times(o, traj).map_err(err)?;
    let dev = ts.iter().fold(0.0f64, |m, &t| {
        let n = ((o.omega * t + o.alpha) / PI).round();
        m.max((t - (n * PI - o.alpha) / o.omega).abs())
    });
    Ok((dev, ts))
}

fn spacing(ts: &[f64]) -> Vec<f64> {
    ts.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Crossing-time deviation and the largest spacing difference between two
/// amplitudes, for a family that oscillates across several crossings.
fn isochrony_pair(tol: Tolerances, make: impl Fn(f64) -> Result<(DeformedOscillator, PhaseState), String>, amps: [f64; 2], t1: f64) -> Result<(f64, f64), String> {
    let mut dev = 0.0f64;
    let mut gaps = Vec::new();
    for a in amps {
        let (o, start) = make(a)?;
        let traj = solve_first_integral(&o, start, t1, &opts(tol, start.t, t1, 600)).map_err(err)?;
        let (d, ts) = crossings(&o, &traj)?;
        dev = dev.max(d);
        gaps.push(spacing(&ts));
    }
    if gaps[0].is_empty() || gaps[0].len() != gaps[1].len() {
        return Err(format!("crossing counts differ: {} vs {}", gaps[0].len(), gaps[1].len()));
    }
    let diff = gaps[0].iter().zip(&gaps[1]).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    Ok((dev, diff))
}

/// Case 7 has one crossing per branch: its branches are solved separately
/// and the spacing is taken between the crossings of adjacent branches.
fn isochrony_case7(tol: Tolerances, amps: [f64; 2]) -> Result<(f64, f64), String> {
    let mut dev = 0.0f64;
    let mut gaps = Vec::new();
    for a in amps {
        let mut ts = Vec::new();
        for t0 in [1.0, 1.0 + PI] {
            let sol = case7(0.4, a, 1.0, 0.0, t0).map_err(err)?;
            let (lo, hi) = (sol.domain.0 + 0.05, sol.domain.1 - 0.05);
            let o = sol.oscillator().map_err(err)?;
            let traj = solve_first_integral(&o, sol.state(lo).map_err(err)?, hi, &opts(tol, lo, hi, 300)).map_err(err)?;
            let (d, t) = crossings(&o, &traj)?;
            dev = dev.max(d);
            ts.extend(t);
        }
        gaps.push(spacing(&ts));
    }
    if gaps[0].len() != gaps[1].len() || gaps[0].is_empty() {
        return Err("crossing counts differ".into());
    }
    Ok((dev, gaps[0].iter().zip(&gaps[1]).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))))
}

fn isochrony(tol: Tolerances) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |label: &str, r: Result<(f64, f64), String>| {
        let (dev, diff) = match r {
            Ok(v) => (Ok(v.0), Ok(v.1)),
            Err(e) => (Err(e.clone()), Err(e)),
        };
        out.push(check(format!("isochrony/{label}/crossing-times"), 1e-6, || dev));
        out.push(check(format!("isochrony/{label}/spacing"), 1e-6, || diff));
    };
    let (w, al, t0) = (1.2, 0.2, 0.5);
    push(
        "case2",
        isochrony_pair(
            tol,
            |a| {
                let sol = case2(0.4, 3.0, a, w, al, t0).map_err(err)?;
                Ok((sol.oscillator().map_err(err)?, sol.state(t0).map_err(err)?))
            },
            [0.15, 1.5],
            t0 + 3.0 * 2.0 * PI / w,
        ),
    );
    push(
        "case4",
        isochrony_pair(
            tol,
            |x0| {
                let sol = case4_riccati(1.0, 0.0, 1.0, 0.0, 1.0, x0).map_err(err)?;
                Ok((sol.oscillator().map_err(err)?, sol.state(1.0).map_err(err)?))
            },
            [0.05, 0.5],
            1.0 + 3.0 * 2.0 * PI,
        ),
    );
    push("case7", isochrony_case7(tol, [0.2, 2.0]));
    out
}

fn hypergeometric() -> Vec<Check> {
    let zs = [0.1, 0.25, 0.5, 0.9];
    let mut out = vec![
        check("hypergeometric/power", 1e-12, || {
            zs.iter().try_fold(0.0f64, |m, &z| {
                Ok(m.max((hyp2f1(0.7, 1.3, 1.3, z).map_err(err)? - (1.0 - z).powf(-0.7)).abs()))
            })
        }),
        check("hypergeometric/log", 1e-12, || {
            zs.iter().try_fold(0.0f64, |m, &z| {
                Ok(m.max((hyp2f1(1.0, 1.0, 2.0, z).map_err(err)? + (1.0 - z).ln() / z).abs()))
            })
        }),
    ];
    for &(mu, nu, w, x0) in &[(1.0, 0.5, 1.0, 0.3), (0.7, -0.4, 1.3, -0.2), (1.2, 0.9, 0.8, 0.5)] {
        out.push(check(format!("hypergeometric/case4-paths/mu={mu},nu={nu}"), 1e-6, || {
            let case = RiccatiCase::new(mu, nu, w, 0.2, 1.0, x0).map_err(err)?;
            let (lo, hi) = case.domain();
            let mut worst = 0.0f64;
            for i in 1..200 {
                let t = lo + (hi - lo) * i as f64 / 200.0;
                if (w * t + 0.2f64).cos().abs() > 0.9 {
                    continue;
                }
                worst = worst.max((case.riccati_path(t).map_err(err)? - case.series_path(t).map_err(err)?).abs());
            }
            Ok(worst)
        }));
    }
    out
}

fn wave_residual(beta: f64, gamma: f64, delta: f64) -> Outcome {
    let wave = rcd_travelling_wave(beta, gamma, delta, 2.0, 1.0, 0.0, 0.2).map_err(err)?;
    let xs: Vec<f64> = (0..60).map(|i| 0.3 + 2.5 * i as f64 / 59.0).collect();
    let us = xs.iter().map(|&x| wave.eval(x).map_err(err)).collect::<VecOutcome>()?;
    let (lo, hi) = us.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &u| (a.min(u), b.max(u)));
    let sys = section_system(beta, gamma, delta, 1.0, 0.5, 1.0, (0.5 * lo, 2.0 * hi)).map_err(err)?;
    let u_of_xi = |xi: f64| wave.eval(xi).map_err(err);
    Ok(rcd_residual(&sys, &u_of_xi, &xs).worst())
}

fn rcd() -> Vec<Check> {
    let mut out: Vec<Check> = [(1.0, 0.3, 1.0), (2.0, 0.1, 0.5), (1.5, -0.2, 0.8)]
        .iter()
        .map(|&(b, g, d)| check(format!("rcd/wave-residual/beta={b}"), 1e-6, || wave_residual(b, g, d)))
        .collect();
    out.push(check("rcd/closed-vs-quadrature", 1e-9, || {
        let w = rcd_travelling_wave(1.0, 0.5, 1.0, 2.0, 1.0, 0.0, 0.1).map_err(err)?;
        (0..40).try_fold(0.0f64, |m, i| {
            let xi = 0.1 + 2.9 * i as f64 / 39.0;
            Ok(m.max((w.eval_closed(xi).map_err(err)? - w.eval_quadrature(xi).map_err(err)?).abs()))
        })
    }));
    for (f, g) in [("0.5*u", "0.25*u^2"), ("-0.3*u + 0.2*u^2", "0.5*u")] {
        out.push(check(format!("rcd/inverse/f={f},g={g}"), 1e-9, || {
            let (fe, ge) = (parse(f).map_err(err)?, parse(g).map_err(err)?);
            let rel = RcdRelations::new(&fe, &ge, 1.2).map_err(err)?;
            let sys = rcd_from_fg(&fe, &ge, 1.2, 0.3, 1.5, (0.2, 2.0)).map_err(err)?;
            let mut rng = StdRng::seed_from_u64(11);
            let mut worst = 0.0f64;
            for _ in 0..100 {
                let u = rng.gen_range(0.2..2.0);
                let (a, b, c) = sys.coefficients(u).map_err(err)?;
                let want = (rel.alpha(u).map_err(err)?, rel.beta(u).map_err(err)?, rel.gamma(u).map_err(err)?);
                worst = worst.max((a - want.0).abs()).max((b - want.1).abs()).max((c - want.2).abs());
            }
            Ok(worst)
        }));
    }
    out
}

/// Odd part `(y(u) − y(−u))/(2u³)` at `u, u/2, u/4, u/8`, extrapolated in
/// `u²`; tends to the `u³` coefficient when the linear one vanishes.
pub fn cubic_coefficient(y: impl Fn(f64) -> Result<f64, String>, u: f64) -> Outcome {
    let mut row = Vec::new();
    for k in 0..4 {
        let s = u / f64::powi(2.0, k);
        row.push((y(s)? - y(-s)?) / (2.0 * s * s * s));
    }
    for level in 1..row.len() {
        let w = f64::powi(4.0, level as i32);
        row = row.windows(2).map(|p| (w * p[1] - p[0]) / (w - 1.0)).collect();
    }
    Ok(row[0])
}

fn beam(tol: Tolerances) -> Vec<Check> {
    let mut out = vec![check("beam/g-ode", 1e-9, || {
        let mut worst = 0.0f64;
        for &(a, c1) in &[(3.0, 0.0), (0.7, 0.25)] {
            let m = BeamModel::new(a, 2.0 * a / 3.0, 1.0, c1).map_err(err)?;
            let g = |u: f64| m.g(u).map_err(err);
            for i in 1..40 {
                let u = 0.02 * i as f64;
                let (gv, dg, _) = fd_derivatives(&g, u, 1e-3)?;
                worst = worst.max((a * u / (1.0 + a * u * u) + dg / (u + gv)).abs());
            }
        }
        Ok(worst)
    })];
    out.push(check("beam/u3-coefficients", 1e-10, || {
        let m = BeamModel::new(3.0, 2.0, 1.0, 0.0).map_err(err)?;
        let cg = cubic_coefficient(|u| m.g(u).map_err(err), 0.04)?;
        let ch = cubic_coefficient(|u| Ok(m.h(u)), 0.04)?;
        let exact = beam_series_compare(&m, 3).map_err(err)?;
        Ok((cg - ch).abs().max((cg - exact.g[3]).abs()).max((ch - exact.h[3]).abs()))
    }));
    out.push(check("beam/approx-vs-direct", 1e-3, || {
        let m = BeamModel::new(3.0, 2.0, 1.0, 0.0).map_err(err)?;
        let ic = PhaseState::new(0.0, 0.05, 0.0);
        let o = opts(tol, 0.0, 2.0 * PI, 101);
        let a = beam_solve(&m, BeamMode::Approx, ic, 2.0 * PI, &o).map_err(err)?;
        let d = beam_solve(&m, BeamMode::Direct, ic, 2.0 * PI, &o).map_err(err)?;
        Ok(a.states.iter().zip(&d.states).fold(0.0f64, |m, (p, q)| m.max((p.x - q.x).abs())))
    }));
    out
}

fn riccati_case(tol: Tolerances, b: f64, w: f64) -> Result<(f64, f64), String> {
    let fam = RiccatiFamily::new(b, w).map_err(err)?;
    let form = fam.form();
    let accel = move |_t: f64, x: f64, v: f64| fam.acceleration(x, v);
    let t1 = if b.abs() > w { 2.0 } else { 1.5 };
    let problem = IvpProblem::new(Rhs::second_order(accel), 0.0, vec![1.0, 0.0], t1)
        .with_uniform_samples(61)
        .with_tolerances(tol.rtol, tol.atol);
    let traj = integrate(&problem).map_err(err)?;
    let mut residual = 0.0f64;
    for s in &traj.states[1..traj.states.len() - 1] {
        let (x, v, a) = fd_derivatives(&local_flow_second_order(accel, *s), s.t, FD_STEP)?;
        residual = residual.max(form.residual_at(s.t, x, v, a).map_err(err)?.abs());
    }
    let alpha = fam.fit_alpha(&traj.states).map_err(err)?;
    Ok((residual, fam.max_deviation(&traj.states, alpha).map_err(err)?))
}

fn riccati(tol: Tolerances) -> Vec<Check> {
    let mut out = Vec::new();
    for &(b, w) in &[(2.0, 1.0), (0.5, 1.0)] {
        let r = riccati_case(tol, b, w);
        let (res, dev) = match &r {
            Ok((p, q)) => (Ok(*p), Ok(*q)),
            Err(e) => (Err(e.clone()), Err(e.clone())),
        };
        out.push(check(format!("riccati/residual/b={b},omega={w}"), 1e-8, || res));
        out.push(check(format!("riccati/tanh-formula/b={b},omega={w}"), 1e-6, || dev));
    }
    out
}
