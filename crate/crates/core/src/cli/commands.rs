use super::config::{Method, RunConfig};
use super::{write_csv, CliError};
use crate::apps::{beam_solve, rcd_travelling_wave, BeamModel};
use crate::catalog::{CaseId, CatalogSolution};
use crate::deform::{
    generate_ode, generate_ode_time_varying, solve_first_integral, solve_generated, DeformedOscillator, OdeForm,
    PhaseState, SolveOptions, TimeVaryingOscillator, Trajectory,
};
use crate::expr::{parse, Bindings, Expr, Func, Var};
use crate::numerics::{DEFAULT_ATOL, DEFAULT_RTOL};
use std::io::Write;

/// `ω` as given: a constant, or an expression in `t`.
enum Frequency {
    Constant(f64),
    Varying(Expr),
}

fn frequency(cfg: &RunConfig) -> Result<Frequency, CliError> {
    let e = parse(&cfg.omega)?.bind(&cfg.params)?;
    if e.depends_on(Var::T) {
        return Ok(Frequency::Varying(e));
    }
    match e.as_const() {
        Some(w) => Ok(Frequency::Constant(w)),
        None => Err(CliError::Usage(format!("omega must be a number or an expression in t, got `{}`", cfg.omega))),
    }
}

fn constant_frequency(cfg: &RunConfig) -> Result<f64, CliError> {
    match frequency(cfg)? {
        Frequency::Constant(w) => Ok(w),
        Frequency::Varying(_) => Err(CliError::Usage(format!("{} needs a constant omega", cfg.command))),
    }
}

fn required(params: &Bindings, name: &str) -> Result<f64, CliError> {
    params.get(name).copied().ok_or_else(|| CliError::Usage(format!("missing --param {name}=<value>")))
}

fn options(cfg: &RunConfig) -> SolveOptions {
    let (rtol, atol) = cfg.tolerances((DEFAULT_RTOL, DEFAULT_ATOL));
    SolveOptions { samples: cfg.grid(), ..Default::default() }.with_tolerances(rtol, atol)
}

fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.states.iter().map(|s| vec![s.t, s.x, s.v]).collect()
}

fn io(e: std::io::Error) -> CliError {
    CliError::from(e)
}

fn write_form(out: &mut dyn Write, label: &str, form: &OdeForm) -> Result<(), CliError> {
    writeln!(out, "{label}: {form}").map_err(io)?;
    writeln!(out, "  coeff_xdd: {}", form.coeff_xdd).map_err(io)?;
    writeln!(out, "  coeff_xd: {}", form.coeff_xd).map_err(io)?;
    writeln!(out, "  remainder: {}", form.remainder).map_err(io)
}

/// `ẋ + f` and `x + g` as expressions.
fn pq_exprs(f: &Expr, g: &Expr) -> (Expr, Expr) {
    (Expr::add(Expr::var(Var::V), f.clone()), Expr::add(Expr::var(Var::X), g.clone()))
}

/// `ω cot(ωt + α)·q`.
fn first_integral_rhs(q: &Expr, omega: Expr, alpha: Expr) -> Expr {
    let theta = Expr::add(Expr::mul(omega.clone(), Expr::var(Var::T)), alpha);
    Expr::mul(Expr::mul(omega, Expr::call(Func::Cot, theta)), q.clone())
}

pub fn derive(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let (f, g) = (parse(&cfg.f)?.bind(&cfg.params)?, parse(&cfg.g)?.bind(&cfg.params)?);
    writeln!(out, "f = {f}").map_err(io)?;
    writeln!(out, "g = {g}").map_err(io)?;
    match frequency(cfg)? {
        Frequency::Constant(w) => {
            let osc = DeformedOscillator::new(&f, &g, w, &Bindings::new())?;
            let form = generate_ode(&osc);
            writeln!(out, "omega = {w}").map_err(io)?;
            write_form(out, "ode", &form)?;
            write_form(out, "ode (bound)", &form.bound()?)?;
            let (p, q) = pq_exprs(&osc.f, &osc.g);
            let rhs = first_integral_rhs(&q, Expr::param("omega"), Expr::param("alpha"));
            let alpha = cfg.alpha.map_or_else(|| Expr::param("alpha"), Expr::num);
            let bound = first_integral_rhs(&q, Expr::num(w), alpha);
            writeln!(out, "first integral: {p} = {rhs}").map_err(io)?;
            writeln!(out, "first integral (bound): {p} = {bound}").map_err(io)?;
            if osc.is_implicit() {
                writeln!(out, "note: f or g depends on v, the first integral is implicit in the velocity").map_err(io)?;
            }
        }
        Frequency::Varying(w) => {
            let form = generate_ode_time_varying(&f, &g, &w)?;
            writeln!(out, "omega = {w}").map_err(io)?;
            write_form(out, "ode", &form)?;
            let (p, q) = pq_exprs(&f, &g);
            let alpha = cfg.alpha.map_or("alpha".to_string(), |a| a.to_string());
            writeln!(out, "first integral: {p} = ({w})*cot(Phi(t) + {alpha})*({q}), Phi(t) = integral of omega from t0")
                .map_err(io)?;
        }
    }
    Ok(())
}

pub fn solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let (f, g) = (parse(&cfg.f)?, parse(&cfg.g)?);
    let start = PhaseState::new(cfg.t0, cfg.x0, cfg.v0);
    let t_end = cfg.t_end();
    let traj = match frequency(cfg)? {
        Frequency::Constant(w) => {
            let osc = DeformedOscillator::new(&f, &g, w, &cfg.params)?;
            let osc = match cfg.alpha {
                Some(a) => osc.with_alpha(a),
                None => osc.with_alpha_from_state(&start)?,
            };
            match cfg.method {
                Method::FirstIntegral => solve_first_integral(&osc, start, t_end, &options(cfg))?,
                Method::Generated => solve_generated(&osc, start, t_end, &options(cfg))?,
            }
        }
        Frequency::Varying(w) => {
            if cfg.method == Method::Generated {
                return Err(CliError::Usage("a time-dependent omega is solved through its first integral only".into()));
            }
            let osc = TimeVaryingOscillator::new(&f, &g, &w, &cfg.params)?;
            let osc = match cfg.alpha {
                Some(a) => TimeVaryingOscillator { alpha: a, t_ref: cfg.t0, ..osc },
                None => osc.with_state(&start)?,
            };
            osc.solve(cfg.x0, t_end, &cfg.grid())?
        }
    };
    write_csv(out, &["t", "x", "v"], &trajectory_rows(&traj))
}

pub fn rcd(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let p = &cfg.params;
    let w = constant_frequency(cfg)?;
    let wave = rcd_travelling_wave(
        required(p, "beta")?,
        required(p, "gamma")?,
        required(p, "delta")?,
        required(p, "A")?,
        w,
        cfg.alpha.unwrap_or(0.0),
        p.get("xi0").copied().unwrap_or(cfg.t0),
    )?;
    let rows = cfg.grid().into_iter().map(|xi| Ok(vec![xi, wave.eval(xi)?])).collect::<Result<Vec<_>, CliError>>()?;
    write_csv(out, &["xi", "u"], &rows)
}

pub fn beam(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("beam needs --{flag}")));
    let model = BeamModel::new(
        need(cfg.alpha_coef, "alpha-coef")?,
        need(cfg.beta_coef, "beta-coef")?,
        constant_frequency(cfg)?,
        cfg.params.get("c1").copied().unwrap_or(0.0),
    )?;
    let traj = beam_solve(&model, cfg.mode, PhaseState::new(cfg.t0, cfg.x0, cfg.v0), cfg.t_end(), &options(cfg))?;
    write_csv(out, &["t", "u", "v"], &trajectory_rows(&traj))
}

pub fn catalog(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let case: CaseId = cfg.case.as_deref().ok_or_else(|| CliError::Usage("catalog needs --case <name>".into()))?.parse()?;
    let mut params = cfg.params.clone();
    let names = case.param_names();
    params.entry("omega".into()).or_insert(constant_frequency(cfg)?);
    if let Some(a) = cfg.alpha {
        params.entry("alpha".into()).or_insert(a);
    }
    if names.contains(&"t0") {
        params.entry("t0".into()).or_insert(cfg.t0);
    }
    let (f, g) = (parse(&cfg.f)?, parse(&cfg.g)?);
    let fg = (case == CaseId::TimeQuadrature).then_some((&f, &g));
    let sol = CatalogSolution::build(case, &params, fg)?;
    let times = match cfg.t1 {
        Some(_) => cfg.grid(),
        None => {
            let width = sol.domain.1 - sol.domain.0;
            let margin = if width.is_finite() { 0.01 * width } else { 0.0 };
            sol.sample_times(cfg.samples, margin)
        }
    };
    let rows = times
        .into_iter()
        .map(|t| {
            let s = sol.state(t)?;
            Ok(vec![s.t, s.x, s.v])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    write_csv(out, &["t", "x", "v"], &rows)
}
