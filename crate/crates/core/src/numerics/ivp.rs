use super::{NumericsError, Result, DEFAULT_ATOL, DEFAULT_RTOL};

/// Right-hand side evaluation; failures carry a human-readable reason.
pub type RhsResult = std::result::Result<f64, String>;

/// `dx/dt = F(t, x)` or `ẍ = F(t, x, ẋ)`.
pub enum Rhs<'a> {
    FirstOrder(Box<dyn Fn(f64, f64) -> RhsResult + 'a>),
    SecondOrder(Box<dyn Fn(f64, f64, f64) -> RhsResult + 'a>),
}

impl<'a> Rhs<'a> {
    pub fn first_order(f: impl Fn(f64, f64) -> RhsResult + 'a) -> Self {
        Rhs::FirstOrder(Box::new(f))
    }

    pub fn second_order(f: impl Fn(f64, f64, f64) -> RhsResult + 'a) -> Self {
        Rhs::SecondOrder(Box::new(f))
    }

    fn dim(&self) -> usize {
        match self {
            Rhs::FirstOrder(_) => 1,
            Rhs::SecondOrder(_) => 2,
        }
    }

    fn eval(&self, t: f64, y: &[f64], dy: &mut [f64]) -> std::result::Result<(), String> {
        match self {
            Rhs::FirstOrder(f) => {
                dy[0] = f(t, y[0])?;
            }
            Rhs::SecondOrder(f) => {
                dy[0] = y[1];
                dy[1] = f(t, y[0], y[1])?;
            }
        }
        Ok(())
    }

    fn phase_state(&self, t: f64, y: &[f64]) -> Result<PhaseState> {
        let v = match self {
            Rhs::FirstOrder(f) => f(t, y[0]).map_err(|message| NumericsError::Rhs { t, message })?,
            Rhs::SecondOrder(_) => y[1],
        };
        Ok(PhaseState { t, x: y[0], v })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub t: f64,
    pub x: f64,
    pub v: f64,
}

impl PhaseState {
    pub fn new(t: f64, x: f64, v: f64) -> Self {
        PhaseState { t, x, v }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub integrator: String,
    pub rtol: f64,
    pub atol: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

/// Sampled solution, ordered by increasing `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<PhaseState>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(|s| s.t)
    }

    /// Cubic Hermite interpolation of `(x, v)` between samples.
    pub fn interpolate(&self, t: f64) -> Option<PhaseState> {
        let s = &self.states;
        if s.is_empty() || t < s[0].t || t > s[s.len() - 1].t {
            return None;
        }
        let i = match s.binary_search_by(|p| p.t.total_cmp(&t)) {
            Ok(i) => return Some(s[i]),
            Err(i) => i,
        };
        let (a, b) = (s[i - 1], s[i]);
        let h = b.t - a.t;
        let u = (t - a.t) / h;
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let x = h00 * a.x + h10 * h * a.v + h01 * b.x + h11 * h * b.v;
        // derivative of the cubic; exact for the velocity to third order
        let d00 = (6.0 * u2 - 6.0 * u) / h;
        let d10 = 3.0 * u2 - 4.0 * u + 1.0;
        let d01 = (-6.0 * u2 + 6.0 * u) / h;
        let d11 = 3.0 * u2 - 2.0 * u;
        let v = d00 * a.x + d10 * a.v + d01 * b.x + d11 * b.v;
        Some(PhaseState { t, x, v })
    }

    /// Concatenate, dropping a duplicated junction sample.
    pub fn extend(&mut self, other: Trajectory) {
        let mut states = other.states.into_iter().peekable();
        if let (Some(last), Some(first)) = (self.states.last(), states.peek()) {
            if first.t <= last.t {
                states.next();
            }
        }
        self.states.extend(states);
        self.meta.accepted_steps += other.meta.accepted_steps;
        self.meta.rejected_steps += other.meta.rejected_steps;
    }
}

pub struct IvpProblem<'a> {
    pub rhs: Rhs<'a>,
    pub t0: f64,
    /// `[x0]` for first-order problems, `[x0, v0]` for second-order ones.
    pub y0: Vec<f64>,
    pub t_end: f64,
    /// Times at which states are reported; `t0` and `t_end` are always included.
    pub sample_times: Vec<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl<'a> IvpProblem<'a> {
    pub fn new(rhs: Rhs<'a>, t0: f64, y0: Vec<f64>, t_end: f64) -> Self {
        IvpProblem {
            rhs,
            t0,
            y0,
            t_end,
            sample_times: Vec::new(),
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            max_steps: 1_000_000,
        }
    }

    pub fn with_samples(mut self, samples: Vec<f64>) -> Self {
        self.sample_times = samples;
        self
    }

    /// `n` equally spaced samples including both endpoints.
    pub fn with_uniform_samples(mut self, n: usize) -> Self {
        let n = n.max(2);
        self.sample_times = (0..n)
            .map(|i| self.t0 + (self.t_end - self.t0) * i as f64 / (n - 1) as f64)
            .collect();
        self
    }

    pub fn with_tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate with the Dormand–Prince 5(4) pair and adaptive steps. Sample
/// times are hit exactly by shortening the step that would pass them.
/// Integration backwards in time is allowed; the returned trajectory is
/// always ordered by increasing `t`.
pub fn integrate(problem: &IvpProblem<'_>) -> Result<Trajectory> {
    let n = problem.rhs.dim();
    if problem.y0.len() != n {
        return Err(NumericsError::InvalidProblem(format!(
            "initial state has {} components, expected {n}",
            problem.y0.len()
        )));
    }
    if !(problem.rtol > 0.0 && problem.atol > 0.0) {
        return Err(NumericsError::InvalidProblem("tolerances must be positive".into()));
    }
    let span = problem.t_end - problem.t0;
    if span == 0.0 || !span.is_finite() {
        return Err(NumericsError::InvalidProblem("degenerate time span".into()));
    }
    if problem.y0.iter().any(|y| !y.is_finite()) {
        return Err(NumericsError::NonFiniteState { t: problem.t0 });
    }
    let dir = span.signum();

    let mut targets: Vec<f64> = problem
        .sample_times
        .iter()
        .copied()
        .filter(|&s| (s - problem.t0) * dir > 0.0 && (problem.t_end - s) * dir >= 0.0)
        .collect();
    targets.push(problem.t_end);
    targets.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
    targets.dedup();

    let rhs_err = |t: f64, message: String| NumericsError::Rhs { t, message };
    let mut t = problem.t0;
    let mut y = problem.y0.clone();
    let mut k = vec![vec![0.0; n]; 7];
    problem.rhs.eval(t, &y, &mut k[0]).map_err(|m| rhs_err(t, m))?;

    let mut out = vec![problem.rhs.phase_state(t, &y)?];
    let mut h = initial_step(problem, &y, &k[0]) * dir;
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];

    for &target in &targets {
        while (target - t) * dir > 0.0 {
            if accepted + rejected >= problem.max_steps {
                return Err(NumericsError::TooManySteps { steps: problem.max_steps, t_end: problem.t_end });
            }
            let hmin = 1e-14 * t.abs().max(1.0);
            let remaining = target - t;
            let hits_target = h.abs() >= remaining.abs() * (1.0 - 1e-12);
            let step = if hits_target { remaining } else { h };

            let mut stage_error = None;
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += step * A[s][j] * kj[i];
                    }
                    ytmp[i] = acc;
                }
                let (_, tail) = k.split_at_mut(s);
                if let Err(m) = problem.rhs.eval(t + C[s] * step, &ytmp, &mut tail[0]) {
                    stage_error = Some(m);
                    break;
                }
            }
            if let Some(message) = stage_error {
                rejected += 1;
                h = step * 0.25;
                if h.abs() < hmin {
                    return Err(rhs_err(t, message));
                }
                continue;
            }
            ynew.copy_from_slice(&ytmp);

            let mut err = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for (s, ks) in k.iter().enumerate() {
                    e += E[s] * ks[i];
                }
                let sc = problem.atol + problem.rtol * y[i].abs().max(ynew[i].abs());
                err += (step * e / sc).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                rejected += 1;
                h = step * 0.25;
                if h.abs() < hmin {
                    return Err(NumericsError::NonFiniteState { t });
                }
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                accepted += 1;
                t = if hits_target { target } else { t + step };
                y.copy_from_slice(&ynew);
                k.swap(0, 6);
                if !hits_target || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                rejected += 1;
                h = step * factor.min(1.0);
                if h.abs() < hmin {
                    return Err(NumericsError::StepSizeUnderflow { t });
                }
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFiniteState { t });
        }
        out.push(problem.rhs.phase_state(t, &y)?);
    }
    if dir < 0.0 {
        out.reverse();
    }
    Ok(Trajectory {
        states: out,
        meta: TrajectoryMeta {
            integrator: "dopri5".to_string(),
            rtol: problem.rtol,
            atol: problem.atol,
            accepted_steps: accepted,
            rejected_steps: rejected,
        },
    })
}

fn initial_step(problem: &IvpProblem<'_>, y: &[f64], f0: &[f64]) -> f64 {
    let sc = |i: usize| problem.atol + problem.rtol * y[i].abs();
    let n = y.len() as f64;
    let d0 = (y.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v / sc(i)).powi(2)).sum::<f64>() / n).sqrt();
    let span = (problem.t_end - problem.t0).abs();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(span).min(0.05 * span.max(1e-3)).max(1e-10 * span)
}

/// Fixed-step classical RK4 from `(t, y)` to `target`, with at most
/// `max_substep` per step. Used for short local re-integrations around
/// samples where a smooth, tightly controlled flow is needed.
pub fn rk4_flow(rhs: &Rhs<'_>, t: f64, y: &[f64], target: f64, max_substep: f64) -> Result<Vec<f64>> {
    let n = rhs.dim();
    let mut y = y.to_vec();
    let span = target - t;
    if span == 0.0 {
        return Ok(y);
    }
    let steps = (span.abs() / max_substep).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let err = |t: f64| move |message: String| NumericsError::Rhs { t, message };
    for i in 0..steps {
        let ti = t + h * i as f64;
        rhs.eval(ti, &y, &mut k1).map_err(err(ti))?;
        for j in 0..n {
            tmp[j] = y[j] + 0.5 * h * k1[j];
        }
        rhs.eval(ti + 0.5 * h, &tmp, &mut k2).map_err(err(ti))?;
        for j in 0..n {
            tmp[j] = y[j] + 0.5 * h * k2[j];
        }
        rhs.eval(ti + 0.5 * h, &tmp, &mut k3).map_err(err(ti))?;
        for j in 0..n {
            tmp[j] = y[j] + h * k3[j];
        }
        rhs.eval(ti + h, &tmp, &mut k4).map_err(err(ti))?;
        for j in 0..n {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    Ok(y)
}
