/// Base step of the finite-difference derivatives. Central differences at
/// `h` and `h/2` are combined by one Richardson level, so truncation error
/// is O(h⁴) while round-off in the second derivative stays near
/// `16 ε |x| / (3 h²)`.
pub const FD_STEP: f64 = 2e-3;

/// A second-order ODE written implicitly as `residual(t, x, ẋ, ẍ) = 0`.
pub trait OdeResidual {
    fn residual(&self, t: f64, x: f64, v: f64, a: f64) -> Result<f64, String>;
}

impl<F> OdeResidual for F
where
    F: Fn(f64, f64, f64, f64) -> Result<f64, String>,
{
    fn residual(&self, t: f64, x: f64, v: f64, a: f64) -> Result<f64, String> {
        self(t, x, v, a)
    }
}

/// `(x, ẋ, ẍ)` at `t` from Richardson-extrapolated central differences of
/// `x_of_t` with base step `h`.
pub fn fd_derivatives(
    x_of_t: &dyn Fn(f64) -> Result<f64, String>,
    t: f64,
    h: f64,
) -> Result<(f64, f64, f64), String> {
    let x0 = x_of_t(t)?;
    let xp = x_of_t(t + h)?;
    let xm = x_of_t(t - h)?;
    let xp2 = x_of_t(t + 0.5 * h)?;
    let xm2 = x_of_t(t - 0.5 * h)?;
    let d1_h = (xp - xm) / (2.0 * h);
    let d1_h2 = (xp2 - xm2) / h;
    let d2_h = (xp - 2.0 * x0 + xm) / (h * h);
    let d2_h2 = (xp2 - 2.0 * x0 + xm2) / (0.25 * h * h);
    Ok((x0, (4.0 * d1_h2 - d1_h) / 3.0, (4.0 * d2_h2 - d2_h) / 3.0))
}

/// Outcome of [`residual_scan`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResidualReport {
    /// Largest finite `|residual|` over the samples, 0 when none is finite.
    pub max_abs: f64,
    /// Sample time of `max_abs`.
    pub argmax: Option<f64>,
    /// `(t, residual)` per sample; failed evaluations carry NaN.
    pub samples: Vec<(f64, f64)>,
    /// Sample times whose residual was not finite or could not be evaluated.
    pub non_finite: Vec<f64>,
}

impl ResidualReport {
    pub fn new() -> Self {
        ResidualReport { max_abs: 0.0, argmax: None, samples: Vec::new(), non_finite: Vec::new() }
    }

    /// Add one sample; errors and non-finite values are kept as NaN.
    pub fn record(&mut self, t: f64, r: Result<f64, String>) {
        match r {
            Ok(r) if r.is_finite() => {
                if r.abs() >= self.max_abs {
                    self.max_abs = r.abs();
                    self.argmax = Some(t);
                }
                self.samples.push((t, r));
            }
            _ => {
                self.non_finite.push(t);
                self.samples.push((t, f64::NAN));
            }
        }
    }

    /// True when every sample produced a finite residual below `tol`.
    pub fn passes(&self, tol: f64) -> bool {
        self.non_finite.is_empty() && !self.samples.is_empty() && self.max_abs < tol
    }

    /// `max_abs`, or infinity when any sample failed.
    pub fn worst(&self) -> f64 {
        if self.non_finite.is_empty() {
            self.max_abs
        } else {
            f64::INFINITY
        }
    }
}

/// Residual of `ode` along `x_of_t` at each sample, with `ẋ` and `ẍ` from
/// [`fd_derivatives`] at step [`FD_STEP`].
pub fn residual_scan(
    ode: &dyn OdeResidual,
    x_of_t: &dyn Fn(f64) -> Result<f64, String>,
    samples: &[f64],
) -> ResidualReport {
    residual_scan_with_step(ode, x_of_t, samples, FD_STEP)
}

/// As [`residual_scan`] with an explicit base step.
pub fn residual_scan_with_step(
    ode: &dyn OdeResidual,
    x_of_t: &dyn Fn(f64) -> Result<f64, String>,
    samples: &[f64],
    h: f64,
) -> ResidualReport {
    let mut report = ResidualReport::new();
    for &t in samples {
        report.record(t, fd_derivatives(x_of_t, t, h).and_then(|(x, v, a)| ode.residual(t, x, v, a)));
    }
    report
}
