use super::{NumericsError, Result};

const MAX_ITER: usize = 200;

/// Safeguarded Newton iteration on a sign-changing bracket. `fdf` returns
/// the function value and its derivative. A Newton step that would leave
/// the bracket, or that does not shrink it fast enough, is replaced by
/// bisection.
pub fn find_root_newton(
    mut fdf: impl FnMut(f64) -> std::result::Result<(f64, f64), String>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    let mut call = |x: f64| fdf(x).map_err(|message| NumericsError::Eval { x, message });
    let (flo, _) = call(lo)?;
    let (fhi, _) = call(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(NumericsError::NoSignChange { lo, hi, flo, fhi });
    }
    // orient so that f(neg) < 0 < f(pos)
    let (mut neg, mut pos) = if flo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = call(x)?;
    for _ in 0..MAX_ITER {
        let newton_escapes = ((x - pos) * dfx - fx) * ((x - neg) * dfx - fx) > 0.0;
        let too_slow = (2.0 * fx).abs() > (dx_old * dfx).abs();
        dx_old = dx;
        if newton_escapes || too_slow || dfx == 0.0 || !dfx.is_finite() {
            dx = 0.5 * (pos - neg);
            x = neg + dx;
        } else {
            dx = fx / dfx;
            x -= dx;
        }
        if dx.abs() <= tol {
            return Ok(x);
        }
        (fx, dfx) = call(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            neg = x;
        } else {
            pos = x;
        }
        if (pos - neg).abs() <= tol {
            return Ok(0.5 * (pos + neg));
        }
    }
    Err(NumericsError::MaxIterations(MAX_ITER))
}

/// Root of `f` on `[lo, hi]` to absolute tolerance `tol`, using
/// [`find_root_newton`] with a central-difference derivative.
pub fn find_root(
    mut f: impl FnMut(f64) -> std::result::Result<f64, String>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<f64> {
    find_root_newton(
        |x| {
            let fx = f(x)?;
            let h = 1e-7 * x.abs().max(1.0);
            let df = (f(x + h)? - f(x - h)?) / (2.0 * h);
            Ok((fx, df))
        },
        lo,
        hi,
        tol,
    )
}
