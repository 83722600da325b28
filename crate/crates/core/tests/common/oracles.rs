//! Catalog solutions paired with their displayed equations, written out
//! by hand.

use super::grid;
use lienard::catalog::*;
use lienard::expr::parse;
use std::f64::consts::PI;

/// A catalog solution with its displayed equation written out by hand.
pub struct Oracle {
    pub label: &'static str,
    pub sol: CatalogSolution,
    /// Residual of the displayed equation at `(t, x, ẋ, ẍ)`.
    pub display: Box<dyn Fn(f64, f64, f64, f64) -> f64>,
    /// The displayed equation solved for `ẍ`.
    pub accel: Box<dyn Fn(f64, f64, f64) -> f64>,
    /// Span of the independent integration.
    pub span: (f64, f64),
}

fn oracle(
    label: &'static str,
    sol: CatalogSolution,
    display: impl Fn(f64, f64, f64, f64) -> f64 + 'static,
    accel: impl Fn(f64, f64, f64) -> f64 + 'static,
    span: Option<(f64, f64)>,
) -> Oracle {
    let span = span.unwrap_or((sol.t0(), sol.t0() + 2.0 * PI / sol.omega()));
    Oracle { label, sol, display: Box::new(display), accel: Box::new(accel), span }
}

/// Leading coefficient `c2` and the rest `r` of `c2 ẍ + r = 0` give both
/// closures.
macro_rules! split {
    (|$t:ident, $x:ident, $v:ident| $c2:expr, $rest:expr) => {
        (
            move |$t: f64, $x: f64, $v: f64, a: f64| $c2 * a + $rest,
            move |$t: f64, $x: f64, $v: f64| -($rest) / $c2,
        )
    };
}

fn inner(sol: &CatalogSolution, margin: f64) -> Option<(f64, f64)> {
    Some((sol.domain.0 + margin, sol.domain.1 - margin))
}

/// From the left end of the domain up to `margin` before the first zero of
/// `x`. The case-4 (`ν ≠ 0`) and case-6 displays have regular singular
/// points at interior zeros of `x`, where a plain integrator loses about
/// three digits.
fn before_first_zero(sol: &CatalogSolution, margin: f64) -> Option<(f64, f64)> {
    let (lo, hi) = (sol.domain.0 + margin, sol.domain.1 - margin);
    let ts = grid(lo, hi, 400);
    let x0 = sol.eval(lo).unwrap();
    let end = ts.iter().copied().find(|&t| sol.eval(t).unwrap() * x0 <= 0.0).unwrap_or(hi + margin);
    Some((lo, end - margin))
}

pub fn oracles() -> Vec<Oracle> {
    let mut out = Vec::new();

    let (w, al) = (1.3, 0.4);
    let (d, a) = split!(|_t, x, _v| 1.0, w * w * x);
    out.push(oracle("harmonic", harmonic(1.5, w, al).unwrap(), d, a, None));

    // f = 0.3 sin 2t, g = 0.2 sin²t, ω = 1, α = 0
    let f = parse("0.3*sin(2*t)").unwrap();
    let g = parse("0.2*sin(t)^2").unwrap();
    let tq = time_quadrature(&f, &g, 1.2, 1.0, 0.0, 0.7).unwrap();
    let (d, a) = split!(|t, x, v| x + 0.2 * t.sin().powi(2), {
        let (f, fd) = (0.3 * (2.0 * t).sin(), 0.6 * (2.0 * t).cos());
        let (g, gd) = (0.2 * t.sin().powi(2), 0.2 * (2.0 * t).sin());
        (f - gd) * v + (x + g) * (x + g) + fd * (x + g) + (f - gd) * f
    });
    out.push(oracle("time-quadrature", tq, d, a, None));

    let (f0, w, al) = (0.5, 1.0, 0.3);
    let (d, a) = split!(|t, x, v| x, {
        let th = w * t + al;
        f0 * th.sin() * v + w * w * x * x + f0 * w * th.cos() * x + f0 * f0 * th.sin().powi(2)
    });
    out.push(oracle("case1", case1(f0, 5.0, w, al, 0.5).unwrap(), d, a, None));

    let (g0, n, w, al) = (0.4, 3, 1.2, 0.2);
    let (d, a) = split!(|t, x, v| x + g0 * (w * t + al).sin().powi(n), {
        let th = w * t + al;
        let q = x + g0 * th.sin().powi(n);
        -w * n as f64 * g0 * th.sin().powi(n - 1) * th.cos() * v + w * w * q * q
    });
    out.push(oracle("case2", case2(g0, n as f64, 1.1, w, al, 0.5).unwrap(), d, a, None));

    let (be, ga, de, n, w) = (1.0, 0.3, 0.05, 2, 1.0);
    let (d, a) = split!(|_t, x, v| be * x, {
        (1.0 - be) * v * v + ((be * (n - 1) as f64 + 2.0) * de * x.powi(n) - 2.0 * ga * x) * v
            - 2.0 * ga * de * x.powi(n + 1)
            + de * de * x.powi(2 * n)
            + x * x * (be * be * w * w + ga * ga)
    });
    out.push(oracle("case3", case3(be, ga, de, n as f64, 1.5, w, 0.0, 1.0).unwrap(), d, a, None));

    for &(mu, nu) in &[(1.0, 0.0), (0.8, 0.4)] {
        let w = 1.0;
        let sol = case4_riccati(mu, nu, w, 0.0, 1.0, 0.3).unwrap();
        let span = if nu == 0.0 { inner(&sol, 0.05) } else { before_first_zero(&sol, 0.05) };
        let (d, a) = split!(|_t, x, v| 1.0, (3.0 * mu * x * x + nu) / x * v + (w * w + 2.0 * mu * nu) * x + mu * mu * x.powi(3) + nu * nu / x);
        out.push(oracle(if nu == 0.0 { "case4 (nu = 0)" } else { "case4" }, sol, d, a, span));
    }

    let (g0, n, w) = (0.3, 3, 1.0);
    let (d, a) = split!(|_t, x, v| 1.0, {
        -(n as f64) * g0 * x.powi(n - 2) / (1.0 + g0 * x.powi(n - 1)) * v * v + w * w * (x + g0 * x.powi(n))
    });
    out.push(oracle("case5", case5_power(g0, n as f64, 0.8, w, 0.0, 0.5).unwrap(), d, a, None));

    let (b, w) = (1.0, 1.0);
    let sol = case6(b, 0.5, w, 0.0, 1.0).unwrap();
    let span = before_first_zero(&sol, 0.05);
    let (d, a) = split!(|_t, x, v| 0.25, -b / 2.0 * v / x - 3.0 / 16.0 * v * v / x + b * b / x + w * w * x);
    out.push(oracle("case6", sol, d, a, span));

    let (c, w) = (0.4, 1.0);
    let sol = case7(c, 1.0, w, 0.0, 1.0).unwrap();
    let span = inner(&sol, 0.05);
    let (d, a) = split!(|_t, x, v| 1.0, c * c * w * w * v * v / x + 2.0 * c * w * w * v + w * w * x);
    out.push(oracle("case7", sol, d, a, span));
    out
}
