//! Test-only helpers kept independent of the library's integrators.
#![allow(dead_code)]

/// Cash-Karp embedded 4(5) pair.
const C: [f64; 6] = [0.0, 0.2, 0.3, 0.6, 1.0, 0.875];
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [0.3, -0.9, 1.2, 0.0, 0.0],
    [-11.0 / 54.0, 2.5, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0, 253.0 / 4096.0],
];
const B5: [f64; 6] = [37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0];
const B4: [f64; 6] = [2825.0 / 27648.0, 0.0, 18575.0 / 48384.0, 13525.0 / 55296.0, 277.0 / 14336.0, 0.25];

pub mod oracles;

/// Adaptive Cash-Karp integration of `y' = rhs(t, y)` from `(t0, y0)`,
/// stepping exactly onto each of the increasing `samples` (all > `t0`).
/// Non-finite stage values count as rejected steps.
pub fn cash_karp(
    rhs: &dyn Fn(f64, &[f64]) -> Vec<f64>,
    t0: f64,
    y0: &[f64],
    samples: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<Vec<f64>>, String> {
    let n = y0.len();
    let (mut t, mut y) = (t0, y0.to_vec());
    let mut h: f64 = 1e-3;
    let mut out = Vec::with_capacity(samples.len());
    for &target in samples {
        while t < target {
            let step = h.min(target - t);
            if step < 1e-14 * t.abs().max(1.0) {
                return Err(format!("step size underflow at t = {t}"));
            }
            let mut k: Vec<Vec<f64>> = Vec::with_capacity(6);
            for i in 0..6 {
                let yi: Vec<f64> = (0..n).map(|j| y[j] + step * (0..i).map(|m| A[i][m] * k[m][j]).sum::<f64>()).collect();
                k.push(rhs(t + C[i] * step, &yi));
            }
            let y5: Vec<f64> = (0..n).map(|j| y[j] + step * (0..6).map(|i| B5[i] * k[i][j]).sum::<f64>()).collect();
            let y4: Vec<f64> = (0..n).map(|j| y[j] + step * (0..6).map(|i| B4[i] * k[i][j]).sum::<f64>()).collect();
            let err = (0..n)
                .map(|j| (y5[j] - y4[j]).abs() / (atol + rtol * y[j].abs().max(y5[j].abs())))
                .fold(0.0, f64::max);
            if !err.is_finite() {
                h = step * 0.2;
                continue;
            }
            if err <= 1.0 {
                t = if step == target - t { target } else { t + step };
                y = y5;
            }
            h = step * (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// `ẍ = accel(t, x, ẋ)` through [`cash_karp`]; returns `(x, ẋ)` per sample.
pub fn second_order(
    accel: &dyn Fn(f64, f64, f64) -> f64,
    t0: f64,
    x0: f64,
    v0: f64,
    samples: &[f64],
) -> Result<Vec<(f64, f64)>, String> {
    let rhs = |t: f64, y: &[f64]| vec![y[1], accel(t, y[0], y[1])];
    Ok(cash_karp(&rhs, t0, &[x0, v0], samples, 1e-12, 1e-13)?.into_iter().map(|y| (y[0], y[1])).collect())
}

/// `n` points spread evenly over `[a, b]`.
pub fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Central-difference `(ẋ, ẍ)` of `x` at `t`, Richardson-extrapolated
/// from steps `h` and `h/2`.
pub fn derivatives(x: &dyn Fn(f64) -> f64, t: f64, h: f64) -> (f64, f64) {
    let d1 = |h: f64| (x(t + h) - x(t - h)) / (2.0 * h);
    let d2 = |h: f64| (x(t + h) - 2.0 * x(t) + x(t - h)) / (h * h);
    ((4.0 * d1(h / 2.0) - d1(h)) / 3.0, (4.0 * d2(h / 2.0) - d2(h)) / 3.0)
}
