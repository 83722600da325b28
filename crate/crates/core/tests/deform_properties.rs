//! Properties of the deformation layer, checked against hand-expanded
//! formulas rather than the symbolic pipeline.

use lienard::deform::*;
use lienard::expr::Bindings;
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

/// `f = c₁x² + c₂ sin t + c₃vx`, `g = d₁x³ + d₂ cos t + d₃v`.
#[derive(Debug, Clone, Copy)]
struct Family {
    c: [f64; 3],
    d: [f64; 3],
    omega: f64,
}

impl Family {
    fn oscillator(&self) -> DeformedOscillator {
        let [c1, c2, c3] = self.c;
        let [d1, d2, d3] = self.d;
        let f = format!("{c1}*x^2 + {c2}*sin(t) + {c3}*v*x");
        let g = format!("{d1}*x^3 + {d2}*cos(t) + {d3}*v");
        DeformedOscillator::parse(&f, &g, self.omega, &Bindings::new()).unwrap()
    }

    /// `QṖ − PQ̇ + ω²Q² + P²` with the partials written out by hand.
    fn template(&self, t: f64, x: f64, v: f64, a: f64) -> f64 {
        let [c1, c2, c3] = self.c;
        let [d1, d2, d3] = self.d;
        let p = v + c1 * x * x + c2 * t.sin() + c3 * v * x;
        let q = x + d1 * x.powi(3) + d2 * t.cos() + d3 * v;
        let p_dot = a + c2 * t.cos() + (2.0 * c1 * x + c3 * v) * v + c3 * x * a;
        let q_dot = v - d2 * t.sin() + 3.0 * d1 * x * x * v + d3 * a;
        q * p_dot - p * q_dot + self.omega * self.omega * q * q + p * p
    }
}

fn family() -> impl Strategy<Value = Family> {
    (prop::array::uniform3(-0.5f64..0.5), prop::array::uniform3(-0.5f64..0.5), 0.5f64..2.0)
        .prop_map(|(c, d, omega)| Family { c, d, omega })
}

/// Deformations vanishing with `x`, so `f = ġ = 0` at every crossing and
/// the first integral continues smoothly through it.
fn regular_family() -> impl Strategy<Value = Family> {
    (-0.4f64..0.4, -0.3f64..0.3, -0.3f64..0.3, 0.8f64..1.5)
        .prop_map(|(c1, c3, d1, omega)| Family { c: [c1, 0.0, c3], d: [d1, 0.0, 0.0], omega })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_form_equals_the_expanded_template(
        fam in family(),
        (t, x, v, a) in (-3.0f64..3.0, -1.5f64..1.5, -1.5f64..1.5, -3.0f64..3.0),
    ) {
        let form = generate_ode(&fam.oscillator());
        let got = form.residual_at(t, x, v, a).unwrap();
        let want = fam.template(t, x, v, a);
        prop_assert!((got - want).abs() <= 1e-11 * (1.0 + want.abs()), "{form}: {got} vs {want}");
    }

    #[test]
    fn phase_function_has_unit_modulus(
        fam in family(),
        alpha in -PI..PI,
        (t, x, v) in (-5.0f64..5.0, -2.0f64..2.0, -2.0f64..2.0),
    ) {
        let osc = fam.oscillator().with_alpha(alpha);
        if let Ok(z) = phase_function(&osc, &PhaseState::new(t, x, v)) {
            prop_assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_from_a_state_puts_that_state_on_the_first_integral(
        fam in family(),
        (t, x, v) in (-3.0f64..3.0, -1.0f64..1.0, -1.0f64..1.0),
    ) {
        let s = PhaseState::new(t, x, v);
        let osc = fam.oscillator();
        let (p, q) = osc.pq(&s).unwrap();
        prop_assume!(p.abs() + q.abs() > 1e-3);
        let osc = osc.with_alpha_from_state(&s).unwrap();
        prop_assume!(osc.theta(t).sin().abs() > 1e-3);
        let d = first_integral_defect(&osc, &s).unwrap();
        prop_assert!(d.abs() < 1e-10 * (1.0 + p.abs()), "defect {d:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn first_integral_trajectories_solve_the_generated_equation(
        fam in regular_family(),
        (t0, x0, v0) in (0.0f64..1.0, 0.1f64..0.5, -0.5f64..0.5),
    ) {
        let start = PhaseState::new(t0, x0, v0);
        let osc = fam.oscillator().with_alpha_from_state(&start).unwrap();
        let t1 = t0 + 2.0 * PI / fam.omega;
        let opts = SolveOptions::uniform(t0, t1, 80).with_tolerances(1e-12, 1e-14);
        let traj = match solve_first_integral(&osc, start, t1, &opts) {
            Ok(traj) => traj,
            // steep deformations may fold the first integral; that is reported, not hidden
            Err(DeformError::NonUniqueCrossing { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let report = trajectory_residual(&osc, &traj);
        prop_assert!(report.passes(1e-6), "{report:?}");
        for s in &traj.states {
            let theta = osc.theta(s.t);
            if theta.sin().abs() < 0.05 {
                continue;
            }
            let z = phase_function(&osc, s).unwrap();
            prop_assert!((z - Complex64::from_polar(1.0, -2.0 * theta)).norm() < 1e-7, "t = {}", s.t);
        }
    }
}

#[test]
fn harmonic_form_is_the_textbook_one() {
    let form = generate_ode(&DeformedOscillator::harmonic(2.0).unwrap());
    for &(t, x, v, a) in &[(0.0, 1.0, 0.0, -4.0), (0.3, 0.5, 2.0, 1.0)] {
        assert!((form.residual_at(t, x, v, a).unwrap() - x * (a + 4.0 * x)).abs() < 1e-14);
    }
}
