//! Properties of the expression layer on random smooth trees.

use lienard::expr::{differentiate, parse, BinOp, Bindings, Expr, Func, Point, Var};
use proptest::prelude::*;

fn raw(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::Binary(op, Box::new(a), Box::new(b))
}

/// `1.5 + e²`, a denominator bounded away from zero.
fn positive(e: Expr) -> Expr {
    raw(BinOp::Add, Expr::Const(1.5), raw(BinOp::Pow, e, Expr::Const(2.0)))
}

/// Trees built from the raw variants, smooth everywhere.
fn tree() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-2.0f64..2.0).prop_map(Expr::Const),
        Just(Expr::Var(Var::T)),
        Just(Expr::Var(Var::X)),
        Just(Expr::Var(Var::V)),
        Just(Expr::Param("k".into())),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (prop_oneof![Just(Func::Sin), Just(Func::Cos), Just(Func::Tanh), Just(Func::Asinh)], inner.clone())
                .prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
            inner.clone().prop_map(|e| Expr::Call(Func::Ln, Box::new(positive(e)))),
            inner.clone().prop_map(|e| Expr::Call(Func::Sqrt, Box::new(positive(e)))),
            (prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)], inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| raw(op, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| raw(BinOp::Div, a, positive(b))),
            (inner, 2u8..4).prop_map(|(a, n)| raw(BinOp::Pow, a, Expr::Const(n as f64))),
        ]
    })
}

fn point() -> impl Strategy<Value = Point> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0).prop_map(|(t, x, v)| Point::txv(t, x, v))
}

fn params() -> Bindings {
    Bindings::from([("k".to_string(), 0.7)])
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * (1.0 + a.abs().max(b.abs()))
}

/// Rebuild through the folding constructors.
fn refold(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => e.clone(),
        Expr::Neg(a) => Expr::neg(refold(a)),
        Expr::Call(f, a) => Expr::call(*f, refold(a)),
        Expr::Binary(op, a, b) => Expr::binary(*op, refold(a), refold(b)),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn printed_form_parses_to_the_same_function(e in tree(), p in point()) {
        let text = e.to_string();
        let back = parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        let (a, b) = (e.eval_with(&p, &params()).unwrap(), back.eval_with(&p, &params()).unwrap());
        prop_assert!(close(a, b, 1e-12), "{text}: {a} vs {b}");
        // printing is a fixed point after one round
        prop_assert_eq!(parse(&back.to_string()).unwrap().to_string(), back.to_string());
    }

    #[test]
    fn folding_preserves_values(e in tree(), p in point()) {
        let (a, b) = (e.eval_with(&p, &params()).unwrap(), refold(&e).eval_with(&p, &params()).unwrap());
        prop_assert!(close(a, b, 1e-12), "{e}: {a} vs {b}");
    }

    #[test]
    fn derivative_matches_finite_differences(e in tree(), p in point(), which in 0usize..3) {
        let var = [Var::T, Var::X, Var::V][which];
        let at = |h: f64| {
            let mut q = p;
            match var {
                Var::T => q.t += h,
                Var::X => q.x += h,
                _ => q.v += h,
            }
            e.eval_with(&q, &params()).unwrap()
        };
        let d1 = |h: f64| (at(h) - at(-h)) / (2.0 * h);
        let fd = (4.0 * d1(5e-4) - d1(1e-3)) / 3.0;
        let exact = differentiate(&e, var).eval_with(&p, &params()).unwrap();
        prop_assert!(close(exact, fd, 1e-6), "d/d{} {e}: {exact} vs {fd}", var.name());
    }

    #[test]
    fn binding_then_evaluating_equals_evaluating_with_bindings(e in tree(), p in point()) {
        let bound = e.bind(&params()).unwrap();
        prop_assert!(bound.parameters().is_empty());
        let (a, b) = (e.eval_with(&p, &params()).unwrap(), bound.eval(&p).unwrap());
        prop_assert!(close(a, b, 1e-12), "{e}: {a} vs {b}");
    }

    #[test]
    fn substitution_is_composition(e in tree(), r in tree(), p in point()) {
        let inner = r.eval_with(&p, &params()).unwrap();
        let direct = e.eval_with(&Point { x: inner, ..p }, &params()).unwrap();
        let composed = e.substitute(Var::X, &r).eval_with(&p, &params()).unwrap();
        prop_assert!(close(direct, composed, 1e-12), "{e} with x = {r}: {direct} vs {composed}");
    }

    #[test]
    fn derivative_of_a_constant_in_the_variable_folds_to_zero(e in tree()) {
        let frozen = e.substitute(Var::X, &Expr::Const(0.25));
        prop_assert_eq!(differentiate(&frozen, Var::X), Expr::Const(0.0));
    }
}

#[test]
fn parse_errors_point_into_the_input() {
    for text in ["1 +", "sin(x", "x ** 2", "foo(x)", "2 x"] {
        assert!(parse(text).is_err(), "{text}");
    }
}
