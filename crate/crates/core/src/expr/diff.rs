use super::{BinOp, Expr, Func, Var};

/// Exact symbolic derivative of `e` with respect to `var`, folded through
/// the simplifying constructors.
pub fn differentiate(e: &Expr, var: Var) -> Expr {
    match e {
        Expr::Const(_) | Expr::Param(_) => Expr::num(0.0),
        Expr::Var(v) => Expr::num(if *v == var { 1.0 } else { 0.0 }),
        Expr::Neg(inner) => Expr::neg(differentiate(inner, var)),
        Expr::Call(f, arg) => {
            let inner = differentiate(arg, var);
            if inner.as_const() == Some(0.0) {
                return Expr::num(0.0);
            }
            Expr::mul(outer_derivative(*f, arg), inner)
        }
        Expr::Binary(op, a, b) => {
            let da = differentiate(a, var);
            let db = differentiate(b, var);
            let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
            match op {
                BinOp::Add => Expr::add(da, db),
                BinOp::Sub => Expr::sub(da, db),
                BinOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                BinOp::Div => {
                    if db.as_const() == Some(0.0) {
                        Expr::div(da, b)
                    } else {
                        Expr::div(
                            Expr::sub(Expr::mul(da, b.clone()), Expr::mul(a, db)),
                            Expr::pow(b, Expr::num(2.0)),
                        )
                    }
                }
                BinOp::Pow => {
                    if db.as_const() == Some(0.0) {
                        // n * a^(n-1) * a'
                        let reduced = Expr::pow(a, Expr::sub(b.clone(), Expr::num(1.0)));
                        Expr::mul(Expr::mul(b, reduced), da)
                    } else if da.as_const() == Some(0.0) {
                        // a^b * ln(a) * b'
                        let whole = Expr::pow(a.clone(), b);
                        Expr::mul(Expr::mul(whole, Expr::call(Func::Ln, a)), db)
                    } else {
                        // a^b * (b' ln a + b a'/a)
                        let whole = Expr::pow(a.clone(), b.clone());
                        let log_term = Expr::mul(db, Expr::call(Func::Ln, a.clone()));
                        let ratio = Expr::div(Expr::mul(b, da), a);
                        Expr::mul(whole, Expr::add(log_term, ratio))
                    }
                }
            }
        }
    }
}

fn outer_derivative(f: Func, arg: &Expr) -> Expr {
    let a = || arg.clone();
    let square = |e: Expr| Expr::pow(e, Expr::num(2.0));
    match f {
        Func::Sin => Expr::call(Func::Cos, a()),
        Func::Cos => Expr::neg(Expr::call(Func::Sin, a())),
        Func::Tan => Expr::add(Expr::num(1.0), square(Expr::call(Func::Tan, a()))),
        Func::Cot => Expr::neg(Expr::add(Expr::num(1.0), square(Expr::call(Func::Cot, a())))),
        Func::Exp => Expr::call(Func::Exp, a()),
        Func::Ln => Expr::div(Expr::num(1.0), a()),
        Func::Sqrt => Expr::div(Expr::num(0.5), Expr::call(Func::Sqrt, a())),
        Func::Abs => Expr::div(a(), Expr::call(Func::Abs, a())),
        Func::Asinh => Expr::div(
            Expr::num(1.0),
            Expr::call(Func::Sqrt, Expr::add(Expr::num(1.0), square(a()))),
        ),
        Func::Sinh => Expr::call(Func::Cosh, a()),
        Func::Cosh => Expr::call(Func::Sinh, a()),
        Func::Tanh => Expr::sub(Expr::num(1.0), square(Expr::call(Func::Tanh, a()))),
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Bindings, Point};
    use super::*;

    #[test]
    fn cube_rule() {
        let d = differentiate(&parse("x^3").unwrap(), Var::X);
        assert_eq!(d.to_string(), "3*x^2");
        assert_eq!(d.eval(&Point::txv(0.0, 2.0, 0.0)).unwrap(), 12.0);
    }

    #[test]
    fn chain_rule_with_parameter() {
        let d = differentiate(&parse("sin(w*t)").unwrap(), Var::T);
        assert_eq!(d.to_string(), "cos(w*t)*w");
        let b: Bindings = [("w".to_string(), 2.0)].into();
        let value = d.eval_with(&Point::txv(0.3, 0.0, 0.0), &b).unwrap();
        assert!((value - 2.0 * (0.6f64).cos()).abs() < 1e-15);
    }

    #[test]
    fn independent_variable_folds_to_zero() {
        let d = differentiate(&parse("sin(t)*exp(t) + t^2").unwrap(), Var::X);
        assert_eq!(d, Expr::num(0.0));
    }
}
