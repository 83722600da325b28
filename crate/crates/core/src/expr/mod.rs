//! A small expression language for the deformation functions.
//!
//! Expressions are trees over the reserved variables `t`, `x`, `v` (for ẋ)
//! and `u`, plus named parameters that must be bound before evaluation.
//! Besides evaluation the tree supports exact symbolic differentiation,
//! which is what the generated equations are built from.

mod diff;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use parse::parse;

/// Parameter bindings, keyed by identifier.
pub type Bindings = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unbound name `{0}`")]
    Unbound(String),
    #[error("domain error: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, ExprError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    X,
    V,
    U,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
            Var::V => "v",
            Var::U => "u",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "t" => Some(Var::T),
            "x" => Some(Var::X),
            "v" => Some(Var::V),
            "u" => Some(Var::U),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Cot,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Asinh,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 12] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Cot,
        Func::Exp,
        Func::Ln,
        Func::Sqrt,
        Func::Abs,
        Func::Asinh,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Cot => "cot",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Asinh => "asinh",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }

    fn apply(self, z: f64) -> Result<f64> {
        let out = match self {
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Tan => {
                let c = z.cos();
                if c == 0.0 {
                    return Err(ExprError::Domain(format!("tan pole at {z}")));
                }
                z.sin() / c
            }
            Func::Cot => {
                let s = z.sin();
                if s == 0.0 {
                    return Err(ExprError::Domain(format!("cot pole at {z}")));
                }
                z.cos() / s
            }
            Func::Exp => z.exp(),
            Func::Ln => {
                if z <= 0.0 {
                    return Err(ExprError::Domain(format!("ln of non-positive {z}")));
                }
                z.ln()
            }
            Func::Sqrt => {
                if z < 0.0 {
                    return Err(ExprError::Domain(format!("sqrt of negative {z}")));
                }
                z.sqrt()
            }
            Func::Abs => z.abs(),
            Func::Asinh => z.asinh(),
            Func::Sinh => z.sinh(),
            Func::Cosh => z.cosh(),
            Func::Tanh => z.tanh(),
        };
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression tree. Build with the folding constructors ([`Expr::add`],
/// [`Expr::mul`], ...) rather than the variants directly.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Param(String),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

/// Values of the reserved variables at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Point {
    pub t: f64,
    pub x: f64,
    pub v: f64,
    pub u: f64,
}

impl Point {
    pub fn txv(t: f64, x: f64, v: f64) -> Self {
        Point { t, x, v, u: 0.0 }
    }

    pub fn u(u: f64) -> Self {
        Point { u, ..Point::default() }
    }

    fn get(&self, var: Var) -> f64 {
        match var {
            Var::T => self.t,
            Var::X => self.x,
            Var::V => self.v,
            Var::U => self.u,
        }
    }
}

impl Expr {
    pub fn num(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        if let Expr::Const(c) = arg {
            if let Ok(r) = func.apply(c) {
                if r.is_finite() {
                    return Expr::Const(r);
                }
            }
        }
        Expr::Call(func, Box::new(arg))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::Const(p + q),
            (Some(p), _) if p == 0.0 => b,
            (_, Some(q)) if q == 0.0 => a,
            _ => match b {
                Expr::Neg(inner) => Expr::Binary(BinOp::Sub, Box::new(a), inner),
                b => Expr::Binary(BinOp::Add, Box::new(a), Box::new(b)),
            },
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::Const(p - q),
            (Some(p), _) if p == 0.0 => Expr::neg(b),
            (_, Some(q)) if q == 0.0 => a,
            _ => match b {
                Expr::Neg(inner) => Expr::Binary(BinOp::Add, Box::new(a), inner),
                b => Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
            },
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => Expr::Const(p * q),
            (Some(p), _) if p == 0.0 => Expr::Const(0.0),
            (_, Some(q)) if q == 0.0 => Expr::Const(0.0),
            (Some(p), _) if p == 1.0 => b,
            (_, Some(q)) if q == 1.0 => a,
            (Some(p), _) if p == -1.0 => Expr::neg(b),
            (_, Some(q)) if q == -1.0 => Expr::neg(a),
            _ if a == b => Expr::Binary(BinOp::Pow, Box::new(a), Box::new(Expr::Const(2.0))),
            _ => Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) if q != 0.0 => Expr::Const(p / q),
            (Some(p), _) if p == 0.0 => Expr::Const(0.0),
            (_, Some(q)) if q == 1.0 => a,
            _ => Expr::Binary(BinOp::Div, Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(base: Expr, exp: Expr) -> Expr {
        match (base.as_const(), exp.as_const()) {
            (_, Some(q)) if q == 0.0 => Expr::Const(1.0),
            (_, Some(q)) if q == 1.0 => base,
            (Some(p), Some(q)) if p > 0.0 || q.fract() == 0.0 => Expr::Const(p.powf(q)),
            _ => Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)),
        }
    }

    /// Evaluate with variables taken from `point` and parameters from `params`.
    pub fn eval_with(&self, point: &Point, params: &Bindings) -> Result<f64> {
        let value = match self {
            Expr::Const(c) => *c,
            Expr::Var(v) => point.get(*v),
            Expr::Param(name) => *params
                .get(name)
                .ok_or_else(|| ExprError::Unbound(name.clone()))?,
            Expr::Neg(e) => -e.eval_with(point, params)?,
            Expr::Call(f, e) => f.apply(e.eval_with(point, params)?)?,
            Expr::Binary(op, a, b) => {
                let p = a.eval_with(point, params)?;
                match op {
                    BinOp::Add => p + b.eval_with(point, params)?,
                    BinOp::Sub => p - b.eval_with(point, params)?,
                    BinOp::Mul => p * b.eval_with(point, params)?,
                    BinOp::Div => {
                        let q = b.eval_with(point, params)?;
                        if q == 0.0 {
                            return Err(ExprError::Domain("division by zero".into()));
                        }
                        p / q
                    }
                    BinOp::Pow => power(p, b, point, params)?,
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(ExprError::Domain(format!("non-finite result {value}")))
        }
    }

    /// Evaluate an expression that has no parameters left.
    pub fn eval(&self, point: &Point) -> Result<f64> {
        static EMPTY: BTreeMap<String, f64> = BTreeMap::new();
        self.eval_with(point, &EMPTY)
    }

    /// Replace every bound parameter with its value. Unbound names are an error.
    pub fn bind(&self, params: &Bindings) -> Result<Expr> {
        Ok(match self {
            Expr::Param(name) => Expr::Const(
                *params
                    .get(name)
                    .ok_or_else(|| ExprError::Unbound(name.clone()))?,
            ),
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Neg(e) => Expr::neg(e.bind(params)?),
            Expr::Call(f, e) => Expr::call(*f, e.bind(params)?),
            Expr::Binary(op, a, b) => {
                Expr::binary(*op, a.bind(params)?, b.bind(params)?)
            }
        })
    }

    /// Substitute `replacement` for every occurrence of variable `var`.
    pub fn substitute(&self, var: Var, replacement: &Expr) -> Expr {
        match self {
            Expr::Var(v) if *v == var => replacement.clone(),
            Expr::Const(_) | Expr::Var(_) | Expr::Param(_) => self.clone(),
            Expr::Neg(e) => Expr::neg(e.substitute(var, replacement)),
            Expr::Call(f, e) => Expr::call(*f, e.substitute(var, replacement)),
            Expr::Binary(op, a, b) => Expr::binary(
                *op,
                a.substitute(var, replacement),
                b.substitute(var, replacement),
            ),
        }
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinOp::Add => Expr::add(a, b),
            BinOp::Sub => Expr::sub(a, b),
            BinOp::Mul => Expr::mul(a, b),
            BinOp::Div => Expr::div(a, b),
            BinOp::Pow => Expr::pow(a, b),
        }
    }

    pub fn variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Var(v) = e {
                out.insert(*v);
            }
        });
        out
    }

    pub fn parameters(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Param(p) = e {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn depends_on(&self, var: Var) -> bool {
        self.variables().contains(&var)
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    fn walk(&self, visit: &mut impl FnMut(&Expr)) {
        visit(self);
        match self {
            Expr::Neg(e) | Expr::Call(_, e) => e.walk(visit),
            Expr::Binary(_, a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
            _ => {}
        }
    }
}

fn power(base: f64, exp: &Expr, point: &Point, params: &Bindings) -> Result<f64> {
    if let Some(n) = exp.as_const().filter(|n| n.fract() == 0.0 && n.abs() < 2_147_483_648.0) {
        if base == 0.0 && n < 0.0 {
            return Err(ExprError::Domain("zero to a negative power".into()));
        }
        return Ok(base.powi(n as i32));
    }
    let e = exp.eval_with(point, params)?;
    if base < 0.0 && e.fract() != 0.0 {
        return Err(ExprError::Domain(format!(
            "negative base {base} to non-integer power {e}"
        )));
    }
    if base == 0.0 && e < 0.0 {
        return Err(ExprError::Domain("zero to a negative power".into()));
    }
    Ok(base.powf(e))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::to_string(self))
    }
}

/// Evaluate `e` with a flat map of names to values. Reserved variable names
/// are taken as variables, everything else as parameters.
pub fn evaluate(e: &Expr, bindings: &Bindings) -> Result<f64> {
    let mut point = Point::default();
    let mut seen = BTreeSet::new();
    for (name, value) in bindings {
        if let Some(var) = Var::from_name(name) {
            seen.insert(var);
            match var {
                Var::T => point.t = *value,
                Var::X => point.x = *value,
                Var::V => point.v = *value,
                Var::U => point.u = *value,
            }
        }
    }
    if let Some(missing) = e.variables().into_iter().find(|v| !seen.contains(v)) {
        return Err(ExprError::Unbound(missing.name().to_string()));
    }
    e.eval_with(&point, bindings)
}

pub use diff::differentiate;
