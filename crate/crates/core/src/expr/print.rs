//! Canonical printer. Output parses back to a tree with identical evaluation.

use super::{BinOp, Expr};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

pub fn to_string(e: &Expr) -> String {
    let mut out = String::new();
    write(e, 0, &mut out);
    out
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if c.is_sign_negative() => ATOM,
        Expr::Const(_) | Expr::Var(_) | Expr::Param(_) | Expr::Call(..) => ATOM,
        Expr::Neg(_) => NEG,
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => ADD,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => MUL,
        Expr::Binary(BinOp::Pow, ..) => POW,
    }
}

fn write(e: &Expr, min: u8, out: &mut String) {
    let prec = precedence(e);
    let paren = prec < min;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Const(c) => {
            if c.is_sign_negative() {
                out.push_str(&format!("(-{})", c.abs()));
            } else {
                out.push_str(&format!("{c}"));
            }
        }
        Expr::Var(v) => out.push_str(v.name()),
        Expr::Param(p) => out.push_str(p),
        Expr::Neg(inner) => {
            out.push('-');
            write(inner, NEG, out);
        }
        Expr::Call(f, arg) => {
            out.push_str(f.name());
            out.push('(');
            write(arg, 0, out);
            out.push(')');
        }
        Expr::Binary(op, a, b) => {
            let (sym, lmin, rmin) = match op {
                BinOp::Add => (" + ", ADD, MUL),
                BinOp::Sub => (" - ", ADD, MUL),
                BinOp::Mul => ("*", MUL, NEG),
                BinOp::Div => ("/", MUL, NEG),
                BinOp::Pow => ("^", ATOM, NEG),
            };
            write(a, lmin, out);
            out.push_str(sym);
            write(b, rmin, out);
        }
    }
    if paren {
        out.push(')');
    }
}
