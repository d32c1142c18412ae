//! Parsed scalar expressions of one variable, evaluable together with first
//! and second derivatives by forward-mode AD.
//!
//! The solvers consume `(f, f', f'')` triples; obtaining them from a parsed
//! tree keeps user-supplied derivative bugs out of the picture and serves the
//! second-derivative method without extra input.

mod jet;
mod parser;

pub use jet::{pow_int, Jet2};
pub use parser::{parse, ParseError};

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Log,
    Exp,
    Sqrt,
    Sin,
    Cos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Expression tree over the variable `x`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn unary(op: UnaryOp, inner: Expr) -> Expr {
        Expr::Unary(op, Box::new(inner))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    /// The argument left the domain of an elementary operation; carries the
    /// operation name and the offending argument value.
    #[error("domain error: {op}({arg}) is undefined")]
    Domain { op: &'static str, arg: f64 },
    /// `a ^ b` where the exponent subtree depends on `x`.
    #[error("exponent depends on x; only constant exponents are supported")]
    NonConstantExponent,
}

const MAX_INT_EXPONENT: f64 = 2147483647.0;

fn pow_dispatch(base: Jet2, expo: Jet2) -> Result<Jet2, EvalError> {
    if expo.d1 != 0.0 || expo.d2 != 0.0 {
        return Err(EvalError::NonConstantExponent);
    }
    let c = expo.value;
    if c.fract() == 0.0 && c.abs() <= MAX_INT_EXPONENT {
        let n = c as i64;
        if n < 0 && base.value == 0.0 {
            return Err(EvalError::Domain {
                op: "pow",
                arg: 0.0,
            });
        }
        Ok(base.powi(n))
    } else {
        // non-integer exponents need a positive base
        if base.value <= 0.0 {
            return Err(EvalError::Domain {
                op: "pow",
                arg: base.value,
            });
        }
        Ok(base.powf_const(c))
    }
}

/// Evaluate `e` together with its first two derivatives at `x`.
pub fn eval_jet(e: &Expr, x: f64) -> Result<Jet2, EvalError> {
    match e {
        Expr::Const(c) => Ok(Jet2::constant(*c)),
        Expr::Var => Ok(Jet2::variable(x)),
        Expr::Unary(op, inner) => {
            let g = eval_jet(inner, x)?;
            match op {
                UnaryOp::Neg => Ok(-g),
                UnaryOp::Exp => Ok(g.exp()),
                UnaryOp::Sin => Ok(g.sin()),
                UnaryOp::Cos => Ok(g.cos()),
                UnaryOp::Log => {
                    if g.value <= 0.0 {
                        Err(EvalError::Domain {
                            op: "log",
                            arg: g.value,
                        })
                    } else {
                        Ok(g.ln())
                    }
                }
                UnaryOp::Sqrt => {
                    if g.value <= 0.0 {
                        Err(EvalError::Domain {
                            op: "sqrt",
                            arg: g.value,
                        })
                    } else {
                        Ok(g.sqrt())
                    }
                }
            }
        }
        Expr::Binary(op, lhs, rhs) => {
            let a = eval_jet(lhs, x)?;
            let b = eval_jet(rhs, x)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => {
                    if b.value == 0.0 {
                        Err(EvalError::Domain {
                            op: "div",
                            arg: 0.0,
                        })
                    } else {
                        Ok(a.quotient(b))
                    }
                }
                BinOp::Pow => pow_dispatch(a, b),
            }
        }
    }
}

/// Evaluate the value only (same domain rules as [`eval_jet`]).
pub fn eval_value(e: &Expr, x: f64) -> Result<f64, EvalError> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Var => Ok(x),
        Expr::Unary(op, inner) => {
            let g = eval_value(inner, x)?;
            match op {
                UnaryOp::Neg => Ok(-g),
                UnaryOp::Exp => Ok(g.exp()),
                UnaryOp::Sin => Ok(g.sin()),
                UnaryOp::Cos => Ok(g.cos()),
                UnaryOp::Log => {
                    if g <= 0.0 {
                        Err(EvalError::Domain { op: "log", arg: g })
                    } else {
                        Ok(g.ln())
                    }
                }
                UnaryOp::Sqrt => {
                    if g <= 0.0 {
                        Err(EvalError::Domain { op: "sqrt", arg: g })
                    } else {
                        Ok(g.sqrt())
                    }
                }
            }
        }
        Expr::Binary(op, lhs, rhs) => {
            let a = eval_value(lhs, x)?;
            let b = eval_value(rhs, x)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::Domain {
                            op: "div",
                            arg: 0.0,
                        })
                    } else {
                        Ok(a / b)
                    }
                }
                BinOp::Pow => {
                    if b.fract() == 0.0 && b.abs() <= MAX_INT_EXPONENT {
                        let n = b as i64;
                        if n < 0 && a == 0.0 {
                            return Err(EvalError::Domain {
                                op: "pow",
                                arg: 0.0,
                            });
                        }
                        Ok(pow_int(a, n))
                    } else if a <= 0.0 {
                        Err(EvalError::Domain { op: "pow", arg: a })
                    } else {
                        Ok(a.powf(b))
                    }
                }
            }
        }
    }
}

// Precedence levels used for minimal parenthesisation when printing.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) | Expr::Var => 5,
        Expr::Unary(UnaryOp::Neg, _) => 2,
        Expr::Unary(..) => 5, // function call carries its own parens
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 3,
        Expr::Binary(BinOp::Pow, ..) => 4,
    }
}

fn fmt_child(f: &mut fmt::Formatter<'_>, child: &Expr, needs_parens: bool) -> fmt::Result {
    if needs_parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "x"),
            Expr::Unary(UnaryOp::Neg, inner) => {
                write!(f, "-")?;
                // the grammar's unary minus grabs only a power, so anything
                // looser must be parenthesised to survive a reparse
                fmt_child(f, inner, precedence(inner) < 4)
            }
            Expr::Unary(op, inner) => {
                let name = match op {
                    UnaryOp::Log => "log",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({inner})")
            }
            Expr::Binary(op, lhs, rhs) => {
                let (sym, prec) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 3),
                    BinOp::Div => ("/", 3),
                    BinOp::Pow => ("^", 4),
                };
                match op {
                    // left-associative: parenthesise a right child of equal level
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        fmt_child(f, lhs, precedence(lhs) < prec)?;
                        write!(f, "{sym}")?;
                        fmt_child(f, rhs, precedence(rhs) <= prec)
                    }
                    // right-associative; a leading minus in the exponent is
                    // legal and the Neg printer parenthesises itself
                    BinOp::Pow => {
                        fmt_child(f, lhs, precedence(lhs) <= prec)?;
                        write!(f, "{sym}")?;
                        let rp = match rhs.as_ref() {
                            Expr::Unary(UnaryOp::Neg, _) => false,
                            other => precedence(other) < prec,
                        };
                        fmt_child(f, rhs, rp)
                    }
                }
            }
        }
    }
}
