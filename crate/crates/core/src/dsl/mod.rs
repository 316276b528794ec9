//! A tiny integer expression language for cross-block formulas.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := INT | x0..x3 | y0..y3 | dxy
//!         | abs '(' expr ')' | (min | max) '(' expr ',' expr ')'
//!         | '(' expr ')'
//! ```
//!
//! `x*` are coordinates of the point in the first copy, `y*` of the point in
//! the second copy, and `dxy` is their base distance.

mod eval;
mod parse;

use alloc::boxed::Box;
use core::fmt;

pub use eval::{eval_cross_expr, EvalError};
pub use parse::{parse_cross_expr, ParseError, ParseErrorKind, MAX_SOURCE_LEN};

/// Number of coordinates each point may expose to an expression.
pub const MAX_COORDS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    X(u8),
    Y(u8),
    Dxy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul => 2,
        }
    }

    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CrossExpr {
    Int(u64),
    Var(Var),
    Abs(Box<CrossExpr>),
    Min(Box<CrossExpr>, Box<CrossExpr>),
    Max(Box<CrossExpr>, Box<CrossExpr>),
    Bin(BinOp, Box<CrossExpr>, Box<CrossExpr>),
}

impl CrossExpr {
    fn precedence(&self) -> u8 {
        match self {
            CrossExpr::Bin(op, ..) => op.precedence(),
            _ => 3,
        }
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coordinate(&self) -> Option<usize> {
        match self {
            CrossExpr::Int(_) | CrossExpr::Var(Var::Dxy) => None,
            CrossExpr::Var(Var::X(k)) | CrossExpr::Var(Var::Y(k)) => Some(*k as usize),
            CrossExpr::Abs(e) => e.max_coordinate(),
            CrossExpr::Min(a, b) | CrossExpr::Max(a, b) | CrossExpr::Bin(_, a, b) => {
                a.max_coordinate().max(b.max_coordinate())
            }
        }
    }

    pub fn uses_dxy(&self) -> bool {
        match self {
            CrossExpr::Var(Var::Dxy) => true,
            CrossExpr::Int(_) | CrossExpr::Var(_) => false,
            CrossExpr::Abs(e) => e.uses_dxy(),
            CrossExpr::Min(a, b) | CrossExpr::Max(a, b) | CrossExpr::Bin(_, a, b) => a.uses_dxy() || b.uses_dxy(),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(k) => write!(f, "x{k}"),
            Var::Y(k) => write!(f, "y{k}"),
            Var::Dxy => f.write_str("dxy"),
        }
    }
}

/// Prints with the minimum parentheses that reparse to the same tree.
impl fmt::Display for CrossExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossExpr::Int(v) => write!(f, "{v}"),
            CrossExpr::Var(v) => write!(f, "{v}"),
            CrossExpr::Abs(e) => write!(f, "abs({e})"),
            CrossExpr::Min(a, b) => write!(f, "min({a},{b})"),
            CrossExpr::Max(a, b) => write!(f, "max({a},{b})"),
            CrossExpr::Bin(op, a, b) => {
                let p = op.precedence();
                if a.precedence() < p {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, "{}", op.symbol())?;
                if b.precedence() <= p {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}
