use super::{BinOp, CrossExpr, Var};
use crate::dist::Dist;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("value {0} is below the 1-quantum floor of a cross distance")]
    BelowFloor(i128),
    #[error("coordinate {index} missing: point has {dim} coordinates")]
    MissingCoordinate { index: usize, dim: usize },
    #[error("integer overflow during evaluation")]
    Overflow,
}

// Intermediates stay within i128 easily: literals are u64 and inputs are
// capped, so only deep products can overflow.
fn eval(e: &CrossExpr, x: &[i64], y: &[i64], dxy: i128) -> Result<i128, EvalError> {
    Ok(match e {
        CrossExpr::Int(v) => *v as i128,
        CrossExpr::Var(Var::Dxy) => dxy,
        CrossExpr::Var(Var::X(k)) => coord(x, *k)?,
        CrossExpr::Var(Var::Y(k)) => coord(y, *k)?,
        CrossExpr::Abs(a) => eval(a, x, y, dxy)?.checked_abs().ok_or(EvalError::Overflow)?,
        CrossExpr::Min(a, b) => eval(a, x, y, dxy)?.min(eval(b, x, y, dxy)?),
        CrossExpr::Max(a, b) => eval(a, x, y, dxy)?.max(eval(b, x, y, dxy)?),
        CrossExpr::Bin(op, a, b) => {
            let (a, b) = (eval(a, x, y, dxy)?, eval(b, x, y, dxy)?);
            match op {
                BinOp::Add => a.checked_add(b),
                BinOp::Sub => a.checked_sub(b),
                BinOp::Mul => a.checked_mul(b),
            }
            .ok_or(EvalError::Overflow)?
        }
    })
}

fn coord(label: &[i64], k: u8) -> Result<i128, EvalError> {
    label
        .get(k as usize)
        .map(|&v| v as i128)
        .ok_or(EvalError::MissingCoordinate { index: k as usize, dim: label.len() })
}

/// Evaluates `e` for the point pair `(x, y')`. The result must be at least
/// one quantum; intermediate values may go negative.
pub fn eval_cross_expr(
    e: &CrossExpr,
    x_label: &[i64],
    y_label: &[i64],
    base_distance: Dist,
) -> Result<Dist, EvalError> {
    let v = eval(e, x_label, y_label, base_distance.0 as i128)?;
    if v < 1 {
        return Err(EvalError::BelowFloor(v));
    }
    u64::try_from(v).map(Dist).map_err(|_| EvalError::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_cross_expr;

    fn run(src: &str, x: &[i64], y: &[i64], d: u64) -> Result<Dist, EvalError> {
        eval_cross_expr(&parse_cross_expr(src).unwrap(), x, y, Dist(d))
    }

    #[test]
    fn wedge_on_diagonal() {
        assert_eq!(run("abs(x0-y0)+min(x0,y0)+1", &[3], &[3], 0), Ok(Dist(4)));
    }

    #[test]
    fn dxy_shift() {
        assert_eq!(run("dxy+1", &[], &[], 7), Ok(Dist(8)));
    }

    #[test]
    fn negative_result_rejected() {
        assert_eq!(run("x0-y0", &[1], &[5], 4), Err(EvalError::BelowFloor(-4)));
        assert_eq!(run("x0-x0", &[1], &[5], 4), Err(EvalError::BelowFloor(0)));
    }

    #[test]
    fn negative_intermediate_is_fine() {
        assert_eq!(run("abs(x0-y0)*2-1", &[1], &[5], 4), Ok(Dist(7)));
    }

    #[test]
    fn missing_coordinate() {
        assert_eq!(run("x1+1", &[3], &[3], 0), Err(EvalError::MissingCoordinate { index: 1, dim: 1 }));
    }

    #[test]
    fn overflow_detected() {
        let src = "18446744073709551615*18446744073709551615*18446744073709551615";
        assert_eq!(run(src, &[], &[], 0), Err(EvalError::Overflow));
    }
}
