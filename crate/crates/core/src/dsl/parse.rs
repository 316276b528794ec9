use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use super::{BinOp, CrossExpr, Var, MAX_COORDS};

pub const MAX_SOURCE_LEN: usize = 64 * 1024;
const MAX_DEPTH: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// Something else was found where one of `expected` should be.
    Unexpected {
        expected: Vec<&'static str>,
    },
    /// `min`/`max`/`abs` called with the wrong number of arguments.
    Arity {
        function: &'static str,
        required: usize,
        found: usize,
    },
    UnknownIdentifier,
    IntegerOverflow,
    TooLong,
    TooDeep,
}

/// Failure at byte `offset` of the source.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Unexpected { expected } => {
                write!(f, "at byte {}: expected one of {:?}", self.offset, expected)
            }
            ParseErrorKind::Arity { function, required, found } => write!(
                f,
                "at byte {}: {function} requires {required} argument{}, found {found}",
                self.offset,
                if *required == 1 { "" } else { "s" }
            ),
            ParseErrorKind::UnknownIdentifier => {
                write!(f, "at byte {}: unknown identifier", self.offset)
            }
            ParseErrorKind::IntegerOverflow => {
                write!(f, "at byte {}: integer literal too large", self.offset)
            }
            ParseErrorKind::TooLong => write!(f, "source exceeds {MAX_SOURCE_LEN} bytes"),
            ParseErrorKind::TooDeep => {
                write!(f, "at byte {}: nesting deeper than {MAX_DEPTH}", self.offset)
            }
        }
    }
}

const FACTOR_START: &[&str] = &["integer", "variable", "dxy", "abs", "min", "max", "("];

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self, expected: &[&'static str]) -> ParseError {
        ParseError { offset: self.pos, kind: ParseErrorKind::Unexpected { expected: expected.to_vec() } }
    }

    fn expect(&mut self, byte: u8, name: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn expr(&mut self) -> Result<CrossExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = CrossExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<CrossExpr, ParseError> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = CrossExpr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<CrossExpr, ParseError> {
        if self.depth >= MAX_DEPTH {
            return Err(ParseError { offset: self.pos, kind: ParseErrorKind::TooDeep });
        }
        self.depth += 1;
        let out = self.factor_inner();
        self.depth -= 1;
        out
    }

    fn factor_inner(&mut self) -> Result<CrossExpr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', ")")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.integer(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            _ => Err(self.unexpected(FACTOR_START)),
        }
    }

    fn integer(&mut self) -> Result<CrossExpr, ParseError> {
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(&c) = self.src.get(self.pos) {
            if !c.is_ascii_digit() {
                break;
            }
            value = value
                .checked_mul(10)
                .and_then(|v| v.checked_add((c - b'0') as u64))
                .ok_or(ParseError { offset: start, kind: ParseErrorKind::IntegerOverflow })?;
            self.pos += 1;
        }
        Ok(CrossExpr::Int(value))
    }

    fn identifier(&mut self) -> Result<CrossExpr, ParseError> {
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_') {
            self.pos += 1;
        }
        let word = &self.src[start..self.pos];
        let func = match word {
            b"dxy" => return Ok(CrossExpr::Var(Var::Dxy)),
            b"abs" => "abs",
            b"min" => "min",
            b"max" => "max",
            [v @ (b'x' | b'y'), d] if d.is_ascii_digit() && ((d - b'0') as usize) < MAX_COORDS => {
                let k = d - b'0';
                return Ok(CrossExpr::Var(if *v == b'x' { Var::X(k) } else { Var::Y(k) }));
            }
            _ => return Err(ParseError { offset: start, kind: ParseErrorKind::UnknownIdentifier }),
        };
        self.expect(b'(', "(")?;
        let mut args = Vec::with_capacity(2);
        args.push(self.expr()?);
        while self.peek() == Some(b',') {
            self.pos += 1;
            args.push(self.expr()?);
        }
        let required = if func == "abs" { 1 } else { 2 };
        if self.peek() != Some(b')') {
            let mut expected: Vec<&'static str> = alloc::vec![")"];
            if args.len() < required {
                expected = alloc::vec![","];
            }
            expected.extend_from_slice(&["+", "-", "*"]);
            return Err(self.unexpected(&expected));
        }
        if args.len() != required {
            return Err(ParseError {
                offset: self.pos,
                kind: ParseErrorKind::Arity { function: func, required, found: args.len() },
            });
        }
        self.pos += 1;
        let mut it = args.into_iter();
        let a = Box::new(it.next().expect("one argument"));
        Ok(match func {
            "abs" => CrossExpr::Abs(a),
            "min" => CrossExpr::Min(a, Box::new(it.next().expect("two arguments"))),
            _ => CrossExpr::Max(a, Box::new(it.next().expect("two arguments"))),
        })
    }
}

/// Recursive-descent parse of a cross expression.
pub fn parse_cross_expr(text: &str) -> Result<CrossExpr, ParseError> {
    if text.len() > MAX_SOURCE_LEN {
        return Err(ParseError { offset: MAX_SOURCE_LEN, kind: ParseErrorKind::TooLong });
    }
    let mut p = Parser { src: text.as_bytes(), pos: 0, depth: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.unexpected(&["+", "-", "*", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn additive_terms(e: &CrossExpr) -> usize {
        match e {
            CrossExpr::Bin(BinOp::Add | BinOp::Sub, a, _) => additive_terms(a) + 1,
            _ => 1,
        }
    }

    #[test]
    fn wedge_has_three_top_level_terms() {
        let e = parse_cross_expr("abs(x0-y0)+min(x0,y0)+1").unwrap();
        assert_eq!(additive_terms(&e), 3);
        match &e {
            CrossExpr::Bin(BinOp::Add, lhs, one) => {
                assert_eq!(**one, CrossExpr::Int(1));
                assert!(matches!(**lhs, CrossExpr::Bin(BinOp::Add, ..)));
            }
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn min_with_one_argument_is_arity_error() {
        let err = parse_cross_expr("min(x0)").unwrap_err();
        assert_eq!(err.offset, 6);
        assert_eq!(err.kind, ParseErrorKind::Arity { function: "min", required: 2, found: 1 });
        assert!(err.to_string().contains("min requires 2 arguments"));
    }

    #[test]
    fn dxy_plus_one() {
        let e = parse_cross_expr("dxy+1").unwrap();
        assert_eq!(e, CrossExpr::Bin(BinOp::Add, Box::new(CrossExpr::Var(Var::Dxy)), Box::new(CrossExpr::Int(1))));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let e = parse_cross_expr("10-3-2").unwrap();
        assert_eq!(e.to_string(), "10-3-2");
        let r = parse_cross_expr("10-(3-2)").unwrap();
        assert_ne!(e, r);
        assert_eq!(r.to_string(), "10-(3-2)");
    }

    #[test]
    fn error_positions() {
        let e = parse_cross_expr("1 + ").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(matches!(e.kind, ParseErrorKind::Unexpected { .. }));
        assert_eq!(parse_cross_expr("x9").unwrap_err().kind, ParseErrorKind::UnknownIdentifier);
        assert_eq!(parse_cross_expr("-1").unwrap_err().offset, 0);
        assert_eq!(
            parse_cross_expr("abs(1,2)").unwrap_err().kind,
            ParseErrorKind::Arity { function: "abs", required: 1, found: 2 }
        );
        assert_eq!(parse_cross_expr("99999999999999999999").unwrap_err().kind, ParseErrorKind::IntegerOverflow);
        let e = parse_cross_expr("(1+2").unwrap_err();
        assert_eq!(e.offset, 4);
        let e = parse_cross_expr("1 2").unwrap_err();
        assert_eq!(e.offset, 2);
    }

    #[test]
    fn rejects_oversized_source() {
        let text = "1+".repeat(MAX_SOURCE_LEN / 2) + "1";
        assert_eq!(parse_cross_expr(&text).unwrap_err().kind, ParseErrorKind::TooLong);
        let deep = "(".repeat(1000) + "1" + &")".repeat(1000);
        assert_eq!(parse_cross_expr(&deep).unwrap_err().kind, ParseErrorKind::TooDeep);
    }
}
