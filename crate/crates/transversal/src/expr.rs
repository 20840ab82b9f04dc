//! The small expression language used to define chart components.
//!
//! Grammar (whitespace-insensitive, `^` binds tightest, then unary minus,
//! then `*` `/`, then `+` `-`, all left-associative):
//!
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' ['-'] integer)?
//! atom   := number | 'pi' | 'x1'..'xd' | fn '(' expr ')' | '(' expr ')'
//! fn     := 'sin' | 'cos' | 'exp' | 'sqrt'
//! ```
//!
//! Expressions are immutable after parsing and evaluation is pure, so they
//! are safe to share across threads. First derivatives come from dual-number
//! evaluation and are exact up to rounding; there is deliberately no `abs`,
//! `min` or `max`, which keeps every expression C1 on its domain.

use crate::error::{Error, Result};
use std::fmt;

/// Value plus first partial derivatives with respect to the chart parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DualValue {
    pub value: f64,
    pub partials: Vec<f64>,
}

impl DualValue {
    pub fn constant(value: f64, dims: usize) -> Self {
        DualValue {
            value,
            partials: vec![0.0; dims],
        }
    }

    pub fn variable(value: f64, index: usize, dims: usize) -> Self {
        let mut partials = vec![0.0; dims];
        partials[index] = 1.0;
        DualValue { value, partials }
    }

    fn add(&self, rhs: &DualValue) -> DualValue {
        DualValue {
            value: self.value + rhs.value,
            partials: zip(&self.partials, &rhs.partials, |a, b| a + b),
        }
    }

    fn sub(&self, rhs: &DualValue) -> DualValue {
        DualValue {
            value: self.value - rhs.value,
            partials: zip(&self.partials, &rhs.partials, |a, b| a - b),
        }
    }

    fn mul(&self, rhs: &DualValue) -> DualValue {
        DualValue {
            value: self.value * rhs.value,
            partials: zip(&self.partials, &rhs.partials, |a, b| {
                a * rhs.value + self.value * b
            }),
        }
    }

    fn div(&self, rhs: &DualValue, position: usize) -> Result<DualValue> {
        if rhs.value == 0.0 {
            return Err(Error::DivisionByZero { position });
        }
        let w2 = rhs.value * rhs.value;
        Ok(DualValue {
            value: self.value / rhs.value,
            partials: zip(&self.partials, &rhs.partials, |a, b| {
                (a * rhs.value - self.value * b) / w2
            }),
        })
    }

    fn neg(&self) -> DualValue {
        DualValue {
            value: -self.value,
            partials: self.partials.iter().map(|p| -p).collect(),
        }
    }

    fn chain(&self, value: f64, outer_derivative: f64) -> DualValue {
        DualValue {
            value,
            partials: self.partials.iter().map(|p| p * outer_derivative).collect(),
        }
    }

    fn sqrt(&self, position: usize) -> Result<DualValue> {
        if self.value < 0.0 {
            return Err(Error::SqrtOfNegative { position });
        }
        let root = self.value.sqrt();
        if root == 0.0 {
            // sqrt is not differentiable at 0; only a constant argument survives.
            if self.partials.iter().any(|p| *p != 0.0) {
                return Err(Error::DivisionByZero { position });
            }
            return Ok(DualValue::constant(0.0, self.partials.len()));
        }
        Ok(self.chain(root, 0.5 / root))
    }

    fn powi(&self, exponent: i32, position: usize) -> Result<DualValue> {
        if exponent < 0 && self.value == 0.0 {
            return Err(Error::DivisionByZero { position });
        }
        let value = self.value.powi(exponent);
        let derivative = f64::from(exponent) * self.value.powi(exponent - 1);
        Ok(self.chain(value, derivative))
    }
}

fn zip(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

/// Abstract syntax tree of one chart component.
///
/// `Div`, `Sqrt` and `PowInt` carry the byte offset of their operator in the
/// source text so domain errors can point at the offending subexpression.
/// Structural equality ignores those offsets.
#[derive(Debug, Clone)]
pub enum Expression {
    Literal(f64),
    Pi,
    /// Zero-based parameter index; `x1` parses to `Var(0)`.
    Var(usize),
    Neg(Box<Expression>),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Div(Box<Expression>, Box<Expression>, usize),
    PowInt(Box<Expression>, i32, usize),
    Sin(Box<Expression>),
    Cos(Box<Expression>),
    Exp(Box<Expression>),
    Sqrt(Box<Expression>, usize),
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        use Expression::*;
        match (self, other) {
            (Literal(a), Literal(b)) => a.to_bits() == b.to_bits(),
            (Pi, Pi) => true,
            (Var(a), Var(b)) => a == b,
            (Neg(a), Neg(b)) => a == b,
            (Add(a, b), Add(c, d)) | (Sub(a, b), Sub(c, d)) | (Mul(a, b), Mul(c, d)) => {
                a == c && b == d
            }
            (Div(a, b, _), Div(c, d, _)) => a == c && b == d,
            (PowInt(a, k, _), PowInt(b, l, _)) => a == b && k == l,
            (Sin(a), Sin(b)) | (Cos(a), Cos(b)) | (Exp(a), Exp(b)) => a == b,
            (Sqrt(a, _), Sqrt(b, _)) => a == b,
            _ => false,
        }
    }
}

impl Expression {
    /// Parses `text` as an expression in the variables `x1..x{dims}`.
    pub fn parse(text: &str, dims: usize) -> Result<Expression> {
        Parser::new(text, dims)?.parse()
    }

    /// Evaluates the expression at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        use Expression::*;
        Ok(match self {
            Literal(v) => *v,
            Pi => std::f64::consts::PI,
            Var(i) => x[*i],
            Neg(a) => -a.eval(x)?,
            Add(a, b) => a.eval(x)? + b.eval(x)?,
            Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Div(a, b, pos) => {
                let denominator = b.eval(x)?;
                if denominator == 0.0 {
                    return Err(Error::DivisionByZero { position: *pos });
                }
                a.eval(x)? / denominator
            }
            PowInt(a, k, pos) => {
                let base = a.eval(x)?;
                if *k < 0 && base == 0.0 {
                    return Err(Error::DivisionByZero { position: *pos });
                }
                base.powi(*k)
            }
            Sin(a) => a.eval(x)?.sin(),
            Cos(a) => a.eval(x)?.cos(),
            Exp(a) => a.eval(x)?.exp(),
            Sqrt(a, pos) => {
                let inner = a.eval(x)?;
                if inner < 0.0 {
                    return Err(Error::SqrtOfNegative { position: *pos });
                }
                inner.sqrt()
            }
        })
    }

    /// Evaluates the expression and its gradient at `x` with dual numbers.
    pub fn eval_dual(&self, x: &[f64]) -> Result<DualValue> {
        use Expression::*;
        let dims = x.len();
        Ok(match self {
            Literal(v) => DualValue::constant(*v, dims),
            Pi => DualValue::constant(std::f64::consts::PI, dims),
            Var(i) => DualValue::variable(x[*i], *i, dims),
            Neg(a) => a.eval_dual(x)?.neg(),
            Add(a, b) => a.eval_dual(x)?.add(&b.eval_dual(x)?),
            Sub(a, b) => a.eval_dual(x)?.sub(&b.eval_dual(x)?),
            Mul(a, b) => a.eval_dual(x)?.mul(&b.eval_dual(x)?),
            Div(a, b, pos) => a.eval_dual(x)?.div(&b.eval_dual(x)?, *pos)?,
            PowInt(a, k, pos) => a.eval_dual(x)?.powi(*k, *pos)?,
            Sin(a) => {
                let inner = a.eval_dual(x)?;
                inner.chain(inner.value.sin(), inner.value.cos())
            }
            Cos(a) => {
                let inner = a.eval_dual(x)?;
                inner.chain(inner.value.cos(), -inner.value.sin())
            }
            Exp(a) => {
                let inner = a.eval_dual(x)?;
                let e = inner.value.exp();
                inner.chain(e, e)
            }
            Sqrt(a, pos) => a.eval_dual(x)?.sqrt(*pos)?,
        })
    }

    /// Largest zero-based variable index used, or `None` for constants.
    pub fn max_var_index(&self) -> Option<usize> {
        use Expression::*;
        match self {
            Literal(_) | Pi => None,
            Var(i) => Some(*i),
            Neg(a) | Sin(a) | Cos(a) | Exp(a) | Sqrt(a, _) | PowInt(a, _, _) => a.max_var_index(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b, _) => {
                match (a.max_var_index(), b.max_var_index()) {
                    (Some(i), Some(j)) => Some(i.max(j)),
                    (Some(i), None) | (None, Some(i)) => Some(i),
                    (None, None) => None,
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        use Expression::*;
        match self {
            Add(..) | Sub(..) => 1,
            Mul(..) | Div(..) => 2,
            Neg(_) => 3,
            PowInt(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        use Expression::*;
        let prec = self.precedence();
        if prec < min_prec {
            write!(f, "(")?;
            self.fmt_prec(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Literal(v) => write!(f, "{}", v),
            Pi => write!(f, "pi"),
            Var(i) => write!(f, "x{}", i + 1),
            Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 4)
            }
            Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)
            }
            Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)
            }
            Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, "*")?;
                b.fmt_prec(f, 3)
            }
            Div(a, b, _) => {
                a.fmt_prec(f, 2)?;
                write!(f, "/")?;
                b.fmt_prec(f, 3)
            }
            PowInt(a, k, _) => {
                a.fmt_prec(f, 5)?;
                write!(f, "^{}", k)
            }
            Sin(a) => write!(f, "sin({})", a),
            Cos(a) => write!(f, "cos({})", a),
            Exp(a) => write!(f, "exp({})", a),
            Sqrt(a, _) => write!(f, "sqrt({})", a),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    pos: usize,
}

struct Parser {
    tokens: Vec<Token>,
    cursor: usize,
    dims: usize,
    end: usize,
}

impl Parser {
    fn new(text: &str, dims: usize) -> Result<Parser> {
        if text.trim().is_empty() {
            return Err(Error::Syntax {
                message: "empty expression".into(),
                position: 0,
            });
        }
        Ok(Parser {
            tokens: tokenize(text)?,
            cursor: 0,
            dims,
            end: text.len(),
        })
    }

    fn parse(mut self) -> Result<Expression> {
        let expr = self.expr()?;
        if let Some(tok) = self.tokens.get(self.cursor) {
            return Err(Error::Syntax {
                message: "unexpected trailing input".into(),
                position: tok.pos,
            });
        }
        Ok(expr)
    }

    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.cursor).map(|t| &t.kind)
    }

    fn pos(&self) -> usize {
        self.tokens.get(self.cursor).map_or(self.end, |t| t.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.cursor).cloned();
        if tok.is_some() {
            self.cursor += 1;
        }
        tok
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<usize> {
        match self.tokens.get(self.cursor) {
            Some(tok) if tok.kind == kind => {
                self.cursor += 1;
                Ok(tok.pos)
            }
            _ => Err(Error::Syntax {
                message: format!("expected {what}"),
                position: self.pos(),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(TokenKind::Plus) => {
                    self.bump();
                    lhs = Expression::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(TokenKind::Minus) => {
                    self.bump();
                    lhs = Expression::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(TokenKind::Star) => {
                    self.bump();
                    lhs = Expression::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(TokenKind::Slash) => {
                    let pos = self.pos();
                    self.bump();
                    lhs = Expression::Div(Box::new(lhs), Box::new(self.factor()?), pos);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expression> {
        if matches!(self.peek(), Some(TokenKind::Minus)) {
            self.bump();
            return Ok(Expression::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression> {
        let base = self.atom()?;
        if !matches!(self.peek(), Some(TokenKind::Caret)) {
            return Ok(base);
        }
        let caret_pos = self.pos();
        self.bump();
        let negative = if matches!(self.peek(), Some(TokenKind::Minus)) {
            self.bump();
            true
        } else {
            false
        };
        let exp_pos = self.pos();
        let exponent = match self.bump().map(|t| t.kind) {
            Some(TokenKind::Number(v)) if v.fract() == 0.0 && v.abs() <= i32::MAX as f64 => {
                v as i32
            }
            _ => {
                return Err(Error::Syntax {
                    message: "exponent must be an integer literal".into(),
                    position: exp_pos,
                })
            }
        };
        if matches!(self.peek(), Some(TokenKind::Caret)) {
            return Err(Error::Syntax {
                message: "`^` does not associate; parenthesize the base".into(),
                position: self.pos(),
            });
        }
        let exponent = if negative { -exponent } else { exponent };
        Ok(Expression::PowInt(Box::new(base), exponent, caret_pos))
    }

    fn atom(&mut self) -> Result<Expression> {
        let tok = self.bump().ok_or_else(|| Error::Syntax {
            message: "unexpected end of expression".into(),
            position: self.end,
        })?;
        match tok.kind {
            TokenKind::Number(v) => Ok(Expression::Literal(v)),
            TokenKind::LParen => {
                let inner = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(inner)
            }
            TokenKind::Ident(name) => self.ident(name, tok.pos),
            _ => Err(Error::Syntax {
                message: "expected a number, variable, function or `(`".into(),
                position: tok.pos,
            }),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> Result<Expression> {
        if name == "pi" {
            return Ok(Expression::Pi);
        }
        let function: Option<fn(Box<Expression>) -> Expression> = match name.as_str() {
            "sin" => Some(Expression::Sin),
            "cos" => Some(Expression::Cos),
            "exp" => Some(Expression::Exp),
            "sqrt" => Some(|a| Expression::Sqrt(a, 0)),
            _ => None,
        };
        if let Some(make) = function {
            self.expect(TokenKind::LParen, "`(` after function name")?;
            let mut args = vec![self.expr()?];
            while matches!(self.peek(), Some(TokenKind::Comma)) {
                self.bump();
                args.push(self.expr()?);
            }
            self.expect(TokenKind::RParen, "`)`")?;
            if args.len() != 1 {
                return Err(Error::ArityMismatch {
                    name,
                    expected: 1,
                    found: args.len(),
                    position: pos,
                });
            }
            let arg = Box::new(args.pop().unwrap());
            return Ok(if name == "sqrt" {
                Expression::Sqrt(arg, pos)
            } else {
                make(arg)
            });
        }
        // Variables are `x` followed by a 1-based index.
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let index: usize = digits.parse().map_err(|_| Error::UnknownVariable {
                    name: name.clone(),
                    position: pos,
                    dims: self.dims,
                })?;
                if index >= 1 && index <= self.dims {
                    return Ok(Expression::Var(index - 1));
                }
                return Err(Error::UnknownVariable {
                    name,
                    position: pos,
                    dims: self.dims,
                });
            }
        }
        Err(Error::UnknownIdentifier {
            name,
            position: pos,
        })
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let pos = i;
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
            }
            b'+' => {
                tokens.push(Token { kind: TokenKind::Plus, pos });
                i += 1;
            }
            b'-' => {
                tokens.push(Token { kind: TokenKind::Minus, pos });
                i += 1;
            }
            b'*' => {
                tokens.push(Token { kind: TokenKind::Star, pos });
                i += 1;
            }
            b'/' => {
                tokens.push(Token { kind: TokenKind::Slash, pos });
                i += 1;
            }
            b'^' => {
                tokens.push(Token { kind: TokenKind::Caret, pos });
                i += 1;
            }
            b'(' => {
                tokens.push(Token { kind: TokenKind::LParen, pos });
                i += 1;
            }
            b')' => {
                tokens.push(Token { kind: TokenKind::RParen, pos });
                i += 1;
            }
            b',' => {
                tokens.push(Token { kind: TokenKind::Comma, pos });
                i += 1;
            }
            b'0'..=b'9' => {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'.' {
                    j += 1;
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < bytes.len() && (bytes[j] == b'e' || bytes[j] == b'E') {
                    let mut k = j + 1;
                    if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                        k += 1;
                    }
                    if k < bytes.len() && bytes[k].is_ascii_digit() {
                        j = k;
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                    }
                }
                let value: f64 = text[i..j].parse().map_err(|_| Error::Syntax {
                    message: format!("malformed number `{}`", &text[i..j]),
                    position: pos,
                })?;
                tokens.push(Token {
                    kind: TokenKind::Number(value),
                    pos,
                });
                i = j;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut j = i;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_')
                {
                    j += 1;
                }
                tokens.push(Token {
                    kind: TokenKind::Ident(text[i..j].to_string()),
                    pos,
                });
                i = j;
            }
            _ => {
                return Err(Error::Syntax {
                    message: format!("unexpected character `{}`", &text[i..i + 1]),
                    position: pos,
                })
            }
        }
    }
    Ok(tokens)
}

/// Central finite difference of `e` along parameter `j`, step 1e-5.
///
/// Independent of the dual-number path; used to cross-check it.
pub fn central_difference(e: &Expression, x: &[f64], j: usize, step: f64) -> Result<f64> {
    let mut forward = x.to_vec();
    let mut backward = x.to_vec();
    forward[j] += step;
    backward[j] -= step;
    Ok((e.eval(&forward)? - e.eval(&backward)?) / (2.0 * step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn parse(text: &str, dims: usize) -> Expression {
        Expression::parse(text, dims).unwrap()
    }

    #[test]
    fn parses_division_of_cosine() {
        let e = parse("cos(x1)/4", 1);
        match e {
            Expression::Div(num, den, _) => {
                assert_eq!(*num, Expression::Cos(Box::new(Expression::Var(0))));
                assert_eq!(*den, Expression::Literal(4.0));
            }
            other => panic!("unexpected AST {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_scope_variable() {
        let err = Expression::parse("x1 + x2*x2", 1).unwrap_err();
        match err {
            Error::UnknownVariable { name, position, dims } => {
                assert_eq!(name, "x2");
                assert_eq!(position, 5);
                assert_eq!(dims, 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn evaluates_pi_identity() {
        let e = parse("sin(pi/2)", 0);
        assert_eq!(e.eval(&[]).unwrap(), 1.0);
    }

    #[test]
    fn precedence_follows_grammar() {
        assert_eq!(parse("2 + 3*4^2", 0).eval(&[]).unwrap(), 50.0);
        assert_eq!(parse("-x1^2", 1).eval(&[3.0]).unwrap(), -9.0);
        assert_eq!(parse("(2 + 3)*4", 0).eval(&[]).unwrap(), 20.0);
        assert_eq!(parse("2 - 3 - 4", 0).eval(&[]).unwrap(), -5.0);
        assert_eq!(parse("16/4/2", 0).eval(&[]).unwrap(), 2.0);
        assert_eq!(parse("2^-2", 0).eval(&[]).unwrap(), 0.25);
    }

    #[test]
    fn rejects_unknown_identifiers_and_arity() {
        assert!(matches!(
            Expression::parse("abs(x1)", 1).unwrap_err(),
            Error::UnknownIdentifier { .. }
        ));
        assert!(matches!(
            Expression::parse("tan(x1)", 1).unwrap_err(),
            Error::UnknownIdentifier { .. }
        ));
        assert!(matches!(
            Expression::parse("sin(x1, x1)", 1).unwrap_err(),
            Error::ArityMismatch { expected: 1, found: 2, .. }
        ));
        assert!(matches!(
            Expression::parse("", 1).unwrap_err(),
            Error::Syntax { .. }
        ));
        assert!(matches!(
            Expression::parse("2^x1", 1).unwrap_err(),
            Error::Syntax { .. }
        ));
    }

    #[test]
    fn domain_errors_carry_positions() {
        let e = parse("1/(x1 - 1)", 1);
        match e.eval(&[1.0]).unwrap_err() {
            Error::DivisionByZero { position } => assert_eq!(position, 1),
            other => panic!("unexpected error {other:?}"),
        }
        let e = parse("sqrt(-x1)", 1);
        match e.eval(&[2.0]).unwrap_err() {
            Error::SqrtOfNegative { position } => assert_eq!(position, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn dual_sine_at_zero() {
        let d = parse("sin(x1)", 1).eval_dual(&[0.0]).unwrap();
        assert_eq!(d.value, 0.0);
        assert_eq!(d.partials, vec![1.0]);
    }

    #[test]
    fn dual_polynomial_partials() {
        let d = parse("x1^2 * x2", 2).eval_dual(&[3.0, 5.0]).unwrap();
        assert_eq!(d.value, 45.0);
        assert_eq!(d.partials, vec![30.0, 9.0]);
    }

    #[test]
    fn dual_matches_central_differences_on_smooth_samples() {
        let cases: [(&str, usize); 6] = [
            ("sin(x1)*cos(x2) + exp(x1/3)", 2),
            ("sqrt(1 + x1^2 + x2^2)", 2),
            ("x1^3 - 2*x1*x2 + x2^-2", 2),
            ("cos(x1)/(2 + sin(x1))", 1),
            ("exp(-x1^2)*sin(pi*x1)", 1),
            ("(x1 + x2)*(x1 - x2)/(1 + x1^2)", 2),
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for (text, dims) in cases {
            let e = parse(text, dims);
            for _ in 0..200 {
                let x: Vec<f64> = (0..dims).map(|_| rng.gen_range(0.5..1.5)).collect();
                let dual = e.eval_dual(&x).unwrap();
                for j in 0..dims {
                    let fd = central_difference(&e, &x, j, 1e-5).unwrap();
                    let rel = (dual.partials[j] - fd).abs() / (1.0 + dual.partials[j].abs());
                    assert!(rel <= 1e-6, "{text}: partial {j} at {x:?}: ad={} fd={fd}", dual.partials[j]);
                }
            }
        }
    }

    fn arb_expression(dims: usize) -> impl Strategy<Value = Expression> {
        let leaf = prop_oneof![
            (0..100u32).prop_map(|v| Expression::Literal(f64::from(v) / 8.0)),
            Just(Expression::Pi),
            (0..dims).prop_map(Expression::Var),
        ];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expression::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expression::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expression::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone())
                    .prop_map(|(a, b)| Expression::Div(Box::new(a), Box::new(b), 0)),
                (inner.clone(), -3..5i32)
                    .prop_map(|(a, k)| Expression::PowInt(Box::new(a), k, 0)),
                inner.clone().prop_map(|a| Expression::Neg(Box::new(a))),
                inner.clone().prop_map(|a| Expression::Sin(Box::new(a))),
                inner.clone().prop_map(|a| Expression::Cos(Box::new(a))),
                inner.clone().prop_map(|a| Expression::Exp(Box::new(a))),
                inner.prop_map(|a| Expression::Sqrt(Box::new(a), 0)),
            ]
        })
    }

    proptest! {
        // Round trip through the canonical printer preserves structure.
        #[test]
        fn print_parse_round_trip(e in arb_expression(3)) {
            let printed = e.to_string();
            let reparsed = Expression::parse(&printed, 3).unwrap();
            prop_assert_eq!(&reparsed, &e, "printed as {}", printed);
            let reprinted = reparsed.to_string();
            prop_assert_eq!(printed, reprinted);
        }
    }

    #[test]
    fn round_trip_examples() {
        for text in [
            "cos(x1)/4",
            "-x1^2 + 3*(x2 - 1)",
            "sqrt(1 + x1^2)/(2 - cos(x2))",
            "1.25e-3*x1 - 0.5",
            "-(x1 + x2)^3",
        ] {
            let e = parse(text, 2);
            let reparsed = parse(&e.to_string(), 2);
            assert_eq!(e, reparsed, "through {}", e);
        }
    }
}
