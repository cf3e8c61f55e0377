//! Arithmetic expressions in `x` with symbolic first and second derivatives.

use std::fmt;

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }
}

/// Expression tree over the single variable `x`. Parameters are bound to
/// constants when the text is parsed.
#[derive(Clone, Debug, PartialEq)]
pub enum Node<T> {
    Const(T),
    X,
    Neg(Box<Node<T>>),
    Add(Box<Node<T>>, Box<Node<T>>),
    Sub(Box<Node<T>>, Box<Node<T>>),
    Mul(Box<Node<T>>, Box<Node<T>>),
    Div(Box<Node<T>>, Box<Node<T>>),
    Pow(Box<Node<T>>, Box<Node<T>>),
    Call(Func, Box<Node<T>>),
    /// Sign of the argument; only produced by differentiating `abs`.
    Sign(Box<Node<T>>),
}

fn eval_err<T: Real>(x: T, message: impl Into<String>) -> Error {
    Error::Evaluation {
        x: x.as_f64(),
        message: message.into(),
    }
}

impl<T: Real> Node<T> {
    fn as_const(&self) -> Option<T> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_const(&self, value: f64) -> bool {
        self.as_const().is_some_and(|c| c == T::lit(value))
    }

    /// True if the subtree does not depend on `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Node::Const(_) => true,
            Node::X => false,
            Node::Neg(a) | Node::Call(_, a) | Node::Sign(a) => a.is_constant(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    pub fn eval(&self, x: T) -> Result<T> {
        let value = match self {
            Node::Const(c) => *c,
            Node::X => x,
            Node::Neg(a) => -a.eval(x)?,
            Node::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Node::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Node::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Node::Div(a, b) => {
                let den = b.eval(x)?;
                if den == T::zero() {
                    return Err(eval_err(x, "division by zero"));
                }
                a.eval(x)? / den
            }
            Node::Pow(a, b) => {
                let base = a.eval(x)?;
                let exp = b.eval(x)?;
                let integral = exp == exp.round();
                if base < T::zero() && !integral {
                    return Err(eval_err(x, "negative base with non-integer exponent"));
                }
                if base == T::zero() && exp < T::zero() {
                    return Err(eval_err(x, "zero raised to a negative power"));
                }
                if integral && exp.abs() <= T::lit(64.0) {
                    base.powi(exp.to_i32().unwrap_or(0))
                } else {
                    base.powf(exp)
                }
            }
            Node::Call(f, a) => {
                let u = a.eval(x)?;
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Log => {
                        if u <= T::zero() {
                            return Err(eval_err(x, "log of a non-positive number"));
                        }
                        u.ln()
                    }
                    Func::Sqrt => {
                        if u < T::zero() {
                            return Err(eval_err(x, "sqrt of a negative number"));
                        }
                        u.sqrt()
                    }
                    Func::Abs => u.abs(),
                }
            }
            Node::Sign(a) => {
                let u = a.eval(x)?;
                if u > T::zero() {
                    T::one()
                } else if u < T::zero() {
                    -T::one()
                } else {
                    T::zero()
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(eval_err(x, "non-finite value"))
        }
    }

    /// Symbolic derivative with respect to `x`.
    pub fn derivative(&self) -> Node<T> {
        match self {
            Node::Const(_) => Node::Const(T::zero()),
            Node::X => Node::Const(T::one()),
            Node::Neg(a) => neg(a.derivative()),
            Node::Add(a, b) => add(a.derivative(), b.derivative()),
            Node::Sub(a, b) => sub(a.derivative(), b.derivative()),
            Node::Mul(a, b) => add(mul(a.derivative(), (**b).clone()), mul((**a).clone(), b.derivative())),
            Node::Div(a, b) => {
                // (a'b - ab') / b^2
                let num = sub(mul(a.derivative(), (**b).clone()), mul((**a).clone(), b.derivative()));
                div(num, pow((**b).clone(), Node::Const(T::lit(2.0))))
            }
            Node::Pow(a, b) => {
                if b.is_constant() {
                    let exponent = (**b).clone();
                    let reduced = sub(exponent.clone(), Node::Const(T::one()));
                    mul(mul(exponent, pow((**a).clone(), reduced)), a.derivative())
                } else {
                    // f^g (g' ln f + g f'/f)
                    let inner = add(
                        mul(b.derivative(), call(Func::Log, (**a).clone())),
                        div(mul((**b).clone(), a.derivative()), (**a).clone()),
                    );
                    mul(self.clone(), inner)
                }
            }
            Node::Call(f, a) => {
                let u = (**a).clone();
                let du = a.derivative();
                let outer = match f {
                    Func::Sin => call(Func::Cos, u),
                    Func::Cos => neg(call(Func::Sin, u)),
                    Func::Exp => call(Func::Exp, u),
                    Func::Log => div(Node::Const(T::one()), u),
                    Func::Sqrt => div(Node::Const(T::lit(0.5)), call(Func::Sqrt, u)),
                    Func::Abs => Node::Sign(Box::new(u)),
                };
                mul(outer, du)
            }
            Node::Sign(_) => Node::Const(T::zero()),
        }
    }
}

// Constructors with constant folding, so repeated differentiation stays small.

fn neg<T: Real>(a: Node<T>) -> Node<T> {
    match a {
        Node::Const(c) => Node::Const(-c),
        Node::Neg(inner) => *inner,
        other => Node::Neg(Box::new(other)),
    }
}

fn add<T: Real>(a: Node<T>, b: Node<T>) -> Node<T> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Node::Const(x + y),
        (Some(x), None) if x == T::zero() => b,
        (None, Some(y)) if y == T::zero() => a,
        _ => Node::Add(Box::new(a), Box::new(b)),
    }
}

fn sub<T: Real>(a: Node<T>, b: Node<T>) -> Node<T> {
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Node::Const(x - y),
        (Some(x), None) if x == T::zero() => neg(b),
        (None, Some(y)) if y == T::zero() => a,
        _ => Node::Sub(Box::new(a), Box::new(b)),
    }
}

fn mul<T: Real>(a: Node<T>, b: Node<T>) -> Node<T> {
    if a.is_const(0.0) || b.is_const(0.0) {
        return Node::Const(T::zero());
    }
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) => Node::Const(x * y),
        (Some(x), None) if x == T::one() => b,
        (None, Some(y)) if y == T::one() => a,
        _ => Node::Mul(Box::new(a), Box::new(b)),
    }
}

fn div<T: Real>(a: Node<T>, b: Node<T>) -> Node<T> {
    if a.is_const(0.0) {
        return Node::Const(T::zero());
    }
    match (a.as_const(), b.as_const()) {
        (Some(x), Some(y)) if y != T::zero() => Node::Const(x / y),
        (None, Some(y)) if y == T::one() => a,
        _ => Node::Div(Box::new(a), Box::new(b)),
    }
}

fn pow<T: Real>(a: Node<T>, b: Node<T>) -> Node<T> {
    if b.is_const(0.0) {
        return Node::Const(T::one());
    }
    if b.is_const(1.0) {
        return a;
    }
    Node::Pow(Box::new(a), Box::new(b))
}

fn call<T: Real>(f: Func, a: Node<T>) -> Node<T> {
    Node::Call(f, Box::new(a))
}

impl<T: Real> fmt::Display for Node<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Const(c) => write!(f, "{c}"),
            Node::X => write!(f, "x"),
            Node::Neg(a) => write!(f, "(-{a})"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Node::Call(func, a) => write!(f, "{}({a})", func.name()),
            Node::Sign(a) => write!(f, "sign({a})"),
        }
    }
}

/// A parsed coefficient together with its first two derivative trees.
#[derive(Clone, Debug)]
pub struct Expression<T> {
    text: String,
    q: Node<T>,
    dq: Node<T>,
    d2q: Node<T>,
}

impl<T: Real> Expression<T> {
    /// Parses `text`, binding identifiers from `params`. `pi` is predefined
    /// unless shadowed by a parameter.
    pub fn parse(text: &str, params: &[(String, T)]) -> Result<Self> {
        let mut parser = Parser {
            src: text.as_bytes(),
            pos: 0,
            params,
        };
        let q = parser.expr()?;
        parser.skip_ws();
        if parser.pos < parser.src.len() {
            return Err(Error::Syntax {
                offset: parser.pos,
                message: format!("unexpected `{}`", parser.src[parser.pos] as char),
            });
        }
        let dq = q.derivative();
        let d2q = dq.derivative();
        Ok(Expression {
            text: text.to_string(),
            q,
            dq,
            d2q,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn tree(&self) -> &Node<T> {
        &self.q
    }

    pub fn q(&self, x: T) -> Result<T> {
        self.q.eval(x)
    }

    pub fn eval(&self, x: T) -> Result<(T, T, T)> {
        Ok((self.q.eval(x)?, self.dq.eval(x)?, self.d2q.eval(x)?))
    }
}

struct Parser<'a, T> {
    src: &'a [u8],
    pos: usize,
    params: &'a [(String, T)],
}

impl<T: Real> Parser<'_, T> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn expect(&mut self, byte: u8) -> Result<()> {
        match self.peek() {
            Some(b) if b == byte => {
                self.pos += 1;
                Ok(())
            }
            Some(b) => Err(self.syntax(self.pos, format!("expected `{}`, found `{}`", byte as char, b as char))),
            None => Err(self.syntax(self.pos, format!("expected `{}`, found end of input", byte as char))),
        }
    }

    fn expr(&mut self) -> Result<Node<T>> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node<T>> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Node::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    // Unary minus binds looser than '^': -x^2 is -(x^2).
    fn factor(&mut self) -> Result<Node<T>> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node<T>> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return Err(self.syntax(self.pos, "unexpected end of input")),
        };
        let c = self.src[start];
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            self.expect(b')')?;
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let mut end = start;
            while end < self.src.len() && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            let name = std::str::from_utf8(&self.src[start..end]).expect("ascii identifier");
            if self.peek() == Some(b'(') {
                let func = Func::from_name(name).ok_or_else(|| Error::UnboundIdentifier {
                    name: name.to_string(),
                    offset: start,
                })?;
                self.pos += 1;
                let arg = self.expr()?;
                self.expect(b')')?;
                return Ok(Node::Call(func, Box::new(arg)));
            }
            if name == "x" {
                return Ok(Node::X);
            }
            if let Some((_, value)) = self.params.iter().find(|(k, _)| k == name) {
                return Ok(Node::Const(*value));
            }
            if name == "pi" {
                return Ok(Node::Const(T::PI()));
            }
            return Err(Error::UnboundIdentifier {
                name: name.to_string(),
                offset: start,
            });
        }
        Err(self.syntax(start, format!("unexpected `{}`", c as char)))
    }

    fn number(&mut self) -> Result<Node<T>> {
        let start = self.pos;
        let src = self.src;
        let mut end = start;
        while end < src.len() && (src[end].is_ascii_digit() || src[end] == b'.') {
            end += 1;
        }
        if end < src.len() && (src[end] == b'e' || src[end] == b'E') {
            let mut probe = end + 1;
            if probe < src.len() && (src[probe] == b'+' || src[probe] == b'-') {
                probe += 1;
            }
            if probe < src.len() && src[probe].is_ascii_digit() {
                end = probe;
                while end < src.len() && src[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let text = std::str::from_utf8(&src[start..end]).expect("ascii number");
        let value: f64 = text
            .parse()
            .map_err(|_| self.syntax(start, format!("malformed number `{text}`")))?;
        self.pos = end;
        Ok(Node::Const(T::lit(value)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Expression<f64>> {
        Expression::parse(text, &[])
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse("-x^2").unwrap();
        assert_eq!(e.q(3.0).unwrap(), -9.0);
        let e = parse("2^3^2").unwrap();
        assert_eq!(e.q(0.0).unwrap(), 512.0);
        let e = parse("1 - 2 - 3").unwrap();
        assert_eq!(e.q(0.0).unwrap(), -4.0);
        let e = parse("8 / 4 / 2").unwrap();
        assert_eq!(e.q(0.0).unwrap(), 1.0);
        let e = parse("2 * -3 + x^-1").unwrap();
        assert_eq!(e.q(4.0).unwrap(), -5.75);
        let e = parse("1.5e1 + .5").unwrap();
        assert_eq!(e.q(0.0).unwrap(), 15.5);
    }

    #[test]
    fn syntax_errors_report_offsets() {
        assert_eq!(
            parse("x +").unwrap_err(),
            Error::Syntax {
                offset: 3,
                message: "unexpected end of input".into()
            }
        );
        assert!(matches!(parse("(x"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x)"), Err(Error::Syntax { offset: 1, .. })));
        assert!(matches!(parse("x * * 2"), Err(Error::Syntax { offset: 4, .. })));
        assert!(matches!(
            parse("foo(x)"),
            Err(Error::UnboundIdentifier { offset: 0, .. })
        ));
        assert!(matches!(
            parse("2 * y"),
            Err(Error::UnboundIdentifier { offset: 4, .. })
        ));
    }

    #[test]
    fn derivatives_of_elementary_functions() {
        let e = parse("sin(x) * exp(x)").unwrap();
        let x = 0.7_f64;
        let (q, dq, d2q) = e.eval(x).unwrap();
        assert!((q - x.sin() * x.exp()).abs() < 1e-15);
        assert!((dq - (x.cos() + x.sin()) * x.exp()).abs() < 1e-14);
        assert!((d2q - 2.0 * x.cos() * x.exp()).abs() < 1e-14);

        let e = parse("log(x) + sqrt(x)").unwrap();
        let (_, dq, d2q) = e.eval(4.0).unwrap();
        assert!((dq - (0.25 + 0.25)).abs() < 1e-15);
        assert!((d2q - (-1.0 / 16.0 - 0.25 / 8.0)).abs() < 1e-15);

        let e = parse("x^x").unwrap();
        let (q, dq, _) = e.eval(2.0).unwrap();
        assert_eq!(q, 4.0);
        assert!((dq - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-14);

        let e = parse("abs(x - 1)").unwrap();
        assert_eq!(e.eval(0.0).unwrap(), (1.0, -1.0, 0.0));
    }

    #[test]
    fn evaluation_errors_are_deferred() {
        let e = parse("x^0.5").unwrap();
        assert!(e.eval(4.0).is_ok());
        assert!(matches!(e.eval(-1.0), Err(Error::Evaluation { .. })));
        // derivative 0.5 x^-0.5 divides by zero at the origin
        let err = e.eval(0.0).unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }));
        let e = parse("1/x").unwrap();
        assert!(e.eval(0.0).is_err());
        let e = parse("(-x)^2").unwrap();
        assert_eq!(e.eval(3.0).unwrap(), (9.0, 6.0, 2.0));
    }
}
