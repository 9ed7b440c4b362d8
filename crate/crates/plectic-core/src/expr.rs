//! A small smooth-function expression language over chart coordinates
//! `x0..x{d-1}`, with `+ - * /`, integer powers, `sin`, `cos` and `exp`.
//!
//! Grammar (whitespace insignificant, unary minus allowed in front of a
//! factor):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | atom ("^" integer)?
//! atom   := number | ident | "(" expr ")" | func "(" expr ")"
//! func   := "sin" | "cos" | "exp"
//! ident  := "x" digits
//! ```
//!
//! Parsed functions evaluate to second-order jets, so every downstream
//! operator gets first and second partials exact to machine precision.

use std::fmt;

use crate::jet::Jet2;

/// Byte range of a node in the source text, for error reporting.
pub type Span = (usize, usize);

/// Expression tree. Nodes built programmatically carry the span `(0, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64, Span),
    Var(usize, Span),
    Neg(Box<Expr>, Span),
    Add(Box<Expr>, Box<Expr>, Span),
    Sub(Box<Expr>, Box<Expr>, Span),
    Mul(Box<Expr>, Box<Expr>, Span),
    Div(Box<Expr>, Box<Expr>, Span),
    Pow(Box<Expr>, i32, Span),
    Sin(Box<Expr>, Span),
    Cos(Box<Expr>, Span),
    Exp(Box<Expr>, Span),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("variable index {index} out of range at byte {offset}: dimension is {dim}")]
    VarIndex { index: usize, dim: usize, offset: usize },
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero in sub-expression at bytes {0}..{1}", span.0, span.1)]
    DivisionByZero { span: Span },
    #[error("zero raised to a negative power in sub-expression at bytes {0}..{1}", span.0, span.1)]
    ZeroToNegativePower { span: Span },
}

/// A parsed expression together with the chart dimension it is valid on.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothFunction {
    ast: Expr,
    dim: usize,
}

impl SmoothFunction {
    /// Parses `source` against a chart of dimension `dim`.
    pub fn parse(source: &str, dim: usize) -> Result<SmoothFunction, ParseError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            dim,
        };
        p.skip_ws();
        let ast = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(SmoothFunction { ast, dim })
    }

    /// Wraps a programmatically built tree; checks variable indices.
    pub fn from_expr(ast: Expr, dim: usize) -> Result<SmoothFunction, ParseError> {
        check_vars(&ast, dim)?;
        Ok(SmoothFunction { ast, dim })
    }

    pub fn constant(dim: usize, v: f64) -> SmoothFunction {
        SmoothFunction {
            ast: Expr::Num(v, (0, 0)),
            dim,
        }
    }

    pub fn var(dim: usize, i: usize) -> SmoothFunction {
        assert!(i < dim);
        SmoothFunction {
            ast: Expr::Var(i, (0, 0)),
            dim,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self.ast, Expr::Num(v, _) if v == 0.0)
    }

    /// Evaluates to an order-2 jet at `x`.
    pub fn eval_jet2(&self, x: &[f64]) -> Result<Jet2, EvalError> {
        assert_eq!(
            x.len(),
            self.dim,
            "point dimension {} does not match function dimension {}",
            x.len(),
            self.dim
        );
        eval(&self.ast, self.dim, x)
    }

    /// Value-only evaluation.
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(self.eval_jet2(x)?.value())
    }
}

impl fmt::Display for SmoothFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(&self.ast, f, 0)
    }
}

fn check_vars(e: &Expr, dim: usize) -> Result<(), ParseError> {
    match e {
        Expr::Num(..) => Ok(()),
        Expr::Var(i, span) => {
            if *i < dim {
                Ok(())
            } else {
                Err(ParseError::VarIndex {
                    index: *i,
                    dim,
                    offset: span.0,
                })
            }
        }
        Expr::Neg(a, _) | Expr::Pow(a, _, _) | Expr::Sin(a, _) | Expr::Cos(a, _) | Expr::Exp(a, _) => {
            check_vars(a, dim)
        }
        Expr::Add(a, b, _) | Expr::Sub(a, b, _) | Expr::Mul(a, b, _) | Expr::Div(a, b, _) => {
            check_vars(a, dim)?;
            check_vars(b, dim)
        }
    }
}

fn eval(e: &Expr, dim: usize, x: &[f64]) -> Result<Jet2, EvalError> {
    Ok(match e {
        Expr::Num(v, _) => Jet2::constant(dim, *v),
        Expr::Var(i, _) => Jet2::variable(dim, *i, x[*i]),
        Expr::Neg(a, _) => eval(a, dim, x)?.neg(),
        Expr::Add(a, b, _) => eval(a, dim, x)?.add(&eval(b, dim, x)?),
        Expr::Sub(a, b, _) => eval(a, dim, x)?.sub(&eval(b, dim, x)?),
        Expr::Mul(a, b, _) => eval(a, dim, x)?.mul(&eval(b, dim, x)?),
        Expr::Div(a, b, span) => {
            let num = eval(a, dim, x)?;
            let den = eval(b, dim, x)?;
            num.div_checked(&den)
                .ok_or(EvalError::DivisionByZero { span: *span })?
        }
        Expr::Pow(a, n, span) => eval(a, dim, x)?
            .powi(*n)
            .ok_or(EvalError::ZeroToNegativePower { span: *span })?,
        Expr::Sin(a, _) => eval(a, dim, x)?.sin(),
        Expr::Cos(a, _) => eval(a, dim, x)?.cos(),
        Expr::Exp(a, _) => eval(a, dim, x)?.exp(),
    })
}

// Precedence levels: 0 sum, 1 product/unary minus, 2 power, 3 atom. A power
// base is printed at level 3 so nested powers and negated bases come out
// parenthesized (the grammar allows a single exponent per factor).
fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>, level: u8) -> fmt::Result {
    let prec = match e {
        Expr::Add(..) | Expr::Sub(..) => 0,
        Expr::Mul(..) | Expr::Div(..) | Expr::Neg(..) => 1,
        Expr::Pow(..) => 2,
        Expr::Num(v, _) if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) => 1,
        _ => 3,
    };
    let parens = prec < level;
    if parens {
        f.write_str("(")?;
    }
    match e {
        Expr::Num(v, _) => {
            if *v < 0.0 || (*v == 0.0 && v.is_sign_negative()) {
                // A negative literal prints as a unary minus on the positive
                // literal so the printer output re-parses.
                write!(f, "-{}", -*v)?;
            } else {
                write!(f, "{v}")?;
            }
        }
        Expr::Var(i, _) => write!(f, "x{i}")?,
        Expr::Neg(a, _) => {
            f.write_str("-")?;
            write_expr(a, f, 2)?;
        }
        Expr::Add(a, b, _) => {
            write_expr(a, f, 0)?;
            f.write_str(" + ")?;
            write_expr(b, f, 1)?;
        }
        Expr::Sub(a, b, _) => {
            write_expr(a, f, 0)?;
            f.write_str(" - ")?;
            write_expr(b, f, 1)?;
        }
        Expr::Mul(a, b, _) => {
            write_expr(a, f, 1)?;
            f.write_str("*")?;
            write_expr(b, f, 2)?;
        }
        Expr::Div(a, b, _) => {
            write_expr(a, f, 1)?;
            f.write_str("/")?;
            write_expr(b, f, 2)?;
        }
        Expr::Pow(a, n, _) => {
            write_expr(a, f, 3)?;
            write!(f, "^{n}")?;
        }
        Expr::Sin(a, _) => {
            f.write_str("sin(")?;
            write_expr(a, f, 0)?;
            f.write_str(")")?;
        }
        Expr::Cos(a, _) => {
            f.write_str("cos(")?;
            write_expr(a, f, 0)?;
            f.write_str(")")?;
        }
        Expr::Exp(a, _) => {
            f.write_str("exp(")?;
            write_expr(a, f, 0)?;
            f.write_str(")")?;
        }
    }
    if parens {
        f.write_str(")")?;
    }
    Ok(())
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs), (start, self.pos));
                }
                Some(b'-') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs), (start, self.pos));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let mut lhs = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.factor()?;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(rhs), (start, self.pos));
                }
                Some(b'/') => {
                    self.pos += 1;
                    self.skip_ws();
                    let rhs = self.factor()?;
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs), (start, self.pos));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        if self.peek() == Some(b'-') {
            self.pos += 1;
            self.skip_ws();
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner), (start, self.pos)));
        }
        let atom = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let n = self.integer()?;
            return Ok(Expr::Pow(Box::new(atom), n, (start, self.pos)));
        }
        Ok(atom)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident_text();
                match name.as_str() {
                    "sin" | "cos" | "exp" => {
                        self.skip_ws();
                        if self.peek() != Some(b'(') {
                            return Err(self.err("expected `(` after function name"));
                        }
                        self.pos += 1;
                        self.skip_ws();
                        let arg = self.expr()?;
                        self.skip_ws();
                        if self.peek() != Some(b')') {
                            return Err(self.err("expected `)`"));
                        }
                        self.pos += 1;
                        let span = (start, self.pos);
                        Ok(match name.as_str() {
                            "sin" => Expr::Sin(Box::new(arg), span),
                            "cos" => Expr::Cos(Box::new(arg), span),
                            _ => Expr::Exp(Box::new(arg), span),
                        })
                    }
                    _ => {
                        if let Some(digits) = name.strip_prefix('x') {
                            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                                let index: usize = digits.parse().map_err(|_| ParseError::Syntax {
                                    offset: start,
                                    message: "variable index too large".into(),
                                })?;
                                if index >= self.dim {
                                    return Err(ParseError::VarIndex {
                                        index,
                                        dim: self.dim,
                                        offset: start,
                                    });
                                }
                                return Ok(Expr::Var(index, (start, self.pos)));
                            }
                        }
                        Err(ParseError::UnknownIdentifier {
                            name,
                            offset: start,
                        })
                    }
                }
            }
            _ => Err(self.err("expected a number, variable, function or `(`")),
        }
    }

    fn ident_text(&mut self) -> String {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.peek().is_some_and(|c| c.is_ascii_digit()) {
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // `e` belongs to something else (not a valid exponent).
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: format!("invalid number literal `{text}`"),
        })?;
        Ok(Expr::Num(v, (start, self.pos)))
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        let start = self.pos;
        let _neg = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        if !self.peek().is_some_and(|c| c.is_ascii_digit()) {
            return Err(self.err("expected an integer exponent"));
        }
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: "exponent out of range".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jet(src: &str, dim: usize, x: &[f64]) -> Jet2 {
        SmoothFunction::parse(src, dim)
            .unwrap()
            .eval_jet2(x)
            .unwrap()
    }

    #[test]
    fn product_value() {
        assert_eq!(jet("x0*x1", 2, &[2.0, 3.0]).value(), 6.0);
    }

    #[test]
    fn sin_jet_at_zero() {
        let j = jet("sin(x0)", 1, &[0.0]);
        assert_eq!(j.value(), 0.0);
        assert_eq!(j.g(0), 1.0);
        assert_eq!(j.h(0, 0), 0.0);
    }

    #[test]
    fn quadratic_plus_linear() {
        // x0^2 + 3*x1 at (1, 2): value 7, grad (2, 3), hess [[2,0],[0,0]]
        let j = jet("x0^2 + 3*x1", 2, &[1.0, 2.0]);
        assert_eq!(j.value(), 7.0);
        assert_eq!(j.grad(), &[2.0, 3.0]);
        assert_eq!(j.hess(), &[2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn coordinate_function() {
        let j = jet("x0", 1, &[5.0]);
        assert_eq!(j.value(), 5.0);
        assert_eq!(j.grad(), &[1.0]);
        assert_eq!(j.hess(), &[0.0]);
    }

    #[test]
    fn exp_times_coordinate() {
        // exp(x0)*x1 at (0, 2): value 2, grad (2, 1), hess [[2,1],[1,0]]
        let j = jet("exp(x0)*x1", 2, &[0.0, 2.0]);
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.grad(), &[2.0, 1.0]);
        assert_eq!(j.hess(), &[2.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn division_by_zero_reports_span() {
        let f = SmoothFunction::parse("x0/x0", 1).unwrap();
        match f.eval_jet2(&[0.0]) {
            Err(EvalError::DivisionByZero { span }) => assert_eq!(span, (0, 5)),
            other => panic!("expected division-by-zero error, got {other:?}"),
        }
    }

    #[test]
    fn variable_index_out_of_range() {
        match SmoothFunction::parse("x2 + 1", 2) {
            Err(ParseError::VarIndex { index: 2, dim: 2, offset: 0 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier() {
        match SmoothFunction::parse("tan(x0)", 1) {
            Err(ParseError::UnknownIdentifier { name, .. }) => assert_eq!(name, "tan"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_offset() {
        match SmoothFunction::parse("x0 + * x1", 2) {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unary_minus_and_negative_exponent() {
        let j = jet("-x0^2", 1, &[3.0]);
        assert_eq!(j.value(), -9.0);
        let j = jet("x0^-1", 1, &[2.0]);
        assert_eq!(j.value(), 0.5);
        assert_eq!(j.g(0), -0.25);
    }

    #[test]
    fn printer_round_trips() {
        for src in [
            "x0*x1 + 3",
            "-(x0 + x1)*x2^3",
            "sin(x0)/ (1 + cos(x1)^2)",
            "exp(-x0^2) - 0.5",
            "x0 - (x1 - x2)",
            "x0 - x1 - x2",
            "2*(x0 + x1)",
            "x0^-2*x1",
        ] {
            let f = SmoothFunction::parse(src, 3).unwrap();
            let printed = f.to_string();
            let g = SmoothFunction::parse(&printed, 3).unwrap();
            assert_eq!(f.ast_shape(), g.ast_shape(), "{src} -> {printed}");
        }
    }

    impl SmoothFunction {
        /// Structural shape ignoring spans, for round-trip tests.
        fn ast_shape(&self) -> String {
            fn go(e: &Expr, out: &mut String) {
                match e {
                    Expr::Num(v, _) => out.push_str(&format!("n{v};")),
                    Expr::Var(i, _) => out.push_str(&format!("v{i};")),
                    Expr::Neg(a, _) => {
                        out.push_str("neg(");
                        go(a, out);
                        out.push(')');
                    }
                    Expr::Add(a, b, _) => {
                        out.push_str("add(");
                        go(a, out);
                        go(b, out);
                        out.push(')');
                    }
                    Expr::Sub(a, b, _) => {
                        out.push_str("sub(");
                        go(a, out);
                        go(b, out);
                        out.push(')');
                    }
                    Expr::Mul(a, b, _) => {
                        out.push_str("mul(");
                        go(a, out);
                        go(b, out);
                        out.push(')');
                    }
                    Expr::Div(a, b, _) => {
                        out.push_str("div(");
                        go(a, out);
                        go(b, out);
                        out.push(')');
                    }
                    Expr::Pow(a, n, _) => {
                        out.push_str(&format!("pow{n}("));
                        go(a, out);
                        out.push(')');
                    }
                    Expr::Sin(a, _) => {
                        out.push_str("sin(");
                        go(a, out);
                        out.push(')');
                    }
                    Expr::Cos(a, _) => {
                        out.push_str("cos(");
                        go(a, out);
                        out.push(')');
                    }
                    Expr::Exp(a, _) => {
                        out.push_str("exp(");
                        go(a, out);
                        out.push(')');
                    }
                }
            }
            let mut s = String::new();
            go(&self.ast, &mut s);
            s
        }
    }
}
