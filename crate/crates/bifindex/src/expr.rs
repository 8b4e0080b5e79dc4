//! Scalar coefficient expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | number 'i' | 'i' | 'pi' | var '[' int ']' | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are `lambda`, `x`, `xi`, indexed from 1. `^` binds tighter than
//! unary minus and associates to the right.

use std::fmt;

use bifindex_core::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Lambda,
    X,
    Xi,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::Lambda => "lambda",
            Var::X => "x",
            Var::Xi => "xi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(C64),
    /// Zero-based index.
    Var(Var, usize),
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    node: Node,
    source: String,
}

/// Syntax error at a 1-based character column of the expression.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

/// Values of the variables; slices are zero-based.
#[derive(Debug, Clone, Copy, Default)]
pub struct Env<'a> {
    pub lambda: &'a [f64],
    pub x: &'a [f64],
    pub xi: &'a [f64],
}

impl Env<'_> {
    fn get(&self, var: Var) -> &[f64] {
        match var {
            Var::Lambda => self.lambda,
            Var::X => self.x,
            Var::Xi => self.xi,
        }
    }
}

impl fmt::Display for Env<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lambda={:?}, x={:?}, xi={:?}", self.lambda, self.x, self.xi)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Ident(String),
    Sym(char),
}

struct Lexer {
    chars: Vec<(usize, char)>,
    pos: usize,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut lx = Lexer { chars: src.chars().enumerate().collect(), pos: 0 };
    let mut out = Vec::new();
    while lx.pos < lx.chars.len() {
        let (col, c) = lx.chars[lx.pos];
        let column = col + 1;
        if c.is_whitespace() {
            lx.pos += 1;
        } else if c.is_ascii_digit() || (c == '.' && lx.peek_digit(1)) {
            let text = lx.number();
            let v: f64 = text.parse().map_err(|_| ParseError { column, message: format!("bad number {text:?}") })?;
            // `2i` is imaginary; `2in` is not a thing.
            if lx.current() == Some('i') && !lx.ident_char_at(1) {
                lx.pos += 1;
                out.push((column, Tok::Imag(v)));
            } else {
                out.push((column, Tok::Num(v)));
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = lx.pos;
            while lx.ident_char_at(0) {
                lx.pos += 1;
            }
            let name: String = lx.chars[start..lx.pos].iter().map(|(_, c)| *c).collect();
            out.push((column, Tok::Ident(name)));
        } else if "+-*/^()[]".contains(c) {
            lx.pos += 1;
            out.push((column, Tok::Sym(c)));
        } else {
            return Err(ParseError { column, message: format!("unexpected character {c:?}") });
        }
    }
    Ok(out)
}

impl Lexer {
    fn current(&self) -> Option<char> {
        self.chars.get(self.pos).map(|(_, c)| *c)
    }
    fn peek_digit(&self, ahead: usize) -> bool {
        self.chars.get(self.pos + ahead).is_some_and(|(_, c)| c.is_ascii_digit())
    }
    fn ident_char_at(&self, ahead: usize) -> bool {
        self.chars.get(self.pos + ahead).is_some_and(|(_, c)| c.is_ascii_alphanumeric() || *c == '_')
    }
    fn number(&mut self) -> String {
        let start = self.pos;
        while self.current().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if matches!(self.current(), Some('e' | 'E')) {
            let signed = matches!(self.chars.get(self.pos + 1), Some((_, '+' | '-')));
            let digit_at = if signed { 2 } else { 1 };
            if self.peek_digit(digit_at) {
                self.pos += digit_at;
                while self.current().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        self.chars[start..self.pos].iter().map(|(_, c)| *c).collect()
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }
    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(c, _)| *c)
    }
    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { column: self.column(), message: message.into() })
    }
    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.error(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                Op::Add
            } else if self.eat('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                Op::Mul
            } else if self.eat('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat('-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        let base = self.primary()?;
        if self.eat('^') {
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let column = self.column();
        let Some(tok) = self.peek().cloned() else {
            return self.error("unexpected end of expression");
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Node::Num(C64::new(v, 0.0))),
            Tok::Imag(v) => Ok(Node::Num(C64::new(0.0, v))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym(c) => Err(ParseError { column, message: format!("unexpected '{c}'") }),
            Tok::Ident(name) => match name.as_str() {
                "i" => Ok(Node::Num(C64::new(0.0, 1.0))),
                "pi" => Ok(Node::Num(C64::new(core::f64::consts::PI, 0.0))),
                "lambda" | "x" | "xi" => {
                    let var = match name.as_str() {
                        "lambda" => Var::Lambda,
                        "x" => Var::X,
                        _ => Var::Xi,
                    };
                    self.expect('[')?;
                    let idx = match self.peek() {
                        Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 1.0 => *v as usize,
                        _ => return self.error(format!("{name} needs a positive integer index, e.g. {name}[1]")),
                    };
                    self.pos += 1;
                    self.expect(']')?;
                    Ok(Node::Var(var, idx - 1))
                }
                "sin" | "cos" | "exp" | "sqrt" | "abs" => {
                    let f = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "exp" => Func::Exp,
                        "sqrt" => Func::Sqrt,
                        _ => Func::Abs,
                    };
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    Ok(Node::Call(f, Box::new(arg)))
                }
                other => Err(ParseError {
                    column,
                    message: format!(
                        "unknown name {other:?}; expected lambda[..], x[..], xi[..], i, pi, sin, cos, exp, sqrt or abs"
                    ),
                }),
            },
        }
    }
}

/// Parse an expression.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: src.chars().count() + 1 };
    let node = p.expr()?;
    if p.pos != p.toks.len() {
        return p.error("unexpected trailing input");
    }
    Ok(Expr { node, source: src.to_string() })
}

fn pow(base: C64, exp: C64) -> C64 {
    if exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= 64.0 {
        let n = exp.re as i32;
        if n >= 0 {
            base.powi(n)
        } else {
            base.powi(-n).inv()
        }
    } else {
        base.powc(exp)
    }
}

impl Node {
    fn eval(&self, env: &Env<'_>) -> C64 {
        match self {
            Node::Num(v) => *v,
            Node::Var(var, i) => C64::new(env.get(*var).get(*i).copied().unwrap_or(f64::NAN), 0.0),
            // `0 - a` rather than `-a`: keeps `-4` on the upper side of the `sqrt` cut.
            Node::Neg(a) => C64::new(0.0, 0.0) - a.eval(env),
            Node::Bin(op, a, b) => {
                let (a, b) = (a.eval(env), b.eval(env));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => pow(a, b),
                }
            }
            Node::Call(f, a) => {
                let a = a.eval(env);
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Sqrt => a.sqrt(),
                    Func::Abs => C64::new(a.norm(), 0.0),
                }
            }
        }
    }

    fn max_index(&self, var: Var) -> Option<usize> {
        match self {
            Node::Num(_) => None,
            Node::Var(v, i) => (*v == var).then_some(*i + 1),
            Node::Neg(a) | Node::Call(_, a) => a.max_index(var),
            Node::Bin(_, a, b) => match (a.max_index(var), b.max_index(var)) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }
}

impl Expr {
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Evaluate; a non-finite value is reported with the variable values.
    pub fn eval(&self, env: &Env<'_>) -> Result<C64, String> {
        let v = self.node.eval(env);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(format!("expression {:?} is not finite at {env}", self.source))
        }
    }

    /// Largest 1-based index of `var`, if it occurs.
    pub fn max_index(&self, var: Var) -> Option<usize> {
        self.node.max_index(var)
    }

    pub fn uses(&self, var: Var) -> bool {
        self.max_index(var).is_some()
    }

    /// `Err` naming the variable when an index exceeds its dimension.
    pub fn check_indices(&self, dims: &[(Var, usize)]) -> Result<(), String> {
        for var in [Var::Lambda, Var::X, Var::Xi] {
            if let Some(i) = self.max_index(var) {
                let allowed = dims.iter().find(|(v, _)| *v == var).map_or(0, |(_, d)| *d);
                if allowed == 0 {
                    return Err(format!("{} is not available here", var.name()));
                }
                if i > allowed {
                    return Err(format!("{}[{i}] is out of range 1..={allowed}", var.name()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(src: &str, lambda: &[f64], x: &[f64]) -> C64 {
        parse(src).unwrap().eval(&Env { lambda, x, xi: &[] }).unwrap()
    }

    #[test]
    fn hand_evaluated_table() {
        // exp(-lambda[1]^2)*sin(x[1]) at five spot points, worked out by hand.
        let e = "exp(-lambda[1]^2)*sin(x[1])";
        let table = [
            (0.0, 0.0, 0.0),
            (0.0, core::f64::consts::FRAC_PI_2, 1.0),
            (1.0, core::f64::consts::FRAC_PI_2, 0.367_879_441_171_442_33),
            (2.0, core::f64::consts::FRAC_PI_6, 0.5 * 0.018_315_638_888_734_18),
            (-1.0, -core::f64::consts::FRAC_PI_2, -0.367_879_441_171_442_33),
        ];
        for (l, x, expected) in table {
            let v = at(e, &[l], &[x]);
            assert!((v.re - expected).abs() < 1e-15 && v.im == 0.0, "{l} {x}: {v}");
        }
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(at("-2^2", &[], &[]), C64::new(-4.0, 0.0));
        assert_eq!(at("2^3^2", &[], &[]), C64::new(512.0, 0.0));
        assert_eq!(at("1 - 2 - 3", &[], &[]), C64::new(-4.0, 0.0));
        assert_eq!(at("8 / 2 / 2", &[], &[]), C64::new(2.0, 0.0));
        assert_eq!(at("2^-1", &[], &[]), C64::new(0.5, 0.0));
        assert_eq!(at("1 + 2 * 3", &[], &[]), C64::new(7.0, 0.0));
    }

    #[test]
    fn complex_literals() {
        assert_eq!(at("2i", &[], &[]), C64::new(0.0, 2.0));
        assert_eq!(at("i*i", &[], &[]), C64::new(-1.0, 0.0));
        assert_eq!(at("1.5e1 + 2.5i", &[], &[]), C64::new(15.0, 2.5));
        assert_eq!(at("abs(3 + 4i)", &[], &[]), C64::new(5.0, 0.0));
        assert!((at("sqrt(-4)", &[], &[]) - C64::new(0.0, 2.0)).norm() < 1e-15);
        assert!((at("exp(i*pi)", &[], &[]) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn located_syntax_errors() {
        let e = parse("1 + * 2").unwrap_err();
        assert_eq!(e.column, 5);
        let e = parse("sin(x[1]").unwrap_err();
        assert_eq!(e.column, 9);
        assert!(e.message.contains("')'"));
        let e = parse("foo(1)").unwrap_err();
        assert_eq!(e.column, 1);
        assert_eq!(parse("x[0]").unwrap_err().column, 3);
        assert_eq!(parse("2 $ 3").unwrap_err().column, 3);
        assert!(parse("1 2").is_err());
    }

    #[test]
    fn index_checks_and_runtime_errors() {
        let e = parse("lambda[3] + x[1]").unwrap();
        assert_eq!(e.max_index(Var::Lambda), Some(3));
        assert!(e.check_indices(&[(Var::Lambda, 2), (Var::X, 3)]).unwrap_err().contains("lambda[3]"));
        assert!(e.check_indices(&[(Var::Lambda, 4), (Var::X, 3)]).is_ok());
        assert!(parse("xi[1]").unwrap().check_indices(&[(Var::X, 3)]).unwrap_err().contains("xi"));
        let err = parse("1/x[1]").unwrap().eval(&Env { x: &[0.0], ..Env::default() }).unwrap_err();
        assert!(err.contains("x=[0.0]"));
    }
}
