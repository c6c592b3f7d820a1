//! A small recursive-descent parser for user-supplied functions of `x`.

use std::fmt;

use crate::error::{Error, Result};
use crate::estimation::IntegrableFunction;

pub const GRAMMAR: &str = "\
expr   := term (('+' | '-') term)*
term   := unary (('*' | '/') unary)*
unary  := ('-' | '+') unary | power
power  := atom (('^' | '**') unary)?
atom   := NUMBER | 'x' | 'pi' | ('sin' | 'cos' | 'exp') '(' expr ')' | '(' expr ')'";

const MAX_DEPTH: usize = 256;
const MAX_LEN: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    X,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Sin(a) => a.eval(x).sin(),
            Expr::Cos(a) => a.eval(x).cos(),
            Expr::Exp(a) => a.eval(x).exp(),
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::X => true,
            Expr::Neg(a) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.depends_on_x(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.depends_on_x() || b.depends_on_x()
            }
        }
    }
}

impl Expr {
    /// Binding strength as the parser sees it: sums 1, products 2, negation 3,
    /// powers 4, atoms 5.
    fn level(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(v) if v.is_sign_negative() => 3,
            _ => 5,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.level() < min {
            f.write_str("(")?;
            self.fmt_at(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                a.fmt_at(f, 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.fmt_at(f, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                b.fmt_at(f, 2)
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.fmt_at(f, 2)?;
                f.write_str(if matches!(self, Expr::Mul(..)) { " * " } else { " / " })?;
                b.fmt_at(f, 3)
            }
            Expr::Pow(a, b) => {
                a.fmt_at(f, 5)?;
                f.write_str(" ^ ")?;
                b.fmt_at(f, 3)
            }
            Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => {
                let name = match self {
                    Expr::Sin(_) => "sin",
                    Expr::Cos(_) => "cos",
                    _ => "exp",
                };
                write!(f, "{name}(")?;
                a.fmt_at(f, 0)?;
                f.write_str(")")
            }
        }
    }
}

/// Prints with the fewest parentheses that reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, 0)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.pos,
            message: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok.as_bytes()) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.err(format!("expression nested deeper than {MAX_DEPTH} levels"));
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            if self.eat("+") {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat("-") {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.peek() == Some(b'*') && self.src.get(self.pos + 1) != Some(&b'*') {
                self.pos += 1;
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat("/") {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        self.enter()?;
        let out = if self.eat("-") {
            Expr::Neg(Box::new(self.unary()?))
        } else if self.eat("+") {
            self.unary()?
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(out)
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat("^") || self.eat("**") {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => self.err("unexpected end of input"),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(")") {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                match name {
                    "x" => Ok(Expr::X),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "sin" | "cos" | "exp" => {
                        if !self.eat("(") {
                            return self.err(format!("expected '(' after {name}"));
                        }
                        let arg = Box::new(self.expr()?);
                        if !self.eat(")") {
                            return self.err("expected ')'");
                        }
                        Ok(match name {
                            "sin" => Expr::Sin(arg),
                            "cos" => Expr::Cos(arg),
                            _ => Expr::Exp(arg),
                        })
                    }
                    _ => {
                        self.pos = start;
                        self.err(format!("unknown identifier '{name}'"))
                    }
                }
            }
            Some(c) => self.err(format!("unexpected character '{}'", c as char)),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return self.err("malformed number");
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            Ok(_) => {
                self.pos = start;
                self.err(format!("number '{text}' out of range"))
            }
            Err(_) => {
                self.pos = start;
                self.err(format!("malformed number '{text}'"))
            }
        }
    }
}

/// Parses an expression in `x`; errors carry the byte offset.
pub fn parse_expr(src: &str) -> Result<Expr> {
    if src.len() > MAX_LEN {
        return Err(Error::Parse {
            position: MAX_LEN,
            message: format!("expression longer than {MAX_LEN} bytes"),
        });
    }
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(e)
}

/// Parses `src` into a function of interest; constant expressions carry their mean.
pub fn parse_function(src: &str) -> Result<IntegrableFunction> {
    let e = parse_expr(src)?;
    let f = if e.depends_on_x() {
        let e2 = e.clone();
        IntegrableFunction::new(src.trim(), move |x| e2.eval(x))
    } else {
        let v = e.eval(0.0);
        IntegrableFunction::new(src.trim(), move |_| v).with_known_mean(v)
    };
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64) -> f64 {
        parse_expr(s).unwrap().eval(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2 * 3", 0.0), 7.0);
        assert_eq!(ev("(1 + 2) * 3", 0.0), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2", 0.0), 512.0);
        assert_eq!(ev("2 ** 3", 0.0), 8.0);
        assert_eq!(ev("-x^2", 3.0), -9.0);
        assert_eq!(ev("2^-1", 0.0), 0.5);
        assert_eq!(ev("8 / 4 / 2", 0.0), 1.0);
        assert_eq!(ev("1 - 2 - 3", 0.0), -4.0);
    }

    #[test]
    fn functions_and_constants() {
        assert!((ev("sin(pi/2)", 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(ev("cos(0) + exp(0)", 0.0), 2.0);
        assert_eq!(ev("1.5e2 + .5", 0.0), 150.5);
        let h = "100*sin(3*x^2/(2*x^2+1))*exp(-sin(4*pi*x)^2)";
        let x = 0.37;
        assert!((ev(h, x) - crate::estimation::test_function_h(x)).abs() < 1e-12);
    }

    #[test]
    fn errors_report_position() {
        for (src, pos) in [("1 +", 3), ("foo(x)", 0), ("(1", 2), ("1 2", 2), ("sin x", 4), ("#", 0), ("x + 1e999", 4)] {
            match parse_expr(src) {
                Err(Error::Parse { position, .. }) => assert_eq!(position, pos, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn depth_is_bounded() {
        let deep = "(".repeat(10_000) + "1" + &")".repeat(10_000);
        assert!(matches!(parse_expr(&deep), Err(Error::Parse { .. })));
        let neg = "-".repeat(10_000) + "1";
        assert!(parse_expr(&neg).is_err());
        let ok = "(".repeat(100) + "1" + &")".repeat(100);
        assert_eq!(parse_expr(&ok).unwrap().eval(0.0), 1.0);
    }

    #[test]
    fn constant_functions_know_their_mean() {
        let f = parse_function("3.0").unwrap();
        assert_eq!(f.known_mean(), Some(3.0));
        assert_eq!(parse_function("x").unwrap().known_mean(), None);
    }

    #[test]
    fn display_reparses_to_same_tree() {
        let e = parse_expr("-(x+1)^2*sin(2*pi*x)/exp(x-0.25)").unwrap();
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn display_is_minimal() {
        for src in ["x - (x - 1.0)", "-x ^ 2.0", "(-x) ^ 2.0", "x / (x * x)", "2.0 ^ 3.0 ^ x", "-(x + 1.0)"] {
            assert_eq!(parse_expr(src).unwrap().to_string(), src);
        }
        assert_eq!(parse_expr("((x))+(1)").unwrap().to_string(), "x + 1.0");
        assert!(matches!(parse_expr("1e999"), Err(Error::Parse { position: 0, .. })));
        let deep = "-".repeat(200) + "x";
        assert_eq!(parse_expr(&deep).unwrap().to_string(), deep);
    }
}
