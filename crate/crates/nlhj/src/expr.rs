//! Arithmetic expressions in `x`, `y`, `t` for coefficient fields.
//!
//! Grammar:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Names are `x`, `y`, `t` and `pi`. Functions are `abs`, `min`, `max`,
//! `sin`, `cos`, `exp`, `sqrt` and `sign`; `min` and `max` take two or more
//! arguments. `^` binds tighter than unary minus and associates to the right,
//! so `-x^2` is `-(x^2)` and `2^3^2` is `2^9`.

use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("column {column}: {message}")]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Abs,
    Min,
    Max,
    Sin,
    Cos,
    Exp,
    Sqrt,
    Sign,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "sign" => Func::Sign,
            _ => return None,
        })
    }

    fn arity_ok(self, n: usize) -> bool {
        match self {
            Func::Min | Func::Max => n >= 2,
            _ => n == 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

impl Node {
    fn eval(&self, v: &[f64; 3]) -> f64 {
        match self {
            Node::Num(c) => *c,
            Node::Var(i) => v[*i],
            Node::Neg(a) => -a.eval(v),
            Node::Add(a, b) => a.eval(v) + b.eval(v),
            Node::Sub(a, b) => a.eval(v) - b.eval(v),
            Node::Mul(a, b) => a.eval(v) * b.eval(v),
            Node::Div(a, b) => a.eval(v) / b.eval(v),
            Node::Pow(a, b) => a.eval(v).powf(b.eval(v)),
            Node::Call(f, args) => {
                let a0 = args[0].eval(v);
                match f {
                    Func::Abs => a0.abs(),
                    Func::Sin => a0.sin(),
                    Func::Cos => a0.cos(),
                    Func::Exp => a0.exp(),
                    Func::Sqrt => a0.sqrt(),
                    Func::Sign => {
                        if a0 > 0.0 {
                            1.0
                        } else if a0 < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    Func::Min => args[1..].iter().fold(a0, |m, a| m.min(a.eval(v))),
                    Func::Max => args[1..].iter().fold(a0, |m, a| m.max(a.eval(v))),
                }
            }
        }
    }

    fn uses(&self, var: usize) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) => a.uses(var),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.uses(var) || b.uses(var)
            }
            Node::Call(_, args) => args.iter().any(|a| a.uses(var)),
        }
    }
}

/// A parsed expression. Cheap to evaluate, `Send + Sync`.
#[derive(Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error(format!("unexpected '{}'", p.src[p.pos] as char)));
        }
        Ok(Expr { source: src.trim().to_string(), root })
    }

    pub fn constant(c: f64) -> Expr {
        Expr { source: format!("{c:?}"), root: Node::Num(c) }
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        self.root.eval(&[x, y, t])
    }

    pub fn depends_on_t(&self) -> bool {
        self.root.uses(2)
    }

    pub fn depends_on_space(&self) -> bool {
        self.root.uses(0) || self.root.uses(1)
    }

    /// The value if the expression mentions no variable.
    pub fn as_constant(&self) -> Option<f64> {
        (!self.depends_on_t() && !self.depends_on_space()).then(|| self.eval(0.0, 0.0, 0.0))
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ExprError {
        ExprError { column: self.pos + 1, message: message.into() }
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Node::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            None => Err(self.error("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(c) => Err(self.error(format!("unexpected '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let s = self.src;
        while self.pos < s.len() && (s[self.pos].is_ascii_digit() || s[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut q = self.pos + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                while q < s.len() && s[q].is_ascii_digit() {
                    q += 1;
                }
                self.pos = q;
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).expect("ascii slice");
        text.parse::<f64>().map(Node::Num).map_err(|_| ExprError {
            column: start + 1,
            message: format!("malformed number '{text}'"),
        })
    }

    fn name(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        let at = |message: String| ExprError { column: start + 1, message };
        if self.peek() == Some(b'(') {
            let f = Func::lookup(name).ok_or_else(|| at(format!("unknown function '{name}'")))?;
            self.pos += 1;
            let mut args = vec![self.expr()?];
            while self.eat(b',') {
                args.push(self.expr()?);
            }
            if !self.eat(b')') {
                return Err(self.error("expected ')' or ','"));
            }
            if !f.arity_ok(args.len()) {
                return Err(at(format!("'{name}' does not take {} argument(s)", args.len())));
            }
            return Ok(Node::Call(f, args));
        }
        match name {
            "x" => Ok(Node::Var(0)),
            "y" => Ok(Node::Var(1)),
            "t" => Ok(Node::Var(2)),
            "pi" => Ok(Node::Num(std::f64::consts::PI)),
            _ if Func::lookup(name).is_some() => Err(at(format!("function '{name}' needs arguments"))),
            _ => Err(at(format!("unknown name '{name}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: f64, y: f64, t: f64) -> f64 {
        Expr::parse(s).unwrap().eval(x, y, t)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2 * 3", 0.0, 0.0, 0.0), 7.0);
        assert_eq!(ev("-x^2", 3.0, 0.0, 0.0), -9.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0, 0.0), 512.0);
        assert_eq!(ev("2^-1", 0.0, 0.0, 0.0), 0.5);
        assert_eq!(ev("(1 - x) / 4", 3.0, 0.0, 0.0), -0.5);
        assert_eq!(ev("8 / 2 / 2", 0.0, 0.0, 0.0), 2.0);
        assert_eq!(ev("1 - 2 - 3", 0.0, 0.0, 0.0), -4.0);
    }

    #[test]
    fn functions_and_variables() {
        assert_eq!(ev("max(0, 1 - x^2)", 2.0, 0.0, 0.0), 0.0);
        assert_eq!(ev("min(x, y, t)", 3.0, -1.0, 2.0), -1.0);
        assert_eq!(ev("abs(x) + sign(y)", -2.0, -0.5, 0.0), 1.0);
        assert!((ev("exp(-2*t) * cos(pi)", 0.0, 0.0, 0.5) + (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(ev("1.5e-1 + 2E1", 0.0, 0.0, 0.0), 20.15);
    }

    #[test]
    fn dependencies() {
        let e = Expr::parse("exp(-t)").unwrap();
        assert!(e.depends_on_t() && !e.depends_on_space());
        assert_eq!(Expr::parse("2 * pi").unwrap().as_constant(), Some(2.0 * std::f64::consts::PI));
        assert_eq!(Expr::parse("x").unwrap().as_constant(), None);
    }

    #[test]
    fn errors_carry_columns() {
        let e = Expr::parse("1 + foo(x)").unwrap_err();
        assert_eq!(e.column, 5);
        assert!(e.message.contains("foo"));
        assert_eq!(Expr::parse("(1 + x").unwrap_err().message, "expected ')'");
        assert!(Expr::parse("sin(x, y)").is_err());
        assert!(Expr::parse("max(x)").is_err());
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("x y").is_err());
        assert!(Expr::parse("z").is_err());
        assert!(Expr::parse("1..2").is_err());
    }

    #[test]
    fn is_send_sync() {
        fn need<T: Send + Sync>(_: &T) {}
        need(&Expr::parse("x").unwrap());
    }
}
