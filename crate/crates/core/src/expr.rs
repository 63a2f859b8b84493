//! Closed-form scalar expressions for sequences `a(n)` and kernels `k(s, t)`.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than a leading minus, so
//! `2^3^2 = 512` and `-2^2 = -4`. Functions: `sqrt exp log sin cos abs`
//! (one argument) and `min max pow` (two arguments).

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

const MAX_NESTING: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Abs,
    Min,
    Max,
    Pow,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Sqrt,
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Abs,
        Func::Min,
        Func::Max,
        Func::Pow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Pow => "pow",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max | Func::Pow => 2,
            _ => 1,
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(String),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprError {
    Empty,
    Syntax {
        offset: usize,
        message: &'static str,
    },
    UnknownIdentifier {
        offset: usize,
        name: String,
    },
    Arity {
        offset: usize,
        name: &'static str,
        expected: usize,
        got: usize,
    },
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprError::Empty => write!(f, "empty expression"),
            ExprError::Syntax { offset, message } => {
                write!(f, "syntax error at byte {offset}: {message}")
            }
            ExprError::UnknownIdentifier { offset, name } => {
                write!(f, "unknown identifier '{name}' at byte {offset}")
            }
            ExprError::Arity {
                offset,
                name,
                expected,
                got,
            } => write!(
                f,
                "function '{name}' at byte {offset} takes {expected} argument(s), got {got}"
            ),
        }
    }
}

impl core::error::Error for ExprError {}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    Unbound(String),
    DivisionByZero,
    /// Argument outside a function's real domain (`sqrt` of a negative,
    /// `log` of a non-positive, `pow` of a negative base with a fractional
    /// exponent).
    Domain {
        func: &'static str,
        arg: f64,
    },
    /// Overflow or another non-finite intermediate.
    NonFinite,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Unbound(v) => write!(f, "variable '{v}' is not bound"),
            EvalError::DivisionByZero => write!(f, "division by zero"),
            EvalError::Domain { func, arg } => write!(f, "{func}({arg}) is undefined"),
            EvalError::NonFinite => write!(f, "result is not finite"),
        }
    }
}

impl core::error::Error for EvalError {}

/// A parsed expression together with the variables it may reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
}

impl Expr {
    pub fn parse(source: &str, allowed_vars: &[&str]) -> Result<Expr, ExprError> {
        if source.trim().is_empty() {
            return Err(ExprError::Empty);
        }
        let tokens = lex(source)?;
        let mut p = Parser {
            tokens: &tokens,
            pos: 0,
            allowed: allowed_vars,
            depth: 0,
            end: source.len(),
        };
        let root = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(ExprError::Syntax {
                offset: tok.offset,
                message: "unexpected trailing input",
            });
        }
        Ok(Expr {
            root,
            source: source.to_string(),
        })
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, bindings: &[(&str, f64)]) -> Result<f64, EvalError> {
        eval_node(&self.root, bindings)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.fmt(f)
    }
}

/// Fully parenthesized rendering; parsing it back gives the same tree.
impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Num(v) => write!(f, "{v}"),
            Node::Var(name) => f.write_str(name),
            Node::Neg(inner) => write!(f, "(-{inner})"),
            Node::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Node::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.fmt(f)?;
                }
                f.write_str(")")
            }
        }
    }
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn eval_node(node: &Node, env: &[(&str, f64)]) -> Result<f64, EvalError> {
    match node {
        Node::Num(v) => Ok(*v),
        Node::Var(name) => env
            .iter()
            .find(|(k, _)| *k == name.as_str())
            .map(|(_, v)| *v)
            .ok_or_else(|| EvalError::Unbound(name.clone())),
        Node::Neg(inner) => Ok(-eval_node(inner, env)?),
        Node::Binary(op, l, r) => {
            let a = eval_node(l, env)?;
            let b = eval_node(r, env)?;
            match op {
                BinOp::Add => finite(a + b),
                BinOp::Sub => finite(a - b),
                BinOp::Mul => finite(a * b),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(EvalError::DivisionByZero)
                    } else {
                        finite(a / b)
                    }
                }
                BinOp::Pow => power(a, b),
            }
        }
        Node::Call(func, args) => {
            let x = eval_node(&args[0], env)?;
            match func {
                Func::Sqrt if x < 0.0 => Err(EvalError::Domain {
                    func: "sqrt",
                    arg: x,
                }),
                Func::Sqrt => Ok(libm::sqrt(x)),
                Func::Exp => finite(libm::exp(x)),
                Func::Log if x <= 0.0 => Err(EvalError::Domain {
                    func: "log",
                    arg: x,
                }),
                Func::Log => Ok(libm::log(x)),
                Func::Sin => Ok(libm::sin(x)),
                Func::Cos => Ok(libm::cos(x)),
                Func::Abs => Ok(x.abs()),
                Func::Min => Ok(x.min(eval_node(&args[1], env)?)),
                Func::Max => Ok(x.max(eval_node(&args[1], env)?)),
                Func::Pow => power(x, eval_node(&args[1], env)?),
            }
        }
    }
}

fn power(base: f64, exponent: f64) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(EvalError::DivisionByZero);
    }
    let v = libm::pow(base, exponent);
    if v.is_nan() {
        return Err(EvalError::Domain {
            func: "pow",
            arg: base,
        });
    }
    finite(v)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(u8),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                offset: start,
                message: "malformed number",
            })?;
            if !value.is_finite() {
                return Err(ExprError::Syntax {
                    offset: start,
                    message: "number out of range",
                });
            }
            out.push(Token {
                tok: Tok::Num(value),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                offset: start,
            });
        } else if b"+-*/^(),".contains(&c) {
            out.push(Token {
                tok: Tok::Sym(c),
                offset: i,
            });
            i += 1;
        } else {
            return Err(ExprError::Syntax {
                offset: i,
                message: "unexpected character",
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    allowed: &'a [&'a str],
    depth: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_sym(&mut self, sym: u8) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn expect_sym(&mut self, sym: u8, message: &'static str) -> Result<(), ExprError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(ExprError::Syntax {
                offset: self.offset(),
                message,
            })
        }
    }

    fn enter(&mut self) -> Result<(), ExprError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ExprError::Syntax {
                offset: self.offset(),
                message: "nesting too deep",
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat_sym(b'+') {
                BinOp::Add
            } else if self.eat_sym(b'-') {
                BinOp::Sub
            } else {
                break;
            };
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat_sym(b'*') {
                BinOp::Mul
            } else if self.eat_sym(b'/') {
                BinOp::Div
            } else {
                break;
            };
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat_sym(b'-') {
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.eat_sym(b'^') {
            self.enter()?;
            let exponent = self.unary()?;
            self.depth -= 1;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let Some(token) = self.peek().cloned() else {
            return Err(ExprError::Syntax {
                offset: self.end,
                message: "unexpected end of input",
            });
        };
        self.pos += 1;
        match token.tok {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Sym(b'(') => {
                let inner = self.expr()?;
                self.expect_sym(b')', "expected ')'")?;
                Ok(inner)
            }
            Tok::Sym(_) => Err(ExprError::Syntax {
                offset: token.offset,
                message: "expected a value",
            }),
            Tok::Ident(name) => {
                if self.eat_sym(b'(') {
                    let func = Func::lookup(&name).ok_or_else(|| ExprError::UnknownIdentifier {
                        offset: token.offset,
                        name: name.clone(),
                    })?;
                    let mut args = Vec::new();
                    loop {
                        args.push(self.expr()?);
                        if !self.eat_sym(b',') {
                            break;
                        }
                    }
                    self.expect_sym(b')', "expected ',' or ')'")?;
                    if args.len() != func.arity() {
                        return Err(ExprError::Arity {
                            offset: token.offset,
                            name: func.name(),
                            expected: func.arity(),
                            got: args.len(),
                        });
                    }
                    Ok(Node::Call(func, args))
                } else if self.allowed.contains(&name.as_str()) {
                    Ok(Node::Var(name))
                } else {
                    Err(ExprError::UnknownIdentifier {
                        offset: token.offset,
                        name,
                    })
                }
            }
        }
    }
}
