//! Boolean expression language over observation variables.
//!
//! Expressions are comparisons between variables and literals combined with
//! `&`, `|` and `!`. The same grammar serves three roles:
//!
//! * predicate bodies, evaluated against a [`ConcreteState`](crate::ConcreteState);
//! * state and transition validity rules, evaluated over predicate bits
//!   (a trailing `'` refers to the successor state's bit);
//! * expression labels for PCTL atoms.
//!
//! Function-style atoms are sugar for dotted variable names, so
//! `is_toggled(microwave)` reads the variable `is_toggled.microwave`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A scalar observation value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
}

impl Value {
    pub fn kind(&self) -> VarKind {
        match self {
            Value::Bool(_) => VarKind::Bool,
            Value::Int(_) => VarKind::Int,
            Value::Real(_) => VarKind::Real,
            Value::Str(_) => VarKind::Str,
        }
    }

    fn as_number(&self) -> Option<f64> {
        match *self {
            Value::Int(i) => Some(i as f64),
            Value::Real(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => {
                if r.fract() == 0.0 && r.is_finite() {
                    write!(f, "{r:.1}")
                } else {
                    write!(f, "{r}")
                }
            }
            Value::Str(s) => write!(f, "{s:?}"),
        }
    }
}

/// Declared kind of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarKind {
    Bool,
    Int,
    Real,
    #[serde(rename = "string")]
    Str,
}

impl VarKind {
    /// Whether a value of kind `other` may be stored in a variable of this kind.
    pub fn accepts(self, other: VarKind) -> bool {
        self == other || (self == VarKind::Real && other == VarKind::Int)
    }
}

impl fmt::Display for VarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarKind::Bool => "bool",
            VarKind::Int => "int",
            VarKind::Real => "real",
            VarKind::Str => "string",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Value),
    /// `key` is the canonical dotted name; `text` keeps the spelling used in
    /// the source so atoms can be printed back the way they were written.
    Var {
        key: String,
        text: String,
        primed: bool,
    },
    Cmp {
        op: CmpOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("malformed expression at byte {offset}: {message}")]
    Malformed { offset: usize, message: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ExprError> {
        let tokens = lex(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            len: text.len(),
        };
        let expr = parser.or()?;
        if let Some(tok) = parser.tokens.get(parser.pos) {
            return Err(ExprError::Malformed {
                offset: tok.offset,
                message: format!("unexpected {}", tok.kind.describe()),
            });
        }
        Ok(expr)
    }

    pub fn var(key: &str) -> Expr {
        Expr::Var {
            key: key.to_string(),
            text: key.to_string(),
            primed: false,
        }
    }

    /// Evaluates the expression, resolving variables through `lookup`.
    ///
    /// Both operands of every connective are evaluated, so a missing variable
    /// is reported even where short-circuiting would have skipped it.
    pub fn eval<F>(&self, lookup: &F) -> Result<Value, ExprError>
    where
        F: Fn(&str, bool) -> Result<Value, ExprError>,
    {
        match self {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Var { key, primed, .. } => lookup(key, *primed),
            Expr::Cmp { op, lhs, rhs } => {
                let l = lhs.eval(lookup)?;
                let r = rhs.eval(lookup)?;
                compare(*op, &l, &r).map(Value::Bool)
            }
            Expr::Not(e) => Ok(Value::Bool(!expect_bool(&e.eval(lookup)?, "!")?)),
            Expr::And(a, b) => {
                let l = expect_bool(&a.eval(lookup)?, "&")?;
                let r = expect_bool(&b.eval(lookup)?, "&")?;
                Ok(Value::Bool(l && r))
            }
            Expr::Or(a, b) => {
                let l = expect_bool(&a.eval(lookup)?, "|")?;
                let r = expect_bool(&b.eval(lookup)?, "|")?;
                Ok(Value::Bool(l || r))
            }
        }
    }

    pub fn eval_bool<F>(&self, lookup: &F) -> Result<bool, ExprError>
    where
        F: Fn(&str, bool) -> Result<Value, ExprError>,
    {
        expect_bool(&self.eval(lookup)?, "expression")
    }

    /// Every variable referenced, with its primed flag, in source order.
    pub fn variables(&self) -> Vec<(&str, bool)> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<(&'a str, bool)>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var { key, primed, .. } => out.push((key, *primed)),
            Expr::Cmp { lhs, rhs, .. } | Expr::And(lhs, rhs) | Expr::Or(lhs, rhs) => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            Expr::Not(e) => e.collect_vars(out),
        }
    }

    /// Atomic conditions (comparisons and bare boolean variables), left to
    /// right, deduplicated by canonical form.
    pub fn atoms(&self) -> Vec<Expr> {
        let mut out: Vec<Expr> = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut Vec<Expr>) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var { .. } | Expr::Cmp { .. } => {
                let canon = self.canonical();
                if !out.iter().any(|a| a.canonical() == canon) {
                    out.push(self.clone());
                }
            }
            Expr::Not(e) => e.collect_atoms(out),
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Text form using canonical variable keys; equal for expressions that
    /// differ only in function-style vs dotted spelling.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        self.write(&mut s, 0, true);
        s
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::And(..) => 2,
            Expr::Not(_) => 3,
            Expr::Cmp { .. } => 4,
            Expr::Lit(_) | Expr::Var { .. } => 5,
        }
    }

    fn write(&self, out: &mut String, parent: u8, canonical: bool) {
        let prec = self.precedence();
        let paren = prec < parent;
        if paren {
            out.push('(');
        }
        match self {
            Expr::Lit(v) => out.push_str(&v.to_string()),
            Expr::Var { key, text, primed } => {
                out.push_str(if canonical { key } else { text });
                if *primed {
                    out.push('\'');
                }
            }
            Expr::Cmp { op, lhs, rhs } => {
                lhs.write(out, 5, canonical);
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                rhs.write(out, 5, canonical);
            }
            Expr::Not(e) => {
                out.push('!');
                e.write(out, 3, canonical);
            }
            Expr::And(a, b) => {
                a.write(out, 2, canonical);
                out.push_str(" & ");
                b.write(out, 3, canonical);
            }
            Expr::Or(a, b) => {
                a.write(out, 1, canonical);
                out.push_str(" | ");
                b.write(out, 2, canonical);
            }
        }
        if paren {
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s, 0, false);
        f.write_str(&s)
    }
}

/// Canonical key of an atom name: `f(a,b)` becomes `f.a.b`, a plain name is
/// returned unchanged. Returns `None` if `name` is not a single atom.
pub fn atom_key(name: &str) -> Option<String> {
    match Expr::parse(name).ok()? {
        Expr::Var {
            key, primed: false, ..
        } => Some(key),
        _ => None,
    }
}

fn expect_bool(v: &Value, ctx: &str) -> Result<bool, ExprError> {
    match v {
        Value::Bool(b) => Ok(*b),
        other => Err(ExprError::TypeMismatch(format!(
            "`{ctx}` expects bool, found {}",
            other.kind()
        ))),
    }
}

fn compare(op: CmpOp, l: &Value, r: &Value) -> Result<bool, ExprError> {
    use std::cmp::Ordering;
    let ord: Option<Ordering> = match (l, r) {
        (Value::Bool(a), Value::Bool(b)) => match op {
            CmpOp::Eq => return Ok(a == b),
            CmpOp::Ne => return Ok(a != b),
            _ => None,
        },
        (Value::Str(a), Value::Str(b)) => match op {
            CmpOp::Eq => return Ok(a == b),
            CmpOp::Ne => return Ok(a != b),
            _ => None,
        },
        _ => match (l.as_number(), r.as_number()) {
            (Some(a), Some(b)) => {
                return Ok(match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                })
            }
            _ => None,
        },
    };
    debug_assert!(ord.is_none());
    Err(ExprError::TypeMismatch(format!(
        "cannot apply `{}` to {} and {}",
        op.symbol(),
        l.kind(),
        r.kind()
    )))
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Ident(String),
    Num(Value),
    Str(String),
    Cmp(CmpOp),
    And,
    Or,
    Not,
    LParen,
    RParen,
    Comma,
    Prime,
}

impl TokKind {
    fn describe(&self) -> String {
        match self {
            TokKind::Ident(s) => format!("identifier `{s}`"),
            TokKind::Num(v) => format!("number `{v}`"),
            TokKind::Str(s) => format!("string {s:?}"),
            TokKind::Cmp(op) => format!("`{}`", op.symbol()),
            TokKind::And => "`&`".into(),
            TokKind::Or => "`|`".into(),
            TokKind::Not => "`!`".into(),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
            TokKind::Comma => "`,`".into(),
            TokKind::Prime => "`'`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let malformed = |offset: usize, message: String| ExprError::Malformed { offset, message };
    while i < text.len() {
        let c = text[i..].chars().next().unwrap();
        let start = i;
        let two = text.get(i..i + 2).unwrap_or("");
        let kind = match c {
            c if c.is_whitespace() => {
                i += c.len_utf8();
                continue;
            }
            '(' => TokKind::LParen,
            ')' => TokKind::RParen,
            ',' => TokKind::Comma,
            '\'' => TokKind::Prime,
            '∧' => TokKind::And,
            '∨' => TokKind::Or,
            '¬' => TokKind::Not,
            '&' => {
                if two == "&&" {
                    i += 1;
                }
                TokKind::And
            }
            '|' => {
                if two == "||" {
                    i += 1;
                }
                TokKind::Or
            }
            '=' if two == "==" => {
                i += 1;
                TokKind::Cmp(CmpOp::Eq)
            }
            '!' if two == "!=" => {
                i += 1;
                TokKind::Cmp(CmpOp::Ne)
            }
            '!' => TokKind::Not,
            '<' | '>' => {
                let eq = two.ends_with('=');
                if eq {
                    i += 1;
                }
                TokKind::Cmp(match (c, eq) {
                    ('<', false) => CmpOp::Lt,
                    ('<', true) => CmpOp::Le,
                    ('>', false) => CmpOp::Gt,
                    _ => CmpOp::Ge,
                })
            }
            '"' => {
                let mut j = i + 1;
                let mut s = String::new();
                loop {
                    match text[j..].chars().next() {
                        None => return Err(malformed(start, "unterminated string".into())),
                        Some('"') => break,
                        Some('\\') => {
                            let esc = text[j + 1..]
                                .chars()
                                .next()
                                .ok_or_else(|| malformed(j, "dangling escape".into()))?;
                            s.push(esc);
                            j += 1 + esc.len_utf8();
                        }
                        Some(ch) => {
                            s.push(ch);
                            j += ch.len_utf8();
                        }
                    }
                }
                i = j;
                TokKind::Str(s)
            }
            c if c.is_ascii_digit()
                || (c == '-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit))
                || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) =>
            {
                let mut j = i + 1;
                while j < bytes.len()
                    && (bytes[j].is_ascii_digit()
                        || bytes[j] == b'.'
                        || bytes[j] == b'e'
                        || bytes[j] == b'E'
                        || ((bytes[j] == b'-' || bytes[j] == b'+')
                            && matches!(bytes[j - 1], b'e' | b'E')))
                {
                    j += 1;
                }
                let lit = &text[i..j];
                let value = if lit.contains(['.', 'e', 'E']) {
                    Value::Real(
                        lit.parse()
                            .map_err(|_| malformed(start, format!("bad number `{lit}`")))?,
                    )
                } else {
                    Value::Int(
                        lit.parse()
                            .map_err(|_| malformed(start, format!("bad number `{lit}`")))?,
                    )
                };
                i = j - 1;
                TokKind::Num(value)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i + 1;
                while j < bytes.len()
                    && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b'.')
                {
                    j += 1;
                }
                let word = &text[i..j];
                i = j - 1;
                match word {
                    "and" => TokKind::And,
                    "or" => TokKind::Or,
                    "not" => TokKind::Not,
                    _ => TokKind::Ident(word.to_string()),
                }
            }
            other => return Err(malformed(start, format!("unexpected character `{other}`"))),
        };
        i += text[i..].chars().next().map_or(1, char::len_utf8);
        out.push(Token {
            kind,
            offset: start,
        });
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&TokKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |t| t.offset)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Malformed {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn eat(&mut self, kind: &TokKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn or(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.and()?;
        while self.eat(&TokKind::Or) {
            let rhs = self.and()?;
            lhs = Expr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while self.eat(&TokKind::And) {
            let rhs = self.unary()?;
            lhs = Expr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat(&TokKind::Not) {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        let lhs = self.primary()?;
        if let Some(TokKind::Cmp(op)) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.primary()?;
            return Ok(Expr::Cmp {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            });
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let Some(kind) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        self.pos += 1;
        match kind {
            TokKind::LParen => {
                let inner = self.or()?;
                if !self.eat(&TokKind::RParen) {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            TokKind::Num(v) => Ok(Expr::Lit(v)),
            TokKind::Str(s) => Ok(Expr::Lit(Value::Str(s))),
            TokKind::Ident(name) if name == "true" => Ok(Expr::Lit(Value::Bool(true))),
            TokKind::Ident(name) if name == "false" => Ok(Expr::Lit(Value::Bool(false))),
            TokKind::Ident(name) => {
                let (key, text) = if self.eat(&TokKind::LParen) {
                    let mut args = Vec::new();
                    loop {
                        match self.peek().cloned() {
                            Some(TokKind::Ident(arg)) => {
                                self.pos += 1;
                                args.push(arg);
                            }
                            _ => return self.err("expected argument name"),
                        }
                        if self.eat(&TokKind::RParen) {
                            break;
                        }
                        if !self.eat(&TokKind::Comma) {
                            return self.err("expected `,` or `)`");
                        }
                    }
                    (
                        format!("{name}.{}", args.join(".")),
                        format!("{name}({})", args.join(",")),
                    )
                } else {
                    (name.clone(), name)
                };
                let primed = self.eat(&TokKind::Prime);
                Ok(Expr::Var { key, text, primed })
            }
            other => {
                self.pos -= 1;
                self.err(format!("unexpected {}", other.describe()))
            }
        }
    }
}
