//! Recursive-descent parser for PCTL formulas.
//!
//! ```text
//! phi  := "true" | IDENT | "!" phi | phi "&" phi | "(" phi ")"
//!       | "P" bound THETA "[" psi "]"
//! psi  := "X" phi | phi "U" ["<=" INT] phi | "F" phi | "G" phi
//! bound := "<" | "<=" | ">=" | ">"
//! ```
//!
//! `&` is left-associative and `!` binds tightest. Whitespace is
//! insignificant.

use super::ast::{Bound, PathFormula, StateFormula};
use super::PctlError;

/// Words that cannot be used as atom names.
pub const KEYWORDS: &[&str] = &["true", "P", "X", "U", "F", "G"];

pub fn parse(text: &str) -> Result<StateFormula, PctlError> {
    let mut p = Parser { src: text, pos: 0 };
    let f = p.state()?;
    p.skip_ws();
    if p.pos < text.len() {
        return p.fail("unexpected trailing input");
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn fail<T>(&self, message: &str) -> Result<T, PctlError> {
        Err(PctlError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), PctlError> {
        if self.eat(tok) {
            Ok(())
        } else {
            self.fail(&format!("expected `{tok}`"))
        }
    }

    /// Next identifier without consuming it.
    fn peek_ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return None,
        }
        let end = chars
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_' || *c == '.'))
            .map_or(rest.len(), |(i, _)| i);
        Some(&rest[..end])
    }

    fn state(&mut self) -> Result<StateFormula, PctlError> {
        let mut lhs = self.unary()?;
        while self.eat("&") {
            let rhs = self.unary()?;
            lhs = StateFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<StateFormula, PctlError> {
        self.skip_ws();
        if self.eat("!") {
            return Ok(StateFormula::not(self.unary()?));
        }
        if self.eat("(") {
            let inner = self.state()?;
            self.expect(")")?;
            return Ok(inner);
        }
        match self.peek_ident() {
            Some("true") => {
                self.pos += 4;
                Ok(StateFormula::True)
            }
            Some("P") => {
                self.pos += 1;
                self.prob()
            }
            Some(word) if KEYWORDS.contains(&word) => {
                self.fail(&format!("keyword `{word}` cannot start a state formula"))
            }
            Some(word) => {
                self.pos += word.len();
                Ok(StateFormula::Atom(word.to_string()))
            }
            None if self.pos >= self.src.len() => self.fail("unexpected end of formula"),
            None => self.fail("expected a state formula"),
        }
    }

    fn prob(&mut self) -> Result<StateFormula, PctlError> {
        let bound = if self.eat("<=") {
            Bound::Le
        } else if self.eat("<") {
            Bound::Lt
        } else if self.eat(">=") {
            Bound::Ge
        } else if self.eat(">") {
            Bound::Gt
        } else {
            return self.fail("expected a bound (<, <=, >=, >)");
        };
        self.skip_ws();
        let num_start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || c == '.'))
            .unwrap_or(self.rest().len());
        let theta: f64 = match self.rest()[..len].parse() {
            Ok(v) => v,
            Err(_) => return self.fail("expected a probability threshold"),
        };
        self.pos += len;
        if !(0.0..=1.0).contains(&theta) {
            return Err(PctlError::ThetaOutOfRange {
                offset: num_start,
                theta,
            });
        }
        self.expect("[")?;
        let path = self.path()?;
        self.expect("]")?;
        Ok(StateFormula::prob(bound, theta, path))
    }

    fn path(&mut self) -> Result<PathFormula, PctlError> {
        match self.peek_ident() {
            Some("X") => {
                self.pos += 1;
                Ok(PathFormula::Next(self.unary()?))
            }
            Some("F") => {
                self.pos += 1;
                Ok(PathFormula::Eventually(self.unary()?))
            }
            Some("G") => {
                self.pos += 1;
                Ok(PathFormula::Globally(self.unary()?))
            }
            _ => {
                let left = self.state()?;
                if self.peek_ident() != Some("U") {
                    return self.fail("expected `U`");
                }
                self.pos += 1;
                let bound = if self.eat("<=") {
                    self.skip_ws();
                    let len = self
                        .rest()
                        .find(|c: char| !c.is_ascii_digit())
                        .unwrap_or(self.rest().len());
                    let k = match self.rest()[..len].parse() {
                        Ok(k) => k,
                        Err(_) => return self.fail("expected a step bound"),
                    };
                    self.pos += len;
                    Some(k)
                } else {
                    None
                };
                let right = self.state()?;
                Ok(PathFormula::Until { left, right, bound })
            }
        }
    }
}
