//! Text syntax for guards, invariants and updates.
//!
//! ```text
//! constraint := "true" | atom ("&&" atom)*
//! atom       := ident op int | ident "-" ident op int
//! op         := "<" | "<=" | "==" | "=" | ">=" | ">"
//! update     := "" | assign ("," assign)*
//! assign     := ident ":=" int | ident ":=" ident ("+" | "-") int
//! ```

use std::fmt;

use thiserror::Error;

use crate::model::{AssignValue, Assignment, Atom, CmpOp, Constraint, Term, Update};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct ExprError {
    /// 1-based character column inside the expression text.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Op(CmpOp),
    Minus,
    Plus,
    And,
    Comma,
    Assign,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let err = |i: usize, message: String| ExprError {
        column: i + 1,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '0'..='9' => {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text
                    .parse::<i64>()
                    .map_err(|_| err(start, format!("integer `{text}` out of range")))?;
                toks.push((start, Tok::Int(n)));
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                    i += 1;
                }
                toks.push((start, Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            '<' | '>' | '=' | ':' | '&' => {
                let next = chars.get(i + 1).copied();
                let (tok, len) = match (c, next) {
                    ('<', Some('=')) => (Tok::Op(CmpOp::Le), 2),
                    ('<', _) => (Tok::Op(CmpOp::Lt), 1),
                    ('>', Some('=')) => (Tok::Op(CmpOp::Ge), 2),
                    ('>', _) => (Tok::Op(CmpOp::Gt), 1),
                    ('=', Some('=')) => (Tok::Op(CmpOp::Eq), 2),
                    ('=', _) => (Tok::Op(CmpOp::Eq), 1),
                    (':', Some('=')) => (Tok::Assign, 2),
                    ('&', Some('&')) => (Tok::And, 2),
                    _ => return Err(err(start, format!("unexpected character `{c}`"))),
                };
                toks.push((start, tok));
                i += len;
                continue;
            }
            '-' => toks.push((start, Tok::Minus)),
            '+' => toks.push((start, Tok::Plus)),
            ',' => toks.push((start, Tok::Comma)),
            _ => return Err(err(start, format!("unexpected character `{c}`"))),
        }
        i += 1;
    }
    Ok(toks)
}

struct Cursor {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Cursor {
    fn new(src: &str) -> Result<Self, ExprError> {
        Ok(Cursor {
            toks: lex(src)?,
            pos: 0,
            end: src.chars().count(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map(|(c, _)| *c).unwrap_or(self.end) + 1
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            column: self.column(),
            message: message.into(),
        })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn ident(&mut self) -> Result<String, ExprError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.fail("expected an identifier"),
        }
    }

    fn int(&mut self) -> Result<i64, ExprError> {
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(if neg { -n } else { n })
            }
            _ => self.fail("expected an integer"),
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

pub fn parse_constraint(src: &str) -> Result<Constraint, ExprError> {
    let mut cur = Cursor::new(src)?;
    if cur.done() {
        return Ok(Constraint::tt());
    }
    if cur.peek() == Some(&Tok::Ident("true".into())) && cur.toks.len() == 1 {
        return Ok(Constraint::tt());
    }
    let mut atoms = Vec::new();
    loop {
        let left = cur.ident()?;
        let term = if cur.peek() == Some(&Tok::Minus) {
            cur.pos += 1;
            Term::Diff(left, cur.ident()?)
        } else {
            Term::Name(left)
        };
        let op = match cur.next() {
            Some(Tok::Op(op)) => op,
            _ => {
                cur.pos = cur.pos.saturating_sub(1);
                return cur.fail("expected a comparison operator");
            }
        };
        let value = cur.int()?;
        atoms.push(Atom { term, op, value });
        match cur.peek() {
            None => break,
            Some(Tok::And) => cur.pos += 1,
            Some(_) => return cur.fail("expected `&&` or end of constraint"),
        }
    }
    Ok(Constraint { atoms })
}

pub fn parse_update(src: &str) -> Result<Update, ExprError> {
    let mut cur = Cursor::new(src)?;
    let mut assignments = Vec::new();
    if cur.done() {
        return Ok(Update { assignments });
    }
    loop {
        let target = cur.ident()?;
        if cur.next() != Some(Tok::Assign) {
            cur.pos = cur.pos.saturating_sub(1);
            return cur.fail("expected `:=`");
        }
        let value = match cur.peek() {
            Some(Tok::Ident(src_name)) => {
                if *src_name != target {
                    return cur.fail(format!("only `{target} := {target} ± n` is supported"));
                }
                cur.pos += 1;
                let sign = match cur.next() {
                    Some(Tok::Plus) => 1,
                    Some(Tok::Minus) => -1,
                    _ => {
                        cur.pos = cur.pos.saturating_sub(1);
                        return cur.fail("expected `+` or `-`");
                    }
                };
                AssignValue::Offset(sign * cur.int()?)
            }
            _ => AssignValue::Const(cur.int()?),
        };
        assignments.push(Assignment { target, value });
        match cur.peek() {
            None => break,
            Some(Tok::Comma) => cur.pos += 1,
            Some(_) => return cur.fail("expected `,` or end of update"),
        }
    }
    Ok(Update { assignments })
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.term {
            Term::Name(n) => write!(f, "{n} {} {}", self.op.symbol(), self.value),
            Term::Diff(l, r) => write!(f, "{l} - {r} {} {}", self.op.symbol(), self.value),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" && ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            AssignValue::Const(n) => write!(f, "{} := {n}", self.target),
            AssignValue::Offset(n) if n < 0 => write!(f, "{0} := {0} - {1}", self.target, -n),
            AssignValue::Offset(n) => write!(f, "{0} := {0} + {1}", self.target, n),
        }
    }
}

impl fmt::Display for Update {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.assignments.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_conjunctions() {
        let c = parse_constraint("x <= 5 && v == 1 && x - y > 2").unwrap();
        assert_eq!(c.atoms.len(), 3);
        assert_eq!(c.atoms[0], Atom::new("x", CmpOp::Le, 5));
        assert_eq!(c.atoms[2], Atom::diff("x", "y", CmpOp::Gt, 2));
        assert_eq!(c.to_string(), "x <= 5 && v == 1 && x - y > 2");
        assert!(parse_constraint("true").unwrap().is_true());
        assert!(parse_constraint("  ").unwrap().is_true());
    }

    #[test]
    fn single_equals_is_equality() {
        assert_eq!(parse_constraint("v = 2").unwrap(), Constraint::atom("v", CmpOp::Eq, 2));
    }

    #[test]
    fn reports_column_of_error() {
        let e = parse_constraint("x <= 5 && v ! 1").unwrap_err();
        assert_eq!(e.column, 13);
        let e = parse_constraint("x <= ").unwrap_err();
        assert_eq!(e.column, 6);
        assert!(parse_constraint("x <= 5 ||").is_err());
    }

    #[test]
    fn parses_updates() {
        let u = parse_update("x := 0, q := q + 1, r := r - 2").unwrap();
        assert_eq!(u, Update::none().reset("x").add("q", 1).add("r", -2));
        assert_eq!(u.to_string(), "x := 0, q := q + 1, r := r - 2");
        assert!(parse_update("").unwrap().is_empty());
        assert!(parse_update("q := p + 1").is_err());
        assert!(parse_update("q = 1").is_err());
    }
}
