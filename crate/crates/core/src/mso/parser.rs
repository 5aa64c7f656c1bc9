//! Recursive-descent parser for the ASCII formula grammar.
//!
//! ```text
//! formula := "exists" var "." formula | "forall" var "." formula
//!          | "existsS" Var "." formula | "forallS" Var "." formula
//!          | formula ("and" | "or" | "->") formula | "not" formula
//!          | "(" formula ")" | atom
//! atom    := "edge(" term "," term ")" | term "=" term | term "in" Var
//! ```
//!
//! Precedence is `not` > `and` > `or` > `->`; `->` associates to the right and
//! quantifier bodies extend as far right as possible.

use super::{Formula, MsoError, Term};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Arrow,
}

const KEYWORDS: &[&str] = &[
    "exists", "forall", "existsS", "forallS", "and", "or", "not", "in", "edge",
];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, MsoError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'(' => {
                out.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                out.push((Tok::RParen, i));
                i += 1;
            }
            b',' => {
                out.push((Tok::Comma, i));
                i += 1;
            }
            b'.' => {
                out.push((Tok::Dot, i));
                i += 1;
            }
            b'=' => {
                out.push((Tok::Eq, i));
                i += 1;
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                out.push((Tok::Arrow, i));
                i += 2;
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
            }
            _ => {
                return Err(MsoError::Syntax {
                    pos: i,
                    msg: format!(
                        "unexpected character {:?}",
                        text[i..].chars().next().unwrap()
                    ),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, PartialEq)]
enum Sort {
    Vertex,
    Set,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    scope: Vec<(String, Sort)>,
}

fn is_set_name(s: &str) -> bool {
    s.as_bytes()[0].is_ascii_uppercase()
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, MsoError> {
        Err(MsoError::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), MsoError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.syntax(format!("expected {what}"))
        }
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn implies(&mut self) -> Result<Formula, MsoError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, MsoError> {
        let mut lhs = self.and()?;
        while self.peek_keyword("or") {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, MsoError> {
        let mut lhs = self.unary()?;
        while self.peek_keyword("and") {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, MsoError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.implies()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(kw)) => match kw.as_str() {
                "not" => {
                    self.pos += 1;
                    Ok(Formula::not(self.unary()?))
                }
                "exists" | "forall" | "existsS" | "forallS" => self.quantifier(&kw),
                _ => self.atom(),
            },
            None => self.syntax("unexpected end of input"),
            _ => self.syntax("expected a formula"),
        }
    }

    fn quantifier(&mut self, kw: &str) -> Result<Formula, MsoError> {
        self.pos += 1;
        let name = match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => s.clone(),
            _ => return self.syntax("expected a variable name"),
        };
        if name == "a" || name == "b" {
            return self.syntax("constants cannot be quantified");
        }
        // `exists`/`forall` take their sort from the variable's case;
        // `existsS`/`forallS` insist on a set variable.
        let sort = if is_set_name(&name) {
            Sort::Set
        } else {
            Sort::Vertex
        };
        if kw.ends_with('S') && sort != Sort::Set {
            return Err(MsoError::Sort {
                pos: self.offset(),
                msg: format!("`{kw}` binds capitalized set variables, got `{name}`"),
            });
        }
        self.pos += 1;
        self.expect(Tok::Dot, "`.`")?;
        self.scope.push((name.clone(), sort));
        let body = self.implies();
        self.scope.pop();
        let body = body?;
        let existential = kw.starts_with("exists");
        Ok(match (existential, sort) {
            (true, Sort::Vertex) => Formula::exists(&name, body),
            (false, Sort::Vertex) => Formula::forall(&name, body),
            (true, Sort::Set) => Formula::exists_set(&name, body),
            (false, Sort::Set) => Formula::forall_set(&name, body),
        })
    }

    fn bound(&self, name: &str, sort: Sort) -> bool {
        self.scope
            .iter()
            .rev()
            .any(|(n, s)| n == name && *s == sort)
    }

    fn term(&mut self) -> Result<Term, MsoError> {
        let at = self.offset();
        let name = match self.peek() {
            Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => s.clone(),
            _ => return self.syntax("expected a term"),
        };
        if is_set_name(&name) {
            return Err(MsoError::Sort {
                pos: at,
                msg: format!("set variable `{name}` used as a vertex term"),
            });
        }
        self.pos += 1;
        match name.as_str() {
            "a" => Ok(Term::A),
            "b" => Ok(Term::B),
            _ if self.bound(&name, Sort::Vertex) => Ok(Term::Var(name)),
            _ => Err(MsoError::UnboundVariable(name)),
        }
    }

    fn atom(&mut self) -> Result<Formula, MsoError> {
        if self.peek_keyword("edge") {
            self.pos += 1;
            self.expect(Tok::LParen, "`(` after edge")?;
            let x = self.term()?;
            self.expect(Tok::Comma, "`,`")?;
            let y = self.term()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Formula::Edge(x, y));
        }
        let x = self.term()?;
        match self.peek() {
            Some(Tok::Eq) => {
                self.pos += 1;
                let y = self.term()?;
                Ok(Formula::Eq(x, y))
            }
            Some(Tok::Ident(s)) if s == "in" => {
                self.pos += 1;
                let at = self.offset();
                let set = match self.peek() {
                    Some(Tok::Ident(s)) if !KEYWORDS.contains(&s.as_str()) => s.clone(),
                    _ => return self.syntax("expected a set variable"),
                };
                if !is_set_name(&set) {
                    return Err(MsoError::Sort {
                        pos: at,
                        msg: format!("`{set}` is not a set variable"),
                    });
                }
                self.pos += 1;
                if !self.bound(&set, Sort::Set) {
                    return Err(MsoError::UnboundVariable(set));
                }
                Ok(Formula::In(x, set))
            }
            _ => self.syntax("expected `=` or `in`"),
        }
    }
}

/// Parses a closed formula (free only in the constants `a`, `b`).
pub fn parse(text: &str) -> Result<Formula, MsoError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        scope: Vec::new(),
    };
    let f = p.implies()?;
    if p.pos != p.toks.len() {
        return p.syntax("trailing input");
    }
    Ok(f)
}
