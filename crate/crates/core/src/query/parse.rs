//! Query text parser.
//!
//! Grammar: `query := conj ("|" conj)*; conj := atom ("&" atom)*;
//! atom := RelName "(" var ("," var)* ")"`. Relation names start with an
//! uppercase letter, variables with a lowercase one; both may continue with
//! letters, digits, `_` and `'`.

use crate::error::{Error, Result};
use crate::query::{Atom, SjfBCQ, UnionQuery};

struct Scanner<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner {
            src,
            chars: src.chars().collect(),
            pos: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(0, self.pos + 1, message)
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.bump() {
            Some(got) if got == c => Ok(()),
            Some(got) => Err(self.err(format!("expected '{c}', found '{got}'"))),
            None => Err(self.err(format!("expected '{c}', found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_ascii_alphanumeric() || c == '_' || c == '\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return Err(self.err("expected an identifier"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn atom(&mut self) -> Result<Atom> {
        let at = self.pos;
        let rel = self.ident()?;
        let first = rel.chars().next().expect("nonempty identifier");
        if !first.is_ascii_uppercase() {
            self.pos = at;
            return Err(self.err(format!(
                "relation name must start with an uppercase letter, found {rel}"
            )));
        }
        self.expect('(')?;
        let mut vars = Vec::new();
        loop {
            let at = self.pos;
            let v = self.ident()?;
            let first = v.chars().next().expect("nonempty identifier");
            if !first.is_ascii_lowercase() {
                self.pos = at;
                return Err(self.err(format!(
                    "variable must start with a lowercase letter, found {v}"
                )));
            }
            vars.push(v);
            match self.bump() {
                Some(',') => continue,
                Some(')') => break,
                Some(c) => return Err(self.err(format!("expected ',' or ')', found '{c}'"))),
                None => return Err(self.err("expected ',' or ')', found end of input")),
            }
        }
        let refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
        Atom::new(&rel, &refs)
    }

    fn conjunct(&mut self) -> Result<SjfBCQ> {
        let mut atoms = vec![self.atom()?];
        while self.peek() == Some('&') {
            self.bump();
            atoms.push(self.atom()?);
        }
        SjfBCQ::new(atoms)
    }

    fn query(&mut self) -> Result<UnionQuery> {
        let mut disjuncts = vec![self.conjunct()?];
        while self.peek() == Some('|') {
            self.bump();
            disjuncts.push(self.conjunct()?);
        }
        self.skip_ws();
        if self.pos < self.chars.len() {
            return Err(self.err(format!(
                "trailing input: {:?}",
                &self.src[self.src.len().min(self.pos)..]
            )));
        }
        UnionQuery::new(disjuncts)
    }
}

/// Parses a query string; a single conjunct comes back as a one-disjunct
/// [`UnionQuery`] (see [`UnionQuery::as_single`]).
pub fn parse_query(text: &str) -> Result<UnionQuery> {
    Scanner::new(text).query()
}
