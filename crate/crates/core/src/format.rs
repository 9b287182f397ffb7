//! The incomplete-database text format.
//!
//! One item per line, UTF-8, `#` starts a comment. Domains come either as a
//! single `@domain uniform c1 c2 ...` line or as one `@null _n c1 c2 ...`
//! line per null (mixing the two is an error). Facts are written
//! `R(a, _x, b)`: tokens starting with an underscore are nulls, everything
//! else is a constant.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{name, Completion, Domain, DomainMode, Fact, IncompleteDatabase, Name, RelationSymbol, Term};

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '@' | '.' | '\'' | '+' | '-')
}

fn check_ident(tok: &str, line: usize) -> Result<()> {
    if tok.is_empty() {
        return Err(Error::parse(line, 1, "empty identifier"));
    }
    if let Some(c) = tok.chars().find(|c| !is_ident_char(*c)) {
        return Err(Error::parse(
            line,
            1,
            format!("character {c:?} is not allowed in identifiers"),
        ));
    }
    Ok(())
}

fn parse_term(tok: &str, line: usize) -> Result<Term> {
    check_ident(tok, line)?;
    match tok.strip_prefix('_') {
        Some(rest) if rest.is_empty() => {
            Err(Error::parse(line, 1, "a null needs a name after the underscore"))
        }
        Some(rest) => Ok(Term::null(rest)),
        None => Ok(Term::constant(tok)),
    }
}

fn parse_fact(line_text: &str, lineno: usize) -> Result<Fact> {
    let open = line_text
        .find('(')
        .ok_or_else(|| Error::parse(lineno, 1, "expected `Rel(arg, ...)`"))?;
    let close = line_text
        .rfind(')')
        .ok_or_else(|| Error::parse(lineno, open + 1, "missing closing parenthesis"))?;
    if line_text[close + 1..].trim() != "" {
        return Err(Error::parse(lineno, close + 2, "trailing input after fact"));
    }
    let rel = line_text[..open].trim();
    check_ident(rel, lineno)?;
    if rel.starts_with('_') {
        return Err(Error::parse(lineno, 1, "relation names cannot start with an underscore"));
    }
    let body = &line_text[open + 1..close];
    let mut args = Vec::new();
    for piece in body.split(',') {
        args.push(parse_term(piece.trim(), lineno)?);
    }
    if args.is_empty() || body.trim().is_empty() {
        return Err(Error::parse(lineno, open + 1, "facts need at least one argument"));
    }
    Fact::new(RelationSymbol::new(rel, args.len())?, args)
}

/// Parses the incomplete-database format.
pub fn parse_database(text: &str) -> Result<IncompleteDatabase> {
    let mut uniform: Option<Domain> = None;
    let mut per_null: BTreeMap<Name, Domain> = BTreeMap::new();
    let mut facts: Vec<Fact> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("@domain") {
            if !per_null.is_empty() {
                return Err(Error::parse(
                    lineno,
                    1,
                    "cannot mix `@domain uniform` with `@null` lines",
                ));
            }
            if uniform.is_some() {
                return Err(Error::parse(lineno, 1, "duplicate `@domain` line"));
            }
            let mut toks = rest.split_whitespace();
            if toks.next() != Some("uniform") {
                return Err(Error::parse(lineno, 1, "expected `@domain uniform c1 c2 ...`"));
            }
            let values: Vec<Name> = toks
                .map(|t| {
                    check_ident(t, lineno)?;
                    if t.starts_with('_') {
                        return Err(Error::parse(lineno, 1, "domains contain constants, not nulls"));
                    }
                    Ok(name(t))
                })
                .collect::<Result<_>>()?;
            uniform = Some(
                Domain::new(values)
                    .ok_or_else(|| Error::EmptyDomain("(uniform)".into()))?,
            );
        } else if let Some(rest) = line.strip_prefix("@null") {
            if uniform.is_some() {
                return Err(Error::parse(
                    lineno,
                    1,
                    "cannot mix `@domain uniform` with `@null` lines",
                ));
            }
            let mut toks = rest.split_whitespace();
            let null_tok = toks
                .next()
                .ok_or_else(|| Error::parse(lineno, 1, "expected `@null _n c1 c2 ...`"))?;
            let Term::Null(null_name) = parse_term(null_tok, lineno)? else {
                return Err(Error::parse(lineno, 1, "`@null` names start with an underscore"));
            };
            let values: Vec<Name> = toks
                .map(|t| {
                    check_ident(t, lineno)?;
                    if t.starts_with('_') {
                        return Err(Error::parse(lineno, 1, "domains contain constants, not nulls"));
                    }
                    Ok(name(t))
                })
                .collect::<Result<_>>()?;
            let dom = Domain::new(values)
                .ok_or_else(|| Error::EmptyDomain(null_name.to_string()))?;
            if per_null.insert(null_name.clone(), dom).is_some() {
                return Err(Error::parse(
                    lineno,
                    1,
                    format!("duplicate domain for _{null_name}"),
                ));
            }
        } else if line.starts_with('@') {
            return Err(Error::parse(lineno, 1, "unknown directive"));
        } else {
            facts.push(parse_fact(line, lineno)?);
        }
    }

    let mode = match uniform {
        Some(d) => DomainMode::Uniform(d),
        None => DomainMode::PerNull(per_null),
    };
    IncompleteDatabase::new(facts, mode)
}

/// Canonical text for a database: domain lines first (per-null lines sorted
/// by null name), then the facts in canonical order.
pub fn database_to_text(db: &IncompleteDatabase) -> String {
    let mut out = String::new();
    match db.domains() {
        DomainMode::Uniform(d) => {
            let _ = write!(out, "@domain uniform");
            for c in d.iter() {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
        DomainMode::PerNull(map) => {
            for (n, d) in map {
                let _ = write!(out, "@null _{n}");
                for c in d.iter() {
                    let _ = write!(out, " {c}");
                }
                out.push('\n');
            }
        }
    }
    for f in db.facts() {
        let _ = writeln!(out, "{f}");
    }
    out
}

/// Parses a ground set of facts (a candidate completion): same fact syntax,
/// no directives, no nulls.
pub fn parse_completion_text(text: &str) -> Result<Completion> {
    let mut facts = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('@') {
            return Err(Error::parse(lineno, 1, "a completion has no directives"));
        }
        let f = parse_fact(line, lineno)?;
        if !f.is_ground() {
            return Err(Error::parse(lineno, 1, "a completion cannot contain nulls"));
        }
        facts.push(f);
    }
    Completion::new(facts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_per_null() {
        let text = "# example\n@null _1 a b c\n@null _2 a b\nS(a, b)\nS(_1, a)\nS(a, _2)\n";
        let db = parse_database(text).unwrap();
        assert_eq!(db.facts().len(), 3);
        assert_eq!(db.nulls().len(), 2);
        assert!(!db.is_uniform());
        let written = database_to_text(&db);
        let again = parse_database(&written).unwrap();
        assert_eq!(db, again);
        assert_eq!(written, database_to_text(&again));
    }

    #[test]
    fn roundtrip_uniform() {
        let text = "@domain uniform 1 2 3\nR(_a, _b)\nR(1, 2)\n";
        let db = parse_database(text).unwrap();
        assert!(db.is_uniform());
        assert_eq!(db.uniform_domain().unwrap().len(), 3);
        let again = parse_database(&database_to_text(&db)).unwrap();
        assert_eq!(db, again);
    }

    #[test]
    fn mixing_domain_modes_is_an_error() {
        assert!(matches!(
            parse_database("@domain uniform a\n@null _x a\nR(_x)\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_database("@null _x a\n@domain uniform a\nR(_x)\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn missing_domain_is_an_error() {
        assert!(parse_database("R(_x)\n").is_err());
    }

    #[test]
    fn empty_domain_is_an_error() {
        assert!(matches!(
            parse_database("@null _x\nR(_x)\n"),
            Err(Error::EmptyDomain(_))
        ));
    }

    #[test]
    fn duplicate_facts_collapse() {
        let db = parse_database("R(a)\nR(a)\nR(b)\n").unwrap();
        assert_eq!(db.facts().len(), 2);
    }

    #[test]
    fn completion_file() {
        let c = parse_completion_text("R(a)\nS(a, b)\n").unwrap();
        assert_eq!(c.len(), 2);
        assert!(parse_completion_text("R(_x)\n").is_err());
        assert!(parse_completion_text("@domain uniform a\n").is_err());
    }
}
