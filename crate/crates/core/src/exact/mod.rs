//! The polynomial-time exact counting algorithms and their dispatcher.
//!
//! Four algorithms cover the tractable cells of the dichotomy table:
//!
//! - [`count_val_all_distinct`]: every variable occurs once; any table.
//! - [`count_val_codd`]: Codd tables, no two atoms sharing a variable.
//! - [`count_val_uniform`]: uniform domains, inclusion-exclusion over basic
//!   singleton groups after ear-variable removal.
//! - [`count_comp_uniform_unary`]: completions over unary schemas with a
//!   uniform domain.
//!
//! [`count_exact`] routes an instance to whichever algorithm's precondition
//! holds; a restricted instance (say Codd and uniform) may be served by an
//! algorithm for any setting containing it.

mod comp_uniform;
mod val_codd;
mod val_uniform;

pub use comp_uniform::count_comp_uniform_unary;
pub use val_codd::count_val_codd;
pub use val_uniform::{count_ns, count_val_uniform, remove_ear_variables, BasicSingletonQuery, EarRemovalResult};

use crate::combinatorics::Count;
use crate::error::{Error, Result};
use crate::model::IncompleteDatabase;
use crate::query::{classify, pattern_profile, DomainKind, Problem, SjfBCQ, TableKind};

/// Counting valuations when every variable of `q` occurs exactly once: zero
/// if some relation of `sig(q)` is empty in `db`, otherwise every valuation
/// satisfies `q`.
pub fn count_val_all_distinct(q: &SjfBCQ, db: &IncompleteDatabase) -> Result<Count> {
    let p = pattern_profile(q);
    if p.xx || p.xsx {
        return Err(Error::PatternMismatch(
            "count_val_all_distinct needs every variable to occur exactly once".into(),
        ));
    }
    for rel in q.signature().keys() {
        if db.facts_of(rel).next().is_none() {
            return Ok(Count::from(0u32));
        }
    }
    Ok(db.total_valuations())
}

/// Checks that the database's relations are a subset of the query signature
/// with matching arities.
pub fn validate_schema(
    signature: &std::collections::BTreeMap<crate::model::Name, usize>,
    db: &IncompleteDatabase,
) -> Result<()> {
    for (rel, arity) in db.schema() {
        match signature.get(&rel) {
            None => {
                return Err(Error::SchemaMismatch(format!(
                    "database relation {rel} does not occur in the query"
                )))
            }
            Some(&a) if a == arity => {}
            Some(&a) => {
                return Err(Error::SchemaMismatch(format!(
                    "relation {rel} has arity {arity} in the database but {a} in the query"
                )))
            }
        }
    }
    Ok(())
}

/// Routes to the exact algorithm whose precondition the instance satisfies,
/// or fails with the hard patterns of the instance's own setting.
pub fn count_exact(q: &SjfBCQ, db: &IncompleteDatabase, problem: Problem) -> Result<Count> {
    count_exact_as(q, db, problem, instance_table(db), instance_domain(db))
}

/// Like [`count_exact`], but treats the instance as belonging to the given
/// setting: claiming `Codd` or `Uniform` for a database that is not is an
/// error, while claiming `Naive`/`NonUniform` for a restricted database
/// merely forgoes the specialized algorithms.
pub fn count_exact_as(
    q: &SjfBCQ,
    db: &IncompleteDatabase,
    problem: Problem,
    table: TableKind,
    domain: DomainKind,
) -> Result<Count> {
    if table == TableKind::Codd && !db.is_codd() {
        let n = db.nulls().first().cloned();
        return Err(Error::NotCodd(
            n.map(|n| n.to_string()).unwrap_or_default(),
        ));
    }
    if domain == DomainKind::Uniform && !db.is_uniform() {
        return Err(Error::NonUniform);
    }
    let p = pattern_profile(q);
    match problem {
        Problem::Valuations => {
            if !p.xx && !p.xsx {
                count_val_all_distinct(q, db)
            } else if table == TableKind::Codd && !p.xsx {
                count_val_codd(q, db)
            } else if domain == DomainKind::Uniform && !p.xx && !p.path && !p.xysxy {
                count_val_uniform(q, db)
            } else {
                Err(not_tractable(q, table, domain, problem))
            }
        }
        Problem::Completions => {
            if domain == DomainKind::Uniform && !p.xx && !p.xy {
                count_comp_uniform_unary(q, db)
            } else {
                Err(not_tractable(q, table, domain, problem))
            }
        }
    }
}

pub fn instance_table(db: &IncompleteDatabase) -> TableKind {
    if db.is_codd() {
        TableKind::Codd
    } else {
        TableKind::Naive
    }
}

pub fn instance_domain(db: &IncompleteDatabase) -> DomainKind {
    if db.is_uniform() {
        DomainKind::Uniform
    } else {
        DomainKind::NonUniform
    }
}

fn not_tractable(q: &SjfBCQ, table: TableKind, domain: DomainKind, problem: Problem) -> Error {
    let verdict = classify(q, table, domain, problem);
    Error::NotTractable {
        witnesses: verdict.witnesses,
    }
}
