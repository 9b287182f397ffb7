//! Counting valuations over Codd tables when no two atoms share a variable.
//!
//! Constants are first replaced by fresh nulls with singleton domains, which
//! keeps the table Codd and the count unchanged while unifying the
//! constant/null intersection bookkeeping. Atoms then have pairwise disjoint
//! variables and the table's nulls are partitioned by fact, so the count
//! factors per relation: for relation R with tuples t_1..t_n,
//!
//!   count_R = total_R - prod_j rho(t_j)
//!
//! where total_R is the number of valuations of R's nulls and rho(t_j) is the
//! number of valuations of t_j's nulls that fail to match R's atom. A tuple
//! matches iff every repeated-variable position group takes one common valu,
//! so rho(t_j) = total_j - prod_x s_x with s_x the size of the intersection
//! of the domains at x's positions.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use crate::combinatorics::Count;
use crate::error::{Error, Result};
use crate::model::{name, Domain, DomainMode, Fact, IncompleteDatabase, Name, Term};
use crate::query::{pattern_profile, SjfBCQ};

pub fn count_val_codd(q: &SjfBCQ, db: &IncompleteDatabase) -> Result<Count> {
    if !db.is_codd() {
        let repeated = find_repeated_null(db).expect("non-Codd table repeats a null");
        return Err(Error::NotCodd(repeated.to_string()));
    }
    if pattern_profile(q).xsx {
        return Err(Error::PatternMismatch(
            "count_val_codd needs atoms with pairwise disjoint variables".into(),
        ));
    }

    let db = constants_to_singleton_nulls(db);

    let mut result = Count::one();
    for atom in q.atoms() {
        let facts: Vec<&Fact> = db.facts_of(&atom.relation.name).collect();

        // total valuations of this relation's nulls
        let mut total = Count::one();
        for f in &facts {
            for n in f.nulls() {
                total *= Count::from(db.null_domain(n).expect("null has a domain").len());
            }
        }

        // valuations where no tuple matches the atom
        let mut all_fail = Count::one();
        for f in &facts {
            let mut tuple_total = Count::one();
            for n in f.nulls() {
                tuple_total *= Count::from(db.null_domain(n).expect("null has a domain").len());
            }
            // positions grouped by variable; each group must agree on a value
            let mut positions: BTreeMap<&Name, Vec<usize>> = BTreeMap::new();
            for (i, v) in atom.vars.iter().enumerate() {
                positions.entry(v).or_default().push(i);
            }
            let mut matching = Count::one();
            for (_, idxs) in positions {
                // running intersection of the domains at this variable's positions
                let first = f.args[idxs[0]].as_null().expect("rewritten table is null-only");
                let mut current: Vec<Name> = db
                    .null_domain(first)
                    .expect("null has a domain")
                    .as_slice()
                    .to_vec();
                for &i in &idxs[1..] {
                    let n = f.args[i].as_null().expect("rewritten table is null-only");
                    let dom = db.null_domain(n).expect("null has a domain");
                    current.retain(|x| dom.contains(x));
                    if current.is_empty() {
                        break;
                    }
                }
                matching *= Count::from(current.len());
            }
            all_fail *= tuple_total - matching;
        }
        result *= total - all_fail;
    }

    // nulls occurring only in relations the query does not mention are
    // unconstrained
    let q_rels: BTreeSet<&Name> = q.atoms().iter().map(|a| &a.relation.name).collect();
    for f in db.facts() {
        if !q_rels.contains(&f.relation.name) {
            for n in f.nulls() {
                result *= Count::from(db.null_domain(n).expect("null has a domain").len());
            }
        }
    }
    Ok(result)
}

fn find_repeated_null(db: &IncompleteDatabase) -> Option<Name> {
    let mut seen = BTreeSet::new();
    for f in db.facts() {
        for n in f.nulls() {
            if !seen.insert(n.clone()) {
                return Some(n.clone());
            }
        }
    }
    None
}

/// Rewrites every constant occurrence into a fresh null with a singleton
/// domain. The result is still Codd and has the same satisfying-valuation
/// count (each fresh null has exactly one value).
fn constants_to_singleton_nulls(db: &IncompleteDatabase) -> IncompleteDatabase {
    let mut prefix = String::from("#c");
    while db.nulls().iter().any(|n| n.starts_with(prefix.as_str())) {
        prefix.push('#');
    }
    let mut domains: BTreeMap<Name, Domain> = match db.domains() {
        DomainMode::PerNull(m) => m.clone(),
        DomainMode::Uniform(d) => db
            .nulls()
            .iter()
            .map(|n| (n.clone(), d.clone()))
            .collect(),
    };
    let mut fresh = 0usize;
    let facts = db
        .facts()
        .iter()
        .map(|f| Fact {
            relation: f.relation.clone(),
            args: f
                .args
                .iter()
                .map(|t| match t {
                    Term::Null(n) => Term::Null(n.clone()),
                    Term::Constant(c) => {
                        let n = name(&format!("{prefix}{fresh}"));
                        fresh += 1;
                        domains.insert(n.clone(), Domain::new([c.clone()]).expect("singleton"));
                        Term::Null(n)
                    }
                })
                .collect(),
        })
        .collect();
    IncompleteDatabase::new(facts, DomainMode::PerNull(domains))
        .expect("rewriting preserves well-formedness")
}
