//! Counting valuations under a uniform domain via inclusion-exclusion.
//!
//! When the query avoids the repeated-variable, path and double-join
//! patterns, deleting its single-occurrence variables leaves a conjunction of
//! basic singletons: groups of unary atoms, each group sharing one variable.
//! The count is then
//!
//!   multiplier * sum over S of (-1)^|S| * N_S
//!
//! where N_S counts the valuations under which no group of S is witnessed by
//! a common constant, and the multiplier accounts for nulls that lived only
//! in deleted columns.
//!
//! N_S itself is computed by a dynamic program over the domain constants:
//! nulls fall into blocks by their occurrence set among the S-relations, and
//! a valuation is determined by choosing, per block, the set of constants it
//! hits (weighted by surjection numbers). Processing constants one at a time
//! while tracking per-block hit counts keeps that polynomial in the data.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_bigint::Sign;
use num_traits::One;

use crate::combinatorics::{pow, surj, Count};
use crate::error::{Error, Result};
use crate::model::{DomainMode, Fact, IncompleteDatabase, Name, RelationSymbol, Term};
use crate::query::{pattern_profile, Atom, SjfBCQ};

/// A conjunction of basic singletons: per group one variable and the unary
/// relations that must all realize it on a common constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicSingletonQuery {
    groups: Vec<(Name, Vec<RelationSymbol>)>,
}

impl BasicSingletonQuery {
    pub fn new(groups: Vec<(Name, Vec<RelationSymbol>)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (_, rels) in &groups {
            if rels.is_empty() {
                return Err(Error::Malformed("empty basic singleton group".into()));
            }
            for r in rels {
                if r.arity != 1 {
                    return Err(Error::PatternMismatch(format!(
                        "basic singletons need unary atoms, {} has arity {}",
                        r.name, r.arity
                    )));
                }
                if !seen.insert(r.name.clone()) {
                    return Err(Error::SelfJoin(r.name.to_string()));
                }
            }
        }
        Ok(BasicSingletonQuery { groups })
    }

    pub fn groups(&self) -> &[(Name, Vec<RelationSymbol>)] {
        &self.groups
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }
}

/// Result of deleting all single-occurrence variables from a query.
#[derive(Debug, Clone)]
pub struct EarRemovalResult {
    /// The surviving atoms (`None` when every atom lost all its variables).
    pub reduced: Option<SjfBCQ>,
    /// Atoms whose variables all occurred once reduce to a data-independent
    /// "this relation is nonempty" test.
    pub dropped_relations: Vec<RelationSymbol>,
    /// The database with the deleted columns projected out and the dropped
    /// relations removed.
    pub projected: IncompleteDatabase,
    /// Product of the domain sizes of nulls occurring only in deleted columns.
    pub multiplier: Count,
}

/// Deletes every variable with a single occurrence in `q` and projects the
/// corresponding columns out of `db`. The count of the original instance is
/// `multiplier` times the count of the reduced one.
pub fn remove_ear_variables(q: &SjfBCQ, db: &IncompleteDatabase) -> Result<EarRemovalResult> {
    if !db.is_uniform() {
        return Err(Error::NonUniform);
    }
    let occurrences = q.var_occurrences();
    let keep: BTreeMap<&Name, Vec<usize>> = q
        .atoms()
        .iter()
        .map(|a| {
            let cols = (0..a.vars.len())
                .filter(|&i| occurrences[&a.vars[i]] >= 2)
                .collect();
            (&a.relation.name, cols)
        })
        .collect();

    let mut reduced_atoms = Vec::new();
    let mut dropped = Vec::new();
    for a in q.atoms() {
        let cols = &keep[&a.relation.name];
        if cols.is_empty() {
            dropped.push(a.relation.clone());
        } else {
            let vars: Vec<&str> = cols.iter().map(|&i| a.vars[i].as_ref()).collect();
            reduced_atoms.push(Atom::new(&a.relation.name, &vars)?);
        }
    }

    let mut kept_nulls: BTreeSet<Name> = BTreeSet::new();
    let mut deleted_nulls: BTreeSet<Name> = BTreeSet::new();
    let mut projected_facts = Vec::new();
    for f in db.facts() {
        match keep.get(&f.relation.name) {
            Some(cols) if !cols.is_empty() => {
                let args: Vec<Term> = cols.iter().map(|&i| f.args[i].clone()).collect();
                for (i, t) in f.args.iter().enumerate() {
                    if let Term::Null(n) = t {
                        if cols.contains(&i) {
                            kept_nulls.insert(n.clone());
                        } else {
                            deleted_nulls.insert(n.clone());
                        }
                    }
                }
                projected_facts.push(Fact::new(
                    RelationSymbol::new(&f.relation.name, args.len())?,
                    args,
                )?);
            }
            Some(_) => {
                // fully deleted relation: drop the facts, remember the nulls
                for n in f.nulls() {
                    deleted_nulls.insert(n.clone());
                }
            }
            None => {
                // relation outside the query: keep untouched
                for n in f.nulls() {
                    kept_nulls.insert(n.clone());
                }
                projected_facts.push(f.clone());
            }
        }
    }

    let dom = db.uniform_domain().expect("checked uniform").clone();
    let gone = deleted_nulls.difference(&kept_nulls).count();
    let projected = IncompleteDatabase::new(projected_facts, DomainMode::Uniform(dom.clone()))?;
    Ok(EarRemovalResult {
        reduced: if reduced_atoms.is_empty() {
            None
        } else {
            Some(SjfBCQ::new(reduced_atoms)?)
        },
        dropped_relations: dropped,
        projected,
        multiplier: pow(dom.len() as u64, gone as u64),
    })
}

/// Number of valuations under which, for every group index in `s`, no
/// constant lies in all realized relations of that group. `s` is a set of
/// indices into `bsq.groups()`. Nulls and constants outside the `s`-relations
/// contribute a free factor of the domain size per null.
pub fn count_ns(bsq: &BasicSingletonQuery, s: &BTreeSet<usize>, db: &IncompleteDatabase) -> Result<Count> {
    let dom = db.uniform_domain().ok_or(Error::NonUniform)?.clone();
    let d = dom.len();
    if s.is_empty() {
        return Ok(db.total_valuations());
    }

    // relations constrained by s, and the groups they belong to
    let mut rel_index: BTreeMap<&Name, usize> = BTreeMap::new();
    let mut rels: Vec<&Name> = Vec::new();
    for &gi in s {
        let (_, group_rels) = &bsq.groups()[gi];
        for r in group_rels {
            if r.arity != 1 {
                return Err(Error::PatternMismatch(format!(
                    "count_ns needs unary relations, {} has arity {}",
                    r.name, r.arity
                )));
            }
            rel_index.entry(&r.name).or_insert_with(|| {
                rels.push(&r.name);
                rels.len() - 1
            });
        }
    }
    let groups: Vec<u64> = s
        .iter()
        .map(|&gi| {
            bsq.groups()[gi]
                .1
                .iter()
                .map(|r| 1u64 << rel_index[&r.name])
                .fold(0, |a, b| a | b)
        })
        .collect();

    // occurrence sets: per constant and per null, the bitmask of s-relations
    // it appears in (constants outside dom included for the witness check)
    let mut const_base: BTreeMap<&Name, u64> = BTreeMap::new();
    let mut null_block: BTreeMap<&Name, u64> = BTreeMap::new();
    for f in db.facts() {
        let Some(&ri) = rel_index.get(&f.relation.name) else {
            continue;
        };
        if f.relation.arity != 1 {
            return Err(Error::PatternMismatch(format!(
                "count_ns needs unary facts, {} has arity {}",
                f.relation.name, f.relation.arity
            )));
        }
        match &f.args[0] {
            Term::Constant(c) => *const_base.entry(c).or_insert(0) |= 1 << ri,
            Term::Null(n) => *null_block.entry(n).or_insert(0) |= 1 << ri,
        }
    }

    // a constant already witnessing some group forces N_s = 0
    for &g in &groups {
        if const_base.values().any(|&b| b & g == g) {
            return Ok(Count::from(0u32));
        }
    }

    // free nulls: not occurring in any s-relation
    let free = db.nulls().len() - null_block.len();

    // null blocks by occurrence set
    let mut block_sizes: BTreeMap<u64, u64> = BTreeMap::new();
    for (_, &b) in &null_block {
        *block_sizes.entry(b).or_insert(0) += 1;
    }
    let blocks: Vec<(u64, u64)> = block_sizes.into_iter().collect(); // (mask, null count)

    // per-constant base classes over the domain; out-of-domain constants
    // cannot be hit by a null and are safe after the witness check above
    let mut class_sizes: BTreeMap<u64, u64> = BTreeMap::new();
    let mut in_dom_constants = 0u64;
    for (c, &b) in &const_base {
        if dom.contains(c) {
            *class_sizes.entry(b).or_insert(0) += 1;
            in_dom_constants += 1;
        }
    }
    *class_sizes.entry(0).or_insert(0) += d as u64 - in_dom_constants;

    // allowed hit patterns per base class: the union of base and hit blocks
    // must not cover any group of s
    let allowed: BTreeMap<u64, Vec<Vec<usize>>> = class_sizes
        .keys()
        .map(|&base| {
            let mut patterns = Vec::new();
            for subset in 0u64..(1 << blocks.len()) {
                let mut covered = base;
                for (bi, (mask, _)) in blocks.iter().enumerate() {
                    if subset & (1 << bi) != 0 {
                        covered |= mask;
                    }
                }
                if groups.iter().all(|&g| covered & g != g) {
                    patterns.push(
                        (0..blocks.len())
                            .filter(|bi| subset & (1 << bi) != 0)
                            .collect(),
                    );
                }
            }
            (base, patterns)
        })
        .collect();

    // DP over the d constants: state = per-block hit counts (capped by the
    // block's null count; surjections vanish beyond it)
    let mut states: HashMap<Vec<u16>, Count> = HashMap::new();
    states.insert(vec![0u16; blocks.len()], Count::one());
    for (&base, &count) in &class_sizes {
        let patterns = &allowed[&base];
        for _ in 0..count {
            let mut next: HashMap<Vec<u16>, Count> = HashMap::new();
            for (state, ways) in &states {
                for pat in patterns {
                    let mut ns = state.clone();
                    let mut ok = true;
                    for &bi in pat {
                        if (ns[bi] as u64) + 1 > blocks[bi].1 {
                            ok = false;
                            break;
                        }
                        ns[bi] += 1;
                    }
                    if ok {
                        *next.entry(ns).or_insert_with(|| Count::from(0u32)) += ways;
                    }
                }
            }
            states = next;
        }
    }

    let mut total = Count::from(0u32);
    for (state, ways) in states {
        let mut term = ways;
        for (bi, &(_, nulls)) in blocks.iter().enumerate() {
            term *= surj(nulls, state[bi] as u64);
        }
        total += term;
    }
    Ok(total * pow(d as u64, free as u64))
}

/// Counting valuations under a uniform domain when the query avoids the
/// repeated-variable, path and double-join patterns.
pub fn count_val_uniform(q: &SjfBCQ, db: &IncompleteDatabase) -> Result<Count> {
    if !db.is_uniform() {
        return Err(Error::NonUniform);
    }
    let p = pattern_profile(q);
    if p.xx || p.path || p.xysxy {
        return Err(Error::PatternMismatch(
            "count_val_uniform needs a query without the R(x,x), path and R(x,y)&S(x,y) patterns"
                .into(),
        ));
    }

    let ear = remove_ear_variables(q, db)?;

    // a fully-deleted atom holds in every completion iff its relation is
    // nonempty in the original database
    for rel in &ear.dropped_relations {
        if db.facts_of(&rel.name).next().is_none() {
            return Ok(Count::from(0u32));
        }
    }

    let Some(reduced) = &ear.reduced else {
        return Ok(ear.multiplier * ear.projected.total_valuations());
    };

    // after ear removal every remaining variable occurs in >= 2 atoms, so the
    // connectivity components are single-variable cliques of unary atoms
    let bsq = to_basic_singletons(reduced)?;

    let m = bsq.group_count();
    let mut acc = BigInt::from(0);
    let mut subset: Vec<usize> = Vec::new();
    for mask in 0u32..(1 << m) {
        subset.clear();
        subset.extend((0..m).filter(|i| mask & (1 << i) != 0));
        let ns = count_ns(&bsq, &subset.iter().copied().collect(), &ear.projected)?;
        if subset.len() % 2 == 0 {
            acc += BigInt::from(ns);
        } else {
            acc -= BigInt::from(ns);
        }
    }
    assert_ne!(acc.sign(), Sign::Minus, "inclusion-exclusion went negative");
    Ok(ear.multiplier * acc.to_biguint().expect("nonnegative"))
}

fn to_basic_singletons(q: &SjfBCQ) -> Result<BasicSingletonQuery> {
    let graph = q.connectivity_graph();
    let comps = graph.single_variable_cliques().ok_or_else(|| {
        Error::PatternMismatch("query does not decompose into basic singletons".into())
    })?;
    let mut groups = Vec::new();
    for (var, atom_indices) in comps {
        let mut rels = Vec::new();
        let mut group_var: Option<Name> = var;
        for &ai in &atom_indices {
            let atom = &q.atoms()[ai];
            if atom.relation.arity != 1 {
                return Err(Error::PatternMismatch(format!(
                    "atom {} is not unary after ear removal",
                    atom
                )));
            }
            group_var.get_or_insert_with(|| atom.vars[0].clone());
            rels.push(atom.relation.clone());
        }
        groups.push((group_var.expect("component has a variable"), rels));
    }
    BasicSingletonQuery::new(groups)
}
