//! Schemas, facts, nulls, domains, valuations and completions.
//!
//! Everything here is immutable after construction and cheap to clone: names
//! are interned as `Arc<str>` and domains as shared sorted vectors. Nulls are
//! written with a leading underscore in all text formats; constants must not
//! start with one, so the two namespaces cannot collide.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::combinatorics::Count;
use crate::error::{Error, Result};

/// Interned identifier for constants, nulls, relations and variables.
pub type Name = Arc<str>;

pub fn name(s: &str) -> Name {
    Arc::from(s)
}

/// A relation symbol together with its arity (always >= 1).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationSymbol {
    pub name: Name,
    pub arity: usize,
}

impl RelationSymbol {
    pub fn new(name: &str, arity: usize) -> Result<Self> {
        if arity == 0 {
            return Err(Error::Malformed(format!(
                "relation {name} declared with arity 0"
            )));
        }
        if name.is_empty() {
            return Err(Error::Malformed("empty relation name".into()));
        }
        Ok(RelationSymbol {
            name: crate::model::name(name),
            arity,
        })
    }
}

/// A constant or a labeled null. Constants order before nulls.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Constant(Name),
    Null(Name),
}

impl Term {
    pub fn constant(s: &str) -> Term {
        Term::Constant(name(s))
    }

    pub fn null(s: &str) -> Term {
        Term::Null(name(s))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Term::Null(_))
    }

    pub fn as_null(&self) -> Option<&Name> {
        match self {
            Term::Null(n) => Some(n),
            Term::Constant(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Constant(c) => write!(f, "{c}"),
            Term::Null(n) => write!(f, "_{n}"),
        }
    }
}

/// One fact; `args.len()` always equals the relation's arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub relation: RelationSymbol,
    pub args: Vec<Term>,
}

impl Fact {
    pub fn new(relation: RelationSymbol, args: Vec<Term>) -> Result<Self> {
        if args.len() != relation.arity {
            return Err(Error::Malformed(format!(
                "fact over {} has {} arguments, arity is {}",
                relation.name,
                args.len(),
                relation.arity
            )));
        }
        Ok(Fact { relation, args })
    }

    /// Convenience constructor deriving the arity from the argument list.
    pub fn from_terms(relation: &str, args: Vec<Term>) -> Result<Self> {
        let rel = RelationSymbol::new(relation, args.len())?;
        Fact::new(rel, args)
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_null())
    }

    pub fn nulls(&self) -> impl Iterator<Item = &Name> {
        self.args.iter().filter_map(|t| t.as_null())
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation.name)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// A nonempty, sorted, deduplicated set of constants a null may take.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain(Arc<Vec<Name>>);

impl Domain {
    /// Returns `None` for an empty input; callers turn that into
    /// [`Error::EmptyDomain`] with the right null name attached.
    pub fn new<I: IntoIterator<Item = Name>>(values: I) -> Option<Self> {
        let mut v: Vec<Name> = values.into_iter().collect();
        v.sort();
        v.dedup();
        if v.is_empty() {
            None
        } else {
            Some(Domain(Arc::new(v)))
        }
    }

    pub fn from_strs(values: &[&str]) -> Option<Self> {
        Domain::new(values.iter().map(|s| name(s)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, c: &str) -> bool {
        self.0.binary_search_by(|x| x.as_ref().cmp(c)).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Name> {
        self.0.iter()
    }

    pub fn get(&self, i: usize) -> &Name {
        &self.0[i]
    }

    pub fn as_slice(&self) -> &[Name] {
        &self.0
    }

    /// Size of the intersection with another domain (both are sorted).
    pub fn intersection_size(&self, other: &Domain) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        let (a, b) = (self.as_slice(), other.as_slice());
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// Per-null domains (naive/Codd tables in the non-uniform setting) or one
/// shared domain for every null (the uniform setting).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainMode {
    PerNull(BTreeMap<Name, Domain>),
    Uniform(Domain),
}

/// A set of facts over constants and nulls plus the domain assignment.
///
/// Invariants enforced at construction: facts are sorted and deduplicated
/// (set semantics); every null occurring in a fact has a nonempty domain; in
/// per-null mode the domain map mentions exactly the occurring nulls; a
/// relation name always appears with one arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncompleteDatabase {
    facts: Vec<Fact>,
    domains: DomainMode,
    nulls: Vec<Name>,
    codd: bool,
}

impl IncompleteDatabase {
    pub fn new(mut facts: Vec<Fact>, domains: DomainMode) -> Result<Self> {
        facts.sort();
        facts.dedup();

        let mut arities: BTreeMap<Name, usize> = BTreeMap::new();
        for f in &facts {
            match arities.get(&f.relation.name) {
                None => {
                    arities.insert(f.relation.name.clone(), f.relation.arity);
                }
                Some(&a) if a == f.relation.arity => {}
                Some(&a) => {
                    return Err(Error::Malformed(format!(
                        "relation {} used with arities {} and {}",
                        f.relation.name, a, f.relation.arity
                    )))
                }
            }
        }

        let mut occurrences: BTreeMap<Name, usize> = BTreeMap::new();
        for f in &facts {
            for n in f.nulls() {
                *occurrences.entry(n.clone()).or_insert(0) += 1;
            }
        }
        let codd = occurrences.values().all(|&c| c <= 1);
        let nulls: Vec<Name> = occurrences.keys().cloned().collect();

        match &domains {
            DomainMode::Uniform(_) => {}
            DomainMode::PerNull(map) => {
                for n in &nulls {
                    if !map.contains_key(n) {
                        return Err(Error::Malformed(format!("null _{n} has no domain")));
                    }
                }
                for k in map.keys() {
                    if !occurrences.contains_key(k) {
                        return Err(Error::Malformed(format!(
                            "domain declared for _{k}, which occurs in no fact"
                        )));
                    }
                }
            }
        }

        Ok(IncompleteDatabase {
            facts,
            domains,
            nulls,
            codd,
        })
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    /// Distinct nulls occurring in the facts, sorted.
    pub fn nulls(&self) -> &[Name] {
        &self.nulls
    }

    pub fn domains(&self) -> &DomainMode {
        &self.domains
    }

    /// True iff no null occurs in two positions (across or within facts).
    pub fn is_codd(&self) -> bool {
        self.codd
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.domains, DomainMode::Uniform(_))
    }

    pub fn uniform_domain(&self) -> Option<&Domain> {
        match &self.domains {
            DomainMode::Uniform(d) => Some(d),
            DomainMode::PerNull(_) => None,
        }
    }

    /// Domain of a null occurring in this database.
    pub fn null_domain(&self, null: &str) -> Option<&Domain> {
        match &self.domains {
            DomainMode::Uniform(d) => {
                if self.nulls.binary_search_by(|n| n.as_ref().cmp(null)).is_ok() {
                    Some(d)
                } else {
                    None
                }
            }
            DomainMode::PerNull(map) => map.get(null),
        }
    }

    /// Relation name -> arity, for every relation with at least one fact.
    pub fn schema(&self) -> BTreeMap<Name, usize> {
        let mut m = BTreeMap::new();
        for f in &self.facts {
            m.insert(f.relation.name.clone(), f.relation.arity);
        }
        m
    }

    pub fn facts_of<'a>(&'a self, relation: &'a str) -> impl Iterator<Item = &'a Fact> {
        self.facts
            .iter()
            .filter(move |f| f.relation.name.as_ref() == relation)
    }

    /// Distinct constants occurring in the facts.
    pub fn constants(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        for f in &self.facts {
            for t in &f.args {
                if let Term::Constant(c) = t {
                    out.insert(c.clone());
                }
            }
        }
        out
    }

    /// Product of the domain sizes over the distinct nulls; 1 if there are none.
    pub fn total_valuations(&self) -> Count {
        let mut total = Count::from(1u32);
        for n in &self.nulls {
            total *= Count::from(self.null_domain(n).expect("null has a domain").len());
        }
        total
    }

    /// Substitutes every null and canonicalizes the result.
    pub fn apply_valuation(&self, v: &Valuation) -> Result<Completion> {
        for n in &self.nulls {
            match v.get(n) {
                None => return Err(Error::MissingAssignment(n.to_string())),
                Some(c) => {
                    let dom = self.null_domain(n).expect("null has a domain");
                    if !dom.contains(c) {
                        return Err(Error::DomainViolation {
                            null: n.to_string(),
                            value: c.to_string(),
                        });
                    }
                }
            }
        }
        let facts = self
            .facts
            .iter()
            .map(|f| Fact {
                relation: f.relation.clone(),
                args: f
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Constant(c) => Term::Constant(c.clone()),
                        Term::Null(n) => {
                            Term::Constant(v.get(n).expect("checked above").clone())
                        }
                    })
                    .collect(),
            })
            .collect();
        Ok(Completion::new(facts).expect("substitution grounds every fact"))
    }

    /// Iterates over every valuation in sorted-null odometer order.
    pub fn valuations(&self) -> ValuationIter<'_> {
        ValuationIter::new(self)
    }
}

/// A total, domain-respecting assignment of constants to nulls.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation {
    assignment: BTreeMap<Name, Name>,
}

impl Valuation {
    pub fn new(assignment: BTreeMap<Name, Name>) -> Self {
        Valuation { assignment }
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Self {
        Valuation {
            assignment: pairs
                .iter()
                .map(|(n, c)| (name(n), name(c)))
                .collect(),
        }
    }

    pub fn get(&self, null: &str) -> Option<&Name> {
        self.assignment.get(null)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Name)> {
        self.assignment.iter()
    }
}

/// A ground database in canonical form: facts sorted by (relation name,
/// argument tuple) with duplicates removed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Completion {
    facts: Vec<Fact>,
}

impl Completion {
    pub fn new(mut facts: Vec<Fact>) -> Result<Self> {
        if let Some(f) = facts.iter().find(|f| !f.is_ground()) {
            return Err(Error::Malformed(format!("completion contains a null: {f}")));
        }
        facts.sort();
        facts.dedup();
        Ok(Completion { facts })
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn facts_of<'a>(&'a self, relation: &'a str) -> impl Iterator<Item = &'a Fact> {
        self.facts
            .iter()
            .filter(move |f| f.relation.name.as_ref() == relation)
    }

    pub fn contains(&self, f: &Fact) -> bool {
        self.facts.binary_search(f).is_ok()
    }
}

/// Odometer over the Cartesian product of the null domains, nulls in sorted
/// order, last null varying fastest.
pub struct ValuationIter<'a> {
    db: &'a IncompleteDatabase,
    counters: Vec<usize>,
    done: bool,
}

impl<'a> ValuationIter<'a> {
    fn new(db: &'a IncompleteDatabase) -> Self {
        ValuationIter {
            db,
            counters: vec![0; db.nulls().len()],
            done: false,
        }
    }
}

impl<'a> Iterator for ValuationIter<'a> {
    type Item = Valuation;

    fn next(&mut self) -> Option<Valuation> {
        if self.done {
            return None;
        }
        let nulls = self.db.nulls();
        let mut assignment = BTreeMap::new();
        for (i, n) in nulls.iter().enumerate() {
            let dom = self.db.null_domain(n).expect("null has a domain");
            assignment.insert(n.clone(), dom.get(self.counters[i]).clone());
        }
        // advance
        let mut i = nulls.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            let dom_len = self.db.null_domain(&nulls[i]).expect("null has a domain").len();
            self.counters[i] += 1;
            if self.counters[i] < dom_len {
                break;
            }
            self.counters[i] = 0;
        }
        Some(Valuation::new(assignment))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_db() -> IncompleteDatabase {
        // T = {S(a,b), S(_1,a), S(a,_2)}, dom(_1)={a,b,c}, dom(_2)={a,b}
        let facts = vec![
            Fact::from_terms("S", vec![Term::constant("a"), Term::constant("b")]).unwrap(),
            Fact::from_terms("S", vec![Term::null("1"), Term::constant("a")]).unwrap(),
            Fact::from_terms("S", vec![Term::constant("a"), Term::null("2")]).unwrap(),
        ];
        let mut doms = BTreeMap::new();
        doms.insert(name("1"), Domain::from_strs(&["a", "b", "c"]).unwrap());
        doms.insert(name("2"), Domain::from_strs(&["a", "b"]).unwrap());
        IncompleteDatabase::new(facts, DomainMode::PerNull(doms)).unwrap()
    }

    #[test]
    fn apply_valuation_collapses_duplicates() {
        // Fig. 1, column (b,b): {S(a,b), S(b,a)}
        let db = fig1_db();
        let v = Valuation::from_pairs(&[("1", "b"), ("2", "b")]);
        let c = db.apply_valuation(&v).unwrap();
        let expect = Completion::new(vec![
            Fact::from_terms("S", vec![Term::constant("a"), Term::constant("b")]).unwrap(),
            Fact::from_terms("S", vec![Term::constant("b"), Term::constant("a")]).unwrap(),
        ])
        .unwrap();
        assert_eq!(c, expect);
    }

    #[test]
    fn apply_valuation_identity_on_ground_db() {
        let facts = vec![
            Fact::from_terms("R", vec![Term::constant("x")]).unwrap(),
            Fact::from_terms("S", vec![Term::constant("y"), Term::constant("x")]).unwrap(),
        ];
        let db =
            IncompleteDatabase::new(facts.clone(), DomainMode::PerNull(BTreeMap::new())).unwrap();
        let c = db.apply_valuation(&Valuation::from_pairs(&[])).unwrap();
        assert_eq!(c.facts(), Completion::new(facts).unwrap().facts());
    }

    #[test]
    fn apply_valuation_single_substitution() {
        let facts =
            vec![Fact::from_terms("R", vec![Term::null("x"), Term::null("x")]).unwrap()];
        let mut doms = BTreeMap::new();
        doms.insert(name("x"), Domain::from_strs(&["1"]).unwrap());
        let db = IncompleteDatabase::new(facts, DomainMode::PerNull(doms)).unwrap();
        let c = db
            .apply_valuation(&Valuation::from_pairs(&[("x", "1")]))
            .unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.contains(
            &Fact::from_terms("R", vec![Term::constant("1"), Term::constant("1")]).unwrap()
        ));
    }

    #[test]
    fn apply_valuation_errors() {
        let db = fig1_db();
        assert!(matches!(
            db.apply_valuation(&Valuation::from_pairs(&[("1", "a")])),
            Err(Error::MissingAssignment(_))
        ));
        assert!(matches!(
            db.apply_valuation(&Valuation::from_pairs(&[("1", "a"), ("2", "c")])),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn total_valuations_examples() {
        assert_eq!(fig1_db().total_valuations(), Count::from(6u32));

        let ground = IncompleteDatabase::new(
            vec![Fact::from_terms("R", vec![Term::constant("a")]).unwrap()],
            DomainMode::PerNull(BTreeMap::new()),
        )
        .unwrap();
        assert_eq!(ground.total_valuations(), Count::from(1u32));

        let facts = vec![
            Fact::from_terms("R", vec![Term::null("a"), Term::null("b"), Term::null("c")])
                .unwrap(),
        ];
        let db = IncompleteDatabase::new(
            facts,
            DomainMode::Uniform(Domain::from_strs(&["0", "1"]).unwrap()),
        )
        .unwrap();
        assert_eq!(db.total_valuations(), Count::from(8u32));
    }

    #[test]
    fn total_valuations_matches_enumeration() {
        let db = fig1_db();
        assert_eq!(
            Count::from(db.valuations().count()),
            db.total_valuations()
        );
        for v in db.valuations() {
            assert!(db.apply_valuation(&v).is_ok());
        }
    }

    #[test]
    fn codd_detection() {
        // {S(_1,_1), S(a,_2)} is not Codd: _1 occurs twice
        let facts = vec![
            Fact::from_terms("S", vec![Term::null("1"), Term::null("1")]).unwrap(),
            Fact::from_terms("S", vec![Term::constant("a"), Term::null("2")]).unwrap(),
        ];
        let db = IncompleteDatabase::new(
            facts,
            DomainMode::Uniform(Domain::from_strs(&["a", "b"]).unwrap()),
        )
        .unwrap();
        assert!(!db.is_codd());

        let ground = IncompleteDatabase::new(
            vec![Fact::from_terms("R", vec![Term::constant("a")]).unwrap()],
            DomainMode::PerNull(BTreeMap::new()),
        )
        .unwrap();
        assert!(ground.is_codd());

        // two occurrences across facts
        let facts = vec![
            Fact::from_terms("R", vec![Term::null("1")]).unwrap(),
            Fact::from_terms("S", vec![Term::null("1")]).unwrap(),
        ];
        let db = IncompleteDatabase::new(
            facts,
            DomainMode::Uniform(Domain::from_strs(&["a"]).unwrap()),
        )
        .unwrap();
        assert!(!db.is_codd());
    }

    #[test]
    fn distinct_completions_bounded_by_valuations() {
        let db = fig1_db();
        let mut seen = BTreeSet::new();
        let mut n = 0u32;
        for v in db.valuations() {
            seen.insert(db.apply_valuation(&v).unwrap());
            n += 1;
        }
        assert!(seen.len() as u32 <= n);
        assert_eq!(seen.len(), 5); // (a,a),(a,b) collide; the rest are distinct
    }

    #[test]
    fn per_null_domain_keys_must_match_occurring_nulls() {
        let facts = vec![Fact::from_terms("R", vec![Term::null("x")]).unwrap()];
        let empty = IncompleteDatabase::new(facts.clone(), DomainMode::PerNull(BTreeMap::new()));
        assert!(matches!(empty, Err(Error::Malformed(_))));

        let mut extra = BTreeMap::new();
        extra.insert(name("x"), Domain::from_strs(&["1"]).unwrap());
        extra.insert(name("y"), Domain::from_strs(&["1"]).unwrap());
        assert!(matches!(
            IncompleteDatabase::new(facts, DomainMode::PerNull(extra)),
            Err(Error::Malformed(_))
        ));
    }
}
