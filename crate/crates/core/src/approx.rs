//! Randomized (epsilon, delta) estimation of valuation counts for unions of
//! BCQs, by union-of-events sampling in the Karp-Luby style.
//!
//! An event is one way a disjunct can match: an assignment of its atoms to
//! same-relation facts whose unification succeeds. The event fixes a
//! partition of some nulls into classes, each constrained to a value set (a
//! domain intersection, possibly cut down to a single forced constant); a
//! valuation satisfies the query iff it lies in at least one event. Sampling
//! (event, valuation-in-event) pairs and counting those where the event is
//! the least index containing the valuation estimates the union size.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::combinatorics::Count;
use crate::error::{Error, Result};
use crate::model::{IncompleteDatabase, Name, Term, Valuation};
use crate::query::UnionQuery;
use crate::rng::SplitMix64;

/// Hard ceiling on the number of events; the event count grows with
/// |db|^(atoms of the largest disjunct).
pub const EVENT_CAP: usize = 10_000_000;

/// One satisfied-match event: nulls merged by unification, each class
/// restricted to the values consistent with the match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    /// which disjunct this event came from
    pub disjunct: usize,
    /// per atom of the disjunct, the index of the matched fact within
    /// `db.facts()`
    pub fact_choice: Vec<usize>,
    /// merged null classes; every class has a nonempty value set
    pub classes: Vec<EventClass>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventClass {
    /// sorted member nulls
    pub nulls: Vec<Name>,
    /// sorted allowed values (domain intersection, possibly forced)
    pub values: Vec<Name>,
}

impl Event {
    /// Does the valuation lie in this event?
    pub fn contains(&self, v: &Valuation) -> bool {
        self.classes.iter().all(|class| {
            let Some(first) = v.get(&class.nulls[0]) else {
                return false;
            };
            if class.values.binary_search(first).is_err() {
                return false;
            }
            class.nulls[1..].iter().all(|n| v.get(n) == Some(first))
        })
    }
}

/// Number of valuations in the event: the product of class value-set sizes
/// times the domain sizes of the unconstrained nulls.
pub fn event_size(e: &Event, db: &IncompleteDatabase) -> Count {
    let mut size = Count::from(1u32);
    let mut constrained: BTreeMap<&Name, ()> = BTreeMap::new();
    for class in &e.classes {
        size *= Count::from(class.values.len());
        for n in &class.nulls {
            constrained.insert(n, ());
        }
    }
    for n in db.nulls() {
        if !constrained.contains_key(n) {
            size *= Count::from(db.null_domain(n).expect("null has a domain").len());
        }
    }
    size
}

/// Enumerates the events of `q` over `db`: for every disjunct and every
/// assignment of its atoms to same-relation facts, the unification of the
/// query variables against the facts' terms, kept when consistent.
pub fn enumerate_events(q: &UnionQuery, db: &IncompleteDatabase) -> Result<Vec<Event>> {
    let mut events = Vec::new();
    for (di, disjunct) in q.disjuncts().iter().enumerate() {
        // candidate facts per atom
        let per_atom: Vec<Vec<usize>> = disjunct
            .atoms()
            .iter()
            .map(|a| {
                db.facts()
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| {
                        f.relation.name == a.relation.name && f.relation.arity == a.vars.len()
                    })
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        if per_atom.iter().any(|c| c.is_empty()) {
            continue;
        }
        let mut choice = vec![0usize; per_atom.len()];
        loop {
            if let Some(event) = unify(disjunct, db, di, &choice, &per_atom) {
                events.push(event);
                if events.len() > EVENT_CAP {
                    return Err(Error::ResourceLimit(format!(
                        "more than {EVENT_CAP} events"
                    )));
                }
            }
            // odometer over fact choices
            let mut i = per_atom.len();
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                choice[i] += 1;
                if choice[i] < per_atom[i].len() {
                    break;
                }
                choice[i] = 0;
            }
            if choice.iter().all(|&c| c == 0) {
                break;
            }
        }
    }
    Ok(events)
}

/// Union-find unification of one atom-to-fact assignment.
fn unify(
    disjunct: &crate::query::SjfBCQ,
    db: &IncompleteDatabase,
    di: usize,
    choice: &[usize],
    per_atom: &[Vec<usize>],
) -> Option<Event> {
    // union-find over nulls, with a forced constant per root
    let mut parent: BTreeMap<Name, Name> = BTreeMap::new();
    let mut forced: BTreeMap<Name, Name> = BTreeMap::new();
    fn find(parent: &mut BTreeMap<Name, Name>, x: &Name) -> Name {
        let p = match parent.get(x) {
            None => {
                parent.insert(x.clone(), x.clone());
                return x.clone();
            }
            Some(p) => p.clone(),
        };
        if p == *x {
            return p;
        }
        let root = find(parent, &p);
        parent.insert(x.clone(), root.clone());
        root
    }

    // per variable of the disjunct: merge the terms at its positions
    let mut var_root: BTreeMap<&Name, (Option<Name>, Option<Name>)> = BTreeMap::new();
    // value = (representative null class, forced constant)
    for (ai, atom) in disjunct.atoms().iter().enumerate() {
        let fact = &db.facts()[per_atom[ai][choice[ai]]];
        for (v, t) in atom.vars.iter().zip(&fact.args) {
            let entry = var_root.entry(v).or_insert((None, None));
            match t {
                Term::Constant(c) => match &entry.1 {
                    None => entry.1 = Some(c.clone()),
                    Some(existing) if existing == c => {}
                    Some(_) => return None, // two distinct constants for one variable
                },
                Term::Null(n) => {
                    let root = find(&mut parent, n);
                    match &entry.0 {
                        None => entry.0 = Some(root),
                        Some(existing) => {
                            let existing_root = find(&mut parent, existing);
                            if existing_root != root {
                                parent.insert(existing_root.clone(), root.clone());
                                // merge forced constants
                                if let Some(c) = forced.remove(&existing_root) {
                                    match forced.get(&root) {
                                        None => {
                                            forced.insert(root.clone(), c);
                                        }
                                        Some(other) if *other == c => {}
                                        Some(_) => return None,
                                    }
                                }
                            }
                            entry.0 = Some(root);
                        }
                    }
                }
            }
        }
    }
    // attach variable-level forced constants to the null classes
    for (_, (root, constant)) in var_root {
        if let (Some(root), Some(c)) = (root.as_ref(), constant) {
            let r = find(&mut parent, root);
            match forced.get(&r) {
                None => {
                    forced.insert(r, c);
                }
                Some(existing) if *existing == c => {}
                Some(_) => return None,
            }
        }
        // a variable with only constants and no nulls constrains nothing
    }

    // gather classes
    let mut members: BTreeMap<Name, Vec<Name>> = BTreeMap::new();
    let keys: Vec<Name> = parent.keys().cloned().collect();
    for n in keys {
        let r = find(&mut parent, &n);
        members.entry(r).or_default().push(n);
    }
    let mut classes = Vec::new();
    for (root, mut nulls) in members {
        nulls.sort();
        let mut values: Vec<Name> = db
            .null_domain(&nulls[0])
            .expect("null has a domain")
            .as_slice()
            .to_vec();
        for n in &nulls[1..] {
            let dom = db.null_domain(n).expect("null has a domain");
            values.retain(|x| dom.contains(x));
        }
        if let Some(c) = forced.get(&root) {
            values.retain(|x| x == c);
        }
        if values.is_empty() {
            return None;
        }
        classes.push(EventClass { nulls, values });
    }
    classes.sort_by(|a, b| a.nulls.cmp(&b.nulls));
    Some(Event {
        disjunct: di,
        fact_choice: choice.to_vec(),
        classes,
    })
}

/// Result of one estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub estimate: Count,
    pub epsilon: f64,
    pub delta: f64,
    pub samples: u64,
    pub seed: u64,
}

impl EstimateReport {
    pub fn to_json(&self) -> Value {
        json!({
            "estimate": self.estimate.to_string(),
            "epsilon": self.epsilon,
            "delta": self.delta,
            "samples": self.samples,
            "seed": self.seed,
        })
    }
}

/// Karp-Luby estimator for the number of satisfying valuations.
///
/// With H events of total size W, runs `m = ceil(8 H ln(2/delta) / eps^2)`
/// trials: draw an event with probability proportional to its size, a
/// valuation uniformly inside it, and count the trial a success when the
/// drawn event is the least-index event containing the valuation. The
/// estimate is `W * successes / m`, rounded to nearest. Deterministic for a
/// fixed (seed, worker count).
pub fn karp_luby_estimate(
    q: &UnionQuery,
    db: &IncompleteDatabase,
    epsilon: f64,
    delta: f64,
    seed: u64,
    workers: usize,
) -> Result<EstimateReport> {
    if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidTolerance);
    }
    let workers = workers.max(1);
    let events = enumerate_events(q, db)?;
    let h = events.len();
    if h == 0 {
        return Ok(EstimateReport {
            estimate: Count::zero(),
            epsilon,
            delta,
            samples: 0,
            seed,
        });
    }
    let sizes: Vec<Count> = events.iter().map(|e| event_size(e, db)).collect();
    let mut prefix: Vec<Count> = Vec::with_capacity(h);
    let mut acc = Count::zero();
    for s in &sizes {
        acc += s;
        prefix.push(acc.clone());
    }
    let total_weight = acc;

    let m = ((8.0 * h as f64 * (2.0 / delta).ln()) / (epsilon * epsilon)).ceil() as u64;
    let m = m.max(1);

    // split trials across workers; worker w handles trials with
    // index % workers == w, each from its own derived generator
    let per_worker: Vec<u64> = (0..workers as u64)
        .map(|w| m / workers as u64 + u64::from(w < m % workers as u64))
        .collect();
    let run_worker = |w: usize| -> u64 {
        let mut rng = SplitMix64::for_worker(seed, w as u64);
        let mut successes = 0u64;
        for _ in 0..per_worker[w] {
            let pick = rng.below_big(&total_weight);
            let ei = prefix.partition_point(|p| *p <= pick);
            let valuation = sample_in_event(&events[ei], db, &mut rng);
            let least = events
                .iter()
                .position(|e| e.contains(&valuation))
                .expect("the drawn event contains the valuation");
            if least == ei {
                successes += 1;
            }
        }
        successes
    };

    let successes: u64 = if workers == 1 {
        run_worker(0)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| scope.spawn(move || run_worker(w)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker")).sum()
        })
    };

    // estimate = round(W * successes / m)
    let numerator = total_weight * Count::from(successes) * Count::from(2u32)
        + Count::from(m);
    let estimate = numerator / (Count::from(m) * Count::from(2u32));
    Ok(EstimateReport {
        estimate,
        epsilon,
        delta,
        samples: m,
        seed,
    })
}

/// Uniform valuation inside an event: classes uniform over their value sets,
/// unconstrained nulls uniform over their domains. Draws follow the sorted
/// null order of the database for reproducibility.
fn sample_in_event(e: &Event, db: &IncompleteDatabase, rng: &mut SplitMix64) -> Valuation {
    let mut class_of: BTreeMap<&Name, usize> = BTreeMap::new();
    for (ci, class) in e.classes.iter().enumerate() {
        for n in &class.nulls {
            class_of.insert(n, ci);
        }
    }
    let mut chosen: Vec<Option<Name>> = vec![None; e.classes.len()];
    let mut assignment = BTreeMap::new();
    for n in db.nulls() {
        let value = match class_of.get(n) {
            Some(&ci) => chosen[ci]
                .get_or_insert_with(|| {
                    let vals = &e.classes[ci].values;
                    vals[rng.below_usize(vals.len())].clone()
                })
                .clone(),
            None => {
                let dom = db.null_domain(n).expect("null has a domain");
                dom.get(rng.below_usize(dom.len())).clone()
            }
        };
        assignment.insert(n.clone(), value);
    }
    Valuation::new(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{name, Domain, DomainMode, Fact};
    use crate::oracle::{brute_count_val, DEFAULT_ENUM_CAP};
    use crate::query::parse_query;

    fn uniform(facts: Vec<Fact>, dom: &[&str]) -> IncompleteDatabase {
        IncompleteDatabase::new(facts, DomainMode::Uniform(Domain::from_strs(dom).unwrap()))
            .unwrap()
    }

    #[test]
    fn event_enumeration_examples() {
        // R(_a,_a): one event with an unconstrained class
        let db = uniform(
            vec![Fact::from_terms("R", vec![Term::null("a"), Term::null("a")]).unwrap()],
            &["1", "2", "3"],
        );
        let q = parse_query("R(x,x)").unwrap();
        let events = enumerate_events(&q, &db).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(event_size(&events[0], &db), Count::from(3u32));

        // R(1,2): unification fails
        let db = uniform(
            vec![Fact::from_terms("R", vec![Term::constant("1"), Term::constant("2")]).unwrap()],
            &["1", "2"],
        );
        assert!(enumerate_events(&q, &db).unwrap().is_empty());

        // R(_a) & S(_b): one event with the merged class {_a,_b}
        let db = uniform(
            vec![
                Fact::from_terms("R", vec![Term::null("a")]).unwrap(),
                Fact::from_terms("S", vec![Term::null("b")]).unwrap(),
            ],
            &["1", "2"],
        );
        let q = parse_query("R(x) & S(x)").unwrap();
        let events = enumerate_events(&q, &db).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].classes.len(), 1);
        assert_eq!(events[0].classes[0].nulls.len(), 2);
        assert_eq!(event_size(&events[0], &db), Count::from(2u32));
    }

    #[test]
    fn event_size_with_forced_constant() {
        // S(1,_b): event for S(x,y)&T(y) ... simpler: R(1,_b) vs R(x,x)
        // forces _b = 1
        let db = uniform(
            vec![Fact::from_terms("R", vec![Term::constant("1"), Term::null("b")]).unwrap()],
            &["1", "2", "3", "4"],
        );
        let q = parse_query("R(x,x)").unwrap();
        let events = enumerate_events(&q, &db).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(event_size(&events[0], &db), Count::from(1u32));
    }

    #[test]
    fn intersection_class_size() {
        // class {_a,_b} with dom(_a)={1,2}, dom(_b)={2,3}: intersection {2}
        let mut doms = std::collections::BTreeMap::new();
        doms.insert(name("a"), Domain::from_strs(&["1", "2"]).unwrap());
        doms.insert(name("b"), Domain::from_strs(&["2", "3"]).unwrap());
        let db = IncompleteDatabase::new(
            vec![
                Fact::from_terms("R", vec![Term::null("a")]).unwrap(),
                Fact::from_terms("S", vec![Term::null("b")]).unwrap(),
            ],
            DomainMode::PerNull(doms),
        )
        .unwrap();
        let q = parse_query("R(x) & S(x)").unwrap();
        let events = enumerate_events(&q, &db).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(event_size(&events[0], &db), Count::from(1u32));
    }

    #[test]
    fn membership_matches_model_checking() {
        let db = uniform(
            vec![
                Fact::from_terms("R", vec![Term::null("a"), Term::null("b")]).unwrap(),
                Fact::from_terms("S", vec![Term::null("c")]).unwrap(),
                Fact::from_terms("R", vec![Term::constant("1"), Term::null("d")]).unwrap(),
            ],
            &["1", "2"],
        );
        let q = parse_query("R(x,y) & S(x) | R(z,z)").unwrap();
        let events = enumerate_events(&q, &db).unwrap();
        for v in db.valuations() {
            let in_some = events.iter().any(|e| e.contains(&v));
            let completion = db.apply_valuation(&v).unwrap();
            assert_eq!(in_some, crate::oracle::model_check(&q, &completion));
        }
    }

    #[test]
    fn single_event_estimate_is_exact() {
        let db = uniform(
            vec![Fact::from_terms("R", vec![Term::null("a"), Term::null("a")]).unwrap()],
            &["1", "2", "3"],
        );
        let q = parse_query("R(x,x)").unwrap();
        let report = karp_luby_estimate(&q, &db, 0.5, 0.25, 7, 1).unwrap();
        assert_eq!(report.estimate, Count::from(3u32));
    }

    #[test]
    fn empty_event_set_estimates_zero() {
        let db = uniform(
            vec![Fact::from_terms("R", vec![Term::constant("1"), Term::constant("2")]).unwrap()],
            &["1", "2"],
        );
        let q = parse_query("R(x,x)").unwrap();
        let report = karp_luby_estimate(&q, &db, 0.5, 0.25, 7, 1).unwrap();
        assert_eq!(report.estimate, Count::zero());
        assert_eq!(report.samples, 0);
    }

    #[test]
    fn reproducible_for_fixed_seed_and_workers() {
        let db = uniform(
            vec![
                Fact::from_terms("R", vec![Term::null("a"), Term::null("b")]).unwrap(),
                Fact::from_terms("S", vec![Term::null("c")]).unwrap(),
            ],
            &["1", "2"],
        );
        let q = parse_query("R(x,y) & S(y)").unwrap();
        let a = karp_luby_estimate(&q, &db, 0.2, 0.25, 99, 2).unwrap();
        let b = karp_luby_estimate(&q, &db, 0.2, 0.25, 99, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sandwich_bounds_hold() {
        let db = uniform(
            vec![
                Fact::from_terms("R", vec![Term::null("a"), Term::null("b")]).unwrap(),
                Fact::from_terms("R", vec![Term::null("b"), Term::null("c")]).unwrap(),
                Fact::from_terms("S", vec![Term::null("c")]).unwrap(),
            ],
            &["1", "2"],
        );
        let q = parse_query("R(x,y) & S(y)").unwrap();
        let events = enumerate_events(&q, &db).unwrap();
        let truth = brute_count_val(&q, &db, DEFAULT_ENUM_CAP).unwrap();
        let sizes: Vec<Count> = events.iter().map(|e| event_size(e, &db)).collect();
        let max = sizes.iter().max().unwrap();
        let sum: Count = sizes.iter().fold(Count::zero(), |a, s| a + s);
        assert!(*max <= truth && truth <= sum);
    }
}
