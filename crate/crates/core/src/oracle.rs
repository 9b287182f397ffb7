//! Ground-truth brute force: homomorphism model checking, exhaustive
//! valuation/completion counting, the bipartite-matching completion test,
//! and the small graph counters the reductions are verified against.

use std::collections::{HashMap, HashSet};

use num_traits::ToPrimitive;

use crate::combinatorics::Count;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{Completion, Fact, IncompleteDatabase, Name, Term};
use crate::query::{SjfBCQ, UnionQuery};

/// Default ceiling on exhaustively enumerated valuations.
pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

/// Ceiling for the exhaustive graph counters.
const GRAPH_NODE_CAP: usize = 10;
const GRAPH_EDGE_CAP: usize = 15;

/// True iff some disjunct has a homomorphism into the ground database.
pub fn model_check(q: &UnionQuery, db: &Completion) -> bool {
    q.disjuncts().iter().any(|d| disjunct_holds(d, db))
}

fn disjunct_holds(q: &SjfBCQ, db: &Completion) -> bool {
    let mut per_relation: HashMap<&str, Vec<&Fact>> = HashMap::new();
    for f in db.facts() {
        per_relation
            .entry(f.relation.name.as_ref())
            .or_default()
            .push(f);
    }
    let mut binding: HashMap<Name, Name> = HashMap::new();
    match_atoms(q.atoms(), 0, &per_relation, &mut binding)
}

fn match_atoms(
    atoms: &[crate::query::Atom],
    i: usize,
    per_relation: &HashMap<&str, Vec<&Fact>>,
    binding: &mut HashMap<Name, Name>,
) -> bool {
    if i == atoms.len() {
        return true;
    }
    let atom = &atoms[i];
    let Some(facts) = per_relation.get(atom.relation.name.as_ref()) else {
        return false;
    };
    'facts: for fact in facts {
        if fact.args.len() != atom.vars.len() {
            continue;
        }
        let mut bound_here: Vec<Name> = Vec::new();
        for (v, t) in atom.vars.iter().zip(&fact.args) {
            let Term::Constant(c) = t else {
                unreachable!("completions are ground")
            };
            match binding.get(v) {
                Some(existing) if existing == c => {}
                Some(_) => {
                    for b in bound_here.drain(..) {
                        binding.remove(&b);
                    }
                    continue 'facts;
                }
                None => {
                    binding.insert(v.clone(), c.clone());
                    bound_here.push(v.clone());
                }
            }
        }
        if match_atoms(atoms, i + 1, per_relation, binding) {
            return true;
        }
        for b in bound_here {
            binding.remove(&b);
        }
    }
    false
}

/// Interned view of a database used by the exhaustive counters: constants
/// become dense ids, facts become id vectors, and valuations are odometer
/// counters over the per-null domains.
struct Grounder<'a> {
    db: &'a IncompleteDatabase,
    /// interned constant names, id = index
    consts: Vec<Name>,
    /// per distinct null (in db.nulls() order): domain as constant ids
    domains: Vec<Vec<u32>>,
    /// fact templates: (relation id, slots)
    templates: Vec<(u32, Vec<Slot>)>,
    relations: Vec<Name>,
}

#[derive(Clone, Copy)]
enum Slot {
    Const(u32),
    Null(u32),
}

impl<'a> Grounder<'a> {
    fn new(db: &'a IncompleteDatabase) -> Self {
        let mut consts: Vec<Name> = Vec::new();
        let mut const_ids: HashMap<Name, u32> = HashMap::new();
        let mut intern_const = |c: &Name, consts: &mut Vec<Name>| -> u32 {
            if let Some(&i) = const_ids.get(c) {
                return i;
            }
            let i = consts.len() as u32;
            consts.push(c.clone());
            const_ids.insert(c.clone(), i);
            i
        };
        let mut relations: Vec<Name> = Vec::new();
        let mut rel_ids: HashMap<Name, u32> = HashMap::new();
        let null_index: HashMap<&Name, u32> = db
            .nulls()
            .iter()
            .enumerate()
            .map(|(i, n)| (n, i as u32))
            .collect();

        let mut templates = Vec::with_capacity(db.facts().len());
        for f in db.facts() {
            let rel = *rel_ids.entry(f.relation.name.clone()).or_insert_with(|| {
                relations.push(f.relation.name.clone());
                (relations.len() - 1) as u32
            });
            let slots = f
                .args
                .iter()
                .map(|t| match t {
                    Term::Constant(c) => Slot::Const(intern_const(c, &mut consts)),
                    Term::Null(n) => Slot::Null(null_index[n]),
                })
                .collect();
            templates.push((rel, slots));
        }
        let domains = db
            .nulls()
            .iter()
            .map(|n| {
                db.null_domain(n)
                    .expect("null has a domain")
                    .iter()
                    .map(|c| intern_const(c, &mut consts))
                    .collect()
            })
            .collect();
        Grounder {
            db,
            consts,
            domains,
            templates,
            relations,
        }
    }

    fn enumerable(&self, cap: u64) -> Result<()> {
        let total = self.db.total_valuations();
        match total.to_u64() {
            Some(t) if t <= cap => Ok(()),
            _ => Err(Error::ResourceLimit(format!(
                "{total} valuations exceed the enumeration cap of {cap}"
            ))),
        }
    }

    /// Calls `f` with each valuation (as per-null constant ids).
    fn for_each_valuation(&self, mut f: impl FnMut(&[u32])) {
        let n = self.domains.len();
        let mut counters = vec![0usize; n];
        let mut values: Vec<u32> = self.domains.iter().map(|d| d.first().copied().unwrap_or(0)).collect();
        loop {
            f(&values);
            let mut i = n;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                counters[i] += 1;
                if counters[i] < self.domains[i].len() {
                    values[i] = self.domains[i][counters[i]];
                    break;
                }
                counters[i] = 0;
                values[i] = self.domains[i][0];
            }
        }
    }

    /// Grounded facts under a valuation, sorted and deduplicated.
    fn ground(&self, values: &[u32], out: &mut Vec<(u32, Vec<u32>)>) {
        out.clear();
        for (rel, slots) in &self.templates {
            let args = slots
                .iter()
                .map(|s| match s {
                    Slot::Const(c) => *c,
                    Slot::Null(n) => values[*n as usize],
                })
                .collect();
            out.push((*rel, args));
        }
        out.sort_unstable();
        out.dedup();
    }

    /// Rebuilds a [`Completion`] from interned facts.
    fn completion(&self, grounded: &[(u32, Vec<u32>)]) -> Completion {
        let facts = grounded
            .iter()
            .map(|(rel, args)| {
                Fact::from_terms(
                    self.relations[*rel as usize].as_ref(),
                    args.iter()
                        .map(|&a| Term::Constant(self.consts[a as usize].clone()))
                        .collect(),
                )
                .expect("interned fact is well-formed")
            })
            .collect();
        Completion::new(facts).expect("grounded facts contain no nulls")
    }
}

/// Counts valuations whose completion satisfies `q` by exhaustive
/// enumeration. Fails with [`Error::ResourceLimit`] above `cap`.
pub fn brute_count_val(q: &UnionQuery, db: &IncompleteDatabase, cap: u64) -> Result<Count> {
    let g = Grounder::new(db);
    g.enumerable(cap)?;
    let mut count = Count::from(0u32);
    let mut grounded = Vec::new();
    g.for_each_valuation(|values| {
        g.ground(values, &mut grounded);
        if model_check(q, &g.completion(&grounded)) {
            count += 1u32;
        }
    });
    Ok(count)
}

/// Counts distinct completions satisfying `q` by enumerating valuations and
/// deduplicating canonical completions.
pub fn brute_count_comp(q: &UnionQuery, db: &IncompleteDatabase, cap: u64) -> Result<Count> {
    let g = Grounder::new(db);
    g.enumerable(cap)?;
    let mut seen: HashSet<Vec<(u32, Vec<u32>)>> = HashSet::new();
    let mut count = Count::from(0u32);
    let mut grounded = Vec::new();
    g.for_each_valuation(|values| {
        g.ground(values, &mut grounded);
        if !seen.contains(&grounded) {
            if model_check(q, &g.completion(&grounded)) {
                count += 1u32;
            }
            seen.insert(grounded.clone());
        }
    });
    Ok(count)
}

/// The set of distinct completions of `db`, for cross-checks at desk scale.
pub fn enumerate_completions(db: &IncompleteDatabase, cap: u64) -> Result<HashSet<Completion>> {
    let g = Grounder::new(db);
    g.enumerable(cap)?;
    let mut out = HashSet::new();
    let mut grounded = Vec::new();
    g.for_each_valuation(|values| {
        g.ground(values, &mut grounded);
        out.insert(g.completion(&grounded));
    });
    Ok(out)
}

/// Does the ground fact `g` arise from `f` under some valuation?
fn fact_matches(db: &IncompleteDatabase, f: &Fact, g: &Fact) -> bool {
    if f.relation != g.relation {
        return false;
    }
    f.args.iter().zip(&g.args).all(|(ft, gt)| {
        let Term::Constant(gc) = gt else { return false };
        match ft {
            Term::Constant(fc) => fc == gc,
            Term::Null(n) => db
                .null_domain(n)
                .map(|d| d.contains(gc))
                .unwrap_or(false),
        }
    })
}

/// Decides whether some valuation of the Codd table `db` yields exactly the
/// completion `s`, via maximum bipartite matching between the facts of `db`
/// and the ground facts of `s`.
pub fn is_completion(db: &IncompleteDatabase, s: &Completion) -> Result<bool> {
    if !db.is_codd() {
        let n = db
            .nulls()
            .iter()
            .find(|n| {
                db.facts()
                    .iter()
                    .flat_map(|f| f.nulls())
                    .filter(|m| m == n)
                    .count()
                    > 1
            })
            .expect("a non-Codd table has a repeated null");
        return Err(Error::NotCodd(n.to_string()));
    }
    // adjacency: db fact -> indices of compatible facts of s
    let mut adj: Vec<Vec<usize>> = Vec::with_capacity(db.facts().len());
    for f in db.facts() {
        let targets: Vec<usize> = s
            .facts()
            .iter()
            .enumerate()
            .filter(|(_, g)| fact_matches(db, f, g))
            .map(|(i, _)| i)
            .collect();
        if targets.is_empty() {
            // some fact of db can never land inside s
            return Ok(false);
        }
        adj.push(targets);
    }
    // maximum matching via augmenting paths (Kuhn's algorithm)
    let mut matched_right: Vec<Option<usize>> = vec![None; s.len()];
    let mut size = 0usize;
    for left in 0..adj.len() {
        let mut seen = vec![false; s.len()];
        if augment(left, &adj, &mut matched_right, &mut seen) {
            size += 1;
        }
        if size == s.len() {
            break;
        }
    }
    Ok(size == s.len())
}

fn augment(
    left: usize,
    adj: &[Vec<usize>],
    matched_right: &mut Vec<Option<usize>>,
    seen: &mut Vec<bool>,
) -> bool {
    for &r in &adj[left] {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        if matched_right[r].is_none()
            || augment(matched_right[r].unwrap(), adj, matched_right, seen)
        {
            matched_right[r] = Some(left);
            return true;
        }
    }
    false
}

fn graph_cap(g: &Graph) -> Result<()> {
    if g.node_count() > GRAPH_NODE_CAP || g.edge_count() > GRAPH_EDGE_CAP {
        return Err(Error::ResourceLimit(format!(
            "graph with {} nodes / {} edges exceeds the exhaustive-counter cap \
             ({GRAPH_NODE_CAP} nodes, {GRAPH_EDGE_CAP} edges)",
            g.node_count(),
            g.edge_count()
        )));
    }
    Ok(())
}

/// Number of proper 3-colorings.
pub fn count_3col(g: &Graph) -> Result<Count> {
    graph_cap(g)?;
    let n = g.node_count();
    let mut count = 0u64;
    let mut coloring = vec![0u8; n];
    loop {
        if g.edges().iter().all(|&(u, v)| coloring[u] != coloring[v]) {
            count += 1;
        }
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(Count::from(count));
            }
            i -= 1;
            coloring[i] += 1;
            if coloring[i] < 3 {
                break;
            }
            coloring[i] = 0;
        }
    }
}

/// Number of independent sets (the empty set included).
pub fn count_is(g: &Graph) -> Result<Count> {
    graph_cap(g)?;
    let n = g.node_count();
    let mut count = 0u64;
    for mask in 0u32..(1 << n) {
        if g.edges()
            .iter()
            .all(|&(u, v)| mask & (1 << u) == 0 || mask & (1 << v) == 0)
        {
            count += 1;
        }
    }
    Ok(Count::from(count))
}

/// Number of vertex covers.
pub fn count_vc(g: &Graph) -> Result<Count> {
    graph_cap(g)?;
    let n = g.node_count();
    let mut count = 0u64;
    for mask in 0u32..(1 << n) {
        if g.edges()
            .iter()
            .all(|&(u, v)| mask & (1 << u) != 0 || mask & (1 << v) != 0)
        {
            count += 1;
        }
    }
    Ok(Count::from(count))
}

/// Number of avoiding assignments: maps from each node to an incident edge
/// such that no edge is picked by both its endpoints. Zero when some node is
/// isolated (it has nothing to pick).
pub fn count_avoiding(g: &Graph) -> Result<Count> {
    graph_cap(g)?;
    let n = g.node_count();
    let incident: Vec<Vec<usize>> = (0..n).map(|u| g.incident_edges(u)).collect();
    if incident.iter().any(|e| e.is_empty()) {
        return Ok(Count::from(0u32));
    }
    let mut count = 0u64;
    let mut pick = vec![0usize; n];
    loop {
        let avoiding = g.edges().iter().enumerate().all(|(e, &(u, v))| {
            !(incident[u][pick[u]] == e && incident[v][pick[v]] == e)
        });
        if avoiding {
            count += 1;
        }
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(Count::from(count));
            }
            i -= 1;
            pick[i] += 1;
            if pick[i] < incident[i].len() {
                break;
            }
            pick[i] = 0;
        }
    }
}

/// Number of edge subsets S such that the subgraph induced by S is a
/// pseudoforest (every connected component has at most one cycle,
/// equivalently at most as many edges as nodes).
pub fn count_pf(g: &Graph) -> Result<Count> {
    graph_cap(g)?;
    let m = g.edge_count();
    let mut count = 0u64;
    for mask in 0u32..(1 << m) {
        if is_pseudoforest(g, mask) {
            count += 1;
        }
    }
    Ok(Count::from(count))
}

fn is_pseudoforest(g: &Graph, mask: u32) -> bool {
    let n = g.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let r = find(parent, parent[x]);
            parent[x] = r;
        }
        parent[x]
    }
    let mut edge_count = vec![0usize; n];
    let mut node_seen = vec![false; n];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if mask & (1 << e) == 0 {
            continue;
        }
        node_seen[u] = true;
        node_seen[v] = true;
        let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
        if ru != rv {
            edge_count[rv] += edge_count[ru];
            edge_count[ru] = 0;
            parent[ru] = rv;
        }
        let r = find(&mut parent, u);
        edge_count[r] += 1;
    }
    // component node counts, over nodes incident to selected edges
    let mut node_count = vec![0usize; n];
    for u in 0..n {
        if node_seen[u] {
            let r = find(&mut parent, u);
            node_count[r] += 1;
        }
    }
    (0..n).all(|r| edge_count[r] <= node_count[r])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{name, Domain, DomainMode};
    use crate::query::parse_query;
    use std::collections::BTreeMap;

    fn q(text: &str) -> UnionQuery {
        parse_query(text).unwrap()
    }

    fn ground(facts: &[(&str, &[&str])]) -> Completion {
        Completion::new(
            facts
                .iter()
                .map(|(r, args)| {
                    Fact::from_terms(r, args.iter().map(|a| Term::constant(a)).collect()).unwrap()
                })
                .collect(),
        )
        .unwrap()
    }

    fn example22() -> IncompleteDatabase {
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
    fn model_check_fig1() {
        let query = q("S(x,x)");
        assert!(model_check(
            &query,
            &ground(&[("S", &["a", "b"]), ("S", &["a", "a"])])
        ));
        assert!(!model_check(
            &query,
            &ground(&[("S", &["a", "b"]), ("S", &["b", "a"])])
        ));
        // empty relation of sig(q)
        assert!(!model_check(&q("S(x,x) & T(y)"), &ground(&[("S", &["a", "a"])])));
    }

    #[test]
    fn brute_counts_example22() {
        let db = example22();
        assert_eq!(
            brute_count_val(&q("S(x,x)"), &db, DEFAULT_ENUM_CAP).unwrap(),
            Count::from(4u32)
        );
        assert_eq!(
            brute_count_comp(&q("S(x,x)"), &db, DEFAULT_ENUM_CAP).unwrap(),
            Count::from(3u32)
        );
    }

    #[test]
    fn brute_count_on_ground_db() {
        let db = IncompleteDatabase::new(
            vec![Fact::from_terms("R", vec![Term::constant("1")]).unwrap()],
            DomainMode::PerNull(BTreeMap::new()),
        )
        .unwrap();
        assert_eq!(
            brute_count_val(&q("R(x)"), &db, DEFAULT_ENUM_CAP).unwrap(),
            Count::from(1u32)
        );
        assert_eq!(
            brute_count_comp(&q("R(x,x)" ), &IncompleteDatabase::new(
                vec![Fact::from_terms("R", vec![Term::constant("1"), Term::constant("2")]).unwrap()],
                DomainMode::PerNull(BTreeMap::new()),
            ).unwrap(), DEFAULT_ENUM_CAP).unwrap(),
            Count::from(0u32)
        );
    }

    #[test]
    fn brute_count_rxx_two_nulls() {
        let facts =
            vec![Fact::from_terms("R", vec![Term::null("a"), Term::null("b")]).unwrap()];
        let db = IncompleteDatabase::new(
            facts,
            DomainMode::Uniform(Domain::from_strs(&["0", "1"]).unwrap()),
        )
        .unwrap();
        assert_eq!(
            brute_count_val(&q("R(x,x)"), &db, DEFAULT_ENUM_CAP).unwrap(),
            Count::from(2u32) // (0,0) and (1,1)
        );
    }

    #[test]
    fn enumeration_cap_respected() {
        let db = example22();
        assert!(matches!(
            brute_count_val(&q("S(x,x)"), &db, 5),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn is_completion_examples() {
        let mut doms = BTreeMap::new();
        doms.insert(name("a"), Domain::from_strs(&["1", "2"]).unwrap());
        let db = IncompleteDatabase::new(
            vec![Fact::from_terms("R", vec![Term::null("a")]).unwrap()],
            DomainMode::PerNull(doms),
        )
        .unwrap();
        assert!(is_completion(&db, &ground(&[("R", &["1"])])).unwrap());
        assert!(!is_completion(&db, &ground(&[("R", &["1"]), ("R", &["2"])])).unwrap());
        assert!(!is_completion(&db, &ground(&[("R", &["3"])])).unwrap());
    }

    #[test]
    fn is_completion_requires_codd() {
        let facts = vec![
            Fact::from_terms("R", vec![Term::null("a"), Term::null("a")]).unwrap(),
        ];
        let db = IncompleteDatabase::new(
            facts,
            DomainMode::Uniform(Domain::from_strs(&["1"]).unwrap()),
        )
        .unwrap();
        assert!(matches!(
            is_completion(&db, &ground(&[("R", &["1", "1"])])),
            Err(Error::NotCodd(_))
        ));
    }

    #[test]
    fn graph_counter_examples() {
        let k3 = Graph::complete(3);
        assert_eq!(count_is(&k3).unwrap(), Count::from(4u32));
        assert_eq!(count_3col(&k3).unwrap(), Count::from(6u32));
        let edge = Graph::complete(2);
        assert_eq!(count_vc(&edge).unwrap(), Count::from(3u32));
        assert_eq!(count_pf(&edge).unwrap(), Count::from(2u32));
        assert_eq!(count_avoiding(&edge).unwrap(), Count::from(0u32));
        // two disjoint edges: each node picks its only edge; both edges doubly
        // picked, never avoiding
        let two = Graph::with_nodes(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(count_avoiding(&two).unwrap(), Count::from(0u32));
        // path of length 2: the endpoints' picks are forced, so whichever side
        // the middle node picks is doubly picked
        let path = Graph::with_nodes(3, vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(count_avoiding(&path).unwrap(), Count::from(0u32));
        // triangle: 8 assignments, 2 of them avoiding (hand enumeration)
        assert_eq!(count_avoiding(&k3).unwrap(), Count::from(2u32));
    }

    #[test]
    fn is_equals_vc_by_complementation() {
        for (n, edges) in [
            (3usize, vec![(0, 1), (1, 2)]),
            (4, vec![(0, 1), (1, 2), (2, 3), (3, 0)]),
            (5, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]),
        ] {
            let g = Graph::with_nodes(n, edges).unwrap();
            assert_eq!(count_is(&g).unwrap(), count_vc(&g).unwrap());
        }
    }
}
