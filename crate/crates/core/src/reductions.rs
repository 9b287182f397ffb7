//! Constructors for the graph reductions, each paired with the exact
//! counting identity it certifies. These double as a high-value
//! cross-validation surface: the identity ties a brute-force graph count to
//! a brute-force database count, so every encoder is self-verifying.
//!
//! Fresh constants use the reserved `@fresh...` names and composite names
//! use `@` as a separator; graph node names cannot contain `@`, so there are
//! no collisions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::combinatorics::{factorial, pow, surj, Count};
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, Graph};
use crate::model::{name, Domain, DomainMode, Fact, IncompleteDatabase, Name, Term};
use crate::oracle::brute_count_val;
use crate::query::{parse_query, Problem, SjfBCQ, UnionQuery};

/// An encoded database together with the query, the counting problem, and
/// the identity tying the count to a graph invariant.
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    pub db: IncompleteDatabase,
    pub query: SjfBCQ,
    pub problem: Problem,
    pub identity: CountIdentity,
}

/// Which graph quantity the identity speaks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphInvariant {
    ThreeColorings,
    IndependentSets,
    VertexCovers,
    AvoidingAssignments,
    Pseudoforests,
    /// the 3-colorability flag, via the 7-vs-8 completions gadget
    ThreeColorability,
}

impl GraphInvariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            GraphInvariant::ThreeColorings => "threeColorings",
            GraphInvariant::IndependentSets => "independentSets",
            GraphInvariant::VertexCovers => "vertexCovers",
            GraphInvariant::AvoidingAssignments => "avoidingAssignments",
            GraphInvariant::Pseudoforests => "pseudoforests",
            GraphInvariant::ThreeColorability => "threeColorability",
        }
    }
}

/// How the database count and the graph invariant determine each other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IdentityForm {
    /// invariant = count
    Equal,
    /// invariant = base - scale * count
    BaseMinusScaled { base: Count, scale: Count },
    /// invariant = count - offset
    CountMinusOffset { offset: Count },
    /// count = 8 when the invariant (number of 3-colorings) is positive,
    /// 7 otherwise
    EightIfColorableElseSeven,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountIdentity {
    pub kind: &'static str,
    pub invariant: GraphInvariant,
    pub form: IdentityForm,
}

impl CountIdentity {
    /// Does `(count on the database, graph invariant)` satisfy the identity?
    pub fn holds(&self, count: &Count, invariant: &Count) -> bool {
        match &self.form {
            IdentityForm::Equal => count == invariant,
            IdentityForm::BaseMinusScaled { base, scale } => {
                BigInt::from(invariant.clone())
                    == BigInt::from(base.clone()) - BigInt::from(scale * count)
            }
            IdentityForm::CountMinusOffset { offset } => {
                BigInt::from(invariant.clone())
                    == BigInt::from(count.clone()) - BigInt::from(offset.clone())
            }
            IdentityForm::EightIfColorableElseSeven => {
                if invariant.is_zero() {
                    *count == Count::from(7u32)
                } else {
                    *count == Count::from(8u32)
                }
            }
        }
    }
}

impl ReductionInstance {
    /// Canonical JSON descriptor written next to the encoded database.
    pub fn identity_json(&self) -> Value {
        let side_factors = match &self.identity.form {
            IdentityForm::Equal => json!({}),
            IdentityForm::BaseMinusScaled { base, scale } => json!({
                "base": base.to_string(),
                "scale": scale.to_string(),
            }),
            IdentityForm::CountMinusOffset { offset } => json!({
                "offset": offset.to_string(),
            }),
            IdentityForm::EightIfColorableElseSeven => json!({
                "colorable": "8",
                "notColorable": "7",
            }),
        };
        json!({
            "kind": self.identity.kind,
            "graphInvariant": self.identity.invariant.as_str(),
            "problem": self.problem.as_str(),
            "query": self.query.to_string(),
            "sideFactors": side_factors,
        })
    }
}

fn single_query(text: &str) -> SjfBCQ {
    parse_query(text)
        .expect("reduction query parses")
        .as_single()
        .expect("reduction query is one conjunct")
        .clone()
}

/// Facts `R(null_u, null_v)` in both directions for every edge, uniform
/// domain {1,2,3}: the valuations violating `R(x,x)` are the 3-colorings of
/// the non-isolated part, so `#3col(G) = 3^|V| - 3^iso * #Val`.
pub fn encode_3col(g: &Graph) -> ReductionInstance {
    let mut facts = Vec::new();
    for &(u, v) in g.edges() {
        let nu = Term::Null(g.node_name(u).clone());
        let nv = Term::Null(g.node_name(v).clone());
        facts.push(Fact::from_terms("R", vec![nu.clone(), nv.clone()]).expect("arity 2"));
        facts.push(Fact::from_terms("R", vec![nv, nu]).expect("arity 2"));
    }
    let db = IncompleteDatabase::new(
        facts,
        DomainMode::Uniform(Domain::from_strs(&["1", "2", "3"]).expect("nonempty")),
    )
    .expect("well-formed encoding");
    let iso = g.isolated_nodes().len() as u64;
    ReductionInstance {
        db,
        query: single_query("R(x,x)"),
        problem: Problem::Valuations,
        identity: CountIdentity {
            kind: "3col",
            invariant: GraphInvariant::ThreeColorings,
            form: IdentityForm::BaseMinusScaled {
                base: pow(3, g.node_count() as u64),
                scale: pow(3, iso),
            },
        },
    }
}

fn encode_is_shared(g: &Graph, rel: &str) -> Vec<Fact> {
    let mut facts = Vec::new();
    for &(u, v) in g.edges() {
        let nu = Term::Null(g.node_name(u).clone());
        let nv = Term::Null(g.node_name(v).clone());
        facts.push(Fact::from_terms(rel, vec![nu.clone(), nv.clone()]).expect("arity 2"));
        facts.push(Fact::from_terms(rel, vec![nv, nu]).expect("arity 2"));
    }
    facts
}

/// Edge facts over `S` in both directions plus `R(1)` and `T(1)`, uniform
/// domain {0,1}: a valuation satisfies `R(x) & S(x,y) & T(y)` exactly when
/// the set of nulls sent to 1 is not independent, so
/// `#IS(G) = 2^|V| - 2^iso * #Val`.
pub fn encode_is_path(g: &Graph) -> ReductionInstance {
    let mut facts = encode_is_shared(g, "S");
    facts.push(Fact::from_terms("R", vec![Term::constant("1")]).expect("arity 1"));
    facts.push(Fact::from_terms("T", vec![Term::constant("1")]).expect("arity 1"));
    let db = IncompleteDatabase::new(
        facts,
        DomainMode::Uniform(Domain::from_strs(&["0", "1"]).expect("nonempty")),
    )
    .expect("well-formed encoding");
    let iso = g.isolated_nodes().len() as u64;
    ReductionInstance {
        db,
        query: single_query("R(x) & S(x,y) & T(y)"),
        problem: Problem::Valuations,
        identity: CountIdentity {
            kind: "is-path",
            invariant: GraphInvariant::IndependentSets,
            form: IdentityForm::BaseMinusScaled {
                base: pow(2, g.node_count() as u64),
                scale: pow(2, iso),
            },
        },
    }
}

/// Same encoding with the fact `R(1,1)` and the query `R(x,y) & S(x,y)`.
pub fn encode_is_rxysxy(g: &Graph) -> ReductionInstance {
    let mut facts = encode_is_shared(g, "S");
    facts.push(
        Fact::from_terms("R", vec![Term::constant("1"), Term::constant("1")]).expect("arity 2"),
    );
    let db = IncompleteDatabase::new(
        facts,
        DomainMode::Uniform(Domain::from_strs(&["0", "1"]).expect("nonempty")),
    )
    .expect("well-formed encoding");
    let iso = g.isolated_nodes().len() as u64;
    ReductionInstance {
        db,
        query: single_query("R(x,y) & S(x,y)"),
        problem: Problem::Valuations,
        identity: CountIdentity {
            kind: "is-rxysxy",
            invariant: GraphInvariant::IndependentSets,
            form: IdentityForm::BaseMinusScaled {
                base: pow(2, g.node_count() as u64),
                scale: pow(2, iso),
            },
        },
    }
}

/// Codd table over a unary relation whose completions are the vertex covers:
/// per edge a null over its endpoints, per node a null over {node, fresh},
/// plus the fresh ground fact.
pub fn encode_vc(g: &Graph) -> ReductionInstance {
    let fresh = name("@fresh0");
    let mut doms: BTreeMap<Name, Domain> = BTreeMap::new();
    let mut facts = Vec::new();
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let n = name(&format!("e@{e}"));
        doms.insert(
            n.clone(),
            Domain::new([g.node_name(u).clone(), g.node_name(v).clone()]).expect("two nodes"),
        );
        facts.push(Fact::from_terms("R", vec![Term::Null(n)]).expect("arity 1"));
    }
    for u in 0..g.node_count() {
        let n = name(&format!("v@{}", g.node_name(u)));
        doms.insert(
            n.clone(),
            Domain::new([g.node_name(u).clone(), fresh.clone()]).expect("two values"),
        );
        facts.push(Fact::from_terms("R", vec![Term::Null(n)]).expect("arity 1"));
    }
    facts.push(Fact::from_terms("R", vec![Term::Constant(fresh)]).expect("arity 1"));
    let db = IncompleteDatabase::new(facts, DomainMode::PerNull(doms))
        .expect("well-formed encoding");
    debug_assert!(db.is_codd());
    ReductionInstance {
        db,
        query: single_query("R(x)"),
        problem: Problem::Completions,
        identity: CountIdentity {
            kind: "vc",
            invariant: GraphInvariant::VertexCovers,
            form: IdentityForm::Equal,
        },
    }
}

/// Uniform naive table over a binary relation with
/// `#Comp = 2^|V| + #IS(G)`: per node the fact `R(node, null_node)`, edge
/// facts in both directions, the three ground facts over {0,1} other than
/// `R(1,1)`, and one doubled fresh null.
pub fn encode_is_comp_uniform(g: &Graph) -> ReductionInstance {
    let mut facts = Vec::new();
    for u in 0..g.node_count() {
        let c = Term::constant(&format!("n@{}", g.node_name(u)));
        facts.push(
            Fact::from_terms("R", vec![c, Term::Null(g.node_name(u).clone())]).expect("arity 2"),
        );
    }
    facts.extend(encode_is_shared(g, "R"));
    for (a, b) in [("0", "0"), ("0", "1"), ("1", "0")] {
        facts
            .push(Fact::from_terms("R", vec![Term::constant(a), Term::constant(b)]).expect("ok"));
    }
    let aux = name("aux@0");
    facts.push(
        Fact::from_terms("R", vec![Term::Null(aux.clone()), Term::Null(aux)]).expect("arity 2"),
    );
    let db = IncompleteDatabase::new(
        facts,
        DomainMode::Uniform(Domain::from_strs(&["0", "1"]).expect("nonempty")),
    )
    .expect("well-formed encoding");
    ReductionInstance {
        db,
        query: single_query("R(x,x)"),
        problem: Problem::Completions,
        identity: CountIdentity {
            kind: "is-comp-uniform",
            invariant: GraphInvariant::IndependentSets,
            form: IdentityForm::CountMinusOffset {
                offset: pow(2, g.node_count() as u64),
            },
        },
    }
}

/// The 7-vs-8 completions gadget: encoding facts for the edges, the ground
/// triangle over {1,2,3}, three doubled pairs of fresh nulls, and a fresh
/// self-loop constant. The database has 8 completions when the graph is
/// 3-colorable and 7 otherwise.
pub fn encode_gadget_3col(g: &Graph) -> ReductionInstance {
    let mut facts = encode_is_shared(g, "R");
    for (a, b) in [("1", "2"), ("2", "1"), ("2", "3"), ("3", "2"), ("1", "3"), ("3", "1")] {
        facts
            .push(Fact::from_terms("R", vec![Term::constant(a), Term::constant(b)]).expect("ok"));
    }
    for i in 0..3 {
        let x = Term::null(&format!("aux@{}", 2 * i));
        let y = Term::null(&format!("aux@{}", 2 * i + 1));
        facts.push(Fact::from_terms("R", vec![x.clone(), y.clone()]).expect("arity 2"));
        facts.push(Fact::from_terms("R", vec![y, x]).expect("arity 2"));
    }
    let fresh = Term::constant("@fresh0");
    facts.push(Fact::from_terms("R", vec![fresh.clone(), fresh]).expect("arity 2"));
    let db = IncompleteDatabase::new(
        facts,
        DomainMode::Uniform(Domain::from_strs(&["1", "2", "3"]).expect("nonempty")),
    )
    .expect("well-formed encoding");
    ReductionInstance {
        db,
        query: single_query("R(x,x)"),
        problem: Problem::Completions,
        identity: CountIdentity {
            kind: "gadget",
            invariant: GraphInvariant::ThreeColorability,
            form: IdentityForm::EightIfColorableElseSeven,
        },
    }
}

/// Codd table over two unary relations with per-node nulls ranging over the
/// incident edges: the satisfying valuations are the non-avoiding
/// assignments, so `#avoiding(G) = prod_t |E(t)| - #Val`.
pub fn encode_avoidance(g: &BipartiteGraph) -> Result<ReductionInstance> {
    let graph = g.to_graph();
    let mut base = Count::one();
    for u in 0..graph.node_count() {
        if graph.degree(u) == 0 {
            return Err(Error::IsolatedNode(graph.node_name(u).to_string()));
        }
        base *= Count::from(graph.degree(u));
    }
    let edge_const = |l: usize, r: usize| -> Name {
        name(&format!("{}@{}", g.left()[l], g.right()[r]))
    };
    let mut doms: BTreeMap<Name, Domain> = BTreeMap::new();
    let mut facts = Vec::new();
    for (side, rel) in [(g.left(), "R"), (g.right(), "S")] {
        for node in side {
            facts.push(Fact::from_terms(rel, vec![Term::Null(node.clone())]).expect("arity 1"));
        }
    }
    for (li, l) in g.left().iter().enumerate() {
        let incident: Vec<Name> = g
            .edges()
            .iter()
            .filter(|(a, _)| *a == li)
            .map(|&(a, b)| edge_const(a, b))
            .collect();
        doms.insert(l.clone(), Domain::new(incident).expect("no isolated nodes"));
    }
    for (ri, r) in g.right().iter().enumerate() {
        let incident: Vec<Name> = g
            .edges()
            .iter()
            .filter(|(_, b)| *b == ri)
            .map(|&(a, b)| edge_const(a, b))
            .collect();
        doms.insert(r.clone(), Domain::new(incident).expect("no isolated nodes"));
    }
    let db = IncompleteDatabase::new(facts, DomainMode::PerNull(doms))
        .expect("well-formed encoding");
    debug_assert!(db.is_codd());
    Ok(ReductionInstance {
        db,
        query: single_query("R(x) & S(x)"),
        problem: Problem::Valuations,
        identity: CountIdentity {
            kind: "avoidance",
            invariant: GraphInvariant::AvoidingAssignments,
            form: IdentityForm::BaseMinusScaled {
                base,
                scale: Count::one(),
            },
        },
    })
}

/// Uniform Codd table over a binary relation whose completions are the
/// induced pseudoforests: complementary facts for all ordered non-edges,
/// `R(u, null_u)` on the left, `R(null_v, v)` on the right, and a fresh
/// ground self-loop.
pub fn encode_pseudoforest(g: &BipartiteGraph) -> ReductionInstance {
    let fresh = name("@fresh0");
    let all: Vec<Name> = g.left().iter().chain(g.right().iter()).cloned().collect();
    let mut facts = Vec::new();
    for t in &all {
        for t2 in &all {
            let is_edge = g
                .left()
                .iter()
                .position(|x| x == t)
                .and_then(|li| g.right().iter().position(|y| y == t2).map(|ri| (li, ri)))
                .map(|(li, ri)| g.has_edge(li, ri))
                .unwrap_or(false);
            if !is_edge {
                facts.push(
                    Fact::from_terms(
                        "R",
                        vec![Term::Constant(t.clone()), Term::Constant(t2.clone())],
                    )
                    .expect("arity 2"),
                );
            }
        }
    }
    for u in g.left() {
        facts.push(
            Fact::from_terms("R", vec![Term::Constant(u.clone()), Term::Null(u.clone())])
                .expect("arity 2"),
        );
    }
    for v in g.right() {
        facts.push(
            Fact::from_terms("R", vec![Term::Null(v.clone()), Term::Constant(v.clone())])
                .expect("arity 2"),
        );
    }
    facts.push(
        Fact::from_terms("R", vec![Term::Constant(fresh.clone()), Term::Constant(fresh)])
            .expect("arity 2"),
    );
    let dom = Domain::new(all).unwrap_or_else(|| {
        // the empty graph: no nulls exist, any nonempty placeholder works
        Domain::from_strs(&["@fresh0"]).expect("nonempty")
    });
    let db = IncompleteDatabase::new(facts, DomainMode::Uniform(dom))
        .expect("well-formed encoding");
    debug_assert!(db.is_codd());
    ReductionInstance {
        db,
        query: single_query("R(x,x)"),
        problem: Problem::Completions,
        identity: CountIdentity {
            kind: "pseudoforest",
            invariant: GraphInvariant::Pseudoforests,
            form: IdentityForm::Equal,
        },
    }
}

/// Recovers the number of independent sets of a bipartite graph from
/// `(n+1)^2` oracle counts: database `D_{a,b}` has the edges as `S`-facts
/// over constants, `a` R-nulls and `b` T-nulls over the uniform domain, and
/// the non-satisfying valuation counts form the triangular system
/// `C = (surj ⊗ surj) Z` whose solution sums to `#IS` of the padded graph.
pub fn recover_bis(g: &BipartiteGraph, cap: u64) -> Result<Count> {
    let n = g.left().len().max(g.right().len());
    let pad = (n - g.left().len()) + (n - g.right().len());
    if n == 0 {
        return Ok(Count::one()); // only the empty independent set
    }
    // triangularity / invertibility of the surjection matrix
    for a in 0..=n as u64 {
        for i in 0..=n as u64 {
            if i > a && !surj(a, i).is_zero() {
                return Err(Error::Malformed(
                    "surjection matrix is not lower-triangular".into(),
                ));
            }
        }
        if surj(a, a) != factorial(a) || factorial(a).is_zero() {
            return Err(Error::Malformed(
                "surjection matrix diagonal is not a!".into(),
            ));
        }
    }

    let dom_names: Vec<Name> = (1..=n).map(|i| name(&format!("a@{i}"))).collect();
    let query = parse_query("R(x) & S(x,y) & T(y)").expect("parses");
    let mut c: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n + 1]; n + 1];
    for a in 0..=n {
        for b in 0..=n {
            let db = bis_database(g, &dom_names, a, b);
            let total = pow(n as u64, (a + b) as u64);
            let sat = brute_count_val(&query, &db, cap)?;
            c[a][b] = BigInt::from(total) - BigInt::from(sat);
        }
    }

    // forward substitution on the Kronecker system
    let mut z: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n + 1]; n + 1];
    for a in 0..=n {
        for b in 0..=n {
            let mut rhs = c[a][b].clone();
            for i in 0..=a {
                for j in 0..=b {
                    if i == a && j == b {
                        continue;
                    }
                    let coeff =
                        BigInt::from(surj(a as u64, i as u64) * surj(b as u64, j as u64));
                    rhs -= coeff * &z[i][j];
                }
            }
            let diag = BigInt::from(factorial(a as u64) * factorial(b as u64));
            let (q, r) = num_integer::Integer::div_rem(&rhs, &diag);
            if !r.is_zero() {
                return Err(Error::Malformed(
                    "surjection system has a non-integer solution".into(),
                ));
            }
            z[a][b] = q;
        }
    }

    let mut total = BigInt::zero();
    for row in &z {
        for v in row {
            total += v;
        }
    }
    let padding = BigInt::from(pow(2, pad as u64));
    let (q, r) = num_integer::Integer::div_rem(&total, &padding);
    if !r.is_zero() || q.sign() == num_bigint::Sign::Minus {
        return Err(Error::Malformed(
            "independent-set recovery produced a non-count".into(),
        ));
    }
    Ok(q.to_biguint().expect("nonnegative"))
}

fn bis_database(
    g: &BipartiteGraph,
    dom_names: &[Name],
    a: usize,
    b: usize,
) -> IncompleteDatabase {
    let mut facts = Vec::new();
    for &(li, ri) in g.edges() {
        facts.push(
            Fact::from_terms(
                "S",
                vec![
                    Term::Constant(dom_names[li].clone()),
                    Term::Constant(dom_names[ri].clone()),
                ],
            )
            .expect("arity 2"),
        );
    }
    for k in 0..a {
        facts.push(Fact::from_terms("R", vec![Term::null(&format!("r@{k}"))]).expect("arity 1"));
    }
    for k in 0..b {
        facts.push(Fact::from_terms("T", vec![Term::null(&format!("t@{k}"))]).expect("arity 1"));
    }
    IncompleteDatabase::new(
        facts,
        DomainMode::Uniform(Domain::new(dom_names.iter().cloned()).expect("n >= 1")),
    )
    .expect("well-formed encoding")
}

/// All encoder names accepted by the command line.
pub const ENCODER_NAMES: [&str; 8] = [
    "3col",
    "is-path",
    "is-rxysxy",
    "vc",
    "is-comp-uniform",
    "gadget",
    "avoidance",
    "pseudoforest",
];

/// Runs the encoder by name. Bipartite encoders (`avoidance`,
/// `pseudoforest`) take any two-colorable graph.
pub fn encode_by_name(kind: &str, g: &Graph) -> Result<ReductionInstance> {
    match kind {
        "3col" => Ok(encode_3col(g)),
        "is-path" => Ok(encode_is_path(g)),
        "is-rxysxy" => Ok(encode_is_rxysxy(g)),
        "vc" => Ok(encode_vc(g)),
        "is-comp-uniform" => Ok(encode_is_comp_uniform(g)),
        "gadget" => Ok(encode_gadget_3col(g)),
        "avoidance" => {
            let b = g
                .to_bipartite()
                .ok_or_else(|| Error::Malformed("the graph is not bipartite".into()))?;
            encode_avoidance(&b)
        }
        "pseudoforest" => {
            let b = g
                .to_bipartite()
                .ok_or_else(|| Error::Malformed("the graph is not bipartite".into()))?;
            Ok(encode_pseudoforest(&b))
        }
        other => Err(Error::Malformed(format!("unknown reduction {other:?}"))),
    }
}

/// Evaluates the instance's count with the brute-force oracle.
pub fn brute_instance_count(inst: &ReductionInstance, cap: u64) -> Result<Count> {
    let q = UnionQuery::from_single(inst.query.clone());
    match inst.problem {
        Problem::Valuations => crate::oracle::brute_count_val(&q, &inst.db, cap),
        Problem::Completions => crate::oracle::brute_count_comp(&q, &inst.db, cap),
    }
}

/// Evaluates the instance's graph invariant with the exhaustive counters.
pub fn oracle_invariant(inst: &ReductionInstance, g: &Graph) -> Result<Count> {
    match inst.identity.invariant {
        GraphInvariant::ThreeColorings | GraphInvariant::ThreeColorability => {
            crate::oracle::count_3col(g)
        }
        GraphInvariant::IndependentSets => crate::oracle::count_is(g),
        GraphInvariant::VertexCovers => crate::oracle::count_vc(g),
        GraphInvariant::AvoidingAssignments => crate::oracle::count_avoiding(g),
        GraphInvariant::Pseudoforests => crate::oracle::count_pf(g),
    }
}
