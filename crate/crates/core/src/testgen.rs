//! Seeded random instance generators for the test suites. Not part of the
//! public interface.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{BipartiteGraph, Graph};
use crate::model::{name, Domain, DomainMode, Fact, IncompleteDatabase, Name, Term};
use crate::query::{Atom, SjfBCQ};
use crate::rng::SplitMix64;

pub struct Gen {
    pub rng: SplitMix64,
}

/// Shape of a random database.
#[derive(Debug, Clone)]
pub struct DbShape {
    pub uniform: bool,
    pub codd: bool,
    pub max_facts: usize,
    pub max_nulls: usize,
    pub domain_size: usize,
    /// chance (out of 100) that a position holds a constant
    pub constant_pct: u64,
    /// chance (out of 100) that a generated constant lies outside the domain
    pub out_of_domain_pct: u64,
}

impl Default for DbShape {
    fn default() -> Self {
        DbShape {
            uniform: false,
            codd: false,
            max_facts: 4,
            max_nulls: 4,
            domain_size: 3,
            constant_pct: 30,
            out_of_domain_pct: 15,
        }
    }
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: SplitMix64::new(seed),
        }
    }

    fn pct(&mut self, p: u64) -> bool {
        self.rng.below(100) < p
    }

    /// Unconstrained random sjfBCQ.
    pub fn query(&mut self, max_atoms: usize, max_arity: usize, max_vars: usize) -> SjfBCQ {
        let atoms = 1 + self.rng.below_usize(max_atoms);
        let vars: Vec<String> = (0..max_vars).map(|i| format!("v{i}")).collect();
        let list: Vec<Atom> = (0..atoms)
            .map(|i| {
                let arity = 1 + self.rng.below_usize(max_arity);
                let chosen: Vec<&str> = (0..arity)
                    .map(|_| vars[self.rng.below_usize(vars.len())].as_str())
                    .collect();
                Atom::new(&format!("R{i}"), &chosen).expect("well-formed atom")
            })
            .collect();
        SjfBCQ::new(list).expect("distinct relation names")
    }

    /// Query in the all-variables-distinct class: every position gets a
    /// fresh variable.
    pub fn query_all_distinct(&mut self, max_atoms: usize, max_arity: usize) -> SjfBCQ {
        let atoms = 1 + self.rng.below_usize(max_atoms);
        let mut next = 0usize;
        let list: Vec<Atom> = (0..atoms)
            .map(|i| {
                let arity = 1 + self.rng.below_usize(max_arity);
                let chosen: Vec<String> = (0..arity)
                    .map(|_| {
                        next += 1;
                        format!("v{next}")
                    })
                    .collect();
                let refs: Vec<&str> = chosen.iter().map(|s| s.as_str()).collect();
                Atom::new(&format!("R{i}"), &refs).expect("well-formed atom")
            })
            .collect();
        SjfBCQ::new(list).expect("distinct relation names")
    }

    /// Query whose atoms share no variables (repeats inside an atom are
    /// allowed): the Codd-algorithm class.
    pub fn query_disjoint_atoms(&mut self, max_atoms: usize, max_arity: usize) -> SjfBCQ {
        let atoms = 1 + self.rng.below_usize(max_atoms);
        let list: Vec<Atom> = (0..atoms)
            .map(|i| {
                let arity = 1 + self.rng.below_usize(max_arity);
                let pool: Vec<String> = (0..=self.rng.below_usize(arity))
                    .map(|k| format!("a{i}v{k}"))
                    .collect();
                let chosen: Vec<&str> = (0..arity)
                    .map(|_| pool[self.rng.below_usize(pool.len())].as_str())
                    .collect();
                Atom::new(&format!("R{i}"), &chosen).expect("well-formed atom")
            })
            .collect();
        SjfBCQ::new(list).expect("distinct relation names")
    }

    /// Query in the uniform-valuations class: basic singleton groups plus
    /// optional single-occurrence padding variables.
    pub fn query_uniform_val_class(&mut self, max_groups: usize, max_arity: usize) -> SjfBCQ {
        let groups = 1 + self.rng.below_usize(max_groups);
        let mut list = Vec::new();
        let mut rel = 0usize;
        let mut ear = 0usize;
        for gi in 0..groups {
            let members = 1 + self.rng.below_usize(2);
            for _ in 0..members {
                let mut vars = vec![format!("g{gi}")];
                let extra = self.rng.below_usize(max_arity);
                for _ in 0..extra {
                    ear += 1;
                    vars.push(format!("t{ear}"));
                }
                let refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
                list.push(Atom::new(&format!("R{rel}"), &refs).expect("well-formed atom"));
                rel += 1;
            }
        }
        // occasionally one atom of pure padding variables
        if self.pct(30) {
            ear += 1;
            let v1 = format!("t{ear}");
            ear += 1;
            let v2 = format!("t{ear}");
            list.push(Atom::new(&format!("R{rel}"), &[&v1, &v2]).expect("well-formed atom"));
        }
        SjfBCQ::new(list).expect("distinct relation names")
    }

    /// Conjunction of basic singletons: the unary completion-counting class.
    pub fn query_unary_groups(&mut self, max_groups: usize, max_group_size: usize) -> SjfBCQ {
        let groups = 1 + self.rng.below_usize(max_groups);
        let mut list = Vec::new();
        let mut rel = 0usize;
        for gi in 0..groups {
            let members = 1 + self.rng.below_usize(max_group_size);
            for _ in 0..members {
                let v = format!("g{gi}");
                list.push(Atom::new(&format!("R{rel}"), &[&v]).expect("well-formed atom"));
                rel += 1;
            }
        }
        SjfBCQ::new(list).expect("distinct relation names")
    }

    /// Random database over the signature.
    pub fn database(&mut self, sig: &BTreeMap<Name, usize>, shape: &DbShape) -> IncompleteDatabase {
        let dom_pool: Vec<Name> = (1..=shape.domain_size).map(|i| name(&format!("c{i}"))).collect();
        let null_pool: Vec<Name> = (0..shape.max_nulls).map(|i| name(&format!("n{i}"))).collect();
        let rels: Vec<(&Name, usize)> = sig.iter().map(|(n, &a)| (n, a)).collect();

        let mut codd_used: BTreeSet<usize> = BTreeSet::new();
        let mut facts = Vec::new();
        let fact_count = 1 + self.rng.below_usize(shape.max_facts);
        for _ in 0..fact_count {
            let (rel, arity) = rels[self.rng.below_usize(rels.len())];
            let mut args = Vec::with_capacity(arity);
            for _ in 0..arity {
                let want_constant = self.pct(shape.constant_pct);
                let null_choice = if shape.codd {
                    (0..null_pool.len()).find(|i| !codd_used.contains(i))
                } else {
                    Some(self.rng.below_usize(null_pool.len()))
                };
                match (want_constant, null_choice) {
                    (false, Some(ni)) => {
                        if shape.codd {
                            codd_used.insert(ni);
                        }
                        args.push(Term::Null(null_pool[ni].clone()));
                    }
                    _ => {
                        if self.pct(shape.out_of_domain_pct) {
                            args.push(Term::constant(&format!("z{}", self.rng.below(3))));
                        } else {
                            args.push(Term::Constant(
                                dom_pool[self.rng.below_usize(dom_pool.len())].clone(),
                            ));
                        }
                    }
                }
            }
            facts.push(Fact::from_terms(rel, args).expect("arity matches"));
        }

        let occurring: BTreeSet<Name> = facts
            .iter()
            .flat_map(|f| f.nulls().cloned().collect::<Vec<_>>())
            .collect();
        let mode = if shape.uniform {
            DomainMode::Uniform(Domain::new(dom_pool).expect("nonempty"))
        } else {
            let map = occurring
                .iter()
                .map(|n| {
                    let size = 1 + self.rng.below_usize(shape.domain_size);
                    let mut values: Vec<Name> = Vec::new();
                    while values.len() < size {
                        let c = dom_pool[self.rng.below_usize(dom_pool.len())].clone();
                        if !values.contains(&c) {
                            values.push(c);
                        }
                    }
                    (n.clone(), Domain::new(values).expect("nonempty"))
                })
                .collect();
            DomainMode::PerNull(map)
        };
        IncompleteDatabase::new(facts, mode).expect("generated database is well-formed")
    }

    /// Random graph on up to `max_nodes` nodes with edge probability
    /// `edge_pct` (out of 100), capped at `max_edges`.
    pub fn graph(&mut self, max_nodes: usize, edge_pct: u64, max_edges: usize) -> Graph {
        let n = 1 + self.rng.below_usize(max_nodes);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if self.pct(edge_pct) {
                    edges.push((u, v));
                }
            }
        }
        while edges.len() > max_edges {
            let i = self.rng.below_usize(edges.len());
            edges.swap_remove(i);
        }
        Graph::with_nodes(n, edges).expect("well-formed graph")
    }

    /// Random bipartite graph with up to `max_total` nodes across both sides.
    pub fn bipartite(&mut self, max_total: usize, edge_pct: u64) -> BipartiteGraph {
        let total = 2 + self.rng.below_usize(max_total.saturating_sub(1).max(1));
        let left = 1 + self.rng.below_usize(total - 1);
        let right = (total - left).max(1);
        let mut edges = Vec::new();
        for l in 0..left {
            for r in 0..right {
                if self.pct(edge_pct) {
                    edges.push((l, r));
                }
            }
        }
        BipartiteGraph::with_sides(left, right, edges)
    }

    /// Applies random pattern-forming operations (delete an atom, delete a
    /// variable occurrence, rename a relation or variable to a fresh one,
    /// reorder variables in an atom) to derive a pattern of `q`.
    pub fn derive_pattern(&mut self, q: &SjfBCQ, ops: usize) -> SjfBCQ {
        let mut atoms: Vec<Atom> = q.atoms().to_vec();
        let mut fresh = 0usize;
        for _ in 0..ops {
            match self.rng.below(5) {
                0 if atoms.len() > 1 => {
                    let i = self.rng.below_usize(atoms.len());
                    atoms.remove(i);
                }
                1 => {
                    // delete a variable occurrence, keeping the atom nonempty
                    let i = self.rng.below_usize(atoms.len());
                    if atoms[i].vars.len() > 1 {
                        let j = self.rng.below_usize(atoms[i].vars.len());
                        let mut vars = atoms[i].vars.clone();
                        vars.remove(j);
                        let refs: Vec<&str> = vars.iter().map(|v| v.as_ref()).collect();
                        atoms[i] = Atom::new(&atoms[i].relation.name, &refs).expect("nonempty");
                    }
                }
                2 => {
                    // rename a relation to a fresh one
                    let i = self.rng.below_usize(atoms.len());
                    fresh += 1;
                    let refs: Vec<&str> = atoms[i].vars.iter().map(|v| v.as_ref()).collect();
                    atoms[i] = Atom::new(&format!("F{fresh}"), &refs).expect("well-formed");
                }
                3 => {
                    // rename a variable to a fresh one, everywhere
                    let all_vars: BTreeSet<Name> =
                        atoms.iter().flat_map(|a| a.distinct_vars()).collect();
                    let all_vars: Vec<Name> = all_vars.into_iter().collect();
                    let target = all_vars[self.rng.below_usize(all_vars.len())].clone();
                    fresh += 1;
                    let new_name = name(&format!("w{fresh}"));
                    for a in atoms.iter_mut() {
                        let vars: Vec<Name> = a
                            .vars
                            .iter()
                            .map(|v| if *v == target { new_name.clone() } else { v.clone() })
                            .collect();
                        let refs: Vec<&str> = vars.iter().map(|v| v.as_ref()).collect();
                        *a = Atom::new(&a.relation.name, &refs).expect("well-formed");
                    }
                }
                _ => {
                    // reorder the variables in an atom
                    let i = self.rng.below_usize(atoms.len());
                    let mut vars = atoms[i].vars.clone();
                    for k in (1..vars.len()).rev() {
                        let j = self.rng.below_usize(k + 1);
                        vars.swap(k, j);
                    }
                    let refs: Vec<&str> = vars.iter().map(|v| v.as_ref()).collect();
                    atoms[i] = Atom::new(&atoms[i].relation.name, &refs).expect("well-formed");
                }
            }
        }
        SjfBCQ::new(atoms).expect("operations preserve well-formedness")
    }
}
