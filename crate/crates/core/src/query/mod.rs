//! Self-join-free Boolean conjunctive queries, unions thereof, the pattern
//! relation between queries, and the dichotomy classifier.

mod classify;
mod parse;
mod patterns;

pub use classify::{
    classify, classify_all, ApproxVerdict, DichotomyVerdict, DomainKind, ExactVerdict, Problem,
    TableKind,
};
pub use parse::parse_query;
pub use patterns::{canonical_pattern, has_pattern, pattern_profile, CanonicalPattern, PatternProfile};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Name, RelationSymbol};

/// One relational atom; `vars.len()` equals the relation's arity and
/// variables may repeat.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub relation: RelationSymbol,
    pub vars: Vec<Name>,
}

impl Atom {
    pub fn new(relation: &str, vars: &[&str]) -> Result<Atom> {
        let rel = RelationSymbol::new(relation, vars.len())?;
        Ok(Atom {
            relation: rel,
            vars: vars.iter().map(|v| crate::model::name(v)).collect(),
        })
    }

    pub fn distinct_vars(&self) -> BTreeSet<Name> {
        self.vars.iter().cloned().collect()
    }

    /// Variable -> number of occurrences in this atom.
    pub fn var_counts(&self) -> BTreeMap<Name, usize> {
        let mut m = BTreeMap::new();
        for v in &self.vars {
            *m.entry(v.clone()).or_insert(0) += 1;
        }
        m
    }

    pub fn has_repeated_var(&self) -> bool {
        self.distinct_vars().len() < self.vars.len()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.relation.name)?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A self-join-free Boolean conjunctive query: a nonempty conjunction of
/// atoms, no relation symbol repeated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SjfBCQ {
    atoms: Vec<Atom>,
}

impl SjfBCQ {
    pub fn new(atoms: Vec<Atom>) -> Result<SjfBCQ> {
        if atoms.is_empty() {
            return Err(Error::Malformed("a query needs at least one atom".into()));
        }
        let mut seen = BTreeSet::new();
        for a in &atoms {
            if !seen.insert(a.relation.name.clone()) {
                return Err(Error::SelfJoin(a.relation.name.to_string()));
            }
        }
        Ok(SjfBCQ { atoms })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn vars(&self) -> BTreeSet<Name> {
        self.atoms.iter().flat_map(|a| a.distinct_vars()).collect()
    }

    /// Variable -> total number of occurrences across all atoms.
    pub fn var_occurrences(&self) -> BTreeMap<Name, usize> {
        let mut m = BTreeMap::new();
        for a in &self.atoms {
            for v in &a.vars {
                *m.entry(v.clone()).or_insert(0) += 1;
            }
        }
        m
    }

    /// Relation name -> arity.
    pub fn signature(&self) -> BTreeMap<Name, usize> {
        self.atoms
            .iter()
            .map(|a| (a.relation.name.clone(), a.relation.arity))
            .collect()
    }

    pub fn atom_of(&self, relation: &str) -> Option<&Atom> {
        self.atoms
            .iter()
            .find(|a| a.relation.name.as_ref() == relation)
    }

    /// The connectivity graph: one node per atom, an edge whenever two atoms
    /// share a variable, labeled by the shared-variable set.
    pub fn connectivity_graph(&self) -> ConnectivityGraph {
        let mut edges = Vec::new();
        for i in 0..self.atoms.len() {
            for j in i + 1..self.atoms.len() {
                let label: BTreeSet<Name> = self.atoms[i]
                    .distinct_vars()
                    .intersection(&self.atoms[j].distinct_vars())
                    .cloned()
                    .collect();
                if !label.is_empty() {
                    edges.push((i, j, label));
                }
            }
        }
        ConnectivityGraph {
            atom_count: self.atoms.len(),
            edges,
        }
    }
}

impl fmt::Display for SjfBCQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A union of self-join-free BCQs. Relation symbols may repeat across
/// disjuncts, but always with the same arity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnionQuery {
    disjuncts: Vec<SjfBCQ>,
}

impl UnionQuery {
    pub fn new(disjuncts: Vec<SjfBCQ>) -> Result<UnionQuery> {
        if disjuncts.is_empty() {
            return Err(Error::Malformed("a union query needs a disjunct".into()));
        }
        let mut arities: BTreeMap<Name, usize> = BTreeMap::new();
        for d in &disjuncts {
            for (rel, arity) in d.signature() {
                match arities.get(&rel) {
                    None => {
                        arities.insert(rel, arity);
                    }
                    Some(&a) if a == arity => {}
                    Some(&a) => {
                        return Err(Error::SchemaMismatch(format!(
                            "relation {rel} used with arities {a} and {arity} across disjuncts"
                        )))
                    }
                }
            }
        }
        Ok(UnionQuery { disjuncts })
    }

    pub fn from_single(q: SjfBCQ) -> UnionQuery {
        UnionQuery { disjuncts: vec![q] }
    }

    pub fn disjuncts(&self) -> &[SjfBCQ] {
        &self.disjuncts
    }

    pub fn as_single(&self) -> Option<&SjfBCQ> {
        if self.disjuncts.len() == 1 {
            Some(&self.disjuncts[0])
        } else {
            None
        }
    }

    /// Relation name -> arity over all disjuncts.
    pub fn signature(&self) -> BTreeMap<Name, usize> {
        let mut m = BTreeMap::new();
        for d in &self.disjuncts {
            m.extend(d.signature());
        }
        m
    }
}

impl fmt::Display for UnionQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Connectivity graph of a query: nodes are atom indices, edges carry the
/// shared-variable set (edges exist only for nonempty labels).
#[derive(Debug, Clone)]
pub struct ConnectivityGraph {
    atom_count: usize,
    edges: Vec<(usize, usize, BTreeSet<Name>)>,
}

impl ConnectivityGraph {
    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn edges(&self) -> &[(usize, usize, BTreeSet<Name>)] {
        &self.edges
    }

    /// Connected components as sorted lists of atom indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.atom_count).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        for &(i, j, _) in &self.edges {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.atom_count {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }

    /// The tractability criterion behind the uniform valuation counter: every
    /// connected component must be a clique whose edges all carry exactly one
    /// common variable. Returns the shared variable per component (`None` for
    /// isolated atoms) or `None` if the criterion fails.
    pub fn single_variable_cliques(&self) -> Option<Vec<(Option<Name>, Vec<usize>)>> {
        let mut edge_map: BTreeMap<(usize, usize), &BTreeSet<Name>> = BTreeMap::new();
        for (i, j, label) in &self.edges {
            edge_map.insert((*i, *j), label);
        }
        let mut out = Vec::new();
        for comp in self.components() {
            if comp.len() == 1 {
                out.push((None, comp));
                continue;
            }
            let mut shared: Option<Name> = None;
            for a in 0..comp.len() {
                for b in a + 1..comp.len() {
                    let label = edge_map.get(&(comp[a], comp[b]))?; // non-clique: fail
                    if label.len() != 1 {
                        return None;
                    }
                    let v = label.iter().next().expect("nonempty label").clone();
                    match &shared {
                        None => shared = Some(v),
                        Some(s) if *s == v => {}
                        Some(_) => return None,
                    }
                }
            }
            out.push((shared, comp));
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connectivity_graph_of_appendix_example() {
        // R1(x1,x1,y1,t1) & R2(x1,y1,t2) & S1(x2,t3) & S2(x2,t4) & S3(x2)
        //   & T1(x3) & T2(x3) & T3(x3) & T4(x3,t5)
        let q = parse_query(
            "R1(x1,x1,y1,t1) & R2(x1,y1,t2) & S1(x2,t3) & S2(x2,t4) & S3(x2) \
             & T1(x3) & T2(x3) & T3(x3) & T4(x3,t5)",
        )
        .unwrap();
        let q = q.as_single().unwrap().clone();
        let g = q.connectivity_graph();
        let comps = g.components();
        assert_eq!(comps.len(), 3);
        assert_eq!(comps[0], vec![0, 1]); // the R component
        assert_eq!(comps[1], vec![2, 3, 4]); // the S component
        assert_eq!(comps[2], vec![5, 6, 7, 8]); // the T component

        // the R edge is labeled {x1, y1}, so the criterion fails for the
        // whole query ...
        assert!(g.single_variable_cliques().is_none());

        // ... but holds once the R component is removed
        let q2 = parse_query("S1(x2,t3) & S2(x2,t4) & S3(x2) & T1(x3) & T2(x3) & T3(x3) & T4(x3,t5)")
            .unwrap();
        let q2 = q2.as_single().unwrap().clone();
        assert!(q2.connectivity_graph().single_variable_cliques().is_some());
    }

    #[test]
    fn single_atom_is_isolated_node() {
        let q = parse_query("R(x,y)").unwrap();
        let g = q.as_single().unwrap().connectivity_graph();
        assert_eq!(g.components(), vec![vec![0]]);
        assert!(g.single_variable_cliques().is_some());
    }

    #[test]
    fn two_variable_label_fails_criterion() {
        let q = parse_query("R(x,y)&S(x,y)").unwrap();
        let g = q.as_single().unwrap().connectivity_graph();
        assert_eq!(g.edges().len(), 1);
        assert_eq!(g.edges()[0].2.len(), 2);
        assert!(g.single_variable_cliques().is_none());
    }
}
