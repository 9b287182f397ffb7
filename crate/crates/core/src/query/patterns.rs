//! The pattern relation between queries.
//!
//! `p` is a pattern of `q` when `p` can be obtained from `q` by deleting
//! atoms, deleting variable occurrences (keeping every atom nonempty),
//! renaming relations or variables to fresh ones, and reordering variables
//! inside an atom. Composing those operations, this is equivalent to: an
//! injection `f` from atoms of `p` to atoms of `q` and an injective variable
//! map `g` such that for each atom `A` of `p`, the multiset of `g`-images of
//! `A`'s variable occurrences is a sub-multiset of the occurrences of `f(A)`.
//! Relation names are unconstrained because renaming is free.
//!
//! The five structural flags of [`pattern_profile`] are closed forms for the
//! canonical patterns of the dichotomy table; the generic backtracking
//! checker is the source of truth and the equivalence is property-tested.

use std::collections::BTreeMap;

use crate::model::Name;
use crate::query::{parse_query, SjfBCQ};

/// Backtracking test for "p is a pattern of q". Pattern sizes are tiny, so
/// exhaustive search over atom injections and variable maps is fine.
pub fn has_pattern(q: &SjfBCQ, p: &SjfBCQ) -> bool {
    if p.atoms().len() > q.atoms().len() {
        return false;
    }
    let p_counts: Vec<BTreeMap<Name, usize>> = p.atoms().iter().map(|a| a.var_counts()).collect();
    let q_counts: Vec<BTreeMap<Name, usize>> = q.atoms().iter().map(|a| a.var_counts()).collect();

    let mut used_atoms = vec![false; q.atoms().len()];
    let mut var_map: BTreeMap<Name, Name> = BTreeMap::new();
    let mut used_vars: BTreeMap<Name, ()> = BTreeMap::new();
    assign_atom(
        0,
        &p_counts,
        &q_counts,
        &mut used_atoms,
        &mut var_map,
        &mut used_vars,
    )
}

fn assign_atom(
    i: usize,
    p_counts: &[BTreeMap<Name, usize>],
    q_counts: &[BTreeMap<Name, usize>],
    used_atoms: &mut Vec<bool>,
    var_map: &mut BTreeMap<Name, Name>,
    used_vars: &mut BTreeMap<Name, ()>,
) -> bool {
    if i == p_counts.len() {
        return true;
    }
    for j in 0..q_counts.len() {
        if used_atoms[j] {
            continue;
        }
        // every already-mapped variable of atom i must fit into atom j
        let fits = p_counts[i].iter().all(|(v, &c)| match var_map.get(v) {
            Some(w) => q_counts[j].get(w).copied().unwrap_or(0) >= c,
            None => true,
        });
        if !fits {
            continue;
        }
        used_atoms[j] = true;
        let unmapped: Vec<Name> = p_counts[i]
            .keys()
            .filter(|v| !var_map.contains_key(*v))
            .cloned()
            .collect();
        if assign_vars(
            0,
            &unmapped,
            i,
            j,
            p_counts,
            q_counts,
            used_atoms,
            var_map,
            used_vars,
        ) {
            return true;
        }
        used_atoms[j] = false;
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn assign_vars(
    k: usize,
    unmapped: &[Name],
    i: usize,
    j: usize,
    p_counts: &[BTreeMap<Name, usize>],
    q_counts: &[BTreeMap<Name, usize>],
    used_atoms: &mut Vec<bool>,
    var_map: &mut BTreeMap<Name, Name>,
    used_vars: &mut BTreeMap<Name, ()>,
) -> bool {
    if k == unmapped.len() {
        return assign_atom(i + 1, p_counts, q_counts, used_atoms, var_map, used_vars);
    }
    let v = &unmapped[k];
    let need = p_counts[i][v];
    let candidates: Vec<Name> = q_counts[j]
        .iter()
        .filter(|(w, &c)| c >= need && !used_vars.contains_key(*w))
        .map(|(w, _)| w.clone())
        .collect();
    for w in candidates {
        var_map.insert(v.clone(), w.clone());
        used_vars.insert(w.clone(), ());
        if assign_vars(
            k + 1,
            unmapped,
            i,
            j,
            p_counts,
            q_counts,
            used_atoms,
            var_map,
            used_vars,
        ) {
            return true;
        }
        var_map.remove(v);
        used_vars.remove(&w);
    }
    false
}

/// The canonical patterns of the dichotomy table, by short name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CanonicalPattern {
    /// `R(x,x)`
    Xx,
    /// `R(x) & S(x)`
    XSx,
    /// `R(x) & S(x,y) & T(y)`
    Path,
    /// `R(x,y) & S(x,y)`
    XySxy,
    /// `R(x,y)`
    Xy,
    /// `R(x)` — a pattern of every well-formed query
    X,
}

impl CanonicalPattern {
    pub fn short_name(&self) -> &'static str {
        match self {
            CanonicalPattern::Xx => "xx",
            CanonicalPattern::XSx => "xSx",
            CanonicalPattern::Path => "path",
            CanonicalPattern::XySxy => "xySxy",
            CanonicalPattern::Xy => "xy",
            CanonicalPattern::X => "x",
        }
    }

    pub fn query_text(&self) -> &'static str {
        match self {
            CanonicalPattern::Xx => "R(x,x)",
            CanonicalPattern::XSx => "R(x) & S(x)",
            CanonicalPattern::Path => "R(x) & S(x,y) & T(y)",
            CanonicalPattern::XySxy => "R(x,y) & S(x,y)",
            CanonicalPattern::Xy => "R(x,y)",
            CanonicalPattern::X => "R(x)",
        }
    }
}

/// The canonical pattern as a query value.
pub fn canonical_pattern(p: CanonicalPattern) -> SjfBCQ {
    parse_query(p.query_text())
        .expect("canonical pattern parses")
        .as_single()
        .expect("canonical pattern is a single conjunct")
        .clone()
}

/// Presence of each canonical pattern, decided structurally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternProfile {
    /// some atom repeats a variable
    pub xx: bool,
    /// two distinct atoms share a variable
    pub xsx: bool,
    /// distinct atoms A, B, C and distinct variables x, y with
    /// x in A and B, y in B and C
    pub path: bool,
    /// two distinct atoms share at least two distinct variables
    pub xysxy: bool,
    /// some atom contains at least two distinct variables
    pub xy: bool,
}

impl PatternProfile {
    pub fn contains(&self, p: CanonicalPattern) -> bool {
        match p {
            CanonicalPattern::Xx => self.xx,
            CanonicalPattern::XSx => self.xsx,
            CanonicalPattern::Path => self.path,
            CanonicalPattern::XySxy => self.xysxy,
            CanonicalPattern::Xy => self.xy,
            CanonicalPattern::X => true,
        }
    }
}

/// Computes the structural profile of `q`.
pub fn pattern_profile(q: &SjfBCQ) -> PatternProfile {
    let atoms = q.atoms();
    let var_sets: Vec<_> = atoms.iter().map(|a| a.distinct_vars()).collect();

    let xx = atoms.iter().any(|a| a.has_repeated_var());
    let xy = var_sets.iter().any(|s| s.len() >= 2);

    let mut xsx = false;
    let mut xysxy = false;
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let shared = var_sets[i].intersection(&var_sets[j]).count();
            if shared >= 1 {
                xsx = true;
            }
            if shared >= 2 {
                xysxy = true;
            }
        }
    }

    let mut path = false;
    'outer: for b in 0..atoms.len() {
        for a in 0..atoms.len() {
            if a == b {
                continue;
            }
            for c in 0..atoms.len() {
                if c == b || c == a {
                    continue;
                }
                // distinct x in A∩B and y in B∩C
                for x in var_sets[a].intersection(&var_sets[b]) {
                    for y in var_sets[b].intersection(&var_sets[c]) {
                        if x != y {
                            path = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
    }

    PatternProfile {
        xx,
        xsx,
        path,
        xysxy,
        xy,
    }
}
