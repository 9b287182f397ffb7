//! Counting completions over unary schemas with a uniform domain.
//!
//! A completion of a unary database is exactly a type function
//! `tau: dom -> 2^relations` (which relations realize each constant), plus
//! the fixed facts over constants outside the domain. Grouping nulls into
//! blocks by their occurrence set and constants into classes by the
//! relations they already sit in, the number of completions is
//!
//!   sum over class profiles (k_{b,t}) of  prod_b multinomial(m_b; k_{b,.})
//!
//! restricted to profiles that are achievable and satisfy the query:
//!
//! 1. every group of unary query atoms has a witness type (or is witnessed
//!    by an out-of-domain constant fact present in every completion);
//! 2. every nonempty null block can be absorbed by some realized type;
//! 3. the cover demands are routable: each constant of class `(b, t)` with
//!    `t != b` consumes one null from each block of some minimal cover of
//!    `t \ b`, within the per-block null supplies.
//!
//! Condition 3 is a bounded integer feasibility problem decided by exhaustive
//! search over the splits of each demand among its minimal covers. The whole
//! sum is polynomial in the data for a fixed schema but grows steeply with
//! the relation count, so instances with `d^(2^l - 1)` above 10^9 are
//! refused.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::combinatorics::{binom, Count};
use crate::error::{Error, Result};
use crate::model::{IncompleteDatabase, Name, Term};
use crate::query::{pattern_profile, SjfBCQ};

const ITERATION_BUDGET: u64 = 1_000_000_000;

pub fn count_comp_uniform_unary(q: &SjfBCQ, db: &IncompleteDatabase) -> Result<Count> {
    let dom = db.uniform_domain().ok_or(Error::NonUniform)?.clone();
    let profile = pattern_profile(q);
    if profile.xx || profile.xy {
        return Err(Error::PatternMismatch(
            "count_comp_uniform_unary needs a query of unary atoms".into(),
        ));
    }
    for f in db.facts() {
        if f.relation.arity != 1 {
            return Err(Error::SchemaMismatch(format!(
                "relation {} has arity {}, the unary completion counter cannot use it",
                f.relation.name, f.relation.arity
            )));
        }
    }
    let d = dom.len() as u64;

    // relation universe: everything in the query or the database
    let mut rel_index: BTreeMap<Name, usize> = BTreeMap::new();
    let intern = |n: &Name, rel_index: &mut BTreeMap<Name, usize>| {
        let next = rel_index.len();
        *rel_index.entry(n.clone()).or_insert(next)
    };
    for a in q.atoms() {
        intern(&a.relation.name, &mut rel_index);
    }
    for f in db.facts() {
        intern(&f.relation.name, &mut rel_index);
    }
    let l = rel_index.len();

    // guardrail from the data-complexity regime: the nested sum has on the
    // order of d^(2^l - 1) terms
    if l >= 31 {
        return Err(Error::ResourceLimit(format!("{l} relations")));
    }
    let big_l = (1u32 << l) - 1;
    let mut estimate: u128 = 1;
    for _ in 0..big_l {
        estimate = estimate.saturating_mul(d as u128);
        if estimate > 1_000_000_000 {
            return Err(Error::ResourceLimit(format!(
                "d^(2^l - 1) = {d}^{big_l} exceeds 10^9"
            )));
        }
    }

    // query groups: variable -> relation mask
    let mut group_masks: Vec<u64> = {
        let mut by_var: BTreeMap<&Name, u64> = BTreeMap::new();
        for a in q.atoms() {
            *by_var.entry(&a.vars[0]).or_insert(0) |= 1 << rel_index[&a.relation.name];
        }
        by_var.into_values().collect()
    };

    // split facts: in-domain constants, out-of-domain constants, nulls
    let mut const_base: BTreeMap<&Name, u64> = BTreeMap::new();
    let mut out_base: BTreeMap<&Name, u64> = BTreeMap::new();
    let mut null_mask: BTreeMap<&Name, u64> = BTreeMap::new();
    for f in db.facts() {
        let bit = 1u64 << rel_index[&f.relation.name];
        match &f.args[0] {
            Term::Constant(c) if dom.contains(c) => *const_base.entry(c).or_insert(0) |= bit,
            Term::Constant(c) => *out_base.entry(c).or_insert(0) |= bit,
            Term::Null(n) => *null_mask.entry(n).or_insert(0) |= bit,
        }
    }

    // groups witnessed by an out-of-domain constant hold in every completion
    group_masks.retain(|&g| !out_base.values().any(|&b| b & g == g));

    // null blocks and constant classes
    let mut block_sizes: BTreeMap<u64, u64> = BTreeMap::new();
    for (_, &m) in &null_mask {
        *block_sizes.entry(m).or_insert(0) += 1;
    }
    let blocks: Vec<(u64, u64)> = block_sizes.into_iter().collect();
    let mut class_sizes: BTreeMap<u64, u64> = BTreeMap::new();
    for (_, &b) in &const_base {
        *class_sizes.entry(b).or_insert(0) += 1;
    }
    let in_dom = class_sizes.values().sum::<u64>();
    if d > in_dom {
        class_sizes.insert(0, d - in_dom);
    }

    // per class: the achievable targets with their minimal covers
    let full: u64 = (1 << l) - 1;
    let classes: Vec<ClassTargets> = class_sizes
        .iter()
        .map(|(&base, &size)| {
            let mut targets = Vec::new();
            let complement = full & !base;
            let mut extra = complement;
            // iterate over all subsets of the complement (including 0)
            loop {
                let t = base | extra;
                if let Some(covers) = minimal_covers(base, t, &blocks) {
                    targets.push(Target {
                        covers,
                        absorbs: blocks
                            .iter()
                            .enumerate()
                            .filter(|(_, (m, _))| m & t == *m)
                            .map(|(i, _)| 1u64 << i)
                            .fold(0, |a, b| a | b),
                        satisfies: group_masks
                            .iter()
                            .enumerate()
                            .filter(|(_, g)| *g & t == **g)
                            .map(|(i, _)| 1u64 << i)
                            .fold(0, |a, b| a | b),
                    });
                }
                if extra == 0 {
                    break;
                }
                extra = (extra - 1) & complement;
            }
            ClassTargets {
                size,
                targets,
            }
        })
        .collect();

    let caps: Vec<u64> = blocks.iter().map(|&(_, n)| n.min(d)).collect();
    let all_blocks_mask: u64 = if blocks.is_empty() {
        0
    } else {
        (1 << blocks.len()) - 1
    };
    let all_groups_mask: u64 = if group_masks.is_empty() {
        0
    } else {
        (1 << group_masks.len()) - 1
    };

    let mut search = Search {
        classes: &classes,
        caps: &caps,
        all_blocks_mask,
        all_groups_mask,
        total: Count::zero(),
        demands: Vec::new(),
        budget: ITERATION_BUDGET,
    };
    search.enumerate_class(0, Count::one(), 0, 0)?;
    Ok(search.total)
}

struct Target {
    /// minimal covers of `mask \ base` by block indices; empty when the
    /// target equals the base (nothing to cover)
    covers: Vec<Vec<usize>>,
    /// bit i set when block i can absorb extra nulls inside this type
    absorbs: u64,
    /// bit i set when query group i is witnessed by this type
    satisfies: u64,
}

struct ClassTargets {
    size: u64,
    targets: Vec<Target>,
}

/// Minimal covers of `t \ base` by blocks contained in `t`. `None` when `t`
/// is not achievable from this base; `Some(vec![])`-with-one-empty-cover is
/// represented as a single empty cover when `t == base`.
fn minimal_covers(base: u64, t: u64, blocks: &[(u64, u64)]) -> Option<Vec<Vec<usize>>> {
    if t == base {
        return Some(vec![Vec::new()]);
    }
    let usable: Vec<usize> = blocks
        .iter()
        .enumerate()
        .filter(|(_, (m, _))| m & t == *m)
        .map(|(i, _)| i)
        .collect();
    let mut covers: Vec<(u64, Vec<usize>)> = Vec::new(); // (block subset mask, indices)
    let k = usable.len();
    for subset in 1u64..(1 << k) {
        let mut covered = base;
        for (j, &bi) in usable.iter().enumerate() {
            if subset & (1 << j) != 0 {
                covered |= blocks[bi].0;
            }
        }
        if covered == t {
            covers.push((
                subset,
                usable
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| subset & (1 << j) != 0)
                    .map(|(_, &bi)| bi)
                    .collect(),
            ));
        }
    }
    if covers.is_empty() {
        return None;
    }
    covers.sort_by_key(|(m, _)| m.count_ones());
    let mut minimal: Vec<(u64, Vec<usize>)> = Vec::new();
    'outer: for (m, idxs) in covers {
        for (prev, _) in &minimal {
            if prev & m == *prev {
                continue 'outer;
            }
        }
        minimal.push((m, idxs));
    }
    Some(minimal.into_iter().map(|(_, idxs)| idxs).collect())
}

struct Search<'a> {
    classes: &'a [ClassTargets],
    caps: &'a [u64],
    all_blocks_mask: u64,
    all_groups_mask: u64,
    total: Count,
    /// demands accumulated along the current profile: (count, covers)
    demands: Vec<(u64, &'a [Vec<usize>])>,
    budget: u64,
}

impl<'a> Search<'a> {
    fn spend(&mut self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::ResourceLimit(
                "completion-count enumeration exceeded its iteration budget".into(),
            ));
        }
        self.budget -= 1;
        Ok(())
    }

    fn enumerate_class(
        &mut self,
        ci: usize,
        weight: Count,
        absorbed: u64,
        satisfied: u64,
    ) -> Result<()> {
        self.spend()?;
        if ci == self.classes.len() {
            if absorbed == self.all_blocks_mask
                && satisfied == self.all_groups_mask
                && self.routable()?
            {
                self.total += weight;
            }
            return Ok(());
        }
        let size = self.classes[ci].size;
        self.enumerate_targets(ci, 0, size, weight, absorbed, satisfied)
    }

    /// Distributes the remaining constants of class `ci` over its targets.
    fn enumerate_targets(
        &mut self,
        ci: usize,
        ti: usize,
        remaining: u64,
        weight: Count,
        absorbed: u64,
        satisfied: u64,
    ) -> Result<()> {
        self.spend()?;
        let class: &'a ClassTargets = &self.classes[ci];
        if ti == class.targets.len() {
            if remaining == 0 {
                return self.enumerate_class(ci + 1, weight, absorbed, satisfied);
            }
            return Ok(()); // constants left over with no target: dead branch
        }
        let target: &'a Target = &class.targets[ti];
        let is_last = ti + 1 == class.targets.len();
        for k in 0..=remaining {
            if is_last && k != remaining {
                continue;
            }
            let w = if k == 0 {
                weight.clone()
            } else {
                weight.clone() * binom(remaining, k)
            };
            let (abs, sat, pushed) = if k > 0 {
                let pushed = if !target.covers.is_empty() && target.covers[0].is_empty() {
                    false // target equals base: nothing to route
                } else {
                    self.demands.push((k, &target.covers));
                    true
                };
                (absorbed | target.absorbs, satisfied | target.satisfies, pushed)
            } else {
                (absorbed, satisfied, false)
            };
            self.enumerate_targets(ci, ti + 1, remaining - k, w, abs, sat)?;
            if pushed {
                self.demands.pop();
            }
        }
        Ok(())
    }

    /// Can every demand route its constants through minimal covers within the
    /// per-block null supplies?
    fn routable(&mut self) -> Result<bool> {
        let mut remaining: Vec<u64> = self.caps.to_vec();
        let demands: Vec<(u64, &[Vec<usize>])> = self.demands.clone();
        self.route(&demands, 0, &mut remaining)
    }

    fn route(
        &mut self,
        demands: &[(u64, &[Vec<usize>])],
        di: usize,
        remaining: &mut Vec<u64>,
    ) -> Result<bool> {
        self.spend()?;
        if di == demands.len() {
            return Ok(true);
        }
        let (k, _) = demands[di];
        self.route_demand(demands, di, 0, k, remaining)
    }

    fn route_demand(
        &mut self,
        demands: &[(u64, &[Vec<usize>])],
        di: usize,
        cj: usize,
        remaining_k: u64,
        remaining: &mut Vec<u64>,
    ) -> Result<bool> {
        self.spend()?;
        let covers = demands[di].1;
        if remaining_k == 0 {
            return self.route(demands, di + 1, remaining);
        }
        if cj == covers.len() {
            return Ok(false);
        }
        // how many constants of this demand use cover cj
        let cover = &covers[cj];
        let max_here = cover
            .iter()
            .map(|&bi| remaining[bi])
            .min()
            .unwrap_or(remaining_k)
            .min(remaining_k);
        let is_last = cj + 1 == covers.len();
        for y in (0..=max_here).rev() {
            if is_last && y != remaining_k {
                continue;
            }
            for &bi in cover {
                remaining[bi] -= y;
            }
            let ok = self.route_demand(demands, di, cj + 1, remaining_k - y, remaining)?;
            for &bi in cover {
                remaining[bi] += y;
            }
            if ok {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Domain, DomainMode, Fact};
    use crate::query::parse_query;

    fn q(text: &str) -> SjfBCQ {
        parse_query(text).unwrap().as_single().unwrap().clone()
    }

    fn uniform(facts: Vec<Fact>, dom: &[&str]) -> IncompleteDatabase {
        IncompleteDatabase::new(facts, DomainMode::Uniform(Domain::from_strs(dom).unwrap()))
            .unwrap()
    }

    fn unary(rel: &str, term: Term) -> Fact {
        Fact::from_terms(rel, vec![term]).unwrap()
    }

    #[test]
    fn single_relation_examples() {
        // {R(_a), R(_b)}, d = 2: completions {R(x)}, {R(y)}, {R(x),R(y)}
        let db = uniform(
            vec![unary("R", Term::null("a")), unary("R", Term::null("b"))],
            &["x", "y"],
        );
        assert_eq!(
            count_comp_uniform_unary(&q("R(x)"), &db).unwrap(),
            Count::from(3u32)
        );

        // ground singleton: exactly one completion
        let db = uniform(vec![unary("R", Term::constant("1"))], &["1", "2", "3"]);
        assert_eq!(
            count_comp_uniform_unary(&q("R(x)"), &db).unwrap(),
            Count::from(1u32)
        );

        // two nulls, d = 3: binom(3,1) + binom(3,2) = 6
        let db = uniform(
            vec![unary("R", Term::null("a")), unary("R", Term::null("b"))],
            &["1", "2", "3"],
        );
        assert_eq!(
            count_comp_uniform_unary(&q("R(x)"), &db).unwrap(),
            Count::from(6u32)
        );
    }

    #[test]
    fn out_of_domain_constants() {
        // R(c) with c outside dom: the single completion still satisfies R(x)
        let db = uniform(vec![unary("R", Term::constant("zz"))], &["1", "2"]);
        assert_eq!(
            count_comp_uniform_unary(&q("R(x)"), &db).unwrap(),
            Count::from(1u32)
        );

        // out-of-domain witness plus a null: the null roams freely
        let db = uniform(
            vec![
                unary("R", Term::constant("zz")),
                unary("R", Term::null("a")),
            ],
            &["1", "2"],
        );
        // completions: {R(zz),R(1)}, {R(zz),R(2)}
        assert_eq!(
            count_comp_uniform_unary(&q("R(x)"), &db).unwrap(),
            Count::from(2u32)
        );
    }

    #[test]
    fn empty_relation_means_zero() {
        let db = uniform(vec![unary("R", Term::null("a"))], &["1", "2"]);
        assert_eq!(
            count_comp_uniform_unary(&q("R(x) & S(y)"), &db).unwrap(),
            Count::from(0u32)
        );
    }

    #[test]
    fn rejects_binary_queries_and_nonuniform() {
        let db = uniform(vec![unary("R", Term::null("a"))], &["1"]);
        assert!(matches!(
            count_comp_uniform_unary(&q("R(x,y)"), &db),
            Err(Error::PatternMismatch(_))
        ));
    }
}
