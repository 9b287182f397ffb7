//! Counting engine for incomplete databases.
//!
//! An incomplete database is a set of relational facts over constants and
//! labeled nulls, where each null ranges over a finite domain of constants
//! (per-null domains, or one uniform domain shared by all nulls). A valuation
//! assigns every null a constant from its domain; applying it and removing
//! duplicate facts yields a completion. For a self-join-free Boolean
//! conjunctive query `q`, this crate answers:
//!
//! - how many valuations yield a completion satisfying `q` ([`oracle::brute_count_val`],
//!   [`exact`] counters, [`approx::karp_luby_estimate`]);
//! - how many distinct completions satisfy `q` ([`oracle::brute_count_comp`],
//!   [`exact::count_comp_uniform_unary`]);
//! - where each of the eight (table kind x domain kind x problem) variants sits
//!   on the tractable / #P-hard frontier, and whether it admits an FPRAS
//!   ([`query::classify`]);
//! - graph reductions that turn 3-coloring, independent-set, vertex-cover,
//!   avoidance and pseudoforest counting into counting problems over incomplete
//!   databases, each paired with the exact identity it certifies ([`reductions`]).

pub mod approx;
pub mod combinatorics;
pub mod error;
pub mod exact;
pub mod format;
pub mod graph;
pub mod model;
pub mod oracle;
pub mod query;
pub mod reductions;
pub mod rng;

#[doc(hidden)]
pub mod testgen;

pub use combinatorics::Count;
pub use error::{Error, Result};
pub use model::{Completion, DomainMode, Fact, IncompleteDatabase, RelationSymbol, Term, Valuation};
pub use query::{Atom, DichotomyVerdict, Problem, SjfBCQ, UnionQuery};
