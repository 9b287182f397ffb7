//! The dichotomy classifier: which of the eight (table kind, domain kind,
//! problem) cells a query falls into, for exact counting and approximation.

use std::fmt;

use serde_json::{json, Value};

use crate::query::patterns::{pattern_profile, CanonicalPattern, PatternProfile};
use crate::query::SjfBCQ;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableKind {
    Naive,
    Codd,
}

impl TableKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TableKind::Naive => "naive",
            TableKind::Codd => "codd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    NonUniform,
    Uniform,
}

impl DomainKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DomainKind::NonUniform => "nonuniform",
            DomainKind::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Valuations,
    Completions,
}

impl Problem {
    pub fn as_str(&self) -> &'static str {
        match self {
            Problem::Valuations => "val",
            Problem::Completions => "comp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactVerdict {
    Fp,
    SharpPHard,
    SharpPComplete,
    Open,
}

impl ExactVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExactVerdict::Fp => "FP",
            ExactVerdict::SharpPHard => "#P-hard",
            ExactVerdict::SharpPComplete => "#P-complete",
            ExactVerdict::Open => "Open",
        }
    }

    pub fn is_fp(&self) -> bool {
        matches!(self, ExactVerdict::Fp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxVerdict {
    Fp,
    Fpras,
    NoFprasUnlessNpEqRp,
    Open,
}

impl ApproxVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ApproxVerdict::Fp => "FP",
            ApproxVerdict::Fpras => "FPRAS",
            ApproxVerdict::NoFprasUnlessNpEqRp => "no-FPRAS-unless-NP=RP",
            ApproxVerdict::Open => "Open",
        }
    }
}

/// Verdict for one cell of the dichotomy table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DichotomyVerdict {
    pub table: TableKind,
    pub domain: DomainKind,
    pub problem: Problem,
    pub exact: ExactVerdict,
    pub approx: ApproxVerdict,
    /// Short names of the cell's hard patterns found in the query.
    pub witnesses: Vec<String>,
}

impl DichotomyVerdict {
    /// Canonical JSON (keys are emitted sorted).
    pub fn to_json(&self) -> Value {
        json!({
            "setting": {
                "table": self.table.as_str(),
                "domain": self.domain.as_str(),
            },
            "problem": self.problem.as_str(),
            "exact": self.exact.as_str(),
            "approx": self.approx.as_str(),
            "witnesses": self.witnesses,
        })
    }
}

impl fmt::Display for DichotomyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} exact={} approx={} witnesses=[{}]",
            self.problem.as_str(),
            self.table.as_str(),
            self.domain.as_str(),
            self.exact.as_str(),
            self.approx.as_str(),
            self.witnesses.join(",")
        )
    }
}

fn found(profile: &PatternProfile, candidates: &[CanonicalPattern]) -> Vec<String> {
    candidates
        .iter()
        .filter(|p| profile.contains(**p))
        .map(|p| p.short_name().to_string())
        .collect()
}

/// Classifies `q` in the cell `(table, domain, problem)` per the dichotomy
/// table. Hard valuation cells and hard Codd-table completion cells are
/// #P-complete; naive-table completion hardness is reported as #P-hard only.
/// The (valuations, Codd, uniform) cell is open except where the path pattern
/// makes it hard.
pub fn classify(
    q: &SjfBCQ,
    table: TableKind,
    domain: DomainKind,
    problem: Problem,
) -> DichotomyVerdict {
    let profile = pattern_profile(q);
    use ApproxVerdict as A;
    use CanonicalPattern as P;
    use ExactVerdict as E;

    let (exact, witnesses) = match (problem, table, domain) {
        (Problem::Valuations, TableKind::Naive, DomainKind::NonUniform) => {
            let w = found(&profile, &[P::Xx, P::XSx]);
            (if w.is_empty() { E::Fp } else { E::SharpPComplete }, w)
        }
        (Problem::Valuations, TableKind::Codd, DomainKind::NonUniform) => {
            let w = found(&profile, &[P::XSx]);
            (if w.is_empty() { E::Fp } else { E::SharpPComplete }, w)
        }
        (Problem::Valuations, TableKind::Naive, DomainKind::Uniform) => {
            let w = found(&profile, &[P::Xx, P::Path, P::XySxy]);
            (if w.is_empty() { E::Fp } else { E::SharpPComplete }, w)
        }
        (Problem::Valuations, TableKind::Codd, DomainKind::Uniform) => {
            // The open cell of the table: hard when the path pattern is
            // present, open otherwise (no FP claim exists for this cell).
            let w = found(&profile, &[P::Path]);
            (if w.is_empty() { E::Open } else { E::SharpPComplete }, w)
        }
        (Problem::Completions, TableKind::Naive, DomainKind::NonUniform) => {
            (E::SharpPHard, found(&profile, &[P::X]))
        }
        (Problem::Completions, TableKind::Codd, DomainKind::NonUniform) => {
            (E::SharpPComplete, found(&profile, &[P::X]))
        }
        (Problem::Completions, TableKind::Naive, DomainKind::Uniform) => {
            let w = found(&profile, &[P::Xx, P::Xy]);
            (if w.is_empty() { E::Fp } else { E::SharpPHard }, w)
        }
        (Problem::Completions, TableKind::Codd, DomainKind::Uniform) => {
            let w = found(&profile, &[P::Xx, P::Xy]);
            (if w.is_empty() { E::Fp } else { E::SharpPComplete }, w)
        }
    };

    let approx = match (problem, table, domain) {
        (Problem::Valuations, _, _) => A::Fpras,
        (Problem::Completions, _, DomainKind::NonUniform) => A::NoFprasUnlessNpEqRp,
        (Problem::Completions, TableKind::Naive, DomainKind::Uniform) => {
            if profile.xx || profile.xy {
                A::NoFprasUnlessNpEqRp
            } else {
                A::Fp
            }
        }
        (Problem::Completions, TableKind::Codd, DomainKind::Uniform) => {
            if profile.xx || profile.xy {
                A::Open
            } else {
                A::Fp
            }
        }
    };

    debug_assert!(
        !exact.is_fp() || matches!(approx, A::Fp | A::Fpras),
        "exact FP must imply approx FP or FPRAS"
    );

    DichotomyVerdict {
        table,
        domain,
        problem,
        exact,
        approx,
        witnesses,
    }
}

/// All eight verdicts in a fixed order: problem (val, comp) major, then
/// table (naive, codd), then domain (nonuniform, uniform).
pub fn classify_all(q: &SjfBCQ) -> Vec<DichotomyVerdict> {
    let mut out = Vec::with_capacity(8);
    for problem in [Problem::Valuations, Problem::Completions] {
        for table in [TableKind::Naive, TableKind::Codd] {
            for domain in [DomainKind::NonUniform, DomainKind::Uniform] {
                out.push(classify(q, table, domain, problem));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::parse_query;

    fn q(text: &str) -> SjfBCQ {
        parse_query(text).unwrap().as_single().unwrap().clone()
    }

    #[test]
    fn rx_sx_examples() {
        let query = q("R(x) & S(x)");
        let v = classify(
            &query,
            TableKind::Naive,
            DomainKind::NonUniform,
            Problem::Valuations,
        );
        assert_eq!(v.exact, ExactVerdict::SharpPComplete);
        assert_eq!(v.witnesses, vec!["xSx"]);

        let v = classify(
            &query,
            TableKind::Naive,
            DomainKind::Uniform,
            Problem::Valuations,
        );
        assert_eq!(v.exact, ExactVerdict::Fp);

        let v = classify(
            &query,
            TableKind::Codd,
            DomainKind::Uniform,
            Problem::Valuations,
        );
        assert_eq!(v.exact, ExactVerdict::Open);
    }

    #[test]
    fn completion_cells_for_unary_query() {
        let query = q("R(x)");
        let v = classify(
            &query,
            TableKind::Codd,
            DomainKind::NonUniform,
            Problem::Completions,
        );
        assert_eq!(v.exact, ExactVerdict::SharpPComplete);
        let v = classify(
            &query,
            TableKind::Naive,
            DomainKind::NonUniform,
            Problem::Completions,
        );
        assert_eq!(v.exact, ExactVerdict::SharpPHard);
        assert_eq!(v.approx, ApproxVerdict::NoFprasUnlessNpEqRp);
        // unary schema: uniform completion counting is tractable
        for table in [TableKind::Naive, TableKind::Codd] {
            let v = classify(&query, table, DomainKind::Uniform, Problem::Completions);
            assert_eq!(v.exact, ExactVerdict::Fp);
            assert_eq!(v.approx, ApproxVerdict::Fp);
        }
    }

    #[test]
    fn rxx_uniform_valuations_hard() {
        let v = classify(
            &q("R(x,x)"),
            TableKind::Naive,
            DomainKind::Uniform,
            Problem::Valuations,
        );
        assert_eq!(v.exact, ExactVerdict::SharpPComplete);
        assert_eq!(v.approx, ApproxVerdict::Fpras);
        assert_eq!(v.witnesses, vec!["xx"]);
    }

    #[test]
    fn json_shape_is_canonical() {
        let v = classify(
            &q("R(x,x)"),
            TableKind::Naive,
            DomainKind::Uniform,
            Problem::Valuations,
        );
        assert_eq!(
            serde_json::to_string(&v.to_json()).unwrap(),
            "{\"approx\":\"FPRAS\",\"exact\":\"#P-complete\",\"problem\":\"val\",\
             \"setting\":{\"domain\":\"uniform\",\"table\":\"naive\"},\"witnesses\":[\"xx\"]}"
        );
    }
}
