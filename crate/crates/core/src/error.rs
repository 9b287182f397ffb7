//! One error type for the whole crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Text input (query, database file, graph file) is malformed.
    /// `line` is 1-based for file inputs, 0 for single-line query strings;
    /// `column` is a 1-based character offset into that line.
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// A relation symbol occurs twice within one conjunct.
    #[error("self-join: relation {0} appears in more than one atom of a conjunct")]
    SelfJoin(String),

    /// A null of the database has no value in the valuation.
    #[error("valuation misses an assignment for null {0}")]
    MissingAssignment(String),

    /// A valuation maps a null to a constant outside its domain.
    #[error("valuation maps null {null} to {value}, outside its domain")]
    DomainViolation { null: String, value: String },

    /// A null was declared with an empty domain.
    #[error("null {0} has an empty domain")]
    EmptyDomain(String),

    /// The database violates a structural invariant (arity clash, domain for an
    /// absent null, null without a domain, ...).
    #[error("malformed database: {0}")]
    Malformed(String),

    /// The query and database disagree on relation names or arities.
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    /// An operation that requires a Codd table got a naive table.
    #[error("not a Codd table: null {0} occurs more than once")]
    NotCodd(String),

    /// An operation that requires a uniform domain got per-null domains.
    #[error("operation requires a uniform domain")]
    NonUniform,

    /// A query fails the structural precondition of an exact algorithm.
    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),

    /// No polynomial-time algorithm applies; the witnesses name the hard
    /// patterns found in the query.
    #[error("no exact polynomial algorithm applies (hard patterns: {})", witnesses.join(", "))]
    NotTractable { witnesses: Vec<String> },

    /// The instance is too large for an enumeration-based operation.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// epsilon or delta outside (0, 1).
    #[error("epsilon and delta must lie strictly between 0 and 1")]
    InvalidTolerance,

    /// The avoidance encoding needs every node to have an incident edge.
    #[error("node {0} is isolated; the avoidance encoding needs a nonempty edge set per node")]
    IsolatedNode(String),
}

impl Error {
    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
