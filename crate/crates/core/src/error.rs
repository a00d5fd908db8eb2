use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: predicate `{predicate}` used with arity {found}, expected {expected}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
        line: usize,
    },
    #[error("rule `{rule}` is unsafe: variable `{var}` of a negative body does not occur in the positive body")]
    Unsafe { rule: String, var: String },
    #[error("substitution is not a homomorphism from the body of rule `{rule}`")]
    NotAHomomorphism { rule: String },
    #[error("rule `{target}` is not reachable from `{from}` in the rule dependency graph")]
    Unreachable { from: String, target: String },
    #[error("criterion `{0}` is not supported here: only skolem and core give equivalent stable sets on equivalent knowledge bases")]
    UnsupportedCriterion(String),
    #[error("malformed unifier sequence: {0}")]
    MalformedSequence(String),
    #[error("{0} position graph requires {1}")]
    MissingPrerequisite(&'static str, &'static str),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
