use thiserror::Error;

/// Errors raised by the expression kernel and the solvers built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared symbol `{name}` at byte {pos}")]
    Undeclared { name: String, pos: usize },
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error("expressions belong to different contexts")]
    ContextMismatch,
    #[error("division by the zero expression")]
    DivisionByZero,
    #[error("substitution produces a zero denominator")]
    ZeroDenominator,
    #[error("unknown independent variable #{0}")]
    UnknownVariable(usize),
    #[error("unknown dependent variable #{0}")]
    UnknownDependent(usize),
    #[error("Wronskian vanishes identically (functions are totally linearly dependent)")]
    ZeroWronskian,
    #[error("not a total divergence: {0}")]
    NotADivergence(String),
    #[error("not integrable in closed form: {0}")]
    NotIntegrable(String),
    #[error("non-polynomial dependence: {0}")]
    NonPolynomial(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not a density of the equation: {0}")]
    NotADensity(String),
    #[error("matrix is not antisymmetric at ({0}, {1})")]
    SymmetryViolation(usize, usize),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
