use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: undeclared variable {name}")]
    UndeclaredVariable { name: String, line: usize, column: usize },
    #[error("undeclared non-terminal {name}")]
    UndeclaredNonTerminal { name: String },
    #[error("duplicate variable declaration {0}")]
    DuplicateVariable(String),
    #[error("invalid variable name {0:?}")]
    InvalidVariableName(String),
    #[error("invalid non-terminal name {0:?}")]
    InvalidNonTerminalName(String),
    #[error("{found} variables declared; the engine supports at most {max}")]
    TooManyVariables { found: usize, max: usize },
    #[error("grammar is not in Chomsky normal form: {0}")]
    NotCnf(String),
    #[error("grammar not functional: non-terminal {0} derives ref-words with different variable operations")]
    NotFunctional(String),
    #[error("variable sets differ: {left:?} vs {right:?}")]
    VariableMismatch { left: Vec<String>, right: Vec<String> },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("ref-word is not valid for the variable set")]
    InvalidRefWord,
    #[error("decorated word is not valid: {0}")]
    InvalidDecoratedWord(String),
    #[error("invalid span mapping: {0}")]
    InvalidMapping(String),
    #[error("oracle budget exceeded: {required} candidate gap assignments, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("the empty document is handled by the empty-document check, not by adjustment")]
    EmptyDocument,
    #[error("document of length {0} exceeds the supported maximum of {max}", max = u16::MAX)]
    DocumentTooLong(usize),
    #[error("length bound {bound} is below the required {required}")]
    BoundTooSmall { bound: usize, required: usize },
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
