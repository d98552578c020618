use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("population invalid: {}", format_violations(.0))]
    Invalid(Vec<Violation>),

    #[error("state space too large; use quotient engine ({eligible} eligible users, cap {cap})")]
    TooManyEligible { eligible: usize, cap: usize },

    #[error("state cap exceeded: explored more than {cap} states")]
    StateCapExceeded { cap: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
