use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("resource cap reached: {0}")]
    Cap(String),
    #[error("{0} acceptance check(s) failed")]
    ChecksFailed(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Inconclusive(_) => 3,
            CliError::Cap(_) => 4,
            _ => 1,
        }
    }
}

impl From<hyperperc::Error> for CliError {
    fn from(e: hyperperc::Error) -> Self {
        use hyperperc::Error as E;
        match e {
            e if e.is_resource_cap() => CliError::Cap(e.to_string()),
            E::NoSolution(_) => CliError::Inconclusive(e.to_string()),
            e => CliError::Validation(e.to_string()),
        }
    }
}
