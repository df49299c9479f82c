use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("admissibility lost: {0}")]
    Admissibility(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Admissibility(_) => 3,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<nematic::Error> for CliError {
    fn from(e: nematic::Error) -> Self {
        use nematic::Error as E;
        match e {
            E::InvalidParameter(_) | E::SubCritical { .. } | E::NonUnitVector(_) => CliError::Usage(e.to_string()),
            E::AdmissibilityLost { .. } | E::NonAdmissible { .. } => CliError::Admissibility(e.to_string()),
            E::NoConvergence { .. } | E::CflViolation { .. } | E::Format(_) => CliError::Numeric(e.to_string()),
        }
    }
}
