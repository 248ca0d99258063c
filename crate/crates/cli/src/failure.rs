use ceoh_core::evolution::{RunError, SnapshotError};
use ceoh_core::llm::LlmError;

/// Exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config,
    Fixture,
    Endpoint,
    Runtime,
}

impl Kind {
    pub fn code(self) -> u8 {
        match self {
            Kind::Config => 2,
            Kind::Fixture => 3,
            Kind::Endpoint => 4,
            Kind::Runtime => 5,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub error: anyhow::Error,
}

pub type Outcome = Result<(), Failure>;

pub fn config(error: impl Into<anyhow::Error>) -> Failure {
    Failure { kind: Kind::Config, error: error.into() }
}

pub fn runtime(error: impl Into<anyhow::Error>) -> Failure {
    Failure { kind: Kind::Runtime, error: error.into() }
}

pub fn llm_kind(e: &LlmError) -> Kind {
    match e {
        LlmError::MissingFixture { .. } | LlmError::Fixture(_) => Kind::Fixture,
        LlmError::InvalidRequest(_) => Kind::Runtime,
        _ => Kind::Endpoint,
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let kind = match &e {
            RunError::Config(_) | RunError::Instances(_) | RunError::Prompt(_) => Kind::Config,
            RunError::Snapshot(
                SnapshotError::Digest { .. } | SnapshotError::Format { .. } | SnapshotError::Corrupt { .. },
            ) => Kind::Config,
            RunError::Llm(l) => llm_kind(l),
            RunError::NoResponses { .. } => Kind::Endpoint,
            _ => Kind::Runtime,
        };
        Failure { kind, error: e.into() }
    }
}
