use thiserror::Error;

/// Failures of an experiment run, each mapped to a process exit status.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown preset `{name}`{}", suggestion.as_ref().map(|s| format!("; did you mean `{s}`?")).unwrap_or_default())]
    UnknownPreset { name: String, suggestion: Option<String> },
    #[error("solver failure: {0}")]
    Solver(#[from] lab_core::Error),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::UnknownPreset { .. } => 2,
            LabError::Solver(_) | LabError::Io(_) => 3,
        }
    }
}
