use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error in '{field}': {message}")]
    Config { field: String, message: String },
    #[error(transparent)]
    Core(#[from] qlimit::Error),
    #[error("no records to emit")]
    EmptyResults,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl LabError {
    /// Process exit code: 1 for config errors, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config { .. } => 1,
            _ => 2,
        }
    }
}
