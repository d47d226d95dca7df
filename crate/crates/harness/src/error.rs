use thiserror::Error;
use waso_core::WasoError;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Solver(#[from] WasoError),

    #[error("invalid experiment spec: {0}")]
    Spec(String),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn code(&self) -> &'static str {
        match self {
            HarnessError::Solver(e) => e.code(),
            HarnessError::Spec(_) => "invalid_spec",
            HarnessError::Json(_) => "json_error",
            HarnessError::Csv(_) => "csv_error",
            HarnessError::Io(_) => "io_error",
        }
    }
}
