use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use uuid::Uuid;
use waso_core::{NodeId, WasoError};

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Core(#[from] WasoError),

    #[error("no session {0}")]
    NotFound(Uuid),

    #[error("malformed request: {0}")]
    BadRequest(String),

    #[error("session has no solution yet; call solve first")]
    NotSolved,

    #[error("node {0} is not in the current group")]
    NotMember(NodeId),

    #[error("nothing to replan: no member has declined (pass force to re-solve anyway)")]
    NothingToReplan,

    #[error("snapshot storage failed: {0}")]
    Storage(String),
}

/// Body of every error response.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::Core(e) => e.code(),
            ServiceError::NotFound(_) => "not_found",
            ServiceError::BadRequest(_) => "bad_request",
            ServiceError::NotSolved => "not_solved",
            ServiceError::NotMember(_) => "not_a_member",
            ServiceError::NothingToReplan => "nothing_to_replan",
            ServiceError::Storage(_) => "storage_error",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::Core(e) => match e {
                WasoError::Infeasible(_) | WasoError::InfeasibleStart { .. } | WasoError::ScaleGuard(_) => {
                    StatusCode::UNPROCESSABLE_ENTITY
                }
                WasoError::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
                _ => StatusCode::BAD_REQUEST,
            },
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::BadRequest(_) | ServiceError::NotMember(_) => StatusCode::BAD_REQUEST,
            ServiceError::NotSolved | ServiceError::NothingToReplan => StatusCode::CONFLICT,
            ServiceError::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody { code: self.code().to_string(), message: self.to_string() }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(self.body())).into_response()
    }
}
