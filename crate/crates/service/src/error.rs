use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use vinesim_core::protocol::ErrorBody;
use vinesim_core::scenario::ScenarioError;
use vinesim_core::VineError;

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub kind: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            kind,
            message: message.into(),
        }
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", what)
    }

    pub fn parse(e: serde_json::Error) -> Self {
        Self::new(
            StatusCode::BAD_REQUEST,
            "parse",
            format!("line {}, column {}: {e}", e.line(), e.column()),
        )
    }

    /// A scenario that validated but failed while stepping is a runtime
    /// fault, whatever the underlying cause.
    pub fn run_failed(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Runtime(VineError::NotFound(m)) => Self::not_found(m),
            ScenarioError::Runtime(v) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "runtime", v.to_string()),
            other => other.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<VineError> for ApiError {
    fn from(e: VineError) -> Self {
        match e {
            VineError::NotFound(_) => Self::not_found(e.to_string()),
            VineError::Domain(_)
            | VineError::InvalidConfig(_)
            | VineError::MissingJointPressure(_)
            | VineError::Overpressure { .. }
            | VineError::EmptyPlan => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", e.to_string()),
            _ => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "runtime", e.to_string()),
        }
    }
}

impl From<ScenarioError> for ApiError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Parse { .. } => Self::new(StatusCode::BAD_REQUEST, "parse", e.to_string()),
            ScenarioError::Validation(_) => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "validation", e.to_string()),
            ScenarioError::Runtime(v) => v.into(),
            ScenarioError::Io(m) => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "io", m),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            kind: self.kind.to_string(),
            error: self.message,
        };
        (self.status, Json(body)).into_response()
    }
}
