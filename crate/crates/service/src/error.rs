//! JSON error bodies: `{"error": {"code", "message", "line"?, "failures"?}}`.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use curfit_core::Error;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyFailure {
    pub family: String,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<FamilyFailure>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.to_owned(),
                message: message.into(),
                line: None,
                failures: Vec::new(),
            },
        }
    }

    pub fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    /// A core error raised while parsing an upload.
    pub fn upload(err: Error) -> Self {
        Self::from_core(StatusCode::BAD_REQUEST, err)
    }

    /// A core error raised while selecting columns, splitting or training.
    pub fn training(err: Error) -> Self {
        Self::from_core(StatusCode::UNPROCESSABLE_ENTITY, err)
    }

    fn from_core(status: StatusCode, err: Error) -> Self {
        let mut api = Self::new(status, err.code(), err.to_string());
        match &err {
            Error::RaggedRow { line, .. } => api.body.line = Some(*line),
            Error::AllFamiliesFailed(failures) => {
                api.body.failures = failures
                    .iter()
                    .map(|(family, e)| FamilyFailure {
                        family: family.token().to_owned(),
                        code: e.code().to_owned(),
                        message: e.to_string(),
                    })
                    .collect();
            }
            _ => {}
        }
        api
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Envelope {
            error: ErrorBody,
        }
        (self.status, Json(Envelope { error: self.body })).into_response()
    }
}
