use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("unknown {0}")]
    NotFound(String),
    #[error("{0}")]
    Conflict(String),
    #[error("bad archive: {0}")]
    BadArchive(String),
    #[error(transparent)]
    Engine(#[from] morseplan::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Internal(String),
}

impl ServiceError {
    pub fn status(&self) -> u16 {
        use morseplan::Error as E;
        match self {
            Self::Invalid(_) | Self::BadArchive(_) => 400,
            Self::Engine(E::Domain(_) | E::Validation(_) | E::Dimension { .. }) => 400,
            Self::NotFound(_) => 404,
            Self::Conflict(_) => 409,
            _ => 500,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.status() {
            400 => "validation",
            404 => "not_found",
            409 => "conflict",
            _ => "internal",
        }
    }

    pub fn body(&self, correlation_id: &str) -> ErrorBody {
        ErrorBody {
            engine_version: morseplan::ENGINE_VERSION.to_string(),
            error: ErrorDetail {
                kind: self.kind().to_string(),
                message: self.to_string(),
                correlation_id: correlation_id.to_string(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorDetail {
    pub kind: String,
    pub message: String,
    pub correlation_id: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorBody {
    pub engine_version: String,
    pub error: ErrorDetail,
}
