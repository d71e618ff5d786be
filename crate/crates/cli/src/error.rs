use serde_json::json;

/// Everything a command can fail with. Usage and configuration problems
/// exit with 2, everything else with 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("{what} `{path}`: {message}")]
    MissingPath { what: String, path: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Input(String),
    #[error("verification failed: {message}")]
    Verification { message: String, report: serde_json::Value },
    #[error(transparent)]
    Core(#[from] psda_core::Error),
}

impl CliError {
    pub fn config(key: &str, message: String) -> Self {
        CliError::Config { key: key.to_string(), message }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::MissingPath { .. } => "missing_path",
            CliError::Io { .. } => "io",
            CliError::Input(_) => "input",
            CliError::Verification { .. } => "verification",
            CliError::Core(_) => "pipeline",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } | CliError::MissingPath { .. } => 2,
            _ => 1,
        }
    }

    /// One-line JSON rendering for stderr.
    pub fn to_json(&self) -> String {
        let mut body = json!({ "kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() });
        match self {
            CliError::Config { key, .. } => body["key"] = json!(key),
            CliError::MissingPath { path, .. } | CliError::Io { path, .. } => body["path"] = json!(path),
            CliError::Verification { report, .. } => body["report"] = report.clone(),
            _ => {}
        }
        json!({ "error": body }).to_string()
    }
}

macro_rules! core_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}

core_from!(
    psda_core::taxonomy::TaxonomyError,
    psda_core::embeddings::EmbeddingError,
    psda_core::gmm::GmmError,
    psda_core::domino::DominoError,
    psda_core::augment::AugmentError,
    psda_core::otreg::OtError
);
