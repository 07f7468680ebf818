use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error at `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("experiment `{experiment}` failed: {source}")]
    Experiment {
        experiment: String,
        #[source]
        source: Box<LabError>,
    },
    #[error("manifest has no experiment `{0}`")]
    MissingExperiment(String),
    #[error(transparent)]
    Core(#[from] schrodinger_core::CoreError),
    #[error(transparent)]
    Kernel(#[from] green_kernels::KernelError),
    #[error(transparent)]
    Field(#[from] field_interactions::FieldError),
    #[error(transparent)]
    Gibbs(#[from] gibbs_estimators::GibbsError),
    #[error(transparent)]
    Counterterm(#[from] counterterm_solver::CountertermError),
    #[error(transparent)]
    Bridge(#[from] bridge_mc::BridgeError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        LabError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
