use std::path::PathBuf;

use phylolink::evaluate::{CrossValError, EvalError};
use phylolink::interactions::InteractionError;
use phylolink::newick::NewickError;
use phylolink::sampler::SamplerError;
use phylolink::transforms::TransformError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) | CliError::MissingArtifact(_) | CliError::Io { .. } => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<NewickError> for CliError {
    fn from(e: NewickError) -> Self {
        CliError::Data(format!("tree: {e}"))
    }
}

impl From<InteractionError> for CliError {
    fn from(e: InteractionError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::ParameterOutOfDomain { .. } | TransformError::Parse(_) | TransformError::EmptyGrid => {
                CliError::Config(e.to_string())
            }
            TransformError::LabelMismatch => CliError::Data(e.to_string()),
            TransformError::Eval(inner) => inner.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<SamplerError> for CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::InvalidConfig(_) | SamplerError::MissingPhylogeny | SamplerError::SingleHostColumns(_) => {
                CliError::Config(e.to_string())
            }
            SamplerError::LabelMismatch => CliError::Data(e.to_string()),
            SamplerError::Model(m) => CliError::Config(m.to_string()),
            SamplerError::Transform(t) => t.into(),
            SamplerError::EmptyTrace => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::InvalidFolds(_) | EvalError::InvalidGrid(_) => CliError::Config(e.to_string()),
            EvalError::InfeasibleFloor { .. } | EvalError::DegenerateTruth { .. } | EvalError::EmptyTestSet => {
                CliError::Data(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<CrossValError> for CliError {
    fn from(e: CrossValError) -> Self {
        match e {
            CrossValError::Eval(inner) => inner.into(),
            CrossValError::Sampler { fold, model, source } => match CliError::from(source) {
                CliError::Config(m) => CliError::Config(format!("model {model}, fold {fold}: {m}")),
                CliError::Data(m) => CliError::Data(format!("model {model}, fold {fold}: {m}")),
                CliError::Numerical(m) => CliError::Numerical(format!("model {model}, fold {fold}: {m}")),
                other => other,
            },
        }
    }
}
