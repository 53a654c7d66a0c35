use std::path::{Path, PathBuf};

use phaselens_core::embed::EmbedError;
use phaselens_core::ode::OdeError;
use phaselens_core::pca::PcaError;
use phaselens_core::systems::KdvError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse {path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("integration failed: {0}")]
    Ode(#[from] OdeError),
    #[error("KdV simulation failed: {0}")]
    Kdv(#[from] KdvError),
    #[error("embedding failed: {0}")]
    Embed(#[from] EmbedError),
    #[error("decomposition failed: {0}")]
    Pca(#[from] PcaError),
    #[error("cannot emit empty table to {path}")]
    EmptyTable { path: PathBuf },
    #[error("cannot emit chart without data points to {path}")]
    EmptyChart { path: PathBuf },
    #[error("manifest entry missing or empty: {path}")]
    MissingArtifact { path: PathBuf },
}

impl PipelineError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Numerical failures exit with code 2 at the CLI; everything else is
    /// treated as a usage error (code 1).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            PipelineError::Ode(OdeError::Diverged { .. })
                | PipelineError::Kdv(KdvError::Diverged { .. })
                | PipelineError::Kdv(KdvError::ImaginaryResidue { .. })
                | PipelineError::Pca(PcaError::NonConvergence { .. })
                | PipelineError::Pca(PcaError::NonFinite)
                | PipelineError::Pca(PcaError::DegenerateSpectrum)
        )
    }
}
