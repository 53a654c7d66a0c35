//! The file manifest an experiment run returns: every artifact the run
//! wrote, by kind. Runs never leave unmanifested files behind.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArtifactKind {
    TimeseriesCsv,
    FieldCsv,
    GridCsv,
    EmbeddingCsv,
    SpectrumCsv,
    ComponentsCsv,
    PhasePortraitSvg,
    ReconstructionSvg,
    SpectrumSvg,
    MetadataJson,
}

impl ArtifactKind {
    pub fn label(&self) -> &'static str {
        match self {
            ArtifactKind::TimeseriesCsv => "timeseries-csv",
            ArtifactKind::FieldCsv => "field-csv",
            ArtifactKind::GridCsv => "grid-csv",
            ArtifactKind::EmbeddingCsv => "embedding-csv",
            ArtifactKind::SpectrumCsv => "spectrum-csv",
            ArtifactKind::ComponentsCsv => "components-csv",
            ArtifactKind::PhasePortraitSvg => "phase-portrait-svg",
            ArtifactKind::ReconstructionSvg => "reconstruction-svg",
            ArtifactKind::SpectrumSvg => "spectrum-svg",
            ArtifactKind::MetadataJson => "metadata-json",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ArtifactEntry {
    pub kind: ArtifactKind,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    entries: Vec<ArtifactEntry>,
}

impl RunArtifacts {
    pub fn push(&mut self, kind: ArtifactKind, path: PathBuf) {
        self.entries.push(ArtifactEntry { kind, path });
    }

    pub fn entries(&self) -> &[ArtifactEntry] {
        &self.entries
    }

    pub fn merge(&mut self, other: RunArtifacts) {
        self.entries.extend(other.entries);
    }

    pub fn count(&self, kind: ArtifactKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    pub fn paths_of(&self, kind: ArtifactKind) -> Vec<&Path> {
        self.entries
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| e.path.as_path())
            .collect()
    }

    /// Every manifested file must exist and be non-empty.
    pub fn verify(&self) -> Result<(), PipelineError> {
        for entry in &self.entries {
            let ok = fs::metadata(&entry.path)
                .map(|m| m.is_file() && m.len() > 0)
                .unwrap_or(false);
            if !ok {
                return Err(PipelineError::MissingArtifact {
                    path: entry.path.clone(),
                });
            }
        }
        Ok(())
    }
}
