//! Configuration, boundary-data retraining, evaluation and the end-to-end experiment.

mod config;
mod experiment;
mod render;
mod retrain;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{
    AutopilotConfig, EvaluationConfig, RetrainConfig, RunConfig, OUT_DIR_ENV, THREADS_ENV,
};
pub use experiment::{
    evaluation_tracks, read_model, read_track, run_experiment, ExperimentReport, ModelSummary,
    OriginalRates, RetrainRun, SearchCell, TrackSummary,
};
pub use render::{render_track_svg, Overlay, ARROW_SCALE};
pub use retrain::{
    build_boundary_dataset, merge_and_split, retrain_model, BoundaryDataset, RetrainOutcome,
};

use crate::controllers::ControllerError;
use crate::dynamics::DynamicsError;
use crate::geometry::GeometryError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("every boundary state was discarded")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot access {}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        source: Box<PipelineError>,
    },
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("{0}")]
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub sha256: String,
}

/// Listing of what a run produced, tagged with its seed and configuration hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config_hash: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub artifacts: Vec<ArtifactRecord>,
}

/// Writes files below a root directory and remembers their digests.
#[derive(Debug)]
pub struct ArtifactWriter {
    root: PathBuf,
    records: Vec<ArtifactRecord>,
}

impl ArtifactWriter {
    pub fn new(root: &Path) -> Result<Self, PipelineError> {
        std::fs::create_dir_all(root).map_err(|source| PipelineError::Io {
            path: root.into(),
            source,
        })?;
        Ok(Self {
            root: root.into(),
            records: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, relative: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.root.join(relative);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
                path: dir.into(),
                source,
            })?;
        }
        std::fs::write(&path, bytes).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })?;
        self.records.push(ArtifactRecord {
            path: relative.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(
        &mut self,
        relative: &str,
        value: &T,
    ) -> Result<(), PipelineError> {
        let mut bytes =
            serde_json::to_vec_pretty(value).map_err(|e| PipelineError::Other(e.to_string()))?;
        bytes.push(b'\n');
        self.write(relative, &bytes)
    }

    pub fn records(&self) -> &[ArtifactRecord] {
        &self.records
    }
}
