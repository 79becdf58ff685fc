use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::controllers::{
    fit_split, Dataset, DrivingModel, FeatureSpec, LabeledSample, LearnedModel, Provenance, Split,
    TrainHyper,
};
use crate::dynamics::{run_episode, SimConfig};
use crate::geometry::Track;
use crate::search::ArchiveEntry;

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDataset {
    pub data: Dataset,
    /// Non-recoverable states the autopilot kept in lane.
    pub kept_states: usize,
    pub discarded_states: usize,
}

/// Lets the autopilot drive `steps` steps from the non-recoverable state of
/// every likely pair and records its commands as `boundary` samples. States
/// the autopilot itself cannot keep in lane contribute nothing.
pub fn build_boundary_dataset(
    entries: &[ArchiveEntry],
    track: &Track,
    autopilot: &DrivingModel,
    steps: usize,
    sim: &SimConfig,
) -> Result<BoundaryDataset, PipelineError> {
    let sim = sim.deterministic();
    let spec = FeatureSpec::default();
    let mut out = BoundaryDataset {
        data: Dataset::default(),
        kept_states: 0,
        discarded_states: 0,
    };
    for e in entries.iter().filter(|e| e.is_likely()) {
        let episode = run_episode(autopilot, track, e.failing_state(), steps, &sim, 0)?;
        if !episode.success {
            out.discarded_states += 1;
            continue;
        }
        out.kept_states += 1;
        // the last trace entry is the state after the final command
        for t in &episode.trace[..steps] {
            out.data.samples.push(LabeledSample {
                observation: spec.observe(&t.state, track),
                steering_label: t.steer,
                provenance: Provenance::Boundary,
            });
        }
    }
    if out.data.is_empty() {
        return Err(PipelineError::EmptyDataset);
    }
    Ok(out)
}

/// Adds boundary samples to an existing split. A seeded `validation_fraction`
/// share joins the original validation set, which is kept verbatim, and the
/// rest joins the training set.
pub fn merge_and_split(
    original: &Split,
    boundary: &Dataset,
    validation_fraction: f64,
    seed: u64,
) -> Split {
    let mut order: Vec<usize> = (0..boundary.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = ((boundary.len() as f64) * validation_fraction).round() as usize;
    let mut merged = original.clone();
    for (k, &i) in order.iter().enumerate() {
        let sample = boundary.samples[i].clone();
        if k < n_val {
            merged.validation.samples.push(sample);
        } else {
            merged.train.samples.push(sample);
        }
    }
    merged
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrainOutcome {
    pub model: LearnedModel,
    /// Loss of the original model on the merged validation set.
    pub original_validation_loss: f64,
    pub retrained_validation_loss: f64,
}

/// Refits `original` from scratch on the merged split with its own
/// hyperparameters and seed.
pub fn retrain_model(
    original: &LearnedModel,
    hyper: &TrainHyper,
    merged: &Split,
) -> Result<RetrainOutcome, PipelineError> {
    let mut model = fit_split(merged, hyper, original.seed)?;
    model.name = format!("{}-retrained", original.name);
    Ok(RetrainOutcome {
        original_validation_loss: original.mse(&merged.validation),
        retrained_validation_loss: model.validation_loss,
        model,
    })
}
