use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::render::{render_track_svg, Overlay};
use super::retrain::{build_boundary_dataset, merge_and_split, retrain_model};
use super::{ArtifactWriter, EvaluationConfig, Manifest, PipelineError, RunConfig};
use crate::boundary_states::MutationContext;
use crate::controllers::{
    collect_reference_trace, tier_split, train_ladder, tune_autopilot, Autopilot, Dataset,
    DrivingModel, LadderTier, PidGains,
};
use crate::derive_seed;
use crate::dynamics::{drive_nominal, EpisodeResult, TraceStep, VehicleState};
use crate::geometry::{
    count_turns, generate_evaluation_track, track_curvature, track_distance, training_track,
    GeometryError, Track, TrackFile,
};
use crate::metrics::{
    mann_whitney_u, mean, radius, recoverability, success_rate, vargha_delaney_a12,
    write_recoverability_csv, MannWhitney, RecoverabilityReport,
};
use crate::search::{
    run_search, write_archive, Algorithm, ArchiveEntry, SearchReport, SearchSetup, SimRunner,
};

// seed streams of the master seed
const LADDER_STREAM: u64 = 1;
const EVAL_TRACK_STREAM: u64 = 2;
const SEARCH_STREAM: u64 = 3;
const RECOVERABILITY_STREAM: u64 = 4;
const RETRAIN_STREAM: u64 = 5;
const SUCCESS_STREAM: u64 = 6;

/// Mutation attempts within one harder-track step.
const STEP_ATTEMPTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSummary {
    pub name: String,
    pub curvature: f64,
    pub turns: usize,
    /// Distance to the training track; zero for the training track itself.
    pub distance_to_training: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierSummary {
    pub name: String,
    pub fraction: f64,
    pub train_samples: usize,
    pub draw: usize,
    pub validation_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchCell {
    pub algorithm: Algorithm,
    pub model: String,
    pub repetition: usize,
    pub seed: u64,
    pub archive_size: usize,
    pub likely_pairs: usize,
    pub episodes: usize,
    pub replication_episodes: usize,
    pub mean_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: String,
    pub genbo_counts: Vec<usize>,
    pub baseline_counts: Vec<usize>,
    pub genbo_mean: f64,
    pub baseline_mean: f64,
    pub genbo_vs_baseline: MannWhitney,
    pub genbo_vs_baseline_a12: f64,
    /// Mean radius of each GenBo repetition that found likely pairs.
    pub radii: Vec<f64>,
    pub mean_radius: Option<f64>,
    /// Radii compared with the weakest tier's.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_vs_weakest: Option<MannWhitney>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius_vs_weakest_a12: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalRates {
    pub model: String,
    pub training_track_rate: f64,
    /// Success percentage per evaluation track, in track order.
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrainRun {
    pub model: String,
    pub repetition: usize,
    pub boundary_states: usize,
    pub discarded_states: usize,
    pub boundary_samples: usize,
    pub original_validation_loss: f64,
    pub retrained_validation_loss: f64,
    pub passes_nominal_drive: bool,
    pub training_track_rate: f64,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub config_hash: String,
    pub autopilot_gains: PidGains,
    pub training_track: TrackSummary,
    pub evaluation_tracks: Vec<TrackSummary>,
    pub ladder: Vec<TierSummary>,
    /// Model names, weakest tier first and the autopilot last.
    pub models: Vec<String>,
    pub searches: Vec<SearchCell>,
    pub summaries: Vec<ModelSummary>,
    pub recoverability: Vec<RecoverabilityReport>,
    pub original_rates: Vec<OriginalRates>,
    pub retraining: Vec<RetrainRun>,
}

impl ExperimentReport {
    pub fn summary(&self, model: &str) -> Option<&ModelSummary> {
        self.summaries.iter().find(|s| s.model == model)
    }

    pub fn recoverability_of(&self, model_a: &str, model_b: &str) -> Option<&RecoverabilityReport> {
        self.recoverability
            .iter()
            .find(|r| r.model_a == model_a && r.model_b == model_b)
    }
}

fn summarize_track(track: &Track, training: &Track) -> Result<TrackSummary, PipelineError> {
    Ok(TrackSummary {
        name: track.name().to_string(),
        curvature: track_curvature(track)?,
        turns: count_turns(track),
        distance_to_training: track_distance(training, track)?,
    })
}

/// Loads a track JSON file.
pub fn read_track(path: &std::path::Path) -> Result<Track, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.into(),
        source,
    })?;
    let file: TrackFile = serde_json::from_str(&text)
        .map_err(|e| PipelineError::Other(format!("{}: {e}", path.display())))?;
    Ok(Track::try_from(file)?)
}

/// Loads a model JSON file.
pub fn read_model(path: &std::path::Path) -> Result<DrivingModel, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.into(),
        source,
    })?;
    serde_json::from_str(&text)
        .map_err(|e| PipelineError::Other(format!("{}: {e}", path.display())))
}

/// Generates `cfg.tracks` evaluation tracks from `training`, each from its
/// own seed stream. Each track chains harder-track steps until its mean
/// curvature reaches `cfg.min_curvature_ratio` times the training track's,
/// starting over whenever it drifts beyond `cfg.max_distance`.
pub fn evaluation_tracks(
    training: &Track,
    cfg: &EvaluationConfig,
    seed: u64,
) -> Result<Vec<Track>, PipelineError> {
    let target = track_curvature(training)? * cfg.min_curvature_ratio;
    (0..cfg.tracks)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
            let mut current = training.clone();
            for _ in 0..cfg.attempts {
                let next = match generate_evaluation_track(
                    &current,
                    &mut rng,
                    cfg.max_distance,
                    STEP_ATTEMPTS,
                    &cfg.mutation,
                ) {
                    Ok(t) if track_distance(training, &t)? <= cfg.max_distance => t,
                    _ => {
                        current = training.clone();
                        continue;
                    }
                };
                if track_curvature(&next)? >= target {
                    return Ok(next.with_name(format!("E{}", i + 1)));
                }
                current = next;
            }
            Err(GeometryError::BudgetExhausted(cfg.attempts).into())
        })
        .collect()
}

fn stage<T>(name: &'static str, r: Result<T, PipelineError>) -> Result<T, PipelineError> {
    r.map_err(|e| PipelineError::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// Runs every stage of the experiment, writing artifacts under
/// `cfg.out_dir`. A `manifest.json` listing the artifacts is written even
/// when a stage fails.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport, PipelineError> {
    cfg.validate()?;
    let mut out = ArtifactWriter::new(&cfg.out_dir)?;
    let result = match cfg.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::Other(e.to_string()))?;
            pool.install(|| stages(cfg, &mut out))
        }
        None => stages(cfg, &mut out),
    };
    let (status, failed_stage, error) = match &result {
        Ok(_) => ("complete", None, None),
        Err(PipelineError::Stage { stage, source }) => {
            ("failed", Some(stage.to_string()), Some(source.to_string()))
        }
        Err(e) => ("failed", None, Some(e.to_string())),
    };
    let manifest = Manifest {
        seed: cfg.seed,
        config_hash: cfg.config_hash(),
        status: status.to_string(),
        failed_stage,
        error,
        artifacts: out.records().to_vec(),
    };
    out.write_json("manifest.json", &manifest)?;
    result
}

fn stages(cfg: &RunConfig, out: &mut ArtifactWriter) -> Result<ExperimentReport, PipelineError> {
    let seed = cfg.seed;
    let config_hash = cfg.config_hash();
    out.write("config.toml", cfg.canonical_toml().as_bytes())?;

    // tracks
    let (t1, eval) = stage(
        "tracks",
        (|| {
            let t1 = match &cfg.training_track {
                Some(p) => read_track(p)?,
                None => training_track(),
            };
            let eval = if cfg.evaluation_tracks.is_empty() {
                evaluation_tracks(&t1, &cfg.evaluation, derive_seed(seed, EVAL_TRACK_STREAM))?
            } else {
                cfg.evaluation_tracks
                    .iter()
                    .map(|p| read_track(p))
                    .collect::<Result<Vec<_>, _>>()?
            };
            Ok((t1, eval))
        })(),
    )?;
    out.write_json(&format!("tracks/{}.json", t1.name()), &TrackFile::from(&t1))?;
    for t in &eval {
        out.write_json(&format!("tracks/{}.json", t.name()), &TrackFile::from(t))?;
    }

    // autopilot and nominal data
    let sim = cfg.sim;
    let gains = if cfg.autopilot.tune_sweeps > 0 {
        tune_autopilot(&t1, &sim, cfg.autopilot.initial, cfg.autopilot.tune_sweeps).gains
    } else {
        cfg.autopilot.initial
    };
    let autopilot = DrivingModel::Autopilot(Autopilot { gains });
    out.write_json("models/autopilot.json", &autopilot)?;
    let (reference, nominal) = stage(
        "trace",
        collect_reference_trace(&t1, &sim, gains, cfg.autopilot.laps).map_err(Into::into),
    )?;
    write_trace(out, "trace.csv", &reference, &nominal)?;
    let mut csv = Vec::new();
    nominal
        .write_csv(&mut csv)
        .map_err(|e| PipelineError::Other(e.to_string()))?;
    out.write("dataset/nominal.csv", &csv)?;

    // ladder
    let ladder_seed = derive_seed(seed, LADDER_STREAM);
    let tiers = stage(
        "ladder",
        train_ladder(&nominal, &t1, &sim, &cfg.ladder, ladder_seed).map_err(Into::into),
    )?;
    let mut models: Vec<DrivingModel> = Vec::new();
    for tier in &tiers {
        let m = DrivingModel::Learned(tier.model.clone());
        out.write_json(&format!("models/{}.json", m.name()), &m)?;
        models.push(m);
    }
    models.push(autopilot.clone());
    let names: Vec<String> = models.iter().map(|m| m.name()).collect();

    // searches
    let mutation = MutationContext {
        track: &t1,
        limits: cfg.limits,
        eps: cfg.closeness,
        budget: cfg.mutation_budget,
    };
    let cells: Vec<(usize, usize, Algorithm)> = (0..models.len())
        .flat_map(|m| {
            (0..cfg.repetitions)
                .flat_map(move |r| [(m, r, Algorithm::Genbo), (m, r, Algorithm::Baseline)])
        })
        .collect();
    let reports: Vec<SearchReport> = cells
        .par_iter()
        .map(|&(m, r, algorithm)| {
            let runner = SimRunner::new(&models[m], &t1, &sim);
            let setup = SearchSetup {
                runner: &runner,
                track: &t1,
                reference: &reference,
                mutation,
                cfg: &cfg.search,
            };
            // repetitions share seeds across models and algorithms
            run_search(
                algorithm,
                &setup,
                &names[m],
                derive_seed(derive_seed(seed, SEARCH_STREAM), r as u64),
            )
        })
        .collect();
    let mut searches = Vec::with_capacity(reports.len());
    for (&(_, r, algorithm), rep) in cells.iter().zip(&reports) {
        let mut buf = Vec::new();
        write_archive(&rep.archive, &mut buf).map_err(|e| PipelineError::Other(e.to_string()))?;
        buf.push(b'\n');
        out.write(
            &format!("archives/{algorithm}_{}_rep{r}.json", rep.model),
            &buf,
        )?;
        searches.push(SearchCell {
            algorithm,
            model: rep.model.clone(),
            repetition: r,
            seed: rep.seed,
            archive_size: rep.archive.len(),
            likely_pairs: rep.likely_count(),
            episodes: rep.episodes,
            replication_episodes: rep.replication_episodes,
            mean_radius: radius(&rep.archive, &t1, &cfg.limits).ok().map(|r| r.mean),
        });
    }
    let genbo_archive = |m: usize, r: usize| -> &[ArchiveEntry] {
        let i = cells
            .iter()
            .position(|&c| c == (m, r, Algorithm::Genbo))
            .expect("cell exists");
        &reports[i].archive
    };

    // per-model statistics
    let summaries = stage("metrics", summarize_models(&names, &searches))?;
    let pooled: Vec<Vec<ArchiveEntry>> = (0..models.len())
        .map(|m| {
            (0..cfg.repetitions)
                .flat_map(|r| genbo_archive(m, r).to_vec())
                .collect()
        })
        .collect();
    let pairs: Vec<(usize, usize)> = (0..models.len())
        .flat_map(|a| (0..models.len()).map(move |b| (a, b)))
        .collect();
    let rec_seed = derive_seed(seed, RECOVERABILITY_STREAM);
    let recoverability_reports: Vec<RecoverabilityReport> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let s = derive_seed(rec_seed, (a * models.len() + b) as u64);
            recoverability(
                &models[a],
                &names[b],
                &pooled[b],
                &t1,
                &sim,
                cfg.recoverability_runs,
                s,
            )
        })
        .collect();

    // retraining of the best tiers
    let eval_sim = sim.with_noise(cfg.evaluation.observation_noise);
    let episodes = cfg.evaluation.episodes;
    let success_seed = derive_seed(seed, SUCCESS_STREAM);
    let mut best: Vec<&LadderTier> = tiers.iter().collect();
    best.sort_by(|a, b| {
        a.model
            .validation_loss
            .total_cmp(&b.model.validation_loss)
            .then(b.tier.cmp(&a.tier))
    });
    best.truncate(cfg.retrain.tiers);
    best.sort_by_key(|t| t.tier);

    let rates_of = |m: &DrivingModel| -> (f64, Vec<f64>) {
        let t1_rate = success_rate(m, &t1, episodes, &eval_sim, success_seed);
        let rates = eval
            .iter()
            .map(|t| success_rate(m, t, episodes, &eval_sim, success_seed))
            .collect();
        (t1_rate, rates)
    };
    let original_rates: Vec<OriginalRates> = best
        .iter()
        .map(|tier| {
            let (training_track_rate, rates) = rates_of(&DrivingModel::Learned(tier.model.clone()));
            OriginalRates {
                model: tier.model.name.clone(),
                training_track_rate,
                rates,
            }
        })
        .collect();

    let jobs: Vec<(&LadderTier, usize)> = best
        .iter()
        .flat_map(|&t| (0..cfg.repetitions).map(move |r| (t, r)))
        .collect();
    let retrained = stage(
        "retrain",
        jobs.par_iter()
            .map(|&(tier, r)| {
                let m = tier.tier - 1;
                let boundary = match build_boundary_dataset(
                    genbo_archive(m, r),
                    &t1,
                    &autopilot,
                    cfg.retrain.boundary_steps,
                    &sim,
                ) {
                    Ok(b) => b,
                    Err(PipelineError::EmptyDataset) => super::BoundaryDataset {
                        data: Dataset::default(),
                        kept_states: 0,
                        discarded_states: genbo_archive(m, r)
                            .iter()
                            .filter(|e| e.is_likely())
                            .count(),
                    },
                    Err(e) => return Err(e),
                };
                let original = tier_split(&nominal, &cfg.ladder, ladder_seed, tier);
                let split_seed = derive_seed(
                    derive_seed(seed, RETRAIN_STREAM),
                    (m * cfg.repetitions + r) as u64,
                );
                let merged = merge_and_split(
                    &original,
                    &boundary.data,
                    cfg.retrain.validation_fraction,
                    split_seed,
                );
                let outcome = retrain_model(&tier.model, &cfg.ladder.hyper, &merged)?;
                let model = DrivingModel::Learned(outcome.model.clone());
                let passes_nominal_drive =
                    drive_nominal(&model, &t1, &sim.deterministic())?.success;
                let (training_track_rate, rates) = rates_of(&model);
                let run = RetrainRun {
                    model: tier.model.name.clone(),
                    repetition: r,
                    boundary_states: boundary.kept_states,
                    discarded_states: boundary.discarded_states,
                    boundary_samples: boundary.data.len(),
                    original_validation_loss: outcome.original_validation_loss,
                    retrained_validation_loss: outcome.retrained_validation_loss,
                    passes_nominal_drive,
                    training_track_rate,
                    rates,
                };
                Ok((run, model, boundary.data))
            })
            .collect::<Result<Vec<_>, PipelineError>>(),
    )?;
    let mut retraining = Vec::with_capacity(retrained.len());
    for (run, model, data) in retrained {
        out.write_json(
            &format!("models/{}_retrained_rep{}.json", run.model, run.repetition),
            &model,
        )?;
        let mut csv = Vec::new();
        data.write_csv(&mut csv)
            .map_err(|e| PipelineError::Other(e.to_string()))?;
        out.write(
            &format!("dataset/boundary_{}_rep{}.csv", run.model, run.repetition),
            &csv,
        )?;
        retraining.push(run);
    }

    // drawings
    out.write(
        "render/trace.svg",
        render_track_svg(&t1, &[Overlay::Trace(reference.clone())], cfg.limits.v_max).as_bytes(),
    )?;
    for (m, name) in names.iter().enumerate() {
        let overlays: Vec<Overlay> = pooled[m]
            .iter()
            .filter(|e| e.is_likely())
            .map(|e| Overlay::Pair(*e))
            .collect();
        out.write(
            &format!("render/pairs_{name}.svg"),
            render_track_svg(&t1, &overlays, cfg.limits.v_max).as_bytes(),
        )?;
    }

    let report = ExperimentReport {
        seed,
        config_hash,
        autopilot_gains: gains,
        training_track: summarize_track(&t1, &t1)?,
        evaluation_tracks: eval
            .iter()
            .map(|t| summarize_track(t, &t1))
            .collect::<Result<_, _>>()?,
        ladder: tiers
            .iter()
            .map(|t| TierSummary {
                name: t.model.name.clone(),
                fraction: t.fraction,
                train_samples: t.train_samples,
                draw: t.draw,
                validation_loss: t.model.validation_loss,
            })
            .collect(),
        models: names,
        searches,
        summaries,
        recoverability: recoverability_reports,
        original_rates,
        retraining,
    };
    write_reports(out, &report)?;
    Ok(report)
}

fn summarize_models(
    names: &[String],
    searches: &[SearchCell],
) -> Result<Vec<ModelSummary>, PipelineError> {
    let counts = |model: &str, algorithm: Algorithm| -> Vec<usize> {
        searches
            .iter()
            .filter(|c| c.model == model && c.algorithm == algorithm)
            .map(|c| c.likely_pairs)
            .collect()
    };
    let radii = |model: &str| -> Vec<f64> {
        searches
            .iter()
            .filter(|c| c.model == model && c.algorithm == Algorithm::Genbo)
            .filter_map(|c| c.mean_radius)
            .collect()
    };
    let as_f64 = |v: &[usize]| v.iter().map(|&x| x as f64).collect::<Vec<f64>>();
    let weakest = radii(&names[0]);
    names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let g = counts(name, Algorithm::Genbo);
            let b = counts(name, Algorithm::Baseline);
            let r = radii(name);
            let compare = i > 0 && !r.is_empty() && !weakest.is_empty();
            Ok(ModelSummary {
                model: name.clone(),
                genbo_mean: mean(&as_f64(&g)),
                baseline_mean: mean(&as_f64(&b)),
                genbo_vs_baseline: mann_whitney_u(&as_f64(&g), &as_f64(&b))
                    .map_err(|e| PipelineError::Other(e.to_string()))?,
                genbo_vs_baseline_a12: vargha_delaney_a12(&as_f64(&g), &as_f64(&b))
                    .map_err(|e| PipelineError::Other(e.to_string()))?,
                mean_radius: (!r.is_empty()).then(|| mean(&r)),
                radius_vs_weakest: if compare {
                    mann_whitney_u(&r, &weakest).ok()
                } else {
                    None
                },
                radius_vs_weakest_a12: if compare {
                    vargha_delaney_a12(&r, &weakest).ok()
                } else {
                    None
                },
                radii: r,
                genbo_counts: g,
                baseline_counts: b,
            })
        })
        .collect()
}

fn write_trace(
    out: &mut ArtifactWriter,
    path: &str,
    states: &[VehicleState],
    data: &Dataset,
) -> Result<(), PipelineError> {
    let t1_steps: Vec<TraceStep> = states
        .iter()
        .zip(&data.samples)
        .map(|(s, d)| TraceStep {
            state: *s,
            steer: d.steering_label,
            xte: d.observation.xte_signed.abs(),
            theta: d.observation.theta,
        })
        .collect();
    let episode = EpisodeResult {
        success: true,
        steps_in_lane: t1_steps.len(),
        max_xte: 0.0,
        trace: t1_steps,
    };
    let mut buf = Vec::new();
    episode
        .write_csv(&mut buf)
        .map_err(|e| PipelineError::Other(e.to_string()))?;
    out.write(path, &buf)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:.6}"))
}

fn write_reports(out: &mut ArtifactWriter, report: &ExperimentReport) -> Result<(), PipelineError> {
    out.write_json("reports/report.json", report)?;

    let mut s = String::from("algorithm,model,repetition,seed,archive_size,likely_pairs,episodes,replication_episodes,mean_radius\n");
    for c in &report.searches {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            c.algorithm,
            c.model,
            c.repetition,
            c.seed,
            c.archive_size,
            c.likely_pairs,
            c.episodes,
            c.replication_episodes,
            fmt_opt(c.mean_radius)
        );
    }
    out.write("reports/search.csv", s.as_bytes())?;

    let mut s = String::from("model,genbo_mean,baseline_mean,genbo_vs_baseline_p,genbo_vs_baseline_a12,mean_radius,radius_vs_weakest_p,radius_vs_weakest_a12\n");
    for m in &report.summaries {
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            m.model,
            m.genbo_mean,
            m.baseline_mean,
            m.genbo_vs_baseline.p,
            m.genbo_vs_baseline_a12,
            fmt_opt(m.mean_radius),
            fmt_opt(m.radius_vs_weakest.map(|r| r.p)),
            fmt_opt(m.radius_vs_weakest_a12)
        );
    }
    out.write("reports/models.csv", s.as_bytes())?;

    let mut buf = Vec::new();
    write_recoverability_csv(&report.recoverability, &mut buf)
        .map_err(|e| PipelineError::Other(e.to_string()))?;
    out.write("reports/recoverability.csv", &buf)?;

    let mut s = String::from("model,variant,repetition,track,success_rate\n");
    let tracks: Vec<&str> = report
        .evaluation_tracks
        .iter()
        .map(|t| t.name.as_str())
        .collect();
    for o in &report.original_rates {
        let _ = writeln!(
            s,
            "{},original,,{},{:.4}",
            o.model, report.training_track.name, o.training_track_rate
        );
        for (t, r) in tracks.iter().zip(&o.rates) {
            let _ = writeln!(s, "{},original,,{t},{r:.4}", o.model);
        }
    }
    for run in &report.retraining {
        let _ = writeln!(
            s,
            "{},retrained,{},{},{:.4}",
            run.model, run.repetition, report.training_track.name, run.training_track_rate
        );
        for (t, r) in tracks.iter().zip(&run.rates) {
            let _ = writeln!(s, "{},retrained,{},{t},{r:.4}", run.model, run.repetition);
        }
    }
    out.write("reports/retraining.csv", s.as_bytes())
}
