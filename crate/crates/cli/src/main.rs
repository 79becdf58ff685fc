use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use boundary_core::boundary_states::MutationContext;
use boundary_core::controllers::{
    collect_reference_trace, train_ladder, tune_autopilot, Autopilot, Dataset, DrivingModel,
    PidGains,
};
use boundary_core::dynamics::{read_trace_csv, EpisodeResult, TraceStep, VehicleState};
use boundary_core::geometry::{training_track, Track, TrackFile};
use boundary_core::metrics::{radius, recoverability, success_rate, write_recoverability_csv};
use boundary_core::pipeline::{
    build_boundary_dataset, evaluation_tracks, merge_and_split, read_model, read_track,
    render_track_svg, retrain_model, run_experiment, Overlay, PipelineError, RunConfig,
    THREADS_ENV,
};
use boundary_core::search::{
    read_archive, run_search, write_archive, Algorithm, ArchiveEntry, SearchSetup, SimRunner,
};

#[derive(Parser)]
#[command(
    name = "boundary",
    version,
    about = "Boundary state pair search for lane-keeping controllers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration supplying simulation and search settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Tune the autopilot gains on a track and write the autopilot model.
    TuneAutopilot {
        #[arg(long)]
        track: Option<PathBuf>,
        #[arg(long, default_value_t = 12)]
        sweeps: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Drive the autopilot for some laps, writing its trace and the labeled dataset.
    CollectTrace {
        #[arg(long)]
        autopilot: Option<PathBuf>,
        #[arg(long)]
        track: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        laps: usize,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Train the model ladder on a nominal dataset.
    TrainLadder {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        track: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Search boundary state pairs of a model.
    Search {
        #[arg(long)]
        algo: Algorithm,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        track: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Reference trace CSV; when absent the default autopilot drives the configured number of laps.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Radius and recoverability of archives; archive i belongs to model i.
    Metrics {
        #[arg(long)]
        track: Option<PathBuf>,
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        #[arg(long = "archive", required = true)]
        archives: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Writes the recoverability table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Generate harder evaluation tracks from a base track.
    GenTracks {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        track: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Retrain a model with autopilot labels collected from an archive's non-recoverable states.
    Retrain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long = "archive", required = true)]
        archives: Vec<PathBuf>,
        #[arg(long)]
        autopilot: Option<PathBuf>,
        #[arg(long)]
        track: Option<PathBuf>,
        /// Seed of the original train/validation split of the dataset.
        #[arg(long, default_value_t = 1)]
        split_seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Success rate of models from the nominal start on tracks.
    Evaluate {
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        #[arg(long = "track", required = true)]
        tracks: Vec<PathBuf>,
        #[arg(long, default_value_t = 20)]
        episodes: usize,
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the full experiment described by a configuration file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Draw a track with an optional trace and archive as SVG.
    Render {
        #[arg(long)]
        track: Option<PathBuf>,
        #[arg(long)]
        archive: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = e
                .downcast_ref::<PipelineError>()
                .is_some_and(|p| matches!(p, PipelineError::InvalidConfig(_)));
            ExitCode::from(if usage { 1 } else { 2 })
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(n) = std::env::var(THREADS_ENV) {
        let n: usize = n
            .trim()
            .parse()
            .with_context(|| format!("{THREADS_ENV} must be a positive integer"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()?;
        }
    }
    Ok(())
}

fn settings(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env()?;
    Ok(cfg)
}

fn load_track(path: &Option<PathBuf>) -> Result<Track> {
    Ok(match path {
        Some(p) => read_track(p)?,
        None => training_track(),
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    create_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    create_parent(path)?;
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Dataset::read_csv(BufReader::new(f))?)
}

fn read_archives(paths: &[PathBuf]) -> Result<Vec<ArchiveEntry>> {
    let mut all = Vec::new();
    for p in paths {
        let text =
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        all.extend(read_archive(&text).with_context(|| format!("parsing {}", p.display()))?);
    }
    Ok(all)
}

fn read_trace(path: &Path) -> Result<Vec<TraceStep>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(read_trace_csv(BufReader::new(f))?)
}

fn autopilot_gains(path: &Option<PathBuf>, track: &Track, cfg: &RunConfig) -> Result<PidGains> {
    match path {
        Some(p) => match read_model(p)? {
            DrivingModel::Autopilot(a) => Ok(a.gains),
            _ => bail!("{} is not an autopilot model", p.display()),
        },
        None => Ok(tune_autopilot(
            track,
            &cfg.sim,
            cfg.autopilot.initial,
            cfg.autopilot.tune_sweeps,
        )
        .gains),
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::TuneAutopilot {
            track,
            sweeps,
            out,
            common,
        } => {
            let cfg = settings(&common)?;
            let track = load_track(&track)?;
            let rep = tune_autopilot(&track, &cfg.sim, cfg.autopilot.initial, sweeps);
            println!(
                "kp {:.4} ki {:.4} kd {:.4} kh {:.4}  mean |xte| {:.4} m  ({} drives)",
                rep.gains.kp,
                rep.gains.ki,
                rep.gains.kd,
                rep.gains.kh,
                rep.mean_abs_xte,
                rep.evaluations
            );
            write_json(
                &out,
                &DrivingModel::Autopilot(Autopilot { gains: rep.gains }),
            )
        }
        Command::CollectTrace {
            autopilot,
            track,
            laps,
            trace,
            dataset,
            common,
        } => {
            let cfg = settings(&common)?;
            let track = load_track(&track)?;
            let gains = autopilot_gains(&autopilot, &track, &cfg)?;
            let (states, data) = collect_reference_trace(&track, &cfg.sim, gains, laps)?;
            let steps: Vec<TraceStep> = states
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
                steps_in_lane: steps.len(),
                max_xte: 0.0,
                trace: steps,
            };
            episode.write_csv(create(&trace)?)?;
            data.write_csv(create(&dataset)?)?;
            println!("{} samples over {laps} laps", data.len());
            Ok(())
        }
        Command::TrainLadder {
            dataset,
            track,
            seed,
            out_dir,
            common,
        } => {
            let cfg = settings(&common)?;
            let track = load_track(&track)?;
            let data = read_dataset(&dataset)?;
            let tiers = train_ladder(&data, &track, &cfg.sim, &cfg.ladder, seed)?;
            for t in &tiers {
                let path = out_dir.join(format!("{}.json", t.model.name));
                write_json(&path, &DrivingModel::Learned(t.model.clone()))?;
                println!(
                    "{}  fraction {:.2}  samples {:5}  draw {}  validation loss {:.6}",
                    t.model.name, t.fraction, t.train_samples, t.draw, t.model.validation_loss
                );
            }
            Ok(())
        }
        Command::Search {
            algo,
            model,
            track,
            seed,
            trace,
            restarts,
            out,
            common,
        } => {
            let mut cfg = settings(&common)?;
            if let Some(r) = restarts {
                cfg.search.restarts = r;
            }
            let track = load_track(&track)?;
            let model = read_model(&model)?;
            let reference: Vec<VehicleState> = match &trace {
                Some(p) => read_trace(p)?.into_iter().map(|t| t.state).collect(),
                None => {
                    let gains = autopilot_gains(&None, &track, &cfg)?;
                    collect_reference_trace(&track, &cfg.sim, gains, cfg.autopilot.laps)?.0
                }
            };
            let runner = SimRunner::new(&model, &track, &cfg.sim);
            let mutation = MutationContext {
                track: &track,
                limits: cfg.limits,
                eps: cfg.closeness,
                budget: cfg.mutation_budget,
            };
            let setup = SearchSetup {
                runner: &runner,
                track: &track,
                reference: &reference,
                mutation,
                cfg: &cfg.search,
            };
            let report = run_search(algo, &setup, &model.name(), seed);
            println!(
                "{algo} on {}: {} pairs ({} likely), {} episodes + {} replication episodes",
                report.model,
                report.archive.len(),
                report.likely_count(),
                report.episodes,
                report.replication_episodes
            );
            create_parent(&out)?;
            write_archive(&report.archive, create(&out)?)?;
            Ok(())
        }
        Command::Metrics {
            track,
            models,
            archives,
            runs,
            seed,
            csv,
            common,
        } => {
            if models.len() != archives.len() {
                bail!(PipelineError::InvalidConfig(
                    "give one --archive per --model".into()
                ));
            }
            let cfg = settings(&common)?;
            let track = load_track(&track)?;
            let models: Vec<DrivingModel> = models
                .iter()
                .map(|p| read_model(p))
                .collect::<Result<_, _>>()?;
            let entries: Vec<Vec<ArchiveEntry>> = archives
                .iter()
                .map(|p| read_archives(std::slice::from_ref(p)))
                .collect::<Result<_>>()?;
            let names: Vec<String> = models.iter().map(|m| m.name()).collect();
            println!("{:<12} {:>6} {:>8}", "model", "pairs", "radius");
            for (name, e) in names.iter().zip(&entries) {
                match radius(e, &track, &cfg.limits) {
                    Ok(r) => println!("{name:<12} {:>6} {:>8.4}", r.count, r.mean),
                    Err(_) => println!("{name:<12} {:>6} {:>8}", 0, "-"),
                }
            }
            println!("\nrecoverability (row model on column model's states), recoverable / non-recoverable %");
            print!("{:<12}", "");
            for n in &names {
                print!(" {n:>15}");
            }
            println!();
            let mut reports = Vec::new();
            for (a, model_a) in models.iter().enumerate() {
                print!("{:<12}", names[a]);
                for (b, e) in entries.iter().enumerate() {
                    let r = recoverability(model_a, &names[b], e, &track, &cfg.sim, runs, seed);
                    let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.1}"));
                    print!(
                        " {:>15}",
                        format!("{}/{}", cell(r.recoverable), cell(r.non_recoverable))
                    );
                    reports.push(r);
                }
                println!();
            }
            if let Some(path) = csv {
                write_recoverability_csv(&reports, create(&path)?)?;
            }
            Ok(())
        }
        Command::GenTracks {
            count,
            track,
            seed,
            out_dir,
            common,
        } => {
            let cfg = settings(&common)?;
            let base = load_track(&track)?;
            let eval = boundary_core::pipeline::EvaluationConfig {
                tracks: count,
                ..cfg.evaluation
            };
            for t in evaluation_tracks(&base, &eval, seed)? {
                let path = out_dir.join(format!("{}.json", t.name()));
                write_json(&path, &TrackFile::from(&t))?;
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Retrain {
            model,
            dataset,
            archives,
            autopilot,
            track,
            split_seed,
            out,
            common,
        } => {
            let cfg = settings(&common)?;
            let track = load_track(&track)?;
            let original = match read_model(&model)? {
                DrivingModel::Learned(m) => m,
                _ => bail!("{} is not a learned model", model.display()),
            };
            let gains = autopilot_gains(&autopilot, &track, &cfg)?;
            let entries = read_archives(&archives)?;
            let boundary = build_boundary_dataset(
                &entries,
                &track,
                &DrivingModel::Autopilot(Autopilot { gains }),
                cfg.retrain.boundary_steps,
                &cfg.sim,
            )?;
            let split = read_dataset(&dataset)?.split(cfg.ladder.hyper.train_fraction, split_seed);
            let merged = merge_and_split(
                &split,
                &boundary.data,
                cfg.retrain.validation_fraction,
                split_seed,
            );
            let outcome = retrain_model(&original, &cfg.ladder.hyper, &merged)?;
            println!(
                "{} boundary states kept, {} discarded, {} samples; validation loss {:.6} -> {:.6}",
                boundary.kept_states,
                boundary.discarded_states,
                boundary.data.len(),
                outcome.original_validation_loss,
                outcome.retrained_validation_loss
            );
            write_json(&out, &DrivingModel::Learned(outcome.model))
        }
        Command::Evaluate {
            models,
            tracks,
            episodes,
            noise,
            seed,
        } => {
            let mut sim = RunConfig::default().sim;
            sim.observation_noise =
                noise.unwrap_or(RunConfig::default().evaluation.observation_noise);
            let tracks: Vec<Track> = tracks
                .iter()
                .map(|p| read_track(p))
                .collect::<Result<_, _>>()?;
            for path in &models {
                let m = read_model(path)?;
                for t in &tracks {
                    println!(
                        "{:<16} {:<12} {:6.1}%",
                        m.name(),
                        t.name(),
                        success_rate(&m, t, episodes, &sim, seed)
                    );
                }
            }
            Ok(())
        }
        Command::Experiment { config, out_dir } => {
            let mut cfg = RunConfig::load(&config)?;
            cfg.apply_env()?;
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            let report = run_experiment(&cfg)?;
            println!("seed {}  config {}", report.seed, &report.config_hash[..12]);
            println!(
                "{:<12} {:>8} {:>8} {:>8} {:>8}",
                "model", "genbo", "baseline", "p", "radius"
            );
            for s in &report.summaries {
                println!(
                    "{:<12} {:>8.2} {:>8.2} {:>8.4} {:>8}",
                    s.model,
                    s.genbo_mean,
                    s.baseline_mean,
                    s.genbo_vs_baseline.p,
                    s.mean_radius.map_or("-".into(), |r| format!("{r:.4}"))
                );
            }
            println!("artifacts in {}", cfg.out_dir.display());
            Ok(())
        }
        Command::Render {
            track,
            archive,
            trace,
            out,
        } => {
            let track = load_track(&track)?;
            let mut overlays = Vec::new();
            if let Some(p) = trace {
                overlays.push(Overlay::Trace(
                    read_trace(&p)?.into_iter().map(|t| t.state).collect(),
                ));
            }
            if let Some(p) = archive {
                overlays.extend(
                    read_archives(&[p])?
                        .into_iter()
                        .filter(|e| e.is_likely())
                        .map(Overlay::Pair),
                );
            }
            let svg = render_track_svg(&track, &overlays, RunConfig::default().limits.v_max);
            create_parent(&out)?;
            std::fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))
        }
    }
}
