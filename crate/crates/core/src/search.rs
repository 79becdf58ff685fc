//! Boundary state pair search: the pair-evolving search with binary search
//! over mutation chains, the 1+1 evolutionary baseline, the archive and
//! the replication protocol for flaky outcomes.

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boundary_states::{
    mutate_pair, mutate_state, sample_valid_state, ClosenessBudget, MutationContext, StatePair,
};
use crate::controllers::DrivingModel;
use crate::derive_seed;
use crate::dynamics::{run_episode, SimConfig, VehicleState};
use crate::geometry::Track;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Pair evaluations per restart.
    pub iterations: usize,
    /// Mutations appended to the chain per evolution step.
    pub sequence_length: usize,
    pub replication_runs: usize,
    pub replication_majority: usize,
    pub final_repetitions: usize,
    /// Two pairs are duplicates when both states lie within this fraction
    /// of the closeness budget of each other.
    pub dedup_tolerance: f64,
    /// Attempts at mutating a sampled seed state before sampling anew.
    pub seed_mutation_attempts: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 40,
            iterations: 10,
            sequence_length: 3,
            replication_runs: 3,
            replication_majority: 2,
            final_repetitions: 10,
            dedup_tolerance: 0.25,
            seed_mutation_attempts: 100,
        }
    }
}

impl SearchConfig {
    pub fn is_valid(&self) -> bool {
        self.restarts >= 1
            && self.iterations >= 1
            && self.sequence_length >= 1
            && self.replication_runs >= 1
            && self.replication_majority >= 1
            && self.replication_majority <= self.replication_runs
            && self.final_repetitions >= 1
            && self.dedup_tolerance >= 0.0
            && self.seed_mutation_attempts >= 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Recoverable {
    S1,
    S2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscoveredBy {
    Genbo,
    Baseline,
    Collateral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Genbo,
    Baseline,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Genbo => "genbo",
            Algorithm::Baseline => "baseline",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "genbo" => Ok(Algorithm::Genbo),
            "baseline" => Ok(Algorithm::Baseline),
            other => Err(format!("unknown search algorithm {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub pair: StatePair,
    pub recoverable: Recoverable,
    pub discovered_by: DiscoveredBy,
    pub restart: usize,
    #[serde(rename = "replication_pct")]
    pub replication_percentage: f64,
}

impl ArchiveEntry {
    pub fn recoverable_state(&self) -> VehicleState {
        match self.recoverable {
            Recoverable::S1 => self.pair.s1,
            Recoverable::S2 => self.pair.s2,
        }
    }

    pub fn failing_state(&self) -> VehicleState {
        match self.recoverable {
            Recoverable::S1 => self.pair.s2,
            Recoverable::S2 => self.pair.s1,
        }
    }

    /// Entries never replicated as boundary pairs are not likely ones.
    pub fn is_likely(&self) -> bool {
        self.replication_percentage > 0.0
    }
}

pub fn write_archive<W: Write>(archive: &[ArchiveEntry], out: W) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(out, archive)
}

pub fn read_archive(text: &str) -> serde_json::Result<Vec<ArchiveEntry>> {
    serde_json::from_str(text)
}

/// Inserts `entry` unless both its states lie within `tolerance * eps`
/// componentwise of the corresponding states of an archived pair.
pub fn archive_insert(
    archive: &mut Vec<ArchiveEntry>,
    entry: ArchiveEntry,
    eps: &ClosenessBudget,
    tolerance: f64,
) -> bool {
    let tol = ClosenessBudget {
        eps_p: eps.eps_p * tolerance,
        eps_v: eps.eps_v * tolerance,
        eps_psi: eps.eps_psi * tolerance,
    };
    let near = |a: &VehicleState, b: &VehicleState| {
        let d = crate::boundary_states::state_distance(a, b);
        d.dp <= tol.eps_p && d.dv <= tol.eps_v && d.dpsi <= tol.eps_psi
    };
    let duplicate = archive
        .iter()
        .any(|e| near(&e.pair.s1, &entry.pair.s1) && near(&e.pair.s2, &entry.pair.s2));
    if !duplicate {
        archive.push(entry);
    }
    !duplicate
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub success: bool,
    pub max_xte: f64,
}

/// Places the model in a state and reports how the drive went.
pub trait StateRunner {
    fn run(&self, start: &VehicleState, noise_seed: u64) -> EpisodeSummary;
}

impl<F: Fn(&VehicleState, u64) -> EpisodeSummary> StateRunner for F {
    fn run(&self, start: &VehicleState, noise_seed: u64) -> EpisodeSummary {
        self(start, noise_seed)
    }
}

/// Runs episodes of `success_steps` steps in the simulator.
pub struct SimRunner<'a> {
    pub model: &'a DrivingModel,
    pub track: &'a Track,
    pub cfg: SimConfig,
    pub success_steps: usize,
}

impl<'a> SimRunner<'a> {
    /// Runner with the recoverability horizon of the configuration.
    pub fn new(model: &'a DrivingModel, track: &'a Track, cfg: &SimConfig) -> Self {
        Self {
            model,
            track,
            cfg: *cfg,
            success_steps: cfg.t_min_steps,
        }
    }
}

impl StateRunner for SimRunner<'_> {
    fn run(&self, start: &VehicleState, noise_seed: u64) -> EpisodeSummary {
        match run_episode(
            self.model,
            self.track,
            *start,
            self.success_steps,
            &self.cfg,
            noise_seed,
        ) {
            Ok(r) => EpisodeSummary {
                success: r.success,
                max_xte: r.max_xte,
            },
            // a model that cannot produce a command has failed the drive
            Err(_) => EpisodeSummary {
                success: false,
                max_xte: f64::INFINITY,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOutcome {
    pub s1: EpisodeSummary,
    pub s2: EpisodeSummary,
}

impl PairOutcome {
    pub fn is_boundary(&self) -> bool {
        self.s1.success != self.s2.success
    }

    pub fn both_succeed(&self) -> bool {
        self.s1.success && self.s2.success
    }

    pub fn max_xte(&self) -> f64 {
        self.s1.max_xte.max(self.s2.max_xte)
    }

    pub fn recoverable(&self) -> Option<Recoverable> {
        match (self.s1.success, self.s2.success) {
            (true, false) => Some(Recoverable::S1),
            (false, true) => Some(Recoverable::S2),
            _ => None,
        }
    }
}

/// Executes pairs, drawing a fresh noise seed per episode and counting episodes.
struct Executor<'r, R: StateRunner> {
    runner: &'r R,
    episodes: usize,
}

impl<R: StateRunner> Executor<'_, R> {
    fn execute(&mut self, pair: &StatePair, rng: &mut ChaCha8Rng) -> PairOutcome {
        self.episodes += 2;
        let s1 = self.runner.run(&pair.s1, rng.random());
        let s2 = self.runner.run(&pair.s2, rng.random());
        PairOutcome { s1, s2 }
    }

    /// Number of `runs` fresh executions in which `pair` is a boundary pair.
    fn boundary_count(&mut self, pair: &StatePair, runs: usize, rng: &mut ChaCha8Rng) -> usize {
        (0..runs)
            .filter(|_| self.execute(pair, rng).is_boundary())
            .count()
    }
}

/// Binary search over a chain of pairs whose first pair is known to succeed
/// in both states. `evaluate(i)` executes pair `i`.
///
/// Returns the index of a pair with exactly one failing state, or `-1`, and
/// the number of pair evaluations performed.
pub fn binary_search_boundary<F: FnMut(usize) -> PairOutcome>(
    len: usize,
    mut evaluate: F,
) -> (isize, usize) {
    if len == 0 {
        return (-1, 0);
    }
    let mut executions = 1;
    let last = evaluate(len - 1);
    if last.is_boundary() {
        return ((len - 1) as isize, executions);
    }
    if last.both_succeed() {
        return (-1, executions);
    }
    let (mut lo, mut hi) = (0, len - 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let outcome = evaluate(mid);
        executions += 1;
        if outcome.is_boundary() {
            return (mid as isize, executions);
        }
        if outcome.both_succeed() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (-1, executions)
}

/// Baseline selection: the mutant replaces the incumbent only with a
/// strictly higher maximum XTE.
pub fn keeps_mutant(incumbent_max_xte: f64, mutant_max_xte: f64) -> bool {
    mutant_max_xte > incumbent_max_xte
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RestartLog {
    pub restart: usize,
    /// Seed states sampled before one could be mutated.
    pub seed_samples: usize,
    pub seed_outcome: String,
    /// Pair evaluations charged against the iteration budget.
    pub iterations: usize,
    pub chain_length: usize,
    /// Executed pairs in which at least one state failed.
    pub failing_evaluations: usize,
    /// Last pair of the evolved chain.
    pub final_pair: Option<StatePair>,
    pub found: bool,
    pub rejected_by_replication: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub algorithm: Algorithm,
    pub model: String,
    pub seed: u64,
    pub archive: Vec<ArchiveEntry>,
    /// Episodes simulated, replications included.
    pub episodes: usize,
    /// Episodes spent on replication.
    pub replication_episodes: usize,
    pub restarts: Vec<RestartLog>,
}

impl SearchReport {
    pub fn likely(&self) -> impl Iterator<Item = &ArchiveEntry> {
        self.archive.iter().filter(|e| e.is_likely())
    }

    pub fn likely_count(&self) -> usize {
        self.likely().count()
    }
}

/// Inputs shared by both search algorithms.
pub struct SearchSetup<'a, R: StateRunner> {
    pub runner: &'a R,
    pub track: &'a Track,
    pub reference: &'a [VehicleState],
    pub mutation: MutationContext<'a>,
    pub cfg: &'a SearchConfig,
}

fn outcome_label(o: &PairOutcome) -> String {
    let c = |s: bool| if s { 'S' } else { 'F' };
    format!("{}{}", c(o.s1.success), c(o.s2.success))
}

/// Samples a valid reference state and mutates it into a close, more
/// challenging partner. Resamples when the mutation keeps failing.
fn seed_pair<R: StateRunner>(
    setup: &SearchSetup<'_, R>,
    rng: &mut ChaCha8Rng,
    log: &mut RestartLog,
) -> Option<StatePair> {
    // bounded so that a reference trace with no mutable state cannot hang
    for _ in 0..setup.cfg.seed_mutation_attempts {
        log.seed_samples += 1;
        let s1 =
            sample_valid_state(setup.reference, setup.track, &setup.mutation.limits, rng).ok()?;
        for _ in 0..setup.cfg.seed_mutation_attempts {
            if let Ok(s2) = mutate_state(&s1, &s1, &setup.mutation, rng) {
                return Some(StatePair { s1, s2 });
            }
        }
    }
    None
}

struct SearchState<'r, R: StateRunner> {
    exec: Executor<'r, R>,
    archive: Vec<ArchiveEntry>,
    replication_episodes: usize,
}

impl<R: StateRunner> SearchState<'_, R> {
    /// Replicates a candidate and archives it when it holds up and is new.
    fn try_archive(
        &mut self,
        pair: StatePair,
        outcome: &PairOutcome,
        by: DiscoveredBy,
        restart: usize,
        cfg: &SearchConfig,
        eps: &ClosenessBudget,
        rng: &mut ChaCha8Rng,
    ) -> Result<bool, ()> {
        let Some(recoverable) = outcome.recoverable() else {
            return Ok(false);
        };
        let before = self.exec.episodes;
        let hits = self.exec.boundary_count(&pair, cfg.replication_runs, rng);
        self.replication_episodes += self.exec.episodes - before;
        if hits < cfg.replication_majority {
            return Err(());
        }
        let entry = ArchiveEntry {
            pair,
            recoverable,
            discovered_by: by,
            restart,
            replication_percentage: 0.0,
        };
        Ok(archive_insert(
            &mut self.archive,
            entry,
            eps,
            cfg.dedup_tolerance,
        ))
    }

    fn finish(
        mut self,
        algorithm: Algorithm,
        model: String,
        seed: u64,
        cfg: &SearchConfig,
        restarts: Vec<RestartLog>,
        seed_rng: u64,
    ) -> SearchReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed_rng);
        let before = self.exec.episodes;
        for e in self.archive.iter_mut() {
            let hits = self
                .exec
                .boundary_count(&e.pair, cfg.final_repetitions, &mut rng);
            e.replication_percentage = 100.0 * hits as f64 / cfg.final_repetitions as f64;
        }
        self.replication_episodes += self.exec.episodes - before;
        SearchReport {
            algorithm,
            model,
            seed,
            archive: self.archive,
            episodes: self.exec.episodes,
            replication_episodes: self.replication_episodes,
            restarts,
        }
    }
}

/// Pair-evolving search: per restart, a seed pair on which the model
/// succeeds is pushed toward harder states in chains of mutations, and a
/// binary search over the chain locates a pair straddling the boundary.
pub fn genbo_search<R: StateRunner>(
    setup: &SearchSetup<'_, R>,
    model: &str,
    seed: u64,
) -> SearchReport {
    let cfg = setup.cfg;
    let eps = setup.mutation.eps;
    let mut st = SearchState {
        exec: Executor {
            runner: setup.runner,
            episodes: 0,
        },
        archive: Vec::new(),
        replication_episodes: 0,
    };
    let mut logs = Vec::with_capacity(cfg.restarts);

    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, restart as u64));
        let mut log = RestartLog {
            restart,
            ..Default::default()
        };
        let Some(b) = seed_pair(setup, &mut rng, &mut log) else {
            log.seed_outcome = "none".into();
            logs.push(log);
            continue;
        };
        let outcome = st.exec.execute(&b, &mut rng);
        log.seed_outcome = outcome_label(&outcome);
        if outcome.is_boundary() {
            match st.try_archive(
                b,
                &outcome,
                DiscoveredBy::Collateral,
                restart,
                cfg,
                &eps,
                &mut rng,
            ) {
                Ok(found) => log.found = found,
                Err(()) => log.rejected_by_replication += 1,
            }
        }
        if !outcome.both_succeed() {
            logs.push(log);
            continue;
        }

        let mut pairs = vec![b];
        let mut known: HashMap<usize, PairOutcome> = HashMap::from([(0, outcome)]);
        let mut iterations = 1;
        while iterations <= cfg.iterations {
            for _ in 0..cfg.sequence_length {
                match mutate_pair(
                    pairs.last().expect("chain starts with the seed"),
                    &setup.mutation,
                    &mut rng,
                ) {
                    Ok(next) => pairs.push(next),
                    Err(_) => break,
                }
            }
            let failing = &mut log.failing_evaluations;
            let (idx, it) = binary_search_boundary(pairs.len(), |i| {
                *known.entry(i).or_insert_with(|| {
                    let o = st.exec.execute(&pairs[i], &mut rng);
                    *failing += usize::from(!o.both_succeed());
                    o
                })
            });
            iterations += it;
            if idx > 0 {
                let i = idx as usize;
                match st.try_archive(
                    pairs[i],
                    &known[&i],
                    DiscoveredBy::Genbo,
                    restart,
                    cfg,
                    &eps,
                    &mut rng,
                ) {
                    Ok(true) => {
                        log.found = true;
                        break;
                    }
                    Ok(false) => {}
                    Err(()) => log.rejected_by_replication += 1,
                }
            }
        }
        log.iterations = iterations - 1;
        log.chain_length = pairs.len();
        log.final_pair = pairs.last().copied();
        logs.push(log);
    }
    st.finish(
        Algorithm::Genbo,
        model.to_string(),
        seed,
        cfg,
        logs,
        derive_seed(seed, u64::MAX),
    )
}

/// 1+1 evolutionary baseline: per restart, the same seeding, then each
/// iteration mutates the incumbent pair and keeps whichever of incumbent
/// and mutant reached the higher maximum XTE.
pub fn baseline_search<R: StateRunner>(
    setup: &SearchSetup<'_, R>,
    model: &str,
    seed: u64,
) -> SearchReport {
    let cfg = setup.cfg;
    let eps = setup.mutation.eps;
    let mut st = SearchState {
        exec: Executor {
            runner: setup.runner,
            episodes: 0,
        },
        archive: Vec::new(),
        replication_episodes: 0,
    };
    let mut logs = Vec::with_capacity(cfg.restarts);

    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, restart as u64));
        let mut log = RestartLog {
            restart,
            ..Default::default()
        };
        let Some(b) = seed_pair(setup, &mut rng, &mut log) else {
            log.seed_outcome = "none".into();
            logs.push(log);
            continue;
        };
        let outcome = st.exec.execute(&b, &mut rng);
        log.seed_outcome = outcome_label(&outcome);
        if outcome.is_boundary() {
            match st.try_archive(
                b,
                &outcome,
                DiscoveredBy::Collateral,
                restart,
                cfg,
                &eps,
                &mut rng,
            ) {
                Ok(found) => log.found = found,
                Err(()) => log.rejected_by_replication += 1,
            }
        }
        if !outcome.both_succeed() {
            logs.push(log);
            continue;
        }

        let (mut incumbent, mut fitness) = (b, outcome.max_xte());
        let mut iterations = 1;
        let mut evaluated = 1;
        while iterations <= cfg.iterations {
            iterations += 1;
            let Ok(mutant) = mutate_pair(&incumbent, &setup.mutation, &mut rng) else {
                continue;
            };
            let outcome = st.exec.execute(&mutant, &mut rng);
            evaluated += 1;
            log.failing_evaluations += usize::from(!outcome.both_succeed());
            if outcome.is_boundary() {
                match st.try_archive(
                    mutant,
                    &outcome,
                    DiscoveredBy::Baseline,
                    restart,
                    cfg,
                    &eps,
                    &mut rng,
                ) {
                    Ok(true) => {
                        log.found = true;
                        break;
                    }
                    Ok(false) => {}
                    Err(()) => log.rejected_by_replication += 1,
                }
            }
            if keeps_mutant(fitness, outcome.max_xte()) {
                incumbent = mutant;
                fitness = outcome.max_xte();
            }
        }
        log.iterations = iterations - 1;
        log.chain_length = evaluated;
        log.final_pair = Some(incumbent);
        logs.push(log);
    }
    st.finish(
        Algorithm::Baseline,
        model.to_string(),
        seed,
        cfg,
        logs,
        derive_seed(seed, u64::MAX),
    )
}

pub fn run_search<R: StateRunner>(
    algorithm: Algorithm,
    setup: &SearchSetup<'_, R>,
    model: &str,
    seed: u64,
) -> SearchReport {
    match algorithm {
        Algorithm::Genbo => genbo_search(setup, model, seed),
        Algorithm::Baseline => baseline_search(setup, model, seed),
    }
}

/// Acceptance check on a candidate pair, then its replication percentage
/// over the final repetitions. Rejected pairs report 0%.
pub fn replicate_pair<R: StateRunner>(
    pair: &StatePair,
    runner: &R,
    cfg: &SearchConfig,
    seed: u64,
) -> (bool, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut exec = Executor {
        runner,
        episodes: 0,
    };
    if exec.boundary_count(pair, cfg.replication_runs, &mut rng) < cfg.replication_majority {
        return (false, 0.0);
    }
    let hits = exec.boundary_count(pair, cfg.final_repetitions, &mut rng);
    (true, 100.0 * hits as f64 / cfg.final_repetitions as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;

    fn summary(success: bool) -> EpisodeSummary {
        EpisodeSummary {
            success,
            max_xte: if success { 0.5 } else { 2.5 },
        }
    }

    fn outcome(code: &str) -> PairOutcome {
        let b = code.as_bytes();
        PairOutcome {
            s1: summary(b[0] == b'S'),
            s2: summary(b[1] == b'S'),
        }
    }

    fn search(pattern: &[&str]) -> (isize, usize) {
        binary_search_boundary(pattern.len(), |i| outcome(pattern[i]))
    }

    #[test]
    fn binary_search_examples() {
        assert_eq!(search(&["SS", "SS", "SF", "FF", "FF"]).0, 2);
        assert_eq!(search(&["SS", "SS", "SS"]), (-1, 1));
        assert_eq!(search(&["SS", "SF"]), (1, 1));
        assert_eq!(search(&["SS", "FF"]), (-1, 1));
        assert_eq!(search(&["SS", "FS", "FF"]), (1, 2));
    }

    #[test]
    fn keeps_incumbent_on_ties() {
        assert!(!keeps_mutant(1.0, 1.0));
        assert!(!keeps_mutant(1.0, 0.9));
        assert!(keeps_mutant(1.0, 1.0 + 1e-12));
    }

    fn pair_at(x: f64) -> StatePair {
        StatePair {
            s1: VehicleState::new(Vec2::new(x, 0.0), 0.0, 20.0),
            s2: VehicleState::new(Vec2::new(x + 0.1, 0.0), 2.0, 21.0),
        }
    }

    fn entry(pair: StatePair) -> ArchiveEntry {
        ArchiveEntry {
            pair,
            recoverable: Recoverable::S1,
            discovered_by: DiscoveredBy::Genbo,
            restart: 0,
            replication_percentage: 0.0,
        }
    }

    #[test]
    fn archive_deduplicates_within_tolerance() {
        let eps = ClosenessBudget::default();
        let mut a = Vec::new();
        assert!(archive_insert(&mut a, entry(pair_at(0.0)), &eps, 0.25));
        assert!(!archive_insert(&mut a, entry(pair_at(0.0)), &eps, 0.25));
        assert!(!archive_insert(
            &mut a,
            entry(pair_at(0.1 * eps.eps_p)),
            &eps,
            0.25
        ));
        assert!(archive_insert(
            &mut a,
            entry(pair_at(10.0 * eps.eps_p)),
            &eps,
            0.25
        ));
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn archive_json_field_names() {
        let text = serde_json::to_string(&[entry(pair_at(1.0))]).unwrap();
        for key in [
            "\"pair\"",
            "\"s1\"",
            "\"s2\"",
            "\"psi\"",
            "\"recoverable\":\"s1\"",
            "\"discovered_by\":\"genbo\"",
            "\"restart\"",
            "\"replication_pct\"",
        ] {
            assert!(text.contains(key), "{key} in {text}");
        }
        assert_eq!(read_archive(&text).unwrap(), vec![entry(pair_at(1.0))]);
    }

    #[test]
    fn deterministic_replication() {
        let cfg = SearchConfig::default();
        let boundary = |s: &VehicleState, _: u64| summary(s.x < 0.05);
        assert_eq!(
            replicate_pair(&pair_at(0.0), &boundary, &cfg, 1),
            (true, 100.0)
        );
        let both = |_: &VehicleState, _: u64| summary(true);
        assert_eq!(replicate_pair(&pair_at(0.0), &both, &cfg, 1), (false, 0.0));
    }
}
