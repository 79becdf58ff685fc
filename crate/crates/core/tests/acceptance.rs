//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use boundary_core::boundary_states::{
    intersect_angular_ranges, mutate_pair, mutate_state, AngularRange, MutationContext, StatePair,
};
use boundary_core::dynamics::VehicleState;
use boundary_core::geometry::{training_track, Track, TrackMutation, Vec2};
use boundary_core::metrics::{
    mann_kendall_s, mann_whitney_u, mean, state_radius, vargha_delaney_a12,
};
use boundary_core::pipeline::{run_experiment, ExperimentReport, RunConfig};
use boundary_core::search::{binary_search_boundary, EpisodeSummary, PairOutcome};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// ---------------------------------------------------------------------------
// independent geometry oracle

fn heading_deg(dx: f64, dy: f64) -> f64 {
    dx.atan2(dy).to_degrees().rem_euclid(360.0)
}

fn signed_angle(a: f64) -> f64 {
    let w = a.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (ux, uy) = (b.0 - a.0, b.1 - a.1);
    let len2 = ux * ux + uy * uy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * ux + (p.1 - a.1) * uy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * ux, a.1 + t * uy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Unsigned cross-track error and absolute relative orientation, measured
/// against the segments adjacent to the nearest waypoint.
fn challenge(track: &Track, s: &VehicleState) -> (f64, f64, f64) {
    let w: Vec<(f64, f64)> = track.waypoints().iter().map(|p| (p.x, p.y)).collect();
    let n = w.len();
    let p = (s.x, s.y);
    let k = (0..n)
        .min_by(|&i, &j| {
            let di = (w[i].0 - p.0).powi(2) + (w[i].1 - p.1).powi(2);
            let dj = (w[j].0 - p.0).powi(2) + (w[j].1 - p.1).powi(2);
            di.total_cmp(&dj).then(i.cmp(&j))
        })
        .unwrap();
    let prev = (k + n - 1) % n;
    let next = (k + 1) % n;
    let xte = segment_distance(p, w[prev], w[k]).min(segment_distance(p, w[k], w[next]));
    let road = heading_deg(w[next].0 - w[k].0, w[next].1 - w[k].1);
    (xte, s.v, signed_angle(s.psi - road).abs())
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

fn valid(track: &Track, s: &VehicleState, ctx: &MutationContext) -> bool {
    let (xte, v, theta) = challenge(track, s);
    xte <= track.lane_width() / 2.0 && v <= ctx.limits.v_max && theta <= ctx.limits.theta_max
}

fn close(a: &VehicleState, b: &VehicleState, ctx: &MutationContext) -> bool {
    let dp = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
    dp <= ctx.eps.eps_p
        && (a.v - b.v).abs() <= ctx.eps.eps_v
        && angle_gap(a.psi, b.psi) <= ctx.eps.eps_psi
}

/// Harder in no component lower and in at least one strictly higher.
fn harder(track: &Track, from: &VehicleState, to: &VehicleState) -> bool {
    let (d0, v0, t0) = challenge(track, from);
    let (d1, v1, t1) = challenge(track, to);
    d1 >= d0 && v1 >= v0 && t1 >= t0 && (d1 > d0 || v1 > v0 || t1 > t0)
}

fn random_track(rng: &mut ChaCha8Rng) -> Track {
    let mut t = training_track();
    if rng.random_bool(0.5) {
        t = t.mirrored();
    }
    let shift = Vec2::new(
        rng.random_range(-500.0..500.0),
        rng.random_range(-500.0..500.0),
    );
    t = t.transformed(rng.random_range(0.0..360.0), shift);
    let mutation = TrackMutation::default();
    for _ in 0..rng.random_range(0..4) {
        if let Ok(m) = mutation.apply(&t, rng) {
            t = m;
        }
    }
    t
}

fn random_valid_state(track: &Track, ctx: &MutationContext, rng: &mut ChaCha8Rng) -> VehicleState {
    loop {
        let i = rng.random_range(0..track.len());
        let a = track.waypoints()[i];
        let b = track.waypoints()[(i + 1) % track.len()];
        let road = heading_deg(b.x - a.x, b.y - a.y);
        let r = road.to_radians();
        let offset = rng.random_range(-0.95..0.95) * track.lane_width() / 2.0;
        let along = rng.random_range(0.0..1.0);
        let x = a.x + (b.x - a.x) * along + r.cos() * offset;
        let y = a.y + (b.y - a.y) * along - r.sin() * offset;
        let theta = rng.random_range(-0.95..0.95) * ctx.limits.theta_max;
        let v = rng.random_range(1.0..ctx.limits.v_max);
        let s = VehicleState::new(Vec2::new(x, y), road + theta, v);
        if valid(track, &s, ctx) {
            return s;
        }
    }
}

fn random_partner(
    track: &Track,
    s: &VehicleState,
    ctx: &MutationContext,
    rng: &mut ChaCha8Rng,
) -> Option<VehicleState> {
    for _ in 0..50 {
        let angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let dist = rng.random_range(0.0..0.9) * ctx.eps.eps_p;
        let p = Vec2::new(s.x + dist * angle.cos(), s.y + dist * angle.sin());
        let v = (s.v + rng.random_range(-0.9..0.9) * ctx.eps.eps_v).max(0.0);
        let psi = s.psi + rng.random_range(-0.9..0.9) * ctx.eps.eps_psi;
        let t = VehicleState::new(p, psi, v);
        if valid(track, &t, ctx) && close(s, &t, ctx) && t != *s {
            return Some(t);
        }
    }
    None
}

fn criterion_mutation_contracts() -> Outcome {
    const TARGET: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut state_ok, mut pair_ok, mut violations) = (0usize, 0usize, Vec::new());
    while state_ok < TARGET || pair_ok < TARGET {
        let track = random_track(&mut rng);
        let ctx = MutationContext::new(&track);
        for _ in 0..200 {
            let si = random_valid_state(&track, &ctx, &mut rng);
            // both call shapes: a lone state and a state with a close partner
            let sj = if rng.random_bool(0.3) {
                si
            } else {
                random_partner(&track, &si, &ctx, &mut rng).unwrap_or(si)
            };
            if state_ok < TARGET {
                if let Ok(m) = mutate_state(&si, &sj, &ctx, &mut rng) {
                    state_ok += 1;
                    if !(harder(&track, &si, &m) && close(&m, &sj, &ctx) && valid(&track, &m, &ctx))
                    {
                        violations.push(format!("mutate_state {si:?} -> {m:?}"));
                    }
                }
            }
            if pair_ok < TARGET && sj != si {
                let pair = StatePair { s1: si, s2: sj };
                if let Ok(m) = mutate_pair(&pair, &ctx, &mut rng) {
                    pair_ok += 1;
                    let delta_p = (m.s2.x - sj.x, m.s2.y - sj.y);
                    let shifted = (m.s1.x - si.x, m.s1.y - si.y);
                    let same_delta = (delta_p.0 - shifted.0).abs() < 1e-9
                        && (delta_p.1 - shifted.1).abs() < 1e-9
                        && ((m.s2.v - sj.v) - (m.s1.v - si.v)).abs() < 1e-9
                        && angle_gap(m.s2.psi - sj.psi, m.s1.psi - si.psi) < 1e-9;
                    let ok = harder(&track, &sj, &m.s2)
                        && close(&m.s2, &si, &ctx)
                        && valid(&track, &m.s1, &ctx)
                        && valid(&track, &m.s2, &ctx)
                        && close(&m.s1, &m.s2, &ctx)
                        && m.s1 != m.s2
                        && same_delta;
                    if !ok {
                        violations.push(format!("mutate_pair {pair:?} -> {m:?}"));
                    }
                }
            }
        }
    }
    if let Some(v) = violations.first() {
        eprintln!("first violation: {v}");
    }
    outcome(
        violations.is_empty(),
        format!(
            "{state_ok} mutate_state + {pair_ok} mutate_pair successes, {} violations",
            violations.len()
        ),
    )
}

// ---------------------------------------------------------------------------
// binary search

#[derive(Clone, Copy)]
struct Code {
    s1: bool,
    s2: bool,
}

fn pair_outcome(c: Code) -> PairOutcome {
    let summary = |ok: bool| EpisodeSummary {
        success: ok,
        max_xte: if ok { 0.5 } else { 2.5 },
    };
    PairOutcome {
        s1: summary(c.s1),
        s2: summary(c.s2),
    }
}

/// The specified semantics, written recursively: the last pair first, then
/// bisection toward the head on double failure and the tail on double success.
fn search_oracle(seq: &[Code]) -> (isize, usize) {
    fn bisect(seq: &[Code], lo: usize, hi: usize, evals: &mut usize) -> isize {
        if hi - lo <= 1 {
            return -1;
        }
        let mid = lo + (hi - lo) / 2;
        *evals += 1;
        let c = seq[mid];
        if c.s1 != c.s2 {
            mid as isize
        } else if c.s1 {
            bisect(seq, mid, hi, evals)
        } else {
            bisect(seq, lo, mid, evals)
        }
    }
    let last = seq.len() - 1;
    let c = seq[last];
    if c.s1 != c.s2 {
        return (last as isize, 1);
    }
    if c.s1 {
        return (-1, 1);
    }
    let mut evals = 1;
    let found = bisect(seq, 0, last, &mut evals);
    (found, evals)
}

fn run_search(seq: &[Code]) -> (isize, usize) {
    let mut calls = 0;
    let (found, reported) = binary_search_boundary(seq.len(), |i| {
        calls += 1;
        pair_outcome(seq[i])
    });
    assert_eq!(
        calls, reported,
        "reported evaluation count disagrees with the calls made"
    );
    (found, reported)
}

fn criterion_binary_search() -> Outcome {
    let mut mismatches = 0;
    let mut over_budget = 0;
    let mut monotone = 0;
    for len in 1..=8usize {
        let bound = (len as f64).log2().ceil() as usize + 1;
        // each state fails from its own index onward (len means never)
        for f1 in 1..=len {
            for f2 in 1..=len {
                let seq: Vec<Code> = (0..len)
                    .map(|i| Code {
                        s1: i < f1,
                        s2: i < f2,
                    })
                    .collect();
                monotone += 1;
                let got = run_search(&seq);
                mismatches += usize::from(got != search_oracle(&seq));
                over_budget += usize::from(got.1 > bound);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let len = rng.random_range(2..=24);
        let mut seq: Vec<Code> = (0..len)
            .map(|_| Code {
                s1: rng.random_bool(0.5),
                s2: rng.random_bool(0.5),
            })
            .collect();
        seq[0] = Code { s1: true, s2: true };
        mismatches += usize::from(run_search(&seq) != search_oracle(&seq));
    }
    outcome(
        mismatches == 0 && over_budget == 0,
        format!("{monotone} monotone + 1000 random sequences, {mismatches} mismatches, {over_budget} over the evaluation bound"),
    )
}

// ---------------------------------------------------------------------------
// angular ranges

fn criterion_angular_example() -> Outcome {
    let validity = AngularRange::around(15.0, 20.0);
    let closeness = AngularRange::around(350.0, 7.2);
    let r = intersect_angular_ranges(validity, closeness);
    let got: Vec<(f64, f64)> = r.iter().map(|a| (a.lo(), a.hi())).collect();
    let swapped: Vec<(f64, f64)> = intersect_angular_ranges(closeness, validity)
        .iter()
        .map(|a| (a.lo(), a.hi()))
        .collect();
    outcome(
        got == vec![(355.0, 357.2)] && swapped == got,
        format!("overlap {got:?}"),
    )
}

// ---------------------------------------------------------------------------
// experiment-level criteria

const TIERS: [&str; 4] = ["M1", "M2", "M3", "M4"];

fn criterion_boundary_trend(r: &ExperimentReport) -> Outcome {
    let means: Vec<f64> = TIERS
        .iter()
        .map(|m| r.summary(m).unwrap().genbo_mean)
        .collect();
    let inversions = means.windows(2).filter(|w| w[1] >= w[0]).count();
    let autopilot = r.summary("autopilot").unwrap().genbo_mean;
    let smallest = means.iter().all(|&m| autopilot < m);
    outcome(
        inversions <= 1 && smallest,
        format!(
            "tier means {means:.2?}, autopilot {autopilot:.2}, {inversions} adjacent inversions"
        ),
    )
}

fn criterion_genbo_vs_baseline(r: &ExperimentReport) -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for m in TIERS {
        let s = r.summary(m).unwrap();
        pass &= s.genbo_mean > s.baseline_mean && s.genbo_vs_baseline.p < 0.05;
        detail.push(format!(
            "{m} {:.2}/{:.2} p={:.4}",
            s.genbo_mean, s.baseline_mean, s.genbo_vs_baseline.p
        ));
    }
    outcome(pass, detail.join(", "))
}

fn criterion_recoverability(r: &ExperimentReport) -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for w in TIERS.windows(2) {
        let (weak, strong) = (w[0], w[1]);
        let strong_on_weak = r.recoverability_of(strong, weak).and_then(|x| x.overall());
        let weak_on_strong = r.recoverability_of(weak, strong).and_then(|x| x.overall());
        match (strong_on_weak, weak_on_strong) {
            (Some(a), Some(b)) => {
                pass &= a - b >= 20.0;
                detail.push(format!("{strong} on {weak} {a:.1} vs {b:.1}"));
            }
            _ => {
                pass = false;
                detail.push(format!("{weak}/{strong} missing states"));
            }
        }
    }
    outcome(pass, detail.join(", "))
}

fn straight_state(track: &Track, offset: f64, theta: f64, v: f64) -> VehicleState {
    let o = track.origin();
    VehicleState::new(
        Vec2::new(o.x + offset, o.y + 10.0),
        track.heading_at(track.origin_index()) + theta,
        v,
    )
}

fn criterion_radius(r: &ExperimentReport) -> Outcome {
    let cfg = RunConfig::default();
    let t = training_track();
    let limits = cfg.limits;
    let w2 = t.lane_width() / 2.0;
    let max = state_radius(
        &straight_state(&t, w2, limits.theta_max, limits.v_max),
        &t,
        &limits,
    );
    let origin = state_radius(&straight_state(&t, 0.0, 0.0, 0.0), &t, &limits);
    let edge = state_radius(&straight_state(&t, w2, 0.0, 0.0), &t, &limits);
    let units = max == 1.0 && origin == 0.0 && (edge - 1.0 / 3f64.sqrt()).abs() < 1e-12;

    let m1 = r.summary("M1").unwrap();
    let mut pass = units;
    let mut detail = vec![format!("unit cases {max}/{origin}/{edge:.12}")];
    for m in &TIERS[1..] {
        let s = r.summary(m).unwrap();
        let below = matches!((m1.mean_radius, s.mean_radius), (Some(a), Some(b)) if a < b);
        let p = s.radius_vs_weakest.map(|x| x.p);
        pass &= below && p.is_some_and(|p| p < 0.05);
        detail.push(format!(
            "{m} {:.3} p={:?}",
            s.mean_radius.unwrap_or(f64::NAN),
            p
        ));
    }
    detail.insert(1, format!("M1 {:.3}", m1.mean_radius.unwrap_or(f64::NAN)));
    outcome(pass, detail.join(", "))
}

fn criterion_retraining(r: &ExperimentReport) -> Outcome {
    let top = r
        .ladder
        .iter()
        .min_by(|a, b| a.validation_loss.total_cmp(&b.validation_loss))
        .map(|t| t.name.clone())
        .unwrap();
    let original = r.original_rates.iter().find(|o| o.model == top).unwrap();
    let runs: Vec<_> = r.retraining.iter().filter(|x| x.model == top).collect();
    if original.rates.len() < 4 || runs.len() < 5 {
        return outcome(
            false,
            format!(
                "{} tracks, {} repetitions",
                original.rates.len(),
                runs.len()
            ),
        );
    }
    let retrained: Vec<f64> = (0..original.rates.len())
        .map(|k| mean(&runs.iter().map(|x| x.rates[k]).collect::<Vec<_>>()))
        .collect();
    let kept: Vec<usize> = (0..original.rates.len())
        .filter(|&k| original.rates[k] > 0.0)
        .collect();
    let excluded: Vec<String> = (0..original.rates.len())
        .filter(|k| !kept.contains(k))
        .map(|k| format!("track {k}: 0 -> {:.1}", retrained[k]))
        .collect();
    let no_regression = runs.iter().all(|x| x.training_track_rate == 100.0);
    let ratio = if kept.is_empty() {
        f64::NAN
    } else {
        mean(&kept.iter().map(|&k| retrained[k]).collect::<Vec<_>>())
            / mean(&kept.iter().map(|&k| original.rates[k]).collect::<Vec<_>>())
    };
    outcome(
        ratio >= 1.3 && no_regression,
        format!(
            "{top}: original {:?}, retrained {:.1?}, ratio {ratio:.3}, training track kept at 100: {no_regression}, excluded [{}]",
            original.rates,
            retrained,
            excluded.join("; ")
        ),
    )
}

// ---------------------------------------------------------------------------
// statistics oracles

fn multisets(max_len: usize) -> Vec<Vec<f64>> {
    fn grow(prefix: &mut Vec<f64>, from: u32, left: usize, out: &mut Vec<Vec<f64>>) {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        if left == 0 {
            return;
        }
        for v in from..=4 {
            prefix.push(v as f64);
            grow(prefix, v, left - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), 1, max_len, &mut out);
    out
}

fn pairwise_u(a: &[f64], b: &[f64]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            u += if x > y {
                1.0
            } else if x == y {
                0.5
            } else {
                0.0
            };
        }
    }
    u
}

fn brute_force_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (n, n1) = (pooled.len(), a.len());
    let center = (a.len() * b.len()) as f64 / 2.0;
    let observed = (pairwise_u(a, b) - center).abs();
    let (mut total, mut extreme) = (0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != n1 {
            continue;
        }
        let (x, y): (Vec<(usize, f64)>, Vec<(usize, f64)>) = pooled
            .iter()
            .copied()
            .enumerate()
            .partition(|(i, _)| mask >> i & 1 == 1);
        let x: Vec<f64> = x.into_iter().map(|(_, v)| v).collect();
        let y: Vec<f64> = y.into_iter().map(|(_, v)| v).collect();
        total += 1;
        extreme += u64::from((pairwise_u(&x, &y) - center).abs() >= observed);
    }
    extreme as f64 / total as f64
}

fn rank_sum(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    a.iter()
        .map(|x| {
            let below = pooled.iter().filter(|y| *y < x).count() as f64;
            let equal = pooled.iter().filter(|y| *y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .sum()
}

fn kendall_reference(seq: &[i64]) -> (i64, f64) {
    let mut s = 0;
    for (i, x) in seq.iter().enumerate() {
        for y in &seq[i + 1..] {
            s += (y - x).signum();
        }
    }
    let mut groups: BTreeMap<i64, i64> = BTreeMap::new();
    for &v in seq {
        *groups.entry(v).or_default() += 1;
    }
    let n = seq.len() as i64;
    let tied: i64 = groups.values().map(|&t| t * (t - 1) * (2 * t + 5)).sum();
    (s, (n * (n - 1) * (2 * n + 5) - tied) as f64 / 18.0)
}

fn criterion_statistics() -> Outcome {
    let samples = multisets(5);
    let (mut a12_bad, mut mw_bad, mut pairs) = (0, 0, 0);
    for a in &samples {
        for b in &samples {
            pairs += 1;
            let (n1, n2) = (a.len() as f64, b.len() as f64);
            let by_ranks = (rank_sum(a, b) - n1 * (n1 + 1.0) / 2.0) / (n1 * n2);
            a12_bad += usize::from(vargha_delaney_a12(a, b).unwrap() != by_ranks);
            let mw = mann_whitney_u(a, b).unwrap();
            let u = pairwise_u(a, b);
            mw_bad += usize::from(
                !(mw.exact && mw.u_a == u && mw.u_b == n1 * n2 - u && mw.p == brute_force_p(a, b)),
            );
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mk_bad = 0;
    for _ in 0..1000 {
        let len = rng.random_range(3..=40);
        let spread = rng.random_range(2..=50);
        let seq: Vec<i64> = (0..len).map(|_| rng.random_range(0..spread)).collect();
        let as_f64: Vec<f64> = seq.iter().map(|&v| v as f64).collect();
        let got = mann_kendall_s(&as_f64).unwrap();
        let (s, variance) = kendall_reference(&seq);
        mk_bad += usize::from(got.s != s || got.variance != variance);
    }
    outcome(
        a12_bad == 0 && mw_bad == 0 && mk_bad == 0,
        format!("{pairs} sample pairs: {a12_bad} A12 and {mw_bad} Mann-Whitney mismatches; {mk_bad} Mann-Kendall mismatches over 1000 sequences"),
    )
}

// ---------------------------------------------------------------------------
// determinism

fn files_under(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn criterion_determinism(first_dir: &Path, second: &RunConfig) -> Outcome {
    if let Err(e) = run_experiment(second) {
        return outcome(false, format!("second run failed: {e}"));
    }
    let a = files_under(first_dir);
    let b = files_under(&second.out_dir);
    let differing: Vec<&String> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
    let archives = a.keys().filter(|k| k.starts_with("archives/")).count();
    outcome(
        a.len() == b.len() && differing.is_empty() && archives > 0,
        format!(
            "{} files ({archives} archives) compared, {} differ {:?}",
            a.len(),
            differing.len(),
            differing
        ),
    )
}

// ---------------------------------------------------------------------------

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let first = RunConfig {
        out_dir: dir.path().join("first"),
        ..RunConfig::default()
    };
    let second = RunConfig {
        out_dir: dir.path().join("second"),
        threads: Some(2),
        ..RunConfig::default()
    };

    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let timed = |f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let mut o = f();
        o.detail = format!("{} [{:.1}s]", o.detail, start.elapsed().as_secs_f64());
        o
    };
    results.push((
        1,
        "mutation contracts",
        timed(&criterion_mutation_contracts),
    ));
    results.push((2, "binary search oracle", timed(&criterion_binary_search)));
    results.push((
        3,
        "angular overlap example",
        timed(&criterion_angular_example),
    ));

    let start = Instant::now();
    match run_experiment(&first) {
        Ok(report) => {
            println!(
                "experiment finished in {:.1}s",
                start.elapsed().as_secs_f64()
            );
            results.push((
                4,
                "boundary pairs shrink up the ladder",
                criterion_boundary_trend(&report),
            ));
            results.push((
                5,
                "GenBo finds more pairs than the baseline",
                criterion_genbo_vs_baseline(&report),
            ));
            results.push((
                6,
                "recoverability asymmetry",
                criterion_recoverability(&report),
            ));
            results.push((7, "radius ordering", criterion_radius(&report)));
            results.push((
                8,
                "retraining improves harder tracks",
                criterion_retraining(&report),
            ));
        }
        Err(e) => {
            for (k, name) in [
                (4, "boundary trend"),
                (5, "GenBo vs baseline"),
                (6, "recoverability"),
                (7, "radius"),
                (8, "retraining"),
            ] {
                results.push((k, name, outcome(false, format!("experiment failed: {e}"))));
            }
        }
    }
    results.push((9, "statistics oracles", timed(&criterion_statistics)));
    results.push((
        10,
        "determinism",
        timed(&|| criterion_determinism(&first.out_dir, &second)),
    ));

    let mut failed = 0;
    for (k, name, o) in &results {
        println!(
            "{} criterion {k:>2} ({name}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
