use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sequence needs at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
}

/// Samples with `n1 * n2` up to this size get the exact Mann-Whitney null
/// distribution.
pub const EXACT_CUTOFF: usize = 400;

const Z_CRITICAL: f64 = 1.959_963_984_540_054;

fn std_normal_sf(z: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("unit normal");
    1.0 - n.cdf(z)
}

/// Vargha-Delaney effect size: probability that a draw from `a` exceeds one
/// from `b`, ties counting half.
pub fn vargha_delaney_a12(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut wins = 0.0;
    for x in a {
        for y in b {
            if x > y {
                wins += 1.0;
            } else if x == y {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (a.len() * b.len()) as f64)
}

/// Midranks (1-based) of `values` in the pooled order.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    /// Pairs in which the `a` value is larger, ties counting half.
    pub u_a: f64,
    pub u_b: f64,
    /// Two-sided p-value.
    pub p: f64,
    pub exact: bool,
    /// All pooled values identical; `p` is reported as 1.
    pub degenerate: bool,
}

/// Mann-Whitney rank test, exact below [`EXACT_CUTOFF`] and a tie- and
/// continuity-corrected normal approximation above.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n1].iter().sum();
    let u_a = rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0;
    let u_b = (n1 * n2) as f64 - u_a;

    if pooled.iter().all(|&v| v == pooled[0]) {
        return Ok(MannWhitney {
            u_a,
            u_b,
            p: 1.0,
            exact: n1 * n2 <= EXACT_CUTOFF,
            degenerate: true,
        });
    }
    if n1 * n2 <= EXACT_CUTOFF {
        let p = exact_p(&ranks, n1);
        return Ok(MannWhitney {
            u_a,
            u_b,
            p,
            exact: true,
            degenerate: false,
        });
    }

    let n = (n1 + n2) as f64;
    let ties = tie_sizes(&pooled);
    let tie_term: f64 = ties.iter().map(|&t| t.powi(3) - t).sum::<f64>() / (n * (n - 1.0));
    let var = (n1 * n2) as f64 / 12.0 * ((n + 1.0) - tie_term);
    let mean = (n1 * n2) as f64 / 2.0;
    let z = (((u_a - mean).abs() - 0.5).max(0.0)) / var.sqrt();
    let p = (2.0 * std_normal_sf(z)).min(1.0);
    Ok(MannWhitney {
        u_a,
        u_b,
        p,
        exact: false,
        degenerate: false,
    })
}

/// Two-sided permutation p-value: share of size-`n1` subsets of the pooled
/// midranks whose rank sum lies at least as far from its mean as the
/// observed one. Doubled midranks keep the arithmetic in integers.
fn exact_p(ranks: &[f64], n1: usize) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
    let n = doubled.len();
    let max_sum: usize = doubled.iter().sum();
    // counts[k][s]: subsets of size k with doubled rank sum s
    let mut counts = vec![vec![0u128; max_sum + 1]; n1 + 1];
    counts[0][0] = 1;
    for &r in &doubled {
        for k in (1..=n1).rev() {
            for s in (r..=max_sum).rev() {
                let c = counts[k - 1][s - r];
                if c != 0 {
                    counts[k][s] += c;
                }
            }
        }
    }
    let observed: usize = doubled[..n1].iter().sum();
    // the doubled sum has mean n1 * (n + 1)
    let center = (n1 * (n + 1)) as i128;
    let dev_obs = (observed as i128 - center).abs();
    let mut total = 0u128;
    let mut extreme = 0u128;
    for (s, &c) in counts[n1].iter().enumerate() {
        total += c;
        if (s as i128 - center).abs() >= dev_obs {
            extreme += c;
        }
    }
    extreme as f64 / total as f64
}

fn tie_sizes(values: &[f64]) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        if j > i {
            out.push((j - i + 1) as f64);
        }
        i = j + 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Increasing,
    Decreasing,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannKendall {
    pub s: i64,
    pub variance: f64,
    pub z: f64,
    pub trend: Trend,
}

/// Mann-Kendall trend test at the two-sided 5% level.
pub fn mann_kendall_s(seq: &[f64]) -> Result<MannKendall, StatsError> {
    if seq.len() < 3 {
        return Err(StatsError::TooShort {
            needed: 3,
            got: seq.len(),
        });
    }
    let mut s: i64 = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            s += match seq[j].partial_cmp(&seq[i]) {
                Some(std::cmp::Ordering::Greater) => 1,
                Some(std::cmp::Ordering::Less) => -1,
                _ => 0,
            };
        }
    }
    let n = seq.len() as f64;
    let ties: f64 = tie_sizes(seq)
        .iter()
        .map(|t| t * (t - 1.0) * (2.0 * t + 5.0))
        .sum();
    let variance = (n * (n - 1.0) * (2.0 * n + 5.0) - ties) / 18.0;
    let z = match s {
        0 => 0.0,
        s if variance <= 0.0 => s.signum() as f64 * f64::INFINITY,
        s if s > 0 => (s - 1) as f64 / variance.sqrt(),
        s => (s + 1) as f64 / variance.sqrt(),
    };
    let trend = if z > Z_CRITICAL {
        Trend::Increasing
    } else if z < -Z_CRITICAL {
        Trend::Decreasing
    } else {
        Trend::None
    };
    Ok(MannKendall {
        s,
        variance,
        z,
        trend,
    })
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}
