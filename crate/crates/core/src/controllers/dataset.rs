use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ControllerError, Observation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Nominal,
    Boundary,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::Nominal => "nominal",
            Provenance::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub observation: Observation,
    pub steering_label: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
}

/// Training and validation parts of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: Dataset,
    pub validation: Dataset,
}

impl Dataset {
    pub fn new(samples: Vec<LabeledSample>) -> Self {
        Self { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn extend(&mut self, other: &Dataset) {
        self.samples.extend(other.samples.iter().cloned());
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.samples
            .iter()
            .filter(|s| s.provenance == provenance)
            .count()
    }

    /// Seeded shuffle, then the first `train_fraction` of samples go to training.
    pub fn split(&self, train_fraction: f64, seed: u64) -> Split {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let cut = ((self.len() as f64) * train_fraction).round() as usize;
        let pick =
            |idx: &[usize]| Dataset::new(idx.iter().map(|&i| self.samples[i].clone()).collect());
        Split {
            train: pick(&order[..cut]),
            validation: pick(&order[cut..]),
        }
    }

    /// Leading `fraction` of the samples (at least one when nonempty).
    pub fn prefix(&self, fraction: f64) -> Dataset {
        let n = ((self.len() as f64) * fraction).round() as usize;
        Dataset::new(self.samples[..n.clamp(1.min(self.len()), self.len())].to_vec())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let k = self
            .samples
            .first()
            .map_or(0, |s| s.observation.lookahead_curvatures.len());
        let mut header = vec!["xte".to_string(), "theta_deg".into(), "v_kmh".into()];
        header.extend((1..=k).map(|i| format!("c{i}")));
        header.push("steer".into());
        header.push("provenance".into());
        writeln!(out, "{}", header.join(","))?;
        for s in &self.samples {
            let o = &s.observation;
            let mut row = vec![
                format!("{:.6}", o.xte_signed),
                format!("{:.6}", o.theta),
                format!("{:.6}", o.v),
            ];
            row.extend(o.lookahead_curvatures.iter().map(|c| format!("{c:.8}")));
            row.push(format!("{:.6}", s.steering_label));
            row.push(s.provenance.as_str().to_string());
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, ControllerError> {
        let malformed =
            |line: usize, what: &str| ControllerError::Malformed(format!("line {line}: {what}"));
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(Ok(h)) => h,
            _ => return Err(malformed(1, "missing header")),
        };
        let columns: Vec<&str> = header.trim().split(',').collect();
        if columns.len() < 5
            || columns[..3] != ["xte", "theta_deg", "v_kmh"]
            || columns[columns.len() - 2..] != ["steer", "provenance"]
        {
            return Err(malformed(1, "unexpected header"));
        }
        let k = columns.len() - 5;
        let mut samples = Vec::new();
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            let line = line.map_err(|e| malformed(n, &e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != columns.len() {
                return Err(malformed(n, "wrong number of fields"));
            }
            let nums = fields[..fields.len() - 1]
                .iter()
                .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| malformed(n, "non-numeric field"))?;
            let provenance = match fields[fields.len() - 1] {
                "nominal" => Provenance::Nominal,
                "boundary" => Provenance::Boundary,
                other => return Err(malformed(n, &format!("unknown provenance {other:?}"))),
            };
            let steer = nums[3 + k];
            if steer.abs() > 1.0 {
                return Err(malformed(n, "steering label outside [-1, 1]"));
            }
            samples.push(LabeledSample {
                observation: Observation {
                    xte_signed: nums[0],
                    theta: nums[1],
                    v: nums[2],
                    lookahead_curvatures: nums[3..3 + k].to_vec(),
                },
                steering_label: steer,
                provenance,
            });
        }
        Ok(Dataset::new(samples))
    }
}
