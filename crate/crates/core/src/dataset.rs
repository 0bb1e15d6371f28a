//! Labeled samples: one per (problem, permutation seed), assembled from
//! an LC/NLC run pair plus the feature vector of the permuted instance.
//!
//! The label is the log2 speedup factor between the two augmented
//! runtimes; negative means LC was faster. Samples touched by numerical
//! errors and samples solved at the root by both strategies are dropped
//! before training, and the counts are reported.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::features::{FeatureVector, FEATURE_COUNT};
use crate::solver::{RunRecord, RunStatus, Strategy};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing {missing} run for ({problem_id}, seed {seed})")]
    MissingPair {
        problem_id: String,
        seed: u64,
        missing: &'static str,
    },
    #[error("no feature vector for ({problem_id}, seed {seed})")]
    MissingFeatures { problem_id: String, seed: u64 },
    #[error("malformed dataset csv (line {line}): {reason}")]
    MalformedCsv { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which run quantity acts as "Time" for labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LabelMetric {
    /// Deterministic simplex-iteration count (default).
    Work,
    /// Wall-clock seconds.
    Wall,
}

impl LabelMetric {
    pub fn parse(s: &str) -> Option<LabelMetric> {
        match s.to_ascii_lowercase().as_str() {
            "work" => Some(LabelMetric::Work),
            "wall" => Some(LabelMetric::Wall),
            _ => None,
        }
    }

    pub fn of(&self, rec: &RunRecord) -> f64 {
        match self {
            LabelMetric::Work => rec.work as f64,
            LabelMetric::Wall => rec.wall_s,
        }
    }
}

/// log2((time_lc + 1) / (time_nlc + 1)); the augmentation tames tiny
/// runtimes and guards the division.
pub fn label(time_lc: f64, time_nlc: f64) -> f64 {
    ((time_lc + 1.0) / (time_nlc + 1.0)).log2()
}

/// Per-strategy outcome of one sample.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StrategyMetrics {
    pub work: u64,
    pub wall_s: f64,
    pub nodes: u64,
    pub pdi: f64,
    pub status: RunStatus,
}

impl StrategyMetrics {
    fn from_record(rec: &RunRecord) -> StrategyMetrics {
        StrategyMetrics {
            work: rec.work,
            wall_s: rec.wall_s,
            nodes: rec.nodes,
            pdi: rec.pdi,
            status: rec.status,
        }
    }

    pub fn solved(&self) -> bool {
        self.status == RunStatus::Optimal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub problem_id: String,
    pub seed: u64,
    pub features: FeatureVector,
    pub label: f64,
    pub met_lc: StrategyMetrics,
    pub met_nlc: StrategyMetrics,
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CleaningReport {
    pub errors_dropped: usize,
    pub root_solved_dropped: usize,
    pub kept: usize,
}

/// Joins paired runs with their feature vectors into a cleaned dataset.
/// Expects for every (problem, seed) key with any run both the LC and
/// the NLC record.
pub fn build_dataset(
    runs: &[RunRecord],
    features: &BTreeMap<(String, u64), FeatureVector>,
    metric: LabelMetric,
) -> Result<(Dataset, CleaningReport), DatasetError> {
    let mut pairs: BTreeMap<(String, u64), (Option<&RunRecord>, Option<&RunRecord>)> =
        BTreeMap::new();
    for rec in runs {
        let key = (rec.problem_id.clone(), rec.seed);
        let slot = pairs.entry(key).or_default();
        match rec.strategy {
            Strategy::Lc => slot.0 = Some(rec),
            Strategy::Nlc => slot.1 = Some(rec),
        }
    }

    let mut report = CleaningReport {
        errors_dropped: 0,
        root_solved_dropped: 0,
        kept: 0,
    };
    let mut samples = Vec::new();
    for ((problem_id, seed), (lc, nlc)) in pairs {
        let lc = lc.ok_or_else(|| DatasetError::MissingPair {
            problem_id: problem_id.clone(),
            seed,
            missing: "LC",
        })?;
        let nlc = nlc.ok_or_else(|| DatasetError::MissingPair {
            problem_id: problem_id.clone(),
            seed,
            missing: "NLC",
        })?;
        if lc.status == RunStatus::Error || nlc.status == RunStatus::Error {
            report.errors_dropped += 1;
            continue;
        }
        let both_root =
            lc.nodes == 1 && nlc.nodes == 1 && lc.status == RunStatus::Optimal
                && nlc.status == RunStatus::Optimal;
        if both_root {
            report.root_solved_dropped += 1;
            continue;
        }
        let features = features
            .get(&(problem_id.clone(), seed))
            .ok_or_else(|| DatasetError::MissingFeatures {
                problem_id: problem_id.clone(),
                seed,
            })?;
        samples.push(LabeledSample {
            problem_id,
            seed,
            features: *features,
            label: label(metric.of(lc), metric.of(nlc)),
            met_lc: StrategyMetrics::from_record(lc),
            met_nlc: StrategyMetrics::from_record(nlc),
        });
        report.kept += 1;
    }
    Ok((Dataset { samples }, report))
}

/// Permutation-based split: the original instances (seed 0) form the
/// test set, the permuted ones (seeds >= 1) the training set.
pub fn split_by_seed(ds: &Dataset) -> (Dataset, Dataset) {
    let (test, train): (Vec<_>, Vec<_>) =
        ds.samples.iter().cloned().partition(|s| s.seed == 0);
    (Dataset { samples: train }, Dataset { samples: test })
}

/// Lightweight row as stored in dataset.csv.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub problem_id: String,
    pub seed: u64,
    pub features: FeatureVector,
    pub label: f64,
}

fn csv_field_ok(s: &str) -> bool {
    !s.contains(',') && !s.contains('"') && !s.contains('\n')
}

/// Writes dataset.csv: a `#`-comment metadata line, then the header
/// `f01..f32,label,problem_id,seed`, then one row per sample.
pub fn write_dataset_csv<W: Write>(
    ds: &Dataset,
    config_hash: &str,
    mut w: W,
) -> Result<(), DatasetError> {
    writeln!(w, "# v=1 layout=f32v1 config_hash={config_hash}")?;
    let header: Vec<String> = (1..=FEATURE_COUNT)
        .map(|i| format!("f{i:02}"))
        .chain(["label".into(), "problem_id".into(), "seed".into()])
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for s in &ds.samples {
        assert!(csv_field_ok(&s.problem_id), "problem id unsafe for csv");
        let mut fields: Vec<String> = s.features.iter().map(|v| format!("{v}")).collect();
        fields.push(format!("{}", s.label));
        fields.push(s.problem_id.clone());
        fields.push(format!("{}", s.seed));
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Reads dataset.csv rows; returns the rows and the config hash from
/// the metadata line, if present.
pub fn read_dataset_csv<R: BufRead>(
    r: R,
) -> Result<(Vec<FeatureRow>, Option<String>), DatasetError> {
    let mut rows = Vec::new();
    let mut config_hash = None;
    let mut header_seen = false;
    for (lineno, line) in r.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            for tok in meta.split_whitespace() {
                if let Some(h) = tok.strip_prefix("config_hash=") {
                    config_hash = Some(h.to_string());
                }
            }
            continue;
        }
        if !header_seen {
            header_seen = true;
            if !line.starts_with("f01") {
                return Err(DatasetError::MalformedCsv {
                    line: lineno,
                    reason: "expected header starting with f01".into(),
                });
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != FEATURE_COUNT + 3 {
            return Err(DatasetError::MalformedCsv {
                line: lineno,
                reason: format!("expected {} fields, got {}", FEATURE_COUNT + 3, fields.len()),
            });
        }
        let mut features = [0.0; FEATURE_COUNT];
        for (k, f) in features.iter_mut().enumerate() {
            *f = fields[k].parse().map_err(|_| DatasetError::MalformedCsv {
                line: lineno,
                reason: format!("bad float '{}'", fields[k]),
            })?;
        }
        let label: f64 = fields[FEATURE_COUNT]
            .parse()
            .map_err(|_| DatasetError::MalformedCsv {
                line: lineno,
                reason: "bad label".into(),
            })?;
        let problem_id = fields[FEATURE_COUNT + 1].to_string();
        let seed: u64 = fields[FEATURE_COUNT + 2]
            .parse()
            .map_err(|_| DatasetError::MalformedCsv {
                line: lineno,
                reason: "bad seed".into(),
            })?;
        rows.push(FeatureRow {
            problem_id,
            seed,
            features,
            label,
        });
    }
    Ok((rows, config_hash))
}
