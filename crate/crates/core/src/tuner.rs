//! Exhaustive (window size, threshold) search for the rule-based counter,
//! scored by the composite metric.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::RadarCube;
use crate::dataset::{PeopleCount, MAX_PEOPLE};
use crate::error::{Error, Result};
use crate::metrics::{composite_score, confusion, CompositeParts, CompositeWeights};
use crate::preprocess::StdMap;
use crate::rulecc::{
    aggregate_window_counts, count_field, window_field, window_starts, RuleCCConfig,
    DEFAULT_WINDOW_SIZES,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub window_sizes: Vec<usize>,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            window_sizes: DEFAULT_WINDOW_SIZES.to_vec(),
            tau_min: 0.005,
            tau_max: 0.08,
            tau_points: 50,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.window_sizes.is_empty() || self.window_sizes.iter().any(|&w| w < 2) {
            return Err(Error::InvalidConfig(format!(
                "window sizes must be non-empty and >= 2, got {:?}",
                self.window_sizes
            )));
        }
        if self.tau_points == 0
            || !(self.tau_min > 0.0)
            || !self.tau_max.is_finite()
            || self.tau_max < self.tau_min
            || (self.tau_points > 1 && self.tau_max == self.tau_min)
        {
            return Err(Error::InvalidConfig(format!(
                "bad tau range [{}, {}] with {} points",
                self.tau_min, self.tau_max, self.tau_points
            )));
        }
        Ok(())
    }

    pub fn cells(&self) -> usize {
        self.window_sizes.len() * self.tau_points
    }
}

/// Linearly spaced thresholds with both endpoints exact.
pub fn tau_grid(spec: &GridSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.tau_points;
    if n == 1 {
        return Ok(vec![spec.tau_min]);
    }
    let step = (spec.tau_max - spec.tau_min) / (n - 1) as f64;
    let mut taus: Vec<f64> = (0..n).map(|i| spec.tau_min + i as f64 * step).collect();
    taus[n - 1] = spec.tau_max;
    Ok(taus)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneRow {
    pub window: usize,
    pub tau: f64,
    pub composite: f64,
    pub accuracy: f64,
    pub f1_macro: f64,
    pub f1_minority: f64,
    pub recall_minority: f64,
    pub r_nonzero: f64,
    /// Samples long enough for the window.
    pub evaluated: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_config: RuleCCConfig,
    pub best_score: f64,
    pub best_index: usize,
    pub table: Vec<TuneRow>,
}

impl TuneResult {
    pub fn best_row(&self) -> &TuneRow {
        &self.table[self.best_index]
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("tune result", e))
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.table {
            w.serialize(row).map_err(|e| Error::csv("tune table", e))?;
        }
        w.into_inner()
            .map_err(|e| Error::InvalidInput(format!("tune table: {e}")))
    }

    pub fn save(&self, json: impl AsRef<Path>, csv: Option<&Path>) -> Result<()> {
        let json = json.as_ref();
        fs::write(json, self.to_json()?).map_err(|e| Error::io(json, e))?;
        if let Some(p) = csv {
            fs::write(p, self.to_csv_bytes()?).map_err(|e| Error::io(p, e))?;
        }
        Ok(())
    }
}

/// Clamps a raw count into the class range.
pub fn count_class(count: usize) -> u8 {
    count.min(usize::from(MAX_PEOPLE)) as u8
}

/// Scores every (W, tau) cell. Each cell runs the counter with the single
/// window size W and primary threshold tau over every sample at least W
/// frames long; `base` supplies the remaining counter parameters.
pub fn tune(
    cubes: &[RadarCube],
    labels: &[PeopleCount],
    spec: &GridSpec,
    base: &RuleCCConfig,
    weights: &CompositeWeights,
) -> Result<TuneResult> {
    if cubes.is_empty() || cubes.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "tuning needs a non-empty labeled dataset, got {} cubes and {} labels",
            cubes.len(),
            labels.len()
        )));
    }
    weights.validate()?;
    base.validate()?;
    let taus = tau_grid(spec)?;

    // Smoothed std fields per sample and window size do not depend on tau.
    let fields: Vec<Vec<Option<Vec<StdMap>>>> = cubes
        .par_iter()
        .map(|cube| {
            spec.window_sizes
                .iter()
                .map(|&w| {
                    let starts = window_starts(cube.frames(), w);
                    if starts.is_empty() {
                        return Ok(None);
                    }
                    starts
                        .into_iter()
                        .map(|s| window_field(&cube.slice_window(s, w)?, base))
                        .collect::<Result<Vec<_>>>()
                        .map(Some)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> = (0..spec.window_sizes.len())
        .flat_map(|wi| (0..taus.len()).map(move |ti| (wi, ti)))
        .collect();
    let table: Vec<TuneRow> = cells
        .par_iter()
        .map(|&(wi, ti)| {
            let window = spec.window_sizes[wi];
            let tau = taus[ti];
            let cfg = RuleCCConfig {
                tau,
                window_sizes: vec![window],
                ..base.clone()
            };
            let mut preds = Vec::new();
            let mut truth = Vec::new();
            for (sample, label) in fields.iter().zip(labels) {
                if let Some(windows) = &sample[wi] {
                    let counts: Vec<usize> = windows.iter().map(|f| count_field(f, &cfg)).collect();
                    preds.push(count_class(aggregate_window_counts(&counts, cfg.nonzero_ratio)));
                    truth.push(label.get());
                }
            }
            let skipped = labels.len() - truth.len();
            if skipped > 0 && ti == 0 {
                log::warn!("window {window}: {skipped} samples shorter than the window skipped");
            }
            let (parts, composite) = if truth.is_empty() {
                (CompositeParts::default(), 0.0)
            } else {
                let cm = confusion(&preds, &truth).expect("classes in range");
                let parts = CompositeParts::from_confusion(&cm);
                (parts, composite_score(&parts, weights))
            };
            TuneRow {
                window,
                tau,
                composite,
                accuracy: parts.accuracy,
                f1_macro: parts.f1_macro,
                f1_minority: parts.f1_minority,
                recall_minority: parts.recall_minority,
                r_nonzero: parts.r_nonzero,
                evaluated: truth.len(),
                skipped,
            }
        })
        .collect();

    let best_index = select_best(&table).ok_or_else(|| {
        Error::InvalidInput("no sample is long enough for any window size in the grid".into())
    })?;
    let best = &table[best_index];
    Ok(TuneResult {
        best_config: RuleCCConfig {
            tau: best.tau,
            window_sizes: vec![best.window],
            ..base.clone()
        },
        best_score: best.composite,
        best_index,
        table,
    })
}

/// Highest composite, then smaller window, then smaller tau. Cells that
/// evaluated no sample never win.
pub fn select_best(table: &[TuneRow]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, row) in table.iter().enumerate() {
        if row.evaluated == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let cur = &table[b];
                row.composite
                    .total_cmp(&cur.composite)
                    .then(cur.window.cmp(&row.window))
                    .then(cur.tau.total_cmp(&row.tau))
                    .is_gt()
            }
        };
        if better {
            best = Some(i);
        }
    }
    best
}
