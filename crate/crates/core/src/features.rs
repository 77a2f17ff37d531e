//! 18-dimensional statistical summary of a radar cube.
//!
//! Three per-frame measures (spatial mean, spatial standard deviation and
//! Gini coefficient) form three time series; each series is summarized by
//! six statistics. Layout:
//!
//! ```text
//! [ mean-series | std-series | gini-series ]
//!   each block: median, max, min, p75, p25, std
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cube::{FrameMap, RadarCube};
use crate::dataset::{Environment, PeopleCount, Split};
use crate::error::{Error, Result};
use crate::stats::{mean, percentile_sorted, population_std, sorted_copy};

pub const FEATURE_DIM: usize = 18;
pub const SUMMARY_LEN: usize = 6;

/// Names of the 18 features in layout order.
pub fn feature_names() -> Vec<String> {
    let blocks = ["mean", "std", "gini"];
    let stats = ["median", "max", "min", "p75", "p25", "std"];
    blocks
        .iter()
        .flat_map(|b| stats.iter().map(move |s| format!("{b}_{s}")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mean_block(&self) -> &[f64] {
        &self.0[0..6]
    }

    pub fn std_block(&self) -> &[f64] {
        &self.0[6..12]
    }

    pub fn gini_block(&self) -> &[f64] {
        &self.0[12..18]
    }
}

pub fn frame_mean(frame: &FrameMap) -> f64 {
    mean(frame.data())
}

/// Population std over the spatial entries of one frame.
pub fn frame_std(frame: &FrameMap) -> f64 {
    population_std(frame.data())
}

pub fn frame_gini(frame: &FrameMap) -> Result<f64> {
    gini(frame.data())
}

/// Gini coefficient of non-negative values via the sorted-sum form
/// `2 sum(i x_(i)) / (n sum x) - (n + 1) / n`; all zeros give 0.
pub fn gini(values: &[f64]) -> Result<f64> {
    if let Some((i, &v)) = values.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::NegativeValue { index: i, value: v });
    }
    let n = values.len();
    let total: f64 = values.iter().sum();
    if n == 0 || total <= 0.0 {
        return Ok(0.0);
    }
    let sorted = sorted_copy(values.iter().copied());
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, x)| (i + 1) as f64 * x)
        .sum();
    let nf = n as f64;
    let g = 2.0 * weighted / (nf * total) - (nf + 1.0) / nf;
    Ok(g.clamp(0.0, 1.0))
}

/// (median, max, min, p75, p25, population std) of a non-empty series.
pub fn summarize(series: &[f64]) -> Result<[f64; SUMMARY_LEN]> {
    if series.is_empty() {
        return Err(Error::InvalidInput("cannot summarize an empty series".into()));
    }
    let s = sorted_copy(series.iter().copied());
    Ok([
        percentile_sorted(&s, 50.0),
        s[s.len() - 1],
        s[0],
        percentile_sorted(&s, 75.0),
        percentile_sorted(&s, 25.0),
        population_std(series),
    ])
}

pub fn extract_features(cube: &RadarCube) -> Result<FeatureVector> {
    if cube.frames() == 0 || cube.plane_len() == 0 {
        return Err(Error::EmptyCube);
    }
    let mut means = Vec::with_capacity(cube.frames());
    let mut stds = Vec::with_capacity(cube.frames());
    let mut ginis = Vec::with_capacity(cube.frames());
    for f in 0..cube.frames() {
        let frame = cube.frame_map(f);
        means.push(frame_mean(&frame));
        stds.push(frame_std(&frame));
        ginis.push(frame_gini(&frame)?);
    }
    let mut out = [0.0; FEATURE_DIM];
    for (block, series) in [means, stds, ginis].iter().enumerate() {
        out[block * SUMMARY_LEN..(block + 1) * SUMMARY_LEN].copy_from_slice(&summarize(series)?);
    }
    Ok(FeatureVector(out))
}

/// One row of a feature CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub features: FeatureVector,
    pub label: PeopleCount,
    pub environment: Environment,
    pub split: Split,
}

/// Feature table with CSV columns `f00..f17,label,environment,split`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn header() -> Vec<String> {
        let mut h: Vec<String> = (0..FEATURE_DIM).map(|i| format!("f{i:02}")).collect();
        h.extend(["label", "environment", "split"].map(String::from));
        h
    }

    pub fn filter(&self, pred: impl Fn(&FeatureRow) -> bool) -> Self {
        Self {
            rows: self.rows.iter().filter(|r| pred(r)).cloned().collect(),
        }
    }

    pub fn split(&self, split: Split) -> Self {
        self.filter(|r| r.split == split)
    }

    pub fn matrix(&self) -> Vec<[f64; FEATURE_DIM]> {
        self.rows.iter().map(|r| r.features.0).collect()
    }

    pub fn labels(&self) -> Vec<f64> {
        self.rows.iter().map(|r| f64::from(r.label.get())).collect()
    }

    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(Self::header())
            .map_err(|e| Error::csv("feature header", e))?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.features.0.iter().map(|v| v.to_string()).collect();
            rec.push(r.label.to_string());
            rec.push(r.environment.to_string());
            rec.push(r.split.to_string());
            w.write_record(&rec).map_err(|e| Error::csv("feature row", e))?;
        }
        w.into_inner()
            .map_err(|e| Error::InvalidInput(format!("flushing feature CSV: {e}")))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_bytes()?).map_err(|e| Error::io(path, e))
    }

    pub fn from_csv_bytes(bytes: &[u8]) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(bytes);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::csv("feature header", e))?
            .iter()
            .map(String::from)
            .collect();
        if header != Self::header() {
            return Err(Error::InvalidInput(format!(
                "unexpected feature CSV header {header:?}"
            )));
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(format!("feature row {}", i + 1), e))?;
            let mut f = [0.0; FEATURE_DIM];
            for (j, slot) in f.iter_mut().enumerate() {
                *slot = rec[j].parse().map_err(|_| {
                    Error::InvalidInput(format!("row {}: bad value {:?}", i + 1, &rec[j]))
                })?;
            }
            let label: u8 = rec[FEATURE_DIM]
                .parse()
                .map_err(|_| Error::InvalidInput(format!("row {}: bad label", i + 1)))?;
            rows.push(FeatureRow {
                features: FeatureVector(f),
                label: PeopleCount::new(label)?,
                environment: rec[FEATURE_DIM + 1].parse()?,
                split: rec[FEATURE_DIM + 2].parse()?,
            });
        }
        Ok(Self { rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_csv_bytes(&fs::read(path).map_err(|e| Error::io(path, e))?)
    }
}
