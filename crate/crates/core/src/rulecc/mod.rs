//! Rule-based people counter built on connected components of the
//! temporal-variance field.
//!
//! For each sliding window the per-pixel temporal standard deviation is
//! smoothed, thresholded at three levels (`tau`, `0.8 tau`, `0.6 tau`),
//! cleaned with a 4-neighbor opening (erode once, dilate twice) and
//! labeled with 4-connectivity. Components passing the area and
//! compactness limits are people; the window count is the maximum over
//! threshold levels. Window counts are then merged across window sizes by
//! a non-zero-priority mode vote.

mod components;
mod mask;
mod smooth;

pub use components::{
    component_metrics, label_components_4, valid_components, Component, ComponentLimits,
    ComponentSet,
};
pub use mask::{binarize, dilate4, erode4, BinaryMask};
pub use smooth::{gaussian_kernel, gaussian_smooth};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cube::RadarCube;
use crate::error::{Error, Result};
use crate::preprocess::{temporal_std_map, StdMap};

/// Window sizes (frames) of the multi-window ensemble.
pub const DEFAULT_WINDOW_SIZES: [usize; 6] = [10, 15, 20, 25, 30, 60];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleCCConfig {
    /// Primary threshold on the smoothed std map.
    pub tau: f64,
    /// Multipliers of `tau`, descending in (0, 1].
    pub threshold_factors: Vec<f64>,
    pub gaussian_sigma: f64,
    pub erosion_iters: usize,
    pub dilation_iters: usize,
    pub area_min: usize,
    pub area_max: usize,
    pub compactness_min: f64,
    pub window_sizes: Vec<usize>,
    /// Share of non-zero window counts that must be exceeded for the
    /// non-zero mode to win.
    pub nonzero_ratio: f64,
}

impl Default for RuleCCConfig {
    fn default() -> Self {
        Self {
            tau: 0.025,
            threshold_factors: vec![1.0, 0.8, 0.6],
            gaussian_sigma: 0.8,
            erosion_iters: 1,
            dilation_iters: 2,
            area_min: 2,
            area_max: 50,
            compactness_min: 0.1,
            window_sizes: DEFAULT_WINDOW_SIZES.to_vec(),
            nonzero_ratio: 0.30,
        }
    }
}

impl RuleCCConfig {
    /// Default config evaluated with a single window size and primary threshold.
    pub fn single_window(window: usize, tau: f64) -> Self {
        Self {
            tau,
            window_sizes: vec![window],
            ..Self::default()
        }
    }

    pub fn limits(&self) -> ComponentLimits {
        ComponentLimits {
            area_min: self.area_min,
            area_max: self.area_max,
            compactness_min: self.compactness_min,
        }
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.threshold_factors.iter().map(|f| f * self.tau).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be > 0, got {}", self.tau));
        }
        if self.threshold_factors.is_empty()
            || self
                .threshold_factors
                .iter()
                .any(|f| !(*f > 0.0 && *f <= 1.0))
            || self.threshold_factors.windows(2).any(|w| w[0] <= w[1])
        {
            return bad(format!(
                "threshold_factors must be strictly descending in (0, 1], got {:?}",
                self.threshold_factors
            ));
        }
        if !(self.gaussian_sigma > 0.0 && self.gaussian_sigma.is_finite()) {
            return bad(format!("gaussian_sigma must be > 0, got {}", self.gaussian_sigma));
        }
        if self.area_min > self.area_max {
            return bad(format!(
                "area_min {} exceeds area_max {}",
                self.area_min, self.area_max
            ));
        }
        if !(0.0..=1.0).contains(&self.compactness_min) {
            return bad(format!(
                "compactness_min must be in [0, 1], got {}",
                self.compactness_min
            ));
        }
        if !(self.nonzero_ratio > 0.0 && self.nonzero_ratio < 1.0) {
            return bad(format!(
                "nonzero_ratio must be in (0, 1), got {}",
                self.nonzero_ratio
            ));
        }
        if self.window_sizes.is_empty() || self.window_sizes.iter().any(|&w| w < 2) {
            return bad(format!(
                "window_sizes must be non-empty with every size >= 2, got {:?}",
                self.window_sizes
            ));
        }
        Ok(())
    }
}

/// Count for one window, with the per-threshold breakdown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowPrediction {
    pub start: usize,
    pub size: usize,
    pub threshold_counts: Vec<usize>,
    pub count: usize,
}

/// Sequence-level result with every window that contributed to the vote.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequencePrediction {
    pub count: usize,
    pub windows: Vec<WindowPrediction>,
}

/// Smoothed temporal-std map of a window, the input to thresholding.
pub fn window_field(window: &RadarCube, cfg: &RuleCCConfig) -> Result<StdMap> {
    gaussian_smooth(&temporal_std_map(window)?, cfg.gaussian_sigma)
}

/// Valid components of a smoothed field at one threshold.
pub fn components_at(field: &StdMap, threshold: f64, cfg: &RuleCCConfig) -> ComponentSet {
    let mask = binarize(field, threshold);
    let opened = dilate4(&erode4(&mask, cfg.erosion_iters), cfg.dilation_iters);
    valid_components(&label_components_4(&opened), &cfg.limits())
}

/// Per-threshold valid-component counts of a smoothed field.
pub fn threshold_counts(field: &StdMap, cfg: &RuleCCConfig) -> Vec<usize> {
    cfg.thresholds()
        .into_iter()
        .map(|t| components_at(field, t, cfg).len())
        .collect()
}

/// Max over threshold levels; 0 when nothing survives.
pub fn count_field(field: &StdMap, cfg: &RuleCCConfig) -> usize {
    threshold_counts(field, cfg).into_iter().max().unwrap_or(0)
}

/// People count of a single window.
pub fn count_window(window: &RadarCube, cfg: &RuleCCConfig) -> Result<usize> {
    Ok(explain_window(window, 0, cfg)?.count)
}

fn explain_window(window: &RadarCube, start: usize, cfg: &RuleCCConfig) -> Result<WindowPrediction> {
    let field = window_field(window, cfg)?;
    let threshold_counts = threshold_counts(&field, cfg);
    let count = threshold_counts.iter().copied().max().unwrap_or(0);
    Ok(WindowPrediction {
        start,
        size: window.frames(),
        threshold_counts,
        count,
    })
}

/// Start frames of a sliding window of `size` over `frames` frames, with
/// step `max(1, floor(size / 4))`. Empty when the window does not fit.
pub fn window_starts(frames: usize, size: usize) -> Vec<usize> {
    if size == 0 || size > frames {
        return Vec::new();
    }
    let step = (size / 4).max(1);
    (0..=frames - size).step_by(step).collect()
}

/// Most frequent value; frequency ties go to the larger value. `None` on empty input.
pub fn mode_prefer_larger(values: impl IntoIterator<Item = usize>) -> Option<usize> {
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for v in values {
        *freq.entry(v).or_default() += 1;
    }
    // BTreeMap iterates ascending, so `>=` lets later (larger) values win ties
    let mut best: Option<(usize, usize)> = None;
    for (v, n) in freq {
        if best.is_none_or(|(_, bn)| n >= bn) {
            best = Some((v, n));
        }
    }
    best.map(|(v, _)| v)
}

/// Temporal integration of window counts.
///
/// If strictly more than `nonzero_ratio` of the windows are non-zero, the
/// mode of the non-zero counts wins; otherwise the mode of all counts.
pub fn aggregate_window_counts(counts: &[usize], nonzero_ratio: f64) -> usize {
    if counts.is_empty() {
        return 0;
    }
    let nonzero = counts.iter().filter(|&&c| c > 0).count();
    if nonzero as f64 / counts.len() as f64 > nonzero_ratio {
        mode_prefer_larger(counts.iter().copied().filter(|&c| c > 0)).unwrap_or(0)
    } else {
        mode_prefer_larger(counts.iter().copied()).unwrap_or(0)
    }
}

/// Sequence count with the full per-window record.
pub fn explain_sequence(cube: &RadarCube, cfg: &RuleCCConfig) -> Result<SequencePrediction> {
    cfg.validate()?;
    let shortest = cfg.window_sizes.iter().copied().min().unwrap_or(0);
    if cube.frames() < shortest {
        return Err(Error::NotEnoughFrames {
            needed: shortest,
            got: cube.frames(),
        });
    }
    let mut windows = Vec::new();
    for &size in &cfg.window_sizes {
        for start in window_starts(cube.frames(), size) {
            windows.push(explain_window(&cube.slice_window(start, size)?, start, cfg)?);
        }
    }
    let counts: Vec<usize> = windows.iter().map(|w| w.count).collect();
    Ok(SequencePrediction {
        count: aggregate_window_counts(&counts, cfg.nonzero_ratio),
        windows,
    })
}

/// People count of a whole cube via the multi-window ensemble.
pub fn predict_sequence(cube: &RadarCube, cfg: &RuleCCConfig) -> Result<usize> {
    Ok(explain_sequence(cube, cfg)?.count)
}
