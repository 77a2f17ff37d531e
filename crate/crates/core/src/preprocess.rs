//! Cube conditioning: percentile clipping, min-max normalization and
//! sigmoid weighting by per-pixel temporal standard deviation.
//!
//! The weight of a pixel is `w = 1 / (1 + exp(-(sigma - tau_w) / s))`, where
//! `sigma` is the temporal standard deviation of that pixel. Pixels that
//! fluctuate (people breathing or moving) keep their amplitude while static
//! reflections are attenuated.

use std::fmt;
use std::ops::Deref;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::cube::{FrameMap, RadarCube};
use crate::error::{Error, Result};
use crate::stats::{mean, percentile_sorted, population_std, sorted_copy};

/// Lower bound of the default data-adaptive sigmoid scale.
pub const MIN_SIGMOID_SCALE: f64 = 1e-6;

/// Largest weight emitted: the largest f32 below 1, so that weighted
/// amplitudes stay strictly below 1 after narrowing to f32.
pub const MAX_WEIGHT: f64 = 1.0 - 1.0 / 16_777_216.0;
/// Smallest weight emitted.
pub const MIN_WEIGHT: f64 = f32::MIN_POSITIVE as f64;

/// Per-pixel temporal standard deviations (all entries >= 0).
#[derive(Debug, Clone, PartialEq)]
pub struct StdMap(FrameMap);

impl StdMap {
    pub fn new(map: FrameMap) -> Result<Self> {
        if let Some((i, &v)) = map.data().iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativeValue { index: i, value: v });
        }
        Ok(Self(map))
    }

    pub fn into_inner(self) -> FrameMap {
        self.0
    }
}

impl Deref for StdMap {
    type Target = FrameMap;
    fn deref(&self) -> &FrameMap {
        &self.0
    }
}

/// Per-pixel weights in (0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap(FrameMap);

impl WeightMap {
    /// Wraps arbitrary weights; used for identity and constant weightings.
    pub fn from_map(map: FrameMap) -> Result<Self> {
        if let Some(i) = map.data().iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidInput(format!(
                "weight {} at index {i} outside [0, 1]",
                map.data()[i]
            )));
        }
        Ok(Self(map))
    }
}

impl Deref for WeightMap {
    type Target = FrameMap;
    fn deref(&self) -> &FrameMap {
        &self.0
    }
}

/// Center and scale of the weighting sigmoid, both in std units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidWeightConfig {
    pub tau_w: f64,
    pub s: f64,
}

impl SigmoidWeightConfig {
    pub fn new(tau_w: f64, s: f64) -> Result<Self> {
        let c = Self { tau_w, s };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau_w.is_finite() || !self.s.is_finite() || self.s <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "sigmoid needs finite tau_w and s > 0, got tau_w={}, s={}",
                self.tau_w, self.s
            )));
        }
        Ok(())
    }

    /// Data-adaptive default: center at the mean of the std map, scale at
    /// the std of its entries (floored).
    pub fn auto(std: &StdMap) -> Self {
        Self {
            tau_w: mean(std.data()),
            s: population_std(std.data()).max(MIN_SIGMOID_SCALE),
        }
    }
}

/// A sigmoid parameter that is either fixed or derived from the data.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AutoOr {
    #[default]
    Auto,
    Value(f64),
}

impl AutoOr {
    pub fn resolve(self, auto: f64) -> f64 {
        match self {
            AutoOr::Auto => auto,
            AutoOr::Value(v) => v,
        }
    }
}

impl Serialize for AutoOr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AutoOr::Auto => s.serialize_str("auto"),
            AutoOr::Value(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for AutoOr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = AutoOr;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or the string \"auto\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<AutoOr, E> {
                if v == "auto" {
                    Ok(AutoOr::Auto)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<AutoOr, E> {
                Ok(AutoOr::Value(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<AutoOr, E> {
                Ok(AutoOr::Value(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<AutoOr, E> {
                Ok(AutoOr::Value(v as f64))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SigmoidSetting {
    #[serde(default)]
    pub tau_w: AutoOr,
    #[serde(default)]
    pub s: AutoOr,
}

impl SigmoidSetting {
    pub fn resolve(&self, std: &StdMap) -> Result<SigmoidWeightConfig> {
        let auto = SigmoidWeightConfig::auto(std);
        SigmoidWeightConfig::new(self.tau_w.resolve(auto.tau_w), self.s.resolve(auto.s))
    }
}

/// Pipeline configuration as read from JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    #[serde(default = "default_lo_pct")]
    pub lo_pct: f64,
    #[serde(default = "default_hi_pct")]
    pub hi_pct: f64,
    #[serde(default)]
    pub sigmoid: SigmoidSetting,
}

fn default_lo_pct() -> f64 {
    0.1
}

fn default_hi_pct() -> f64 {
    99.9
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            lo_pct: default_lo_pct(),
            hi_pct: default_hi_pct(),
            sigmoid: SigmoidSetting::default(),
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        check_percentiles(self.lo_pct, self.hi_pct)?;
        for (name, v) in [("tau_w", self.sigmoid.tau_w), ("s", self.sigmoid.s)] {
            if let AutoOr::Value(x) = v {
                if !x.is_finite() || (name == "s" && x <= 0.0) {
                    return Err(Error::InvalidConfig(format!("sigmoid {name}={x} invalid")));
                }
            }
        }
        Ok(())
    }
}

fn check_percentiles(lo: f64, hi: f64) -> Result<()> {
    if !(0.0..=100.0).contains(&lo) || !(0.0..=100.0).contains(&hi) || lo >= hi {
        return Err(Error::InvalidConfig(format!(
            "percentiles must satisfy 0 <= lo < hi <= 100, got lo={lo}, hi={hi}"
        )));
    }
    Ok(())
}

/// Interpolated `lo_pct`/`hi_pct` percentiles of all values in the cube.
pub fn percentile_bounds(cube: &RadarCube, lo_pct: f64, hi_pct: f64) -> Result<(f64, f64)> {
    check_percentiles(lo_pct, hi_pct)?;
    if cube.data().is_empty() {
        return Err(Error::EmptyCube);
    }
    let sorted = sorted_copy(cube.data().iter().map(|&v| f64::from(v)));
    Ok((
        percentile_sorted(&sorted, lo_pct),
        percentile_sorted(&sorted, hi_pct),
    ))
}

/// Percentile bounds over the pooled values of many cubes.
pub fn dataset_percentile_bounds<'a>(
    cubes: impl IntoIterator<Item = &'a RadarCube>,
    lo_pct: f64,
    hi_pct: f64,
) -> Result<(f64, f64)> {
    check_percentiles(lo_pct, hi_pct)?;
    let sorted = sorted_copy(
        cubes
            .into_iter()
            .flat_map(|c| c.data().iter().map(|&v| f64::from(v))),
    );
    if sorted.is_empty() {
        return Err(Error::EmptyCube);
    }
    Ok((
        percentile_sorted(&sorted, lo_pct),
        percentile_sorted(&sorted, hi_pct),
    ))
}

/// Clamps every value into `[lo, hi]`.
pub fn clip_to_bounds(cube: &RadarCube, lo: f64, hi: f64) -> Result<RadarCube> {
    if cube.data().is_empty() {
        return Err(Error::EmptyCube);
    }
    cube.map(|v| {
        let x = f64::from(v);
        if x < lo {
            lo as f32
        } else if x > hi {
            hi as f32
        } else {
            v
        }
    })
}

/// Clips the cube to its own `lo_pct`/`hi_pct` percentiles.
pub fn clip_percentiles(cube: &RadarCube, lo_pct: f64, hi_pct: f64) -> Result<RadarCube> {
    let (lo, hi) = percentile_bounds(cube, lo_pct, hi_pct)?;
    clip_to_bounds(cube, lo, hi)
}

/// Affine map of the cube onto [0, 1]; a constant cube maps to zeros.
pub fn minmax_normalize(cube: &RadarCube) -> Result<RadarCube> {
    let (min, max) = cube
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(f64::from(v)), hi.max(f64::from(v)))
        });
    let span = max - min;
    if cube.data().is_empty() || span <= 0.0 {
        return cube.map(|_| 0.0);
    }
    cube.map(|v| ((f64::from(v) - min) / span) as f32)
}

/// Population standard deviation of each pixel over the frame axis.
pub fn temporal_std_map(cube: &RadarCube) -> Result<StdMap> {
    if cube.frames() < 2 {
        return Err(Error::NotEnoughFrames {
            needed: 2,
            got: cube.frames(),
        });
    }
    let n = cube.plane_len();
    let t = cube.frames() as f64;
    let mut sum = vec![0.0f64; n];
    for f in 0..cube.frames() {
        for (acc, &v) in sum.iter_mut().zip(cube.frame(f)) {
            *acc += f64::from(v);
        }
    }
    let means: Vec<f64> = sum.iter().map(|s| s / t).collect();
    let mut ss = vec![0.0f64; n];
    for f in 0..cube.frames() {
        for ((acc, &v), m) in ss.iter_mut().zip(cube.frame(f)).zip(&means) {
            let d = f64::from(v) - m;
            *acc += d * d;
        }
    }
    let data = ss.into_iter().map(|s| (s / t).sqrt()).collect();
    StdMap::new(FrameMap::new(cube.rows(), cube.cols(), data)?)
}

/// Sigmoid weight of a single std value, saturated to `[MIN_WEIGHT, MAX_WEIGHT]`.
pub fn sigmoid_weight(sigma: f64, cfg: &SigmoidWeightConfig) -> f64 {
    let w = 1.0 / (1.0 + (-(sigma - cfg.tau_w) / cfg.s).exp());
    w.clamp(MIN_WEIGHT, MAX_WEIGHT)
}

pub fn sigmoid_weight_map(std: &StdMap, cfg: &SigmoidWeightConfig) -> WeightMap {
    WeightMap(std.map(|s| sigmoid_weight(s, cfg)))
}

/// Multiplies every frame of the cube elementwise by the weight map.
pub fn apply_weights(cube: &RadarCube, w: &WeightMap) -> Result<RadarCube> {
    if w.shape() != (cube.rows(), cube.cols()) {
        return Err(Error::ShapeMismatch {
            expected: (cube.rows(), cube.cols()),
            got: w.shape(),
        });
    }
    let n = cube.plane_len();
    let weights = w.data();
    let data: Vec<f32> = cube
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| (f64::from(v) * weights[i % n]) as f32)
        .collect();
    RadarCube::new(cube.rows(), cube.cols(), cube.frames(), data)
}

/// Clip then normalize, without weighting.
pub fn clip_and_normalize(cube: &RadarCube, cfg: &PreprocessConfig) -> Result<RadarCube> {
    minmax_normalize(&clip_percentiles(cube, cfg.lo_pct, cfg.hi_pct)?)
}

/// Weights an already normalized cube by its temporal-std sigmoid.
pub fn weight_normalized(normalized: &RadarCube, setting: &SigmoidSetting) -> Result<RadarCube> {
    let std = temporal_std_map(normalized)?;
    let sig = setting.resolve(&std)?;
    apply_weights(normalized, &sigmoid_weight_map(&std, &sig))
}

/// Full conditioning: clip, normalize, temporal std, sigmoid weights, apply.
pub fn preprocess_pipeline(cube: &RadarCube, cfg: &PreprocessConfig) -> Result<RadarCube> {
    cfg.validate()?;
    weight_normalized(&clip_and_normalize(cube, cfg)?, &cfg.sigmoid)
}

/// As [`preprocess_pipeline`] but clipping to externally supplied bounds
/// (dataset-global percentiles).
pub fn preprocess_with_bounds(
    cube: &RadarCube,
    cfg: &PreprocessConfig,
    bounds: (f64, f64),
) -> Result<RadarCube> {
    cfg.validate()?;
    let normalized = minmax_normalize(&clip_to_bounds(cube, bounds.0, bounds.1)?)?;
    weight_normalized(&normalized, &cfg.sigmoid)
}

/// Cube stage handed to the rule-based counter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputStage {
    /// Clipped, normalized and sigmoid-weighted.
    #[default]
    Weighted,
    /// Clipped and normalized only.
    Normalized,
}

impl std::str::FromStr for InputStage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" => Ok(InputStage::Weighted),
            "normalized" => Ok(InputStage::Normalized),
            other => Err(Error::InvalidInput(format!("unknown input stage {other:?}"))),
        }
    }
}

/// Conditions a raw cube up to `stage`.
pub fn prepare(cube: &RadarCube, cfg: &PreprocessConfig, stage: InputStage) -> Result<RadarCube> {
    match stage {
        InputStage::Weighted => preprocess_pipeline(cube, cfg),
        InputStage::Normalized => {
            cfg.validate()?;
            clip_and_normalize(cube, cfg)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cube(seed: u64, rows: usize, cols: usize, frames: usize) -> RadarCube {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RadarCube::from_fn(rows, cols, frames, |_, _, _| rng.random_range(-3.0f32..7.0)).unwrap()
    }

    // Independent percentile oracle: numpy-style "linear" method written out
    // from the definition h = (n-1)p, x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
    fn oracle_percentile(values: &[f32], p: f64) -> f64 {
        let mut v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let h = (v.len() - 1) as f64 * p / 100.0;
        let k = h.floor() as usize;
        if k + 1 >= v.len() {
            return v[v.len() - 1];
        }
        v[k] + (h - k as f64) * (v[k + 1] - v[k])
    }

    #[test]
    fn constant_cube_unchanged_by_clip() {
        let c = RadarCube::from_fn(2, 3, 4, |_, _, _| 5.0).unwrap();
        assert_eq!(clip_percentiles(&c, 0.1, 99.9).unwrap(), c);
    }

    #[test]
    fn clip_ramp_against_oracle() {
        let c = RadarCube::from_fn(1, 1000, 1, |_, _, col| (col + 1) as f32).unwrap();
        let lo = oracle_percentile(c.data(), 0.1);
        let hi = oracle_percentile(c.data(), 99.9);
        // h = 0.999 and 998.001
        assert!((lo - 1.999).abs() < 1e-9);
        assert!((hi - 999.001).abs() < 1e-9);
        let out = clip_percentiles(&c, 0.1, 99.9).unwrap();
        assert_eq!(out.data()[0], lo as f32);
        assert_eq!(out.data()[999], hi as f32);
        for i in 1..999 {
            assert_eq!(out.data()[i], c.data()[i]);
        }
    }

    #[test]
    fn clip_spike() {
        let mut data = vec![0.5f32; 2000];
        for (i, v) in data.iter_mut().enumerate() {
            *v = (i % 17) as f32 * 0.01;
        }
        data[1234] = 1e9;
        let c = RadarCube::new(1, 2000, 1, data).unwrap();
        let hi = oracle_percentile(c.data(), 99.9);
        let out = clip_percentiles(&c, 0.1, 99.9).unwrap();
        assert_eq!(out.data()[1234], hi as f32);
        assert!(f64::from(out.data()[1234]) < 1.0);
    }

    #[test]
    fn clip_rejects_bad_percentiles_and_empty() {
        let c = RadarCube::zeros(1, 1, 1);
        assert!(clip_percentiles(&c, 50.0, 10.0).is_err());
        assert!(clip_percentiles(&RadarCube::zeros(0, 0, 0), 0.1, 99.9).is_err());
    }

    #[test]
    fn normalize_basic() {
        let c = RadarCube::new(1, 3, 1, vec![2.0, 4.0, 6.0]).unwrap();
        assert_eq!(minmax_normalize(&c).unwrap().data(), &[0.0, 0.5, 1.0]);
        let k = RadarCube::from_fn(2, 2, 2, |_, _, _| 3.0).unwrap();
        assert!(minmax_normalize(&k).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn std_map_cases() {
        let still = RadarCube::from_fn(12, 91, 10, |_, r, c| (r * c) as f32).unwrap();
        assert!(temporal_std_map(&still).unwrap().data().iter().all(|&v| v == 0.0));
        let alt = RadarCube::from_fn(12, 91, 60, |f, r, c| {
            if r == 3 && c == 40 {
                (f % 2) as f32
            } else {
                0.0
            }
        })
        .unwrap();
        let s = temporal_std_map(&alt).unwrap();
        assert_eq!(s.get(3, 40), 0.5);
        assert_eq!(s.get(3, 41), 0.0);
        assert!(matches!(
            temporal_std_map(&RadarCube::zeros(12, 91, 1)),
            Err(Error::NotEnoughFrames { .. })
        ));
    }

    #[test]
    fn std_map_matches_naive_oracle() {
        let c = random_cube(3, 12, 91, 37);
        let s = temporal_std_map(&c).unwrap();
        for r in 0..12 {
            for col in 0..91 {
                let xs: Vec<f64> = (0..37).map(|f| c.get(f, r, col) as f64).collect();
                let m = xs.iter().sum::<f64>() / 37.0;
                let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 37.0;
                let want = var.sqrt();
                assert!((s.get(r, col) - want).abs() <= 1e-6 * want.max(1e-12));
            }
        }
    }

    #[test]
    fn sigmoid_values() {
        let cfg = SigmoidWeightConfig::new(0.03, 0.01).unwrap();
        assert_eq!(sigmoid_weight(0.03, &cfg), 0.5);
        let want = 1.0 / (1.0 + (-1.0f64).exp());
        assert!((sigmoid_weight(0.04, &cfg) - want).abs() < 1e-12);
        assert!((want - 0.7311).abs() < 1e-4);
        assert!(sigmoid_weight(1e6, &cfg) > 1.0 - 1e-6);
        assert!(sigmoid_weight(1e6, &cfg) < 1.0);
        let steep = SigmoidWeightConfig::new(1.0, 0.001).unwrap();
        assert!(sigmoid_weight(0.0, &steep) < 1e-30);
        assert!(sigmoid_weight(0.0, &steep) > 0.0);
        assert!(SigmoidWeightConfig::new(0.0, 0.0).is_err());
        assert!(SigmoidWeightConfig::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn apply_weights_cases() {
        let c = random_cube(4, 3, 5, 4);
        let ones = WeightMap::from_map(FrameMap::filled(3, 5, 1.0)).unwrap();
        assert_eq!(apply_weights(&c, &ones).unwrap(), c);
        let half = WeightMap::from_map(FrameMap::filled(3, 5, 0.5)).unwrap();
        let h = apply_weights(&c, &half).unwrap();
        for (a, b) in c.data().iter().zip(h.data()) {
            assert_eq!(*a * 0.5, *b);
        }
        let w = WeightMap::from_map(FrameMap::from_fn(3, 5, |r, col| (r * 5 + col) as f64 / 20.0))
            .unwrap();
        let out = apply_weights(&c, &w).unwrap();
        for f in 0..4 {
            for r in 0..3 {
                for col in 0..5 {
                    let want = (c.get(f, r, col) as f64 * w.get(r, col)) as f32;
                    assert_eq!(out.get(f, r, col), want);
                }
            }
        }
        let wrong = WeightMap::from_map(FrameMap::filled(2, 5, 1.0)).unwrap();
        assert!(matches!(apply_weights(&c, &wrong), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn pipeline_matches_stage_by_stage() {
        let c = random_cube(9, 12, 91, 20);
        let cfg = PreprocessConfig::default();
        let out = preprocess_pipeline(&c, &cfg).unwrap();
        let clipped = clip_percentiles(&c, 0.1, 99.9).unwrap();
        let norm = minmax_normalize(&clipped).unwrap();
        let std = temporal_std_map(&norm).unwrap();
        let sig = SigmoidWeightConfig::auto(&std);
        let want = apply_weights(&norm, &sigmoid_weight_map(&std, &sig)).unwrap();
        assert_eq!(out, want);
        assert!(out.data().iter().all(|&v| (0.0..1.0).contains(&v)));
        // determinism down to the bit
        let again = preprocess_pipeline(&c, &cfg).unwrap();
        assert!(out.data().iter().zip(again.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn config_json() {
        let cfg: PreprocessConfig = serde_json::from_str(
            r#"{"lo_pct": 1, "hi_pct": 99, "sigmoid": {"tau_w": "auto", "s": 0.02}}"#,
        )
        .unwrap();
        assert_eq!(cfg.lo_pct, 1.0);
        assert_eq!(cfg.sigmoid.tau_w, AutoOr::Auto);
        assert_eq!(cfg.sigmoid.s, AutoOr::Value(0.02));
        let back: PreprocessConfig =
            serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<PreprocessConfig>(r#"{"sigmoid": {"s": "nope"}}"#).is_err());
        let bad = PreprocessConfig {
            sigmoid: SigmoidSetting {
                tau_w: AutoOr::Auto,
                s: AutoOr::Value(-1.0),
            },
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn clip_with_fixed_bounds_is_idempotent(seed in 0u64..1000, lo in 0.0f64..10.0, width in 1.0f64..80.0) {
            let c = random_cube(seed, 3, 7, 5);
            let (a, b) = percentile_bounds(&c, lo, lo + width).unwrap();
            let once = clip_to_bounds(&c, a, b).unwrap();
            prop_assert_eq!(clip_to_bounds(&once, a, b).unwrap(), once.clone());
            for &v in once.data() {
                prop_assert!(f64::from(v) >= a as f32 as f64 - 1e-6 && f64::from(v) <= b as f32 as f64 + 1e-6);
            }
        }

        #[test]
        fn normalize_bounded_and_order_preserving(seed in 0u64..1000) {
            let c = random_cube(seed, 2, 9, 3);
            let n = minmax_normalize(&c).unwrap();
            let min = n.data().iter().copied().fold(f32::INFINITY, f32::min);
            let max = n.data().iter().copied().fold(f32::NEG_INFINITY, f32::max);
            prop_assert_eq!(min, 0.0);
            prop_assert_eq!(max, 1.0);
            for i in 0..c.data().len() {
                for j in 0..c.data().len() {
                    if c.data()[i] < c.data()[j] {
                        prop_assert!(n.data()[i] <= n.data()[j]);
                    }
                }
            }
        }

        #[test]
        fn sigmoid_strictly_monotone(tau in -1.0f64..1.0, s in 0.01f64..1.0, z in -15.0f64..14.0, dz in 1e-2f64..1.0) {
            // outside |z| ~ 16 the weight saturates in f64
            let cfg = SigmoidWeightConfig::new(tau, s).unwrap();
            prop_assert!(sigmoid_weight(tau + z * s, &cfg) < sigmoid_weight(tau + (z + dz) * s, &cfg));
            prop_assert_eq!(sigmoid_weight(tau, &cfg), 0.5);
        }
    }
}
