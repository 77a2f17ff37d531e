//! Learned regressors over 18-dim feature vectors, their grid searches,
//! versioned model files and the rounding of continuous counts to classes.

pub mod forest;
pub mod knn;
pub mod standardize;
pub mod svr;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::MAX_PEOPLE;
use crate::error::{Error, Result};
use crate::features::FEATURE_DIM;

pub use forest::{RfConfig, RfModel, TreeNode};
pub use knn::{DistanceMetric, KnnModel};
pub use standardize::Standardizer;
pub use svr::{Kernel, KernelKind, SvrModel, SvrParams};

pub const MODEL_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelFamily {
    Knn,
    Rf,
    Svm,
}

impl ModelFamily {
    pub const ALL: [ModelFamily; 3] = [ModelFamily::Knn, ModelFamily::Rf, ModelFamily::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::Knn => "knn",
            ModelFamily::Rf => "rf",
            ModelFamily::Svm => "svm",
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(ModelFamily::Knn),
            "rf" => Ok(ModelFamily::Rf),
            "svm" => Ok(ModelFamily::Svm),
            other => Err(Error::InvalidInput(format!("unknown model family {other:?}"))),
        }
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelSpec {
    Knn { k: usize, metric: DistanceMetric },
    Rf { n_estimators: usize, max_depth: Option<usize> },
    Svm { kernel: KernelKind },
}

impl ModelSpec {
    pub fn family(&self) -> ModelFamily {
        match self {
            ModelSpec::Knn { .. } => ModelFamily::Knn,
            ModelSpec::Rf { .. } => ModelFamily::Rf,
            ModelSpec::Svm { .. } => ModelFamily::Svm,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Knn { k, metric } => write!(f, "knn(k={k}, metric={metric:?})"),
            ModelSpec::Rf {
                n_estimators,
                max_depth,
            } => match max_depth {
                Some(d) => write!(f, "rf(n={n_estimators}, depth={d})"),
                None => write!(f, "rf(n={n_estimators}, depth=none)"),
            },
            ModelSpec::Svm { kernel } => write!(f, "svm(kernel={kernel:?})"),
        }
    }
}

/// Declared search grid in evaluation order.
pub fn family_grid(family: ModelFamily) -> Vec<ModelSpec> {
    match family {
        ModelFamily::Knn => DistanceMetric::ALL
            .iter()
            .flat_map(|&metric| [3, 5].map(|k| ModelSpec::Knn { k, metric }))
            .collect(),
        ModelFamily::Rf => [50, 100]
            .iter()
            .flat_map(|&n_estimators| {
                [Some(20), None].map(|max_depth| ModelSpec::Rf {
                    n_estimators,
                    max_depth,
                })
            })
            .collect(),
        ModelFamily::Svm => vec![
            ModelSpec::Svm {
                kernel: KernelKind::Linear,
            },
            ModelSpec::Svm {
                kernel: KernelKind::Rbf,
            },
        ],
    }
}

/// Fitting knobs shared by every family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineSettings {
    pub seed: u64,
    /// z-score features for KNN (euclidean, manhattan) and SVM.
    pub standardize: bool,
    pub rf_max_features: Option<usize>,
    pub rf_min_leaf: usize,
    pub svr: SvrParams,
}

impl Default for BaselineSettings {
    fn default() -> Self {
        Self {
            seed: 0,
            standardize: true,
            rf_max_features: None,
            rf_min_leaf: 1,
            svr: SvrParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Regressor {
    Knn(KnnModel),
    Rf(RfModel),
    Svm(SvrModel),
}

impl Regressor {
    pub fn family(&self) -> ModelFamily {
        match self {
            Regressor::Knn(_) => ModelFamily::Knn,
            Regressor::Rf(_) => ModelFamily::Rf,
            Regressor::Svm(_) => ModelFamily::Svm,
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Regressor::Knn(m) => m.predict(x),
            Regressor::Rf(m) => m.predict(x),
            Regressor::Svm(m) => m.predict(x),
        }
    }

    pub fn predict_many(&self, x: &[Vec<f64>]) -> Vec<f64> {
        x.par_iter().map(|r| self.predict(r)).collect()
    }
}

pub fn fit_spec(
    spec: &ModelSpec,
    x: &[Vec<f64>],
    y: &[f64],
    settings: &BaselineSettings,
) -> Result<Regressor> {
    Ok(match *spec {
        ModelSpec::Knn { k, metric } => {
            Regressor::Knn(KnnModel::fit(x, y, k, metric, settings.standardize)?)
        }
        ModelSpec::Rf {
            n_estimators,
            max_depth,
        } => Regressor::Rf(RfModel::fit(
            x,
            y,
            &RfConfig {
                n_estimators,
                max_depth,
                max_features: settings.rf_max_features,
                min_leaf: settings.rf_min_leaf,
                bootstrap: true,
                seed: settings.seed,
            },
        )?),
        ModelSpec::Svm { kernel } => Regressor::Svm(SvrModel::fit(
            x,
            y,
            kernel,
            &settings.svr,
            settings.standardize,
        )?),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub spec: ModelSpec,
    pub val_mae: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub family: ModelFamily,
    pub candidates: Vec<CandidateScore>,
    pub best: usize,
}

impl GridReport {
    pub fn best_spec(&self) -> ModelSpec {
        self.candidates[self.best].spec
    }
}

/// Fits every grid point on `train`, scores validation MAE and returns the
/// argmin (first wins on ties) fitted on `train`.
pub fn grid_search_model(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    val_x: &[Vec<f64>],
    val_y: &[f64],
    family: ModelFamily,
    settings: &BaselineSettings,
) -> Result<(Regressor, GridReport)> {
    grid_search_specs(train_x, train_y, val_x, val_y, &family_grid(family), settings)
}

pub fn grid_search_specs(
    train_x: &[Vec<f64>],
    train_y: &[f64],
    val_x: &[Vec<f64>],
    val_y: &[f64],
    grid: &[ModelSpec],
    settings: &BaselineSettings,
) -> Result<(Regressor, GridReport)> {
    let family = grid
        .first()
        .ok_or_else(|| Error::InvalidConfig("empty model grid".into()))?
        .family();
    if grid.iter().any(|s| s.family() != family) {
        return Err(Error::InvalidConfig("grid mixes model families".into()));
    }
    if val_x.is_empty() || val_x.len() != val_y.len() {
        return Err(Error::InvalidInput("validation split is empty or ragged".into()));
    }
    let fitted: Vec<Result<(Regressor, f64)>> = grid
        .par_iter()
        .map(|spec| {
            let model = fit_spec(spec, train_x, train_y, settings)?;
            let preds = model.predict_many(val_x);
            let err = crate::metrics::mae(&preds, val_y)?;
            Ok((model, err))
        })
        .collect();
    let mut candidates = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None;
    let mut models = Vec::with_capacity(grid.len());
    for (i, (spec, r)) in grid.iter().zip(fitted).enumerate() {
        match r {
            Ok((m, err)) => {
                if best.is_none_or(|(_, b)| err < b) {
                    best = Some((i, err));
                }
                candidates.push(CandidateScore {
                    spec: *spec,
                    val_mae: Some(err),
                    error: None,
                });
                models.push(Some(m));
            }
            Err(e) => {
                log::warn!("{spec} failed: {e}");
                candidates.push(CandidateScore {
                    spec: *spec,
                    val_mae: None,
                    error: Some(e.full_message()),
                });
                models.push(None);
            }
        }
    }
    let (best, _) = best.ok_or_else(|| {
        Error::InvalidInput(format!("every {family} candidate failed to fit"))
    })?;
    let model = models[best].take().expect("best candidate was fitted");
    Ok((
        model,
        GridReport {
            family,
            candidates,
            best,
        },
    ))
}

/// On-disk model record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub version: u32,
    pub spec: ModelSpec,
    pub n_features: usize,
    pub model: Regressor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<GridReport>,
}

impl ModelFile {
    pub fn new(spec: ModelSpec, model: Regressor, selection: Option<GridReport>) -> Self {
        Self {
            version: MODEL_FILE_VERSION,
            spec,
            n_features: FEATURE_DIM,
            model,
            selection,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::json("model file", e))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::json("model file", e))?;
        if m.version != MODEL_FILE_VERSION {
            return Err(Error::InvalidInput(format!(
                "model file version {} is not supported",
                m.version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

pub fn rows_from_matrix(m: &[[f64; FEATURE_DIM]]) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.to_vec()).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundingMode {
    #[default]
    HalfUp,
    /// Round to one decimal first, then to the integer: 1.45 -> 1.5 -> 2.
    TwoStage,
}

/// Half-up rounding, then clamp to 0..=3. NaN maps to 0.
pub fn round_and_clamp(pred: f64) -> u8 {
    let r = (pred + 0.5).floor();
    if r.is_nan() {
        return 0;
    }
    r.clamp(0.0, f64::from(MAX_PEOPLE)) as u8
}

pub fn round_two_stage(pred: f64) -> u8 {
    if pred.is_nan() {
        return 0;
    }
    // nudge absorbs binary representation error such as 1.45 * 10 = 14.4999...
    let tenths = (pred * 10.0 + 0.5 + 1e-9).floor();
    round_and_clamp(tenths / 10.0)
}

pub fn round_with(mode: RoundingMode, pred: f64) -> u8 {
    match mode {
        RoundingMode::HalfUp => round_and_clamp(pred),
        RoundingMode::TwoStage => round_two_stage(pred),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rounding_examples() {
        assert_eq!(round_and_clamp(1.5), 2);
        assert_eq!(round_and_clamp(-0.2), 0);
        assert_eq!(round_and_clamp(3.4), 3);
        assert_eq!(round_and_clamp(0.49), 0);
        assert_eq!(round_and_clamp(f64::NAN), 0);
        assert_eq!(round_and_clamp(1.45), 1);
        assert_eq!(round_two_stage(1.45), 2);
        assert_eq!(round_two_stage(1.44), 1);
        assert_eq!(round_two_stage(2.5), 3);
    }

    #[test]
    fn grid_shapes() {
        assert_eq!(family_grid(ModelFamily::Knn).len(), 6);
        assert_eq!(family_grid(ModelFamily::Rf).len(), 4);
        assert_eq!(family_grid(ModelFamily::Svm).len(), 2);
        assert_eq!(
            family_grid(ModelFamily::Knn)[1],
            ModelSpec::Knn { k: 5, metric: DistanceMetric::Euclidean }
        );
        assert_eq!(
            family_grid(ModelFamily::Rf)[1],
            ModelSpec::Rf { n_estimators: 50, max_depth: None }
        );
    }

    fn toy() -> (Vec<Vec<f64>>, Vec<f64>) {
        let x: Vec<Vec<f64>> = (0..24).map(|i| vec![(i % 4) as f64 + 0.01 * i as f64, 1.0]).collect();
        let y = (0..24).map(|i| (i % 4) as f64).collect();
        (x, y)
    }

    #[test]
    fn single_candidate_grid() {
        let (x, y) = toy();
        let spec = ModelSpec::Knn { k: 3, metric: DistanceMetric::Manhattan };
        let (_, rep) =
            grid_search_specs(&x, &y, &x, &y, &[spec], &BaselineSettings::default()).unwrap();
        assert_eq!(rep.best, 0);
        assert_eq!(rep.best_spec(), spec);
    }

    #[test]
    fn ties_take_first() {
        let (x, y) = toy();
        let grid = family_grid(ModelFamily::Knn);
        let (_, rep) = grid_search_specs(&x, &y, &x, &y, &grid, &BaselineSettings::default()).unwrap();
        let min = rep
            .candidates
            .iter()
            .filter_map(|c| c.val_mae)
            .fold(f64::INFINITY, f64::min);
        let first = rep.candidates.iter().position(|c| c.val_mae == Some(min)).unwrap();
        assert_eq!(rep.best, first);
    }

    #[test]
    fn model_file_round_trip() {
        let (x, y) = toy();
        let s = BaselineSettings::default();
        for spec in [
            ModelSpec::Knn { k: 3, metric: DistanceMetric::Mahalanobis },
            ModelSpec::Rf { n_estimators: 3, max_depth: Some(4) },
            ModelSpec::Svm { kernel: KernelKind::Rbf },
        ] {
            let m = fit_spec(&spec, &x, &y, &s).unwrap();
            let f = ModelFile::new(spec, m, None);
            let back = ModelFile::from_json(&f.to_json().unwrap()).unwrap();
            assert_eq!(back, f);
            assert_eq!(back.to_json().unwrap(), f.to_json().unwrap());
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let (x, y) = toy();
        let spec = ModelSpec::Knn { k: 3, metric: DistanceMetric::Euclidean };
        let m = fit_spec(&spec, &x, &y, &BaselineSettings::default()).unwrap();
        let json = ModelFile::new(spec, m, None)
            .to_json()
            .unwrap()
            .replacen("\"version\": 1", "\"version\": 9", 1);
        assert!(ModelFile::from_json(&json).is_err());
    }

    proptest! {
        #[test]
        fn rounding_monotone(a in -5.0f64..8.0, b in -5.0f64..8.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(round_and_clamp(lo) <= round_and_clamp(hi));
            prop_assert!(round_two_stage(lo) <= round_two_stage(hi));
        }
    }
}
