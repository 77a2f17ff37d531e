//! End-to-end pipelines: loading manifests, conditioning cubes, fitting
//! every model family, the cross-environment protocol and report files.

pub mod fixtures;

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    fit_spec, grid_search_model, round_with, rows_from_matrix, BaselineSettings, GridReport,
    ModelFamily, ModelFile, ModelSpec, RoundingMode,
};
use crate::cube::RadarCube;
use crate::dataset::{DatasetManifest, ManifestEntry, PeopleCount, Split};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureRow, FeatureTable};
use crate::metrics::{CompositeWeights, EvalReport};
use crate::preprocess::{prepare, InputStage, PreprocessConfig};
use crate::rulecc::{predict_sequence, RuleCCConfig};
use crate::synth::SynthParams;
use crate::tuner::{count_class, tune, GridSpec, TuneResult};

pub use fixtures::{verify_fixtures, FixtureReport};

/// Every tunable knob, as read from a `--config` JSON file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub preprocess: PreprocessConfig,
    pub input_stage: InputStage,
    pub rulecc: RuleCCConfig,
    pub baselines: BaselineSettings,
    pub rounding: RoundingMode,
    pub weights: CompositeWeights,
    pub grid: GridSpec,
    pub synth: SynthParams,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&s).map_err(|e| Error::json(path.display().to_string(), e))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.rulecc.validate()?;
        self.weights.validate()?;
        self.grid.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "rulecc")]
    RuleCc,
    #[serde(rename = "knn")]
    Knn,
    #[serde(rename = "rf")]
    Rf,
    #[serde(rename = "svm")]
    Svm,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::RuleCc, ModelKind::Knn, ModelKind::Rf, ModelKind::Svm];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::RuleCc => "rulecc",
            ModelKind::Knn => "knn",
            ModelKind::Rf => "rf",
            ModelKind::Svm => "svm",
        }
    }

    pub fn family(self) -> Option<ModelFamily> {
        match self {
            ModelKind::RuleCc => None,
            ModelKind::Knn => Some(ModelFamily::Knn),
            ModelKind::Rf => Some(ModelFamily::Rf),
            ModelKind::Svm => Some(ModelFamily::Svm),
        }
    }
}

/// A manifest, optionally restricted to one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRef {
    pub name: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Split>,
}

impl ManifestRef {
    pub fn new(name: impl Into<String>, path: impl Into<PathBuf>, split: Option<Split>) -> Self {
        Self {
            name: name.into(),
            path: path.into(),
            split,
        }
    }

    pub fn load(&self) -> Result<DatasetManifest> {
        let m = DatasetManifest::load(&self.path)?;
        Ok(match self.split {
            Some(s) => m.filter_split(s),
            None => m,
        })
    }
}

fn default_models() -> Vec<ModelKind> {
    ModelKind::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub train: ManifestRef,
    pub val: ManifestRef,
    pub tests: Vec<ManifestRef>,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    /// Tune the rule-based counter on the train split and use the winning
    /// single-window config instead of `config.rulecc`.
    #[serde(default)]
    pub tune_rulecc: bool,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub config: RunConfig,
}

impl ExperimentPlan {
    /// Reads a plan; relative paths resolve against the plan's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut plan: Self =
            serde_json::from_str(&s).map_err(|e| Error::json(path.display().to_string(), e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut plan.train.path);
        fix(&mut plan.val.path);
        plan.tests.iter_mut().for_each(|t| fix(&mut t.path));
        fix(&mut plan.output_dir);
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tests.is_empty() {
            return Err(Error::InvalidConfig("plan needs at least one test manifest".into()));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidConfig("plan lists no models".into()));
        }
        let mut names = BTreeSet::new();
        for t in &self.tests {
            if !names.insert(t.name.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate test name {:?}", t.name)));
            }
        }
        self.config.validate()
    }
}

/// Conditioned cubes and features of one manifest.
#[derive(Debug, Clone)]
pub struct PreparedSet {
    pub name: String,
    pub entries: Vec<ManifestEntry>,
    pub ids: Vec<String>,
    pub labels: Vec<PeopleCount>,
    pub cubes: Vec<RadarCube>,
    pub features: Vec<Vec<f64>>,
}

impl PreparedSet {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn label_values(&self) -> Vec<f64> {
        self.labels.iter().map(|l| f64::from(l.get())).collect()
    }

    pub fn label_classes(&self) -> Vec<u8> {
        self.labels.iter().map(|l| l.get()).collect()
    }

    pub fn feature_table(&self) -> FeatureTable {
        FeatureTable {
            rows: self
                .entries
                .iter()
                .zip(&self.features)
                .map(|(e, f)| FeatureRow {
                    features: crate::features::FeatureVector(
                        f.as_slice().try_into().expect("18 features"),
                    ),
                    label: e.label,
                    environment: e.environment,
                    split: e.split,
                })
                .collect(),
        }
    }
}

/// Loads and conditions every cube of a manifest, then extracts features.
pub fn prepare_manifest(
    name: &str,
    manifest: &DatasetManifest,
    cfg: &PreprocessConfig,
    stage: InputStage,
) -> Result<PreparedSet> {
    let done: Vec<(RadarCube, Vec<f64>)> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let raw = manifest.load_sample(e)?.cube;
            let cube = prepare(&raw, cfg, stage)?;
            let f = extract_features(&cube)?.0.to_vec();
            Ok((cube, f))
        })
        .collect::<Result<_>>()?;
    let (cubes, features) = done.into_iter().unzip();
    Ok(PreparedSet {
        name: name.to_string(),
        ids: manifest.entries.iter().map(ManifestEntry::id).collect(),
        labels: manifest.entries.iter().map(|e| e.label).collect(),
        entries: manifest.entries.clone(),
        cubes,
        features,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub label: u8,
    pub continuous: f64,
    pub class: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub model: ModelKind,
    pub test: String,
    pub report: EvalReport,
    pub predictions: Vec<Prediction>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFailure {
    pub model: ModelKind,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropRow {
    pub model: ModelKind,
    pub reference: String,
    pub target: String,
    pub accuracy_reference: f64,
    pub accuracy_target: f64,
    /// Percentage points.
    pub drop_pts: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneSummary {
    pub data: String,
    pub best_window: usize,
    pub best_tau: f64,
    pub best_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub input_stage: InputStage,
    pub rulecc_tuning: String,
    pub rulecc_config: RuleCCConfig,
    pub tuning: Option<TuneSummary>,
    pub model_selection: Vec<SelectedModel>,
    pub results: Vec<ModelResult>,
    pub failures: Vec<FamilyFailure>,
    pub drops: Vec<DropRow>,
    pub trend_note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedModel {
    pub model: ModelKind,
    pub spec: ModelSpec,
    pub grid: GridReport,
}

impl ExperimentReport {
    pub fn result(&self, model: ModelKind, test: &str) -> Option<&ModelResult> {
        self.results.iter().find(|r| r.model == model && r.test == test)
    }
}

fn check_disjoint(sets: &[&PreparedSet]) -> Result<()> {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for s in sets {
        let mut own = BTreeSet::new();
        for id in &s.ids {
            if !own.insert(id.as_str()) {
                continue;
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "sample id {id:?} appears in more than one manifest"
                )));
            }
        }
    }
    Ok(())
}

fn fitting_entries_ok(set: &PreparedSet) -> Result<()> {
    if let Some(e) = set.entries.iter().find(|e| e.split == Split::Test) {
        return Err(Error::InvalidInput(format!(
            "{} contains {:?}, which is marked test; test data never enters fitting",
            set.name, e.path
        )));
    }
    if set.is_empty() {
        return Err(Error::InvalidInput(format!("{} is empty", set.name)));
    }
    Ok(())
}

fn evaluate(
    model: ModelKind,
    test: &PreparedSet,
    continuous: Vec<f64>,
    classes: Vec<u8>,
    weights: &CompositeWeights,
) -> Result<ModelResult> {
    let labels = test.label_classes();
    let report = EvalReport::new(&continuous, &classes, &labels, weights)?;
    let predictions = test
        .ids
        .iter()
        .zip(&labels)
        .zip(continuous.iter().zip(&classes))
        .map(|((id, &label), (&continuous, &class))| Prediction {
            id: id.clone(),
            label,
            continuous,
            class,
        })
        .collect();
    Ok(ModelResult {
        model,
        test: test.name.clone(),
        report,
        predictions,
    })
}

/// Rule-based counts of every cube; the raw count is the continuous output.
pub fn rulecc_predictions(cubes: &[RadarCube], cfg: &RuleCCConfig) -> Result<(Vec<f64>, Vec<u8>)> {
    let counts: Vec<usize> = cubes
        .par_iter()
        .map(|c| predict_sequence(c, cfg))
        .collect::<Result<_>>()?;
    Ok((
        counts.iter().map(|&c| c as f64).collect(),
        counts.into_iter().map(count_class).collect(),
    ))
}

/// Runs the plan and writes every artifact into `plan.output_dir`.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport> {
    plan.validate()?;
    let cfg = &plan.config;
    let load = |r: &ManifestRef| -> Result<PreparedSet> {
        prepare_manifest(&r.name, &r.load()?, &cfg.preprocess, cfg.input_stage)
    };
    let train = load(&plan.train)?;
    let val = load(&plan.val)?;
    let tests: Vec<PreparedSet> = plan.tests.iter().map(load).collect::<Result<_>>()?;
    let mut all: Vec<&PreparedSet> = vec![&train, &val];
    all.extend(tests.iter());
    check_disjoint(&all)?;
    fitting_entries_ok(&train)?;
    fitting_entries_ok(&val)?;

    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut selection = Vec::new();
    let mut tuning = None;
    let mut tuned: Option<TuneResult> = None;
    let mut rulecc_config = cfg.rulecc.clone();

    if plan.models.contains(&ModelKind::RuleCc) {
        if plan.tune_rulecc {
            let t = tune(&train.cubes, &train.labels, &cfg.grid, &cfg.rulecc, &cfg.weights)?;
            let best = t.best_row();
            tuning = Some(TuneSummary {
                data: train.name.clone(),
                best_window: best.window,
                best_tau: best.tau,
                best_score: t.best_score,
            });
            rulecc_config = t.best_config.clone();
            tuned = Some(t);
        }
        for test in &tests {
            let (cont, classes) = rulecc_predictions(&test.cubes, &rulecc_config)?;
            results.push(evaluate(ModelKind::RuleCc, test, cont, classes, &cfg.weights)?);
        }
    }

    let settings = BaselineSettings {
        seed: plan.seed,
        ..cfg.baselines.clone()
    };
    for kind in &plan.models {
        let Some(family) = kind.family() else { continue };
        let outcome = (|| -> Result<(SelectedModel, Vec<ModelResult>)> {
            let (_, grid) = grid_search_model(
                &train.features,
                &train.label_values(),
                &val.features,
                &val.label_values(),
                family,
                &settings,
            )?;
            let spec = grid.best_spec();
            // refit the winner on train + val
            let mut x = train.features.clone();
            x.extend(val.features.iter().cloned());
            let mut y = train.label_values();
            y.extend(val.label_values());
            let model = fit_spec(&spec, &x, &y, &settings)?;
            let mut out = Vec::new();
            for test in &tests {
                let cont = model.predict_many(&test.features);
                let classes = cont.iter().map(|&v| round_with(cfg.rounding, v)).collect();
                out.push(evaluate(*kind, test, cont, classes, &cfg.weights)?);
            }
            Ok((SelectedModel { model: *kind, spec, grid }, out))
        })();
        match outcome {
            Ok((sel, res)) => {
                selection.push(sel);
                results.extend(res);
            }
            Err(e) => {
                log::error!("{} failed: {e}", kind.as_str());
                failures.push(FamilyFailure {
                    model: *kind,
                    error: e.full_message(),
                });
            }
        }
    }

    let drops = drop_table(&results, &plan.tests, &plan.models);
    let trend_note = trend_note(&drops);
    let report = ExperimentReport {
        seed: plan.seed,
        input_stage: cfg.input_stage,
        rulecc_tuning: if plan.tune_rulecc {
            format!("tuned on {} only", train.name)
        } else {
            "not tuned; configured parameters".into()
        },
        rulecc_config,
        tuning,
        model_selection: selection,
        results,
        failures,
        drops,
        trend_note,
    };
    write_reports(&plan.output_dir, &report, tuned.as_ref())?;
    Ok(report)
}

/// Accuracy of the first test set minus each later one, per model.
pub fn drop_table(results: &[ModelResult], tests: &[ManifestRef], models: &[ModelKind]) -> Vec<DropRow> {
    let Some((reference, rest)) = tests.split_first() else {
        return Vec::new();
    };
    let find = |m: ModelKind, t: &str| results.iter().find(|r| r.model == m && r.test == t);
    let mut rows = Vec::new();
    for target in rest {
        for &m in models {
            if let (Some(a), Some(b)) = (find(m, &reference.name), find(m, &target.name)) {
                rows.push(DropRow {
                    model: m,
                    reference: reference.name.clone(),
                    target: target.name.clone(),
                    accuracy_reference: a.report.accuracy,
                    accuracy_target: b.report.accuracy,
                    drop_pts: 100.0 * (a.report.accuracy - b.report.accuracy),
                });
            }
        }
    }
    rows
}

/// States whether the learned models lose more accuracy than the rule-based counter.
pub fn trend_note(drops: &[DropRow]) -> String {
    let mut targets: Vec<&str> = drops.iter().map(|d| d.target.as_str()).collect();
    targets.dedup();
    let mut out = String::new();
    for t in targets {
        let rows: Vec<&DropRow> = drops.iter().filter(|d| d.target == t).collect();
        let Some(rule) = rows.iter().find(|d| d.model == ModelKind::RuleCc) else {
            let _ = writeln!(out, "{t}: no rule-based result to compare against");
            continue;
        };
        let learned: Vec<&&DropRow> = rows.iter().filter(|d| d.model != ModelKind::RuleCc).collect();
        let larger: Vec<&str> = learned
            .iter()
            .filter(|d| d.drop_pts > rule.drop_pts)
            .map(|d| d.model.as_str())
            .collect();
        let _ = writeln!(
            out,
            "{t}: rule-based drop {:.2} pts; {} of {} learned models drop more ({}){}",
            rule.drop_pts,
            larger.len(),
            learned.len(),
            if larger.is_empty() { "none".to_string() } else { larger.join(", ") },
            if !learned.is_empty() && larger.len() == learned.len() {
                "; learned models are less robust to the layout change"
            } else {
                ""
            }
        );
    }
    out
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>, what: &str) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(what, e))?;
    }
    w.into_inner()
        .map_err(|e| Error::InvalidInput(format!("{what}: {e}")))
}

#[derive(Serialize)]
struct ReportCsvRow<'a> {
    model: &'a str,
    test: &'a str,
    n: usize,
    accuracy: f64,
    binary_accuracy: f64,
    mae: f64,
    rmse: f64,
    f1_macro: f64,
    f1_minority: f64,
    recall_minority: f64,
    composite: f64,
}

#[derive(Serialize)]
struct PredictionCsvRow<'a> {
    test: &'a str,
    model: &'a str,
    id: &'a str,
    label: u8,
    continuous: f64,
    class: u8,
}

#[derive(Serialize)]
struct DropCsvRow<'a> {
    model: &'a str,
    reference: &'a str,
    target: &'a str,
    accuracy_reference: f64,
    accuracy_target: f64,
    drop_pts: f64,
}

pub const REPORT_JSON: &str = "reports.json";
pub const REPORT_CSV: &str = "reports.csv";
pub const DROPS_CSV: &str = "drops.csv";
pub const PREDICTIONS_CSV: &str = "predictions.csv";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const TUNE_CSV: &str = "tune.csv";

fn write_reports(dir: &Path, report: &ExperimentReport, tuned: Option<&TuneResult>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::json("experiment report", e))?;
    write(&dir.join(REPORT_JSON), json)?;
    write(
        &dir.join(REPORT_CSV),
        csv_bytes(
            report.results.iter().map(|r| ReportCsvRow {
                model: r.model.as_str(),
                test: &r.test,
                n: r.report.n,
                accuracy: r.report.accuracy,
                binary_accuracy: r.report.r_nonzero,
                mae: r.report.mae,
                rmse: r.report.rmse,
                f1_macro: r.report.f1_macro,
                f1_minority: r.report.f1_minority,
                recall_minority: r.report.recall_minority,
                composite: r.report.composite,
            }),
            "report table",
        )?,
    )?;
    write(
        &dir.join(PREDICTIONS_CSV),
        csv_bytes(
            report.results.iter().flat_map(|r| {
                r.predictions.iter().map(move |p| PredictionCsvRow {
                    test: &r.test,
                    model: r.model.as_str(),
                    id: &p.id,
                    label: p.label,
                    continuous: p.continuous,
                    class: p.class,
                })
            }),
            "prediction table",
        )?,
    )?;
    write(&dir.join(DROPS_CSV), drops_csv(&report.drops)?)?;
    write(&dir.join(SUMMARY_TXT), summary_text(report))?;
    if let Some(t) = tuned {
        write(&dir.join(TUNE_CSV), t.to_csv_bytes()?)?;
    }
    Ok(())
}

pub fn drops_csv(drops: &[DropRow]) -> Result<Vec<u8>> {
    let mut bytes = csv_bytes(
        drops.iter().map(|d| DropCsvRow {
            model: d.model.as_str(),
            reference: &d.reference,
            target: &d.target,
            accuracy_reference: d.accuracy_reference,
            accuracy_target: d.accuracy_target,
            drop_pts: d.drop_pts,
        }),
        "drop table",
    )?;
    if drops.is_empty() {
        bytes = b"model,reference,target,accuracy_reference,accuracy_target,drop_pts\n".to_vec();
    }
    Ok(bytes)
}

pub fn summary_text(report: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed {}  input stage {:?}", report.seed, report.input_stage);
    let _ = writeln!(s, "rule-based counter: {}", report.rulecc_tuning);
    if let Some(t) = &report.tuning {
        let _ = writeln!(
            s,
            "  best W={} tau={:.6} composite={:.4} (data: {})",
            t.best_window, t.best_tau, t.best_score, t.data
        );
    }
    for m in &report.model_selection {
        let _ = writeln!(s, "selected {}: {}", m.model.as_str(), m.spec);
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<8} {:<12} {:>5} {:>8} {:>8} {:>7} {:>7}",
        "model", "test", "n", "acc", "binary", "mae", "rmse"
    );
    for r in &report.results {
        let _ = writeln!(
            s,
            "{:<8} {:<12} {:>5} {:>8.4} {:>8.4} {:>7.4} {:>7.4}",
            r.model.as_str(),
            r.test,
            r.report.n,
            r.report.accuracy,
            r.report.r_nonzero,
            r.report.mae,
            r.report.rmse
        );
    }
    for r in &report.results {
        let _ = write!(s, "\n{} on {}\n{}", r.model.as_str(), r.test, r.report.confusion);
    }
    if !report.drops.is_empty() {
        let _ = writeln!(s, "\naccuracy drop (percentage points)");
        for d in &report.drops {
            let _ = writeln!(
                s,
                "{:<8} {} -> {}: {:.4} -> {:.4}  drop {:.2}",
                d.model.as_str(),
                d.reference,
                d.target,
                d.accuracy_reference,
                d.accuracy_target,
                d.drop_pts
            );
        }
        let _ = writeln!(s, "\n{}", report.trend_note.trim_end());
    }
    for f in &report.failures {
        let _ = writeln!(s, "FAILED {}: {}", f.model.as_str(), f.error);
    }
    s
}

/// Grid-searches one family on the train rows of a feature table, scoring
/// on its val rows, then refits the winner on train + val. Test rows are ignored.
pub fn train_family(
    table: &FeatureTable,
    family: ModelFamily,
    settings: &BaselineSettings,
) -> Result<ModelFile> {
    let train = table.split(Split::Train);
    let val = table.split(Split::Val);
    if train.rows.is_empty() || val.rows.is_empty() {
        return Err(Error::InvalidInput(format!(
            "training needs train and val rows, found {} and {}",
            train.rows.len(),
            val.rows.len()
        )));
    }
    let tx = rows_from_matrix(&train.matrix());
    let vx = rows_from_matrix(&val.matrix());
    let (_, grid) = grid_search_model(&tx, &train.labels(), &vx, &val.labels(), family, settings)?;
    let spec = grid.best_spec();
    let mut x = tx;
    x.extend(vx);
    let mut y = train.labels();
    y.extend(val.labels());
    let model = fit_spec(&spec, &x, &y, settings)?;
    Ok(ModelFile::new(spec, model, Some(grid)))
}

/// Predictions for every row of a feature table; ids are row indices.
pub fn predict_table(model: &ModelFile, table: &FeatureTable, rounding: RoundingMode) -> Vec<Prediction> {
    let x = rows_from_matrix(&table.matrix());
    let cont = model.model.predict_many(&x);
    table
        .rows
        .iter()
        .zip(cont)
        .enumerate()
        .map(|(i, (row, c))| Prediction {
            id: i.to_string(),
            label: row.label.get(),
            continuous: c,
            class: round_with(rounding, c),
        })
        .collect()
}

pub fn predictions_csv(preds: &[Prediction]) -> Result<Vec<u8>> {
    if preds.is_empty() {
        return Ok(b"id,label,continuous,class\n".to_vec());
    }
    csv_bytes(preds, "prediction table")
}

pub fn save_predictions(path: impl AsRef<Path>, preds: &[Prediction]) -> Result<()> {
    write(path.as_ref(), predictions_csv(preds)?)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let path = path.as_ref();
    let what = path.display().to_string();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(&what, e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::csv(&what, e)))
        .collect()
}

/// Report of a prediction file.
pub fn evaluate_predictions(preds: &[Prediction], weights: &CompositeWeights) -> Result<EvalReport> {
    let cont: Vec<f64> = preds.iter().map(|p| p.continuous).collect();
    let classes: Vec<u8> = preds.iter().map(|p| p.class).collect();
    let labels: Vec<u8> = preds.iter().map(|p| p.label).collect();
    EvalReport::new(&cont, &classes, &labels, weights)
}
