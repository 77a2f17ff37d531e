//! `radcount` command-line front end.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use radcount::baselines::{ModelFamily, ModelFile};
use radcount::cube::{load_cube, save_cube, RadarCube};
use radcount::dataset::{DatasetManifest, Split};
use radcount::features::FeatureTable;
use radcount::harness::{
    self, fixtures, evaluate_predictions, load_predictions, prepare_manifest, rulecc_predictions,
    save_predictions, ExperimentPlan, Prediction, RunConfig,
};
use radcount::preprocess::{
    clip_to_bounds, dataset_percentile_bounds, minmax_normalize, prepare, weight_normalized,
    InputStage,
};
use radcount::rulecc::explain_sequence;
use radcount::synth::{generate_dataset, LayoutPreset};
use radcount::tuner::tune;

macro_rules! emit_line {
    ($($t:tt)*) => { emit(&format!("{}\n", format!($($t)*)))? };
}

macro_rules! emit_text {
    ($($t:tt)*) => { emit(&format!($($t)*))? };
}

const EXIT_ERROR: u8 = 2;
const EXIT_FIXTURES: u8 = 3;

#[derive(Parser)]
#[command(name = "radcount", version, about = "Radar people counting: rule-based counter, baselines and evaluation")]
struct Cli {
    /// Master seed for synthesis and model fitting.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// JSON run configuration; missing fields take defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Condition one cube, or every cube of a manifest.
    Preprocess(PreprocessArgs),
    /// Write the 18-feature table of a manifest.
    ExtractFeatures(FeatureArgs),
    /// Rule-based count of one cube or of every cube in a manifest.
    Count(CountArgs),
    /// Grid-search and fit one baseline family on a feature table.
    Train(TrainArgs),
    /// Apply a saved baseline model to a feature table.
    Predict(PredictArgs),
    /// Metrics of a prediction file.
    Evaluate(EvaluateArgs),
    /// Window/threshold grid search of the rule-based counter.
    Tune(TuneArgs),
    /// Run a full experiment plan.
    Experiment(ExperimentArgs),
    /// Recompute the shipped reference metrics from their confusion matrices.
    VerifyFixtures(VerifyArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// Layout preset; "A" expands to all four A layouts. Repeatable.
    #[arg(long, required = true)]
    preset: Vec<String>,
    #[arg(long, default_value_t = 25)]
    per_class: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Single input cube.
    #[arg(long = "in", conflicts_with = "manifest")]
    input: Option<PathBuf>,
    /// Process every entry of a manifest into `--out` (a directory).
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_stage, default_value = "weighted")]
    stage: InputStage,
    /// Clip with percentiles pooled over the whole manifest.
    #[arg(long, requires = "manifest")]
    global_percentiles: bool,
}

#[derive(Args)]
struct FeatureArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = parse_stage, default_value = "weighted")]
    stage: InputStage,
}

#[derive(Args)]
struct CountArgs {
    #[arg(long = "in", conflicts_with = "manifest")]
    input: Option<PathBuf>,
    /// Count every entry; writes a prediction CSV to `--out`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, value_parser = parse_split)]
    split: Option<Split>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit per-window records.
    #[arg(long)]
    explain: bool,
    #[arg(long, value_parser = parse_stage, default_value = "weighted")]
    stage: InputStage,
    /// Input is already conditioned; skip preprocessing.
    #[arg(long)]
    preprocessed: bool,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_parser = parse_family)]
    family: ModelFamily,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long, value_parser = parse_split)]
    split: Option<Split>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Rows used for tuning.
    #[arg(long, value_parser = parse_split, default_value = "train")]
    split: Split,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, value_parser = parse_stage, default_value = "weighted")]
    stage: InputStage,
}

#[derive(Args)]
struct VerifyArgs {
    /// Fixture file to check instead of the shipped one.
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Overrides the plan's output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_stage(s: &str) -> std::result::Result<InputStage, String> {
    s.parse().map_err(|e: radcount::Error| e.to_string())
}

fn parse_split(s: &str) -> std::result::Result<Split, String> {
    s.parse().map_err(|e: radcount::Error| e.to_string())
}

fn parse_family(s: &str) -> std::result::Result<ModelFamily, String> {
    s.parse().map_err(|e: radcount::Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.baselines.seed = seed;
    }
    let seed = cli.seed.unwrap_or(0);
    match cli.cmd {
        Command::Synth(a) => synth(a, seed, &cfg)?,
        Command::Preprocess(a) => preprocess(a, &cfg)?,
        Command::ExtractFeatures(a) => {
            let m = DatasetManifest::load(&a.manifest)?;
            let set = prepare_manifest("features", &m, &cfg.preprocess, a.stage)?;
            set.feature_table().save(&a.out)?;
        }
        Command::Count(a) => count(a, &cfg)?,
        Command::Train(a) => {
            let table = FeatureTable::load(&a.features)?;
            let model = harness::train_family(&table, a.family, &cfg.baselines)?;
            model.save(&a.out)?;
            emit_line!("{}: selected {}", a.family.as_str(), model.spec);
        }
        Command::Predict(a) => {
            let model = ModelFile::load(&a.model)?;
            let mut table = FeatureTable::load(&a.features)?;
            if let Some(s) = a.split {
                table = table.split(s);
            }
            save_predictions(&a.out, &harness::predict_table(&model, &table, cfg.rounding))?;
        }
        Command::Evaluate(a) => {
            let report = evaluate_predictions(&load_predictions(&a.pred)?, &cfg.weights)?;
            emit_line!(
                "n={} accuracy={:.4} binary={:.4} mae={:.4} rmse={:.4} f1_macro={:.4} composite={:.4}",
                report.n,
                report.accuracy,
                report.r_nonzero,
                report.mae,
                report.rmse,
                report.f1_macro,
                report.composite
            );
            emit_text!("{}", report.confusion);
            if let Some(out) = a.out {
                write_json(&out, &report)?;
            }
        }
        Command::Tune(a) => {
            let m = DatasetManifest::load(&a.manifest)?.filter_split(a.split);
            if m.is_empty() {
                bail!("{} has no {} entries", a.manifest.display(), a.split);
            }
            let set = prepare_manifest(a.split.as_str(), &m, &cfg.preprocess, a.stage)?;
            let result = tune(&set.cubes, &set.labels, &cfg.grid, &cfg.rulecc, &cfg.weights)?;
            result.save(&a.out, a.csv.as_deref())?;
            let best = result.best_row();
            emit_line!(
                "best W={} tau={:.6} composite={:.4}",
                best.window, best.tau, result.best_score
            );
        }
        Command::Experiment(a) => {
            let mut plan = ExperimentPlan::load(&a.plan)?;
            if let Some(d) = a.out_dir {
                plan.output_dir = d;
            }
            if let Some(s) = cli.seed {
                plan.seed = s;
            }
            if cli.config.is_some() {
                plan.config = cfg;
            }
            let report = harness::run_experiment(&plan)?;
            emit_text!("{}", harness::summary_text(&report));
            if !report.failures.is_empty() {
                return Ok(ExitCode::from(EXIT_ERROR));
            }
        }
        Command::VerifyFixtures(a) => {
            let report = match &a.file {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    fixtures::verify_fixture_file(&fixtures::load_fixtures(&text)?)?
                }
                None => harness::verify_fixtures()?,
            };
            emit_line!("{report}");
            if !report.all_pass() {
                return Ok(ExitCode::from(EXIT_FIXTURES));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(value)?;
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn synth(a: SynthArgs, seed: u64, cfg: &RunConfig) -> Result<()> {
    let mut presets = Vec::new();
    for p in &a.preset {
        if p == "A" {
            presets.extend(LayoutPreset::A_LAYOUTS);
        } else {
            presets.push(p.parse::<LayoutPreset>()?);
        }
    }
    let m = generate_dataset(&presets, a.per_class, seed, &cfg.synth, &a.out)?;
    emit_line!("wrote {} samples to {}", m.len(), a.out.display());
    Ok(())
}

fn preprocess(a: PreprocessArgs, cfg: &RunConfig) -> Result<()> {
    cfg.preprocess.validate()?;
    if let Some(input) = &a.input {
        let cube = prepare(&load_cube(input)?, &cfg.preprocess, a.stage)?;
        save_cube(&cube, &a.out)?;
        return Ok(());
    }
    let Some(mpath) = &a.manifest else {
        bail!("give --in or --manifest");
    };
    let m = DatasetManifest::load(mpath)?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let raw: Vec<RadarCube> = m
        .entries
        .par_iter()
        .map(|e| load_cube(m.resolve(e)))
        .collect::<radcount::Result<_>>()?;
    let bounds = if a.global_percentiles {
        Some(dataset_percentile_bounds(&raw, cfg.preprocess.lo_pct, cfg.preprocess.hi_pct)?)
    } else {
        None
    };
    raw.par_iter()
        .zip(&m.entries)
        .try_for_each(|(cube, e)| -> radcount::Result<()> {
            let out = match bounds {
                Some((lo, hi)) => {
                    let n = minmax_normalize(&clip_to_bounds(cube, lo, hi)?)?;
                    match a.stage {
                        InputStage::Normalized => n,
                        InputStage::Weighted => weight_normalized(&n, &cfg.preprocess.sigmoid)?,
                    }
                }
                None => prepare(cube, &cfg.preprocess, a.stage)?,
            };
            save_cube(&out, a.out.join(format!("{}.radc", e.id())))
        })?;
    let mut out_manifest = m.clone();
    for e in &mut out_manifest.entries {
        e.path = format!("{}.radc", e.id());
    }
    out_manifest.base_dir = a.out.clone();
    out_manifest.save(a.out.join("manifest.jsonl"))?;
    Ok(())
}

fn count(a: CountArgs, cfg: &RunConfig) -> Result<()> {
    cfg.rulecc.validate()?;
    let condition = |cube: RadarCube| -> radcount::Result<RadarCube> {
        if a.preprocessed {
            Ok(cube)
        } else {
            prepare(&cube, &cfg.preprocess, a.stage)
        }
    };
    if let Some(input) = &a.input {
        let cube = condition(load_cube(input)?)?;
        let ex = explain_sequence(&cube, &cfg.rulecc)?;
        let text = if a.explain {
            serde_json::to_string_pretty(&ex)?
        } else {
            serde_json::to_string(&serde_json::json!({ "count": ex.count }))?
        };
        match &a.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
            None => emit_line!("{text}"),
        }
        return Ok(());
    }
    let Some(mpath) = &a.manifest else {
        bail!("give --in or --manifest");
    };
    let Some(out) = &a.out else {
        bail!("--manifest needs --out for the prediction CSV");
    };
    let mut m = DatasetManifest::load(mpath)?;
    if let Some(s) = a.split {
        m = m.filter_split(s);
    }
    let cubes: Vec<RadarCube> = m
        .entries
        .par_iter()
        .map(|e| condition(load_cube(m.resolve(e))?))
        .collect::<radcount::Result<_>>()?;
    let (cont, classes) = rulecc_predictions(&cubes, &cfg.rulecc)?;
    let preds: Vec<Prediction> = m
        .entries
        .iter()
        .zip(cont.into_iter().zip(classes))
        .map(|(e, (continuous, class))| Prediction {
            id: e.id(),
            label: e.label.get(),
            continuous,
            class,
        })
        .collect();
    save_predictions(out, &preds)?;
    if a.explain {
        let records: Vec<_> = cubes
            .par_iter()
            .map(|c| explain_sequence(c, &cfg.rulecc))
            .collect::<radcount::Result<_>>()?;
        let tagged: Vec<_> = m
            .entries
            .iter()
            .zip(records)
            .map(|(e, r)| serde_json::json!({ "id": e.id(), "explain": r }))
            .collect();
        write_json(&out.with_extension("explain.json"), &tagged)?;
    }
    Ok(())
}
