//! The `logitdyn` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numeric failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::baselines::{error_scores, write_scores_csv, ScalarMethod};
use crate::dataset::{
    generate_synthetic, generate_synthetic_hidden, load_hidden_states, load_trajectories, manifest_path,
    write_hidden_states, write_trajectories, CommitDepth, HiddenSynthConfig, Manifest, SyntheticConfig,
    LHID_MAGIC, LTRJ_MAGIC,
};
use crate::error::{Error, Result};
use crate::experiments::{
    parse_methods, report_dir, write_splits, DatasetSource, EvalReport, Experiment, ExperimentConfig,
};
use crate::feature_matrix::{FeatureMatrix, LFEA_MAGIC};
use crate::features::{build_features, FeatureConfig};
use crate::heads::{
    project_to_trajectories, read_heads, suffix_layers, train_layer_heads, write_heads, HeadTrainConfig,
    LHED_MAGIC,
};
use crate::metrics::{aucpr, aucpr_on};
use crate::probe::{train_probe, ProbeConfig, ProbeModel};
use crate::splits::{stratified_split, SplitAssignment, DEFAULT_P_PROBE};

#[derive(Debug, Parser)]
#[command(
    name = "logitdyn",
    version,
    about = "Misclassification detection from logit trajectories"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for every random choice (splits, shuffling, generators).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Only print errors.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Print a machine-readable JSON summary on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads.
    #[arg(long, global = true, env = "LOGITDYN_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic trajectory (or hidden-state) dataset.
    Synth(SynthArgs),
    /// Train per-layer heads on the head-train split of a hidden-state file.
    TrainHeads(TrainHeadsArgs),
    /// Project hidden states through trained heads into trajectories.
    Project(ProjectArgs),
    /// Build the probe feature matrix of a trajectory file.
    Features(FeaturesArgs),
    /// Train the error probe on a feature matrix.
    TrainProbe(TrainProbeArgs),
    /// In-distribution comparison of all enabled methods.
    Eval(EvalArgs),
    /// Cross-dataset transfer matrices.
    CrossEval(EvalArgs),
    /// Dynamics ablation: with minus without the dynamics block.
    Ablate(EvalArgs),
    /// Export scalar baseline error scores as CSV.
    Baselines(BaselinesArgs),
    /// Print file headers and split balance.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// JSON or TOML generator config; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub classes: Option<usize>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub error_rate: Option<f64>,
    #[arg(long)]
    pub volatility: Option<f64>,
    #[arg(long)]
    pub noise_scale: Option<f64>,
    #[arg(long)]
    pub id: Option<String>,
    /// Write an LHID hidden-state file instead (uses --layers/--hidden-dim).
    #[arg(long)]
    pub hidden: bool,
    #[arg(long, default_value_t = 6)]
    pub layers: usize,
    #[arg(long, default_value_t = 16)]
    pub hidden_dim: usize,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Split JSON to use; default: a stratified split from --seed.
    #[arg(long)]
    pub split: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_P_PROBE)]
    pub p_probe: f64,
}

impl SplitArgs {
    fn resolve(&self, errors: &[bool], seed: u64) -> Result<SplitAssignment> {
        match &self.split {
            Some(p) => {
                let s = SplitAssignment::read(p)?;
                s.validate(errors.len())?;
                Ok(s)
            }
            None => stratified_split(errors, self.p_probe, seed),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainHeadsArgs {
    #[arg(long)]
    pub hidden: PathBuf,
    #[arg(long)]
    pub last_l: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 512)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.0)]
    pub weight_decay: f64,
    #[command(flatten)]
    pub split: SplitArgs,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long)]
    pub hidden: PathBuf,
    #[arg(long)]
    pub heads: PathBuf,
    #[arg(long)]
    pub last_l: usize,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub last_l: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub no_dynamics: bool,
}

#[derive(Debug, Args)]
pub struct TrainProbeArgs {
    /// LFEA or CSV feature matrix.
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 256)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.0)]
    pub weight_decay: f64,
    #[command(flatten)]
    pub split: SplitArgs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Experiment config (TOML or JSON); other flags are ignored when set,
    /// except the global ones.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Trajectory files; repeat for several datasets.
    #[arg(long)]
    pub data: Vec<PathBuf>,
    /// Hidden-state files; repeat for several datasets.
    #[arg(long)]
    pub hidden: Vec<PathBuf>,
    #[arg(long, default_value = "all")]
    pub methods: String,
    /// Comma-separated K grid.
    #[arg(long, default_value = "3")]
    pub k: String,
    /// Comma-separated L grid.
    #[arg(long, default_value = "3")]
    pub last_l: String,
    #[arg(long, default_value_t = DEFAULT_P_PROBE)]
    pub p_probe: f64,
    #[arg(long, default_value_t = 100)]
    pub probe_epochs: usize,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    /// Fixed `L,K` for every transfer cell.
    #[arg(long)]
    pub cross_fixed: Option<String>,
    #[arg(long, default_value = "run")]
    pub run_id: String,
}

#[derive(Debug, Args)]
pub struct BaselinesArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub hidden: Option<PathBuf>,
    /// Comma-separated scalar methods.
    #[arg(long, default_value = "max-logit,entropy,margin,energy")]
    pub methods: String,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub path: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.global.quiet);
    if let Some(n) = cli.global.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return 1;
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli) {
        Ok(summary) => {
            if cli.global.json {
                println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            } else if !cli.global.quiet {
                print_human(&summary);
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn init_logging(quiet: bool) {
    let level = if quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Warn
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("RUST_LOG")
        .format_timestamp(None)
        .try_init();
}

fn print_human(v: &Value) {
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::String(s) => println!("{k}: {s}"),
                    Value::Object(_) | Value::Array(_) => {
                        println!("{k}: {}", serde_json::to_string(v).unwrap_or_default())
                    }
                    other => println!("{k}: {other}"),
                }
            }
        }
        other => println!("{other}"),
    }
}

fn require_out(g: &Global) -> Result<&Path> {
    g.out
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig("--out is required for this command".into()))
}

fn dispatch(cli: &Cli) -> Result<Value> {
    let g = &cli.global;
    match &cli.command {
        Command::Synth(a) => synth(g, a),
        Command::TrainHeads(a) => train_heads(g, a),
        Command::Project(a) => project(g, a),
        Command::Features(a) => features(g, a),
        Command::TrainProbe(a) => train_probe_cmd(g, a),
        Command::Eval(a) => evaluate(g, a, Mode::InDistribution),
        Command::CrossEval(a) => evaluate(g, a, Mode::Cross),
        Command::Ablate(a) => evaluate(g, a, Mode::Ablation),
        Command::Baselines(a) => baselines(g, a),
        Command::Inspect(a) => inspect(g, a),
    }
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        Ok(serde_json::from_str(&text)?)
    } else {
        toml::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}

fn synth(g: &Global, a: &SynthArgs) -> Result<Value> {
    let out = require_out(g)?;
    let id =
        a.id.clone()
            .or_else(|| out.file_stem().map(|s| s.to_string_lossy().into_owned()));
    if a.hidden {
        let mut cfg: HiddenSynthConfig = match &a.config {
            Some(p) => read_config(p)?,
            None => HiddenSynthConfig::default(),
        };
        cfg.seed = g.seed;
        cfg.n_layers = a.layers;
        cfg.hidden_dim = a.hidden_dim;
        if let Some(n) = a.n {
            cfg.n_examples = n;
        }
        if let Some(c) = a.classes {
            cfg.n_classes = c;
        }
        if let Some(id) = id {
            cfg.dataset_id = id;
        }
        let hs = generate_synthetic_hidden(&cfg)?;
        write_hidden_states(&hs, out)?;
        let mut m = Manifest::for_hidden_states(&hs);
        m.generator = Some(serde_json::to_value(&cfg)?);
        m.source = Some("synthetic".into());
        m.write_for(out)?;
        let errors = hs.errors().iter().filter(|&&e| e).count();
        return Ok(json!({
            "path": out.display().to_string(),
            "format": "LHID1",
            "n_examples": hs.n_examples(),
            "n_layers": hs.n_layers(),
            "hidden_dim": hs.hidden_dim(),
            "n_classes": hs.n_classes(),
            "misclassification_rate": errors as f64 / hs.n_examples().max(1) as f64,
        }));
    }
    let mut cfg: SyntheticConfig = match &a.config {
        Some(p) => read_config(p)?,
        None => SyntheticConfig::default(),
    };
    cfg.seed = g.seed;
    if let Some(n) = a.n {
        cfg.n_examples = n;
    }
    if let Some(c) = a.classes {
        cfg.n_classes = c;
    }
    if let Some(d) = a.depth {
        cfg.depth = d;
        // Keep the default commitment ranges inside the new depth.
        if a.config.is_none() {
            cfg.commit_depth_correct = CommitDepth::Uniform {
                low: 1,
                high: d.div_ceil(2),
            };
            cfg.commit_depth_error = CommitDepth::Uniform {
                low: d.div_ceil(2),
                high: d,
            };
        }
    }
    if let Some(e) = a.error_rate {
        cfg.error_rate = e;
    }
    if let Some(v) = a.volatility {
        cfg.volatility_error = v;
    }
    if let Some(s) = a.noise_scale {
        cfg.noise_scale = s;
    }
    if let Some(id) = id {
        cfg.dataset_id = id;
    }
    let ds = generate_synthetic(&cfg)?;
    let _ = fs::remove_file(manifest_path(out));
    write_trajectories(&ds, out)?;
    let mut m = Manifest::read_for(out)?.unwrap_or_else(|| Manifest::for_trajectories(&ds));
    m.generator = Some(serde_json::to_value(&cfg)?);
    m.source = Some("synthetic".into());
    m.write_for(out)?;
    Ok(json!({
        "path": out.display().to_string(),
        "format": "LTRJ1",
        "n_examples": ds.n_examples(),
        "n_classes": ds.n_classes(),
        "depth": ds.depth(),
        "misclassification_rate": crate::metrics::misclassification_rate(&ds),
    }))
}

fn train_heads(g: &Global, a: &TrainHeadsArgs) -> Result<Value> {
    let out = require_out(g)?;
    let hs = load_hidden_states(&a.hidden)?;
    if a.last_l > hs.n_layers() {
        return Err(Error::InvalidConfig(format!(
            "--last-l {} exceeds the {} layers in the file",
            a.last_l,
            hs.n_layers()
        )));
    }
    let split = a.split.resolve(&hs.errors(), g.seed)?;
    let cfg = HeadTrainConfig {
        lr: a.lr,
        epochs: a.epochs,
        batch_size: a.batch_size,
        weight_decay: a.weight_decay,
        seed: g.seed,
    };
    let layers = suffix_layers(hs.n_layers(), a.last_l);
    let heads = train_layer_heads(&hs, &split.head_train, &layers, &cfg)?;
    write_heads(&heads, out)?;
    Ok(json!({
        "path": out.display().to_string(),
        "layers": layers,
        "head_train_rows": split.head_train.len(),
    }))
}

fn project(g: &Global, a: &ProjectArgs) -> Result<Value> {
    let out = require_out(g)?;
    let hs = load_hidden_states(&a.hidden)?;
    let heads = read_heads(&a.heads)?;
    let ds = project_to_trajectories(&hs, &heads, a.last_l)?;
    write_trajectories(&ds, out)?;
    Ok(json!({
        "path": out.display().to_string(),
        "n_examples": ds.n_examples(),
        "depth": ds.depth(),
        "n_classes": ds.n_classes(),
    }))
}

fn features(g: &Global, a: &FeaturesArgs) -> Result<Value> {
    let out = require_out(g)?;
    let ds = load_trajectories(&a.data)?;
    let x = build_features(&ds, &FeatureConfig::new(a.last_l, a.k, !a.no_dynamics))?;
    x.write(out)?;
    Ok(json!({
        "path": out.display().to_string(),
        "n_rows": x.n_rows(),
        "n_features": x.n_features(),
    }))
}

fn train_probe_cmd(g: &Global, a: &TrainProbeArgs) -> Result<Value> {
    let out = require_out(g)?;
    let x = FeatureMatrix::read(&a.features)?;
    let split = a.split.resolve(&x.labels, g.seed)?;
    let cfg = ProbeConfig {
        lr: a.lr,
        epochs: a.epochs,
        batch_size: a.batch_size,
        weight_decay: a.weight_decay,
        seed: g.seed,
    };
    let probe = train_probe(&x, &split, &cfg)?;
    probe.write_json(out)?;
    let scores = probe.score_matrix(&x)?;
    let test = aucpr_on(&scores, &x.labels, &split.test)?;
    Ok(json!({
        "path": out.display().to_string(),
        "best_epoch": probe.best_epoch,
        "val_aucpr": probe.val_aucpr,
        "test_aucpr": test.aucpr,
        "test_base_rate": test.base_rate,
    }))
}

enum Mode {
    InDistribution,
    Cross,
    Ablation,
}

fn parse_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse()
                .map_err(|_| Error::InvalidConfig(format!("{what}: `{p}` is not a count")))
        })
        .collect()
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map_or_else(|| "dataset".into(), |s| s.to_string_lossy().into_owned())
}

fn eval_config(g: &Global, a: &EvalArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let n = a.data.len().max(a.hidden.len());
            if n == 0 {
                return Err(Error::InvalidConfig(
                    "give --config or at least one --data/--hidden".into(),
                ));
            }
            if !a.data.is_empty() && !a.hidden.is_empty() && a.data.len() != a.hidden.len() {
                return Err(Error::InvalidConfig(
                    "--data and --hidden must be given the same number of times".into(),
                ));
            }
            let datasets = (0..n)
                .map(|i| {
                    let trajectories = a.data.get(i).cloned();
                    let hidden_states = a.hidden.get(i).cloned();
                    let name = stem(trajectories.as_ref().or(hidden_states.as_ref()).unwrap());
                    DatasetSource {
                        name,
                        trajectories,
                        hidden_states,
                        p_probe: a.p_probe,
                        split: None,
                    }
                })
                .collect();
            let cross_fixed = match &a.cross_fixed {
                Some(s) => match parse_list(s, "--cross-fixed")?.as_slice() {
                    &[l, k] => Some((l, k)),
                    _ => return Err(Error::InvalidConfig("--cross-fixed takes `L,K`".into())),
                },
                None => None,
            };
            let cfg = ExperimentConfig {
                run_id: a.run_id.clone(),
                datasets,
                methods: parse_methods(&a.methods)?,
                last_l: parse_list(&a.last_l, "--last-l")?,
                top_k: parse_list(&a.k, "--k")?,
                probe: ProbeConfig {
                    epochs: a.probe_epochs,
                    ..Default::default()
                },
                energy_temperature: a.temperature,
                cross_fixed,
                ..Default::default()
            };
            cfg.validate()?;
            cfg
        }
    };
    cfg.seed = g.seed;
    cfg.probe.seed = g.seed;
    if g.jobs.is_some() {
        cfg.jobs = g.jobs;
    }
    if let Some(out) = &g.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn evaluate(g: &Global, a: &EvalArgs, mode: Mode) -> Result<Value> {
    let cfg = eval_config(g, a)?;
    let exp = Experiment::from_config(cfg.clone())?;
    let report: EvalReport = match mode {
        Mode::InDistribution => exp.run_in_distribution()?,
        Mode::Cross => exp.run_cross_matrix()?,
        Mode::Ablation => exp.run_ablation()?,
    };
    let dir = report_dir(&cfg);
    report.write(&dir)?;
    write_splits(&exp, &dir)?;
    let mut summary = json!({ "report": dir.join("report.json").display().to_string() });
    if !report.in_distribution.is_empty() {
        let rows: serde_json::Map<String, Value> = report
            .in_distribution
            .iter()
            .map(|d| {
                let mut m: serde_json::Map<String, Value> = d
                    .methods
                    .iter()
                    .map(|r| (r.method.name().to_string(), json!(r.test_aucpr)))
                    .collect();
                m.insert("delta".into(), json!(d.delta));
                (d.dataset.clone(), Value::Object(m))
            })
            .collect();
        summary["test_aucpr"] = Value::Object(rows);
    }
    if let Some(ab) = &report.ablation {
        summary["ablation_mean_diagonal"] = json!(ab.mean_diagonal);
        summary["ablation_mean_off_diagonal"] = json!(ab.mean_off_diagonal);
    }
    if let Some(c) = &report.cross {
        summary["cross_methods"] = json!(c.aucpr.keys().collect::<Vec<_>>());
    }
    Ok(summary)
}

fn baselines(g: &Global, a: &BaselinesArgs) -> Result<Value> {
    let out = require_out(g)?;
    let ds = match (&a.data, &a.hidden) {
        (Some(p), _) => load_trajectories(p)?,
        (None, Some(p)) => load_hidden_states(p)?.classifier_trajectories()?,
        (None, None) => return Err(Error::InvalidConfig("give --data or --hidden".into())),
    };
    let methods = parse_methods(&a.methods)?;
    let errors = ds.errors();
    let both = errors.iter().any(|&e| e) && errors.iter().any(|&e| !e);
    let mut scores = Vec::new();
    let mut aucprs = serde_json::Map::new();
    for m in methods {
        let Some(sm): Option<ScalarMethod> = m.scalar() else {
            return Err(Error::InvalidConfig(format!(
                "`{m}` is a learned method; use `eval` for it"
            )));
        };
        let s = error_scores(&ds, sm, a.temperature)?;
        if both {
            aucprs.insert(m.name().into(), json!(aucpr(&s, &errors)?.aucpr));
        }
        scores.push((m.name().to_string(), s));
    }
    write_scores_csv(out, &scores)?;
    Ok(json!({ "path": out.display().to_string(), "aucpr_all_rows": aucprs }))
}

fn split_balance(errors: &[bool], split: &SplitAssignment) -> Value {
    let mut m = serde_json::Map::new();
    for (name, rows) in split.subsets() {
        let e = rows.iter().filter(|&&i| errors[i]).count();
        m.insert(
            name.into(),
            json!({ "size": rows.len(), "errors": e, "correct": rows.len() - e }),
        );
    }
    Value::Object(m)
}

fn inspect(g: &Global, a: &InspectArgs) -> Result<Value> {
    let path = &a.path;
    let mut magic = [0u8; 6];
    {
        use std::io::Read;
        let mut f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        f.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
    }
    let manifest = Manifest::read_for(path).ok().flatten();
    let mut v = match magic {
        m if m == LTRJ_MAGIC => {
            let ds = load_trajectories(path)?;
            let errors = ds.errors();
            let mut v = json!({
                "format": "LTRJ1",
                "n_examples": ds.n_examples(),
                "n_classes": ds.n_classes(),
                "depth": ds.depth(),
                "misclassification_rate": crate::metrics::misclassification_rate(&ds),
            });
            if ds.n_examples() > 0 {
                if let Ok(split) = a.split.resolve(&errors, g.seed) {
                    v["split"] = split_balance(&errors, &split);
                }
            }
            v
        }
        m if m == LHID_MAGIC => {
            let hs = load_hidden_states(path)?;
            let errors = hs.errors();
            let mut v = json!({
                "format": "LHID1",
                "n_examples": hs.n_examples(),
                "n_layers": hs.n_layers(),
                "hidden_dim": hs.hidden_dim(),
                "n_classes": hs.n_classes(),
            });
            if let Ok(split) = a.split.resolve(&errors, g.seed) {
                v["split"] = split_balance(&errors, &split);
            }
            v
        }
        m if m == LFEA_MAGIC => {
            let x = FeatureMatrix::read_lfea(path)?;
            json!({
                "format": "LFEA1",
                "n_rows": x.n_rows(),
                "n_features": x.n_features(),
                "feature_names": x.feature_names,
            })
        }
        m if m == LHED_MAGIC => {
            let heads = read_heads(path)?;
            json!({
                "format": "LHED1",
                "layers": heads.iter().map(|h| h.layer_index).collect::<Vec<_>>(),
            })
        }
        _ => {
            let probe = ProbeModel::read_json(path).map_err(|_| Error::BadMagic {
                expected: "LTRJ1, LHID1, LFEA1, LHED1 or a probe JSON".into(),
                found: magic.to_vec(),
            })?;
            json!({
                "format": "probe",
                "n_features": probe.weights.len(),
                "best_epoch": probe.best_epoch,
                "val_aucpr": probe.val_aucpr,
            })
        }
    };
    if let Some(m) = manifest {
        v["dataset_id"] = json!(m.dataset_id);
    }
    Ok(v)
}
