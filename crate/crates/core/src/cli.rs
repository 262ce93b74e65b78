//! Command-line front end.
//!
//! Every value flag can also come from a TOML file passed with `--config`,
//! using the flag's long name as the key (`learning-rate = 0.01`). Flags given
//! on the command line win over the file.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::array::{to_db, Scene, Strategy};
use crate::baselines::{ao, fpv, rpb, AoConfig};
use crate::config::SystemConfig;
use crate::error::Error;
use crate::experiments::{
    bench_runtime, run_sweep, write_bench_csv, write_sweep_csv, BenchSpec, LearnedModel, Scheme,
    SweepSpec, SweepVariable,
};
use crate::neural::{load_model, save_model, MlpParams};
use crate::training::{
    evaluate, generate_scenes, holdout_scenes, infer, read_scenes_csv, stream_rng, train_on,
    write_scenes_csv, Featurization, TrainConfig, TrainHistory,
};

#[derive(Debug, Parser)]
#[command(
    name = "antijam",
    version,
    about = "Movable-antenna anti-jamming simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample scenes and write them as CSV.
    GenData(GenDataArgs),
    /// Train a positioning network and write the model and its history.
    Train(TrainArgs),
    /// Run a trained model on scenes.
    Infer(InferArgs),
    /// Sweep one system parameter and compare schemes.
    Sweep(SweepArgs),
    /// Time each scheme per scene.
    BenchRuntime(BenchArgs),
    /// Run one baseline scheme on scenes.
    Baseline(BaselineArgs),
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(m) | Error::Parse(m) => CliError::Usage(m),
            other => CliError::Runtime(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(Error::io("<stdout>", e))
    }
}

const RPB_STREAM_BASE: u64 = 1 << 40;

type CliResult<T = ()> = std::result::Result<T, CliError>;

trait Merge {
    /// Fills every unset field of `self` from `file`.
    fn merge(self, file: Self) -> Self;
}

macro_rules! merge_impl {
    ($ty:ty { $($opt:ident),* } $(flags { $($flag:ident),* })? $(nested { $($sub:ident),* })?) => {
        impl Merge for $ty {
            fn merge(mut self, file: Self) -> Self {
                $(self.$opt = self.$opt.or(file.$opt);)*
                $($(self.$flag = self.$flag || file.$flag;)*)?
                $($(self.$sub = self.$sub.merge(file.$sub);)*)?
                self
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct CommonArgs {
    /// TOML file supplying defaults for any flag.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
merge_impl!(CommonArgs { config, seed, out });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SystemArgs {
    /// Number of antenna elements N.
    #[arg(long)]
    pub elements: Option<usize>,
    /// Number of jammers K.
    #[arg(long)]
    pub jammers: Option<usize>,
    /// Region length L in wavelengths.
    #[arg(long)]
    pub region: Option<f64>,
    /// Minimum element spacing in wavelengths.
    #[arg(long)]
    pub min_spacing: Option<f64>,
    #[arg(long)]
    pub noise_power: Option<f64>,
}
merge_impl!(SystemArgs {
    elements,
    jammers,
    region,
    min_spacing,
    noise_power
});

impl SystemArgs {
    fn system(&self, elements: usize, jammers: usize) -> CliResult<SystemConfig> {
        let d = SystemConfig::default();
        let cfg = SystemConfig {
            num_elements: self.elements.unwrap_or(elements),
            num_jammers: self.jammers.unwrap_or(jammers),
            region_size: self.region.unwrap_or(d.region_size),
            min_spacing: self.min_spacing.unwrap_or(d.min_spacing),
            noise_power: self.noise_power.unwrap_or(d.noise_power),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeaturizationArg {
    NormalizedAngle,
    Cosine,
}

impl From<FeaturizationArg> for Featurization {
    fn from(f: FeaturizationArg) -> Self {
        match f {
            FeaturizationArg::NormalizedAngle => Featurization::NormalizedAngle,
            FeaturizationArg::Cosine => Featurization::Cosine,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct TrainKnobs {
    /// Training scenes (generated when no dataset is given, otherwise a prefix of it).
    #[arg(long)]
    pub dataset_size: Option<usize>,
    #[arg(long = "batch")]
    #[serde(alias = "batch")]
    pub batch_size: Option<usize>,
    #[arg(long = "lr")]
    #[serde(alias = "lr")]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Heavy-ball momentum; 0 disables it.
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Global gradient-norm cap; 0 disables clipping.
    #[arg(long)]
    pub clip_norm: Option<f64>,
    /// Hidden layer widths, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub featurization: Option<FeaturizationArg>,
    /// Fix the source direction (radians) instead of sampling it.
    #[arg(long)]
    pub source_angle: Option<f64>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Accept a run whose last epoch is worse than its first.
    #[arg(long)]
    pub allow_no_progress: bool,
    /// Start training from the fixed-array geometry (zeroed output layer).
    #[arg(long)]
    pub start_at_fixed_array: bool,
}
merge_impl!(TrainKnobs {
    dataset_size, batch_size, learning_rate, epochs, momentum, clip_norm, hidden,
    featurization, source_angle, threads
} flags { allow_no_progress, start_at_fixed_array });

impl TrainKnobs {
    fn config(&self, system: SystemConfig, seed: u64, base: TrainConfig) -> TrainConfig {
        let nonzero = |v: f64| Some(v).filter(|&v| v > 0.0);
        TrainConfig {
            system,
            seed,
            dataset_size: self.dataset_size.unwrap_or(base.dataset_size),
            batch_size: self.batch_size.unwrap_or(base.batch_size),
            learning_rate: self.learning_rate.unwrap_or(base.learning_rate),
            epochs: self.epochs.unwrap_or(base.epochs),
            momentum: self.momentum.map_or(base.momentum, nonzero),
            clip_norm: self.clip_norm.map_or(base.clip_norm, nonzero),
            hidden: self.hidden.clone().unwrap_or(base.hidden),
            featurization: self.featurization.map_or(base.featurization, Into::into),
            fixed_source_angle: self.source_angle.or(base.fixed_source_angle),
            threads: self.threads.unwrap_or(base.threads),
            require_progress: !self.allow_no_progress && base.require_progress,
            start_at_fixed_array: self.start_at_fixed_array || base.start_at_fixed_array,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct AoArgs {
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    /// Relative improvement below which AO stops.
    #[arg(long)]
    pub tolerance: Option<f64>,
}
merge_impl!(AoArgs {
    grid_points,
    max_sweeps,
    tolerance
});

impl AoArgs {
    fn config(&self) -> CliResult<AoConfig> {
        let d = AoConfig::default();
        let cfg = AoConfig {
            grid_points: self.grid_points.unwrap_or(d.grid_points),
            max_sweeps: self.max_sweeps.unwrap_or(d.max_sweeps),
            tolerance: self.tolerance.unwrap_or(d.tolerance),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Where scenes come from: a CSV file, a single literal scene, or sampling.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SceneArgs {
    /// Scene CSV (`theta0,theta1,…`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// One scene as comma-separated radians, source first.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub scene: Option<Vec<f64>>,
    /// Number of scenes to sample when neither --data nor --scene is given.
    #[arg(long)]
    pub trials: Option<usize>,
}
merge_impl!(SceneArgs {
    data,
    scene,
    trials
});

impl SceneArgs {
    fn scenes(&self, num_jammers: usize, seed: u64) -> CliResult<Vec<Scene>> {
        if let Some(angles) = &self.scene {
            let (&source, jammers) = angles
                .split_first()
                .ok_or_else(|| CliError::Usage("--scene needs at least one angle".into()))?;
            return Ok(vec![Scene::new(source, jammers.to_vec())?]);
        }
        if let Some(path) = &self.data {
            return Ok(read_scenes_csv(path)?);
        }
        Ok(holdout_scenes(
            self.trials.unwrap_or(1000),
            num_jammers,
            None,
            seed,
        ))
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct GenDataArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub jammers: Option<usize>,
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub source_angle: Option<f64>,
}
merge_impl!(GenDataArgs { jammers, size, source_angle } nested { common });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: TrainKnobs,
    /// Training scenes; sampled from the seed when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// History CSV path; defaults to `<model stem>-history.csv` next to the model.
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Held-out scenes used for the final report.
    #[arg(long)]
    pub holdout: Option<usize>,
}
merge_impl!(TrainArgs { data, history, holdout } nested { common, system, knobs });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct InferArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub scenes: SceneArgs,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Input encoding the model was trained with.
    #[arg(long, value_enum)]
    pub featurization: Option<FeaturizationArg>,
}
merge_impl!(InferArgs { model, featurization } nested { common, system, scenes });

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariableArg {
    Elements,
    Region,
    Jammers,
}

impl From<VariableArg> for SweepVariable {
    fn from(v: VariableArg) -> Self {
        match v {
            VariableArg::Elements => SweepVariable::NumElements,
            VariableArg::Region => SweepVariable::RegionSize,
            VariableArg::Jammers => SweepVariable::NumJammers,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeArg {
    Learned,
    Ao,
    Fpv,
    Rpb,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Learned => Scheme::Learned,
            SchemeArg::Ao => Scheme::Ao,
            SchemeArg::Fpv => Scheme::Fpv,
            SchemeArg::Rpb => Scheme::Rpb,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub knobs: TrainKnobs,
    #[command(flatten)]
    #[serde(flatten)]
    pub ao: AoArgs,
    #[arg(long, value_enum)]
    pub variable: Option<VariableArg>,
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<f64>>,
    /// Scenes per sweep point.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub schemes: Option<Vec<SchemeArg>>,
    /// Use this model at every point instead of retraining per point.
    #[arg(long)]
    pub model: Option<PathBuf>,
}
merge_impl!(SweepArgs { variable, values, trials, schemes, model } nested { common, system, knobs, ao });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct BenchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub ao: AoArgs,
    /// Element counts to time, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub elements: Option<Vec<usize>>,
    /// Jammer counts to time, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub jammers: Option<Vec<usize>>,
    #[arg(long)]
    pub region: Option<f64>,
    #[arg(long)]
    pub scenes: Option<usize>,
    /// Back-to-back runs per timing sample for FPV and RPB.
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long, value_enum, value_delimiter = ',')]
    pub schemes: Option<Vec<SchemeArg>>,
    /// Trained model, used wherever its dimensions match.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub featurization: Option<FeaturizationArg>,
    /// Hidden widths of the stand-in network where no model matches.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
}
merge_impl!(BenchArgs {
    elements, jammers, region, scenes, repeats, schemes, model, featurization, hidden
} nested { common, ao });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct BaselineArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub scenes: SceneArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub ao: AoArgs,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
}
merge_impl!(BaselineArgs { scheme } nested { common, system, scenes, ao });

fn with_file<T: Merge + DeserializeOwned>(args: T, config: Option<&Path>) -> CliResult<T> {
    let Some(path) = config else {
        return Ok(args);
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Runtime(Error::io(path, e)))?;
    let file: T =
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    Ok(args.merge(file))
}

fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

/// Runs one parsed command, writing human-readable progress to `log`.
pub fn run(cli: Cli, log: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::GenData(a) => {
            let config = a.common.config.clone();
            gen_data(with_file(a, config.as_deref())?, log)
        }
        Command::Train(a) => {
            let config = a.common.config.clone();
            train_cmd(with_file(a, config.as_deref())?, log)
        }
        Command::Infer(a) => {
            let config = a.common.config.clone();
            infer_cmd(with_file(a, config.as_deref())?, log)
        }
        Command::Sweep(a) => {
            let config = a.common.config.clone();
            sweep_cmd(with_file(a, config.as_deref())?, log)
        }
        Command::BenchRuntime(a) => {
            let config = a.common.config.clone();
            bench_cmd(with_file(a, config.as_deref())?, log)
        }
        Command::Baseline(a) => {
            let config = a.common.config.clone();
            baseline_cmd(with_file(a, config.as_deref())?, log)
        }
    }
}

fn gen_data(a: GenDataArgs, log: &mut dyn Write) -> CliResult {
    let out = require(a.common.out, "out")?;
    let k = a.jammers.unwrap_or(3);
    let size = a.size.unwrap_or(100_000);
    if let Some(t) = a.source_angle {
        Scene::new(t, vec![])?;
    }
    let scenes = generate_scenes(size, k, a.source_angle, a.common.seed.unwrap_or(0));
    write_scenes_csv(&scenes, k, &out)?;
    writeln!(log, "wrote {size} scenes to {}", out.display())?;
    Ok(())
}

fn history_path(model: &Path) -> PathBuf {
    let stem = model
        .file_stem()
        .map_or_else(|| "model".into(), |s| s.to_string_lossy().into_owned());
    model.with_file_name(format!("{stem}-history.csv"))
}

fn train_cmd(a: TrainArgs, log: &mut dyn Write) -> CliResult {
    let out = a.common.out.clone().unwrap_or_else(|| "model.json".into());
    let seed = a.common.seed.unwrap_or(0);
    let dataset = match &a.data {
        Some(path) => {
            let mut scenes = read_scenes_csv(path)?;
            if let Some(n) = a.knobs.dataset_size {
                if n > scenes.len() {
                    return Err(CliError::Usage(format!(
                        "--dataset-size {n} exceeds the {} scenes in {}",
                        scenes.len(),
                        path.display()
                    )));
                }
                scenes.truncate(n);
            }
            Some(scenes)
        }
        None => None,
    };
    let file_k = dataset
        .as_ref()
        .and_then(|s| s.first())
        .map_or(3, Scene::num_jammers);
    let system = a.system.system(8, file_k)?;
    let cfg = a.knobs.config(system, seed, TrainConfig::default());
    let scenes = match dataset {
        Some(s) => s,
        None => generate_scenes(
            cfg.dataset_size,
            cfg.system.num_jammers,
            cfg.fixed_source_angle,
            seed,
        ),
    };
    let history_out = a.history.clone().unwrap_or_else(|| history_path(&out));
    let save_history = |h: &TrainHistory| h.write_csv(&history_out);
    let (params, history) = match train_on(&cfg, &scenes) {
        Ok(r) => r,
        Err(Error::Diverged {
            epoch,
            history,
            source,
        }) => {
            save_history(&history)?;
            return Err(CliError::Runtime(Error::Diverged {
                epoch,
                history,
                source,
            }));
        }
        Err(e @ Error::NoProgress { .. }) => {
            if let Error::NoProgress { history, .. } = &e {
                save_history(history)?;
            }
            return Err(CliError::Runtime(e));
        }
        Err(e) => return Err(e.into()),
    };
    save_model(&params, &out)?;
    save_history(&history)?;
    for e in &history.epochs {
        writeln!(
            log,
            "epoch {:>3}  loss {:.6}  train SINR {:.3} dB  ({:.1}s)",
            e.epoch, e.mean_loss, e.mean_sinr_db, e.seconds
        )?;
    }
    let holdout = holdout_scenes(
        a.holdout.unwrap_or(1000),
        cfg.system.num_jammers,
        cfg.fixed_source_angle,
        seed,
    );
    let sinrs = evaluate(&params, &holdout, &cfg.system, cfg.featurization)?;
    writeln!(
        log,
        "held-out mean SINR: {:.4} dB over {} scenes",
        mean_db(&sinrs),
        sinrs.len()
    )?;
    writeln!(
        log,
        "model: {}  history: {}",
        out.display(),
        history_out.display()
    )?;
    Ok(())
}

fn mean_db(sinrs: &[f64]) -> f64 {
    sinrs.iter().map(|&s| to_db(s)).sum::<f64>() / sinrs.len().max(1) as f64
}

fn write_strategies(strategies: &[Strategy], out: Option<&Path>, log: &mut dyn Write) -> CliResult {
    let n = strategies.first().map_or(0, |s| s.layout.len());
    let mut header = vec!["scene".to_string(), "sinr".into(), "sinr_db".into()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    let row = |i: usize, s: &Strategy| {
        let mut r = vec![i.to_string(), s.sinr.to_string(), s.sinr_db().to_string()];
        r.extend(s.layout.positions().iter().map(f64::to_string));
        r
    };
    match out {
        Some(path) => {
            let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
            w.write_record(&header).map_err(|e| Error::csv(path, e))?;
            for (i, s) in strategies.iter().enumerate() {
                w.write_record(row(i, s)).map_err(|e| Error::csv(path, e))?;
            }
            w.flush().map_err(|e| Error::io(path, e))?;
        }
        None => {
            let mut w = csv::Writer::from_writer(&mut *log);
            let err = |e| CliError::Runtime(Error::csv("<stdout>", e));
            w.write_record(&header).map_err(err)?;
            for (i, s) in strategies.iter().enumerate() {
                w.write_record(row(i, s)).map_err(err)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn summarize(strategies: &[Strategy], out: Option<&Path>, log: &mut dyn Write) -> CliResult {
    if let Some(path) = out {
        let sinrs: Vec<f64> = strategies.iter().map(|s| s.sinr).collect();
        writeln!(
            log,
            "mean SINR: {:.4} dB over {} scenes -> {}",
            mean_db(&sinrs),
            sinrs.len(),
            path.display()
        )?;
    }
    Ok(())
}

fn infer_cmd(a: InferArgs, log: &mut dyn Write) -> CliResult {
    let model_path = require(a.model.clone(), "model")?;
    let params = load_model(&model_path)?;
    let system = a.system.system(
        params.output_dim() + 1,
        params.input_dim().saturating_sub(1),
    )?;
    let seed = a.common.seed.unwrap_or(0);
    let scenes = a.scenes.scenes(system.num_jammers, seed)?;
    let mode = a.featurization.map_or(Featurization::default(), Into::into);
    let strategies = scenes
        .iter()
        .map(|s| infer(&params, s, &system, mode))
        .collect::<Result<Vec<_>, _>>()?;
    write_strategies(&strategies, a.common.out.as_deref(), log)?;
    summarize(&strategies, a.common.out.as_deref(), log)
}

fn baseline_cmd(a: BaselineArgs, log: &mut dyn Write) -> CliResult {
    let scheme = require(a.scheme, "scheme")?;
    let seed = a.common.seed.unwrap_or(0);
    let scenes = a.scenes.scenes(a.system.jammers.unwrap_or(3), seed)?;
    let k = scenes.first().map_or(3, Scene::num_jammers);
    let system = a.system.system(8, k)?;
    let ao_cfg = a.ao.config()?;
    let strategies = scenes
        .iter()
        .enumerate()
        .map(|(i, s)| match scheme {
            SchemeArg::Fpv => fpv(s, &system),
            SchemeArg::Ao => ao(s, &system, &ao_cfg).map(|o| o.strategy),
            SchemeArg::Rpb => rpb(
                s,
                &system,
                &mut stream_rng(seed, RPB_STREAM_BASE + i as u64),
            ),
            SchemeArg::Learned => Err(Error::InvalidConfig(
                "the learned scheme runs through `infer`".into(),
            )),
        })
        .collect::<Result<Vec<_>, _>>()?;
    write_strategies(&strategies, a.common.out.as_deref(), log)?;
    summarize(&strategies, a.common.out.as_deref(), log)
}

fn load_params(path: &Path) -> CliResult<MlpParams> {
    Ok(load_model(path)?)
}

fn sweep_cmd(a: SweepArgs, log: &mut dyn Write) -> CliResult {
    let out = a.common.out.clone().unwrap_or_else(|| "sweep.csv".into());
    let variable: SweepVariable = a.variable.unwrap_or(VariableArg::Elements).into();
    let seed = a.common.seed.unwrap_or(0);
    let base = a.system.system(8, 3)?;
    let mut spec = SweepSpec::new(variable);
    spec.base = base.clone();
    spec.seed = seed;
    spec.ao = a.ao.config()?;
    spec.threads = a.knobs.threads.unwrap_or(1);
    if let Some(v) = a.values {
        spec.values = v;
    }
    if let Some(t) = a.trials {
        spec.trials = t;
    }
    if let Some(s) = a.schemes {
        spec.schemes = s.into_iter().map(Into::into).collect();
    }
    spec.learned = match &a.model {
        Some(path) => LearnedModel::Fixed {
            params: load_params(path)?,
            featurization: a
                .knobs
                .featurization
                .map_or(Featurization::default(), Into::into),
        },
        None => {
            let LearnedModel::Retrain(template) = spec.learned else {
                unreachable!("sweeps retrain by default")
            };
            LearnedModel::Retrain(a.knobs.config(base, seed, template))
        }
    };
    let rows = run_sweep(&spec)?;
    write_sweep_csv(&rows, &out)?;
    for r in &rows {
        writeln!(
            log,
            "{:>6}  {:<7} {:>8.3} dB  ±{:.3}  {:.3} ms",
            r.variable_value, r.scheme, r.mean_sinr_db, r.std_sinr_db, r.mean_runtime_ms
        )?;
    }
    writeln!(log, "wrote {} rows to {}", rows.len(), out.display())?;
    Ok(())
}

fn bench_cmd(a: BenchArgs, log: &mut dyn Write) -> CliResult {
    let out = a.common.out.clone().unwrap_or_else(|| "bench.csv".into());
    let mut spec = BenchSpec {
        seed: a.common.seed.unwrap_or(0),
        ao: a.ao.config()?,
        ..BenchSpec::default()
    };
    if let Some(v) = a.elements {
        spec.elements = v;
    }
    if let Some(v) = a.jammers {
        spec.jammers = v;
    }
    if let Some(l) = a.region {
        spec.base = spec.base.with_region(l);
    }
    if let Some(s) = a.scenes {
        spec.scenes = s;
    }
    if let Some(r) = a.repeats {
        spec.fast_repeats = r;
    }
    if let Some(s) = a.schemes {
        spec.schemes = s.into_iter().map(Into::into).collect();
    }
    if let Some(h) = a.hidden {
        spec.hidden = h;
    }
    if let Some(path) = &a.model {
        let params = load_params(path)?;
        let key = (
            params.output_dim() + 1,
            params.input_dim().saturating_sub(1),
        );
        let mode = a.featurization.map_or(Featurization::default(), Into::into);
        spec.models.push((key, params, mode));
    }
    let rows = bench_runtime(&spec)?;
    write_bench_csv(&rows, &out)?;
    for r in &rows {
        writeln!(
            log,
            "{:<7} N={:<3} K={:<2} mean {:>9.4} ms  p95 {:>9.4} ms",
            r.scheme, r.num_elements, r.num_jammers, r.mean_ms, r.p95_ms
        )?;
    }
    writeln!(log, "wrote {} rows to {}", rows.len(), out.display())?;
    Ok(())
}
