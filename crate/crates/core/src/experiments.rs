//! Sweeps over the element count, region size and jammer count, and the
//! runtime benchmark. Every scheme at a sweep point is evaluated on the same
//! scene list; jammer-count sweeps use nested scenes (the scene for `K + 1`
//! extends the one for `K`).

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{to_db, Scene, Strategy};
use crate::baselines::{ao, fpv, fpv_layout, rpb, AoConfig};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::neural::{init_params, MlpParams};
use crate::training::{self, infer, stream_rng, Featurization, TrainConfig};

const SCENE_STREAM: u64 = 7;
const RPB_STREAM_BASE: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Learned,
    Ao,
    Fpv,
    Rpb,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Learned, Scheme::Ao, Scheme::Fpv, Scheme::Rpb];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Learned => "learned",
            Scheme::Ao => "ao",
            Scheme::Fpv => "fpv",
            Scheme::Rpb => "rpb",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown scheme {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    NumElements,
    RegionSize,
    NumJammers,
}

impl SweepVariable {
    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepVariable::NumElements => vec![4.0, 6.0, 8.0, 10.0, 12.0],
            SweepVariable::RegionSize => vec![3.5, 5.0, 7.0, 10.0, 14.0],
            SweepVariable::NumJammers => (1..=6).map(f64::from).collect(),
        }
    }

    /// `base` with the swept parameter replaced by `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let count = || {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!(
                    "{value} is not a valid count"
                )))
            }
        };
        let cfg = match self {
            SweepVariable::NumElements => base.clone().with_elements(count()?),
            SweepVariable::RegionSize => base.clone().with_region(value),
            SweepVariable::NumJammers => base.clone().with_jammers(count()?),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elements" | "num-elements" | "N" => Ok(Self::NumElements),
            "region" | "region-size" | "L" => Ok(Self::RegionSize),
            "jammers" | "num-jammers" | "K" => Ok(Self::NumJammers),
            other => Err(Error::Parse(format!("unknown sweep variable {other:?}"))),
        }
    }
}

/// Where the learned scheme's network comes from at each sweep point.
#[derive(Debug, Clone)]
pub enum LearnedModel {
    /// Train a fresh network per point; the template's `system` is replaced.
    Retrain(TrainConfig),
    /// Use one network everywhere; points whose dimensions do not match fail.
    Fixed {
        params: MlpParams,
        featurization: Featurization,
    },
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    pub base: SystemConfig,
    pub ao: AoConfig,
    pub learned: LearnedModel,
    /// Worker threads for scene evaluation; output does not depend on it
    /// except for the runtime column.
    pub threads: usize,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable) -> Self {
        Self {
            variable,
            values: variable.default_values(),
            trials: 200,
            schemes: Scheme::ALL.to_vec(),
            seed: 0,
            base: SystemConfig::default(),
            ao: AoConfig::default(),
            learned: LearnedModel::Retrain(TrainConfig {
                dataset_size: 10_000,
                epochs: 10,
                ..TrainConfig::default()
            }),
            threads: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig(
                "sweep needs at least one value".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("no schemes selected".into()));
        }
        self.ao.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variable_value: f64,
    pub scheme: Scheme,
    pub mean_sinr_db: f64,
    pub std_sinr_db: f64,
    pub mean_runtime_ms: f64,
    /// Linear SINR per trial, in scene order.
    pub sinrs: Vec<f64>,
}

impl SweepRow {
    pub fn mean_sinr(&self) -> f64 {
        mean(&self.sinrs)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (population form for a single value).
fn std_dev(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Paired evaluation scenes, each carrying `max_jammers` jammers.
pub fn sweep_scenes(trials: usize, max_jammers: usize, seed: u64) -> Vec<Scene> {
    let mut rng = stream_rng(seed, SCENE_STREAM);
    (0..trials)
        .map(|_| training::sample_scene(max_jammers, &mut rng))
        .collect()
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(pool.install(f))
    } else {
        Ok(f())
    }
}

/// Runs one scheme on one scene, returning the strategy and elapsed milliseconds.
fn run_scheme(
    scheme: Scheme,
    scene: &Scene,
    trial: usize,
    cfg: &SystemConfig,
    spec_seed: u64,
    ao_cfg: &AoConfig,
    model: Option<&(MlpParams, Featurization)>,
) -> Result<(Strategy, f64)> {
    let start = Instant::now();
    let strategy = match scheme {
        Scheme::Learned => {
            let (params, mode) = model.expect("learned scheme has a model");
            infer(params, scene, cfg, *mode)?
        }
        Scheme::Ao => ao(scene, cfg, ao_cfg)?.strategy,
        Scheme::Fpv => fpv(scene, cfg)?,
        Scheme::Rpb => rpb(
            scene,
            cfg,
            &mut stream_rng(spec_seed, RPB_STREAM_BASE + trial as u64),
        )?,
    };
    Ok((strategy, start.elapsed().as_secs_f64() * 1e3))
}

fn learned_model(spec: &SweepSpec, cfg: &SystemConfig) -> Result<(MlpParams, Featurization)> {
    match &spec.learned {
        LearnedModel::Fixed {
            params,
            featurization,
        } => {
            let want_in = cfg.num_jammers + 1;
            let want_out = cfg.num_elements.saturating_sub(1);
            if params.input_dim() != want_in || params.output_dim() != want_out {
                return Err(Error::DimensionMismatch {
                    context: "model vs. sweep point (inputs K+1, outputs N-1)",
                    expected: want_in * 1000 + want_out,
                    found: params.input_dim() * 1000 + params.output_dim(),
                });
            }
            Ok((params.clone(), *featurization))
        }
        LearnedModel::Retrain(template) => {
            let tc = TrainConfig {
                system: cfg.clone(),
                seed: spec.seed,
                threads: spec.threads,
                ..template.clone()
            };
            let (params, _) = training::train(&tc)?;
            Ok((params, tc.featurization))
        }
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let max_jammers = match spec.variable {
        SweepVariable::NumJammers => {
            spec.values
                .iter()
                .fold(spec.base.num_jammers as f64, |m, &v| m.max(v)) as usize
        }
        _ => spec.base.num_jammers,
    };
    let pool_scenes = sweep_scenes(spec.trials, max_jammers, spec.seed);
    let mut schemes = spec.schemes.clone();
    schemes.sort();
    schemes.dedup();

    let mut rows = Vec::new();
    for &value in &spec.values {
        let cfg = spec.variable.apply(&spec.base, value)?;
        let scenes: Vec<Scene> = pool_scenes
            .iter()
            .map(|s| s.truncated(cfg.num_jammers))
            .collect();
        let model = if schemes.contains(&Scheme::Learned) {
            Some(learned_model(spec, &cfg)?)
        } else {
            None
        };
        for &scheme in &schemes {
            if scheme == Scheme::Fpv && fpv_layout(&cfg).is_err() {
                continue;
            }
            let results: Vec<(Strategy, f64)> = with_pool(spec.threads, || {
                scenes
                    .par_iter()
                    .enumerate()
                    .map(|(i, s)| {
                        run_scheme(scheme, s, i, &cfg, spec.seed, &spec.ao, model.as_ref())
                    })
                    .collect::<Result<Vec<_>>>()
            })??;
            let sinrs: Vec<f64> = results.iter().map(|(s, _)| s.sinr).collect();
            let db: Vec<f64> = sinrs.iter().map(|&s| to_db(s)).collect();
            let times: Vec<f64> = results.iter().map(|(_, t)| *t).collect();
            rows.push(SweepRow {
                variable_value: value,
                scheme,
                mean_sinr_db: mean(&db),
                std_sinr_db: std_dev(&db),
                mean_runtime_ms: mean(&times),
                sinrs,
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let err = |e| Error::csv(path, e);
    w.write_record([
        "variable_value",
        "scheme",
        "mean_sinr_db",
        "std_sinr_db",
        "mean_runtime_ms",
    ])
    .map_err(err)?;
    for r in rows {
        w.write_record([
            r.variable_value.to_string(),
            r.scheme.to_string(),
            r.mean_sinr_db.to_string(),
            r.std_sinr_db.to_string(),
            r.mean_runtime_ms.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub elements: Vec<usize>,
    pub jammers: Vec<usize>,
    pub scenes: usize,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    pub base: SystemConfig,
    pub ao: AoConfig,
    /// Closed-form schemes are timed over this many back-to-back runs per sample.
    pub fast_repeats: usize,
    /// Networks keyed by `(N, K)`; missing entries get an untrained network of
    /// the default architecture, which costs the same to evaluate.
    pub models: Vec<((usize, usize), MlpParams, Featurization)>,
    pub hidden: Vec<usize>,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            elements: vec![8, 12],
            jammers: (1..=6).collect(),
            scenes: 100,
            schemes: Scheme::ALL.to_vec(),
            seed: 0,
            base: SystemConfig::default(),
            ao: AoConfig::default(),
            fast_repeats: 100,
            models: Vec::new(),
            hidden: TrainConfig::default().hidden,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scheme: Scheme,
    pub num_elements: usize,
    pub num_jammers: usize,
    pub mean_ms: f64,
    pub p95_ms: f64,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() as f64 * q).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

/// Single-threaded wall-clock timing of each scheme.
///
/// Learned and AO are timed per scene; FPV and RPB, being closed-form, are
/// timed per batch of `fast_repeats` runs. Each cell gets one untimed warm-up run.
pub fn bench_runtime(spec: &BenchSpec) -> Result<Vec<BenchRow>> {
    if spec.scenes == 0 || spec.fast_repeats == 0 {
        return Err(Error::InvalidConfig(
            "scenes and fast_repeats must be positive".into(),
        ));
    }
    let max_k = spec.jammers.iter().copied().max().unwrap_or(0);
    let pool = sweep_scenes(spec.scenes, max_k, spec.seed);
    let mut rows = Vec::new();
    for &n in &spec.elements {
        for &k in &spec.jammers {
            let cfg = spec.base.clone().with_elements(n).with_jammers(k);
            cfg.validate()?;
            let scenes: Vec<Scene> = pool.iter().map(|s| s.truncated(k)).collect();
            for &scheme in &spec.schemes {
                if scheme == Scheme::Fpv && fpv_layout(&cfg).is_err() {
                    continue;
                }
                let model = match scheme {
                    Scheme::Learned => Some(bench_model(spec, n, k)?),
                    _ => None,
                };
                let repeats = match scheme {
                    Scheme::Fpv | Scheme::Rpb => spec.fast_repeats,
                    _ => 1,
                };
                run_scheme(scheme, &scenes[0], 0, &cfg, spec.seed, &spec.ao, model.as_ref())?;
                let mut times = Vec::with_capacity(scenes.len());
                for (i, s) in scenes.iter().enumerate() {
                    let start = Instant::now();
                    for _ in 0..repeats {
                        run_scheme(scheme, s, i, &cfg, spec.seed, &spec.ao, model.as_ref())?;
                    }
                    times.push(start.elapsed().as_secs_f64() * 1e3);
                }
                let mean_ms = mean(&times);
                times.sort_by(f64::total_cmp);
                rows.push(BenchRow {
                    scheme,
                    num_elements: n,
                    num_jammers: k,
                    mean_ms,
                    p95_ms: percentile(&times, 0.95),
                });
            }
        }
    }
    Ok(rows)
}

fn bench_model(spec: &BenchSpec, n: usize, k: usize) -> Result<(MlpParams, Featurization)> {
    if let Some((_, p, f)) = spec.models.iter().find(|(key, _, _)| *key == (n, k)) {
        return Ok((p.clone(), *f));
    }
    let tc = TrainConfig {
        system: spec.base.clone().with_elements(n).with_jammers(k),
        hidden: spec.hidden.clone(),
        ..TrainConfig::default()
    };
    Ok((
        init_params(&tc.architecture(), spec.seed)?,
        tc.featurization,
    ))
}

pub fn write_bench_csv(rows: &[BenchRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let err = |e| Error::csv(path, e);
    w.write_record(["scheme", "N", "K", "mean_ms", "p95_ms"])
        .map_err(err)?;
    for r in rows {
        w.write_record([
            r.scheme.to_string(),
            r.num_elements.to_string(),
            r.num_jammers.to_string(),
            r.mean_ms.to_string(),
            r.p95_ms.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("xyz".parse::<Scheme>().is_err());
    }

    #[test]
    fn apply_rejects_fractional_counts() {
        let base = SystemConfig::default();
        assert!(SweepVariable::NumElements.apply(&base, 7.5).is_err());
        assert_eq!(
            SweepVariable::NumJammers
                .apply(&base, 5.0)
                .unwrap()
                .num_jammers,
            5
        );
        assert_eq!(
            SweepVariable::RegionSize
                .apply(&base, 10.0)
                .unwrap()
                .region_size,
            10.0
        );
    }

    #[test]
    fn percentile_picks_upper_rank() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.95), 95.0);
        assert_eq!(percentile(&[3.0], 0.95), 3.0);
    }

    #[test]
    fn region_sweep_drops_infeasible_fpv_points() {
        let mut spec = SweepSpec::new(SweepVariable::RegionSize);
        spec.trials = 3;
        spec.schemes = vec![Scheme::Fpv, Scheme::Rpb];
        let rows = run_sweep(&spec).unwrap();
        let fpv_values: Vec<f64> = rows
            .iter()
            .filter(|r| r.scheme == Scheme::Fpv)
            .map(|r| r.variable_value)
            .collect();
        assert_eq!(fpv_values, vec![7.0, 10.0, 14.0]);
        assert_eq!(rows.iter().filter(|r| r.scheme == Scheme::Rpb).count(), 5);
    }

    #[test]
    fn jammer_sweep_uses_nested_scenes() {
        let mut spec = SweepSpec::new(SweepVariable::NumJammers);
        spec.trials = 20;
        spec.schemes = vec![Scheme::Fpv, Scheme::Rpb];
        let rows = run_sweep(&spec).unwrap();
        for scheme in [Scheme::Fpv, Scheme::Rpb] {
            let per_k: Vec<&SweepRow> = rows.iter().filter(|r| r.scheme == scheme).collect();
            for pair in per_k.windows(2) {
                for (a, b) in pair[0].sinrs.iter().zip(&pair[1].sinrs) {
                    assert!(b <= a, "{scheme}: adding a jammer raised SINR");
                }
            }
        }
    }
}
