//! Unsupervised training of the positioning network.
//!
//! Each sample runs angles → features → network → spacing ratios → layout →
//! closed-form beamformer, and the loss is the reciprocal of the resulting
//! optimal SINR. Gradients are chained by hand back through every stage.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::{sinr_and_position_gradient, to_db, Scene, Strategy};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::neural::{
    backward_accumulate, forward, init_params, Activation, Gradients, LayerSpec, MlpParams,
};
use crate::positioning::{positions_jacobian, ratios_to_positions};

/// RNG stream for the training set; held-out scenes and shuffles use others.
const TRAIN_STREAM: u64 = 0;
const HOLDOUT_STREAM: u64 = 1;
const SHUFFLE_STREAM_BASE: u64 = 1 << 32;

/// How a scene is encoded as network input. The source angle always comes first.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Featurization {
    /// `θ / π` for every angle.
    #[default]
    NormalizedAngle,
    /// `cos θ` for every angle.
    Cosine,
}

impl std::str::FromStr for Featurization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized-angle" | "angle" => Ok(Self::NormalizedAngle),
            "cosine" | "cos" => Ok(Self::Cosine),
            other => Err(Error::Parse(format!("unknown featurization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub system: SystemConfig,
    pub dataset_size: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub featurization: Featurization,
    /// Widths of the ReLU layers between input and output.
    pub hidden: Vec<usize>,
    /// Heavy-ball momentum coefficient; `None` is plain SGD.
    pub momentum: Option<f64>,
    /// Global gradient-norm cap.
    pub clip_norm: Option<f64>,
    /// When set, every scene uses this source angle.
    pub fixed_source_angle: Option<f64>,
    /// Worker threads for per-sample gradients; results do not depend on it.
    pub threads: usize,
    /// Fail when the last epoch's mean SINR is below the first epoch's.
    pub require_progress: bool,
    /// Zero the output layer after initialization so training starts from
    /// the fixed-array geometry (every ratio 0.5).
    pub start_at_fixed_array: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::default(),
            dataset_size: 100_000,
            batch_size: 100,
            learning_rate: 1e-3,
            epochs: 20,
            seed: 0,
            featurization: Featurization::default(),
            hidden: vec![128, 128],
            momentum: None,
            clip_norm: Some(10.0),
            fixed_source_angle: None,
            threads: 1,
            require_progress: true,
            start_at_fixed_array: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.system.num_elements < 2 {
            return bad("training needs at least two elements");
        }
        if self.batch_size == 0 || self.batch_size > self.dataset_size {
            return bad("batch_size must be in 1..=dataset_size");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return bad("learning_rate must be finite and non-negative");
        }
        if self.hidden.contains(&0) {
            return bad("hidden widths must be positive");
        }
        if let Some(m) = self.momentum {
            if !(0.0..1.0).contains(&m) {
                return bad("momentum must lie in [0, 1)");
            }
        }
        if let Some(a) = self.fixed_source_angle {
            if !(0.0..=PI).contains(&a) {
                return bad("fixed_source_angle must lie in [0, π]");
            }
        }
        Ok(())
    }

    /// Input (K+1) → hidden ReLU layers → N−1 sigmoid outputs.
    pub fn architecture(&self) -> Vec<LayerSpec> {
        let mut dims = vec![self.system.num_jammers + 1];
        dims.extend(&self.hidden);
        dims.push(self.system.num_elements - 1);
        let last = dims.len() - 2;
        dims.windows(2)
            .enumerate()
            .map(|(i, d)| {
                let act = if i == last {
                    Activation::Sigmoid
                } else {
                    Activation::Relu
                };
                LayerSpec::new(d[0], d[1], act)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_loss: f64,
    /// Mean over samples of `10·log₁₀ η`.
    pub mean_sinr_db: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let io = |e| Error::csv(path, e);
        w.write_record(["epoch", "mean_loss", "mean_sinr_db", "seconds"])
            .map_err(io)?;
        for e in &self.epochs {
            w.write_record([
                e.epoch.to_string(),
                e.mean_loss.to_string(),
                e.mean_sinr_db.to_string(),
                e.seconds.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Source and jammer angles drawn independently and uniformly on `[0, π]`.
pub fn sample_scene<R: Rng + ?Sized>(num_jammers: usize, rng: &mut R) -> Scene {
    sample_scene_with_source(num_jammers, None, rng)
}

pub fn sample_scene_with_source<R: Rng + ?Sized>(
    num_jammers: usize,
    fixed_source: Option<f64>,
    rng: &mut R,
) -> Scene {
    let mut draw = || rng.random_range(0.0..=PI);
    let source = match fixed_source {
        Some(a) => a,
        None => draw(),
    };
    let jammers = (0..num_jammers).map(|_| draw()).collect();
    Scene::new(source, jammers).expect("sampled angles lie in [0, π]")
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Deterministic scene list for a seed.
pub fn generate_scenes(
    count: usize,
    num_jammers: usize,
    fixed_source: Option<f64>,
    seed: u64,
) -> Vec<Scene> {
    let mut rng = stream_rng(seed, TRAIN_STREAM);
    (0..count)
        .map(|_| sample_scene_with_source(num_jammers, fixed_source, &mut rng))
        .collect()
}

/// Held-out scenes from the same distribution, disjoint stream from [`generate_scenes`].
pub fn holdout_scenes(
    count: usize,
    num_jammers: usize,
    fixed_source: Option<f64>,
    seed: u64,
) -> Vec<Scene> {
    let mut rng = stream_rng(seed, HOLDOUT_STREAM);
    (0..count)
        .map(|_| sample_scene_with_source(num_jammers, fixed_source, &mut rng))
        .collect()
}

pub fn featurize(scene: &Scene, mode: Featurization) -> Vec<f64> {
    scene
        .angles()
        .map(|a| match mode {
            Featurization::NormalizedAngle => a / PI,
            Featurization::Cosine => a.cos(),
        })
        .collect()
}

/// Forward pass for one scene plus, optionally, `scale × ∂(1/η)/∂θ` added into `grads`.
fn sample_pass(
    params: &MlpParams,
    scene: &Scene,
    system: &SystemConfig,
    mode: Featurization,
    grads: Option<(&mut Gradients, f64)>,
) -> Result<f64> {
    let features = featurize(scene, mode);
    let (ratios, cache) = forward(params, &features)?;
    let placed = ratios_to_positions(&ratios, system)?;
    let (eta, grad_x) = sinr_and_position_gradient(&placed.layout, scene, system)?;
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::NonFiniteLoss {
            loss: 1.0 / eta,
            scene: scene.clone(),
        });
    }
    if let Some((grads, scale)) = grads {
        let jac = positions_jacobian(&ratios, system)?;
        let d_loss = -1.0 / (eta * eta);
        let grad_r: Vec<f64> = jac
            .transpose_mul(&grad_x)
            .into_iter()
            .map(|g| g * d_loss)
            .collect();
        backward_accumulate(params, &cache, &grad_r, scale, grads)?;
    }
    Ok(eta)
}

struct BatchResult {
    loss: f64,
    grads: Gradients,
    sinrs: Vec<f64>,
}

fn batch_pass(
    params: &MlpParams,
    batch: &[&Scene],
    system: &SystemConfig,
    mode: Featurization,
    pool: Option<&rayon::ThreadPool>,
) -> Result<BatchResult> {
    if batch.is_empty() {
        return Err(Error::InvalidConfig("empty batch".into()));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grads = params.zero_grads();
    let sinrs = match pool {
        None => batch
            .iter()
            .map(|s| sample_pass(params, s, system, mode, Some((&mut grads, scale))))
            .collect::<Result<Vec<_>>>()?,
        Some(pool) => {
            let per_sample: Vec<(f64, Gradients)> = pool.install(|| {
                batch
                    .par_iter()
                    .map(|s| {
                        let mut g = params.zero_grads();
                        sample_pass(params, s, system, mode, Some((&mut g, scale)))
                            .map(|eta| (eta, g))
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            // Fixed-order reduction keeps results bitwise identical to the serial path.
            per_sample
                .into_iter()
                .map(|(eta, g)| {
                    grads.add_scaled(&g, 1.0);
                    eta
                })
                .collect()
        }
    };
    let loss = sinrs.iter().map(|eta| 1.0 / eta).sum::<f64>() * scale;
    Ok(BatchResult { loss, grads, sinrs })
}

/// Mean reciprocal-SINR loss over `batch` and its gradient.
pub fn loss_and_grads(
    params: &MlpParams,
    batch: &[Scene],
    cfg: &TrainConfig,
) -> Result<(f64, Gradients)> {
    let refs: Vec<&Scene> = batch.iter().collect();
    let r = batch_pass(params, &refs, &cfg.system, cfg.featurization, None)?;
    Ok((r.loss, r.grads))
}

struct Optimizer {
    learning_rate: f64,
    momentum: Option<(f64, Gradients)>,
}

impl Optimizer {
    fn new(cfg: &TrainConfig, params: &MlpParams) -> Self {
        Self {
            learning_rate: cfg.learning_rate,
            momentum: cfg.momentum.map(|m| (m, params.zero_grads())),
        }
    }

    fn step(&mut self, params: &mut MlpParams, grads: &Gradients) -> Result<()> {
        match &mut self.momentum {
            None => params.sgd_step(grads, self.learning_rate),
            Some((mu, velocity)) => {
                grads.check_finite()?;
                velocity.scale(*mu);
                velocity.add_scaled(grads, 1.0);
                params.sgd_step(velocity, self.learning_rate)
            }
        }
    }
}

/// Trains on a freshly generated dataset of `cfg.dataset_size` scenes.
pub fn train(cfg: &TrainConfig) -> Result<(MlpParams, TrainHistory)> {
    cfg.validate()?;
    let scenes = generate_scenes(
        cfg.dataset_size,
        cfg.system.num_jammers,
        cfg.fixed_source_angle,
        cfg.seed,
    );
    train_on(cfg, &scenes)
}

/// Trains on a given dataset. `cfg.dataset_size` is ignored in favour of `scenes.len()`.
pub fn train_on(cfg: &TrainConfig, scenes: &[Scene]) -> Result<(MlpParams, TrainHistory)> {
    let mut cfg = cfg.clone();
    cfg.dataset_size = scenes.len();
    cfg.validate()?;
    if let Some(s) = scenes
        .iter()
        .find(|s| s.num_jammers() != cfg.system.num_jammers)
    {
        return Err(Error::DimensionMismatch {
            context: "jammers per scene",
            expected: cfg.system.num_jammers,
            found: s.num_jammers(),
        });
    }
    let pool = if cfg.threads > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?,
        )
    } else {
        None
    };

    let mut params = init_params(&cfg.architecture(), cfg.seed)?;
    if cfg.start_at_fixed_array {
        if let Some(last) = params.layers_mut().last_mut() {
            last.weights.fill(0.0);
        }
    }
    let mut opt = Optimizer::new(&cfg, &params);
    let mut history = TrainHistory::default();
    let steps = scenes.len() / cfg.batch_size;
    let mut order: Vec<usize> = (0..scenes.len()).collect();

    for epoch in 0..cfg.epochs {
        let start = Instant::now();
        order.shuffle(&mut stream_rng(
            cfg.seed,
            SHUFFLE_STREAM_BASE + epoch as u64,
        ));
        let mut loss_sum = 0.0;
        let mut db_sum = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks_exact(cfg.batch_size).take(steps) {
            let batch: Vec<&Scene> = chunk.iter().map(|&i| &scenes[i]).collect();
            let step = batch_pass(
                &params,
                &batch,
                &cfg.system,
                cfg.featurization,
                pool.as_ref(),
            )
            .and_then(|mut r| {
                if !r.loss.is_finite() {
                    return Err(Error::NonFiniteLoss {
                        loss: r.loss,
                        scene: batch[0].clone(),
                    });
                }
                if let Some(max) = cfg.clip_norm {
                    r.grads.clip_global_norm(max);
                }
                opt.step(&mut params, &r.grads)?;
                Ok(r)
            });
            let r = match step {
                Ok(r) => r,
                Err(e) => {
                    return Err(Error::Diverged {
                        epoch,
                        history,
                        source: Box::new(e),
                    })
                }
            };
            loss_sum += r.loss * batch.len() as f64;
            db_sum += r.sinrs.iter().map(|&s| to_db(s)).sum::<f64>();
            seen += batch.len();
        }
        history.epochs.push(EpochStats {
            epoch: epoch + 1,
            mean_loss: loss_sum / seen as f64,
            mean_sinr_db: db_sum / seen as f64,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    if cfg.require_progress {
        let first = history.epochs.first().map(|e| e.mean_sinr_db);
        let last = history.epochs.last().map(|e| e.mean_sinr_db);
        if let (Some(first_db), Some(last_db)) = (first, last) {
            if last_db < first_db {
                return Err(Error::NoProgress {
                    first_db,
                    last_db,
                    history,
                });
            }
        }
    }
    Ok((params, history))
}

/// Single forward pass, layout construction and closed-form beamforming.
pub fn infer(
    params: &MlpParams,
    scene: &Scene,
    cfg: &SystemConfig,
    mode: Featurization,
) -> Result<Strategy> {
    let expected = cfg.num_elements.saturating_sub(1);
    if params.output_dim() != expected {
        return Err(Error::DimensionMismatch {
            context: "network output vs. element count",
            expected,
            found: params.output_dim(),
        });
    }
    let (ratios, _) = forward(params, &featurize(scene, mode))?;
    let placed = ratios_to_positions(&ratios, cfg)?;
    Strategy::for_layout(placed.layout, scene, cfg)
}

/// Optimal SINR achieved by the network on each scene.
pub fn evaluate(
    params: &MlpParams,
    scenes: &[Scene],
    cfg: &SystemConfig,
    mode: Featurization,
) -> Result<Vec<f64>> {
    scenes
        .iter()
        .map(|s| sample_pass(params, s, cfg, mode, None))
        .collect()
}

pub fn write_scenes_csv(
    scenes: &[Scene],
    num_jammers: usize,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let header: Vec<String> = (0..=num_jammers).map(|k| format!("theta{k}")).collect();
    w.write_record(&header).map_err(|e| Error::csv(path, e))?;
    for s in scenes {
        if s.num_jammers() != num_jammers {
            return Err(Error::DimensionMismatch {
                context: "jammers per scene",
                expected: num_jammers,
                found: s.num_jammers(),
            });
        }
        w.write_record(s.angles().map(|a| a.to_string()))
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_scenes_csv(path: impl AsRef<Path>) -> Result<Vec<Scene>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers = r.headers().map_err(|e| Error::csv(path, e))?.clone();
    for (k, h) in headers.iter().enumerate() {
        if h != format!("theta{k}") {
            return Err(Error::Parse(format!(
                "{}: column {k} is {h:?}, expected theta{k}",
                path.display()
            )));
        }
    }
    let mut scenes = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let angles = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("{} row {}: {e}", path.display(), row + 1)))?;
        scenes.push(Scene::from_angles(&angles)?);
    }
    Ok(scenes)
}
