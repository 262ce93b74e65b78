//! Small fully connected network with hand-written backpropagation.
//!
//! The last layer's output is interpreted as spacing ratios and clamped to
//! `[MIN_RATIO, 1]` after its activation; clamped outputs pass no gradient.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::positioning::{SpacingRatios, MIN_RATIO};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `y`.
    fn derivative(self, z: f64, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        Self {
            input_dim,
            output_dim,
            activation,
        }
    }
}

/// Dense layer `y = act(W x + b)` with `W` stored row-major (output × input).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub spec: LayerSpec,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<Dense>,
    seed: u64,
}

/// Per-layer gradients with the same shapes as [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Values retained by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `inputs[l]` feeds layer `l`; the final entry is the unclamped output.
    activations: Vec<Vec<f64>>,
    pre_activations: Vec<Vec<f64>>,
    clamped: Vec<bool>,
}

impl ForwardCache {
    /// Network output before the ratio clamp.
    pub fn raw_output(&self) -> &[f64] {
        self.activations.last().expect("cache has an output")
    }
}

fn check_chain(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::InvalidConfig(
            "network needs at least one layer".into(),
        ));
    }
    for (i, s) in specs.iter().enumerate() {
        if s.input_dim == 0 || s.output_dim == 0 {
            return Err(Error::InvalidConfig(format!(
                "layer {i} has a zero dimension"
            )));
        }
    }
    for pair in specs.windows(2) {
        if pair[0].output_dim != pair[1].input_dim {
            return Err(Error::DimensionMismatch {
                context: "layer chaining",
                expected: pair[0].output_dim,
                found: pair[1].input_dim,
            });
        }
    }
    Ok(())
}

/// Glorot-uniform weights, zero biases.
pub fn init_params(specs: &[LayerSpec], seed: u64) -> Result<MlpParams> {
    check_chain(specs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let layers = specs
        .iter()
        .map(|&spec| {
            let limit = (6.0 / (spec.input_dim + spec.output_dim) as f64).sqrt();
            let weights = (0..spec.input_dim * spec.output_dim)
                .map(|_| rng.random_range(-limit..=limit))
                .collect();
            Dense {
                spec,
                weights,
                bias: vec![0.0; spec.output_dim],
            }
        })
        .collect();
    Ok(MlpParams { layers, seed })
}

impl MlpParams {
    /// Assembles parameters from explicit layers, checking shapes.
    pub fn from_layers(layers: Vec<Dense>, seed: u64) -> Result<Self> {
        let specs: Vec<_> = layers.iter().map(|l| l.spec).collect();
        check_chain(&specs)?;
        for l in &layers {
            let (i, o) = (l.spec.input_dim, l.spec.output_dim);
            if l.weights.len() != i * o {
                return Err(Error::DimensionMismatch {
                    context: "weight matrix",
                    expected: i * o,
                    found: l.weights.len(),
                });
            }
            if l.bias.len() != o {
                return Err(Error::DimensionMismatch {
                    context: "bias vector",
                    expected: o,
                    found: l.bias.len(),
                });
            }
        }
        Ok(Self { layers, seed })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").spec.output_dim
    }

    pub fn num_parameters(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.bias.len())
            .sum()
    }

    pub fn zero_grads(&self) -> Gradients {
        Gradients {
            layers: self
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    /// `θ ← θ − lr·g`. Nothing is modified if any gradient entry is non-finite.
    pub fn sgd_step(&mut self, grads: &Gradients, learning_rate: f64) -> Result<()> {
        grads.check_shapes(self)?;
        grads.check_finite()?;
        for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
            for (w, gw) in layer.weights.iter_mut().zip(&g.weights) {
                *w -= learning_rate * gw;
            }
            for (b, gb) in layer.bias.iter_mut().zip(&g.bias) {
                *b -= learning_rate * gb;
            }
        }
        Ok(())
    }
}

impl Gradients {
    fn check_shapes(&self, params: &MlpParams) -> Result<()> {
        if self.layers.len() != params.layers.len() {
            return Err(Error::DimensionMismatch {
                context: "gradient layer count",
                expected: params.layers.len(),
                found: self.layers.len(),
            });
        }
        for (g, l) in self.layers.iter().zip(&params.layers) {
            if g.weights.len() != l.weights.len() || g.bias.len() != l.bias.len() {
                return Err(Error::DimensionMismatch {
                    context: "gradient shape",
                    expected: l.weights.len() + l.bias.len(),
                    found: g.weights.len() + g.bias.len(),
                });
            }
        }
        Ok(())
    }

    pub fn check_finite(&self) -> Result<()> {
        for (i, g) in self.layers.iter().enumerate() {
            if g.weights.iter().chain(&g.bias).any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteGradient { layer: i });
            }
        }
        Ok(())
    }

    pub fn global_norm(&self) -> f64 {
        self.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Rescales so the global norm does not exceed `max_norm`.
    pub fn clip_global_norm(&mut self, max_norm: f64) {
        let norm = self.global_norm();
        if norm > max_norm && norm.is_finite() {
            self.scale(max_norm / norm);
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.iter_mut().for_each(|x| *x *= s);
    }

    /// `self += s·other`
    pub fn add_scaled(&mut self, other: &Gradients, s: f64) {
        for (a, b) in self.iter_mut().zip(other.iter()) {
            *a += s * b;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers
            .iter_mut()
            .flat_map(|l| l.weights.iter_mut().chain(l.bias.iter_mut()))
    }
}

pub fn forward(params: &MlpParams, features: &[f64]) -> Result<(SpacingRatios, ForwardCache)> {
    if features.len() != params.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "network input",
            expected: params.input_dim(),
            found: features.len(),
        });
    }
    let mut activations = Vec::with_capacity(params.layers.len() + 1);
    let mut pre_activations = Vec::with_capacity(params.layers.len());
    activations.push(features.to_vec());
    for layer in &params.layers {
        let x = activations.last().expect("non-empty");
        let cols = layer.spec.input_dim;
        let z: Vec<f64> = layer
            .weights
            .chunks_exact(cols)
            .zip(&layer.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b)
            .collect();
        let y = z
            .iter()
            .map(|&zi| layer.spec.activation.apply(zi))
            .collect();
        pre_activations.push(z);
        activations.push(y);
    }
    let out = activations.last().expect("non-empty");
    let clamped = out
        .iter()
        .map(|&r| !(MIN_RATIO..=1.0).contains(&r))
        .collect();
    let ratios = SpacingRatios::clamped(out.clone());
    Ok((
        ratios,
        ForwardCache {
            activations,
            pre_activations,
            clamped,
        },
    ))
}

/// Reverse-mode gradients of a scalar objective given `∂objective/∂ratios`.
pub fn backward(
    params: &MlpParams,
    cache: &ForwardCache,
    grad_wrt_ratios: &[f64],
) -> Result<Gradients> {
    let mut grads = params.zero_grads();
    backward_accumulate(params, cache, grad_wrt_ratios, 1.0, &mut grads)?;
    Ok(grads)
}

/// Adds `scale ×` the gradients for one sample into `grads`.
pub fn backward_accumulate(
    params: &MlpParams,
    cache: &ForwardCache,
    grad_wrt_ratios: &[f64],
    scale: f64,
    grads: &mut Gradients,
) -> Result<()> {
    if grad_wrt_ratios.len() != params.output_dim() {
        return Err(Error::DimensionMismatch {
            context: "output gradient",
            expected: params.output_dim(),
            found: grad_wrt_ratios.len(),
        });
    }
    if cache.pre_activations.len() != params.layers.len() {
        return Err(Error::DimensionMismatch {
            context: "forward cache",
            expected: params.layers.len(),
            found: cache.pre_activations.len(),
        });
    }
    grads.check_shapes(params)?;

    let mut upstream: Vec<f64> = grad_wrt_ratios
        .iter()
        .zip(&cache.clamped)
        .map(|(&g, &c)| if c { 0.0 } else { g * scale })
        .collect();

    for (l, layer) in params.layers.iter().enumerate().rev() {
        let z = &cache.pre_activations[l];
        let y = &cache.activations[l + 1];
        let x = &cache.activations[l];
        let delta: Vec<f64> = upstream
            .iter()
            .zip(z.iter().zip(y))
            .map(|(g, (&zi, &yi))| g * layer.spec.activation.derivative(zi, yi))
            .collect();
        let cols = layer.spec.input_dim;
        let g = &mut grads.layers[l];
        for (o, &d) in delta.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            g.bias[o] += d;
            for (gw, xi) in g.weights[o * cols..(o + 1) * cols].iter_mut().zip(x) {
                *gw += d * xi;
            }
        }
        if l > 0 {
            let mut next = vec![0.0; cols];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                for (n, w) in next
                    .iter_mut()
                    .zip(&layer.weights[o * cols..(o + 1) * cols])
                {
                    *n += d * w;
                }
            }
            upstream = next;
        }
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    layer_specs: Vec<LayerSpec>,
    seed: u64,
    weights: Vec<LayerWeights>,
}

#[derive(Serialize, Deserialize)]
struct LayerWeights {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

pub fn model_to_json(params: &MlpParams) -> String {
    let file = ModelFile {
        version: MODEL_VERSION,
        layer_specs: params.specs(),
        seed: params.seed,
        weights: params
            .layers
            .iter()
            .map(|l| LayerWeights {
                weights: l
                    .weights
                    .chunks_exact(l.spec.input_dim)
                    .map(<[f64]>::to_vec)
                    .collect(),
                bias: l.bias.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("model serializes")
}

pub fn model_from_json(text: &str) -> Result<MlpParams> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    if file.version != MODEL_VERSION {
        return Err(Error::ModelFormat(format!(
            "unsupported version {} (expected {MODEL_VERSION})",
            file.version
        )));
    }
    if file.layer_specs.len() != file.weights.len() {
        return Err(Error::ModelFormat(format!(
            "{} layer specs but {} weight blocks",
            file.layer_specs.len(),
            file.weights.len()
        )));
    }
    let mut layers = Vec::with_capacity(file.weights.len());
    for (i, (spec, w)) in file.layer_specs.into_iter().zip(file.weights).enumerate() {
        if w.weights.len() != spec.output_dim
            || w.weights.iter().any(|row| row.len() != spec.input_dim)
            || w.bias.len() != spec.output_dim
        {
            return Err(Error::ModelFormat(format!(
                "layer {i}: stored weights do not match declared {}x{}",
                spec.output_dim, spec.input_dim
            )));
        }
        layers.push(Dense {
            spec,
            weights: w.weights.concat(),
            bias: w.bias,
        });
    }
    MlpParams::from_layers(layers, file.seed).map_err(|e| Error::ModelFormat(e.to_string()))
}

pub fn save_model(params: &MlpParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(params) + "\n").map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpParams> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&text)
}
