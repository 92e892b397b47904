use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::net::conv::ConvLayer;
use crate::net::loss::weighted_cross_entropy;
use crate::net::ModelConfig;
use crate::Scalar;

/// Fully connected layer; `weights` is outputs×inputs, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer<T> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> DenseLayer<T> {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self { inputs, outputs, weights: vec![T::zero(); inputs * outputs], bias: vec![T::zero(); outputs] }
    }

    fn forward(&self, x: &[T]) -> Vec<T> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                row.iter().zip(x).fold(self.bias[o], |acc, (&w, &v)| acc + w * v)
            })
            .collect()
    }

    fn backward(&self, x: &[T], d_out: &[T], grad: &mut DenseLayer<T>) -> Vec<T> {
        let mut d_in = vec![T::zero(); self.inputs];
        for (o, &g) in d_out.iter().enumerate() {
            grad.bias[o] += g;
            let row = o * self.inputs..(o + 1) * self.inputs;
            for ((gw, &w), (&xi, di)) in grad.weights[row.clone()].iter_mut().zip(&self.weights[row]).zip(x.iter().zip(&mut d_in)) {
                *gw += g * xi;
                *di += g * w;
            }
        }
        d_in
    }
}

/// Weights of the segment classifier, in declaration order: parallel
/// branches, sequential convolutions, hidden dense layers, output layer.
/// Each layer contributes its weight tensor followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    pub config: ModelConfig,
    pub input_channels: usize,
    pub input_length: usize,
    pub branches: Vec<ConvLayer<T>>,
    pub seq: Vec<ConvLayer<T>>,
    pub dense: Vec<DenseLayer<T>>,
    pub output: DenseLayer<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn zeros(config: &ModelConfig, input_channels: usize, input_length: usize) -> Result<Self> {
        config.validate()?;
        if input_channels == 0 || input_length == 0 {
            return Err(Error::ShapeMismatch("model input must be non-empty".into()));
        }
        let branches: Vec<_> = config
            .dilations
            .iter()
            .map(|&d| ConvLayer::zeros(input_channels, config.parallel_filters, config.parallel_kernel, d))
            .collect();
        let mut channels = config.parallel_filters * config.dilations.len();
        let mut seq = Vec::new();
        for (&k, &f) in config.seq_kernels.iter().zip(&config.seq_filters) {
            seq.push(ConvLayer::zeros(channels, f, k, 1));
            channels = f;
        }
        let mut width = channels * input_length;
        let mut dense = Vec::new();
        for &units in &config.dense_units {
            dense.push(DenseLayer::zeros(width, units));
            width = units;
        }
        let output = DenseLayer::zeros(width, config.classes);
        Ok(Self { config: config.clone(), input_channels, input_length, branches, seq, dense, output })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(config: &ModelConfig, input_channels: usize, input_length: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        let mut p = Self::zeros(config, input_channels, input_length)?;
        let mut fill = |w: &mut [T], fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            w.iter_mut().for_each(|v| *v = T::of(rng.random_range(-limit..=limit)));
        };
        for layer in p.branches.iter_mut().chain(p.seq.iter_mut()) {
            let (fi, fo) = (layer.fan_in(), layer.fan_out());
            fill(&mut layer.weights, fi, fo);
        }
        for layer in p.dense.iter_mut().chain(std::iter::once(&mut p.output)) {
            let (fi, fo) = (layer.inputs, layer.outputs);
            fill(&mut layer.weights, fi, fo);
        }
        Ok(p)
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(&self.config, self.input_channels, self.input_length).expect("shape already validated")
    }

    pub fn tensors(&self) -> Vec<&[T]> {
        let mut out: Vec<&[T]> = Vec::new();
        for l in self.branches.iter().chain(&self.seq) {
            out.push(&l.weights);
            out.push(&l.bias);
        }
        for l in self.dense.iter().chain(std::iter::once(&self.output)) {
            out.push(&l.weights);
            out.push(&l.bias);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        let mut out: Vec<&mut [T]> = Vec::new();
        for l in self.branches.iter_mut().chain(self.seq.iter_mut()) {
            out.push(&mut l.weights);
            out.push(&mut l.bias);
        }
        for l in self.dense.iter_mut().chain(std::iter::once(&mut self.output)) {
            out.push(&mut l.weights);
            out.push(&mut l.bias);
        }
        out
    }

    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        let mut push = |layer: String| {
            names.push(format!("{layer}.weight"));
            names.push(format!("{layer}.bias"));
        };
        for (i, d) in self.config.dilations.iter().enumerate() {
            push(format!("branch{i}_d{d}"));
        }
        (0..self.seq.len()).for_each(|i| push(format!("seq{i}")));
        (0..self.dense.len()).for_each(|i| push(format!("dense{i}")));
        push("output".into());
        names
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// `λ · Σ w²` over the hidden dense-layer weights.
    pub fn l2_penalty(&self) -> T {
        let lambda = T::of(self.config.l2_lambda);
        lambda * self.dense.iter().flat_map(|l| &l.weights).map(|&w| w * w).sum::<T>()
    }

    pub fn embedding_dim(&self) -> usize {
        self.config.embedding_channels() * self.input_length
    }

    pub(crate) fn check_input(&self, input: &Array2<T>) -> Result<Vec<T>> {
        if input.dim() != (self.input_channels, self.input_length) {
            return Err(Error::ShapeMismatch(format!(
                "model expects {}x{} input, got {}x{}",
                self.input_channels,
                self.input_length,
                input.nrows(),
                input.ncols()
            )));
        }
        Ok(input.iter().copied().collect())
    }

    pub(crate) fn forward_cached(&self, x: &[T], mut dropout: Option<&mut ChaCha8Rng>) -> Cache<T> {
        let len = self.input_length;
        let slope = T::of(self.config.leaky_slope);
        let leaky = |z: &[T]| z.iter().map(|&v| if v > T::zero() { v } else { slope * v }).collect::<Vec<T>>();

        let branch_z: Vec<Vec<T>> = self.branches.iter().map(|b| b.forward(x, len)).collect();
        let mut current: Vec<T> = branch_z.iter().flat_map(|z| leaky(z)).collect();

        let mut seq_in = Vec::with_capacity(self.seq.len());
        let mut seq_z = Vec::with_capacity(self.seq.len());
        for layer in &self.seq {
            let z = layer.forward(&current, len);
            let a = leaky(&z);
            seq_in.push(std::mem::replace(&mut current, a));
            seq_z.push(z);
        }
        let flat = current.clone();

        let p_drop = self.config.dropout;
        let mut dense_in = Vec::with_capacity(self.dense.len());
        let mut dense_z = Vec::with_capacity(self.dense.len());
        let mut masks = Vec::with_capacity(self.dense.len());
        for layer in &self.dense {
            let z = layer.forward(&current);
            let mut a: Vec<T> = z.iter().map(|&v| v.max(T::zero())).collect();
            let mask = match dropout.as_deref_mut() {
                Some(rng) if p_drop > 0.0 => {
                    let keep = T::of(1.0 / (1.0 - p_drop));
                    let m: Vec<T> = (0..a.len()).map(|_| if rng.random::<f64>() < p_drop { T::zero() } else { keep }).collect();
                    a.iter_mut().zip(&m).for_each(|(v, &k)| *v *= k);
                    Some(m)
                }
                _ => None,
            };
            dense_in.push(std::mem::replace(&mut current, a));
            dense_z.push(z);
            masks.push(mask);
        }
        let logits = self.output.forward(&current);
        let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
        let exps: Vec<T> = logits.iter().map(|&v| (v - max).exp()).collect();
        let total: T = exps.iter().copied().sum();
        let probs = exps.into_iter().map(|e| e / total).collect();
        Cache { branch_z, seq_in, seq_z, flat, dense_in, dense_z, masks, output_in: current, probs }
    }

    /// Gradient of `class_weight · -ln p[label] + λ Σ w²` for one sample.
    pub(crate) fn backward_cached(&self, x: &[T], cache: &Cache<T>, label: usize, class_weight: T) -> ModelParams<T> {
        let len = self.input_length;
        let slope = T::of(self.config.leaky_slope);
        let mut grad = self.zeros_like();

        let d_logits: Vec<T> = cache
            .probs
            .iter()
            .enumerate()
            .map(|(c, &p)| class_weight * if c == label { p - T::one() } else { p })
            .collect();
        let mut d = self.output.backward(&cache.output_in, &d_logits, &mut grad.output);

        for j in (0..self.dense.len()).rev() {
            let dz: Vec<T> = d
                .iter()
                .zip(&cache.dense_z[j])
                .enumerate()
                .map(|(i, (&g, &z))| {
                    let keep = cache.masks[j].as_ref().map_or(T::one(), |m| m[i]);
                    if z > T::zero() { g * keep } else { T::zero() }
                })
                .collect();
            d = self.dense[j].backward(&cache.dense_in[j], &dz, &mut grad.dense[j]);
        }

        let leaky_grad = |d: &[T], z: &[T]| -> Vec<T> {
            d.iter().zip(z).map(|(&g, &v)| if v > T::zero() { g } else { slope * g }).collect()
        };
        for s in (0..self.seq.len()).rev() {
            let dz = leaky_grad(&d, &cache.seq_z[s]);
            d = self.seq[s].backward(&cache.seq_in[s], len, &dz, &mut grad.seq[s], true).expect("input gradient requested");
        }

        let width = self.config.parallel_filters * len;
        for (b, layer) in self.branches.iter().enumerate() {
            let dz = leaky_grad(&d[b * width..(b + 1) * width], &cache.branch_z[b]);
            layer.backward(x, len, &dz, &mut grad.branches[b], false);
        }

        let two_lambda = T::of(2.0 * self.config.l2_lambda);
        for (g, p) in grad.dense.iter_mut().zip(&self.dense) {
            g.weights.iter_mut().zip(&p.weights).for_each(|(gw, &w)| *gw += two_lambda * w);
        }
        grad
    }
}

pub(crate) struct Cache<T> {
    branch_z: Vec<Vec<T>>,
    seq_in: Vec<Vec<T>>,
    seq_z: Vec<Vec<T>>,
    pub(crate) flat: Vec<T>,
    dense_in: Vec<Vec<T>>,
    dense_z: Vec<Vec<T>>,
    masks: Vec<Option<Vec<T>>>,
    output_in: Vec<T>,
    pub(crate) probs: Vec<T>,
}

/// Class probabilities for one C×L input.
pub fn model_forward<T: Scalar>(params: &ModelParams<T>, input: &Array2<T>) -> Result<Vec<T>> {
    let x = params.check_input(input)?;
    Ok(params.forward_cached(&x, None).probs)
}

/// Loss and exact gradients of `class_weight · -ln p[label]` plus the L2
/// penalty, with respect to every parameter.
pub fn model_backward<T: Scalar>(
    params: &ModelParams<T>,
    input: &Array2<T>,
    label: usize,
    class_weight: T,
) -> Result<(T, ModelParams<T>)> {
    let x = params.check_input(input)?;
    if label >= params.config.classes {
        return Err(Error::ShapeMismatch(format!("label {label} out of range")));
    }
    let cache = params.forward_cached(&x, None);
    let loss = weighted_cross_entropy(&cache.probs, label, class_weight)?.loss + params.l2_penalty();
    Ok((loss, params.backward_cached(&x, &cache, label, class_weight)))
}

/// The flattened output of the last convolution, i.e. the segment embedding.
pub fn embed_segment<T: Scalar>(params: &ModelParams<T>, input: &Array2<T>) -> Result<Vec<T>> {
    let x = params.check_input(input)?;
    Ok(params.forward_cached(&x, None).flat)
}
