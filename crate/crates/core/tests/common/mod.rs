//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use acfkit::net::{model_forward, ModelConfig, ModelParams};
use acfkit::signal::Class;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Loss recomputed from the forward pass only: `-w ln p[label] + λ Σ_dense w²`.
pub fn loss_by_forward(params: &ModelParams<f64>, x: &Array2<f64>, label: usize, weight: f64) -> f64 {
    let probs = model_forward(params, x).unwrap();
    let l2: f64 = params.dense.iter().flat_map(|l| &l.weights).map(|w| w * w).sum();
    -weight * probs[label].ln() + params.config.l2_lambda * l2
}

/// Central finite differences of [`loss_by_forward`] for every parameter,
/// in declaration order.
pub fn finite_difference_gradient(params: &ModelParams<f64>, x: &Array2<f64>, label: usize, weight: f64, eps: f64) -> Vec<Vec<f64>> {
    let shapes: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
    let mut work = params.clone();
    let mut out = Vec::with_capacity(shapes.len());
    for (t, &len) in shapes.iter().enumerate() {
        let mut g = Vec::with_capacity(len);
        for i in 0..len {
            let orig = work.tensors()[t][i];
            work.tensors_mut()[t][i] = orig + eps;
            let up = loss_by_forward(&work, x, label, weight);
            work.tensors_mut()[t][i] = orig - eps;
            let down = loss_by_forward(&work, x, label, weight);
            work.tensors_mut()[t][i] = orig;
            g.push((up - down) / (2.0 * eps));
        }
        out.push(g);
    }
    out
}

/// All-pairs Mann–Whitney AUC with half credit for ties.
pub fn auc_all_pairs(labels: &[Class], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, li) in labels.iter().enumerate() {
        if *li != Class::Depressed {
            continue;
        }
        for (j, lj) in labels.iter().enumerate() {
            if *lj != Class::NotDepressed {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Smallest |pre-activation| over every rectified unit, recomputed layer by
/// layer from the public parameters. Finite differences are only meaningful
/// when no unit sits within the perturbation of its kink.
pub fn min_abs_preactivation(params: &ModelParams<f64>, x: &Array2<f64>) -> f64 {
    let len = params.input_length;
    let slope = params.config.leaky_slope;
    let flat: Vec<f64> = x.iter().copied().collect();
    let mut margin = f64::INFINITY;
    let mut track = |z: &[f64]| z.iter().for_each(|v| margin = margin.min(v.abs()));
    let leaky = |z: &[f64]| z.iter().map(|&v| if v > 0.0 { v } else { slope * v }).collect::<Vec<_>>();

    let mut current = Vec::new();
    for b in &params.branches {
        let z = b.forward(&flat, len);
        track(&z);
        current.extend(leaky(&z));
    }
    for layer in &params.seq {
        let z = layer.forward(&current, len);
        track(&z);
        current = leaky(&z);
    }
    for layer in &params.dense {
        let z: Vec<f64> = (0..layer.outputs)
            .map(|o| layer.bias[o] + (0..layer.inputs).map(|i| layer.weights[o * layer.inputs + i] * current[i]).sum::<f64>())
            .collect();
        track(&z);
        current = z.iter().map(|v| v.max(0.0)).collect();
    }
    margin
}

/// A small network and a random input of the matching shape, redrawn until
/// every rectified unit is at least `1e-3` away from its kink.
pub fn random_net(cfg: &ModelConfig, channels: usize, len: usize, seed: u64) -> (ModelParams<f64>, Array2<f64>) {
    for attempt in 0..10_000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(10_007).wrapping_add(attempt));
        let mut params = ModelParams::init(cfg, channels, len, &mut rng).unwrap();
        // Non-zero biases so every layer's bias gradient is exercised.
        for t in params.tensors_mut() {
            if t.len() <= 16 {
                t.iter_mut().for_each(|b| *b = rng.random_range(-0.1..0.1));
            }
        }
        let x = Array2::from_shape_fn((channels, len), |_| rng.random_range(-1.0..1.0));
        if min_abs_preactivation(&params, &x) >= 1e-3 {
            return (params, x);
        }
    }
    panic!("no kink-free evaluation point found for seed {seed}");
}

/// Net sizes used for gradient checks: (name, config, input channels, input length).
pub fn gradcheck_sizes() -> Vec<(&'static str, ModelConfig, usize, usize)> {
    vec![
        (
            "narrow",
            ModelConfig { parallel_filters: 2, seq_filters: vec![2, 2], dense_units: vec![4, 3], ..Default::default() },
            4,
            16,
        ),
        ("desk", ModelConfig::default(), 4, 32),
        (
            "wide-input",
            ModelConfig { parallel_filters: 3, seq_filters: vec![4, 3], dense_units: vec![6, 4], ..Default::default() },
            9,
            21,
        ),
    ]
}
