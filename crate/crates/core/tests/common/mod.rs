//! Helpers shared by the integration test targets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tdsa_core::corpus::Label;
use tdsa_core::recurrent::*;

/// Worst elementwise relative error between backprop and central differences.
pub fn gradient_check(arch: Architecture, hidden: usize, steps: usize, seed: u64) -> f64 {
    let input_dim = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Large weights so every gate is away from its linear regime.
    let params = LstmParams::init(arch, input_dim, hidden, seed, 0.5);
    let sides = (0..arch.sides())
        .map(|_| (0..steps).map(|_| (0..input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect())
        .collect();
    let input = ModelInput { sides };
    let label = Label::Neutral;
    let (_, grads) = loss_and_gradients(&params, &input, label).unwrap();
    let analytic: Vec<Vec<f64>> = grads.tensors().into_iter().map(|(_, t)| t.to_vec()).collect();

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (t, tensor) in analytic.iter().enumerate() {
        for k in 0..tensor.len() {
            let mut plus = params.clone();
            plus.tensors_mut()[t][k] += h;
            let mut minus = params.clone();
            minus.tensors_mut()[t][k] -= h;
            let numeric = (loss(&plus, &input, label).unwrap() - loss(&minus, &input, label).unwrap()) / (2.0 * h);
            let a = tensor[k];
            // Below 1e-6 the central difference is dominated by rounding (about
            // 1e-11 here), so tiny gradients are held to an absolute 1e-10.
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
        }
    }
    worst
}

/// Three classes, each marked by `signal` on its own input channel at the
/// last step; `noise` adds uniform distractor mass on every channel.
pub fn toy_task(n_per_class: usize, signal: f64, noise: f64, seed: u64) -> DenseExamples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = DenseExamples::default();
    for i in 0..3 * n_per_class {
        let class = i % 3;
        let steps: Vec<Vec<f64>> = (0..4)
            .map(|t| {
                (0..3)
                    .map(|c| {
                        let mark = if c == class && t == 3 { signal } else { 0.0 };
                        mark + noise * rng.gen_range(-1.0..1.0)
                    })
                    .collect()
            })
            .collect();
        data.inputs.push(ModelInput { sides: vec![steps] });
        data.labels.push(Label::from_index(class).unwrap());
    }
    data
}
