mod common;

use acfkit::net::model_backward;
use common::{finite_difference_gradient, gradcheck_sizes, random_net};

#[test]
fn analytic_gradient_matches_central_differences() {
    for (name, cfg, channels, len) in gradcheck_sizes() {
        for seed in 0..5u64 {
            let (params, x) = random_net(&cfg, channels, len, 100 + seed);
            let label = (seed % 2) as usize;
            let weight = 1.0 + 0.5 * seed as f64;
            let (_, analytic) = model_backward(&params, &x, label, weight).unwrap();
            let numeric = finite_difference_gradient(&params, &x, label, weight, 1e-4);
            let mut worst = (0.0f64, String::new());
            for ((a, n), tname) in analytic.tensors().iter().zip(&numeric).zip(params.tensor_names()) {
                for (i, (&a, &n)) in a.iter().zip(n).enumerate() {
                    let rel = (a - n).abs() / a.abs().max(1.0);
                    if rel > worst.0 {
                        worst = (rel, format!("{tname}[{i}] analytic {a:e} numeric {n:e}"));
                    }
                }
            }
            assert!(worst.0 < 1e-4, "{name} seed {seed}: {}", worst.1);
            eprintln!("{name} seed {seed}: {} params, worst rel err {:.2e}", params.num_params(), worst.0);
        }
    }
}
