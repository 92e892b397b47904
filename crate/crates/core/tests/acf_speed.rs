use std::time::{Duration, Instant};

use acfkit::acf::{acf_matrix_fast, acf_matrix_naive, AcfConfig};
use acfkit::signal::Segment;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn best_of<F: FnMut()>(runs: usize, mut f: F) -> Duration {
    (0..runs)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .min()
        .unwrap()
}

#[test]
fn fast_path_is_not_slower_at_the_default_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let values = Array2::from_shape_fn((7, 2000), |_| rng.random_range(-1.0..1.0));
    let seg = Segment { session_id: "speed".into(), start_frame: 0, values };
    let cfg = AcfConfig { max_delay_frames: 210 };
    let naive = best_of(5, || {
        acf_matrix_naive(&seg, &cfg).unwrap();
    });
    let fast = best_of(5, || {
        acf_matrix_fast(&seg, &cfg).unwrap();
    });
    eprintln!("naive {naive:?}, fast {fast:?}");
    assert!(fast <= naive, "fast {fast:?} slower than naive {naive:?}");
}
