use acfkit::acf::{acf_matrix_fast, acf_matrix_naive, AcfConfig};
use acfkit::signal::Segment;
use criterion::{criterion_group, criterion_main, Criterion};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn segment(m: usize, n: usize) -> Segment<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let values = Array2::from_shape_fn((m, n), |_| rng.random_range(-1.0..1.0));
    Segment { session_id: "bench".into(), start_frame: 0, values }
}

fn acf(c: &mut Criterion) {
    let seg = segment(7, 2000);
    let cfg = AcfConfig { max_delay_frames: 210 };
    let mut group = c.benchmark_group("acf_m7_n2000_d210");
    group.sample_size(20);
    group.bench_function("naive", |b| b.iter(|| acf_matrix_naive(std::hint::black_box(&seg), &cfg).unwrap()));
    group.bench_function("fast", |b| b.iter(|| acf_matrix_fast(std::hint::black_box(&seg), &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, acf);
criterion_main!(benches);
