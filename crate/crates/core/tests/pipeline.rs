use std::path::{Path, PathBuf};

use acfkit::acf::io::read_acf_bin;
use acfkit::acf::AcfMethod;
use acfkit::pipeline::{run_extract, run_synth, run_train, FeatureIndex, PipelineConfig, SessionStatus};
use acfkit::signal::io::{read_manifest, write_manifest, write_series_csv, ManifestEntry};
use acfkit::signal::MultiChannelSeries;
use acfkit::Error;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn noise_session(dir: &Path, id: &str, seconds: usize, rng: &mut ChaCha8Rng) -> ManifestEntry {
    let frames = seconds * 100;
    let values = Array2::from_shape_fn((3, frames), |_| rng.random_range(-1.0..1.0));
    let series = MultiChannelSeries::new(vec!["a".into(), "b".into(), "c".into()], 100.0, values).unwrap();
    let rel = PathBuf::from(format!("{id}.csv"));
    write_series_csv(&dir.join(&rel), &series).unwrap();
    ManifestEntry { session_id: id.into(), csv_path: rel, hamd: 12 }
}

fn handmade_manifest(dir: &Path) -> PathBuf {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut entries = vec![noise_session(dir, "long", 45, &mut rng), noise_session(dir, "short", 8, &mut rng)];

    let mut values = Array2::from_shape_fn((3, 1500), |_| rng.random_range(-1.0..1.0));
    values.row_mut(1).fill(0.25);
    let flat = MultiChannelSeries::new(vec!["a".into(), "b".into(), "c".into()], 100.0, values).unwrap();
    write_series_csv(&dir.join("flat.csv"), &flat).unwrap();
    entries.push(ManifestEntry { session_id: "flat".into(), csv_path: "flat.csv".into(), hamd: 3 });

    let manifest = dir.join("manifest.json");
    write_manifest(&manifest, &entries).unwrap();
    manifest
}

fn status(index: &FeatureIndex, id: &str) -> (SessionStatus, usize) {
    let s = index.session(id).unwrap();
    (s.status.clone(), s.segments.len())
}

#[test]
fn extraction_counts_discards_and_skips() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = handmade_manifest(dir.path());
    let features = dir.path().join("features");
    let index = run_extract(&PipelineConfig::default(), &manifest, &features).unwrap();

    assert_eq!(status(&index, "long"), (SessionStatus::Ok, 6));
    assert_eq!(status(&index, "short"), (SessionStatus::Discarded, 0));
    let (flat, n) = status(&index, "flat");
    assert_eq!((flat, n), (SessionStatus::Skipped, 0));
    assert!(index.session("flat").unwrap().note.as_deref().unwrap_or("").starts_with("ConstantChannel"));
    assert_eq!(index.usable().count(), 1);
    for seg in &index.session("long").unwrap().segments {
        let acf = read_acf_bin::<f64>(&features.join(&seg.file)).unwrap();
        assert_eq!((acf.channels(), acf.max_delay()), (3, 210));
    }
}

#[test]
fn fast_and_naive_extraction_agree() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = handmade_manifest(dir.path());
    let mut cfg = PipelineConfig::default();
    cfg.acf_method = AcfMethod::Fast;
    let fast = run_extract(&cfg, &manifest, &dir.path().join("fast")).unwrap();
    cfg.acf_method = AcfMethod::Naive;
    let naive = run_extract(&cfg, &manifest, &dir.path().join("naive")).unwrap();
    let (a, b) = (fast.session("long").unwrap(), naive.session("long").unwrap());
    assert_eq!(a.segments.len(), b.segments.len());
    for (x, y) in a.segments.iter().zip(&b.segments) {
        let fx = read_acf_bin::<f64>(&dir.path().join("fast").join(&x.file)).unwrap();
        let ny = read_acf_bin::<f64>(&dir.path().join("naive").join(&y.file)).unwrap();
        assert!(fx.max_abs_diff(&ny) < 1e-9);
    }
}

#[test]
fn default_synth_is_a_balanced_twenty_session_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = run_synth(&PipelineConfig::default(), dir.path()).unwrap();
    let entries = read_manifest(&manifest).unwrap();
    assert_eq!(entries.len(), 20);
    let depressed = entries.iter().filter(|e| e.hamd >= 8).count();
    assert_eq!(depressed, 10);
}

#[test]
fn unwritable_output_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let target = blocker.join("data");
    match run_synth(&PipelineConfig::default(), &target) {
        Err(e @ Error::Io { .. }) => assert!(e.to_string().contains("file")),
        other => panic!("expected an IO error, got {other:?}"),
    }
}

#[test]
fn training_needs_both_classes() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = handmade_manifest(dir.path());
    let features = dir.path().join("features");
    run_extract(&PipelineConfig::default(), &manifest, &features).unwrap();
    let err = run_train(&PipelineConfig::default(), &features, &dir.path().join("model")).unwrap_err();
    assert!(matches!(err, Error::SingleClassDataset), "{err:?}");
}
