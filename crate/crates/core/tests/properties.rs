mod common;

use acfkit::acf::{acf_matrix_naive, AcfConfig};
use acfkit::metrics::auc_roc;
use acfkit::signal::{segment_session, Class, MultiChannelSeries, Segment, SegmentationConfig};
use common::auc_all_pairs;
use ndarray::Array2;
use proptest::prelude::*;

fn segment(values: Array2<f64>) -> Segment<f64> {
    Segment { session_id: "p".into(), start_frame: 0, values }
}

fn series_strategy() -> impl Strategy<Value = (Array2<f64>, usize)> {
    (1usize..=4, 2usize..=60).prop_flat_map(|(m, n)| {
        (prop::collection::vec(-3.0f64..3.0, m * n), 0..n)
            .prop_map(move |(v, d)| (Array2::from_shape_vec((m, n), v).unwrap(), d))
    })
}

fn scored_labels() -> impl Strategy<Value = (Vec<Class>, Vec<f64>)> {
    (2usize..=80).prop_flat_map(|n| {
        (prop::collection::vec(any::<bool>(), n), prop::collection::vec(0u8..12, n)).prop_map(|(flags, grid)| {
            let mut labels: Vec<Class> =
                flags.iter().map(|&d| if d { Class::Depressed } else { Class::NotDepressed }).collect();
            labels[0] = Class::Depressed;
            labels[1] = Class::NotDepressed;
            (labels, grid.into_iter().map(|g| g as f64 / 4.0 - 1.0).collect())
        })
    })
}

proptest! {
    #[test]
    fn zero_delay_is_symmetric((x, d) in series_strategy()) {
        let acf = acf_matrix_naive(&segment(x.clone()), &AcfConfig { max_delay_frames: d }).unwrap();
        for i in 0..x.nrows() {
            for j in 0..x.nrows() {
                prop_assert!((acf.get(i, j, 0) - acf.get(j, i, 0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reversing_time_swaps_the_pair((x, d) in series_strategy()) {
        let cfg = AcfConfig { max_delay_frames: d };
        let forward = acf_matrix_naive(&segment(x.clone()), &cfg).unwrap();
        let mut reversed = x.clone();
        reversed.invert_axis(ndarray::Axis(1));
        let backward = acf_matrix_naive(&segment(reversed), &cfg).unwrap();
        for i in 0..x.nrows() {
            for j in 0..x.nrows() {
                for lag in 0..=d {
                    prop_assert!((forward.get(i, j, lag) - backward.get(j, i, lag)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bounded_by_channel_energy((x, d) in series_strategy()) {
        let n = x.ncols() as f64;
        let acf = acf_matrix_naive(&segment(x.clone()), &AcfConfig { max_delay_frames: d }).unwrap();
        let energy: Vec<f64> = x.rows().into_iter().map(|r| r.dot(&r)).collect();
        for i in 0..x.nrows() {
            for j in 0..x.nrows() {
                for lag in 0..=d {
                    let bound = (energy[i] * energy[j]).sqrt() / (n - lag as f64);
                    prop_assert!(acf.get(i, j, lag).abs() <= bound * (1.0 + 1e-12) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn covariant_under_channel_scaling((x, d) in series_strategy(), a in 0.1f64..4.0, b in -4.0f64..-0.1) {
        let cfg = AcfConfig { max_delay_frames: d };
        let base = acf_matrix_naive(&segment(x.clone()), &cfg).unwrap();
        let mut scaled = x.clone();
        let factors: Vec<f64> = (0..x.nrows()).map(|i| if i % 2 == 0 { a } else { b }).collect();
        for (mut row, f) in scaled.rows_mut().into_iter().zip(&factors) {
            row *= *f;
        }
        let acf = acf_matrix_naive(&segment(scaled), &cfg).unwrap();
        for i in 0..x.nrows() {
            for j in 0..x.nrows() {
                for lag in 0..=d {
                    let expected = factors[i] * factors[j] * base.get(i, j, lag);
                    prop_assert!((acf.get(i, j, lag) - expected).abs() <= 1e-10 * (1.0 + expected.abs()));
                }
            }
        }
    }

    #[test]
    fn auc_matches_all_pairs((labels, scores) in scored_labels()) {
        let auc = auc_roc(&labels, &scores).unwrap();
        prop_assert!((auc - auc_all_pairs(&labels, &scores)).abs() < 1e-12);
    }

    #[test]
    fn auc_invariant_under_monotone_maps((labels, scores) in scored_labels()) {
        let auc = auc_roc(&labels, &scores).unwrap();
        let mapped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() + 7.0).collect();
        prop_assert!((auc - auc_roc(&labels, &mapped).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn negating_scores_complements_auc((labels, scores) in scored_labels()) {
        let auc = auc_roc(&labels, &scores).unwrap();
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((auc + auc_roc(&labels, &negated).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swapping_labels_and_negating_preserves_auc((labels, scores) in scored_labels()) {
        let auc = auc_roc(&labels, &scores).unwrap();
        let swapped: Vec<Class> = labels
            .iter()
            .map(|c| match c {
                Class::Depressed => Class::NotDepressed,
                Class::NotDepressed => Class::Depressed,
            })
            .collect();
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((auc - auc_roc(&swapped, &negated).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn segment_count_follows_the_window_formula(
        frames in 1usize..400,
        window in 4usize..40,
        shift_frac in 0.05f64..1.0,
        min_frac in 0.1f64..1.0,
    ) {
        let rate = 10.0;
        let shift = ((window as f64 * shift_frac).floor() as usize).max(1);
        let min = ((window as f64 * min_frac).floor() as usize).max(1);
        let cfg = SegmentationConfig {
            window_s: window as f64 / rate,
            shift_s: shift as f64 / rate,
            min_s: min as f64 / rate,
            truncate_s: None,
        };
        let series = MultiChannelSeries::new(vec!["a".into()], rate, Array2::<f64>::zeros((1, frames))).unwrap();
        let segments = segment_session("s", &series, &cfg).unwrap();
        let expected = if frames < min {
            0
        } else if frames <= window {
            1
        } else {
            (frames - window) / shift + 1
        };
        prop_assert_eq!(segments.len(), expected);
        for (k, seg) in segments.iter().enumerate() {
            prop_assert_eq!(seg.start_frame, k * shift);
            prop_assert_eq!(seg.frames(), frames.min(window));
        }
    }
}
