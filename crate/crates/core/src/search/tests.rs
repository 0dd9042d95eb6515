use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::*;
use crate::data::{synthetic_dataset, SyntheticSpec};
use crate::population::{accuracy, Row};

fn metrics(disparity: f64, utility: f64) -> SplitMetrics {
    SplitMetrics {
        disparity,
        utility,
        sr_1: 0.0,
        sr_2: 0.0,
    }
}

/// Pool with the given (eval disparity, test disparity, test utility) per model.
fn synthetic_pool(entries: &[(f64, f64, f64)]) -> CandidatePool {
    CandidatePool {
        search_type: SearchType::Sample,
        lambda: 1.0,
        records: entries
            .iter()
            .enumerate()
            .map(|(i, &(e, t, u))| PoolRecord {
                model_id: i,
                seed: i as u64,
                search_type: SearchType::Sample,
                train: metrics(e, u),
                eval: metrics(e, u),
                test: metrics(t, u),
            })
            .collect(),
    }
}

fn independent_pool(size: usize, seed: u64) -> CandidatePool {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<_> = (0..size).map(|_| (r.random::<f64>(), r.random::<f64>(), r.random::<f64>())).collect();
    synthetic_pool(&entries)
}

fn small_splits(seed: u64) -> Splits {
    let data = synthetic_dataset(
        &SyntheticSpec {
            n_rows: 600,
            ..SyntheticSpec::default()
        },
        seed,
    )
    .unwrap();
    split(&data, &SplitSpec::new(0.6, 0.2, 0.2, seed).unwrap()).unwrap()
}

fn blobs(n: usize, seed: u64) -> LabeledDataset {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|i| {
            let label = i % 2 == 0;
            let c = if label { 3.0 } else { -3.0 };
            let mut noise = || r.sample::<f64, _>(StandardNormal) * 0.5;
            Row {
                features: vec![c + noise(), c + noise()],
                group: if i % 3 == 0 { Group::Two } else { Group::One },
                label,
            }
        })
        .collect();
    LabeledDataset::new("blobs", vec!["a".into(), "b".into()], rows).unwrap()
}

#[test]
fn split_sizes_and_determinism() {
    let data = synthetic_dataset(
        &SyntheticSpec {
            n_rows: 1000,
            ..SyntheticSpec::default()
        },
        1,
    )
    .unwrap();
    let spec = SplitSpec::new(0.6, 0.2, 0.2, 9).unwrap();
    let s = split(&data, &spec).unwrap();
    assert_eq!((s.train.len(), s.eval.len(), s.test.len()), (600, 200, 200));
    assert_eq!(split(&data, &spec).unwrap(), s);
    let other = split(&data, &SplitSpec { seed: 10, ..spec }).unwrap();
    assert_ne!(other.train, s.train);
}

#[test]
fn split_partitions_rows() {
    // Tag each row with a unique feature to track it through the split.
    let rows: Vec<Row> = (0..97)
        .map(|i| Row {
            features: vec![i as f64],
            group: if i % 2 == 0 { Group::One } else { Group::Two },
            label: i % 3 == 0,
        })
        .collect();
    let data = LabeledDataset::new("tagged", vec!["id".into()], rows).unwrap();
    let s = split(&data, &SplitSpec::new(0.5, 0.25, 0.25, 3).unwrap()).unwrap();
    let mut ids: Vec<i64> = [&s.train, &s.eval, &s.test]
        .iter()
        .flat_map(|d| d.rows().iter().map(|r| r.features[0] as i64))
        .collect();
    ids.sort_unstable();
    assert_eq!(ids, (0..97).collect::<Vec<_>>());
    assert!((s.train.len() as f64 - 48.5).abs() <= 1.0);
    assert!((s.eval.len() as f64 - 24.25).abs() <= 1.0);
    assert!((s.test.len() as f64 - 24.25).abs() <= 1.0);
}

#[test]
fn tiny_split_is_degenerate() {
    let data = synthetic_dataset(
        &SyntheticSpec {
            n_rows: 50,
            ..SyntheticSpec::default()
        },
        2,
    )
    .unwrap();
    let err = split(&data, &SplitSpec::new(0.98, 0.01, 0.01, 0).unwrap()).unwrap_err();
    assert!(err.to_string().starts_with("degenerate split"), "{err}");
    assert!(SplitSpec::new(0.5, 0.5, 0.5, 0).is_err());
    assert!(SplitSpec::new(1.0, 0.0, 0.0, 0).is_err());
}

#[test]
fn logistic_regression_separates_blobs() {
    let data = blobs(400, 4);
    let model = train(&TrainerSpec::new(ModelKind::LogisticRegression), &data, 0).unwrap();
    assert!(accuracy(&data, &model.predict_dataset(&data)) >= 0.95);
}

#[test]
fn unlimited_tree_fits_distinct_rows() {
    let data = blobs(300, 5);
    let model = train(&TrainerSpec::new(ModelKind::DecisionTree), &data, 0).unwrap();
    assert_eq!(accuracy(&data, &model.predict_dataset(&data)), 1.0);
}

#[test]
fn depth_zero_tree_is_constant_majority() {
    let data = synthetic_dataset(&SyntheticSpec::default(), 6).unwrap();
    let positives = data.rows().iter().filter(|r| r.label).count();
    let spec = TrainerSpec {
        max_depth: Some(0),
        balanced_weights: false,
        ..TrainerSpec::new(ModelKind::DecisionTree)
    };
    let Model::Tree(tree) = train(&spec, &data, 0).unwrap() else {
        panic!("expected a tree")
    };
    assert_eq!(tree.nodes.len(), 1);
    let preds = Model::Tree(tree).predict_dataset(&data);
    assert!(preds.iter().all(|&p| p == (2 * positives > data.len())));

    // Balanced weights tie the classes at the root: score 1/2 predicts 0.
    let balanced = TrainerSpec {
        balanced_weights: true,
        ..spec
    };
    let model = train(&balanced, &data, 0).unwrap();
    assert!((model.score(&data.rows()[0].features) - 0.5).abs() < 1e-12);
    assert!(!model.predict(&data.rows()[0].features));
}

#[test]
fn single_tree_forest_matches_its_tree() {
    let data = synthetic_dataset(&SyntheticSpec::default(), 7).unwrap();
    let spec = TrainerSpec {
        n_trees: 1,
        ..TrainerSpec::new(ModelKind::RandomForest)
    };
    let forest = train(&spec, &data, 11).unwrap();
    let Model::Forest(trees) = &forest else {
        panic!("expected a forest")
    };
    assert_eq!(trees.len(), 1);
    assert!(trees[0].depth() <= FOREST_DEFAULT_MAX_DEPTH);
    let tree = Model::Tree(trees[0].clone());
    assert_eq!(forest.predict_dataset(&data), tree.predict_dataset(&data));
}

#[test]
fn training_is_deterministic_and_seed_sensitive() {
    let data = synthetic_dataset(&SyntheticSpec::default(), 8).unwrap();
    let spec = TrainerSpec {
        n_trees: 10,
        ..TrainerSpec::new(ModelKind::RandomForest)
    };
    let a = train(&spec, &data, 1).unwrap();
    assert_eq!(a, train(&spec, &data, 1).unwrap());
    assert_ne!(a, train(&spec, &data, 2).unwrap());
}

#[test]
fn rejects_non_finite_features_and_single_label() {
    let mut data = blobs(20, 9);
    data.rows_mut()[3].features[1] = f64::NAN;
    let err = train(&TrainerSpec::new(ModelKind::DecisionTree), &data, 0).unwrap_err();
    assert!(matches!(err, LdaError::NonFiniteFeature { row: 3, column: 1 }));

    let one_label = blobs(20, 9).select("pos", &[0, 2, 4]);
    assert!(matches!(
        train(&TrainerSpec::new(ModelKind::LogisticRegression), &one_label, 0),
        Err(LdaError::DegenerateLabels { .. })
    ));
}

#[test]
fn no_signal_models_track_the_majority_rate() {
    let spec = SyntheticSpec {
        n_rows: 20_000,
        signal_strength: 0.0,
        base_rates: (0.3, 0.3),
        group_balance: 0.5,
    };
    let data = synthetic_dataset(&spec, 12).unwrap();
    let s = split(&data, &SplitSpec::new(0.6, 0.2, 0.2, 1).unwrap()).unwrap();
    let unweighted = TrainerSpec {
        balanced_weights: false,
        max_depth: Some(3),
        ..TrainerSpec::new(ModelKind::DecisionTree)
    };
    for spec in [
        unweighted.clone(),
        TrainerSpec {
            kind: ModelKind::LogisticRegression,
            ..unweighted
        },
    ] {
        let model = train(&spec, &s.train, 0).unwrap();
        let acc = accuracy(&s.test, &model.predict_dataset(&s.test));
        assert!((acc - 0.7).abs() < 0.02, "{:?}: {acc}", spec.kind);
    }
}

#[test]
fn pool_is_deterministic_and_recomputable() {
    let splits = small_splits(20);
    let spec = TrainerSpec {
        n_trees: 5,
        ..TrainerSpec::new(ModelKind::RandomForest)
    };
    let pool = build_pool(&spec, SearchType::Sample, &splits, 6, 77, 1.0).unwrap();
    assert_eq!(pool.len(), 6);
    assert_eq!(build_pool(&spec, SearchType::Sample, &splits, 6, 77, 1.0).unwrap(), pool);

    let trainer = Trainer::new(&spec, &splits.train).unwrap();
    for r in &pool.records {
        assert_eq!(r.seed, model_seed(77, r.model_id));
        let model = train_pool_member(&trainer, splits.train.len(), SearchType::Sample, r.seed).unwrap();
        for which in SplitName::ALL {
            let data = splits.get(which);
            let preds = model.predict_dataset(data);
            // Independent recount of selection rates from the predictions.
            let rate = |g: Group| {
                let rows: Vec<bool> = data.rows().iter().zip(&preds).filter(|(x, _)| x.group == g).map(|(_, &p)| p).collect();
                rows.iter().filter(|&&p| p).count() as f64 / rows.len() as f64
            };
            let stored = r.split(which);
            assert!((stored.sr_1 - rate(Group::One)).abs() < 1e-12);
            assert!((stored.sr_2 - rate(Group::Two)).abs() < 1e-12);
            assert!((stored.disparity - (stored.sr_1 - stored.sr_2)).abs() < 1e-12);
        }
    }

    let reseeded = build_pool(&spec, SearchType::RandomSeed, &splits, 3, 77, 1.0).unwrap();
    assert_eq!(reseeded.len(), 3);
    let lr = TrainerSpec::new(ModelKind::LogisticRegression);
    assert!(build_pool(&lr, SearchType::RandomSeed, &splits, 3, 77, 1.0).is_err());
}

#[test]
fn pool_csv_round_trip() {
    let pool = independent_pool(7, 1);
    let mut buf = Vec::new();
    write_pool_csv(&pool, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("model_id,seed,search_type,split,disparity,utility,sr_1,sr_2\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 7);
    assert_eq!(read_pool_csv(buf.as_slice(), 1.0).unwrap(), pool);
}

#[test]
fn single_model_trials_are_null() {
    let pool = independent_pool(30, 2);
    for seed in 0..20 {
        let t = subsample_select(&pool, 1, seed).unwrap();
        assert_eq!(t.delta_test_disparity, 0.0);
        assert_eq!(t.delta_test_utility, 0.0);
        assert!(t.perfect_guess);
    }
    let stats = trial_statistics(&pool, 1, 100, 0).unwrap();
    assert_eq!(stats.perfect_guess_freq, 1.0);
    assert!(!stats.disparity.significant && !stats.utility.significant);
}

#[test]
fn exhaustive_draw_selects_global_minimizer() {
    let pool = independent_pool(25, 3);
    let best = pool
        .records
        .iter()
        .min_by(|a, b| a.eval.disparity.abs().total_cmp(&b.eval.disparity.abs()))
        .unwrap()
        .model_id;
    assert_eq!(subsample_select(&pool, 25, 4).unwrap().selected_model_id, best);
    assert!(subsample_select(&pool, 26, 4).is_err());
    assert!(subsample_select(&pool, 0, 4).is_err());
}

#[test]
fn ties_go_to_smallest_id() {
    let pool = synthetic_pool(&[(0.2, 0.5, 0.0), (0.1, 0.3, 0.0), (-0.1, 0.1, 0.0)]);
    assert_eq!(subsample_select(&pool, 3, 0).unwrap().selected_model_id, 1);
}

#[test]
fn concordant_pool_always_guesses_right() {
    let entries: Vec<_> = (0..40).map(|i| (i as f64 * 0.01, -(i as f64 * 0.02 + 0.01), 0.5)).collect();
    let pool = synthetic_pool(&entries);
    for n in [2, 5, 17, 40] {
        assert_eq!(trial_statistics(&pool, n, 200, 5).unwrap().perfect_guess_freq, 1.0);
    }
}

#[test]
fn identical_models_give_null_statistics() {
    let pool = synthetic_pool(&[(0.1, 0.3, 0.7); 12]);
    let stats = trial_statistics(&pool, 6, 300, 1).unwrap();
    assert_eq!(stats.disparity.mean, 0.0);
    assert_eq!((stats.disparity.p2_5, stats.disparity.p97_5), (0.0, 0.0));
    assert_eq!(stats.utility.mean, 0.0);
    assert!(!stats.disparity.significant && !stats.utility.significant);
}

#[test]
fn independence_null_frequency_is_one_over_n() {
    let pool = independent_pool(2000, 6);
    for n in [2, 5, 10] {
        let f = trial_statistics(&pool, n, 5000, 7).unwrap().perfect_guess_freq;
        assert!((f - 1.0 / n as f64).abs() < 0.05, "n = {n}: {f}");
    }
}

#[test]
fn percentile_matches_linear_interpolation() {
    let sorted = [1.0, 2.0, 3.0, 4.0, 5.0];
    assert_eq!(percentile(&sorted, 0.0), 1.0);
    assert_eq!(percentile(&sorted, 100.0), 5.0);
    assert_eq!(percentile(&sorted, 50.0), 3.0);
    assert!((percentile(&sorted, 2.5) - 1.1).abs() < 1e-12);
    assert!((percentile(&sorted, 97.5) - 4.9).abs() < 1e-12);
    assert_eq!(percentile(&[7.0], 97.5), 7.0);
}

#[test]
fn statistics_are_deterministic() {
    let pool = independent_pool(100, 8);
    assert_eq!(trial_statistics(&pool, 10, 500, 3).unwrap(), trial_statistics(&pool, 10, 500, 3).unwrap());
    assert_ne!(trial_statistics(&pool, 10, 500, 3).unwrap(), trial_statistics(&pool, 10, 500, 4).unwrap());
}

#[test]
fn permuted_pool_gives_matching_distribution() {
    let pool = independent_pool(300, 9);
    let mut permuted = pool.clone();
    permuted.records.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
    for n in [2, 10] {
        let a = trial_statistics(&pool, n, 4000, 1).unwrap();
        let b = trial_statistics(&permuted, n, 4000, 2).unwrap();
        assert!((a.disparity.mean - b.disparity.mean).abs() < 0.02, "n = {n}");
        assert!((a.perfect_guess_freq - b.perfect_guess_freq).abs() < 0.04, "n = {n}");
    }
}

#[test]
fn band_width_does_not_blow_up_with_n() {
    let pool = independent_pool(500, 10);
    let width = |n| {
        let s = trial_statistics(&pool, n, 1000, 2).unwrap();
        s.disparity.p97_5 - s.disparity.p2_5
    };
    let base = width(2);
    for n in [5, 20, 100] {
        assert!(width(n) <= 3.0 * base, "n = {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn selected_eval_disparity_is_at_most_the_mean(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 1..40),
        n_frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        let pool = synthetic_pool(&entries);
        let n = 1 + (n_frac * (pool.len() - 1) as f64) as usize;
        let t = subsample_select(&pool, n, seed).unwrap();
        prop_assert!(t.selected_eval_abs_disparity <= t.mean_eval_abs_disparity + 1e-12);
        let stats = trial_statistics(&pool, n, 20, seed).unwrap();
        prop_assert_eq!(stats.eval_improvement_violations, 0);
        prop_assert!((0.0..=1.0).contains(&stats.perfect_guess_freq));
    }
}
