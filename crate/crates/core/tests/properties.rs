use advsurv::costing::{project_cost_energy, trash_score};
use advsurv::io::{load_trials, persist_trials};
use advsurv::optimizer::{hypervolume, split_by_dominance, suggest, Observation, SearchSpace, TpeConfig};
use advsurv::selection::{concordance_index, split_trials};
use advsurv::survival::{AftModel, CovariateTransform, Family};
use advsurv::{validate_trial, HardwareProfile, HyperParams, TrialRecord, TrialStatus};
use ndarray::Array1;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn any_family() -> impl Strategy<Value = Family> {
    prop_oneof![Just(Family::Weibull), Just(Family::LogLogistic), Just(Family::LogNormal)]
}

fn any_f64() -> impl Strategy<Value = f64> {
    prop_oneof![
        4 => -10.0..10.0f64,
        1 => Just(f64::NAN),
        1 => Just(f64::INFINITY),
        1 => Just(-0.0),
        1 => any::<f64>(),
    ]
}

prop_compose! {
    fn any_record()(
        id in any::<u64>(),
        rs in any::<u64>(),
        lr in any_f64(),
        batch in any::<u64>(),
        epochs in any::<u64>(),
        bits in proptest::option::of(any::<u32>()),
        eps in any_f64(),
        counts in (any::<u64>(), any::<u64>(), any::<u64>()),
        times in (any_f64(), any_f64(), any_f64()),
        accs in (any_f64(), any_f64()),
    ) -> TrialRecord {
        TrialRecord {
            trial_id: id,
            dataset_tag: "d".into(),
            hardware_tag: "h".into(),
            random_state: rs,
            hyperparams: HyperParams { learning_rate: lr, batch_size: batch, epochs, bit_depth: bits },
            epsilon: eps,
            n_train: counts.0,
            n_test: counts.1,
            n_attack: counts.2,
            t_train_total: times.0,
            t_predict_total: times.1,
            t_attack_total: times.2,
            acc_benign: accs.0,
            acc_adv: accs.1,
            status: TrialStatus::Ok,
            error: None,
        }
    }
}

prop_compose! {
    fn valid_record()(
        id in 0u64..1000,
        rs in 0u64..10,
        lr in 1e-6..1.0f64,
        batch in 1u64..100_000,
        epochs in 1u64..=100,
        eps in 0.0..2.0f64,
        n_attack in 1u64..500,
        survivors_frac in 0.0..=1.0f64,
        times in (0.0..100.0f64, 0.0..1.0f64, 0.0..1.0f64),
        acc_benign in 0.0..=1.0f64,
    ) -> TrialRecord {
        let survivors = (survivors_frac * n_attack as f64).round();
        TrialRecord {
            trial_id: id,
            dataset_tag: "blobs".into(),
            hardware_tag: "cpu".into(),
            random_state: rs,
            hyperparams: HyperParams { learning_rate: lr, batch_size: batch, epochs, bit_depth: None },
            epsilon: eps,
            n_train: 800,
            n_test: 100,
            n_attack,
            t_train_total: times.0,
            t_predict_total: times.1,
            t_attack_total: times.2,
            acc_benign,
            acc_adv: survivors / n_attack as f64,
            status: TrialStatus::Ok,
            error: None,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn validate_trial_is_total(rec in any_record()) {
        let v = validate_trial(&rec);
        prop_assert!(v.iter().all(|x| !x.to_string().is_empty()));
    }

    #[test]
    fn generated_valid_records_validate(rec in valid_record()) {
        prop_assert!(validate_trial(&rec).is_empty(), "{:?}", validate_trial(&rec));
    }

    #[test]
    fn trial_log_round_trips(recs in proptest::collection::vec(valid_record(), 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.log");
        persist_trials(&recs, &path).unwrap();
        prop_assert_eq!(load_trials(&path).unwrap(), recs);
    }

    #[test]
    fn suggestions_stay_in_bounds(
        seed in any::<u64>(),
        n in 0usize..30,
        n_startup in 0usize..10,
        bits in any::<bool>(),
    ) {
        let space = SearchSpace::hyperparams(bits);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let history: Vec<Observation> = (0..n)
            .map(|i| Observation {
                point: space.sample_uniform(&mut rng),
                objectives: vec![(i % 7) as f64, ((i * 3) % 5) as f64, i as f64],
            })
            .collect();
        let cfg = TpeConfig { n_startup, ..TpeConfig::default() };
        let point = suggest(&history, &space, seed, &cfg);
        prop_assert!(space.contains(&point), "{point:?}");
        prop_assert!(space.to_hyperparams(&point).is_ok());
        prop_assert_eq!(point.clone(), suggest(&history, &space, seed, &cfg));
    }

    #[test]
    fn dominance_split_is_a_partition(
        pts in proptest::collection::vec(proptest::collection::vec(0.0..5.0f64, 3), 1..60),
        gamma in 0.01..0.99f64,
    ) {
        let (good, bad) = split_by_dominance(&pts, gamma);
        let mut all: Vec<usize> = good.iter().chain(&bad).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..pts.len()).collect::<Vec<_>>());
        prop_assert_eq!(good.len(), ((gamma * pts.len() as f64 - 1e-9).ceil() as usize).clamp(1, pts.len()));
    }

    #[test]
    fn hypervolume_is_monotone(
        pts in proptest::collection::vec(proptest::collection::vec(0.0..1.0f64, 3), 1..15),
        extra in proptest::collection::vec(0.0..1.0f64, 3),
    ) {
        let reference = [1.0, 1.0, 1.0];
        let base = hypervolume(&pts, &reference).unwrap();
        let mut more = pts.clone();
        more.push(extra);
        let grown = hypervolume(&more, &reference).unwrap();
        prop_assert!(grown >= base - 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&grown));
    }

    #[test]
    fn hypervolume_matches_inclusion_exclusion_for_two_points(
        a in proptest::collection::vec(0.0..1.0f64, 2),
        b in proptest::collection::vec(0.0..1.0f64, 2),
    ) {
        let box_of = |p: &[f64]| (1.0 - p[0]) * (1.0 - p[1]);
        let overlap = (1.0 - a[0].max(b[0])) * (1.0 - a[1].max(b[1]));
        let expected = box_of(&a) + box_of(&b) - overlap;
        let hv = hypervolume(&[a, b], &[1.0, 1.0]).unwrap();
        prop_assert!((hv - expected).abs() < 1e-12);
    }

    #[test]
    fn trial_split_is_a_partition(n in 2usize..200, frac in 0.05..0.95f64, seed in any::<u64>()) {
        let (fit, test) = split_trials(n, frac, seed).unwrap();
        let mut all: Vec<usize> = fit.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(fit.len(), (frac * n as f64).round() as usize);
    }

    #[test]
    fn concordance_is_bounded_and_rank_based(
        rows in proptest::collection::vec((0.1..10.0f64, any::<bool>(), -5.0..5.0f64), 2..60),
    ) {
        let times: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let mut events: Vec<bool> = rows.iter().map(|r| r.1).collect();
        events[0] = true;
        let scores: Vec<f64> = rows.iter().map(|r| r.2).collect();
        if let Ok(c) = concordance_index(&times, &events, &scores) {
            prop_assert!((0.0..=1.0).contains(&c));
            let squashed: Vec<f64> = scores.iter().map(|s| s.exp()).collect();
            prop_assert!((concordance_index(&times, &events, &squashed).unwrap() - c).abs() < 1e-12);
            let flipped: Vec<f64> = scores.iter().map(|s| -s).collect();
            prop_assert!((concordance_index(&times, &events, &flipped).unwrap() - (1.0 - c)).abs() < 1e-12);
        }
    }

    #[test]
    fn survival_is_a_decreasing_probability(
        family in any_family(),
        mu in -2.0..2.0f64,
        sigma in 0.2..2.0f64,
        t1 in 0.01..20.0f64,
        dt in 0.0..20.0f64,
    ) {
        let m = AftModel::from_raw(family, vec![], CovariateTransform::identity(0), mu, &[], sigma).unwrap();
        let s1 = m.survival_function(&[], t1).unwrap();
        let s2 = m.survival_function(&[], t1 + dt).unwrap();
        prop_assert!((0.0..=1.0).contains(&s1) && s2 <= s1);
        let e = m.expected_survival_time(&[], Some(t1)).unwrap();
        prop_assert!(e > 0.0 && e <= t1 * (1.0 + 1e-9));
    }

    #[test]
    fn covariate_transform_round_trips(rows in proptest::collection::vec(proptest::collection::vec(-100.0..100.0f64, 3), 2..20)) {
        let raw = ndarray::Array2::from_shape_fn((rows.len(), 3), |(i, j)| rows[i][j]);
        let t = CovariateTransform::fit(&raw);
        for row in raw.rows() {
            let back = t.invert_row(t.apply_row(row).view());
            let diff: Array1<f64> = &back - &row;
            prop_assert!(diff.iter().all(|d| d.abs() < 1e-9 * (1.0 + row.iter().fold(0.0f64, |m, v| m.max(v.abs())))));
        }
    }

    #[test]
    fn costing_is_linear_and_trash_is_scale_free(
        secs in 0.0..1e6f64,
        k in 0.1..10.0f64,
        t in 1e-6..10.0f64,
        e in 1e-6..10.0f64,
    ) {
        for p in HardwareProfile::reference_profiles() {
            let a = project_cost_energy(secs, &p).unwrap();
            let b = project_cost_energy(k * secs, &p).unwrap();
            prop_assert!((b.cost_usd - k * a.cost_usd).abs() <= 1e-9 * (1.0 + b.cost_usd));
            prop_assert!((b.energy_joules - k * a.energy_joules).abs() <= 1e-9 * (1.0 + b.energy_joules));
        }
        let s = trash_score(t, e).unwrap();
        prop_assert_eq!(s.verdict == advsurv::costing::Verdict::Broken, t / e > 1.0);
        prop_assert!((trash_score(k * t, k * e).unwrap().score - s.score).abs() <= 1e-12 * s.score.max(1.0));
    }
}
