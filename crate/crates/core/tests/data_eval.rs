mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::*;
use hypers::data::{load_interactions, split, FileFormat, LoadOptions, SplitParams};
use hypers::eval::{evaluate, f1_at_k, precision_at_k, recall_at_k, tune, ParamRange, SearchSpace};
use hypers::recommenders::RankingList;
use hypers::InteractionDataset;
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::Rng;

fn list_from(rows: Vec<Vec<usize>>, k: usize) -> RankingList {
    RankingList {
        model_name: "M".into(),
        k,
        rows: rows
            .into_iter()
            .map(|r| r.into_iter().enumerate().map(|(p, i)| (i, -(p as f64))).collect())
            .collect(),
    }
}

#[test]
fn duplicate_rows_collapse() {
    let ds = InteractionDataset::from_pairs([("a", "x"), ("a", "y"), ("b", "x"), ("a", "x")]);
    assert_eq!((ds.num_users(), ds.num_items(), ds.num_interactions()), (2, 2, 3));
    assert_eq!(ds.sparsity(), 0.75);
}

#[test]
fn loaded_stats_match_independent_recount() {
    let mut r = rng(1);
    let mut text = String::from("userID\tmovieID\trating\ttimestamp\n");
    let mut kept = BTreeSet::new();
    for _ in 0..3000 {
        let u = r.random_range(0..80);
        let i = r.random_range(0..150) * 7;
        let rating = r.random_range(1..=10) as f64 / 2.0;
        text.push_str(&format!("{u}\t{i}\t{rating}\t1234\n"));
        if rating >= 3.5 {
            kept.insert((u, i));
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ratings.dat");
    std::fs::write(&path, &text).unwrap();
    let opts = LoadOptions {
        rating_threshold: Some(3.5),
        header: None,
    };
    let ds = load_interactions(&path, FileFormat::from_path(&path), &opts).unwrap();
    let users: BTreeSet<_> = kept.iter().map(|p| p.0).collect();
    let items: BTreeSet<_> = kept.iter().map(|p| p.1).collect();
    assert_eq!(ds.num_users(), users.len());
    assert_eq!(ds.num_items(), items.len());
    assert_eq!(ds.num_interactions(), kept.len());
    for (u, i) in ds.pairs() {
        let uid: i32 = ds.users().id(u).unwrap().parse().unwrap();
        let iid: i32 = ds.items().id(i).unwrap().parse().unwrap();
        assert!(kept.contains(&(uid, iid)));
    }
}

#[test]
fn interaction_rows_match_recount() {
    let mut r = rng(2);
    let ds = random_dataset(&mut r, 30, 25, 0, 12);
    for u in 0..30 {
        let row = ds.interaction_row(u).unwrap();
        assert_eq!(row.nnz(), ds.pairs().filter(|p| p.0 == u).count());
        let dense: Vec<f64> = row.to_dense();
        for i in 0..25 {
            assert_eq!(dense[i] == 1.0, ds.contains(u, i));
        }
    }
    let small = InteractionDataset::from_rows(4, vec![vec![0, 2], vec![]]).unwrap();
    assert_eq!(
        small.interaction_row(0).unwrap().to_dense::<f64>(),
        vec![1.0, 0.0, 1.0, 0.0]
    );
    assert!(small.interaction_row(1).unwrap().is_empty());
}

#[test]
fn metric_examples() {
    let targets: Vec<Vec<usize>> = vec![(0..10).collect(), (10..20).collect()];
    let perfect = list_from(targets.clone(), 10);
    assert_eq!(precision_at_k(&perfect, &targets).unwrap(), 1.0);
    let disjoint = list_from(vec![(20..30).collect(), (30..40).collect()], 10);
    assert_eq!(precision_at_k(&disjoint, &targets).unwrap(), 0.0);
    // 3 and 7 hits
    let mixed = list_from(
        vec![(0..3).chain(20..27).collect(), (10..17).chain(30..33).collect()],
        10,
    );
    assert!((precision_at_k(&mixed, &targets).unwrap() - 0.5).abs() < 1e-15);

    let five = vec![vec![0, 1, 2, 3, 4]];
    let all_hit = list_from(vec![(0..10).collect()], 10);
    assert_eq!(recall_at_k(&all_hit, &five).unwrap(), 1.0);
    assert_eq!(precision_at_k(&all_hit, &five).unwrap(), 0.5);
    assert!((f1_at_k(0.5, 1.0) - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn tune_best_is_max_of_trial_log() {
    let space: SearchSpace = [
        ("a".to_string(), ParamRange::Float { lo: -1.0, hi: 1.0 }),
        ("b".to_string(), ParamRange::Int { lo: 1, hi: 5 }),
        ("c".to_string(), ParamRange::LogFloat { lo: 1e-6, hi: 1e-3 }),
    ]
    .into();
    let res = tune(&space, 25, 4, |s| Ok(-(s["a"] - 0.3).powi(2) + s["b"])).unwrap();
    let best = res
        .trials
        .iter()
        .filter_map(|t| t.score)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(res.best_score, best);
    for t in &res.trials {
        for (name, v) in &t.sample {
            assert!(space[name].contains(*v), "{name} = {v}");
        }
    }
}

fn arb_dataset() -> impl Strategy<Value = InteractionDataset> {
    (any::<u64>(), 1usize..40, 20usize..60).prop_map(|(seed, users, items)| {
        let mut r = rng(seed);
        random_dataset(&mut r, users, items, 0, items.min(35))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_parts_disjoint_and_complete(ds in arb_dataset(), seed in any::<u64>()) {
        let params = SplitParams::default();
        let Ok(s) = split(&ds, params, seed) else {
            // only legal failure: nobody qualifies
            prop_assert!(ds.rows().iter().all(|r| r.len() < params.required()));
            return Ok(());
        };
        let retained: Vec<usize> = (0..ds.num_users()).filter(|&u| ds.user_items(u).len() >= 20).collect();
        prop_assert_eq!(s.num_users(), retained.len());
        for (nu, &ou) in retained.iter().enumerate() {
            let train: BTreeSet<usize> = s.train.user_items(nu).iter().copied().collect();
            let val: BTreeSet<usize> = s.validation[nu].iter().copied().collect();
            let test: BTreeSet<usize> = s.test[nu].iter().copied().collect();
            prop_assert_eq!(test.len(), 10);
            prop_assert_eq!(val.len(), 5);
            prop_assert!(train.len() >= 5);
            prop_assert!(train.is_disjoint(&val) && train.is_disjoint(&test) && val.is_disjoint(&test));
            let union: Vec<usize> = train.iter().chain(&val).chain(&test).copied().collect::<BTreeSet<_>>().into_iter().collect();
            prop_assert_eq!(union.as_slice(), ds.user_items(ou));
            prop_assert_eq!(s.train.users().id(nu), ds.users().id(ou));
        }
        let again = split(&ds, params, seed).unwrap();
        prop_assert_eq!(&again, &s);
    }

    #[test]
    fn id_round_trip(pairs in prop::collection::vec(("[a-z]{1,3}", "[a-z0-9]{1,3}"), 1..60)) {
        let ds = InteractionDataset::from_pairs(pairs.iter().map(|(u, i)| (u.as_str(), i.as_str())));
        for u in 0..ds.num_users() {
            prop_assert_eq!(ds.users().get(ds.users().id(u).unwrap()), Some(u));
        }
        for i in 0..ds.num_items() {
            prop_assert_eq!(ds.items().get(ds.items().id(i).unwrap()), Some(i));
        }
        let unique: BTreeSet<_> = pairs.iter().collect();
        prop_assert_eq!(ds.num_interactions(), unique.len());
        // ids in first-appearance order
        let mut seen = Vec::new();
        for (u, _) in &pairs {
            if !seen.contains(u) {
                seen.push(u.clone());
            }
        }
        prop_assert_eq!(ds.users().ids(), seen.as_slice());
    }

    #[test]
    fn metrics_bounded_integral_and_order_free(seed in any::<u64>(), users in 1usize..20, k in 1usize..15, t in 1usize..15) {
        let mut r = rng(seed);
        let items = 40;
        let targets: Vec<Vec<usize>> = (0..users).map(|_| sample(&mut r, items, t).into_vec()).collect();
        let rows: Vec<Vec<usize>> = (0..users).map(|_| sample(&mut r, items, k).into_vec()).collect();
        let list = list_from(rows.clone(), k);
        let rep = evaluate(&list, &targets, true).unwrap();
        prop_assert!((0.0..=1.0).contains(&rep.precision));
        prop_assert!((0.0..=1.0).contains(&rep.recall));
        prop_assert!((0.0..=1.0).contains(&rep.f1));
        let per_user = rep.per_user.clone().unwrap();
        let mut recall_sum = 0.0;
        for (u, h) in per_user.iter().enumerate() {
            let hits = rows[u].iter().filter(|i| targets[u].contains(i)).count();
            prop_assert_eq!(h.hits, hits);
            recall_sum += hits as f64 / t as f64;
        }
        prop_assert!((rep.recall - recall_sum / users as f64).abs() < 1e-12);

        let mut shuffled = rows;
        for row in &mut shuffled {
            row.reverse();
        }
        let rep2 = evaluate(&list_from(shuffled, k), &targets, false).unwrap();
        prop_assert_eq!(rep.precision, rep2.precision);
        prop_assert_eq!(rep.recall, rep2.recall);

        if k == t {
            prop_assert_eq!(rep.precision, rep.recall);
            prop_assert!((rep.f1 - rep.precision).abs() <= 1e-15);
        }
    }
}

#[test]
fn per_model_ranges_are_well_formed() {
    use hypers::eval::{desk_space, reference_space};
    use hypers::recommenders::ModelKind;
    for kind in ModelKind::ALL {
        for space in [reference_space(kind), desk_space(kind)] {
            let res = tune(&space, 5, 1, |_| Ok(0.0)).unwrap();
            assert_eq!(res.trials.len(), 5);
        }
    }
    let by_name: BTreeMap<_, _> = reference_space(ModelKind::Warp).into_iter().collect();
    assert_eq!(by_name["regularization"], ParamRange::LogFloat { lo: 1e-6, hi: 1e-3 });
}
