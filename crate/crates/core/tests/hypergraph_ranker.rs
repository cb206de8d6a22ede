mod common;

use std::collections::BTreeSet;

use common::*;
use hypers::hypergraph::{
    build_hypergraph, build_model_edges, build_ui_edges, build_uu_edges, nearest_neighbors, Hyperedge, HyperedgeKind,
    Hypergraph,
};
use hypers::ranker::{
    compute_affinity, query_vector, recommend, recommend_all, solve_ranking, solve_ranking_traced, RankerConfig,
};
use hypers::recommenders::RankingList;
use hypers::{InteractionDataset, WeightPolicy};
use proptest::prelude::*;
use rand::Rng;

fn tight(vartheta: f64) -> RankerConfig {
    RankerConfig {
        vartheta,
        tol: 1e-12,
        max_iter: 20_000,
    }
}

#[test]
fn affinity_matches_dense_triple_product() {
    let mut r = rng(1);
    for _ in 0..50 {
        let hg = random_hypergraph(&mut r, 40);
        let oracle = dense_affinity(&hg);
        let op = compute_affinity(&hg).unwrap();
        let got = to_dmatrix(&op.to_dense(64).unwrap());
        assert!((got - &oracle).amax() <= 1e-10);
        let explicit = to_dmatrix(&op.materialized().to_dense(64).unwrap());
        assert!((explicit - oracle).amax() <= 1e-10);
    }
}

#[test]
fn solver_matches_dense_solve() {
    let mut r = rng(2);
    for _ in 0..50 {
        let hg = random_hypergraph(&mut r, 40);
        let vartheta = r.random_range(0.01..0.99);
        let cfg = tight(vartheta);
        let op = compute_affinity(&hg).unwrap();
        let y: Vec<f64> = (0..hg.num_nodes()).map(|_| r.random_range(0.0..1.0)).collect();
        let f = solve_ranking(&op, &y, &cfg).unwrap();
        let oracle = dense_solve(&dense_affinity(&hg), &y, cfg.alpha());
        assert!(max_abs_diff(&f, &oracle) <= 1e-6);
    }
}

#[test]
fn stored_degrees_match_recomputation() {
    let mut r = rng(3);
    for _ in 0..30 {
        let hg = random_hypergraph(&mut r, 50);
        let p = dense_parts(&hg);
        for (n, &d) in hg.node_degrees().iter().enumerate() {
            assert!((d - p.node_degree[n]).abs() < 1e-12);
        }
        for (e, d) in hg.edge_degrees().into_iter().enumerate() {
            assert_eq!(d as f64, p.edge_degree[e]);
        }
        for n in 0..hg.num_nodes() {
            let from_h: Vec<usize> = (0..hg.num_edges()).filter(|&e| p.h[(n, e)] == 1.0).collect();
            assert_eq!(hg.node_edges(n), from_h.as_slice());
        }
    }
}

#[test]
fn nearest_neighbours_match_brute_force_scan() {
    let mut r = rng(4);
    let train = random_dataset(&mut r, 100, 60, 1, 20);
    for k_nn in [1, 5, 10] {
        let got = nearest_neighbors(&train, k_nn).unwrap();
        for u in 0..100 {
            let a: BTreeSet<usize> = train.user_items(u).iter().copied().collect();
            let mut sims: Vec<(f64, usize)> = (0..100)
                .filter(|&v| v != u)
                .map(|v| {
                    let b: BTreeSet<usize> = train.user_items(v).iter().copied().collect();
                    let overlap = a.intersection(&b).count() as f64;
                    (overlap / ((a.len() * b.len()) as f64).sqrt(), v)
                })
                .collect();
            sims.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
            let expected: Vec<usize> = sims.iter().take(k_nn).map(|s| s.1).collect();
            assert_eq!(got[u], expected, "user {u}, k_nn {k_nn}");
        }
    }
}

#[test]
fn uu_edges_for_identical_and_orthogonal_users() {
    let identical = InteractionDataset::from_rows(3, vec![vec![0, 1], vec![0, 1], vec![2]]).unwrap();
    let edges = build_uu_edges(&identical, 1).unwrap();
    assert_eq!(edges[0].members, vec![0, 1]);

    let orthogonal = InteractionDataset::from_rows(3, vec![vec![0], vec![1], vec![2]]).unwrap();
    let edges = build_uu_edges(&orthogonal, 1).unwrap();
    assert_eq!(edges[0].members, vec![0, 1]);
    assert_eq!(edges[1].members, vec![0, 1]);
    assert_eq!(edges[2].members, vec![0, 2]);
}

#[test]
fn ui_edges_offset_items_and_count_users() {
    let ds = InteractionDataset::from_rows(2, vec![vec![0, 1], vec![1]]).unwrap();
    let edges = build_ui_edges(&ds).unwrap();
    assert_eq!(edges.len(), 2);
    assert_eq!(edges[0].members, vec![0, 2, 3]);
    for (u, e) in edges.iter().enumerate() {
        assert_eq!(e.members.len(), 1 + ds.user_items(u).len());
    }
}

fn random_lists(r: &mut impl Rng, train: &InteractionDataset, names: &[&str], k: usize) -> Vec<RankingList> {
    names
        .iter()
        .map(|name| {
            let rows = (0..train.num_users())
                .map(|u| {
                    let scores: Vec<f64> = (0..train.num_items()).map(|_| r.random()).collect();
                    brute_topk(&scores, train.user_items(u), k)
                        .into_iter()
                        .map(|i| (i, scores[i]))
                        .collect()
                })
                .collect();
            RankingList {
                model_name: name.to_string(),
                k,
                rows,
            }
        })
        .collect()
}

#[test]
fn model_edges_reproduce_lists_and_item_membership() {
    let mut r = rng(5);
    let train = random_dataset(&mut r, 25, 40, 2, 10);
    let lists = random_lists(&mut r, &train, &["A", "B", "C"], 5);
    let edges = build_model_edges(&lists, 25, 40).unwrap();
    assert_eq!(edges.len(), 75);
    for (m, list) in lists.iter().enumerate() {
        for u in 0..25 {
            let e = &edges[m * 25 + u];
            let mut expected: Vec<usize> = list.items(u).map(|i| 25 + i).collect();
            expected.push(u);
            expected.sort_unstable();
            assert_eq!(e.members, expected);
            assert_eq!(e.members.len(), list.k + 1);
        }
    }

    let hg: Hypergraph<f64> = build_hypergraph(&train, 4, &lists, &WeightPolicy::uniform()).unwrap();
    for i in 0..40 {
        let node = hg.item_node(i);
        let mut expected: BTreeSet<usize> = (0..25).filter(|&u| train.contains(u, i)).collect();
        for (m, list) in lists.iter().enumerate() {
            for u in 0..25 {
                if list.items(u).any(|j| j == i) {
                    expected.insert(50 + m * 25 + u);
                }
            }
        }
        let got: BTreeSet<usize> = hg.node_edges(node).iter().copied().collect();
        assert_eq!(got, expected, "item {i}");
    }
}

#[test]
fn recommend_matches_dense_pipeline_on_30_users() {
    let mut r = rng(6);
    let train = random_dataset(&mut r, 30, 45, 3, 12);
    let lists = random_lists(&mut r, &train, &["BPR", "WRMF"], 10);
    let ranks = [("BPR".to_string(), 2), ("WRMF".to_string(), 1)].into();
    let policy = WeightPolicy::weighted(ranks).unwrap();
    let hg: Hypergraph<f64> = build_hypergraph(&train, 10, &lists, &policy).unwrap();
    let op = compute_affinity(&hg).unwrap();
    let cfg = RankerConfig::with_vartheta(0.3);
    let a = dense_affinity(&hg);
    let got = recommend_all(&op, &train, 10, &cfg, "HypeRS_W").unwrap();
    for u in 0..30 {
        let f = dense_solve(&a, &query_vector(hg.num_nodes(), u), cfg.alpha());
        let expected = brute_topk(&f[30..], train.user_items(u), 10);
        let items: Vec<usize> = got.items(u).collect();
        assert_eq!(items, expected, "user {u}");
    }
    got.validate(&train).unwrap();
}

#[test]
fn isolated_items_score_zero_and_rank_last() {
    // user 0 reaches items 0 and 1 only; items 2..5 are isolated
    let edges = vec![
        Hyperedge {
            members: vec![0, 2],
            weight: 1.0,
            kind: HyperedgeKind::UserItem,
        },
        Hyperedge {
            members: vec![0, 3],
            weight: 2.0,
            kind: HyperedgeKind::UserItem,
        },
    ];
    let hg = Hypergraph::from_edges(2, 6, edges).unwrap();
    let op = compute_affinity(&hg).unwrap();
    let train = InteractionDataset::from_rows(6, vec![vec![], vec![]]).unwrap();
    let top = recommend(&op, &train, 0, 2, &RankerConfig::default()).unwrap();
    assert_eq!(top.iter().map(|t| t.0).collect::<Vec<_>>(), vec![1, 0]);
    let f = solve_ranking(&op, &query_vector(8, 0), &RankerConfig::default()).unwrap();
    assert!(f[4..].iter().all(|&v| v == 0.0));
}

#[test]
fn masking_holds_for_every_user() {
    let mut r = rng(7);
    let train = random_dataset(&mut r, 40, 50, 2, 15);
    let hg: Hypergraph<f64> = build_hypergraph(&train, 5, &[], &WeightPolicy::uniform()).unwrap();
    let op = compute_affinity(&hg).unwrap();
    let list = recommend_all(&op, &train, 10, &RankerConfig::default(), "H").unwrap();
    for u in 0..40 {
        assert!(list.items(u).all(|i| !train.contains(u, i)));
    }
}

#[test]
fn disconnected_components_do_not_leak() {
    let edge = |members: Vec<usize>, weight: f64| Hyperedge {
        members,
        weight,
        kind: HyperedgeKind::UserItem,
    };
    // component {0, 2, 4, 5} and component {1, 3, 6}
    let hg = Hypergraph::from_edges(
        4,
        3,
        vec![
            edge(vec![0, 4, 5], 1.0),
            edge(vec![2, 4], 0.7),
            edge(vec![1, 3, 6], 1.3),
        ],
    )
    .unwrap();
    let op = compute_affinity(&hg).unwrap();
    let f = solve_ranking(&op, &query_vector(7, 0), &RankerConfig::with_vartheta(0.05)).unwrap();
    for n in [1, 3, 6] {
        assert_eq!(f[n], 0.0);
    }
    assert!(f[5] > 0.0 && f[2] > 0.0);
}

#[test]
fn uniform_policy_equals_unweighted_normalised_affinity() {
    let mut r = rng(8);
    let train = random_dataset(&mut r, 20, 30, 2, 8);
    let lists = random_lists(&mut r, &train, &["A", "B"], 4);
    let hg: Hypergraph<f64> = build_hypergraph(&train, 3, &lists, &WeightPolicy::uniform()).unwrap();
    assert!(hg.weights().iter().all(|&w| w == 1.0));
    // same membership with W = I in the dense oracle
    let p = dense_parts(&hg);
    let dn = nalgebra::DMatrix::from_diagonal(&p.node_degree.map(|d| if d > 0.0 { d.powf(-0.5) } else { 0.0 }));
    let de = nalgebra::DMatrix::from_diagonal(&p.edge_degree.map(|d| 1.0 / d));
    let unweighted = &dn * &p.h * de * p.h.transpose() * &dn;
    let got = to_dmatrix(&compute_affinity(&hg).unwrap().to_dense(200).unwrap());
    assert!((got - unweighted).amax() <= 1e-12);
}

fn arb_hypergraph() -> impl Strategy<Value = Hypergraph<f64>> {
    any::<u64>().prop_map(|seed| random_hypergraph(&mut rng(seed), 30))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn handshake_identity(hg in arb_hypergraph()) {
        let lhs: f64 = hg.node_degrees().iter().sum();
        let rhs: f64 = hg.edges().iter().map(|e| e.weight * e.members.len() as f64).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn affinity_symmetric_nonnegative_and_bounded(hg in arb_hypergraph()) {
        let a = to_dmatrix(&compute_affinity(&hg).unwrap().to_dense(64).unwrap());
        prop_assert!((&a - a.transpose()).amax() <= 1e-12);
        prop_assert!(a.iter().all(|&v| v >= 0.0));
        let rho = a.symmetric_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(rho <= 1.0 + 1e-9);
    }

    #[test]
    fn reweighting_keeps_symmetry(hg in arb_hypergraph(), seed in any::<u64>()) {
        let mut r = rng(seed);
        let edges: Vec<_> = hg
            .edges()
            .iter()
            .map(|e| Hyperedge { weight: r.random_range(0.01..10.0), ..e.clone() })
            .collect();
        let hg = Hypergraph::from_edges(hg.num_users(), hg.num_items(), edges).unwrap();
        let a = to_dmatrix(&compute_affinity(&hg).unwrap().to_dense(64).unwrap());
        prop_assert!((&a - a.transpose()).amax() <= 1e-12);
    }

    #[test]
    fn query_scaling_scales_scores_and_keeps_order(hg in arb_hypergraph(), c in 0.01f64..100.0, node in 0usize..64) {
        let node = node % hg.num_nodes();
        let op = compute_affinity(&hg).unwrap();
        let cfg = tight(0.2);
        let y = query_vector::<f64>(hg.num_nodes(), node);
        let cy: Vec<f64> = y.iter().map(|v| v * c).collect();
        let f = solve_ranking(&op, &y, &cfg).unwrap();
        let g = solve_ranking(&op, &cy, &cfg).unwrap();
        for (a, b) in f.iter().zip(&g) {
            prop_assert!((a * c - b).abs() <= 1e-9 * c.max(1.0));
        }
        let k = hg.num_nodes().min(5);
        // rounding may reorder near-ties, so compare against gaps well above it
        let ff = brute_topk(&f, &[], hg.num_nodes());
        let gg = brute_topk(&g, &[], hg.num_nodes());
        for (x, y) in ff.iter().zip(&gg).take(k) {
            if x != y {
                prop_assert!((f[*x] - f[*y]).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn iterates_contract_geometrically_in_l2(hg in arb_hypergraph(), vartheta in 0.01f64..0.99) {
        let op = compute_affinity(&hg).unwrap();
        let cfg = RankerConfig { vartheta, tol: 1e-10, max_iter: 20_000 };
        let alpha = cfg.alpha();
        let y = query_vector::<f64>(hg.num_nodes(), 0);
        // replay the iteration to get L2 step sizes
        let mut f: Vec<f64> = y.iter().map(|v| (1.0 - alpha) * v).collect();
        let mut prev_step = f64::INFINITY;
        let mut first = None;
        // A = D^{1/2} P D^{-1/2} with P row-stochastic, so in L-inf the
        // contraction only holds up to sqrt(d_max / d_min)
        let degrees: Vec<f64> = hg.node_degrees().iter().copied().filter(|&d| d > 0.0).collect();
        let d_max = degrees.iter().copied().fold(0.0, f64::max);
        let d_min = degrees.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = (d_max / d_min).sqrt();
        let mut first_inf = None;
        for t in 0..200 {
            let af = op.mul_vec(&f);
            let next: Vec<f64> = af.iter().zip(&y).map(|(a, yv)| alpha * a + (1.0 - alpha) * yv).collect();
            let step = next.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let s1 = *first.get_or_insert(step);
            prop_assert!(step <= alpha.powi(t) * s1 * (1.0 + 1e-9) + 1e-15);
            prop_assert!(step <= prev_step * (1.0 + 1e-9) + 1e-15);
            let step_inf = max_abs_diff(&next, &f);
            let s1_inf = *first_inf.get_or_insert(step_inf);
            prop_assert!(step_inf <= spread * alpha.powi(t) * s1_inf * (1.0 + 1e-9) + 1e-15);
            prev_step = step;
            f = next;
        }
        let (_, trace) = solve_ranking_traced(&op, &y, &cfg, true).unwrap();
        prop_assert_eq!(trace.deltas.len(), trace.iterations);
    }
}
