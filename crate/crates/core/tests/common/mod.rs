//! Shared fixtures and dense reference computations for the integration tests.
#![allow(dead_code)]

use hypers::hypergraph::{Hyperedge, HyperedgeKind, Hypergraph};
use hypers::InteractionDataset;
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random hypergraph on at most `max_nodes` nodes, with random edge sizes and
/// weights in `[0.1, 3)`. Some nodes may be left isolated.
pub fn random_hypergraph(rng: &mut impl Rng, max_nodes: usize) -> Hypergraph<f64> {
    let n = rng.random_range(2..=max_nodes);
    let nu = rng.random_range(1..n);
    let ne = rng.random_range(1..=2 * n);
    let edges = (0..ne)
        .map(|_| {
            let size = rng.random_range(2..=n.min(8));
            let mut members = sample(rng, n, size).into_vec();
            members.sort_unstable();
            Hyperedge {
                members,
                weight: rng.random_range(0.1..3.0),
                kind: HyperedgeKind::UserItem,
            }
        })
        .collect();
    Hypergraph::from_edges(nu, n - nu, edges).unwrap()
}

/// Random interaction matrix where every user has between `lo` and `hi` items.
pub fn random_dataset(rng: &mut impl Rng, users: usize, items: usize, lo: usize, hi: usize) -> InteractionDataset {
    let rows = (0..users)
        .map(|_| {
            let d = rng.random_range(lo..=hi);
            sample(rng, items, d).into_vec()
        })
        .collect();
    InteractionDataset::from_rows(items, rows).unwrap()
}

/// Dense `H` (nodes x edges), edge weights, and node/edge degrees recomputed
/// from the edge list alone.
pub struct DenseParts {
    pub h: DMatrix<f64>,
    pub w: DVector<f64>,
    pub node_degree: DVector<f64>,
    pub edge_degree: DVector<f64>,
}

pub fn dense_parts(hg: &Hypergraph<f64>) -> DenseParts {
    let (n, e) = (hg.num_nodes(), hg.num_edges());
    let mut h = DMatrix::zeros(n, e);
    let mut w = DVector::zeros(e);
    for (j, edge) in hg.edges().iter().enumerate() {
        for &v in &edge.members {
            h[(v, j)] = 1.0;
        }
        w[j] = edge.weight;
    }
    let node_degree = &h * &w;
    let edge_degree = h.row_sum().transpose();
    DenseParts {
        h,
        w,
        node_degree,
        edge_degree,
    }
}

/// `Dn^{-1/2} H W De^{-1} H^T Dn^{-1/2}` as a dense triple product, with the
/// pseudo-inverse for zero-degree nodes.
pub fn dense_affinity(hg: &Hypergraph<f64>) -> DMatrix<f64> {
    let p = dense_parts(hg);
    let dn = DMatrix::from_diagonal(&p.node_degree.map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }));
    let w = DMatrix::from_diagonal(&p.w);
    let de = DMatrix::from_diagonal(&p.edge_degree.map(|d| 1.0 / d));
    &dn * &p.h * w * de * p.h.transpose() * &dn
}

/// Closed form `(1 - alpha) (I - alpha A)^{-1} y` by LU.
pub fn dense_solve(a: &DMatrix<f64>, y: &[f64], alpha: f64) -> Vec<f64> {
    let n = a.nrows();
    let m = DMatrix::identity(n, n) - a * alpha;
    let rhs = DVector::from_column_slice(y) * (1.0 - alpha);
    m.lu()
        .solve(&rhs)
        .expect("I - alpha A is nonsingular")
        .as_slice()
        .to_vec()
}

pub fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Top `k` of `scores` skipping `exclude`, by a full stable sort: score
/// descending, index ascending.
pub fn brute_topk(scores: &[f64], exclude: &[usize], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|i| !exclude.contains(i)).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}
