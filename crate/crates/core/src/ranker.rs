//! Hypergraph ranking: the normalized affinity operator and the regularized
//! ranking solve.
//!
//! The affinity is `A = Dn^{-1/2} H W De^{-1} H^T Dn^{-1/2}`, with the
//! pseudo-inverse convention `Dn^{-1/2}(n, n) = 0` for nodes of zero degree.
//! Scores for a query `y` are
//!
//! ```text
//! f* = (1 - a) (I - a A)^{-1} y,    a = 1 / (1 + vartheta)
//! ```
//!
//! obtained by iterating `f <- a A f + (1 - a) y` from `f = (1 - a) y`.
//! `A` is symmetric with spectral radius at most one, so the iteration is a
//! contraction for every `vartheta > 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::InteractionDataset;
use crate::hypergraph::Hypergraph;
use crate::linalg::CsrMatrix;
use crate::recommenders::{check_k, top_k, RankingList};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RankerConfig {
    /// Regularizer balancing smoothness against fidelity to the query.
    pub vartheta: f64,
    /// Stop once the L-infinity change between iterates drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RankerConfig {
    fn default() -> Self {
        Self {
            vartheta: 0.5,
            tol: 1e-8,
            max_iter: 5000,
        }
    }
}

impl RankerConfig {
    pub fn with_vartheta(vartheta: f64) -> Self {
        Self {
            vartheta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.vartheta > 0.0) || !self.vartheta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "vartheta must be > 0 (got {})",
                self.vartheta
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be > 0 (got {})", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }

    /// Propagation weight `1 / (1 + vartheta)`.
    pub fn alpha(&self) -> f64 {
        1.0 / (1.0 + self.vartheta)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr<T> {
    /// `A x = S H (C (H^T (S x)))` with `S = Dn^{-1/2}`, `C = W De^{-1}`.
    Factored {
        edge_ptr: Vec<usize>,
        edge_nodes: Vec<usize>,
        node_ptr: Vec<usize>,
        node_edges: Vec<usize>,
        edge_scale: Vec<T>,
    },
    Explicit(CsrMatrix<T>),
}

/// Symmetric normalized node-node affinity, applied by sparse products.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityOperator<T> {
    num_nodes: usize,
    num_users: usize,
    inv_sqrt_degree: Vec<T>,
    repr: Repr<T>,
}

/// Builds the affinity operator of `hg` in factored form; it is never
/// expanded to a node-by-node matrix unless [`AffinityOperator::materialized`]
/// is called.
pub fn compute_affinity<T: Scalar>(hg: &Hypergraph<T>) -> Result<AffinityOperator<T>> {
    let n = hg.num_nodes();
    let mut edge_ptr = Vec::with_capacity(hg.num_edges() + 1);
    let mut edge_nodes = Vec::with_capacity(hg.incidence_nnz());
    let mut edge_scale = Vec::with_capacity(hg.num_edges());
    edge_ptr.push(0);
    for (e, edge) in hg.edges().iter().enumerate() {
        if edge.members.is_empty() {
            return Err(Error::Data(format!("hyperedge {e} has degree 0")));
        }
        edge_nodes.extend_from_slice(&edge.members);
        edge_ptr.push(edge_nodes.len());
        edge_scale.push(edge.weight / T::of(edge.members.len() as f64));
    }
    let mut node_ptr = Vec::with_capacity(n + 1);
    let mut node_edges = Vec::with_capacity(hg.incidence_nnz());
    node_ptr.push(0);
    for v in 0..n {
        node_edges.extend_from_slice(hg.node_edges(v));
        node_ptr.push(node_edges.len());
    }
    let inv_sqrt_degree = hg
        .node_degrees()
        .iter()
        .map(|&d| if d > T::zero() { T::one() / d.sqrt() } else { T::zero() })
        .collect();
    Ok(AffinityOperator {
        num_nodes: n,
        num_users: hg.num_users(),
        inv_sqrt_degree,
        repr: Repr::Factored {
            edge_ptr,
            edge_nodes,
            node_ptr,
            node_edges,
            edge_scale,
        },
    })
}

impl<T: Scalar> AffinityOperator<T> {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.repr, Repr::Explicit(_))
    }

    /// `out = A x`.
    pub fn apply(&self, x: &[T], out: &mut [T]) {
        match &self.repr {
            Repr::Explicit(m) => m.mul_vec_into(x, out),
            Repr::Factored {
                edge_ptr,
                edge_nodes,
                node_ptr,
                node_edges,
                edge_scale,
            } => {
                let s = &self.inv_sqrt_degree;
                let edge_sum: Vec<T> = (0..edge_scale.len())
                    .map(|e| {
                        let acc = edge_nodes[edge_ptr[e]..edge_ptr[e + 1]]
                            .iter()
                            .fold(T::zero(), |acc, &v| acc + s[v] * x[v]);
                        edge_scale[e] * acc
                    })
                    .collect();
                for (v, o) in out.iter_mut().enumerate() {
                    let acc = node_edges[node_ptr[v]..node_ptr[v + 1]]
                        .iter()
                        .fold(T::zero(), |acc, &e| acc + edge_sum[e]);
                    *o = s[v] * acc;
                }
            }
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.num_nodes];
        self.apply(x, &mut out);
        out
    }

    /// Expands to an explicit sparse matrix. Worth it when the hypergraph is
    /// small enough that `nnz(A)` is below twice the incidence count.
    pub fn materialized(&self) -> Self {
        let Repr::Factored {
            edge_ptr,
            edge_nodes,
            node_ptr,
            node_edges,
            edge_scale,
        } = &self.repr
        else {
            return self.clone();
        };
        let s = &self.inv_sqrt_degree;
        let rows = (0..self.num_nodes)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::new();
                for &e in &node_edges[node_ptr[i]..node_ptr[i + 1]] {
                    let c = edge_scale[e] * s[i];
                    for &j in &edge_nodes[edge_ptr[e]..edge_ptr[e + 1]] {
                        row.push((j, c * s[j]));
                    }
                }
                row
            })
            .collect();
        Self {
            num_nodes: self.num_nodes,
            num_users: self.num_users,
            inv_sqrt_degree: self.inv_sqrt_degree.clone(),
            repr: Repr::Explicit(CsrMatrix::from_rows(self.num_nodes, rows)),
        }
    }

    /// Dense copy, refused above `max_nodes` nodes.
    pub fn to_dense(&self, max_nodes: usize) -> Result<Vec<Vec<T>>> {
        if self.num_nodes > max_nodes {
            return Err(Error::InvalidParameter(format!(
                "refusing to densify a {}-node affinity (limit {max_nodes})",
                self.num_nodes
            )));
        }
        match &self.repr {
            Repr::Explicit(m) => Ok(m.to_dense()),
            Repr::Factored { .. } => match self.materialized().repr {
                Repr::Explicit(m) => Ok(m.to_dense()),
                Repr::Factored { .. } => unreachable!(),
            },
        }
    }
}

/// One-hot query at a node.
pub fn query_vector<T: Scalar>(num_nodes: usize, node: usize) -> Vec<T> {
    let mut y = vec![T::zero(); num_nodes];
    y[node] = T::one();
    y
}

/// Iteration count and the L-infinity step sizes seen by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub iterations: usize,
    pub deltas: Vec<f64>,
}

pub fn solve_ranking<T: Scalar>(op: &AffinityOperator<T>, y: &[T], cfg: &RankerConfig) -> Result<Vec<T>> {
    solve_ranking_traced(op, y, cfg, false).map(|(f, _)| f)
}

/// Fixed-point solve; when `record` is set every step size is kept in the trace.
pub fn solve_ranking_traced<T: Scalar>(
    op: &AffinityOperator<T>,
    y: &[T],
    cfg: &RankerConfig,
    record: bool,
) -> Result<(Vec<T>, SolveTrace)> {
    cfg.validate()?;
    if y.len() != op.num_nodes {
        return Err(Error::InvalidParameter(format!(
            "query has length {}, operator has {} nodes",
            y.len(),
            op.num_nodes
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("query vector must be finite".into()));
    }
    let alpha = T::of(cfg.alpha());
    let restart: Vec<T> = y.iter().map(|&v| (T::one() - alpha) * v).collect();
    let mut f = restart.clone();
    let mut next = vec![T::zero(); op.num_nodes];
    let mut trace = SolveTrace {
        iterations: 0,
        deltas: Vec::new(),
    };
    let mut delta = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        op.apply(&f, &mut next);
        delta = 0.0;
        for ((n, &r), &old) in next.iter_mut().zip(&restart).zip(&f) {
            *n = alpha * *n + r;
            delta = delta.max((*n - old).abs().as_f64());
        }
        std::mem::swap(&mut f, &mut next);
        trace.iterations = it;
        if record {
            trace.deltas.push(delta);
        }
        if delta < cfg.tol {
            return Ok((f, trace));
        }
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iter,
        last_delta: delta,
    })
}

/// Regularized ranking loss whose unique minimiser is the solver's fixed
/// point: `1/2 f^T (I - A) f + vartheta/2 |f - y|^2`.
pub fn ranking_loss<T: Scalar>(op: &AffinityOperator<T>, f: &[T], y: &[T], vartheta: f64) -> f64 {
    let af = op.mul_vec(f);
    let smooth: f64 = f.iter().zip(&af).map(|(&fi, &ai)| (fi * (fi - ai)).as_f64()).sum();
    let fit: f64 = f.iter().zip(y).map(|(&fi, &yi)| (fi - yi).as_f64().powi(2)).sum();
    0.5 * smooth + 0.5 * vartheta * fit
}

/// Ranks items for user `u`: query at the user node, solve, mask training
/// items, return the top `k` `(item, score)` pairs.
pub fn recommend<T: Scalar>(
    op: &AffinityOperator<T>,
    train: &InteractionDataset,
    u: usize,
    k: usize,
    cfg: &RankerConfig,
) -> Result<Vec<(usize, T)>> {
    if u >= op.num_users || u >= train.num_users() {
        return Err(Error::InvalidParameter(format!("user index {u} out of range")));
    }
    if op.num_nodes != train.num_users() + train.num_items() {
        return Err(Error::InvalidParameter(
            "affinity operator does not match the dataset".into(),
        ));
    }
    let f = solve_ranking(op, &query_vector(op.num_nodes, u), cfg)?;
    Ok(top_k(&f[op.num_users..], train.user_items(u), k))
}

/// [`recommend`] for every user, in parallel.
pub fn recommend_all<T: Scalar>(
    op: &AffinityOperator<T>,
    train: &InteractionDataset,
    k: usize,
    cfg: &RankerConfig,
    model_name: &str,
) -> Result<RankingList> {
    check_k(train, k)?;
    cfg.validate()?;
    let rows = (0..train.num_users())
        .into_par_iter()
        .map(|u| {
            Ok(recommend(op, train, u, k, cfg)?
                .into_iter()
                .map(|(i, s)| (i, s.as_f64()))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankingList {
        model_name: model_name.to_owned(),
        k,
        rows,
    })
}
