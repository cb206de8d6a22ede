//! The unified user-item hypergraph.
//!
//! Node layout: users occupy `0..|U|`, items `|U|..|U|+|I|`. Three hyperedge
//! families are built per user: its training interactions (`UI`), itself plus
//! its nearest neighbours by cosine similarity (`UU`), and itself plus the
//! top-k list of each base model (`M`).

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::data::InteractionDataset;
use crate::ensemble::WeightPolicy;
use crate::recommenders::{top_k, RankingList};
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HyperedgeKind {
    /// A user and the items it interacted with.
    UserItem,
    /// A user and its nearest neighbours.
    UserUser,
    /// A user and the top-k items of the named model.
    Model(String),
}

impl fmt::Display for HyperedgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperedgeKind::UserItem => f.write_str("UI"),
            HyperedgeKind::UserUser => f.write_str("UU"),
            HyperedgeKind::Model(m) => write!(f, "M:{m}"),
        }
    }
}

impl FromStr for HyperedgeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "UI" => Ok(HyperedgeKind::UserItem),
            "UU" => Ok(HyperedgeKind::UserUser),
            _ => match s.strip_prefix("M:") {
                Some(name) if !name.is_empty() => Ok(HyperedgeKind::Model(name.to_owned())),
                _ => Err(Error::Data(format!("unknown hyperedge kind `{s}`"))),
            },
        }
    }
}

/// An unweighted hyperedge as produced by the family builders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    /// Sorted node indices.
    pub members: Vec<usize>,
    pub kind: HyperedgeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge<T> {
    pub members: Vec<usize>,
    pub weight: T,
    pub kind: HyperedgeKind,
}

/// One hyperedge per user: the user node and its training item nodes.
pub fn build_ui_edges(train: &InteractionDataset) -> Result<Vec<EdgeSpec>> {
    let nu = train.num_users();
    (0..nu)
        .map(|u| {
            let items = train.user_items(u);
            if items.is_empty() {
                return Err(Error::Data(format!(
                    "user {} has no training interactions",
                    train.users().id(u).unwrap_or_default()
                )));
            }
            let mut members = Vec::with_capacity(items.len() + 1);
            members.push(u);
            members.extend(items.iter().map(|&i| nu + i));
            Ok(EdgeSpec {
                members,
                kind: HyperedgeKind::UserItem,
            })
        })
        .collect()
}

/// Cosine similarity of two binary rows given their overlap and sizes; zero
/// when either row is empty.
pub fn binary_cosine(overlap: usize, len_a: usize, len_b: usize) -> f64 {
    if len_a == 0 || len_b == 0 {
        0.0
    } else {
        overlap as f64 / ((len_a * len_b) as f64).sqrt()
    }
}

/// The `k_nn` most cosine-similar other users of every user (ties by ascending
/// user index), computed on training rows.
pub fn nearest_neighbors(train: &InteractionDataset, k_nn: usize) -> Result<Vec<Vec<usize>>> {
    let nu = train.num_users();
    if k_nn == 0 || k_nn >= nu {
        return Err(Error::InvalidParameter(format!("k_nn must be in 1..{nu} (got {k_nn})")));
    }
    let by_item = train.item_users();
    let degree: Vec<usize> = train.rows().iter().map(Vec::len).collect();
    Ok((0..nu)
        .into_par_iter()
        .map(|u| {
            let mut overlap = vec![0usize; nu];
            for &i in train.user_items(u) {
                for &v in &by_item[i] {
                    overlap[v] += 1;
                }
            }
            let sims: Vec<f64> = (0..nu)
                .map(|v| binary_cosine(overlap[v], degree[u], degree[v]))
                .collect();
            top_k(&sims, &[u], k_nn).into_iter().map(|(v, _)| v).collect()
        })
        .collect())
}

/// One hyperedge per user: the user node and its `k_nn` nearest neighbours.
pub fn build_uu_edges(train: &InteractionDataset, k_nn: usize) -> Result<Vec<EdgeSpec>> {
    Ok(nearest_neighbors(train, k_nn)?
        .into_iter()
        .enumerate()
        .map(|(u, mut members)| {
            members.push(u);
            members.sort_unstable();
            EdgeSpec {
                members,
                kind: HyperedgeKind::UserUser,
            }
        })
        .collect())
}

/// One hyperedge per (model, user): the user node and the model's top-k items.
pub fn build_model_edges(lists: &[RankingList], num_users: usize, num_items: usize) -> Result<Vec<EdgeSpec>> {
    let mut names = HashSet::new();
    let mut edges = Vec::with_capacity(lists.len() * num_users);
    for list in lists {
        if !names.insert(list.model_name.as_str()) {
            return Err(Error::Data(format!("model `{}` supplied twice", list.model_name)));
        }
        if list.num_users() != num_users {
            return Err(Error::Data(format!(
                "model `{}` ranks {} users, expected {num_users}",
                list.model_name,
                list.num_users()
            )));
        }
        for u in 0..num_users {
            let mut members = Vec::with_capacity(list.k + 1);
            members.push(u);
            for i in list.items(u) {
                if i >= num_items {
                    return Err(Error::Data(format!(
                        "model `{}` recommends unknown item {i}",
                        list.model_name
                    )));
                }
                members.push(num_users + i);
            }
            members.sort_unstable();
            edges.push(EdgeSpec {
                members,
                kind: HyperedgeKind::Model(list.model_name.clone()),
            });
        }
    }
    Ok(edges)
}

/// Weighted hypergraph with incidence stored both ways: `edges[e].members`
/// (columns of `H`) and `node_edges[n]` (rows of `H`).
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph<T> {
    num_users: usize,
    num_items: usize,
    edges: Vec<Hyperedge<T>>,
    node_edges: Vec<Vec<usize>>,
    node_degrees: Vec<T>,
}

/// Builds the hypergraph from the three hyperedge families, weighting each
/// edge by `policy`.
pub fn assemble<T: Scalar>(
    num_users: usize,
    num_items: usize,
    ui: Vec<EdgeSpec>,
    uu: Vec<EdgeSpec>,
    model_edges: Vec<EdgeSpec>,
    policy: &WeightPolicy,
) -> Result<Hypergraph<T>> {
    let edges = ui
        .into_iter()
        .chain(uu)
        .chain(model_edges)
        .map(|spec| {
            let weight = policy.weight(&spec.kind)?;
            Ok(Hyperedge {
                members: spec.members,
                weight: T::of(weight),
                kind: spec.kind,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Hypergraph::from_edges(num_users, num_items, edges)
}

/// Convenience wrapper: UI and UU edges from `train`, plus one M family per list.
pub fn build_hypergraph<T: Scalar>(
    train: &InteractionDataset,
    k_nn: usize,
    lists: &[RankingList],
    policy: &WeightPolicy,
) -> Result<Hypergraph<T>> {
    let (nu, ni) = (train.num_users(), train.num_items());
    assemble(
        nu,
        ni,
        build_ui_edges(train)?,
        build_uu_edges(train, k_nn)?,
        build_model_edges(lists, nu, ni)?,
        policy,
    )
}

impl<T: Scalar> Hypergraph<T> {
    pub fn from_edges(num_users: usize, num_items: usize, edges: Vec<Hyperedge<T>>) -> Result<Self> {
        let n = num_users + num_items;
        let mut node_edges = vec![Vec::new(); n];
        let mut node_degrees = vec![T::zero(); n];
        for (e, edge) in edges.iter().enumerate() {
            if edge.members.len() < 2 {
                return Err(Error::Data(format!(
                    "hyperedge {e} ({}) has {} member(s), need at least 2",
                    edge.kind,
                    edge.members.len()
                )));
            }
            if !(edge.weight > T::zero()) || !edge.weight.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "hyperedge {e} ({}) has non-positive weight {}",
                    edge.kind, edge.weight
                )));
            }
            if edge.members.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Data(format!(
                    "hyperedge {e} members must be strictly increasing"
                )));
            }
            if let Some(&bad) = edge.members.iter().find(|&&m| m >= n) {
                return Err(Error::Data(format!(
                    "hyperedge {e} references node {bad} outside 0..{n}"
                )));
            }
            for &m in &edge.members {
                node_edges[m].push(e);
                node_degrees[m] += edge.weight;
            }
        }
        Ok(Self {
            num_users,
            num_items,
            edges,
            node_edges,
            node_degrees,
        })
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    pub fn num_nodes(&self) -> usize {
        self.num_users + self.num_items
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn item_node(&self, item: usize) -> usize {
        self.num_users + item
    }

    pub fn edges(&self) -> &[Hyperedge<T>] {
        &self.edges
    }

    /// Edges containing node `n`, ascending.
    pub fn node_edges(&self, n: usize) -> &[usize] {
        &self.node_edges[n]
    }

    /// `d(n) = sum of weights of edges containing n`.
    pub fn node_degrees(&self) -> &[T] {
        &self.node_degrees
    }

    /// `delta(e) = |members(e)|`.
    pub fn edge_degree(&self, e: usize) -> usize {
        self.edges[e].members.len()
    }

    pub fn edge_degrees(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.members.len()).collect()
    }

    pub fn weights(&self) -> Vec<T> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    pub fn incidence_nnz(&self) -> usize {
        self.edges.iter().map(|e| e.members.len()).sum()
    }

    /// Nodes in no hyperedge; their rows of the affinity operator are zero.
    pub fn isolated_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&n| self.node_edges[n].is_empty())
            .collect()
    }

    /// Edge counts as `(UI, UU, M)`.
    pub fn counts_by_kind(&self) -> (usize, usize, usize) {
        self.edges.iter().fold((0, 0, 0), |(a, b, c), e| match e.kind {
            HyperedgeKind::UserItem => (a + 1, b, c),
            HyperedgeKind::UserUser => (a, b + 1, c),
            HyperedgeKind::Model(_) => (a, b, c + 1),
        })
    }

    /// Tab-separated per-edge record: index, kind, anchor user, weight, degree.
    pub fn weight_audit(&self) -> String {
        let mut out = String::from("edge\tkind\tuser\tweight\tdegree\n");
        for (e, edge) in self.edges.iter().enumerate() {
            let _ = writeln!(
                out,
                "{e}\t{}\t{}\t{}\t{}",
                edge.kind,
                edge.members[0],
                edge.weight,
                edge.members.len()
            );
        }
        out
    }

    /// Sparse-triplet text form: a `nodes edges users incidences` header, one
    /// `node edge` line per incidence, then one `weight kind` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {} {}",
            self.num_nodes(),
            self.num_edges(),
            self.num_users,
            self.incidence_nnz()
        );
        for (e, edge) in self.edges.iter().enumerate() {
            for &n in &edge.members {
                let _ = writeln!(out, "{n} {e}");
            }
        }
        for edge in &self.edges {
            let _ = writeln!(out, "{} {}", edge.weight, edge.kind);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Data(format!("hypergraph line {line}: {msg}"));
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or_else(|| bad(0, "empty file"))?;
        let h: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(ln, "header must be `nodes edges users incidences`"))?;
        let [n, ne, nu, nnz] = h[..] else {
            return Err(bad(ln, "header must have four fields"));
        };
        if nu > n {
            return Err(bad(ln, "more users than nodes"));
        }
        let mut members = vec![Vec::new(); ne];
        for _ in 0..nnz {
            let (ln, l) = lines.next().ok_or_else(|| bad(0, "truncated incidence list"))?;
            let mut it = l.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(node)), Some(Ok(e)), None) if e < ne => members[e].push(node),
                _ => return Err(bad(ln, "expected `node edge`")),
            }
        }
        let mut edges = Vec::with_capacity(ne);
        for m in members {
            let (ln, l) = lines.next().ok_or_else(|| bad(0, "truncated edge records"))?;
            let (w, kind) = l.split_once(' ').ok_or_else(|| bad(ln, "expected `weight kind`"))?;
            let weight: T = w.parse().map_err(|_| bad(ln, "invalid weight"))?;
            let mut m = m;
            m.sort_unstable();
            edges.push(Hyperedge {
                members: m,
                weight,
                kind: kind.trim().parse()?,
            });
        }
        if let Some((ln, _)) = lines.next() {
            return Err(bad(ln, "trailing content"));
        }
        Self::from_edges(nu, n - nu, edges)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}
