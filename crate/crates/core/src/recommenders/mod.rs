//! Base recommenders and the top-k ranking lists they exchange.

mod bpr;
mod model;
mod warp;
mod wrmf;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bpr::train_bpr;
pub use model::{BprParams, FactorModel, ModelKind, ModelParams, WarpParams, WrmfParams};
pub use warp::{train_warp, warp_rank_estimate, warp_rank_weight};
pub use wrmf::{train_wrmf, wrmf_objective};

use crate::data::InteractionDataset;
use crate::{Error, Result, Scalar};

/// Per-user top-k lists of one model: `rows[u]` holds `(item, score)` pairs,
/// best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingList {
    pub model_name: String,
    pub k: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl RankingList {
    pub fn num_users(&self) -> usize {
        self.rows.len()
    }

    pub fn items(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[u].iter().map(|&(i, _)| i)
    }

    pub fn item_rows(&self) -> Vec<Vec<usize>> {
        (0..self.num_users()).map(|u| self.items(u).collect()).collect()
    }

    /// Same model name, length and per-user item order; scores are ignored.
    pub fn same_items(&self, other: &RankingList) -> bool {
        self.model_name == other.model_name && self.k == other.k && self.item_rows() == other.item_rows()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.model_name = name.into();
        self
    }

    /// Checks the list invariants against the training interactions: exactly
    /// `k` distinct items per user, non-increasing scores, no training item.
    pub fn validate(&self, train: &InteractionDataset) -> Result<()> {
        if self.rows.len() != train.num_users() {
            return Err(Error::Data(format!(
                "{}: {} ranking rows for {} users",
                self.model_name,
                self.rows.len(),
                train.num_users()
            )));
        }
        for (u, row) in self.rows.iter().enumerate() {
            if row.len() != self.k {
                return Err(Error::Data(format!(
                    "{}: user {u} has {} entries, expected {}",
                    self.model_name,
                    row.len(),
                    self.k
                )));
            }
            let distinct: HashSet<usize> = row.iter().map(|&(i, _)| i).collect();
            if distinct.len() != row.len() {
                return Err(Error::Data(format!("{}: user {u} has repeated items", self.model_name)));
            }
            if row.windows(2).any(|w| w[0].1 < w[1].1) {
                return Err(Error::Data(format!(
                    "{}: user {u} scores are not non-increasing",
                    self.model_name
                )));
            }
            if let Some(&(i, _)) = row.iter().find(|&&(i, _)| train.contains(u, i)) {
                return Err(Error::Data(format!(
                    "{}: user {u} is recommended training item {i}",
                    self.model_name
                )));
            }
        }
        Ok(())
    }

    /// Writes `user_id,item_id,rank` rows (rank 1 is best) with a header line.
    pub fn to_csv(&self, train: &InteractionDataset) -> String {
        let mut out = String::from("user_id,item_id,rank\n");
        for (u, row) in self.rows.iter().enumerate() {
            let user = train.users().id(u).unwrap_or_default();
            for (r, &(i, _)) in row.iter().enumerate() {
                let item = train.items().id(i).unwrap_or_default();
                let _ = writeln!(out, "{user},{item},{}", r + 1);
            }
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>, train: &InteractionDataset) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv(train)).map_err(|e| Error::io(path, e))
    }
}

/// Top `k` entries of `scores` excluding the sorted index list `exclude`;
/// highest score first, ties by ascending index.
pub fn top_k<T: Scalar>(scores: &[T], exclude: &[usize], k: usize) -> Vec<(usize, T)> {
    let mut cand: Vec<(usize, T)> = scores
        .iter()
        .copied()
        .enumerate()
        .filter(|(i, _)| exclude.binary_search(i).is_err())
        .collect();
    let order = |a: &(usize, T), b: &(usize, T)| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0));
    if k < cand.len() {
        cand.select_nth_unstable_by(k, order);
        cand.truncate(k);
    }
    cand.sort_unstable_by(order);
    cand
}

/// Largest `k` for which every user still has `k` unseen items.
pub fn max_feasible_k(train: &InteractionDataset) -> usize {
    let max_deg = train.rows().iter().map(Vec::len).max().unwrap_or(0);
    train.num_items().saturating_sub(max_deg)
}

pub(crate) fn check_k(train: &InteractionDataset, k: usize) -> Result<()> {
    let feasible = max_feasible_k(train);
    if k == 0 || k > feasible {
        return Err(Error::InvalidParameter(format!(
            "k = {k} is not feasible: at most {feasible} unseen items remain for some user"
        )));
    }
    Ok(())
}

/// Per-user top-k by inner product, with training items masked out.
pub fn rank_topk<T: Scalar>(model: &FactorModel<T>, train: &InteractionDataset, k: usize) -> Result<RankingList> {
    check_k(train, k)?;
    if model.num_users() != train.num_users() || model.num_items() != train.num_items() {
        return Err(Error::InvalidParameter(format!(
            "model is {}x{}, dataset is {}x{}",
            model.num_users(),
            model.num_items(),
            train.num_users(),
            train.num_items()
        )));
    }
    let rows = (0..train.num_users())
        .into_par_iter()
        .map(|u| {
            top_k(&model.scores(u), train.user_items(u), k)
                .into_iter()
                .map(|(i, s)| (i, s.as_f64()))
                .collect()
        })
        .collect();
    Ok(RankingList {
        model_name: model.name.clone(),
        k,
        rows,
    })
}

/// Trains the built-in model selected by `params`.
pub fn fit<T: Scalar>(params: &ModelParams, train: &InteractionDataset, seed: u64) -> Result<FactorModel<T>> {
    match params {
        ModelParams::Bpr(p) => train_bpr(train, p, seed),
        ModelParams::Warp(p) => train_warp(train, p, seed),
        ModelParams::Wrmf(p) => train_wrmf(train, p, seed),
    }
}

pub(crate) fn check_sgd_params(factors: usize, learning_rate: f64, regularization: f64) -> Result<()> {
    if factors == 0 {
        return Err(Error::InvalidParameter("factors must be >= 1".into()));
    }
    if !(learning_rate > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "learning rate must be > 0 (got {learning_rate})"
        )));
    }
    if !(regularization >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "regularization must be >= 0 (got {regularization})"
        )));
    }
    Ok(())
}

/// Uniform draw from the items not in `seen` (sorted). The caller guarantees
/// at least one such item exists.
pub(crate) fn sample_negative(rng: &mut impl Rng, seen: &[usize], num_items: usize) -> usize {
    debug_assert!(seen.len() < num_items);
    loop {
        let j = rng.random_range(0..num_items);
        if seen.binary_search(&j).is_err() {
            return j;
        }
    }
}

/// How the third column of an external rankings file is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankColumn {
    /// `rank` / `score` header, else integers in `1..=k` are ranks.
    #[default]
    Auto,
    Rank,
    Score,
}

/// Loads `user_id,item_id,rank` (or `...,score`) rows produced by an outside
/// recommender and validates them against the training split.
///
/// Rank-derived scores are `k + 1 - rank`.
pub fn load_external_rankings(
    path: impl AsRef<Path>,
    model_name: &str,
    train: &InteractionDataset,
    k: usize,
    column: RankColumn,
) -> Result<RankingList> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_external_rankings(path, &text, model_name, train, k, column)
}

pub(crate) fn parse_external_rankings(
    path: &Path,
    text: &str,
    model_name: &str,
    train: &InteractionDataset,
    k: usize,
    mut column: RankColumn,
) -> Result<RankingList> {
    let delimiter = if text.lines().next().is_some_and(|l| l.contains('\t')) {
        b'\t'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut entries: Vec<Vec<(usize, f64, u64)>> = vec![Vec::new(); train.num_users()];
    let mut first = true;
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        if std::mem::take(&mut first) && record.len() >= 3 && record[2].parse::<f64>().is_err() {
            let name = record[2].to_ascii_lowercase();
            if column == RankColumn::Auto {
                column = if name.contains("score") {
                    RankColumn::Score
                } else {
                    RankColumn::Rank
                };
            }
            continue;
        }
        if record.len() < 3 {
            return Err(Error::parse(path, line, "expected user_id,item_id,rank"));
        }
        let u = train
            .users()
            .get(&record[0])
            .ok_or_else(|| Error::parse(path, line, format!("unknown user id `{}`", &record[0])))?;
        let i = train
            .items()
            .get(&record[1])
            .ok_or_else(|| Error::parse(path, line, format!("unknown item id `{}`", &record[1])))?;
        let v: f64 = record[2]
            .parse()
            .map_err(|_| Error::parse(path, line, format!("invalid rank/score `{}`", &record[2])))?;
        if !v.is_finite() {
            return Err(Error::parse(path, line, "non-finite rank/score"));
        }
        if train.contains(u, i) {
            return Err(Error::parse(
                path,
                line,
                format!(
                    "leakage: item `{}` is a training interaction of user `{}`",
                    &record[1], &record[0]
                ),
            ));
        }
        entries[u].push((i, v, line));
    }

    if column == RankColumn::Auto {
        let all_ranks = entries
            .iter()
            .flatten()
            .all(|&(_, v, _)| v.fract() == 0.0 && v >= 1.0 && v <= k as f64);
        column = if all_ranks { RankColumn::Rank } else { RankColumn::Score };
    }

    let mut rows = Vec::with_capacity(entries.len());
    for (u, mut e) in entries.into_iter().enumerate() {
        let user = train.users().id(u).unwrap_or_default();
        if e.len() != k {
            return Err(Error::Data(format!(
                "{}: user `{user}` has {} entries, expected {k}",
                path.display(),
                e.len()
            )));
        }
        let mut seen = HashSet::new();
        if let Some(&(_, _, line)) = e.iter().find(|(i, _, _)| !seen.insert(*i)) {
            return Err(Error::parse(path, line, format!("user `{user}` lists an item twice")));
        }
        let row = match column {
            RankColumn::Rank => {
                e.sort_by(|a, b| a.1.total_cmp(&b.1));
                for (pos, &(_, r, line)) in e.iter().enumerate() {
                    if r != (pos + 1) as f64 {
                        return Err(Error::parse(
                            path,
                            line,
                            format!("user `{user}`: ranks must be a permutation of 1..={k}"),
                        ));
                    }
                }
                e.into_iter().map(|(i, r, _)| (i, k as f64 + 1.0 - r)).collect()
            }
            _ => {
                e.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                e.into_iter().map(|(i, s, _)| (i, s)).collect()
            }
        };
        rows.push(row);
    }
    Ok(RankingList {
        model_name: model_name.to_owned(),
        k,
        rows,
    })
}
