//! Hyperedge weighting policies and the weighted-average hybrid baseline.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::InteractionDataset;
use crate::eval::precision_at_k;
use crate::hypergraph::HyperedgeKind;
use crate::recommenders::{check_k, top_k, FactorModel, RankingList};
use crate::{Error, Result, Scalar};

/// Weight given to each hyperedge family.
///
/// Model edges get `w_m_base * (1 - decay_per_rank * (rank - 1))`, where rank 1
/// is the best model on validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightPolicy {
    pub w_ui: f64,
    pub w_uu: f64,
    pub w_m_base: f64,
    pub decay_per_rank: f64,
    pub model_ranks: BTreeMap<String, usize>,
}

impl Default for WeightPolicy {
    fn default() -> Self {
        Self {
            w_ui: 1.0,
            w_uu: 1.0,
            w_m_base: 0.5,
            decay_per_rank: 0.10,
            model_ranks: BTreeMap::new(),
        }
    }
}

impl WeightPolicy {
    /// Every hyperedge weighs 1.0 regardless of family or model rank.
    pub fn uniform() -> Self {
        Self {
            w_ui: 1.0,
            w_uu: 1.0,
            w_m_base: 1.0,
            decay_per_rank: 0.0,
            model_ranks: BTreeMap::new(),
        }
    }

    /// Default weights (1.0 real links, 0.5 predicted links, 10% decay per
    /// rank) for the given model ranking.
    pub fn weighted(model_ranks: BTreeMap<String, usize>) -> Result<Self> {
        Self {
            model_ranks,
            ..Self::default()
        }
        .validated()
    }

    /// Checks positivity of the family weights, that ranks form a permutation
    /// of `1..=|M|`, and that every ranked model ends up with a positive weight.
    pub fn validated(self) -> Result<Self> {
        for (name, w) in [("w_ui", self.w_ui), ("w_uu", self.w_uu), ("w_m_base", self.w_m_base)] {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be > 0 (got {w})")));
            }
        }
        if !(0.0..1.0).contains(&self.decay_per_rank) {
            return Err(Error::InvalidParameter(format!(
                "decay_per_rank must be in [0, 1) (got {})",
                self.decay_per_rank
            )));
        }
        let mut ranks: Vec<usize> = self.model_ranks.values().copied().collect();
        ranks.sort_unstable();
        if ranks.iter().enumerate().any(|(i, &r)| r != i + 1) {
            return Err(Error::InvalidParameter(format!(
                "model ranks must be a permutation of 1..={} (got {ranks:?})",
                ranks.len()
            )));
        }
        for name in self.model_ranks.keys() {
            self.model_weight(name)?;
        }
        Ok(self)
    }

    pub fn model_weight(&self, model: &str) -> Result<f64> {
        if self.decay_per_rank == 0.0 {
            return Ok(self.w_m_base);
        }
        let rank = *self
            .model_ranks
            .get(model)
            .ok_or_else(|| Error::InvalidParameter(format!("no validation rank for model `{model}`")))?;
        let w = self.w_m_base * (1.0 - self.decay_per_rank * (rank as f64 - 1.0));
        if !(w > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "model `{model}` at rank {rank} gets non-positive weight {w}"
            )));
        }
        Ok(w)
    }

    pub fn weight(&self, kind: &HyperedgeKind) -> Result<f64> {
        match kind {
            HyperedgeKind::UserItem => Ok(self.w_ui),
            HyperedgeKind::UserUser => Ok(self.w_uu),
            HyperedgeKind::Model(m) => self.model_weight(m),
        }
    }
}

pub fn uniform_policy() -> WeightPolicy {
    WeightPolicy::uniform()
}

pub fn weighted_policy(model_ranks: BTreeMap<String, usize>) -> Result<WeightPolicy> {
    WeightPolicy::weighted(model_ranks)
}

/// Ranks models by descending validation precision@k (ties by name).
pub fn rank_models(lists: &[RankingList], validation: &[Vec<usize>]) -> Result<BTreeMap<String, usize>> {
    if validation.is_empty() || validation.iter().all(Vec::is_empty) {
        return Err(Error::Data("empty validation set".into()));
    }
    let mut scored = lists
        .iter()
        .map(|l| Ok((l.model_name.clone(), precision_at_k(l, validation)?)))
        .collect::<Result<Vec<_>>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    for (name, p) in &scored {
        log::info!("validation precision {name}: {p:.4}");
    }
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(r, (name, _))| (name, r + 1))
        .collect())
}

/// Anything that can score every item for a user.
pub trait ScoreSource<T>: Sync {
    fn source_name(&self) -> &str;
    fn user_scores(&self, u: usize, num_items: usize) -> Vec<T>;
}

impl<T: Scalar> ScoreSource<T> for FactorModel<T> {
    fn source_name(&self) -> &str {
        &self.name
    }

    fn user_scores(&self, u: usize, _num_items: usize) -> Vec<T> {
        self.scores(u)
    }
}

/// A ranking list scores its `k` items `k, k-1, ..., 1` and everything else 0.
impl<T: Scalar> ScoreSource<T> for RankingList {
    fn source_name(&self) -> &str {
        &self.model_name
    }

    fn user_scores(&self, u: usize, num_items: usize) -> Vec<T> {
        let mut s = vec![T::zero(); num_items];
        for (pos, i) in self.items(u).enumerate() {
            s[i] = T::of((self.k - pos) as f64);
        }
        s
    }
}

/// Weighted average of per-model scores, each min-max normalised to `[0, 1]`
/// over the user's unseen items (a constant model contributes 0.5). Training
/// items get `-inf`.
pub fn hybrid_scores<T: Scalar>(
    sources: &[(&dyn ScoreSource<T>, f64)],
    train: &InteractionDataset,
    u: usize,
) -> Result<Vec<T>> {
    if sources.is_empty() {
        return Err(Error::InvalidParameter("hybrid needs at least one model".into()));
    }
    if let Some((s, w)) = sources.iter().find(|(_, w)| !(*w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "hybrid weight for `{}` must be > 0 (got {w})",
            s.source_name()
        )));
    }
    let ni = train.num_items();
    let seen = train.user_items(u);
    // accumulate in name order so the result does not depend on argument order
    let mut ordered: Vec<&(&dyn ScoreSource<T>, f64)> = sources.iter().collect();
    ordered.sort_by(|a, b| a.0.source_name().cmp(b.0.source_name()));

    let total_w: f64 = ordered.iter().map(|(_, w)| w).sum();
    let mut out = vec![T::zero(); ni];
    for (src, w) in ordered {
        let s = src.user_scores(u, ni);
        let unseen = || (0..ni).filter(|i| seen.binary_search(i).is_err()).map(|i| s[i]);
        let lo = unseen().fold(T::infinity(), T::min);
        let hi = unseen().fold(T::neg_infinity(), T::max);
        let w = T::of(w / total_w);
        for i in 0..ni {
            let norm = if hi > lo { (s[i] - lo) / (hi - lo) } else { T::of(0.5) };
            out[i] += w * norm;
        }
    }
    for &i in seen {
        out[i] = T::neg_infinity();
    }
    Ok(out)
}

/// Top-k lists of the hybrid score, same masking and tie rules as base models.
pub fn hybrid_rank_topk<T: Scalar>(
    sources: &[(&dyn ScoreSource<T>, f64)],
    train: &InteractionDataset,
    k: usize,
) -> Result<RankingList> {
    check_k(train, k)?;
    let rows = (0..train.num_users())
        .into_par_iter()
        .map(|u| {
            let s = hybrid_scores(sources, train, u)?;
            Ok(top_k(&s, train.user_items(u), k)
                .into_iter()
                .map(|(i, v)| (i, v.as_f64()))
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RankingList {
        model_name: "Hybrid".into(),
        k,
        rows,
    })
}
