//! Top-k accuracy metrics and random hyperparameter search.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::recommenders::{BprParams, ModelKind, ModelParams, RankingList, WarpParams, WrmfParams};
use crate::{Error, Result};

pub use crate::pipeline::run_experiment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserHits {
    pub hits: usize,
    pub relevant: usize,
    pub recommended: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_name: String,
    pub k: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub users: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_user: Option<Vec<UserHits>>,
}

/// `|T_u ∩ R_u|` for every user, with both set sizes.
pub fn user_hits(list: &RankingList, targets: &[Vec<usize>]) -> Result<Vec<UserHits>> {
    if list.num_users() != targets.len() {
        return Err(Error::Data(format!(
            "{}: lists cover {} users but {} users have held-out items",
            list.model_name,
            list.num_users(),
            targets.len()
        )));
    }
    targets
        .iter()
        .enumerate()
        .map(|(u, t)| {
            let recommended = list.rows[u].len();
            if t.is_empty() {
                return Err(Error::Data(format!("user {u} has no held-out items")));
            }
            if recommended == 0 {
                return Err(Error::Data(format!(
                    "{}: user {u} has an empty recommendation list",
                    list.model_name
                )));
            }
            let hits = list.items(u).filter(|i| t.contains(i)).count();
            Ok(UserHits {
                hits,
                relevant: t.len(),
                recommended,
            })
        })
        .collect()
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    if n == 0 {
        0.0
    } else {
        xs.sum::<f64>() / n as f64
    }
}

/// Mean over users of `|T_u ∩ R_u| / |R_u|`.
pub fn precision_at_k(list: &RankingList, targets: &[Vec<usize>]) -> Result<f64> {
    let hits = user_hits(list, targets)?;
    Ok(mean(hits.iter().map(|h| h.hits as f64 / h.recommended as f64)))
}

/// Mean over users of `|T_u ∩ R_u| / |T_u|`.
pub fn recall_at_k(list: &RankingList, targets: &[Vec<usize>]) -> Result<f64> {
    let hits = user_hits(list, targets)?;
    Ok(mean(hits.iter().map(|h| h.hits as f64 / h.relevant as f64)))
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_at_k(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

pub fn evaluate(list: &RankingList, targets: &[Vec<usize>], keep_per_user: bool) -> Result<EvalReport> {
    let hits = user_hits(list, targets)?;
    let precision = mean(hits.iter().map(|h| h.hits as f64 / h.recommended as f64));
    let recall = mean(hits.iter().map(|h| h.hits as f64 / h.relevant as f64));
    Ok(EvalReport {
        model_name: list.model_name.clone(),
        k: list.k,
        precision,
        recall,
        f1: f1_at_k(precision, recall),
        users: hits.len(),
        per_user: keep_per_user.then_some(hits),
    })
}

/// Plain-text table, one row per model.
pub fn render_table(reports: &[EvalReport]) -> String {
    let k = reports.first().map_or(10, |r| r.k);
    let width = reports.iter().map(|r| r.model_name.len()).max().unwrap_or(5).max(5);
    let mut out = String::new();
    let heads = [format!("precision@{k}"), format!("recall@{k}"), format!("F1@{k}")];
    let _ = writeln!(
        out,
        "{:<width$}  {:>12}  {:>12}  {:>12}",
        "model", heads[0], heads[1], heads[2]
    );
    let _ = writeln!(out, "{}", "-".repeat(width + 2 + 3 * 14));
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>12.4}  {:>12.4}  {:>12.4}",
            r.model_name, r.precision, r.recall, r.f1
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ParamRange {
    /// Uniform integer in `[lo, hi]`.
    Int { lo: i64, hi: i64 },
    /// Uniform real in `[lo, hi]`.
    Float { lo: f64, hi: f64 },
    /// Log-uniform real in `[lo, hi]`, `0 < lo`.
    LogFloat { lo: f64, hi: f64 },
}

impl ParamRange {
    pub fn contains(&self, v: f64) -> bool {
        match *self {
            ParamRange::Int { lo, hi } => v.fract() == 0.0 && v >= lo as f64 && v <= hi as f64,
            ParamRange::Float { lo, hi } | ParamRange::LogFloat { lo, hi } => v >= lo && v <= hi,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            ParamRange::Int { lo, hi } => lo <= hi,
            ParamRange::Float { lo, hi } => lo <= hi && lo.is_finite() && hi.is_finite(),
            ParamRange::LogFloat { lo, hi } => lo > 0.0 && lo <= hi && hi.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid range for `{name}`: {self:?}")))
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            ParamRange::Int { lo, hi } => rng.random_range(lo..=hi) as f64,
            ParamRange::Float { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo..=hi)
                }
            }
            ParamRange::LogFloat { lo, hi } => {
                if lo == hi {
                    lo
                } else {
                    rng.random_range(lo.ln()..=hi.ln()).exp().clamp(lo, hi)
                }
            }
        }
    }
}

/// Named parameter ranges; a sample maps each name to a value.
pub type SearchSpace = BTreeMap<String, ParamRange>;
pub type Sample = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub sample: Sample,
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: Sample,
    pub best_score: f64,
    pub trials: Vec<Trial>,
}

/// Random search: draws `budget` points from `space` and keeps the one with
/// the highest `objective`. Failed trials are logged and skipped.
pub fn tune<F>(space: &SearchSpace, budget: usize, seed: u64, mut objective: F) -> Result<TuneResult>
where
    F: FnMut(&Sample) -> Result<f64>,
{
    if budget < 1 {
        return Err(Error::InvalidParameter("tuning budget must be >= 1".into()));
    }
    for (name, range) in space {
        range.validate(name)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(budget);
    let mut best: Option<(Sample, f64)> = None;
    for t in 0..budget {
        let sample: Sample = space
            .iter()
            .map(|(name, range)| (name.clone(), range.sample(&mut rng)))
            .collect();
        match objective(&sample) {
            Ok(score) => {
                log::info!("trial {t}: {sample:?} -> {score:.4}");
                if best.as_ref().is_none_or(|(_, b)| score > *b) {
                    best = Some((sample.clone(), score));
                }
                trials.push(Trial {
                    sample,
                    score: Some(score),
                    error: None,
                });
            }
            Err(e) => {
                log::warn!("trial {t}: {sample:?} failed: {e}");
                trials.push(Trial {
                    sample,
                    score: None,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let (best, best_score) = best.ok_or_else(|| Error::Data(format!("all {budget} tuning trials failed")))?;
    Ok(TuneResult {
        best,
        best_score,
        trials,
    })
}

fn space(entries: &[(&str, ParamRange)]) -> SearchSpace {
    entries.iter().map(|(n, r)| (n.to_string(), *r)).collect()
}

/// Published search ranges for the built-in models.
pub fn reference_space(kind: ModelKind) -> SearchSpace {
    use ParamRange::*;
    match kind {
        ModelKind::Bpr => space(&[
            ("epochs", Int { lo: 1000, hi: 2000 }),
            ("factors", Int { lo: 100, hi: 250 }),
            ("regularization", Float { lo: 0.01, hi: 0.05 }),
            ("learning_rate", Float { lo: 0.001, hi: 0.07 }),
        ]),
        ModelKind::Warp => space(&[
            ("epochs", Int { lo: 200, hi: 850 }),
            ("factors", Int { lo: 15, hi: 40 }),
            ("regularization", LogFloat { lo: 1e-6, hi: 1e-3 }),
            ("learning_rate", Float { lo: 0.001, hi: 0.1 }),
        ]),
        ModelKind::Wrmf => space(&[
            ("iterations", Int { lo: 1000, hi: 2000 }),
            ("factors", Int { lo: 100, hi: 250 }),
            ("regularization", Float { lo: 0.01, hi: 0.05 }),
        ]),
    }
}

/// Smaller ranges that keep a full search at desk scale.
pub fn desk_space(kind: ModelKind) -> SearchSpace {
    use ParamRange::*;
    match kind {
        ModelKind::Bpr => space(&[
            ("epochs", Int { lo: 20, hi: 100 }),
            ("factors", Int { lo: 16, hi: 64 }),
            ("regularization", Float { lo: 0.001, hi: 0.05 }),
            ("learning_rate", Float { lo: 0.01, hi: 0.1 }),
        ]),
        ModelKind::Warp => space(&[
            ("epochs", Int { lo: 10, hi: 60 }),
            ("factors", Int { lo: 15, hi: 40 }),
            ("regularization", LogFloat { lo: 1e-6, hi: 1e-3 }),
            ("learning_rate", Float { lo: 0.005, hi: 0.05 }),
        ]),
        ModelKind::Wrmf => space(&[
            ("iterations", Int { lo: 5, hi: 20 }),
            ("factors", Int { lo: 16, hi: 64 }),
            ("regularization", Float { lo: 0.01, hi: 0.05 }),
        ]),
    }
}

/// Range of the ranking regularizer and of each hybrid weight.
pub fn unit_range() -> ParamRange {
    ParamRange::Float { lo: 0.01, hi: 0.99 }
}

/// Overrides fields of `base` with the values present in `sample`.
pub fn params_from_sample(base: &ModelParams, sample: &Sample) -> ModelParams {
    let int = |name: &str, cur: usize| sample.get(name).map_or(cur, |&v| v as usize);
    let real = |name: &str, cur: f64| sample.get(name).copied().unwrap_or(cur);
    match *base {
        ModelParams::Bpr(p) => ModelParams::Bpr(BprParams {
            factors: int("factors", p.factors),
            epochs: int("epochs", p.epochs),
            learning_rate: real("learning_rate", p.learning_rate),
            regularization: real("regularization", p.regularization),
        }),
        ModelParams::Warp(p) => ModelParams::Warp(WarpParams {
            factors: int("factors", p.factors),
            epochs: int("epochs", p.epochs),
            learning_rate: real("learning_rate", p.learning_rate),
            regularization: real("regularization", p.regularization),
            max_sampled: int("max_sampled", p.max_sampled),
        }),
        ModelParams::Wrmf(p) => ModelParams::Wrmf(WrmfParams {
            factors: int("factors", p.factors),
            iterations: int("iterations", p.iterations),
            regularization: real("regularization", p.regularization),
            alpha: real("alpha", p.alpha),
        }),
    }
}
