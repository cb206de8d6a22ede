//! End-to-end experiment: split, base models, hypergraph ensembles, evaluation.
//!
//! Each step is a separate function so the command line can persist the
//! intermediate artifacts and still reproduce [`run_experiment`] exactly.
//!
//! Protocol: hyperparameters, model ranks, regularizers and hybrid weights
//! are all chosen on the validation fold (fit on train, score on the
//! validation items). Every model is then refit on train plus validation and
//! scored on the test items.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SpaceChoice};
use crate::data::{self, DatasetStats, Fold, InteractionDataset, SplitDataset, Stage};
use crate::ensemble::{hybrid_rank_topk, rank_models, uniform_policy, ScoreSource, WeightPolicy};
use crate::eval::{
    desk_space, evaluate, params_from_sample, precision_at_k, reference_space, tune, unit_range, EvalReport,
    SearchSpace, TuneResult,
};
use crate::hypergraph::{build_hypergraph, Hypergraph};
use crate::ranker::{compute_affinity, recommend_all, RankerConfig};
use crate::recommenders::{fit, load_external_rankings, rank_topk, FactorModel, ModelKind, ModelParams, RankingList};
use crate::{Error, Result};

pub const H: &str = "H";
pub const HYBRID: &str = "Hybrid";
pub const HYPERS: &str = "HypeRS";
pub const HYPERS_W: &str = "HypeRS_W";

/// Derives an independent stream seed from the run seed.
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn model_seed(seed: u64, kind: ModelKind) -> u64 {
    let tag = ModelKind::ALL.iter().position(|k| *k == kind).unwrap_or(0) as u64;
    sub_seed(seed, 10 + tag)
}

pub struct Prepared {
    pub dataset: InteractionDataset,
    pub split: SplitDataset,
}

/// Loads the interaction log and draws the held-out split.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let dataset = data::load_interactions(&cfg.dataset.path, cfg.dataset.format(), &cfg.dataset.load_options())?;
    let split = data::split(&dataset, cfg.split, cfg.seed)?;
    log::info!("split: {} of {} users retained", split.num_users(), dataset.num_users());
    Ok(Prepared { dataset, split })
}

fn search_space(kind: ModelKind, choice: SpaceChoice) -> SearchSpace {
    match choice {
        SpaceChoice::Desk => desk_space(kind),
        SpaceChoice::Reference => reference_space(kind),
    }
}

/// Hyperparameters for each enabled built-in model: the configured values,
/// or the best random-search point on the validation fold when tuning is on.
pub fn select_params(
    cfg: &RunConfig,
    split: &SplitDataset,
) -> Result<(Vec<ModelParams>, BTreeMap<String, TuneResult>)> {
    let enabled = cfg.models.enabled();
    let mut tuning = BTreeMap::new();
    let budget = cfg.tune.as_ref().map_or(0, |t| t.budget);
    if budget == 0 {
        return Ok((enabled, tuning));
    }
    let choice = cfg.tune.as_ref().map(|t| t.space).unwrap_or_default();
    let fold = split.fold(Stage::Validation);
    let mut out = Vec::with_capacity(enabled.len());
    for base in enabled {
        let kind = base.kind();
        log::info!("tuning {} ({budget} trials)", kind.name());
        let result = tune(
            &search_space(kind, choice),
            budget,
            sub_seed(cfg.seed, 20 + kind as u64),
            |sample| {
                let params = params_from_sample(&base, sample);
                let model = fit::<f64>(&params, &fold.train, model_seed(cfg.seed, kind))?;
                precision_at_k(&rank_topk(&model, &fold.train, cfg.k)?, &fold.targets)
            },
        )
        .map_err(|e| e.in_stage("tune"))?;
        out.push(params_from_sample(&base, &result.best));
        tuning.insert(kind.name().to_owned(), result);
    }
    Ok((out, tuning))
}

/// Fits every built-in model on the fold's training rows.
pub fn train_models(cfg: &RunConfig, params: &[ModelParams], fold: &Fold) -> Result<Vec<FactorModel<f64>>> {
    params
        .iter()
        .map(|p| {
            log::info!("training {} on the {} fold: {p}", p.kind().name(), fold.stage.name());
            fit(p, &fold.train, model_seed(cfg.seed, p.kind()))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("train"))
}

/// Top-k lists of the built-in models.
pub fn model_lists(models: &[FactorModel<f64>], fold: &Fold, k: usize) -> Result<Vec<RankingList>> {
    models
        .iter()
        .map(|m| rank_topk(m, &fold.train, k))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("rank"))
}

/// Externally produced lists for one stage, validated against its training rows.
pub fn external_lists(cfg: &RunConfig, fold: &Fold) -> Result<Vec<RankingList>> {
    cfg.external
        .iter()
        .map(|e| {
            let path = match fold.stage {
                Stage::Validation => &e.validation,
                Stage::Test => &e.test,
            };
            load_external_rankings(path, &e.name, &fold.train, cfg.k, e.column)
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("ingest"))
}

/// Everything the ensembles need for one stage.
pub struct StageInputs<'a> {
    pub fold: &'a Fold,
    pub models: &'a [FactorModel<f64>],
    /// Base lists: built-in models first, then external ones.
    pub lists: &'a [RankingList],
}

impl StageInputs<'_> {
    /// Built-in models score every item; external models only have their lists.
    fn score_sources(&self) -> Vec<&dyn ScoreSource<f64>> {
        let builtin = self.models.iter().map(|m| m as &dyn ScoreSource<f64>);
        let external = self
            .lists
            .iter()
            .filter(|l| !self.models.iter().any(|m| m.name == l.model_name))
            .map(|l| l as &dyn ScoreSource<f64>);
        builtin.chain(external).collect()
    }
}

/// Choices made on the validation fold.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub model_ranks: BTreeMap<String, usize>,
    pub varthetas: BTreeMap<String, f64>,
    pub hybrid_weights: BTreeMap<String, f64>,
}

pub struct EnsembleOutcome {
    pub summary: EnsembleSummary,
    /// Test-stage lists in report order (H, Hybrid, HypeRS, HypeRS_W).
    pub lists: Vec<RankingList>,
    /// Test-stage hypergraphs by variant name.
    pub hypergraphs: Vec<(String, Hypergraph<f64>)>,
}

struct Variant {
    name: &'static str,
    with_models: bool,
    policy: WeightPolicy,
}

fn ranker_config(cfg: &RunConfig, vartheta: f64) -> RankerConfig {
    RankerConfig { vartheta, ..cfg.ranker }
}

fn pick_vartheta(cfg: &RunConfig, name: &str, hg: &Hypergraph<f64>, fold: &Fold) -> Result<f64> {
    let budget = cfg.tune.as_ref().map_or(0, |t| t.ranker_budget);
    if budget == 0 {
        return Ok(cfg.ranker.vartheta);
    }
    let op = compute_affinity(hg)?;
    let space: SearchSpace = [("vartheta".to_owned(), unit_range())].into();
    let result = tune(&space, budget, sub_seed(cfg.seed, 40), |s| {
        let list = recommend_all(&op, &fold.train, cfg.k, &ranker_config(cfg, s["vartheta"]), name)?;
        precision_at_k(&list, &fold.targets)
    })?;
    Ok(result.best["vartheta"])
}

fn hybrid_weights(cfg: &RunConfig, val: &StageInputs) -> Result<BTreeMap<String, f64>> {
    let sources = val.score_sources();
    let configured = |name: &str| cfg.hybrid.weights.get(name).copied().unwrap_or(0.5);
    let budget = cfg.tune.as_ref().map_or(0, |t| t.hybrid_budget);
    if budget == 0 || sources.len() < 2 {
        return Ok(sources
            .iter()
            .map(|s| (s.source_name().to_owned(), configured(s.source_name())))
            .collect());
    }
    let space: SearchSpace = sources
        .iter()
        .map(|s| (s.source_name().to_owned(), unit_range()))
        .collect();
    let result = tune(&space, budget, sub_seed(cfg.seed, 50), |w| {
        let weighted: Vec<_> = sources.iter().map(|s| (*s, w[s.source_name()])).collect();
        precision_at_k(&hybrid_rank_topk(&weighted, &val.fold.train, cfg.k)?, &val.fold.targets)
    })?;
    Ok(result.best)
}

fn run_hybrid(stage: &StageInputs, weights: &BTreeMap<String, f64>, k: usize) -> Result<RankingList> {
    let sources: Vec<_> = stage
        .score_sources()
        .into_iter()
        .map(|s| {
            let w = weights
                .get(s.source_name())
                .copied()
                .ok_or_else(|| Error::Data(format!("no hybrid weight for `{}`", s.source_name())))?;
            Ok((s, w))
        })
        .collect::<Result<_>>()?;
    hybrid_rank_topk(&sources, &stage.fold.train, k)
}

/// Builds H, Hybrid, HypeRS and HypeRS_W: every choice is made on `val`,
/// then the variants are rebuilt from `test` and ranked.
pub fn run_ensembles(cfg: &RunConfig, val: StageInputs, test: StageInputs) -> Result<EnsembleOutcome> {
    let mut summary = EnsembleSummary::default();
    let has_models = !val.lists.is_empty();
    if has_models {
        summary.model_ranks = rank_models(val.lists, &val.fold.targets).map_err(|e| e.in_stage("rank models"))?;
    }

    let mut variants = vec![Variant {
        name: H,
        with_models: false,
        policy: uniform_policy(),
    }];
    if has_models {
        variants.push(Variant {
            name: HYPERS,
            with_models: true,
            policy: uniform_policy(),
        });
        variants.push(Variant {
            name: HYPERS_W,
            with_models: true,
            policy: cfg
                .weights
                .policy(summary.model_ranks.clone())
                .map_err(|e| e.in_stage("weights"))?,
        });
    }

    let mut lists = Vec::new();
    let mut hypergraphs = Vec::new();
    for v in &variants {
        let stage_lists = |s: &StageInputs<'_>| if v.with_models { s.lists.to_vec() } else { Vec::new() };
        let vartheta = {
            let hg = build_hypergraph(&val.fold.train, cfg.k_nn, &stage_lists(&val), &v.policy)?;
            pick_vartheta(cfg, v.name, &hg, val.fold).map_err(|e| e.in_stage("tune ranker"))?
        };
        log::info!("{}: vartheta = {vartheta:.4}", v.name);
        summary.varthetas.insert(v.name.to_owned(), vartheta);

        let hg = build_hypergraph(&test.fold.train, cfg.k_nn, &stage_lists(&test), &v.policy)
            .map_err(|e| e.in_stage("hypergraph"))?;
        let op = compute_affinity(&hg)?;
        let list = recommend_all(&op, &test.fold.train, cfg.k, &ranker_config(cfg, vartheta), v.name)
            .map_err(|e| e.in_stage("rank"))?;
        lists.push(list);
        hypergraphs.push((v.name.to_owned(), hg));
    }

    if has_models {
        summary.hybrid_weights = hybrid_weights(cfg, &val).map_err(|e| e.in_stage("tune hybrid"))?;
        let list = run_hybrid(&test, &summary.hybrid_weights, cfg.k).map_err(|e| e.in_stage("hybrid"))?;
        lists.insert(1, list);
    }
    Ok(EnsembleOutcome {
        summary,
        lists,
        hypergraphs,
    })
}

/// Position of a model in the results table: built-ins, external models in
/// the given order, then the ensembles.
pub fn report_order(external: &[String]) -> impl Fn(&str) -> (usize, usize) + '_ {
    move |name: &str| {
        if let Some(i) = ModelKind::ALL.iter().position(|k| k.name() == name) {
            (0, i)
        } else if let Some(i) = [H, HYBRID, HYPERS, HYPERS_W].iter().position(|n| *n == name) {
            (2, i)
        } else {
            (1, external.iter().position(|n| n == name).unwrap_or(usize::MAX))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub k: usize,
    pub dataset: DatasetStats,
    /// Counts after dropping users with too few interactions.
    pub retained: DatasetStats,
    pub params: BTreeMap<String, ModelParams>,
    pub ensemble: EnsembleSummary,
    pub results: Vec<EvalReport>,
}

impl ExperimentReport {
    pub fn result(&self, model: &str) -> Option<&EvalReport> {
        self.results.iter().find(|r| r.model_name == model)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_table(&self) -> String {
        crate::eval::render_table(&self.results)
    }
}

/// Scores test lists and assembles the report.
pub fn build_report(
    cfg: &RunConfig,
    prepared: &Prepared,
    params: &[ModelParams],
    summary: EnsembleSummary,
    test_lists: &[RankingList],
) -> Result<ExperimentReport> {
    let external: Vec<String> = cfg.external.iter().map(|e| e.name.clone()).collect();
    let order = report_order(&external);
    let mut results = test_lists
        .iter()
        .map(|l| evaluate(l, &prepared.split.test, false))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("evaluate"))?;
    results.sort_by_key(|r| order(&r.model_name));
    Ok(ExperimentReport {
        seed: cfg.seed,
        k: cfg.k,
        dataset: prepared.dataset.stats(),
        retained: prepared.split.retained_stats(),
        params: params.iter().map(|p| (p.kind().name().to_owned(), *p)).collect(),
        ensemble: summary,
        results,
    })
}

/// Runs the whole protocol in memory.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let prepared = prepare(cfg).map_err(|e| e.in_stage("prepare"))?;
    let (params, _) = select_params(cfg, &prepared.split)?;

    let val_fold = prepared.split.fold(Stage::Validation);
    let test_fold = prepared.split.fold(Stage::Test);
    let val_models = train_models(cfg, &params, &val_fold)?;
    let test_models = train_models(cfg, &params, &test_fold)?;

    let mut val_lists = model_lists(&val_models, &val_fold, cfg.k)?;
    val_lists.extend(external_lists(cfg, &val_fold)?);
    let mut test_lists = model_lists(&test_models, &test_fold, cfg.k)?;
    test_lists.extend(external_lists(cfg, &test_fold)?);

    let outcome = run_ensembles(
        cfg,
        StageInputs {
            fold: &val_fold,
            models: &val_models,
            lists: &val_lists,
        },
        StageInputs {
            fold: &test_fold,
            models: &test_models,
            lists: &test_lists,
        },
    )?;
    test_lists.extend(outcome.lists);
    build_report(cfg, &prepared, &params, outcome.summary, &test_lists)
}
