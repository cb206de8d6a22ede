//! Stage commands and the on-disk layout of an output directory.
//!
//! ```text
//! split.json               held-out items per user
//! stats.json               counts before and after the split
//! params.json              hyperparameters used for each built-in model
//! tuning.json              search trials (only when tuning is on)
//! models/<stage>/M.json    factor models
//! rankings/<stage>/M.csv   top-k lists, `user_id,item_id,rank`
//! audit/<variant>.tsv      per-edge weights of the test hypergraphs
//! ensemble.json            model ranks, regularizers, hybrid weights
//! report.json, report.txt  test-set results
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use hypers::config::RunConfig;
use hypers::data::{self, DatasetStats, SplitDataset, SplitManifest, Stage};
use hypers::eval::TuneResult;
use hypers::pipeline::{self, EnsembleSummary, ExperimentReport, Prepared, StageInputs};
use hypers::recommenders::{load_external_rankings, FactorModel, ModelParams, RankColumn, RankingList};
use hypers::{Error, Result};
use serde::{Deserialize, Serialize};

pub struct Layout {
    root: PathBuf,
}

impl Layout {
    pub fn new(root: &Path) -> Self {
        Self { root: root.to_owned() }
    }

    pub fn split(&self) -> PathBuf {
        self.root.join("split.json")
    }

    pub fn stats(&self) -> PathBuf {
        self.root.join("stats.json")
    }

    pub fn params(&self) -> PathBuf {
        self.root.join("params.json")
    }

    pub fn tuning(&self) -> PathBuf {
        self.root.join("tuning.json")
    }

    pub fn ensemble(&self) -> PathBuf {
        self.root.join("ensemble.json")
    }

    pub fn model(&self, stage: Stage, name: &str) -> PathBuf {
        self.root.join("models").join(stage.name()).join(format!("{name}.json"))
    }

    pub fn rankings_dir(&self, stage: Stage) -> PathBuf {
        self.root.join("rankings").join(stage.name())
    }

    pub fn rankings(&self, stage: Stage, name: &str) -> PathBuf {
        self.rankings_dir(stage).join(format!("{name}.csv"))
    }

    pub fn audit(&self, variant: &str) -> PathBuf {
        self.root.join("audit").join(format!("{variant}.tsv"))
    }

    pub fn report_json(&self) -> PathBuf {
        self.root.join("report.json")
    }

    pub fn report_txt(&self) -> PathBuf {
        self.root.join("report.txt")
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, &text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line() as u64, e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatsFile {
    pub dataset: DatasetStats,
    pub retained: DatasetStats,
    pub seed: u64,
}

pub fn cmd_prepare(cfg: &RunConfig, out: &Layout) -> Result<Prepared> {
    let prepared = pipeline::prepare(cfg).map_err(|e| e.in_stage("prepare"))?;
    write_json(&out.split(), &prepared.split.manifest())?;
    write_json(
        &out.stats(),
        &StatsFile {
            dataset: prepared.dataset.stats(),
            retained: prepared.split.retained_stats(),
            seed: cfg.seed,
        },
    )?;
    Ok(prepared)
}

/// Reloads the dataset and re-applies the persisted split.
pub fn load_prepared(cfg: &RunConfig, out: &Layout) -> Result<Prepared> {
    let path = out.split();
    if !path.is_file() {
        return Err(Error::Data(format!(
            "split manifest not found: {} (run `hypers prepare` first)",
            path.display()
        )));
    }
    let manifest: SplitManifest = read_json(&path)?;
    if manifest.seed != cfg.seed || manifest.params != cfg.split {
        return Err(Error::Config(format!(
            "{} was written with seed {} and {:?}; the config asks for seed {} and {:?}",
            path.display(),
            manifest.seed,
            manifest.params,
            cfg.seed,
            cfg.split
        )));
    }
    let dataset = data::load_interactions(&cfg.dataset.path, cfg.dataset.format(), &cfg.dataset.load_options())?;
    let split = SplitDataset::from_manifest(&dataset, &manifest)?;
    Ok(Prepared { dataset, split })
}

pub fn cmd_train(cfg: &RunConfig, out: &Layout, prepared: &Prepared) -> Result<Vec<ModelParams>> {
    let (params, tuning) = pipeline::select_params(cfg, &prepared.split)?;
    for stage in [Stage::Validation, Stage::Test] {
        let fold = prepared.split.fold(stage);
        let models = pipeline::train_models(cfg, &params, &fold)?;
        let lists = pipeline::model_lists(&models, &fold, cfg.k)?;
        for (m, l) in models.iter().zip(&lists) {
            write_json(&out.model(stage, &m.name), m)?;
            write(&out.rankings(stage, &l.model_name), &l.to_csv(&fold.train))?;
        }
    }
    let by_name: BTreeMap<&str, &ModelParams> = params.iter().map(|p| (p.kind().name(), p)).collect();
    write_json(&out.params(), &by_name)?;
    if !tuning.is_empty() {
        write_json::<BTreeMap<String, TuneResult>>(&out.tuning(), &tuning)?;
    }
    Ok(params)
}

fn read_lists(
    names: &[String],
    stage: Stage,
    fold_train: &hypers::InteractionDataset,
    k: usize,
    out: &Layout,
) -> Result<Vec<RankingList>> {
    let missing: Vec<String> = names
        .iter()
        .map(|n| out.rankings(stage, n))
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Data(format!(
            "missing rankings for the {} stage (run `hypers train` first): {}",
            stage.name(),
            missing.join(", ")
        )));
    }
    names
        .iter()
        .map(|n| load_external_rankings(out.rankings(stage, n), n, fold_train, k, RankColumn::Rank))
        .collect()
}

fn read_models(names: &[String], stage: Stage, out: &Layout) -> Result<Vec<FactorModel<f64>>> {
    names
        .iter()
        .map(|n| {
            let path = out.model(stage, n);
            if !path.is_file() {
                return Err(Error::Data(format!(
                    "missing model for `{n}`: {} (run `hypers train` first)",
                    path.display()
                )));
            }
            read_json(&path)
        })
        .collect()
}

pub fn cmd_rank(cfg: &RunConfig, out: &Layout, prepared: &Prepared) -> Result<EnsembleSummary> {
    let builtin: Vec<String> = cfg
        .models
        .enabled()
        .iter()
        .map(|p| p.kind().name().to_owned())
        .collect();
    let folds = [prepared.split.fold(Stage::Validation), prepared.split.fold(Stage::Test)];
    let mut models = Vec::new();
    let mut lists = Vec::new();
    for fold in &folds {
        let mut stage_lists = read_lists(&builtin, fold.stage, &fold.train, cfg.k, out)?;
        let external = pipeline::external_lists(cfg, fold)?;
        for l in &external {
            write(&out.rankings(fold.stage, &l.model_name), &l.to_csv(&fold.train))?;
        }
        stage_lists.extend(external);
        lists.push(stage_lists);
        models.push(read_models(&builtin, fold.stage, out)?);
    }
    let outcome = pipeline::run_ensembles(
        cfg,
        StageInputs {
            fold: &folds[0],
            models: &models[0],
            lists: &lists[0],
        },
        StageInputs {
            fold: &folds[1],
            models: &models[1],
            lists: &lists[1],
        },
    )?;
    for l in &outcome.lists {
        write(&out.rankings(Stage::Test, &l.model_name), &l.to_csv(&folds[1].train))?;
    }
    for (name, hg) in &outcome.hypergraphs {
        write(&out.audit(name), &hg.weight_audit())?;
    }
    write_json(&out.ensemble(), &outcome.summary)?;
    Ok(outcome.summary)
}

/// Scores every rankings file under `rankings/test`.
pub fn cmd_evaluate(cfg: &RunConfig, out: &Layout, prepared: &Prepared) -> Result<ExperimentReport> {
    let dir = out.rankings_dir(Stage::Test);
    let mut names = Vec::new();
    if dir.is_dir() {
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let path = entry.map_err(|e| Error::io(&dir, e))?.path();
            if path.extension().is_some_and(|e| e == "csv") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    names.push(stem.to_owned());
                }
            }
        }
    }
    if names.is_empty() {
        return Err(Error::Data(format!(
            "no rankings found in {} (run `hypers train` or `hypers rank` first)",
            dir.display()
        )));
    }
    names.sort();
    let fold = prepared.split.fold(Stage::Test);
    let lists = names
        .iter()
        .map(|n| load_external_rankings(out.rankings(Stage::Test, n), n, &fold.train, cfg.k, RankColumn::Auto))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_stage("evaluate"))?;

    let params: Vec<ModelParams> = if out.params().is_file() {
        let by_name: BTreeMap<String, ModelParams> = read_json(&out.params())?;
        by_name.into_values().collect()
    } else {
        Vec::new()
    };
    let summary = if out.ensemble().is_file() {
        read_json(&out.ensemble())?
    } else {
        EnsembleSummary::default()
    };
    let report = pipeline::build_report(cfg, prepared, &params, summary, &lists)?;
    write_json(&out.report_json(), &report)?;
    write(&out.report_txt(), &report.to_table())?;
    Ok(report)
}
