//! Interaction ingestion, ID mapping and the hold-out protocol.

use std::collections::HashMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Bidirectional map between external identifiers and contiguous indices,
/// ordered by first appearance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the index of `id`, assigning the next free one if unseen.
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_owned());
        self.index.insert(id.to_owned(), i);
        i
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> Option<&str> {
        self.ids.get(index).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

impl<S: AsRef<str>> FromIterator<S> for IdMap {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut map = IdMap::new();
        for id in iter {
            map.intern(id.as_ref());
        }
        map
    }
}

/// Summary counts reported after ingestion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub users: usize,
    pub items: usize,
    pub interactions: usize,
    /// `interactions / (users * items)`.
    pub sparsity: f64,
}

/// Binary user-item interaction matrix with external ID maps.
///
/// Rows are stored per user as sorted, duplicate-free item index lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionDataset {
    users: IdMap,
    items: IdMap,
    rows: Vec<Vec<usize>>,
}

/// Sparse 0/1 vector; the ones sit at `indices` (sorted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryRow {
    pub len: usize,
    pub indices: Vec<usize>,
}

impl SparseBinaryRow {
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn to_dense<T: crate::Scalar>(&self) -> Vec<T> {
        let mut v = vec![T::zero(); self.len];
        for &i in &self.indices {
            v[i] = T::one();
        }
        v
    }
}

impl InteractionDataset {
    /// Builds a dataset from `(user, item)` pairs. IDs are indexed in order of
    /// first appearance; duplicate pairs collapse.
    pub fn from_pairs<U, I, P>(pairs: P) -> Self
    where
        U: AsRef<str>,
        I: AsRef<str>,
        P: IntoIterator<Item = (U, I)>,
    {
        let mut users = IdMap::new();
        let mut items = IdMap::new();
        let mut rows: Vec<Vec<usize>> = Vec::new();
        for (u, i) in pairs {
            let u = users.intern(u.as_ref());
            let i = items.intern(i.as_ref());
            if u == rows.len() {
                rows.push(Vec::new());
            }
            rows[u].push(i);
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
        }
        Self { users, items, rows }
    }

    /// Builds a dataset from index rows; external IDs are the decimal indices.
    pub fn from_rows(num_items: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let users: IdMap = (0..rows.len()).map(|u| u.to_string()).collect();
        let items: IdMap = (0..num_items).map(|i| i.to_string()).collect();
        Self::with_maps(users, items, rows)
    }

    /// Builds a dataset over existing ID maps. Rows are sorted and deduplicated.
    pub fn with_maps(users: IdMap, items: IdMap, mut rows: Vec<Vec<usize>>) -> Result<Self> {
        if rows.len() != users.len() {
            return Err(Error::Data(format!("{} rows for {} users", rows.len(), users.len())));
        }
        for (u, row) in rows.iter_mut().enumerate() {
            row.sort_unstable();
            row.dedup();
            if let Some(&i) = row.last() {
                if i >= items.len() {
                    return Err(Error::Data(format!(
                        "user {u}: item index {i} out of range (|I| = {})",
                        items.len()
                    )));
                }
            }
        }
        Ok(Self { users, items, rows })
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn num_interactions(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn sparsity(&self) -> f64 {
        let cells = self.num_users() * self.num_items();
        if cells == 0 {
            0.0
        } else {
            self.num_interactions() as f64 / cells as f64
        }
    }

    pub fn stats(&self) -> DatasetStats {
        DatasetStats {
            users: self.num_users(),
            items: self.num_items(),
            interactions: self.num_interactions(),
            sparsity: self.sparsity(),
        }
    }

    pub fn users(&self) -> &IdMap {
        &self.users
    }

    pub fn items(&self) -> &IdMap {
        &self.items
    }

    /// Sorted item indices of user `u`. Panics if `u` is out of range.
    pub fn user_items(&self, u: usize) -> &[usize] {
        &self.rows[u]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn contains(&self, u: usize, i: usize) -> bool {
        self.rows.get(u).is_some_and(|row| row.binary_search(&i).is_ok())
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&i| (u, i)))
    }

    /// Row `u` of the interaction matrix. An empty row is legal; callers that
    /// need a non-degenerate profile check [`SparseBinaryRow::is_empty`].
    pub fn interaction_row(&self, u: usize) -> Result<SparseBinaryRow> {
        let row = self.rows.get(u).ok_or_else(|| {
            Error::InvalidParameter(format!("user index {u} out of range (|U| = {})", self.num_users()))
        })?;
        if row.is_empty() {
            log::debug!("user {u} has an empty interaction row");
        }
        Ok(SparseBinaryRow {
            len: self.num_items(),
            indices: row.clone(),
        })
    }

    /// Users interacting with each item (inverted index), sorted by user.
    pub fn item_users(&self) -> Vec<Vec<usize>> {
        let mut cols = vec![Vec::new(); self.num_items()];
        for (u, i) in self.pairs() {
            cols[i].push(u);
        }
        cols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileFormat {
    Csv,
    Tsv,
}

impl FileFormat {
    pub fn delimiter(self) -> u8 {
        match self {
            FileFormat::Csv => b',',
            FileFormat::Tsv => b'\t',
        }
    }

    /// Guesses the format from the file extension (`.tsv`, `.dat`, `.tab` are tab separated).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv" | "dat" | "tab") => FileFormat::Tsv,
            _ => FileFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    /// Keep a row only if its third column is at least this value. `None`
    /// keeps every row regardless of rating.
    #[serde(default)]
    pub rating_threshold: Option<f64>,
    /// Force header handling; `None` auto-detects.
    #[serde(default)]
    pub header: Option<bool>,
}

fn is_numeric(field: &str) -> bool {
    field.trim().parse::<f64>().is_ok()
}

fn looks_like_header(first: &csv::StringRecord, second: Option<&csv::StringRecord>) -> bool {
    let named = first.iter().any(|f| {
        let f = f.to_ascii_lowercase();
        f.contains("user") || f.contains("item")
    });
    if named {
        return true;
    }
    match second {
        Some(second) => first
            .iter()
            .zip(second.iter())
            .any(|(a, b)| !is_numeric(a) && is_numeric(b)),
        None => false,
    }
}

/// Reads a delimiter-separated interaction log (`user_id,item_id[,rating[,...]]`).
pub fn load_interactions(
    path: impl AsRef<Path>,
    format: FileFormat,
    options: &LoadOptions,
) -> Result<InteractionDataset> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_interactions(path, &text, format, options)
}

fn parse_interactions(
    path: &Path,
    text: &str,
    format: FileFormat,
    options: &LoadOptions,
) -> Result<InteractionDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(path, line, e.to_string())
        })?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::Data(format!("{}: empty interaction file", path.display())));
    }

    let skip_header = options
        .header
        .unwrap_or_else(|| looks_like_header(&records[0], records.get(1)));
    let body = if skip_header { &records[1..] } else { &records[..] };
    if body.is_empty() {
        return Err(Error::Data(format!("{}: no interaction rows", path.display())));
    }

    let mut pairs = Vec::with_capacity(body.len());
    for record in body {
        let line = record.position().map_or(0, |p| p.line());
        if record.len() < 2 || record[0].is_empty() || record[1].is_empty() {
            return Err(Error::parse(path, line, "expected at least user_id and item_id"));
        }
        if let Some(threshold) = options.rating_threshold {
            let raw = record
                .get(2)
                .ok_or_else(|| Error::parse(path, line, "rating threshold set but no rating column"))?;
            let rating: f64 = raw
                .parse()
                .map_err(|_| Error::parse(path, line, format!("invalid rating `{raw}`")))?;
            if rating < threshold {
                continue;
            }
        }
        pairs.push((record[0].to_owned(), record[1].to_owned()));
    }
    if pairs.is_empty() {
        return Err(Error::Data(format!(
            "{}: no interactions left after rating threshold",
            path.display()
        )));
    }
    let ds = InteractionDataset::from_pairs(pairs);
    let s = ds.stats();
    log::info!(
        "loaded {}: |U|={} |I|={} interactions={} sparsity={:.4}",
        path.display(),
        s.users,
        s.items,
        s.interactions,
        s.sparsity
    );
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitParams {
    pub n_test: usize,
    pub n_val: usize,
    pub min_train: usize,
}

impl Default for SplitParams {
    fn default() -> Self {
        Self {
            n_test: 10,
            n_val: 5,
            min_train: 5,
        }
    }
}

impl SplitParams {
    pub fn required(&self) -> usize {
        self.n_test + self.n_val + self.min_train
    }
}

/// Which held-out part a fold targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Fit on train, score against the validation items.
    Validation,
    /// Fit on train plus validation, score against the test items.
    Test,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Validation => "validation",
            Stage::Test => "test",
        }
    }
}

/// Training interactions paired with the held-out items they are scored against.
#[derive(Debug, Clone)]
pub struct Fold {
    pub stage: Stage,
    pub train: InteractionDataset,
    pub targets: Vec<Vec<usize>>,
}

/// Per-user train / validation / test partition of the retained users.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitDataset {
    /// Retained users only; shares the item map of the source dataset.
    pub train: InteractionDataset,
    pub validation: Vec<Vec<usize>>,
    pub test: Vec<Vec<usize>>,
    pub seed: u64,
    pub params: SplitParams,
}

/// Hides `n_test` and `n_val` interactions per user, drawn uniformly without
/// replacement. Users with fewer than `n_test + n_val + min_train`
/// interactions are dropped.
pub fn split(ds: &InteractionDataset, params: SplitParams, seed: u64) -> Result<SplitDataset> {
    let required = params.required();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut users = IdMap::new();
    let mut train = Vec::new();
    let mut validation = Vec::new();
    let mut test = Vec::new();
    let held = params.n_test + params.n_val;

    for (u, row) in ds.rows.iter().enumerate() {
        if row.len() < required || row.is_empty() {
            continue;
        }
        let picks = sample(&mut rng, row.len(), held).into_vec();
        let mut t: Vec<usize> = picks[..params.n_test].iter().map(|&p| row[p]).collect();
        let mut v: Vec<usize> = picks[params.n_test..].iter().map(|&p| row[p]).collect();
        t.sort_unstable();
        v.sort_unstable();
        let rest: Vec<usize> = row
            .iter()
            .copied()
            .filter(|i| t.binary_search(i).is_err() && v.binary_search(i).is_err())
            .collect();
        users.intern(ds.users.id(u).expect("row index has an id"));
        train.push(rest);
        validation.push(v);
        test.push(t);
    }
    if train.is_empty() {
        return Err(Error::TooSparse { required });
    }
    log::info!("split: kept {} of {} users (seed {seed})", train.len(), ds.num_users());
    Ok(SplitDataset {
        train: InteractionDataset::with_maps(users, ds.items.clone(), train)?,
        validation,
        test,
        seed,
        params,
    })
}

impl SplitDataset {
    pub fn num_users(&self) -> usize {
        self.train.num_users()
    }

    pub fn num_items(&self) -> usize {
        self.train.num_items()
    }

    /// Counts over the retained users' full profiles.
    pub fn retained_stats(&self) -> DatasetStats {
        let rows = (0..self.num_users()).map(|u| self.profile(u)).collect();
        InteractionDataset {
            users: self.train.users.clone(),
            items: self.train.items.clone(),
            rows,
        }
        .stats()
    }

    /// The full pre-split profile of retained user `u`.
    pub fn profile(&self, u: usize) -> Vec<usize> {
        let mut all: Vec<usize> = self
            .train
            .user_items(u)
            .iter()
            .chain(&self.validation[u])
            .chain(&self.test[u])
            .copied()
            .collect();
        all.sort_unstable();
        all
    }

    pub fn fold(&self, stage: Stage) -> Fold {
        match stage {
            Stage::Validation => Fold {
                stage,
                train: self.train.clone(),
                targets: self.validation.clone(),
            },
            Stage::Test => {
                let rows = (0..self.num_users())
                    .map(|u| {
                        let mut r: Vec<usize> = self
                            .train
                            .user_items(u)
                            .iter()
                            .chain(&self.validation[u])
                            .copied()
                            .collect();
                        r.sort_unstable();
                        r
                    })
                    .collect();
                Fold {
                    stage,
                    train: InteractionDataset {
                        users: self.train.users.clone(),
                        items: self.train.items.clone(),
                        rows,
                    },
                    targets: self.test.clone(),
                }
            }
        }
    }

    pub fn manifest(&self) -> SplitManifest {
        let item = |i: &usize| self.train.items.id(*i).unwrap_or_default().to_owned();
        SplitManifest {
            seed: self.seed,
            params: self.params,
            num_users: self.num_users(),
            num_items: self.num_items(),
            users: (0..self.num_users())
                .map(|u| HeldOut {
                    user: self.train.users.id(u).unwrap_or_default().to_owned(),
                    validation: self.validation[u].iter().map(item).collect(),
                    test: self.test[u].iter().map(item).collect(),
                })
                .collect(),
        }
    }

    /// Re-applies a persisted split to the dataset it was drawn from.
    pub fn from_manifest(ds: &InteractionDataset, manifest: &SplitManifest) -> Result<Self> {
        if manifest.num_items != ds.num_items() {
            return Err(Error::Data(format!(
                "split manifest expects {} items, dataset has {}",
                manifest.num_items,
                ds.num_items()
            )));
        }
        let mut users = IdMap::new();
        let mut train = Vec::new();
        let mut validation = Vec::new();
        let mut test = Vec::new();
        let resolve = |user: &str, ids: &[String], want: usize, what: &str| -> Result<Vec<usize>> {
            if ids.len() != want {
                return Err(Error::Data(format!(
                    "user {user}: manifest lists {} {what} items, expected {want}",
                    ids.len()
                )));
            }
            let mut out = ids
                .iter()
                .map(|id| {
                    ds.items
                        .get(id)
                        .ok_or_else(|| Error::Data(format!("user {user}: unknown {what} item `{id}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            out.sort_unstable();
            Ok(out)
        };
        for entry in &manifest.users {
            let u = ds
                .users
                .get(&entry.user)
                .ok_or_else(|| Error::Data(format!("unknown user `{}` in manifest", entry.user)))?;
            let v = resolve(&entry.user, &entry.validation, manifest.params.n_val, "validation")?;
            let t = resolve(&entry.user, &entry.test, manifest.params.n_test, "test")?;
            let row = &ds.rows[u];
            if let Some(i) = v.iter().chain(&t).find(|i| row.binary_search(i).is_err()) {
                return Err(Error::Data(format!(
                    "user {}: held-out item `{}` is not in the user's interactions",
                    entry.user,
                    ds.items.id(*i).unwrap_or_default()
                )));
            }
            let rest: Vec<usize> = row
                .iter()
                .copied()
                .filter(|i| t.binary_search(i).is_err() && v.binary_search(i).is_err())
                .collect();
            users.intern(&entry.user);
            train.push(rest);
            validation.push(v);
            test.push(t);
        }
        if train.is_empty() {
            return Err(Error::TooSparse {
                required: manifest.params.required(),
            });
        }
        Ok(SplitDataset {
            train: InteractionDataset::with_maps(users, ds.items.clone(), train)?,
            validation,
            test,
            seed: manifest.seed,
            params: manifest.params,
        })
    }
}

/// Persisted form of a split: parameters plus per-user held-out external IDs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub params: SplitParams,
    pub num_users: usize,
    pub num_items: usize,
    pub users: Vec<HeldOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeldOut {
    pub user: String,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<InteractionDataset> {
        parse_interactions(Path::new("mem.csv"), text, FileFormat::Csv, &LoadOptions::default())
    }

    #[test]
    fn duplicates_collapse() {
        let ds = parse("a,x\na,y\nb,x\na,x\n").unwrap();
        assert_eq!(ds.num_users(), 2);
        assert_eq!(ds.num_items(), 2);
        assert_eq!(ds.num_interactions(), 3);
        assert_eq!(ds.sparsity(), 0.75);
        assert_eq!(ds.users().ids(), ["a", "b"]);
        assert_eq!(ds.items().ids(), ["x", "y"]);
    }

    #[test]
    fn header_detection() {
        let ds = parse("user_id,item_id,rating\n1,10,4.0\n2,10,3.5\n").unwrap();
        assert_eq!(ds.num_users(), 2);
        assert_eq!(ds.num_items(), 1);
        let ds = parse("1,10\n2,11\n").unwrap();
        assert_eq!(ds.num_users(), 2);
        let ds = parse("uid,mid\n1,10\n").unwrap();
        assert_eq!(ds.num_interactions(), 1);
    }

    #[test]
    fn rating_threshold() {
        let opts = LoadOptions {
            rating_threshold: Some(4.0),
            header: None,
        };
        let text = "1,10,5\n1,11,3\n2,10,4\n";
        let ds = parse_interactions(Path::new("m"), text, FileFormat::Csv, &opts).unwrap();
        assert_eq!(ds.num_interactions(), 2);
        let err = parse_interactions(Path::new("m"), "1,10\n", FileFormat::Csv, &opts).unwrap_err();
        assert!(err.to_string().contains("m:1"), "{err}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse("1,10\n2\n3,4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn empty_file_is_error() {
        assert!(matches!(parse(""), Err(Error::Data(_))));
        assert!(matches!(parse("\n\n"), Err(Error::Data(_))));
    }

    #[test]
    fn interaction_row_is_binary_indicator() {
        let ds = InteractionDataset::from_rows(4, vec![vec![0, 2], vec![]]).unwrap();
        assert_eq!(
            ds.interaction_row(0).unwrap().to_dense::<f64>(),
            vec![1.0, 0.0, 1.0, 0.0]
        );
        let empty = ds.interaction_row(1).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.to_dense::<f64>(), vec![0.0; 4]);
        assert!(matches!(ds.interaction_row(2), Err(Error::InvalidParameter(_))));
    }

    fn user_with(n: usize, id: &str) -> Vec<(String, String)> {
        (0..n).map(|i| (id.to_owned(), format!("i{i}"))).collect()
    }

    #[test]
    fn split_arithmetic_and_threshold() {
        let mut pairs = user_with(25, "keep");
        pairs.extend(user_with(19, "drop"));
        let ds = InteractionDataset::from_pairs(pairs);
        let s = split(&ds, SplitParams::default(), 7).unwrap();
        assert_eq!(s.num_users(), 1);
        assert_eq!(s.train.users().ids(), ["keep"]);
        assert_eq!(s.train.user_items(0).len(), 10);
        assert_eq!(s.test[0].len(), 10);
        assert_eq!(s.validation[0].len(), 5);
    }

    #[test]
    fn split_all_dropped() {
        let ds = InteractionDataset::from_pairs(user_with(19, "u"));
        assert!(matches!(
            split(&ds, SplitParams::default(), 1),
            Err(Error::TooSparse { required: 20 })
        ));
    }

    #[test]
    fn split_is_deterministic() {
        let mut pairs = Vec::new();
        for u in 0..20 {
            pairs.extend(user_with(20 + u, &format!("u{u}")));
        }
        let ds = InteractionDataset::from_pairs(pairs);
        let a = split(&ds, SplitParams::default(), 42).unwrap();
        let b = split(&ds, SplitParams::default(), 42).unwrap();
        assert_eq!(a, b);
        let c = split(&ds, SplitParams::default(), 43).unwrap();
        assert_ne!(a.test, c.test);
    }

    #[test]
    fn manifest_reconstructs_split() {
        let mut pairs = Vec::new();
        for u in 0..8 {
            pairs.extend(user_with(18 + 2 * u, &format!("u{u}")));
        }
        let ds = InteractionDataset::from_pairs(pairs);
        let s = split(&ds, SplitParams::default(), 3).unwrap();
        let json = serde_json::to_string(&s.manifest()).unwrap();
        let m: SplitManifest = serde_json::from_str(&json).unwrap();
        assert_eq!(SplitDataset::from_manifest(&ds, &m).unwrap(), s);
    }

    #[test]
    fn test_fold_merges_validation_into_train() {
        let ds = InteractionDataset::from_pairs(user_with(30, "u"));
        let s = split(&ds, SplitParams::default(), 0).unwrap();
        let val = s.fold(Stage::Validation);
        let test = s.fold(Stage::Test);
        assert_eq!(val.train.user_items(0).len(), 15);
        assert_eq!(val.targets[0], s.validation[0]);
        assert_eq!(test.train.user_items(0).len(), 20);
        assert_eq!(test.targets[0], s.test[0]);
    }
}
