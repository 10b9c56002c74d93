//! Corpus loading, validation, splitting, rebalancing and analytics.
//!
//! Posts are immutable after load. Splitting and oversampling are pure
//! functions of (input, seed), so repeated runs with the same seed produce
//! identical partitions.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::preprocess;

/// Binary post label. `Depressive` is the positive/detection class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Depressive,
    NonDepressive,
}

impl Label {
    pub fn parse(s: &str) -> Option<Label> {
        match s.trim().to_lowercase().as_str() {
            "depressive" => Some(Label::Depressive),
            "non_depressive" | "non-depressive" | "nondepressive" => Some(Label::NonDepressive),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Depressive => "depressive",
            Label::NonDepressive => "non_depressive",
        }
    }

    /// One-hot / class index used by the network: depressive = 1.
    pub fn class_index(&self) -> usize {
        match self {
            Label::Depressive => 1,
            Label::NonDepressive => 0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Stable opaque post identifier, assigned in load order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PostId(pub u32);

impl fmt::Display for PostId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{:06}", self.0)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledPost {
    pub id: PostId,
    pub text: String,
    pub label: Label,
}

/// An ordered collection of labeled posts with provenance.
///
/// Ids are unique at load time. The one sanctioned exception is an
/// oversampled training corpus, where duplicated posts keep their source id
/// and every duplicate is recorded in the owning [`DatasetSplits`] log.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Corpus {
    pub posts: Vec<LabeledPost>,
    pub source: String,
}

impl Corpus {
    pub fn new(posts: Vec<LabeledPost>, source: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(posts.len());
        for p in &posts {
            if !seen.insert(p.id) {
                return Err(Error::DuplicateId(p.id.0));
            }
        }
        Ok(Corpus {
            posts,
            source: source.into(),
        })
    }

    /// Construction path for oversampled corpora, where duplicate ids are
    /// intentional and tracked by the caller.
    fn with_duplicates(posts: Vec<LabeledPost>, source: impl Into<String>) -> Self {
        Corpus {
            posts,
            source: source.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn ids(&self) -> Vec<PostId> {
        self.posts.iter().map(|p| p.id).collect()
    }
}

/// Supported dataset file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    Csv,
    Tsv,
}

impl FileFormat {
    pub fn delimiter(&self) -> u8 {
        match self {
            FileFormat::Csv => b',',
            FileFormat::Tsv => b'\t',
        }
    }
}

/// Load a corpus from a delimited file with a `text` and a `label` column
/// (header names matched case-insensitively). Text is NFC-normalized at
/// load; labels are parsed case-insensitively from
/// {depressive, non_depressive}. Row numbers in errors count data rows from 1.
pub fn load_corpus(path: &Path, format: FileFormat) -> Result<Corpus> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?
        .clone();
    let find_col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
    };
    let text_col = find_col("text").ok_or_else(|| Error::MissingColumn("text".into()))?;
    let label_col = find_col("label").ok_or_else(|| Error::MissingColumn("label".into()))?;

    let mut posts = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let raw_text = record.get(text_col).unwrap_or("");
        let text: String = raw_text.nfc().collect();
        if text.trim().is_empty() {
            return Err(Error::EmptyText { row });
        }
        let raw_label = record.get(label_col).unwrap_or("");
        let label = Label::parse(raw_label).ok_or_else(|| Error::UnknownLabel {
            row,
            label: raw_label.to_string(),
        })?;
        posts.push(LabeledPost {
            id: PostId(i as u32),
            text,
            label,
        });
    }
    if posts.is_empty() {
        return Err(Error::NoDataRows(path.to_path_buf()));
    }
    Corpus::new(posts, path.display().to_string())
}

/// Per-class post counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub depressive: usize,
    pub non_depressive: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.depressive + self.non_depressive
    }

    pub fn get(&self, label: Label) -> usize {
        match label {
            Label::Depressive => self.depressive,
            Label::NonDepressive => self.non_depressive,
        }
    }
}

pub fn class_distribution(corpus: &Corpus) -> ClassCounts {
    let mut counts = ClassCounts {
        depressive: 0,
        non_depressive: 0,
    };
    for p in &corpus.posts {
        match p.label {
            Label::Depressive => counts.depressive += 1,
            Label::NonDepressive => counts.non_depressive += 1,
        }
    }
    counts
}

/// Train/validation/test partitions with full provenance.
#[derive(Debug, Clone)]
pub struct DatasetSplits {
    pub train: Corpus,
    pub validation: Corpus,
    pub test: Corpus,
    pub seed: u64,
    pub train_ratio: f64,
    pub val_ratio: f64,
    pub stratified: bool,
    pub oversampled: bool,
    /// Source id of each duplicate appended by oversampling, in append order.
    pub oversample_log: Vec<PostId>,
}

/// Snap a product like n*fraction to the nearest integer when it differs
/// only by floating-point dust (e.g. 140 * 0.3 = 42.000000000000007).
fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() < 1e-6 {
        r
    } else {
        x
    }
}

/// Size of the held-out part when carving `fraction` out of `n` items.
/// ceil semantics: a nonzero fraction always holds out at least one item,
/// and 70/30 of 3914 gives the canonical 2739/1175.
fn held_out_size(n: usize, fraction: f64) -> usize {
    snap(n as f64 * fraction).ceil() as usize
}

/// Apportion `total` held-out slots across classes proportionally to class
/// sizes, assigning remainders to the largest fractional parts (ties broken
/// by label order for determinism).
fn apportion(class_sizes: &BTreeMap<Label, usize>, fraction: f64, total: usize) -> BTreeMap<Label, usize> {
    let mut base: BTreeMap<Label, usize> = BTreeMap::new();
    let mut remainders: Vec<(Label, f64)> = Vec::new();
    let mut assigned = 0usize;
    for (&label, &n) in class_sizes {
        let target = snap(n as f64 * fraction);
        let floor = target.floor() as usize;
        let floor = floor.min(n);
        base.insert(label, floor);
        assigned += floor;
        remainders.push((label, target - floor as f64));
    }
    // Hand out the remaining slots by descending fractional remainder.
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut left = total.saturating_sub(assigned);
    for (label, _) in remainders {
        if left == 0 {
            break;
        }
        let n = class_sizes[&label];
        let cur = base.get_mut(&label).unwrap();
        if *cur < n {
            *cur += 1;
            left -= 1;
        }
    }
    base
}

/// Split a corpus into train/validation/test.
///
/// The held-out test set has `ceil((1 - train_ratio) * N)` posts; the
/// validation set is carved from the remaining train portion as
/// `ceil(val_ratio * |train portion|)` BEFORE any oversampling. Stratified
/// mode preserves per-class proportions by largest-remainder apportionment.
pub fn split_corpus(
    corpus: &Corpus,
    train_ratio: f64,
    val_ratio: f64,
    seed: u64,
    stratified: bool,
) -> Result<DatasetSplits> {
    if !(train_ratio > 0.0 && train_ratio < 1.0) {
        return Err(Error::InvalidRatio(format!(
            "train_ratio must be in (0, 1), got {train_ratio}"
        )));
    }
    if !(0.0..1.0).contains(&val_ratio) {
        return Err(Error::InvalidRatio(format!(
            "val_ratio must be in [0, 1), got {val_ratio}"
        )));
    }
    if corpus.is_empty() {
        return Err(Error::EmptyPartition("train"));
    }

    let n = corpus.len();
    let n_test = held_out_size(n, 1.0 - train_ratio);
    let n_trainval = n - n_test;
    if n_test == 0 {
        return Err(Error::EmptyPartition("test"));
    }
    if n_trainval == 0 {
        return Err(Error::EmptyPartition("train"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Work over indices into corpus.posts, grouped by class when stratified.
    let mut trainval_idx: Vec<usize> = Vec::with_capacity(n_trainval);
    let mut test_idx: Vec<usize> = Vec::with_capacity(n_test);

    if stratified {
        let mut by_class: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
        for (i, p) in corpus.posts.iter().enumerate() {
            by_class.entry(p.label).or_default().push(i);
        }
        let class_sizes: BTreeMap<Label, usize> =
            by_class.iter().map(|(&l, v)| (l, v.len())).collect();
        let test_per_class = apportion(&class_sizes, 1.0 - train_ratio, n_test);
        for (label, mut idx) in by_class {
            idx.shuffle(&mut rng);
            let t = test_per_class[&label];
            let (test_part, train_part) = idx.split_at(t);
            if train_part.is_empty() {
                return Err(Error::ClassMissing(label.to_string()));
            }
            test_idx.extend_from_slice(test_part);
            trainval_idx.extend_from_slice(train_part);
        }
        // Interleave classes deterministically instead of leaving them blocked.
        trainval_idx.shuffle(&mut rng);
        test_idx.shuffle(&mut rng);
    } else {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        test_idx.extend_from_slice(&idx[..n_test]);
        trainval_idx.extend_from_slice(&idx[n_test..]);
    }

    // Carve validation out of the train portion, pre-oversampling.
    let n_val = if val_ratio > 0.0 {
        held_out_size(n_trainval, val_ratio)
    } else {
        0
    };
    if n_val >= n_trainval {
        return Err(Error::EmptyPartition("train"));
    }
    let (val_idx, train_idx): (Vec<usize>, Vec<usize>) = if stratified && n_val > 0 {
        let mut by_class: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
        for &i in &trainval_idx {
            by_class.entry(corpus.posts[i].label).or_default().push(i);
        }
        let class_sizes: BTreeMap<Label, usize> =
            by_class.iter().map(|(&l, v)| (l, v.len())).collect();
        let val_per_class = apportion(&class_sizes, val_ratio, n_val);
        let mut val = Vec::with_capacity(n_val);
        let mut train = Vec::new();
        for (label, idx) in by_class {
            let v = val_per_class[&label];
            let (val_part, train_part) = idx.split_at(v);
            if train_part.is_empty() {
                return Err(Error::ClassMissing(label.to_string()));
            }
            val.extend_from_slice(val_part);
            train.extend_from_slice(train_part);
        }
        val.shuffle(&mut rng);
        train.shuffle(&mut rng);
        (val, train)
    } else {
        let val = trainval_idx[..n_val].to_vec();
        let train = trainval_idx[n_val..].to_vec();
        (val, train)
    };

    let pick = |idx: &[usize], name: &str| {
        Corpus::with_duplicates(
            idx.iter().map(|&i| corpus.posts[i].clone()).collect(),
            format!("{}:{}", corpus.source, name),
        )
    };
    Ok(DatasetSplits {
        train: pick(&train_idx, "train"),
        validation: pick(&val_idx, "validation"),
        test: pick(&test_idx, "test"),
        seed,
        train_ratio,
        val_ratio,
        stratified,
        oversampled: false,
        oversample_log: Vec::new(),
    })
}

/// Balance the training partition by randomly duplicating minority-class
/// posts (with replacement) until class counts are equal. Validation and
/// test are untouched; each duplicate's source id is appended to the log.
pub fn oversample_minority(split: &DatasetSplits, seed: u64) -> Result<DatasetSplits> {
    if split.oversampled {
        return Err(Error::AlreadyOversampled);
    }
    if split.train.is_empty() {
        return Err(Error::EmptyPartition("train"));
    }
    let counts = class_distribution(&split.train);
    if counts.depressive == 0 || counts.non_depressive == 0 {
        return Err(Error::SingleClassTrain);
    }

    let minority = if counts.depressive < counts.non_depressive {
        Label::Depressive
    } else {
        Label::NonDepressive
    };
    let deficit = counts
        .get(minority.opposite())
        .saturating_sub(counts.get(minority));

    let minority_posts: Vec<&LabeledPost> = split
        .train
        .posts
        .iter()
        .filter(|p| p.label == minority)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train_posts = split.train.posts.clone();
    let mut log = Vec::with_capacity(deficit);
    for _ in 0..deficit {
        let pick = minority_posts[rng.random_range(0..minority_posts.len())];
        log.push(pick.id);
        train_posts.push(pick.clone());
    }

    Ok(DatasetSplits {
        train: Corpus::with_duplicates(train_posts, format!("{}:oversampled", split.train.source)),
        validation: split.validation.clone(),
        test: split.test.clone(),
        seed: split.seed,
        train_ratio: split.train_ratio,
        val_ratio: split.val_ratio,
        stratified: split.stratified,
        oversampled: true,
        oversample_log: log,
    })
}

impl Label {
    pub fn opposite(&self) -> Label {
        match self {
            Label::Depressive => Label::NonDepressive,
            Label::NonDepressive => Label::Depressive,
        }
    }
}

/// Measurement unit for post length analytics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum LengthUnit {
    Words,
    Chars,
}

fn post_length(text: &str, unit: LengthUnit) -> usize {
    match unit {
        LengthUnit::Words => text.split_whitespace().count(),
        LengthUnit::Chars => text.chars().count(),
    }
}

/// Histogram of raw post lengths for one class. Bins are left-closed:
/// bin start `b` counts lengths in [b, b + bin_width).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LengthHistogram {
    pub label: Label,
    pub bin_width: usize,
    /// bin start -> count
    pub bins: BTreeMap<usize, usize>,
    pub count: usize,
    pub mean: f64,
}

/// Per-class length distribution over raw (pre-cleaning) text.
pub fn length_distribution(
    corpus: &Corpus,
    unit: LengthUnit,
    bin_width: usize,
) -> Vec<LengthHistogram> {
    let bin_width = bin_width.max(1);
    let mut result: BTreeMap<Label, LengthHistogram> = BTreeMap::new();
    for label in [Label::Depressive, Label::NonDepressive] {
        result.insert(
            label,
            LengthHistogram {
                label,
                bin_width,
                bins: BTreeMap::new(),
                count: 0,
                mean: 0.0,
            },
        );
    }
    for p in &corpus.posts {
        let len = post_length(&p.text, unit);
        let hist = result.get_mut(&p.label).unwrap();
        *hist.bins.entry((len / bin_width) * bin_width).or_insert(0) += 1;
        hist.count += 1;
        hist.mean += len as f64;
    }
    let mut out: Vec<LengthHistogram> = result.into_values().collect();
    for h in &mut out {
        if h.count > 0 {
            h.mean /= h.count as f64;
        }
    }
    out
}

/// Ranked token frequencies for one class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopWords {
    pub label: Label,
    pub entries: Vec<(String, usize)>,
}

/// Most frequent tokens per class over cleaned text. At most `k` entries per
/// class; tokens shorter than `min_len` chars are skipped; ties break
/// lexicographically by code point.
pub fn top_words(corpus: &Corpus, k: usize, min_len: usize) -> Vec<TopWords> {
    let mut counters: BTreeMap<Label, BTreeMap<String, usize>> = BTreeMap::new();
    counters.insert(Label::Depressive, BTreeMap::new());
    counters.insert(Label::NonDepressive, BTreeMap::new());
    for p in &corpus.posts {
        let cleaned = preprocess::clean_default(&p.text);
        let counter = counters.get_mut(&p.label).unwrap();
        for token in preprocess::tokenize(&cleaned) {
            if token.chars().count() >= min_len {
                *counter.entry(token.to_string()).or_insert(0) += 1;
            }
        }
    }
    counters
        .into_iter()
        .map(|(label, counter)| {
            let mut entries: Vec<(String, usize)> = counter.into_iter().collect();
            entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            entries.truncate(k);
            TopWords { label, entries }
        })
        .collect()
}

/// JSON-persistable record of a split, sufficient to reconstruct every
/// partition from the source dataset.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SplitsManifest {
    pub seed: u64,
    pub train_ratio: f64,
    pub val_ratio: f64,
    pub stratified: bool,
    pub oversampled: bool,
    pub n_posts: usize,
    pub train_ids: Vec<PostId>,
    pub validation_ids: Vec<PostId>,
    pub test_ids: Vec<PostId>,
    pub oversample_log: Vec<PostId>,
}

impl SplitsManifest {
    pub fn from_splits(splits: &DatasetSplits) -> Self {
        let distinct: HashSet<PostId> = splits
            .train
            .posts
            .iter()
            .chain(&splits.validation.posts)
            .chain(&splits.test.posts)
            .map(|p| p.id)
            .collect();
        SplitsManifest {
            seed: splits.seed,
            train_ratio: splits.train_ratio,
            val_ratio: splits.val_ratio,
            stratified: splits.stratified,
            oversampled: splits.oversampled,
            n_posts: distinct.len(),
            train_ids: splits.train.ids(),
            validation_ids: splits.validation.ids(),
            test_ids: splits.test.ids(),
            oversample_log: splits.oversample_log.clone(),
        }
    }

    /// Rebuild partitions from the source corpus. Train ids may repeat
    /// (oversampled runs); each occurrence resolves to the same post.
    pub fn materialize(&self, corpus: &Corpus) -> Result<DatasetSplits> {
        let by_id: BTreeMap<PostId, &LabeledPost> =
            corpus.posts.iter().map(|p| (p.id, p)).collect();
        let gather = |ids: &[PostId], name: &str| -> Result<Corpus> {
            let mut posts = Vec::with_capacity(ids.len());
            for id in ids {
                let post = by_id.get(id).ok_or_else(|| Error::CorruptComponent {
                    component: "splits".into(),
                    reason: format!("id {id} not present in dataset"),
                })?;
                posts.push((*post).clone());
            }
            Ok(Corpus::with_duplicates(
                posts,
                format!("{}:{}", corpus.source, name),
            ))
        };
        Ok(DatasetSplits {
            train: gather(&self.train_ids, "train")?,
            validation: gather(&self.validation_ids, "validation")?,
            test: gather(&self.test_ids, "test")?,
            seed: self.seed,
            train_ratio: self.train_ratio,
            val_ratio: self.val_ratio,
            stratified: self.stratified,
            oversampled: self.oversampled,
            oversample_log: self.oversample_log.clone(),
        })
    }
}

/// Write a corpus back out in the canonical format, optionally appending a
/// `text_clean` column.
pub fn write_corpus_csv(
    corpus: &Corpus,
    path: &Path,
    format: FileFormat,
    cleaned: Option<&[String]>,
) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(format.delimiter())
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    let write = |w: &mut csv::Writer<std::fs::File>, rec: &[&str]| {
        w.write_record(rec).map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })
    };
    if cleaned.is_some() {
        write(&mut writer, &["text", "label", "text_clean"])?;
    } else {
        write(&mut writer, &["text", "label"])?;
    }
    for (i, p) in corpus.posts.iter().enumerate() {
        if let Some(cleaned) = cleaned {
            write(&mut writer, &[&p.text, p.label.as_str(), &cleaned[i]])?;
        } else {
            write(&mut writer, &[&p.text, p.label.as_str()])?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::json(path, e))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn save_splits_manifest(path: &Path, manifest: &SplitsManifest) -> Result<()> {
    write_json(path, manifest)
}

pub fn load_splits_manifest(path: &Path) -> Result<SplitsManifest> {
    read_json(path)
}
