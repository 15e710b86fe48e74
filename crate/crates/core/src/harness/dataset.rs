//! Tabular ingestion: CSV parsing, one-hot encoding, a stratified 70/30
//! split and standardization with train-split statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::domain::{majority_rate, Example, ExamplePool, SyntheticDistribution, SyntheticKind};
use crate::rng::{substream, StreamRng};

/// Which CSV column holds the label.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl LabelColumn {
    /// Parses a column name, or a bare number as a zero-based index.
    pub fn parse(s: &str) -> Self {
        match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        }
    }

    fn resolve(&self, header: &[String]) -> Result<usize, HarnessError> {
        match self {
            LabelColumn::Last => {
                header.len().checked_sub(1).ok_or_else(|| HarnessError::InvalidData("empty header".into()))
            }
            LabelColumn::Index(i) if *i < header.len() => Ok(*i),
            LabelColumn::Index(i) => Err(HarnessError::InvalidData(format!("label index {i} out of range"))),
            LabelColumn::Name(n) => header
                .iter()
                .position(|h| h == n)
                .ok_or_else(|| HarnessError::InvalidData(format!("no column named `{n}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitOptions {
    pub label: LabelColumn,
    pub split_seed: u64,
    pub test_fraction: f64,
}

impl SplitOptions {
    pub fn new(split_seed: u64) -> Self {
        Self { label: LabelColumn::Last, split_seed, test_fraction: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    /// One binary column per category, in sorted order.
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    /// Class index `i` stands for `class_names[i]`.
    pub class_names: Vec<String>,
    pub train: Vec<Example>,
    pub test: Vec<Example>,
}

impl Dataset {
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Rows before splitting.
    pub fn total_len(&self) -> usize {
        self.train.len() + self.test.len()
    }

    pub fn train_pool(&self, rng: StreamRng) -> Result<ExamplePool, HarnessError> {
        Ok(ExamplePool::new(self.train.clone(), self.n_classes(), rng)?)
    }

    /// Accuracy of always predicting the test split's most common class.
    pub fn test_majority_rate(&self) -> f64 {
        majority_rate(self.test.iter(), self.n_classes())
    }
}

pub fn load_dataset(path: &Path, options: &SplitOptions) -> Result<Dataset, HarnessError> {
    let file = std::fs::File::open(path)?;
    let name = path.file_stem().map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned());
    load_dataset_from_reader(file, &name, options)
}

pub fn load_dataset_from_reader<R: Read>(
    reader: R,
    name: &str,
    options: &SplitOptions,
) -> Result<Dataset, HarnessError> {
    if !(options.test_fraction > 0.0 && options.test_fraction < 1.0) {
        return Err(HarnessError::InvalidConfig("test fraction must lie in (0, 1)".into()));
    }
    let mut csv = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
    let label_col = options.label.resolve(&header)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in csv.records() {
        let record = record?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    if rows.is_empty() {
        return Err(HarnessError::DegenerateDataset("no rows".into()));
    }

    let class_names: Vec<String> =
        rows.iter().map(|r| r[label_col].clone()).collect::<BTreeSet<_>>().into_iter().collect();
    if class_names.len() < 2 {
        return Err(HarnessError::DegenerateDataset(format!("single class `{}`", class_names[0])));
    }
    let class_of: BTreeMap<&str, usize> = class_names.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_col).collect();
    let kinds: Vec<ColumnKind> = feature_cols
        .iter()
        .map(|&c| {
            if rows.iter().all(|r| r[c].parse::<f64>().is_ok_and(f64::is_finite)) {
                ColumnKind::Numeric
            } else {
                ColumnKind::Categorical(
                    rows.iter().map(|r| r[c].clone()).collect::<BTreeSet<_>>().into_iter().collect(),
                )
            }
        })
        .collect();

    let mut feature_names = Vec::new();
    let mut numeric = Vec::new();
    for (&c, kind) in feature_cols.iter().zip(&kinds) {
        match kind {
            ColumnKind::Numeric => {
                numeric.push(feature_names.len());
                feature_names.push(header[c].clone());
            }
            ColumnKind::Categorical(cats) => feature_names.extend(cats.iter().map(|v| format!("{}={v}", header[c]))),
        }
    }

    let examples: Vec<Example> = rows
        .iter()
        .map(|r| {
            let mut x = Vec::with_capacity(feature_names.len());
            for (&c, kind) in feature_cols.iter().zip(&kinds) {
                match kind {
                    ColumnKind::Numeric => x.push(r[c].parse::<f64>().expect("checked numeric")),
                    ColumnKind::Categorical(cats) => x.extend(cats.iter().map(|v| if *v == r[c] { 1.0 } else { 0.0 })),
                }
            }
            Example::new(x, class_of[r[label_col].as_str()])
        })
        .collect();

    let (mut train, mut test) =
        stratified_split(examples, class_names.len(), options.test_fraction, options.split_seed);
    standardize(&mut train, &mut test, &numeric);
    Ok(Dataset { name: name.to_string(), feature_names, class_names, train, test })
}

/// Shuffles, then moves `round(test_fraction * n_c)` examples of each class
/// into the test split.
pub fn stratified_split(
    examples: Vec<Example>,
    n_classes: usize,
    test_fraction: f64,
    seed: u64,
) -> (Vec<Example>, Vec<Example>) {
    let mut rng = substream(seed, "dataset/split");
    let mut examples = examples;
    examples.shuffle(&mut rng);
    let mut by_class: Vec<Vec<Example>> = vec![Vec::new(); n_classes];
    for e in examples {
        by_class[e.label].push(e);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut group in by_class {
        let n_test = (group.len() as f64 * test_fraction).round() as usize;
        let rest = group.split_off(n_test);
        test.extend(group);
        train.extend(rest);
    }
    train.shuffle(&mut rng);
    test.shuffle(&mut rng);
    (train, test)
}

/// Centers and scales `columns` by the train split's mean and population
/// standard deviation. Constant columns become all zeros.
pub fn standardize(train: &mut [Example], test: &mut [Example], columns: &[usize]) {
    if train.is_empty() {
        return;
    }
    let n = train.len() as f64;
    for &c in columns {
        let mean = train.iter().map(|e| e.features[c]).sum::<f64>() / n;
        let var = train.iter().map(|e| (e.features[c] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for e in train.iter_mut().chain(test.iter_mut()) {
            e.features[c] = if sd > 0.0 { (e.features[c] - mean) / sd } else { 0.0 };
        }
    }
}

/// A synthetic dataset of `n` rows drawn from `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub name: String,
    pub kind: SyntheticKind,
    pub n: usize,
}

impl SyntheticSpec {
    /// Named presets: `blobs` (two 5-d Gaussians, unit spread, means one
    /// unit apart per axis) and `threshold` (uniform on `[0, 1)`, cut at 0.5).
    pub fn preset(name: &str, n: usize) -> Result<Self, HarnessError> {
        let kind = match name {
            "blobs" => SyntheticDistribution::blobs(5, 1.0, 1.0).kind().clone(),
            "threshold" => SyntheticKind::ThresholdUniform { lo: 0.0, hi: 1.0, threshold: 0.5 },
            other => return Err(HarnessError::InvalidConfig(format!("unknown synthetic preset `{other}`"))),
        };
        Ok(Self { name: name.to_string(), kind, n })
    }

    pub fn generate(&self, options: &SplitOptions) -> Result<Dataset, HarnessError> {
        let dist =
            SyntheticDistribution::new(self.kind.clone()).map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        let mut rng = substream(options.split_seed, &format!("synthetic/{}", self.name));
        let examples = dist.sample_many(self.n, &mut rng);
        let n_classes = dist.n_classes();
        let distinct: BTreeSet<usize> = examples.iter().map(|e| e.label).collect();
        if distinct.len() < 2 {
            return Err(HarnessError::DegenerateDataset(format!(
                "{} rows of `{}` hold a single class",
                self.n, self.name
            )));
        }
        let (train, test) = stratified_split(examples, n_classes, options.test_fraction, options.split_seed);
        Ok(Dataset {
            name: self.name.clone(),
            feature_names: (0..dist.n_features()).map(|i| format!("x{i}")).collect(),
            class_names: (0..n_classes).map(|c| c.to_string()).collect(),
            train,
            test,
        })
    }
}
