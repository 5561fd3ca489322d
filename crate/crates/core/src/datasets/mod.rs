//! Labeled data: simulation schemes, CSV and IDX ingestion, splitting and scaling.

mod csv_io;
mod idx;
mod sim;

pub use csv_io::{load_csv, read_csv, write_csv, write_sidecar, DatasetSidecar, TargetColumn, Task};
pub use idx::{
    load_idx, mnist_digits, parse_idx_images, parse_idx_labels, read_idx_images, read_idx_labels,
    write_idx_images, write_idx_labels, IdxImages, IMAGES_MAGIC, LABELS_MAGIC, MNIST_VALIDATION_IMAGES,
};
pub use sim::{
    gen_dataset1, gen_dataset2, gen_dataset3, gen_dataset4, gen_dataset4_with, generate,
    synthetic_grid_images, Dataset4Coefficients, SimScheme, SimSpec,
};

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fraction of rows kept out of the test set.
pub const TRAIN_FRACTION: f64 = 0.8;
/// Fraction of the non-test rows held out for early stopping.
pub const VALIDATION_FRACTION: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRole {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Class indices in `0..n_classes`.
    Classes { labels: Vec<usize>, n_classes: usize },
    Real(Vec<f64>),
}

impl Target {
    pub fn len(&self) -> usize {
        match self {
            Target::Classes { labels, .. } => labels.len(),
            Target::Real(y) => y.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_classification(&self) -> bool {
        matches!(self, Target::Classes { .. })
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Target::Classes { n_classes, .. } => *n_classes,
            Target::Real(_) => 1,
        }
    }

    pub fn select(&self, rows: &[usize]) -> Target {
        match self {
            Target::Classes { labels, n_classes } => Target::Classes {
                labels: rows.iter().map(|&i| labels[i]).collect(),
                n_classes: *n_classes,
            },
            Target::Real(y) => Target::Real(rows.iter().map(|&i| y[i]).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub x: Array2<f64>,
    pub target: Target,
    /// Ground-truth significant columns, known only for simulated data.
    pub truth: Option<Vec<usize>>,
    pub split: Option<Vec<SplitRole>>,
    pub column_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(x: Array2<f64>, target: Target) -> Result<Self> {
        if x.nrows() != target.len() {
            return Err(Error::shape("dataset rows", x.nrows(), target.len()));
        }
        if let Target::Classes { labels, n_classes } = &target {
            if let Some(&bad) = labels.iter().find(|&&l| l >= *n_classes) {
                return Err(Error::Config(format!("label {bad} out of range for {n_classes} classes")));
            }
        }
        let column_names = (0..x.ncols()).map(|j| format!("x{j}")).collect();
        Ok(Self {
            x,
            target,
            truth: None,
            split: None,
            column_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.x.ncols()
    }

    /// Row indices with the given role, ascending.
    pub fn rows_with(&self, role: SplitRole) -> Result<Vec<usize>> {
        let split = self
            .split
            .as_ref()
            .ok_or_else(|| Error::Config("dataset has no train/validation/test split".into()))?;
        Ok((0..split.len()).filter(|&i| split[i] == role).collect())
    }

    /// New dataset holding `rows` in order; split labels and truth are carried over.
    pub fn subset(&self, rows: &[usize]) -> LabeledDataset {
        LabeledDataset {
            x: self.x.select(Axis(0), rows),
            target: self.target.select(rows),
            truth: self.truth.clone(),
            split: self.split.as_ref().map(|s| rows.iter().map(|&i| s[i]).collect()),
            column_names: self.column_names.clone(),
        }
    }
}

/// Sizes `(train, validation, test)` for `n` rows.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let non_test = (n as f64 * TRAIN_FRACTION).round() as usize;
    let validation = (non_test as f64 * VALIDATION_FRACTION).round() as usize;
    (non_test - validation, validation, n - non_test)
}

/// Assigns split roles with a seeded shuffle: 20% test, then 30% of the rest validation.
pub fn split(mut dataset: LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    let n = dataset.n_rows();
    let (n_train, n_val, n_test) = split_sizes(n);
    if n_train == 0 || n_val == 0 || n_test == 0 {
        return Err(Error::Config(format!("{n} rows are too few for a three-way split")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut roles = vec![SplitRole::Train; n];
    for &i in &order[..n_test] {
        roles[i] = SplitRole::Test;
    }
    for &i in &order[n_test..n_test + n_val] {
        roles[i] = SplitRole::Validation;
    }
    dataset.split = Some(roles);
    Ok(dataset)
}

/// Centers and scales every column with training-split statistics.
///
/// Constant training columns are set to 0 everywhere and reported with a warning.
pub fn standardize(mut dataset: LabeledDataset) -> Result<LabeledDataset> {
    let train_rows = dataset.rows_with(SplitRole::Train)?;
    if train_rows.len() < 2 {
        return Err(Error::Config("standardization needs at least two training rows".into()));
    }
    let train = dataset.x.select(Axis(0), &train_rows);
    let mut constant = Vec::new();
    for (j, mut col) in dataset.x.axis_iter_mut(Axis(1)).enumerate() {
        let tcol = train.column(j);
        let mean = tcol.mean().expect("non-empty");
        let sd = tcol.std(1.0);
        if sd == 0.0 {
            constant.push(j);
            col.fill(0.0);
        } else {
            col.mapv_inplace(|v| (v - mean) / sd);
        }
    }
    if !constant.is_empty() {
        log::warn!("{} constant column(s) set to 0 during standardization", constant.len());
    }
    Ok(dataset)
}
