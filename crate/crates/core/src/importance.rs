//! Variable importance from per-sample input gradients.
//!
//! Given the matrix `G` of loss gradients (`n` samples by `d` active variables), the
//! score of variable `j` is either the mean absolute gradient `(1/n) Σ_i |G_ij|` or
//! the mean squared gradient `(1/n) Σ_i G_ij²`.

use std::io::Write;

use ndarray::{ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    AbsMean,
    #[default]
    SquareMean,
}

impl std::str::FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "abs_mean" | "abs-mean" => Ok(ScoreKind::AbsMean),
            "square_mean" | "square-mean" => Ok(ScoreKind::SquareMean),
            other => Err(Error::Config(format!("unknown score kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    pub scores: Vec<f64>,
    pub kind: ScoreKind,
    /// Whether the sd/variance correction has been applied.
    pub scaled: bool,
    /// Positions whose data column was constant when the correction was applied.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constant_columns: Vec<usize>,
}

impl ImportanceVector {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

fn column_means(gradients: ArrayView2<'_, f64>, f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
    if gradients.nrows() == 0 || gradients.ncols() == 0 {
        return Err(Error::Config("importance needs a non-empty gradient matrix".into()));
    }
    let n = gradients.nrows() as f64;
    Ok(gradients
        .axis_iter(Axis(1))
        .map(|col| col.iter().map(|&g| f(g)).sum::<f64>() / n)
        .collect())
}

pub fn score_abs_mean(gradients: ArrayView2<'_, f64>) -> Result<ImportanceVector> {
    Ok(ImportanceVector {
        scores: column_means(gradients, f64::abs)?,
        kind: ScoreKind::AbsMean,
        scaled: false,
        constant_columns: Vec::new(),
    })
}

pub fn score_square_mean(gradients: ArrayView2<'_, f64>) -> Result<ImportanceVector> {
    Ok(ImportanceVector {
        scores: column_means(gradients, |g| g * g)?,
        kind: ScoreKind::SquareMean,
        scaled: false,
        constant_columns: Vec::new(),
    })
}

pub fn score(kind: ScoreKind, gradients: ArrayView2<'_, f64>) -> Result<ImportanceVector> {
    match kind {
        ScoreKind::AbsMean => score_abs_mean(gradients),
        ScoreKind::SquareMean => score_square_mean(gradients),
    }
}

/// Multiplies abs-mean scores by the sample standard deviation of each data column,
/// and square-mean scores by the sample variance. `data` has one column per score.
pub fn apply_scale_correction(
    scores: &ImportanceVector,
    data: ArrayView2<'_, f64>,
) -> Result<ImportanceVector> {
    if data.ncols() != scores.len() {
        return Err(Error::shape("scale correction columns", scores.len(), data.ncols()));
    }
    if data.nrows() < 2 {
        return Err(Error::Config("scale correction needs at least two rows".into()));
    }
    let mut out = scores.clone();
    out.scaled = true;
    out.constant_columns.clear();
    for (j, col) in data.axis_iter(Axis(1)).enumerate() {
        let variance = col.var(1.0);
        if variance == 0.0 {
            out.constant_columns.push(j);
        }
        let factor = match scores.kind {
            ScoreKind::AbsMean => variance.sqrt(),
            ScoreKind::SquareMean => variance,
        };
        out.scores[j] *= factor;
    }
    Ok(out)
}

/// Positions sorted by ascending score; ties keep ascending position order.
pub fn rank_ascending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]).then(a.cmp(&b)));
    order
}

/// Writes `variable_id,score` rows.
pub fn write_scores_csv<W: Write>(writer: W, ids: &[usize], scores: &[f64]) -> Result<()> {
    if ids.len() != scores.len() {
        return Err(Error::shape("score export", ids.len(), scores.len()));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["variable_id", "score"])?;
    for (id, s) in ids.iter().zip(scores) {
        w.write_record([id.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
