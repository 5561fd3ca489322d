//! Comma-separated datasets: one row per sample, one numeric column per variable,
//! plus a target column picked by name or index.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, SimSpec, Target};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetColumn {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for TargetColumn {
    type Err = std::convert::Infallible;

    /// Digits select by index, anything else by header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => TargetColumn::Index(i),
            Err(_) => TargetColumn::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

impl std::str::FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classification" => Ok(Task::Classification),
            "regression" => Ok(Task::Regression),
            other => Err(Error::Config(format!("unknown task `{other}`"))),
        }
    }
}

/// Metadata written next to an exported CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub spec: Option<SimSpec>,
    pub truth: Option<Vec<usize>>,
    pub target_column: String,
    pub task: Task,
    pub n_rows: usize,
    pub n_cols: usize,
}

pub fn load_csv(path: impl AsRef<Path>, target: &TargetColumn, has_header: bool, task: Task) -> Result<LabeledDataset> {
    read_csv(std::fs::File::open(path)?, target, has_header, task)
}

pub fn read_csv<R: Read>(reader: R, target: &TargetColumn, has_header: bool, task: Task) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(has_header).from_reader(reader);
    let headers: Option<Vec<String>> = if has_header {
        Some(rdr.headers()?.iter().map(|h| h.trim().to_string()).collect())
    } else {
        None
    };
    let target_idx = match target {
        TargetColumn::Index(i) => *i,
        TargetColumn::Name(name) => headers
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::Config(format!("target column `{name}` not found")))?,
    };

    let mut width: Option<usize> = headers.as_ref().map(|h| h.len());
    let mut values = Vec::new();
    let mut raw_targets = Vec::new();
    let mut n_rows = 0usize;
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1 + usize::from(has_header);
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(Error::Parse {
                row,
                col: record.len(),
                message: format!("expected {w} fields"),
            });
        }
        if target_idx >= w {
            return Err(Error::Config(format!("target column index {target_idx} out of range ({w} columns)")));
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                row,
                col: c + 1,
                message: format!("non-numeric cell `{cell}`"),
            })?;
            if c == target_idx {
                raw_targets.push(v);
            } else {
                values.push(v);
            }
        }
        n_rows += 1;
    }
    let width = width.unwrap_or(0);
    if n_rows == 0 || width < 2 {
        return Err(Error::Config("CSV must hold at least one row and one feature column".into()));
    }
    let x = Array2::from_shape_vec((n_rows, width - 1), values).expect("row widths checked");

    let target_values = match task {
        Task::Regression => Target::Real(raw_targets),
        Task::Classification => {
            let mut classes = raw_targets.clone();
            classes.sort_by(f64::total_cmp);
            classes.dedup();
            let labels = raw_targets
                .iter()
                .map(|v| classes.binary_search_by(|c| c.total_cmp(v)).expect("value present"))
                .collect();
            Target::Classes {
                labels,
                n_classes: classes.len().max(2),
            }
        }
    };
    let mut d = LabeledDataset::new(x, target_values)?;
    if let Some(h) = headers {
        d.column_names = h
            .into_iter()
            .enumerate()
            .filter(|&(c, _)| c != target_idx)
            .map(|(_, name)| name)
            .collect();
    }
    Ok(d)
}

/// Writes the feature columns followed by a `y` target column, with a header row.
pub fn write_csv<W: Write>(writer: W, dataset: &LabeledDataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = dataset.column_names.clone();
    header.push("y".to_string());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..dataset.n_rows() {
        record.clear();
        record.extend(dataset.x.row(i).iter().map(|v| v.to_string()));
        record.push(match &dataset.target {
            Target::Classes { labels, .. } => labels[i].to_string(),
            Target::Real(y) => y[i].to_string(),
        });
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sidecar<W: Write>(writer: W, dataset: &LabeledDataset, spec: Option<&SimSpec>) -> Result<()> {
    let sidecar = DatasetSidecar {
        spec: spec.cloned(),
        truth: dataset.truth.clone(),
        target_column: "y".to_string(),
        task: if dataset.target.is_classification() {
            Task::Classification
        } else {
            Task::Regression
        },
        n_rows: dataset.n_rows(),
        n_cols: dataset.n_cols(),
    };
    serde_json::to_writer_pretty(writer, &sidecar)?;
    Ok(())
}
