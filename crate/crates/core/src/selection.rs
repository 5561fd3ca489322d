//! Backward elimination with FDR control.
//!
//! 1. Append `q` surrogate null columns to the training/validation rows and train a
//!    network on all `p + q` inputs.
//! 2. While the estimated FDR exceeds the target: score every active input on the
//!    training rows, drop the `m` lowest-scoring inputs (originals and surrogates
//!    pooled), and keep training from the surviving weights.
//! 3. Remove whatever surrogates remain and retrain on the selected originals.
//!
//! Test metrics are reported for a network trained on all `p` originals ("initial")
//! and for the final network ("final").

use std::collections::BTreeSet;
use std::io::Write;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::datasets::{LabeledDataset, SplitRole, Target};
use crate::fdr::{estimate_fdr, step_size, FdrEstimate};
use crate::importance::{apply_scale_correction, rank_ascending, score, ImportanceVector, ScoreKind};
use crate::net::{loss, train, Batch, NetworkModel, OutputHead, TrainConfig};
use crate::seeds::derive_seed;
use crate::surrogate::{augment, AugmentedDataset, ColumnOrigin};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    /// Training settings; `shuffle_seed` is replaced by seeds derived from `seed`.
    pub train: TrainConfig,
    /// Target FDR `η*`.
    pub eta_star: f64,
    /// Elimination rate `ε`.
    pub epsilon: f64,
    /// Number of surrogate variables; `None` means `q = p`.
    pub q: Option<usize>,
    pub score_kind: ScoreKind,
    /// Multiply scores by column sd (abs-mean) or variance (square-mean).
    pub scale_scores: bool,
    pub seed: u64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            hidden: vec![40, 20],
            train: TrainConfig::default(),
            eta_star: 0.1,
            epsilon: 1.0,
            q: None,
            score_kind: ScoreKind::SquareMean,
            scale_scores: false,
            seed: 0,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_star > 0.0 && self.eta_star < 1.0) {
            return Err(Error::Config(format!("eta_star = {} must lie in (0, 1)", self.eta_star)));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::Config(format!("epsilon = {} must lie in (0, 1]", self.epsilon)));
        }
        if self.q == Some(0) {
            return Err(Error::Config("q must be at least 1".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        self.train.validate()
    }
}

/// One row of the elimination trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub r: usize,
    pub r0: usize,
    pub r_minus_r0: usize,
    pub eta_hat: f64,
    /// Variables eliminated after this record; `None` on the stopping record.
    pub m: Option<usize>,
    /// Significant originals still active (simulated data only).
    pub r_prime: Option<usize>,
    /// Actual FDR of the active originals (simulated data only).
    pub actual_fdr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub loss: f64,
    /// Misclassification rate; `None` for regression.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl Confusion {
    /// `FP / max(TP + FP, 1)`.
    pub fn actual_fdr(&self) -> f64 {
        self.false_positives as f64 / (self.true_positives + self.false_positives).max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Selected original variable ids, ascending.
    pub selected: Vec<usize>,
    pub eta_hat_final: f64,
    pub history: Vec<StepRecord>,
    pub initial: Evaluation,
    #[serde(rename = "final")]
    pub final_: Evaluation,
    pub true_positives: Option<usize>,
    pub false_positives: Option<usize>,
    pub actual_fdr: Option<f64>,
    pub p: usize,
    pub q: usize,
    pub eta_star: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl SelectionReport {
    /// Number of elimination steps performed.
    pub fn n_steps(&self) -> usize {
        self.history.iter().filter(|h| h.m.is_some()).count()
    }
}

#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    pub report: SelectionReport,
    pub final_model: NetworkModel,
    /// Scores of the selected variables under the final model, in `report.selected` order.
    pub final_scores: ImportanceVector,
}

pub fn confusion_vs_truth(selected: &[usize], truth: &[usize]) -> Confusion {
    let truth: BTreeSet<usize> = truth.iter().copied().collect();
    let selected: BTreeSet<usize> = selected.iter().copied().collect();
    let tp = selected.intersection(&truth).count();
    Confusion {
        true_positives: tp,
        false_positives: selected.len() - tp,
        false_negatives: truth.len() - tp,
    }
}

/// Test loss (mean per-sample loss) and, for classification, the argmax error rate.
pub fn evaluate(model: &NetworkModel, test: &Batch) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::Config("evaluation needs a non-empty test set".into()));
    }
    let out = model.forward(test.inputs())?;
    let mean_loss = loss(out.view(), test.targets(), model.output_head())?;
    let error = model.output_head().is_classification().then(|| {
        let wrong = out
            .rows()
            .into_iter()
            .zip(test.targets().rows())
            .filter(|(o, t)| argmax(o.iter()) != argmax(t.iter()))
            .count();
        wrong as f64 / test.len() as f64
    });
    Ok(Evaluation { loss: mean_loss, error })
}

fn argmax<'a>(values: impl Iterator<Item = &'a f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Targets of `dataset` as a matrix (one-hot rows for classification).
pub fn target_matrix(target: &Target) -> Array2<f64> {
    match target {
        Target::Classes { labels, n_classes } => {
            let mut t = Array2::zeros((labels.len(), *n_classes));
            for (i, &l) in labels.iter().enumerate() {
                t[[i, l]] = 1.0;
            }
            t
        }
        Target::Real(y) => Array2::from_shape_vec((y.len(), 1), y.clone()).expect("column vector"),
    }
}

pub fn head_for(target: &Target) -> OutputHead {
    if target.is_classification() {
        OutputHead::SoftmaxCrossEntropy
    } else {
        OutputHead::IdentitySquaredError
    }
}

fn layer_dims(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut dims = vec![input];
    dims.extend_from_slice(hidden);
    dims.push(output);
    dims
}

/// Mutable state of one elimination run over an augmented dataset.
///
/// The augmented matrix holds training rows first (`n_train` of them) followed by
/// validation rows. `active` lists the global column ids feeding the model, in input
/// order.
#[derive(Debug, Clone)]
pub struct SelectionState {
    augmented: AugmentedDataset,
    model: NetworkModel,
    active: Vec<usize>,
    train: Batch,
    validation: Batch,
    step: usize,
    history: Vec<StepRecord>,
    truth: Option<BTreeSet<usize>>,
    cfg: SelectionConfig,
}

impl SelectionState {
    /// Builds the state with a freshly initialised (untrained) network over the
    /// currently active columns.
    pub fn new(
        augmented: AugmentedDataset,
        targets: Array2<f64>,
        n_train: usize,
        head: OutputHead,
        cfg: SelectionConfig,
        truth: Option<&[usize]>,
    ) -> Result<Self> {
        cfg.validate()?;
        let n = augmented.n_rows();
        if targets.nrows() != n {
            return Err(Error::shape("selection targets", n, targets.nrows()));
        }
        if n_train == 0 || n_train >= n {
            return Err(Error::Config(format!(
                "need both training and validation rows, got {n_train} of {n}"
            )));
        }
        let active = augmented.active_ids();
        if active.is_empty() {
            return Err(Error::Config("no active columns".into()));
        }
        let train_rows: Vec<usize> = (0..n_train).collect();
        let val_rows: Vec<usize> = (n_train..n).collect();
        let train = Batch::new(
            augmented.active_matrix(&train_rows),
            targets.select(Axis(0), &train_rows),
        )?;
        let validation = Batch::new(augmented.active_matrix(&val_rows), targets.select(Axis(0), &val_rows))?;
        let model = NetworkModel::new(
            &layer_dims(active.len(), &cfg.hidden, targets.ncols()),
            head,
            derive_seed(cfg.seed, "augmented-init"),
        )?;
        Ok(Self {
            augmented,
            model,
            active,
            train,
            validation,
            step: 0,
            history: Vec::new(),
            truth: truth.map(|t| t.iter().copied().collect()),
            cfg,
        })
    }

    pub fn model(&self) -> &NetworkModel {
        &self.model
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn augmented(&self) -> &AugmentedDataset {
        &self.augmented
    }

    pub fn history(&self) -> &[StepRecord] {
        &self.history
    }

    pub fn step(&self) -> usize {
        self.step
    }

    /// Trains the current network to early-stopping convergence, starting from its
    /// current weights.
    pub fn train_current(&mut self) -> Result<()> {
        let cfg = self
            .cfg
            .train
            .clone()
            .with_seed(derive_seed(self.cfg.seed, &format!("shuffle-{}", self.step)));
        let outcome = train(self.model.clone(), &self.train, &self.validation, &cfg)?;
        log::debug!(
            "step {}: trained {} epochs, best validation loss {:.6} at epoch {}",
            self.step,
            outcome.history.len(),
            outcome.best_validation_loss,
            outcome.best_epoch
        );
        self.model = outcome.model;
        Ok(())
    }

    /// Current `η̂`; aborts when no original variable is left.
    pub fn estimate(&self) -> Result<f64> {
        let (r, r0) = self.augmented.counts();
        match estimate_fdr(r, r0, self.augmented.n_original(), self.augmented.n_surrogate())? {
            FdrEstimate::Value(v) => Ok(v),
            FdrEstimate::Undefined => Err(Error::AllOriginalsEliminated { step: self.step }),
        }
    }

    /// Importance of each active column (model input order) on the training rows.
    pub fn scores(&self) -> Result<ImportanceVector> {
        let gradients = self.model.input_gradients(&self.train)?;
        let scores = score(self.cfg.score_kind, gradients.view())?;
        if self.cfg.scale_scores {
            apply_scale_correction(&scores, self.train.inputs())
        } else {
            Ok(scores)
        }
    }

    fn truth_stats(&self) -> (Option<usize>, Option<f64>) {
        match &self.truth {
            None => (None, None),
            Some(truth) => {
                let originals = self.augmented.active_originals();
                let c = confusion_vs_truth(&originals, &truth.iter().copied().collect::<Vec<_>>());
                (Some(c.true_positives), Some(c.actual_fdr()))
            }
        }
    }

    /// Appends the record for the current step and returns `η̂`.
    fn record(&mut self) -> Result<f64> {
        let eta_hat = self.estimate()?;
        let (r, r0) = self.augmented.counts();
        let (r_prime, actual_fdr) = self.truth_stats();
        self.history.push(StepRecord {
            step: self.step,
            r,
            r0,
            r_minus_r0: r - r0,
            eta_hat,
            m: None,
            r_prime,
            actual_fdr,
        });
        Ok(eta_hat)
    }

    /// Removes the columns at the given model-input positions from the network, the
    /// data and the active set. Surviving weights are left untouched.
    fn remove_positions(&mut self, positions: &BTreeSet<usize>) -> Result<Vec<usize>> {
        let ids: Vec<usize> = positions.iter().map(|&k| self.active[k]).collect();
        let keep: Vec<usize> = (0..self.active.len()).filter(|k| !positions.contains(k)).collect();
        if keep.is_empty() {
            return Err(Error::AllOriginalsEliminated { step: self.step });
        }
        self.augmented.deactivate(&ids)?;
        self.model = self.model.drop_input_columns(&keep)?;
        self.train = self.train.select_columns(&keep);
        self.validation = self.validation.select_columns(&keep);
        self.active = keep.iter().map(|&k| self.active[k]).collect();
        Ok(ids)
    }

    /// Eliminates the `m` lowest-scoring active columns and returns their global ids.
    /// Does not retrain.
    pub fn eliminate(&mut self, m: usize) -> Result<Vec<usize>> {
        if m == 0 || m > self.active.len() {
            return Err(Error::Logic(format!(
                "cannot eliminate {m} of {} active columns",
                self.active.len()
            )));
        }
        let scores = self.scores()?;
        let order = rank_ascending(&scores.scores);
        let doomed: BTreeSet<usize> = order[..m].iter().copied().collect();
        let ids = self.remove_positions(&doomed)?;
        self.step += 1;
        Ok(ids)
    }

    /// Runs the elimination loop on an already trained network until `η̂ ≤ η*`.
    /// Returns the final estimate.
    pub fn run_loop(&mut self) -> Result<f64> {
        loop {
            let eta_hat = self.record()?;
            let (r, r0) = self.augmented.counts();
            if eta_hat <= self.cfg.eta_star {
                log::info!("step {}: r = {r}, r0 = {r0}, eta_hat = {eta_hat:.4} -> stop", self.step);
                return Ok(eta_hat);
            }
            let m = step_size(eta_hat, self.cfg.eta_star, r0, self.cfg.epsilon)?;
            log::info!("step {}: r = {r}, r0 = {r0}, eta_hat = {eta_hat:.4}, eliminating {m}", self.step);
            self.history.last_mut().expect("just recorded").m = Some(m);
            self.eliminate(m)?;
            if self.augmented.active_originals().is_empty() {
                return Err(Error::AllOriginalsEliminated { step: self.step });
            }
            self.train_current()?;
        }
    }

    /// Drops remaining surrogates and retrains on the surviving originals.
    pub fn finish(mut self) -> Result<FinishedSelection> {
        let surrogate_positions: BTreeSet<usize> = self
            .active
            .iter()
            .enumerate()
            .filter(|(_, &id)| self.augmented.origin(id) == ColumnOrigin::Surrogate)
            .map(|(k, _)| k)
            .collect();
        if !surrogate_positions.is_empty() {
            self.remove_positions(&surrogate_positions)?;
        }
        self.step += 1;
        self.train_current()?;
        let scores = self.scores()?;
        Ok(FinishedSelection {
            selected: self.active,
            model: self.model,
            scores,
            history: self.history,
        })
    }
}

/// Network and bookkeeping after the final retraining.
#[derive(Debug, Clone)]
pub struct FinishedSelection {
    pub selected: Vec<usize>,
    pub model: NetworkModel,
    pub scores: ImportanceVector,
    pub history: Vec<StepRecord>,
}

/// Full procedure on a split dataset. Classification datasets use the softmax head,
/// real-valued targets the squared-error head.
pub fn run_selection(dataset: &LabeledDataset, cfg: &SelectionConfig) -> Result<SelectionOutcome> {
    cfg.validate()?;
    let train_rows = dataset.rows_with(SplitRole::Train)?;
    let val_rows = dataset.rows_with(SplitRole::Validation)?;
    let test_rows = dataset.rows_with(SplitRole::Test)?;
    if train_rows.is_empty() || val_rows.is_empty() || test_rows.is_empty() {
        return Err(Error::Config("dataset needs non-empty train, validation and test splits".into()));
    }
    let p = dataset.n_cols();
    let q = cfg.q.unwrap_or(p);
    let head = head_for(&dataset.target);
    let targets = target_matrix(&dataset.target);
    let out_dim = targets.ncols();

    let batch_of = |rows: &[usize]| Batch::new(dataset.x.select(Axis(0), rows), targets.select(Axis(0), rows));
    let train_full = batch_of(&train_rows)?;
    let val_full = batch_of(&val_rows)?;
    let test_full = batch_of(&test_rows)?;

    // Reference network on all originals.
    let reference = NetworkModel::new(
        &layer_dims(p, &cfg.hidden, out_dim),
        head,
        derive_seed(cfg.seed, "reference-init"),
    )?;
    let reference_cfg = cfg.train.clone().with_seed(derive_seed(cfg.seed, "reference-shuffle"));
    let reference = train(reference, &train_full, &val_full, &reference_cfg)?.model;
    let initial = evaluate(&reference, &test_full)?;
    log::info!("reference network on {p} originals: test loss {:.5}, error {:?}", initial.loss, initial.error);

    let trval_rows: Vec<usize> = train_rows.iter().chain(&val_rows).copied().collect();
    let augmented = augment(
        dataset.x.select(Axis(0), &trval_rows).view(),
        q,
        derive_seed(cfg.seed, "surrogates"),
    )?;
    let mut state = SelectionState::new(
        augmented,
        targets.select(Axis(0), &trval_rows),
        train_rows.len(),
        head,
        cfg.clone(),
        dataset.truth.as_deref(),
    )?;
    state.train_current()?;
    let eta_hat_final = state.run_loop()?;
    let finished = state.finish()?;

    let final_ = evaluate(&finished.model, &test_full.select_columns(&finished.selected))?;
    let confusion = dataset
        .truth
        .as_ref()
        .map(|truth| confusion_vs_truth(&finished.selected, truth));

    let report = SelectionReport {
        selected: finished.selected,
        eta_hat_final,
        history: finished.history,
        initial,
        final_,
        true_positives: confusion.map(|c| c.true_positives),
        false_positives: confusion.map(|c| c.false_positives),
        actual_fdr: confusion.map(|c| c.actual_fdr()),
        p,
        q,
        eta_star: cfg.eta_star,
        epsilon: cfg.epsilon,
        seed: cfg.seed,
    };
    Ok(SelectionOutcome {
        report,
        final_model: finished.model,
        final_scores: finished.scores,
    })
}

/// Writes `step,r_minus_r0,r0,eta_hat,m`, plus `r_prime,actual_fdr` when ground truth
/// is known. `m` is empty on the stopping row.
pub fn write_history_csv<W: Write>(writer: W, history: &[StepRecord]) -> Result<()> {
    let with_truth = history.iter().any(|h| h.r_prime.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["step", "r_minus_r0", "r0", "eta_hat", "m"];
    if with_truth {
        header.extend(["r_prime", "actual_fdr"]);
    }
    w.write_record(&header)?;
    for h in history {
        let mut row = vec![
            h.step.to_string(),
            h.r_minus_r0.to_string(),
            h.r0.to_string(),
            h.eta_hat.to_string(),
            h.m.map(|m| m.to_string()).unwrap_or_default(),
        ];
        if with_truth {
            row.push(h.r_prime.map(|v| v.to_string()).unwrap_or_default());
            row.push(h.actual_fdr.map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
