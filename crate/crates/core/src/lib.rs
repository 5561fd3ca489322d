//! Variable selection for feed-forward networks with a controlled false discovery rate.
//!
//! Surrogate null columns, resampled from the data matrix itself, are appended to the
//! inputs. A network is trained on everything; inputs are ranked by the mean absolute
//! or mean squared gradient of the loss, and the least important inputs are removed
//! in steps sized so that the estimated FDR of the surviving original variables
//! approaches the target without overshooting. Training resumes from the surviving
//! weights after every step.
//!
//! Module map:
//!
//! - [`net`]: dense ReLU network, SGD with early stopping, per-sample input gradients.
//! - [`importance`]: gradient-based importance scores.
//! - [`surrogate`]: surrogate columns and active-set bookkeeping.
//! - [`fdr`]: FDR estimate and step-size formulas.
//! - [`selection`]: the elimination loop and its report.
//! - [`datasets`]: simulation schemes, CSV/IDX ingestion, splits.
//! - [`baselines`]: Welch t-test, Benjamini–Hochberg, Bartlett, log fold change.
//! - [`cli`]: run configuration and the `simulate`/`select`/`evaluate`/`report` commands.

pub mod baselines;
pub mod cli;
pub mod datasets;
pub mod error;
pub mod fdr;
pub mod importance;
pub mod net;
pub mod seeds;
pub mod selection;
pub mod surrogate;

pub use error::{Error, Result};
pub use selection::{run_selection, SelectionConfig, SelectionOutcome, SelectionReport};
