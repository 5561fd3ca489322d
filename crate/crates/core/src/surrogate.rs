//! Surrogate null variables and the bookkeeping of which columns are still active.
//!
//! Surrogate columns are filled with entries drawn from the original data matrix,
//! never from the targets, so they carry no information about the output. Columns
//! keep stable global ids: originals are `0..p`, surrogates `p..p+q`.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnOrigin {
    Original,
    Surrogate,
}

#[derive(Debug, Clone)]
pub struct AugmentedDataset {
    matrix: Array2<f64>,
    origin: Vec<ColumnOrigin>,
    active: Vec<bool>,
    p: usize,
    q: usize,
    rng_seed: u64,
}

/// Appends `q` surrogate columns to `x`.
///
/// * `q == p`: the surrogate block is a permutation of all `n·p` entries of `x`.
/// * `q < p`: the `n·q` entries are drawn without replacement.
/// * `q > p`: the entries are drawn uniformly with replacement.
pub fn augment(x: ArrayView2<'_, f64>, q: usize, seed: u64) -> Result<AugmentedDataset> {
    let (n, p) = x.dim();
    if q < 1 {
        return Err(Error::Config("number of surrogate variables must be at least 1".into()));
    }
    if p < 1 || n < 2 {
        return Err(Error::Config(format!(
            "augmentation needs at least 2 rows and 1 column, got {n}x{p}"
        )));
    }
    let pool: Vec<f64> = x.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<f64> = if q == p {
        let mut shuffled = pool;
        shuffled.shuffle(&mut rng);
        shuffled
    } else if q < p {
        index::sample(&mut rng, pool.len(), n * q)
            .into_iter()
            .map(|i| pool[i])
            .collect()
    } else {
        (0..n * q).map(|_| pool[rng.random_range(0..pool.len())]).collect()
    };
    let surrogates = Array2::from_shape_vec((n, q), entries).expect("n*q entries");
    let matrix = ndarray::concatenate(Axis(1), &[x, surrogates.view()]).expect("matching rows");

    let mut origin = vec![ColumnOrigin::Original; p];
    origin.extend(std::iter::repeat_n(ColumnOrigin::Surrogate, q));
    Ok(AugmentedDataset {
        matrix,
        origin,
        active: vec![true; p + q],
        p,
        q,
        rng_seed: seed,
    })
}

impl AugmentedDataset {
    /// Full `n × (p + q)` matrix, inactive columns included.
    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    pub fn surrogate_block(&self) -> ArrayView2<'_, f64> {
        self.matrix.slice(ndarray::s![.., self.p..])
    }

    pub fn origin(&self, column: usize) -> ColumnOrigin {
        self.origin[column]
    }

    pub fn is_active(&self, column: usize) -> bool {
        self.active[column]
    }

    pub fn n_original(&self) -> usize {
        self.p
    }

    pub fn n_surrogate(&self) -> usize {
        self.q
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    /// `(r, r0)`: active columns and active surrogate columns.
    pub fn counts(&self) -> (usize, usize) {
        let r = self.active.iter().filter(|&&a| a).count();
        let r0 = self
            .active
            .iter()
            .zip(&self.origin)
            .filter(|(&a, &o)| a && o == ColumnOrigin::Surrogate)
            .count();
        (r, r0)
    }

    /// Global ids of active columns, ascending.
    pub fn active_ids(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&j| self.active[j]).collect()
    }

    pub fn active_originals(&self) -> Vec<usize> {
        (0..self.p).filter(|&j| self.active[j]).collect()
    }

    pub fn active_surrogates(&self) -> Vec<usize> {
        (self.p..self.p + self.q).filter(|&j| self.active[j]).collect()
    }

    /// Active columns restricted to `rows`.
    pub fn active_matrix(&self, rows: &[usize]) -> Array2<f64> {
        self.matrix.select(Axis(0), rows).select(Axis(1), &self.active_ids())
    }

    /// Marks `ids` inactive. Every id must currently be active.
    pub fn deactivate(&mut self, ids: &[usize]) -> Result<()> {
        let mut seen = std::collections::HashSet::with_capacity(ids.len());
        for &id in ids {
            if id >= self.active.len() {
                return Err(Error::Logic(format!("column {id} does not exist")));
            }
            if !self.active[id] || !seen.insert(id) {
                return Err(Error::Logic(format!("column {id} is already inactive")));
            }
        }
        for &id in ids {
            self.active[id] = false;
        }
        Ok(())
    }
}
