//! FDR estimation and elimination step sizes.
//!
//! With `r` active variables of which `r0` are surrogates, out of `p` originals and
//! `q` surrogates in total, the estimated FDR of the `r − r0` surviving originals is
//!
//! ```text
//! η̂ = r0 / (r − r0) · p / q
//! ```
//!
//! (the unknown number of null originals is replaced by its upper bound `p`).
//! Eliminating `m` more variables can lower `η̂` at best to `(1 − m / r0) · η̂`,
//! reached when all `m` are surrogates, which gives the step size
//! `m = ⌈ε · (1 − η* / η̂) · r0⌉`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Estimated FDR, or `Undefined` once no original variable is left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdrEstimate {
    Value(f64),
    Undefined,
}

impl FdrEstimate {
    pub fn value(self) -> Option<f64> {
        match self {
            FdrEstimate::Value(v) => Some(v),
            FdrEstimate::Undefined => None,
        }
    }
}

pub fn estimate_fdr(r: usize, r0: usize, p: usize, q: usize) -> Result<FdrEstimate> {
    if r < r0 {
        return Err(Error::Logic(format!("r = {r} is smaller than r0 = {r0}")));
    }
    if p == 0 || q == 0 {
        return Err(Error::Domain("p and q must be positive".into()));
    }
    if r0 == 0 {
        return Ok(FdrEstimate::Value(0.0));
    }
    if r == r0 {
        return Ok(FdrEstimate::Undefined);
    }
    Ok(FdrEstimate::Value(
        r0 as f64 / (r - r0) as f64 * (p as f64 / q as f64),
    ))
}

/// Smallest estimated FDR reachable by eliminating `m` of the current variables.
pub fn min_next_fdr(m: usize, r0: usize, eta_hat: f64) -> Result<f64> {
    if m > r0 {
        return Err(Error::Domain(format!("m = {m} exceeds r0 = {r0}")));
    }
    if !eta_hat.is_finite() {
        return Err(Error::Domain("eta_hat must be finite".into()));
    }
    if r0 == 0 {
        return Ok(eta_hat);
    }
    Ok((1.0 - m as f64 / r0 as f64) * eta_hat)
}

/// Number of variables to eliminate next, `⌈ε (1 − η*/η̂) r0⌉`, clamped to `[1, r0]`.
pub fn step_size(eta_hat: f64, eta_star: f64, r0: usize, epsilon: f64) -> Result<usize> {
    if !(eta_star > 0.0 && eta_star < 1.0) {
        return Err(Error::Domain(format!("eta_star = {eta_star} outside (0, 1)")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Domain(format!("epsilon = {epsilon} outside (0, 1]")));
    }
    if !(eta_hat > eta_star) {
        return Err(Error::Logic(format!(
            "step size requested with eta_hat = {eta_hat} <= eta_star = {eta_star}"
        )));
    }
    if r0 == 0 {
        return Err(Error::Logic("step size requested with no surrogate left".into()));
    }
    let raw = (epsilon * (1.0 - eta_star / eta_hat) * r0 as f64).ceil();
    Ok((raw as usize).clamp(1, r0))
}

/// Estimated FDR after eliminating `m` variables of which `m0` are surrogates.
/// Returns `+∞` when no original would remain.
pub fn fdr_after_elimination(r: usize, r0: usize, p: usize, q: usize, m: usize, m0: usize) -> f64 {
    let originals_left = (r - r0) as f64 - (m - m0) as f64;
    let surrogates_left = (r0 - m0) as f64;
    if originals_left <= 0.0 {
        return f64::INFINITY;
    }
    surrogates_left / originals_left * (p as f64 / q as f64)
}

/// Result of enumerating every feasible surrogate count `m0` for a fixed `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinFdrCheck {
    /// Minimum of the post-elimination estimate over all feasible `m0`.
    pub enumerated_min: f64,
    /// Largest `m0` attaining that minimum.
    pub minimizer: usize,
    /// `(1 − m / r0) · η̂`.
    pub bound: f64,
    /// The post-elimination estimate never increases as `m0` grows.
    pub monotone: bool,
}

impl MinFdrCheck {
    pub fn holds(&self, m: usize) -> bool {
        self.monotone && self.minimizer == m && (self.enumerated_min - self.bound).abs() <= 1e-12
    }
}

/// Enumerates `m0 ∈ [max(0, m − (r − r0)), min(m, r0)]`. Requires `1 ≤ m ≤ r0 < r`.
pub fn enumerate_min_fdr(r: usize, r0: usize, p: usize, q: usize, m: usize) -> Option<MinFdrCheck> {
    if m == 0 || m > r0 || r0 >= r || p == 0 || q == 0 {
        return None;
    }
    let eta_hat = estimate_fdr(r, r0, p, q).ok()?.value()?;
    let lo = m.saturating_sub(r - r0);
    let hi = m.min(r0);
    let mut enumerated_min = f64::INFINITY;
    let mut minimizer = lo;
    let mut monotone = true;
    let mut previous = f64::INFINITY;
    for m0 in lo..=hi {
        let value = fdr_after_elimination(r, r0, p, q, m, m0);
        if value > previous {
            monotone = false;
        }
        previous = value;
        if value <= enumerated_min {
            enumerated_min = value;
            minimizer = m0;
        }
    }
    Some(MinFdrCheck {
        enumerated_min,
        minimizer,
        bound: min_next_fdr(m, r0, eta_hat).ok()?,
        monotone,
    })
}

/// True when exhaustive enumeration confirms the closed-form minimum and that it is
/// attained by eliminating only surrogates (`m0 = m`).
pub fn verify_min_fdr(r: usize, r0: usize, p: usize, q: usize, m: usize) -> bool {
    enumerate_min_fdr(r, r0, p, q, m).is_some_and(|c| c.holds(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn value(e: FdrEstimate) -> f64 {
        e.value().unwrap()
    }

    #[test]
    fn estimate_examples() {
        assert!((value(estimate_fdr(100, 10, 5, 5).unwrap()) - 10.0 / 90.0).abs() < 1e-15);
        assert_eq!(value(estimate_fdr(40, 0, 5, 5).unwrap()), 0.0);
        assert_eq!(value(estimate_fdr(90, 30, 784, 392).unwrap()), 1.0);
        assert_eq!(estimate_fdr(7, 7, 5, 5).unwrap(), FdrEstimate::Undefined);
        assert!(matches!(estimate_fdr(3, 4, 5, 5), Err(Error::Logic(_))));
    }

    #[test]
    fn min_next_examples() {
        assert_eq!(min_next_fdr(0, 50, 0.2).unwrap(), 0.2);
        assert_eq!(min_next_fdr(50, 50, 0.2).unwrap(), 0.0);
        assert!((min_next_fdr(25, 50, 0.2).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(min_next_fdr(51, 50, 0.2), Err(Error::Domain(_))));
    }

    #[test]
    fn step_size_examples() {
        assert_eq!(step_size(0.2, 0.1, 50, 1.0).unwrap(), 25);
        assert_eq!(step_size(0.2, 0.1, 50, 0.5).unwrap(), 13);
        assert_eq!(step_size(0.1000001, 0.1, 3, 1.0).unwrap(), 1);
        assert!(matches!(step_size(0.1, 0.1, 3, 1.0), Err(Error::Logic(_))));
        assert!(matches!(step_size(0.5, 0.1, 3, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn min_fdr_small_case() {
        let check = enumerate_min_fdr(10, 4, 6, 6, 2).unwrap();
        assert_eq!(check.minimizer, 2);
        assert!(check.holds(2));
        assert!(verify_min_fdr(10, 4, 6, 6, 2));
    }

    #[test]
    fn min_fdr_full_elimination_reaches_zero() {
        let check = enumerate_min_fdr(10, 4, 6, 6, 4).unwrap();
        assert_eq!(check.enumerated_min, 0.0);
        assert_eq!(check.minimizer, 4);
    }

    #[test]
    fn min_fdr_rejects_degenerate_inputs() {
        assert!(!verify_min_fdr(5, 5, 3, 3, 1));
        assert!(!verify_min_fdr(10, 4, 6, 6, 0));
        assert!(!verify_min_fdr(10, 4, 6, 6, 5));
    }
}
