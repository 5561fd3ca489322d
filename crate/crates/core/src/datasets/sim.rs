//! Simulation schemes with known significant variables.
//!
//! All generators draw from one `ChaCha8Rng` stream seeded with `SimSpec::seed`, in a
//! fixed order, so a `(spec, seed)` pair always yields the same bytes.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{LabeledDataset, Target};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimScheme {
    /// Independent U(0,1) variables, class-1 mean shift on the significant ones.
    IndepMeanShift,
    /// Same shift applied to correlated image pixels.
    CorrelatedMeanShift,
    /// Equal class means, inflated class-1 variance on the significant ones.
    VarianceInflation,
    /// U(−1,1) variables with a nonlinear regression response.
    NonlinearRegression,
}

impl std::str::FromStr for SimScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "indep_mean_shift" | "dataset1" | "1" => Ok(SimScheme::IndepMeanShift),
            "correlated_mean_shift" | "dataset2" | "2" => Ok(SimScheme::CorrelatedMeanShift),
            "variance_inflation" | "dataset3" | "3" => Ok(SimScheme::VarianceInflation),
            "nonlinear_regression" | "dataset4" | "4" => Ok(SimScheme::NonlinearRegression),
            other => Err(Error::Config(format!("unknown simulation scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    pub scheme: SimScheme,
    pub n: usize,
    pub p: usize,
    pub p_prime: usize,
    pub seed: u64,
}

impl SimSpec {
    /// 10,000 samples, 784 variables, 64 significant.
    pub fn standard(scheme: SimScheme, seed: u64) -> Self {
        Self {
            scheme,
            n: 10_000,
            p: 784,
            p_prime: 64,
            seed,
        }
    }

    fn validate(&self, expected: SimScheme) -> Result<()> {
        if self.scheme != expected {
            return Err(Error::Config(format!(
                "spec scheme {:?} passed to the {:?} generator",
                self.scheme, expected
            )));
        }
        if self.n < 2 || self.p == 0 {
            return Err(Error::Config("simulation needs n >= 2 and p >= 1".into()));
        }
        if self.p_prime > self.p {
            return Err(Error::Config(format!(
                "p_prime = {} exceeds p = {}",
                self.p_prime, self.p
            )));
        }
        Ok(())
    }
}

/// Dispatches on the scheme. The correlated scheme uses [`synthetic_grid_images`]
/// as its base matrix; use [`gen_dataset2`] to start from real images instead.
pub fn generate(spec: &SimSpec) -> Result<LabeledDataset> {
    match spec.scheme {
        SimScheme::IndepMeanShift => gen_dataset1(spec),
        SimScheme::CorrelatedMeanShift => {
            let side = (spec.p as f64).sqrt().round() as usize;
            if side * side != spec.p {
                return Err(Error::Config(format!(
                    "correlated scheme needs a square pixel count, got p = {}",
                    spec.p
                )));
            }
            let images = synthetic_grid_images(spec.n, side, spec.seed ^ 0x5eed_1a6e);
            gen_dataset2(images.view(), spec)
        }
        SimScheme::VarianceInflation => gen_dataset3(spec),
        SimScheme::NonlinearRegression => gen_dataset4(spec),
    }
}

/// Random equal halves: the first `n / 2` rows of a shuffle form class 1.
fn equal_halves(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut labels = vec![0usize; n];
    for &i in &order[..n / 2] {
        labels[i] = 1;
    }
    labels
}

fn significant_columns(p: usize, p_prime: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut ids = index::sample(rng, p, p_prime).into_vec();
    ids.sort_unstable();
    ids
}

fn uniform_matrix(n: usize, p: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((n, p), || lo + (hi - lo) * rng.random::<f64>())
}

fn sign(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Shifts class-1 rows of each significant column by `±δ_j`, `δ_j ~ U(0.1, 0.3)`.
fn apply_mean_shift(x: &mut Array2<f64>, labels: &[usize], omega: &[usize], rng: &mut ChaCha8Rng) {
    for &j in omega {
        let delta = 0.1 + 0.2 * rng.random::<f64>();
        let shift = sign(rng) * delta;
        for (i, &label) in labels.iter().enumerate() {
            if label == 1 {
                x[[i, j]] += shift;
            }
        }
    }
}

fn classification(x: Array2<f64>, labels: Vec<usize>, omega: Vec<usize>) -> Result<LabeledDataset> {
    let mut d = LabeledDataset::new(x, Target::Classes { labels, n_classes: 2 })?;
    d.truth = Some(omega);
    Ok(d)
}

pub fn gen_dataset1(spec: &SimSpec) -> Result<LabeledDataset> {
    spec.validate(SimScheme::IndepMeanShift)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = uniform_matrix(spec.n, spec.p, 0.0, 1.0, &mut rng);
    let labels = equal_halves(spec.n, &mut rng);
    let omega = significant_columns(spec.p, spec.p_prime, &mut rng);
    apply_mean_shift(&mut x, &labels, &omega, &mut rng);
    classification(x, labels, omega)
}

/// Mean-shift scheme on supplied images (one row per image, e.g. MNIST zeros).
/// `spec.n` images are drawn at random; `spec.p` must equal the pixel count.
pub fn gen_dataset2(images: ArrayView2<'_, f64>, spec: &SimSpec) -> Result<LabeledDataset> {
    spec.validate(SimScheme::CorrelatedMeanShift)?;
    if images.ncols() != spec.p {
        return Err(Error::shape("image width", spec.p, images.ncols()));
    }
    if images.nrows() < spec.n {
        return Err(Error::Config(format!(
            "{} images available, {} requested",
            images.nrows(),
            spec.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = index::sample(&mut rng, images.nrows(), spec.n).into_vec();
    rows.sort_unstable();
    let mut x = images.select(Axis(0), &rows);
    let labels = equal_halves(spec.n, &mut rng);
    let omega = significant_columns(spec.p, spec.p_prime, &mut rng);
    apply_mean_shift(&mut x, &labels, &omega, &mut rng);
    classification(x, labels, omega)
}

pub fn gen_dataset3(spec: &SimSpec) -> Result<LabeledDataset> {
    spec.validate(SimScheme::VarianceInflation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut x = uniform_matrix(spec.n, spec.p, 0.0, 1.0, &mut rng);
    let labels = equal_halves(spec.n, &mut rng);
    let omega = significant_columns(spec.p, spec.p_prime, &mut rng);
    for &j in &omega {
        for (i, &label) in labels.iter().enumerate() {
            if label == 1 {
                let delta = 0.8 + 0.2 * rng.random::<f64>();
                x[[i, j]] += sign(&mut rng) * delta;
            }
        }
    }
    classification(x, labels, omega)
}

/// Coefficients of the regression scheme. `ids[j]` is the column entering term `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset4Coefficients {
    pub ids: Vec<usize>,
    pub beta: Vec<f64>,
    pub beta_prime: [f64; 4],
}

pub fn gen_dataset4(spec: &SimSpec) -> Result<LabeledDataset> {
    gen_dataset4_with(spec, None).map(|(d, _)| d)
}

/// Regression scheme. The significant columns are split into four equal groups entering
/// linearly, through `sin`, through `exp` and through `max(0, ·)`; the last two columns
/// of each group also enter as a product. `overrides` replaces the random `β`/`β′`.
pub fn gen_dataset4_with(
    spec: &SimSpec,
    overrides: Option<(&[f64], [f64; 4])>,
) -> Result<(LabeledDataset, Dataset4Coefficients)> {
    spec.validate(SimScheme::NonlinearRegression)?;
    if !spec.p_prime.is_multiple_of(4) || spec.p_prime == 4 {
        return Err(Error::Config(format!(
            "regression scheme needs p_prime divisible by 4 and at least 8 (or 0), got {}",
            spec.p_prime
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let x = uniform_matrix(spec.n, spec.p, -1.0, 1.0, &mut rng);
    let ids = index::sample(&mut rng, spec.p, spec.p_prime).into_vec();
    let draw_coef = |rng: &mut ChaCha8Rng| {
        let b = 1.0 + 2.0 * rng.random::<f64>();
        sign(rng) * b
    };
    let mut beta: Vec<f64> = (0..spec.p_prime).map(|_| draw_coef(&mut rng)).collect();
    let mut beta_prime = [0.0; 4];
    for b in &mut beta_prime {
        *b = draw_coef(&mut rng);
    }
    if let Some((b, bp)) = overrides {
        if b.len() != spec.p_prime {
            return Err(Error::shape("beta override", spec.p_prime, b.len()));
        }
        beta = b.to_vec();
        beta_prime = bp;
    }

    let group = spec.p_prime / 4;
    let mut y = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let row = x.row(i);
        let mut value = 0.0;
        for (j, (&col, &b)) in ids.iter().zip(&beta).enumerate() {
            let v = row[col];
            value += b * match j / group {
                0 => v,
                1 => v.sin(),
                2 => v.exp(),
                _ => v.max(0.0),
            };
        }
        if group >= 2 {
            for (g, &bp) in beta_prime.iter().enumerate() {
                let last = (g + 1) * group - 1;
                value += bp * row[ids[last - 1]] * row[ids[last]];
            }
        }
        let noise: f64 = StandardNormal.sample(&mut rng);
        y.push(value + noise);
    }

    let mut truth = ids.clone();
    truth.sort_unstable();
    let mut d = LabeledDataset::new(x, Target::Real(y))?;
    d.truth = Some(truth);
    Ok((d, Dataset4Coefficients { ids, beta, beta_prime }))
}

/// Offline stand-in for image data: `n` unit-variance Gaussian `side × side` images
/// whose horizontally or vertically adjacent pixels have correlation 0.5.
///
/// Each pixel is half the sum of a 2×2 window of an iid normal field, so neighbours
/// share two of four terms. This is synthetic plumbing, not MNIST.
pub fn synthetic_grid_images(n: usize, side: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field_side = side + 1;
    let mut out = Array2::zeros((n, side * side));
    let mut field = vec![0.0f64; field_side * field_side];
    for mut image in out.rows_mut() {
        for z in &mut field {
            *z = StandardNormal.sample(&mut rng);
        }
        for a in 0..side {
            for b in 0..side {
                let at = |u: usize, v: usize| field[u * field_side + v];
                image[a * side + b] =
                    0.5 * (at(a, b) + at(a + 1, b) + at(a, b + 1) + at(a + 1, b + 1));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(scheme: SimScheme, n: usize, p: usize, p_prime: usize, seed: u64) -> SimSpec {
        SimSpec {
            scheme,
            n,
            p,
            p_prime,
            seed,
        }
    }

    fn class_stats(d: &LabeledDataset, j: usize) -> [(f64, f64, usize); 2] {
        let Target::Classes { labels, .. } = &d.target else { unreachable!() };
        let mut out = [(0.0, 0.0, 0usize); 2];
        for c in 0..2 {
            let vals: Vec<f64> = (0..d.n_rows()).filter(|&i| labels[i] == c).map(|i| d.x[[i, j]]).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            out[c] = (mean, var, vals.len());
        }
        out
    }

    fn mean_diff_z(d: &LabeledDataset, j: usize) -> f64 {
        let [(m0, v0, n0), (m1, v1, n1)] = class_stats(d, j);
        (m1 - m0) / (v0 / n0 as f64 + v1 / n1 as f64).sqrt()
    }

    #[test]
    fn dataset1_shapes_and_truth() {
        let d = gen_dataset1(&spec(SimScheme::IndepMeanShift, 400, 30, 5, 1)).unwrap();
        assert_eq!(d.x.dim(), (400, 30));
        assert_eq!(d.truth.as_ref().unwrap().len(), 5);
        let Target::Classes { labels, .. } = &d.target else { panic!() };
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 200);
    }

    #[test]
    fn dataset1_null_columns_do_not_separate() {
        let d = gen_dataset1(&spec(SimScheme::IndepMeanShift, 4000, 20, 0, 2)).unwrap();
        for j in 0..20 {
            assert!(mean_diff_z(&d, j).abs() < 3.0, "column {j}");
        }
    }

    #[test]
    fn dataset1_shift_magnitude() {
        let d = gen_dataset1(&spec(SimScheme::IndepMeanShift, 20_000, 40, 10, 3)).unwrap();
        for &j in d.truth.as_ref().unwrap() {
            let [(m0, v0, n0), (m1, v1, n1)] = class_stats(&d, j);
            let se = (v0 / n0 as f64 + v1 / n1 as f64).sqrt();
            let diff = (m1 - m0).abs();
            assert!(diff > 0.1 - 3.0 * se && diff < 0.3 + 3.0 * se, "diff {diff}");
        }
    }

    #[test]
    fn generators_are_deterministic() {
        for scheme in [
            SimScheme::IndepMeanShift,
            SimScheme::CorrelatedMeanShift,
            SimScheme::VarianceInflation,
            SimScheme::NonlinearRegression,
        ] {
            let s = spec(scheme, 50, 16, 8, 5);
            assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
            let other = SimSpec { seed: 6, ..s.clone() };
            assert_ne!(generate(&s).unwrap().x, generate(&other).unwrap().x);
        }
    }

    #[test]
    fn dataset3_inflates_variance_only() {
        let d = gen_dataset3(&spec(SimScheme::VarianceInflation, 10_000, 20, 4, 7)).unwrap();
        let truth = d.truth.clone().unwrap();
        for j in 0..20 {
            let [(_, v0, _), (_, v1, _)] = class_stats(&d, j);
            if truth.contains(&j) {
                assert!((v1.sqrt() - 0.947).abs() < 0.02, "sd {}", v1.sqrt());
                assert!(mean_diff_z(&d, j).abs() < 3.0);
            } else {
                assert!((v1.sqrt() - (1.0f64 / 12.0).sqrt()).abs() < 0.01);
            }
            assert!((v0.sqrt() - 0.2887).abs() < 0.01);
        }
    }

    #[test]
    fn dataset4_zero_coefficients_leave_noise() {
        let s = spec(SimScheme::NonlinearRegression, 5000, 20, 8, 1);
        let (d, _) = gen_dataset4_with(&s, Some((&[0.0; 8], [0.0; 4]))).unwrap();
        let Target::Real(y) = &d.target else { panic!() };
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
        assert!((var - 1.0).abs() < 0.08, "var {var}");
    }

    #[test]
    fn dataset4_coefficient_magnitudes() {
        let (d, c) = gen_dataset4_with(&SimSpec::standard(SimScheme::NonlinearRegression, 1), None).unwrap();
        assert!(c.beta.iter().chain(c.beta_prime.iter()).all(|b| (1.0..=3.0).contains(&b.abs())));
        assert_eq!(d.truth.unwrap().len(), 64);
        let Target::Real(y) = &d.target else { panic!() };
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
        assert!(var > 10.0, "signal should dominate unit noise, var = {var}");
    }

    #[test]
    fn dataset4_rejects_odd_group_sizes() {
        let s = spec(SimScheme::NonlinearRegression, 10, 20, 6, 0);
        assert!(gen_dataset4(&s).is_err());
    }

    #[test]
    fn grid_images_neighbour_correlation() {
        let imgs = synthetic_grid_images(4000, 6, 1);
        let corr = |a: usize, b: usize| {
            let x = imgs.column(a);
            let y = imgs.column(b);
            let (mx, my) = (x.mean().unwrap(), y.mean().unwrap());
            let cov = x.iter().zip(y.iter()).map(|(u, v)| (u - mx) * (v - my)).sum::<f64>();
            cov / (x.iter().map(|u| (u - mx).powi(2)).sum::<f64>().sqrt()
                * y.iter().map(|v| (v - my).powi(2)).sum::<f64>().sqrt())
        };
        assert!((corr(7, 8) - 0.5).abs() < 0.05);
        assert!((corr(7, 13) - 0.5).abs() < 0.05);
        assert!(corr(0, 35).abs() < 0.05);
    }

    #[test]
    fn dataset2_requires_enough_images() {
        let imgs = synthetic_grid_images(10, 4, 0);
        let s = spec(SimScheme::CorrelatedMeanShift, 20, 16, 2, 0);
        assert!(matches!(gen_dataset2(imgs.view(), &s), Err(Error::Config(_))));
    }

    #[test]
    fn dataset2_shifts_within_grid() {
        let imgs = synthetic_grid_images(200, 28, 0);
        let s = spec(SimScheme::CorrelatedMeanShift, 200, 784, 64, 4);
        let d = gen_dataset2(imgs.view(), &s).unwrap();
        assert!(d.truth.unwrap().iter().all(|&j| j < 28 * 28));
    }
}
