use approx::assert_relative_eq;
use ndarray::{array, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use survnet::importance::{score, ScoreKind};
use survnet::net::{loss, Batch, NetworkModel, OutputHead};

fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
}

fn one_hot(labels: &[usize], k: usize) -> Array2<f64> {
    let mut t = Array2::zeros((labels.len(), k));
    for (i, &l) in labels.iter().enumerate() {
        t[[i, l]] = 1.0;
    }
    t
}

fn single_loss(model: &NetworkModel, x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    loss(model.forward(x.view()).unwrap().view(), y.view(), model.output_head()).unwrap()
}

/// Central differences on one row; returns the worst relative error.
fn worst_fd_error(model: &NetworkModel, x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let h = 1e-5;
    let g = model.input_gradients(&Batch::new(x.clone(), y.clone()).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..x.ncols() {
        let (mut up, mut down) = (x.clone(), x.clone());
        up[[0, j]] += h;
        down[[0, j]] -= h;
        let fd = (single_loss(model, &up, y) - single_loss(model, &down, y)) / (2.0 * h);
        let err = (fd - g[[0, j]]).abs() / fd.abs().max(g[[0, j]].abs()).max(1e-6);
        worst = worst.max(err);
    }
    worst
}

#[test]
fn gradients_match_finite_differences_on_784_40_20_2() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = NetworkModel::new(&[784, 40, 20, 2], OutputHead::SoftmaxCrossEntropy, 5).unwrap();
    let x = random_matrix(1, 784, &mut rng);
    let y = one_hot(&[1], 2);
    assert!(worst_fd_error(&model, &x, &y) < 1e-5);
}

#[test]
fn gradients_match_finite_differences_on_random_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..60 {
        let depth = 1 + trial % 3;
        let head = if trial % 2 == 0 {
            OutputHead::SoftmaxCrossEntropy
        } else {
            OutputHead::IdentitySquaredError
        };
        let mut dims = vec![rng.random_range(2..8)];
        for _ in 1..depth {
            dims.push(rng.random_range(3..10));
        }
        dims.push(rng.random_range(2..4));
        let model = NetworkModel::new(&dims, head, trial as u64).unwrap();
        let x = random_matrix(1, dims[0], &mut rng);
        let k = *dims.last().unwrap();
        let y = match head {
            OutputHead::SoftmaxCrossEntropy => one_hot(&[rng.random_range(0..k)], k),
            OutputHead::IdentitySquaredError => random_matrix(1, k, &mut rng),
        };
        let err = worst_fd_error(&model, &x, &y);
        assert!(err < 1e-5, "trial {trial} dims {dims:?}: {err}");
    }
}

#[test]
fn linear_unit_closed_form() {
    let model = NetworkModel::from_parts(vec![array![[2.0], [-1.0]]], vec![Array1::zeros(1)], OutputHead::IdentitySquaredError)
        .unwrap();
    let g = model.input_gradients(&Batch::new(array![[1.0, 1.0]], array![[3.0]]).unwrap()).unwrap();
    assert_eq!(g, array![[-4.0, 2.0]]);
}

#[test]
fn linear_scores_follow_coefficients() {
    let beta = [0.5, -2.0, 1.5, 3.0];
    let w = Array2::from_shape_vec((4, 1), beta.to_vec()).unwrap();
    let model = NetworkModel::from_parts(vec![w], vec![array![0.1]], OutputHead::IdentitySquaredError).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_matrix(200, 4, &mut rng);
    let y = random_matrix(200, 1, &mut rng);
    let g = model.input_gradients(&Batch::new(x, y).unwrap()).unwrap();
    let abs = score(ScoreKind::AbsMean, g.view()).unwrap().scores;
    let sq = score(ScoreKind::SquareMean, g.view()).unwrap().scores;
    for j in 1..4 {
        assert_relative_eq!(abs[j] / abs[0], beta[j].abs() / beta[0].abs(), max_relative = 1e-10);
        assert_relative_eq!(sq[j] / sq[0], beta[j].powi(2) / beta[0].powi(2), max_relative = 1e-10);
    }
}

#[test]
fn dropping_columns_equals_zeroing_them() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let model = NetworkModel::new(&[12, 7, 5, 3], OutputHead::SoftmaxCrossEntropy, 9).unwrap();
    let x = random_matrix(20, 12, &mut rng);
    let keep = [0, 2, 3, 7, 11];
    let dropped = model.drop_input_columns(&keep).unwrap();
    let mut zeroed = x.clone();
    for j in (0..12).filter(|j| !keep.contains(j)) {
        zeroed.column_mut(j).fill(0.0);
    }
    let a = dropped.forward(x.select(Axis(1), &keep).view()).unwrap();
    let b = model.forward(zeroed.view()).unwrap();
    for (u, v) in a.iter().zip(&b) {
        assert_relative_eq!(u, v, epsilon = 1e-12);
    }
    assert_eq!(dropped.weights()[0], model.weights()[0].select(Axis(0), &keep));
    assert_eq!(dropped.weights()[1..], model.weights()[1..]);
    assert_eq!(dropped.biases(), model.biases());
}

#[test]
fn warm_start_keeps_gradients_of_survivors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let model = NetworkModel::new(&[6, 8, 2], OutputHead::SoftmaxCrossEntropy, 1).unwrap();
    let mut x = random_matrix(10, 6, &mut rng);
    x.column_mut(4).fill(0.0);
    let y = one_hot(&[0, 1, 1, 0, 1, 0, 0, 1, 1, 0], 2);
    let keep = [0, 1, 2, 3, 5];
    let full = model.input_gradients(&Batch::new(x.clone(), y.clone()).unwrap()).unwrap();
    let reduced = model
        .drop_input_columns(&keep)
        .unwrap()
        .input_gradients(&Batch::new(x.select(Axis(1), &keep), y).unwrap())
        .unwrap();
    assert_eq!(reduced, full.select(Axis(1), &keep));
}
