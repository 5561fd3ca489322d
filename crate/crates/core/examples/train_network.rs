//! Train a small ReLU classifier on two noisy blobs and print the validation curve.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use survnet::net::{train, Batch, NetworkModel, OutputHead, TrainConfig};

fn blobs(n: usize, rng: &mut ChaCha8Rng) -> (Array2<f64>, Vec<usize>) {
    let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let x = Array2::from_shape_fn((n, 2), |(i, _)| labels[i] as f64 * 1.5 + rng.random_range(-1.0..1.0));
    (x, labels)
}

pub fn main() -> survnet::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (xt, yt) = blobs(400, &mut rng);
    let (xv, yv) = blobs(200, &mut rng);
    let train_set = Batch::classification(xt, &yt, 2)?;
    let val_set = Batch::classification(xv, &yv, 2)?;

    let model = NetworkModel::new(&[2, 16, 8, 2], OutputHead::SoftmaxCrossEntropy, 7)?;
    let out = train(model, &train_set, &val_set, &TrainConfig::default())?;
    for e in &out.history {
        println!("epoch {:>3}  train {:.4}  validation {:.4}", e.epoch, e.train_loss, e.validation_loss);
    }
    println!("kept epoch {} (validation loss {:.4})", out.best_epoch, out.best_validation_loss);
    Ok(())
}
