//! Per-sample input gradients and the two importance scores.
//!
//! For a linear model with squared error the gradient is `-(y - ŷ) β`, so the mean
//! absolute score is proportional to `|β|` and the mean squared score to `β²`.

use ndarray::{array, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use survnet::importance::{rank_ascending, score, ScoreKind};
use survnet::net::{Batch, NetworkModel, OutputHead};

pub fn main() -> survnet::Result<()> {
    let beta = array![[0.5], [-2.0], [0.0], [1.0]];
    let model = NetworkModel::from_parts(vec![beta.clone()], vec![array![0.0]], OutputHead::IdentitySquaredError)?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = Array2::from_shape_simple_fn((500, 4), || rng.random_range(-1.0..1.0));
    let y = Array2::from_shape_simple_fn((500, 1), || rng.random_range(-1.0..1.0));
    let g = model.input_gradients(&Batch::new(x, y)?)?;

    let abs = score(ScoreKind::AbsMean, g.view())?;
    let sq = score(ScoreKind::SquareMean, g.view())?;
    for j in 0..4 {
        println!(
            "x{j}: beta {:>5.2}  abs-mean {:.4}  square-mean {:.4}",
            beta[[j, 0]],
            abs.scores[j],
            sq.scores[j]
        );
    }
    println!("least important first: {:?}", rank_ascending(&sq.scores));
    Ok(())
}
