//! Read MNIST IDX files and build the 4-versus-9 task.
//!
//! With a directory argument holding `train-images-idx3-ubyte`, `train-labels-idx1-ubyte`,
//! `t10k-images-idx3-ubyte` and `t10k-labels-idx1-ubyte`, the real files are used.
//! Without one, a tiny IDX pair is written to a temporary directory and read back.

use std::fs::File;
use std::path::PathBuf;

use ndarray::Array2;
use survnet::datasets::{mnist_digits, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels, SplitRole};

pub fn main() -> survnet::Result<()> {
    let tmp;
    let dir = match std::env::args().nth(1) {
        Some(d) => PathBuf::from(d),
        None => {
            tmp = std::env::temp_dir().join("survnet-idx-example");
            std::fs::create_dir_all(&tmp)?;
            for (prefix, count) in [("train", 12), ("t10k", 4)] {
                let pixels = Array2::from_shape_fn((count, 28 * 28), |(i, j)| ((i * 31 + j) % 256) as f64 / 255.0);
                let labels: Vec<u8> = (0..count).map(|i| [4, 9, 1][i % 3]).collect();
                write_idx_images(File::create(tmp.join(format!("{prefix}-images-idx3-ubyte")))?, 28, 28, &pixels)?;
                write_idx_labels(File::create(tmp.join(format!("{prefix}-labels-idx1-ubyte")))?, &labels)?;
            }
            tmp.clone()
        }
    };
    let train = read_idx_images(dir.join("train-images-idx3-ubyte"))?;
    let train_labels = read_idx_labels(dir.join("train-labels-idx1-ubyte"))?;
    let test = read_idx_images(dir.join("t10k-images-idx3-ubyte"))?;
    let test_labels = read_idx_labels(dir.join("t10k-labels-idx1-ubyte"))?;
    println!("{} training images of {}x{}", train.pixels.nrows(), train.rows, train.cols);

    let d = mnist_digits((&train, &train_labels), (&test, &test_labels), (4, 9))?;
    for role in [SplitRole::Train, SplitRole::Validation, SplitRole::Test] {
        println!("{role:?}: {} images", d.rows_with(role)?.len());
    }
    Ok(())
}
