//! Selection with a squared-error head on the nonlinear regression scheme.

use survnet::datasets::{gen_dataset4_with, split, SimScheme, SimSpec};
use survnet::{run_selection, SelectionConfig};

pub fn main() -> survnet::Result<()> {
    let seed = 3;
    let spec = SimSpec { scheme: SimScheme::NonlinearRegression, n: 3000, p: 200, p_prime: 16, seed };
    let (data, coef) = gen_dataset4_with(&spec, None)?;
    println!("response terms (column, beta): {:?}", coef.ids.iter().zip(&coef.beta).collect::<Vec<_>>());

    let mut cfg = SelectionConfig { seed, ..Default::default() };
    cfg.train.learning_rate = 0.01;
    let out = run_selection(&split(data, seed)?, &cfg)?;
    let r = &out.report;
    println!(
        "selected {} ({} significant), test loss {:.3} -> {:.3}",
        r.selected.len(),
        r.true_positives.unwrap(),
        r.initial.loss,
        r.final_.loss
    );
    Ok(())
}
