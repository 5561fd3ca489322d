//! Variables whose class means agree but whose class variances differ: the Welch
//! t-test finds almost none of them, Bartlett's test and the network-based
//! selection do.

use survnet::baselines::{bartlett_test, bh_select, t_test_per_variable};
use survnet::datasets::{generate, split, SimScheme, SimSpec, Target};
use survnet::{run_selection, SelectionConfig};

pub fn main() -> survnet::Result<()> {
    let seed = 2;
    let spec = SimSpec { scheme: SimScheme::VarianceInflation, n: 3000, p: 200, p_prime: 16, seed };
    let data = generate(&spec)?;
    let truth = data.truth.clone().unwrap();
    let Target::Classes { labels, .. } = &data.target else { unreachable!() };

    let hits = |sel: Vec<usize>| sel.iter().filter(|j| truth.contains(j)).count();
    let t: Vec<f64> = t_test_per_variable(data.x.view(), labels)?.iter().map(|r| r.p_value).collect();
    let b: Vec<f64> = bartlett_test(data.x.view(), labels)?.iter().map(|r| r.p_value).collect();
    println!("t-test, BH at 0.1: {} of {} significant found", hits(bh_select(&t, 0.1)), spec.p_prime);
    println!("Bartlett, BH at 0.1: {} of {} significant found", hits(bh_select(&b, 0.1)), spec.p_prime);

    let out = run_selection(&split(data, seed)?, &SelectionConfig { seed, ..Default::default() })?;
    let r = &out.report;
    println!(
        "network selection: {} selected, {} significant, estimated FDR {:.3}, actual {:.3}",
        r.selected.len(),
        r.true_positives.unwrap(),
        r.eta_hat_final,
        r.actual_fdr.unwrap()
    );
    Ok(())
}
