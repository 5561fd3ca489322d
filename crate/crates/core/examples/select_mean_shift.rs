//! Variable selection on the independent mean-shift scheme, printing the per-step
//! history. Pass `full` for 10,000 x 784 data; the default is a smaller instance.

use survnet::datasets::{generate, split, SimScheme, SimSpec};
use survnet::{run_selection, SelectionConfig};

pub fn main() -> survnet::Result<()> {
    let full = std::env::args().any(|a| a == "full");
    let seed = 1;
    let spec = if full {
        SimSpec::standard(SimScheme::IndepMeanShift, seed)
    } else {
        SimSpec { scheme: SimScheme::IndepMeanShift, n: 2000, p: 200, p_prime: 16, seed }
    };
    let data = split(generate(&spec)?, seed)?;
    let out = run_selection(&data, &SelectionConfig { seed, ..Default::default() })?;
    let r = &out.report;

    println!("{:>4} {:>8} {:>6} {:>8} {:>6} {:>8}", "step", "r - r0", "r0", "eta_hat", "m", "r'");
    for h in &r.history {
        println!(
            "{:>4} {:>8} {:>6} {:>8.4} {:>6} {:>8}",
            h.step,
            h.r_minus_r0,
            h.r0,
            h.eta_hat,
            h.m.map_or("-".into(), |m| m.to_string()),
            h.r_prime.unwrap_or(0)
        );
    }
    println!(
        "selected {} variables, {} truly significant of {}; actual FDR {:.3}",
        r.selected.len(),
        r.true_positives.unwrap(),
        spec.p_prime,
        r.actual_fdr.unwrap()
    );
    println!(
        "test error {:.2}% with all variables, {:.2}% with the selected ones",
        100.0 * r.initial.error.unwrap(),
        100.0 * r.final_.error.unwrap()
    );
    Ok(())
}
