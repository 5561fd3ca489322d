//! Same data, two elimination rates: the slower rate takes more steps and ends
//! with about the same number of variables.

use survnet::datasets::{generate, split, SimScheme, SimSpec};
use survnet::{run_selection, SelectionConfig};

pub fn main() -> survnet::Result<()> {
    let seed = 4;
    let spec = SimSpec { scheme: SimScheme::IndepMeanShift, n: 2000, p: 200, p_prime: 16, seed };
    let data = split(generate(&spec)?, seed)?;
    for epsilon in [1.0, 0.5] {
        let r = run_selection(&data, &SelectionConfig { seed, epsilon, ..Default::default() })?.report;
        let trace: Vec<String> = r
            .history
            .iter()
            .map(|h| format!("{:.3}/{:.3}", h.eta_hat, h.actual_fdr.unwrap()))
            .collect();
        println!(
            "epsilon {epsilon}: {} steps, {} selected; estimated/actual FDR by step: {}",
            r.n_steps(),
            r.selected.len(),
            trace.join(" ")
        );
    }
    Ok(())
}
