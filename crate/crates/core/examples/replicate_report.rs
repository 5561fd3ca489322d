//! Several seeded replicates through the command layer, then the mean/sd table.

use survnet::cli::{cmd_report, cmd_select, RunConfig};
use survnet::datasets::SimScheme;

pub fn main() -> survnet::Result<()> {
    let cfg = RunConfig {
        scheme: Some(SimScheme::VarianceInflation),
        n: 2000,
        p: 200,
        p_prime: 16,
        replicates: 3,
        seed: 10,
        out: std::env::temp_dir().join("survnet-replicates"),
        ..Default::default()
    };
    let dirs = cmd_select(&cfg)?;
    for d in &dirs {
        println!("{}", d.display());
    }
    print!("{}", cmd_report(std::slice::from_ref(&cfg.out))?.render());
    Ok(())
}
