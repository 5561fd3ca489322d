//! Walk the estimated FDR and step sizes for a run in which every eliminated
//! variable happens to be a surrogate, and check the smallest reachable estimate
//! by brute force.

use survnet::fdr::{enumerate_min_fdr, estimate_fdr, step_size};

pub fn main() -> survnet::Result<()> {
    let (p, q) = (784, 784);
    let eta_star = 0.1;
    for epsilon in [1.0, 0.5] {
        let (mut r, mut r0) = (p + q, q);
        println!("epsilon = {epsilon}");
        loop {
            let eta_hat = estimate_fdr(r, r0, p, q)?.value().expect("originals remain");
            if eta_hat <= eta_star {
                println!("  r - r0 = {:>4}  r0 = {r0:>4}  eta_hat = {eta_hat:.4}  stop", r - r0);
                break;
            }
            let m = step_size(eta_hat, eta_star, r0, epsilon)?;
            println!("  r - r0 = {:>4}  r0 = {r0:>4}  eta_hat = {eta_hat:.4}  m = {m}", r - r0);
            r -= m;
            r0 -= m;
        }
    }

    let c = enumerate_min_fdr(100, 40, 100, 100, 12).expect("feasible");
    println!(
        "r=100 r0=40 m=12: enumerated minimum {:.6} at m0 = {}, closed form {:.6}",
        c.enumerated_min, c.minimizer, c.bound
    );
    Ok(())
}
