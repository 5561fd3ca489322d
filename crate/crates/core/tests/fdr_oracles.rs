use proptest::prelude::*;
use survnet::fdr::{enumerate_min_fdr, estimate_fdr, min_next_fdr, step_size, verify_min_fdr};

/// Estimate using the true null count `p0` instead of its upper bound `p`.
fn eta_tilde(r: usize, r0: usize, p0: usize, q: usize) -> f64 {
    r0 as f64 / (r - r0) as f64 * (p0 as f64 / q as f64)
}

#[test]
fn min_fdr_on_small_grid() {
    for r in 2..=40 {
        for r0 in 1..r {
            for (p, q) in [(r, r), (3 * r, r), (r, 2 * r)] {
                for m in 1..=r0 {
                    let c = enumerate_min_fdr(r, r0, p, q, m).unwrap();
                    assert!(c.holds(m), "r={r} r0={r0} p={p} q={q} m={m}: {c:?}");
                }
            }
        }
    }
}

#[test]
fn min_fdr_rejects_infeasible_arguments() {
    assert!(enumerate_min_fdr(10, 4, 10, 10, 0).is_none());
    assert!(enumerate_min_fdr(10, 4, 10, 10, 5).is_none());
    assert!(enumerate_min_fdr(4, 4, 10, 10, 1).is_none());
}

#[test]
fn upper_bound_estimate_dominates_true_null_estimate() {
    for r in 2..30 {
        for r0 in 1..r {
            let p = r - r0 + 5;
            let eta_hat = estimate_fdr(r, r0, p, 17).unwrap().value().unwrap();
            for p0 in 0..=p {
                assert!(eta_tilde(r, r0, p0, 17) <= eta_hat + 1e-15);
            }
        }
    }
}

#[test]
fn step_size_examples() {
    // η̂ = 1, η* = 0.1, r0 = 784 → ⌈0.9 · 784⌉ = 706.
    assert_eq!(step_size(1.0, 0.1, 784, 1.0).unwrap(), 706);
    assert_eq!(step_size(1.0, 0.1, 784, 0.5).unwrap(), 353);
    assert_eq!(step_size(0.1000001, 0.1, 50, 1.0).unwrap(), 1);
    assert!(step_size(0.1, 0.1, 50, 1.0).is_err());
}

proptest! {
    #[test]
    fn minimum_is_attained_by_surrogates_only(r0 in 1usize..30, originals in 1usize..30, p in 1usize..50, q in 1usize..50, frac in 0.0f64..1.0) {
        let r = r0 + originals;
        let m = 1 + ((r0 - 1) as f64 * frac) as usize;
        prop_assert!(verify_min_fdr(r, r0, p, q, m));
    }

    #[test]
    fn full_rate_step_reaches_target(r0 in 1usize..2000, originals in 1usize..2000, eta_star in 0.01f64..0.5) {
        let eta_hat = estimate_fdr(r0 + originals, r0, 1000, 1000).unwrap().value().unwrap();
        prop_assume!(eta_hat > eta_star);
        let m = step_size(eta_hat, eta_star, r0, 1.0).unwrap();
        prop_assert!(min_next_fdr(m, r0, eta_hat).unwrap() <= eta_star * (1.0 + 1e-12));
        if m > 1 {
            prop_assert!(min_next_fdr(m - 1, r0, eta_hat).unwrap() > eta_star);
        }
    }

    #[test]
    fn smaller_rate_never_steps_further(eta_hat in 0.2f64..5.0, r0 in 1usize..1000, eps in 0.01f64..1.0) {
        let full = step_size(eta_hat, 0.1, r0, 1.0).unwrap();
        let part = step_size(eta_hat, 0.1, r0, eps).unwrap();
        prop_assert!(part <= full);
        prop_assert!((1..=r0).contains(&part));
    }
}
