//! Invariants of the analytic modules, mostly as property tests.

use proptest::prelude::*;
use smcov::combinatorics::{integer_partitions, set_partition_signatures};
use smcov::mmse::{self, interference_polynomial_brute_force, interference_polynomial_coefficient, MmseCoverageRequest};
use smcov::pzf::{self, coverage_pzf_interflimited, laplace_interference, laplace_interference_derivative, PzfCoverageRequest};
use smcov::specfun::{factorial, hyp2f1_negz, lambda_kernel};
use smcov::{NetworkConfig, PzfSplit};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg(64))]

    // d/ds 2F1(a, b; b+1; -s) = -(ab/(b+1)) 2F1(a+1, b+1; b+2; -s)
    #[test]
    fn hyp2f1_derivative_matches_finite_difference(
        a in 0.5f64..8.0,
        b in -0.8f64..6.0,
        s in 0.05f64..30.0,
    ) {
        let h = 1e-4 * s;
        let fd = (hyp2f1_negz(a, b, b + 1.0, s + h).unwrap() - hyp2f1_negz(a, b, b + 1.0, s - h).unwrap()) / (2.0 * h);
        let exact = -a * b / (b + 1.0) * hyp2f1_negz(a + 1.0, b + 1.0, b + 2.0, s).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1e-12), "fd {fd:e} exact {exact:e}");
    }

    #[test]
    fn lambda0_increases_in_z_and_nt(
        n_t in 1usize..6,
        alpha in 2.2f64..6.0,
        z in 0.0f64..50.0,
        dz in 0.01f64..10.0,
    ) {
        let l = lambda_kernel(0, n_t, alpha, z).unwrap();
        prop_assert!(lambda_kernel(0, n_t, alpha, z + dz).unwrap() > l);
        if z > 0.0 {
            prop_assert!(lambda_kernel(0, n_t + 1, alpha, z).unwrap() > l);
        }
    }

    #[test]
    fn mmse_expansion_equals_polynomial_product(
        n_t in 1usize..4,
        gammas in proptest::collection::vec(0.01f64..3.0, 0..5),
    ) {
        let brute = interference_polynomial_brute_force(n_t, &gammas);
        for (m, want) in brute.iter().enumerate() {
            let got = interference_polynomial_coefficient(n_t, &gammas, m).unwrap();
            prop_assert!((got - want).abs() <= 1e-10 * want.abs().max(1.0), "m = {m}: {got} vs {want}");
        }
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn pzf_coverage_nonincreasing_in_z(
        n_t in 1usize..4,
        m in 1usize..4,
        delta in 0usize..4,
        alpha in 2.5f64..5.5,
        z in 0.05f64..50.0,
        factor in 1.01f64..4.0,
    ) {
        let n_r = m * n_t + delta;
        let lo = coverage_pzf_interflimited(n_t, n_r, m, delta, alpha, z).unwrap();
        let hi = coverage_pzf_interflimited(n_t, n_r, m, delta, alpha, z * factor).unwrap();
        prop_assert!(hi <= lo + 1e-10);
        prop_assert!((0.0..=1.0).contains(&lo));
    }

    #[test]
    fn pzf_coverage_nondecreasing_in_delta(
        n_t in 1usize..4,
        m in 1usize..4,
        delta in 0usize..4,
        alpha in 2.5f64..5.5,
        z in 0.05f64..50.0,
    ) {
        let a = coverage_pzf_interflimited(n_t, m * n_t + delta, m, delta, alpha, z).unwrap();
        let b = coverage_pzf_interflimited(n_t, m * n_t + delta + 1, m, delta + 1, alpha, z).unwrap();
        prop_assert!(b >= a - 1e-10);
    }

    #[test]
    fn mmse_monotone_and_dominates_pzf(
        n_t in 1usize..4,
        extra in 0usize..4,
        alpha in 2.5f64..5.5,
        z in 0.05f64..50.0,
    ) {
        let n_r = n_t + extra;
        let c = mmse::coverage_mmse_interflimited(n_t, n_r, alpha, z).unwrap();
        prop_assert!(mmse::coverage_mmse_interflimited(n_t, n_r, alpha, 1.5 * z).unwrap() <= c + 1e-10);
        prop_assert!(mmse::coverage_mmse_interflimited(n_t, n_r + 1, alpha, z).unwrap() >= c - 1e-10);
        for m in 1..=n_r / n_t {
            let delta = n_r - m * n_t;
            let p = coverage_pzf_interflimited(n_t, n_r, m, delta, alpha, z).unwrap();
            prop_assert!(c >= p - 1e-9, "m = {m}: mmse {c} < pzf {p}");
        }
    }

    #[test]
    fn laplace_derivatives_match_finite_differences(
        n_t in 1usize..4,
        alpha in 2.5f64..5.0,
        s in 0.5f64..4.0,
        big_r in 0.6f64..2.0,
        lambda in 0.3f64..2.0,
    ) {
        // derivatives of order k from order k-1 by a central difference
        let h = 1e-5 * s;
        for k in 1..=4 {
            let d = |x: f64| laplace_interference_derivative(k - 1, x, big_r, lambda, n_t, alpha).unwrap();
            let fd = (d(s + h) - d(s - h)) / (2.0 * h);
            let exact = laplace_interference_derivative(k, s, big_r, lambda, n_t, alpha).unwrap();
            prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs(), "k = {k}: fd {fd:e} exact {exact:e}");
        }
        prop_assert_eq!(
            laplace_interference_derivative(0, s, big_r, lambda, n_t, alpha).unwrap(),
            laplace_interference(s, big_r, lambda, n_t, alpha).unwrap()
        );
    }
}

#[test]
fn direct_fourth_order_difference() {
    let (s, r, lam, nt, al) = (1.3, 1.0, 1.0, 2, 4.0);
    let f = |x: f64| laplace_interference(x, r, lam, nt, al).unwrap();
    let d4 = |h: f64| (f(s + 2.0 * h) - 4.0 * f(s + h) + 6.0 * f(s) - 4.0 * f(s - h) + f(s - 2.0 * h)) / h.powi(4);
    // Richardson step cancels the h² error of the five-point stencil
    let fd = (4.0 * d4(0.01) - d4(0.02)) / 3.0;
    let exact = laplace_interference_derivative(4, s, r, lam, nt, al).unwrap();
    assert!((fd - exact).abs() < 1e-5 * exact.abs(), "{fd} vs {exact}");
}

#[test]
fn composition_count_identity() {
    for l in 1..=16usize {
        let total: f64 = integer_partitions(l)
            .unwrap()
            .iter()
            .map(|p| factorial(p.len()) / p.multiplicities.values().map(|&c| factorial(c)).product::<f64>())
            .sum();
        assert_eq!(total, 2f64.powi(l as i32 - 1), "l = {l}");
    }
}

/// Restricted-growth strings enumerate set partitions one by one.
fn enumerate_set_partitions(k: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, k: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == k {
            let blocks = cur.iter().max().map_or(0, |m| m + 1);
            let mut sizes = vec![0; blocks];
            for &b in cur.iter() {
                sizes[b] += 1;
            }
            sizes.sort_unstable();
            out.push(sizes);
            return;
        }
        for b in 0..=max.min(i) {
            cur.push(b);
            rec(i + 1, k, if b == max { max + 1 } else { max }, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, 0, &mut Vec::new(), &mut out);
    out
}

#[test]
fn signature_weights_match_enumeration() {
    for k in 1..=8 {
        let mut counts = std::collections::BTreeMap::<Vec<usize>, u64>::new();
        for sizes in enumerate_set_partitions(k) {
            *counts.entry(sizes).or_default() += 1;
        }
        let sigs = set_partition_signatures(k).unwrap();
        assert_eq!(sigs.len(), counts.len());
        for sig in sigs {
            let mut sizes: Vec<usize> = sig
                .multiplicities
                .iter()
                .enumerate()
                .flat_map(|(j, &c)| std::iter::repeat_n(j + 1, c))
                .collect();
            sizes.sort_unstable();
            // multinomial formula k! / Π (j!)^{c_j} c_j!
            let mut formula = factorial(k);
            for (j, &c) in sig.multiplicities.iter().enumerate() {
                formula /= factorial(j + 1).powi(c as i32) * factorial(c);
            }
            assert_eq!(counts[&sizes], sig.weight, "k = {k}, {sizes:?}");
            assert_eq!(formula, sig.weight as f64);
        }
    }
}

#[test]
fn noise_path_reduces_to_closed_form() {
    for (n_t, m, delta, alpha, z) in [(1, 1, 0, 4.0, 1.0), (1, 2, 2, 4.0, 3.0), (2, 1, 1, 3.0, 0.5), (2, 2, 0, 5.0, 10.0), (3, 1, 2, 3.5, 0.2)] {
        let n_r = m * n_t + delta;
        let closed = coverage_pzf_interflimited(n_t, n_r, m, delta, alpha, z).unwrap();
        for lambda in [0.25, 1.0, 4.0] {
            let config = NetworkConfig { lambda, alpha, sigma2: 0.0, n_t, n_r };
            let via_noise = pzf::coverage_pzf(&PzfCoverageRequest { config, split: PzfSplit { m, delta }, z }).unwrap();
            assert!((via_noise - closed).abs() < 1e-8, "{n_t}x{n_r} m={m} lambda={lambda}: {via_noise} vs {closed}");
        }
        let mm = mmse::coverage_mmse_interflimited(n_t, n_r, alpha, z).unwrap();
        for lambda in [0.25, 4.0] {
            let config = NetworkConfig { lambda, alpha, sigma2: 0.0, n_t, n_r };
            let via_noise = mmse::coverage_mmse(&MmseCoverageRequest { config, z }).unwrap();
            assert!((via_noise - mm).abs() < 1e-8, "mmse {n_t}x{n_r} lambda={lambda}");
        }
    }
}

#[test]
fn coverage_with_noise_is_lambda_dependent_and_lower() {
    let base = NetworkConfig { lambda: 1.0, alpha: 4.0, sigma2: 0.0, n_t: 1, n_r: 4 };
    let split = PzfSplit { m: 2, delta: 2 };
    let clean = pzf::coverage(&base, split, 1.0).unwrap();
    let noisy = |lambda: f64| pzf::coverage(&NetworkConfig { lambda, sigma2: 0.5, ..base }, split, 1.0).unwrap();
    let (sparse, dense) = (noisy(0.2), noisy(5.0));
    assert!(sparse < dense && dense < clean);
    let mm = |lambda: f64| mmse::coverage(&NetworkConfig { lambda, sigma2: 0.5, ..base }, 1.0).unwrap();
    assert!(mm(0.2) < mm(5.0) && mm(5.0) < mmse::coverage(&base, 1.0).unwrap());
}
