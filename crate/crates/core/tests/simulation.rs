//! The Monte Carlo simulator against the analytic laws.

use smcov::geometry::{cdf_beta, cdf_serving_distance};
use smcov::montecarlo::{
    estimate_coverage, estimate_rate, gamma_cdf_integer, ks_pvalue, ks_statistic, sample_distances, trial_rng,
    McSettings,
};
use smcov::rate::{ergodic_rate, RateCutoff, Receiver};
use smcov::{NetworkConfig, PzfSplit};
use std::f64::consts::PI;

const N: usize = 100_000;

/// First `count` distances of each of `N` drops.
fn drops(lambda: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
    // window holding about 49 points: far more than any test needs
    let window = 7.0 / (PI * lambda).sqrt();
    (0..N)
        .map(|i| {
            let d = sample_distances(lambda, window, &mut trial_rng(seed, i as u64));
            assert!(d.len() >= count);
            d[..count].to_vec()
        })
        .collect()
}

#[test]
fn serving_distance_law() {
    let lambda = 0.7;
    let r: Vec<f64> = drops(lambda, 1, 11).iter().map(|d| d[0]).collect();
    let d = ks_statistic(&r, |x| cdf_serving_distance(x, lambda).unwrap());
    assert!(ks_pvalue(d, N) > 0.01, "KS distance {d}");
}

#[test]
fn conditional_interferer_law() {
    // πλ(R² - r²) ~ Gamma(m - 1) independently of r
    let lambda = 2.0;
    for m in [2, 4] {
        let u: Vec<f64> = drops(lambda, m, 12)
            .iter()
            .map(|d| PI * lambda * (d[m - 1].powi(2) - d[0].powi(2)))
            .collect();
        let d = ks_statistic(&u, |x| gamma_cdf_integer(m - 1, x));
        assert!(ks_pvalue(d, N) > 0.01, "m = {m}: KS distance {d}");
    }
}

#[test]
fn beta_law_and_density_invariance() {
    for m in [2, 3, 5] {
        for (i, lambda) in [0.1, 1.0, 10.0].into_iter().enumerate() {
            let beta: Vec<f64> = drops(lambda, m, 20 + i as u64).iter().map(|d| d[m - 1] / d[0]).collect();
            let d = ks_statistic(&beta, |x| cdf_beta(x, m).unwrap());
            assert!(d < 0.01, "m = {m}, lambda = {lambda}: KS distance {d}");
        }
    }
}

fn pzf(n_t: usize, n_r: usize, m: usize) -> Receiver {
    Receiver::Pzf(PzfSplit::new(n_t, n_r, m).unwrap())
}

#[test]
fn doubling_the_window_barely_moves_coverage() {
    let config = NetworkConfig::interference_limited(1, 4, 4.0);
    let base = McSettings::new(N, 5);
    let wide = McSettings { window_radius: Some(2.0 * smcov::montecarlo::default_window_radius(1.0)), ..base };
    let a = estimate_coverage(&config, pzf(1, 4, 2), 1.0, &base).unwrap();
    let b = estimate_coverage(&config, pzf(1, 4, 2), 1.0, &wide).unwrap();
    assert!((a.mean - b.mean).abs() < a.std_error, "{a:?} vs {b:?}");
}

#[test]
fn density_invariance_without_noise() {
    let settings = McSettings::new(N, 6);
    for rx in [pzf(1, 3, 2), Receiver::Mmse] {
        let at = |lambda: f64| {
            let config = NetworkConfig { lambda, ..NetworkConfig::interference_limited(1, 3, 4.0) };
            estimate_coverage(&config, rx, 2.0, &settings).unwrap()
        };
        let (a, b) = (at(0.5), at(2.0));
        assert!((a.mean - b.mean).abs() < 3.0 * a.std_error, "{rx}: {a:?} vs {b:?}");
    }
}

#[test]
fn ergodic_rate_matches_simulation() {
    let config = NetworkConfig::interference_limited(2, 4, 4.0);
    for rx in [pzf(2, 4, 1), pzf(2, 4, 2)] {
        let exact = ergodic_rate(|z| rx.coverage(&config, z), RateCutoff::default()).unwrap();
        let mc = estimate_rate(&config, rx, &McSettings::new(N, 7)).unwrap();
        assert!(mc.z_score(exact).abs() < 3.0, "{rx}: exact {exact}, {mc:?}");
    }
}

#[test]
fn thread_count_is_irrelevant() {
    let config = NetworkConfig { sigma2: 0.05, ..NetworkConfig::interference_limited(2, 3, 3.5) };
    let run = |threads| {
        let s = McSettings { threads: Some(threads), ..McSettings::new(3000, 9) };
        estimate_coverage(&config, Receiver::Mmse, 0.5, &s).unwrap()
    };
    assert_eq!(run(1), run(3));
}
