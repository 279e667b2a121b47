//! Rate-level trends across antenna configurations.

use smcov::rate::{mean_sum_rate, rate_profile, Receiver, Scheme};
use smcov::NetworkConfig;

fn config(n_t: usize, n_r: usize) -> NetworkConfig {
    NetworkConfig::interference_limited(n_t, n_r, 4.0)
}

#[test]
fn mmse_sum_rate_peaks_at_three_streams() {
    let rates: Vec<f64> = (1..=8)
        .map(|n_t| mean_sum_rate(Scheme::Sm, &config(n_t, 4), Receiver::Mmse).unwrap())
        .collect();
    let argmax = rates.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0 + 1;
    assert_eq!(argmax, 3, "{rates:?}");
    // rises to the peak, then falls
    assert!(rates[..3].windows(2).all(|w| w[1] > w[0]));
    assert!(rates[2..].windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn pzf_cell_edge_rate_falls_with_streams() {
    // at n_r = 6 the optimal split jumps from m = 2 to m = 1 between
    // n_t = 2 and 3, and the 5 % rate rises there
    let q05: Vec<f64> = (1..=4)
        .map(|n_t| rate_profile(Scheme::Sm, &config(n_t, 4), Receiver::PzfOptimal).unwrap().q05)
        .collect();
    assert!(q05.windows(2).all(|w| w[1] < w[0]), "{q05:?}");
}

#[test]
fn mmse_cell_edge_rate_varies_little() {
    for n_r in [4, 6] {
        let q05: Vec<f64> = (1..=n_r)
            .map(|n_t| rate_profile(Scheme::Sm, &config(n_t, n_r), Receiver::Mmse).unwrap().q05)
            .collect();
        let hi = q05.iter().cloned().fold(f64::MIN, f64::max);
        let lo = q05.iter().cloned().fold(f64::MAX, f64::min);
        assert!((hi - lo) / hi < 0.35, "n_r = {n_r}: {q05:?}");
    }
}

#[test]
fn single_stream_schemes_coincide() {
    let c = config(1, 4);
    for rx in [Receiver::Mmse, Receiver::PzfOptimal] {
        let sm = rate_profile(Scheme::Sm, &c, rx).unwrap();
        let sst = rate_profile(Scheme::Sst, &c, rx).unwrap();
        assert_eq!(sm.mean_rate, sst.mean_rate);
        assert_eq!(sm.q05, sst.q05);
        assert_eq!(sm.q80, sst.q80);
    }
}

#[test]
fn sst_ignores_transmit_streams() {
    let a = mean_sum_rate(Scheme::Sst, &config(3, 4), Receiver::Mmse).unwrap();
    let b = mean_sum_rate(Scheme::Sst, &config(1, 4), Receiver::Mmse).unwrap();
    assert_eq!(a, b);
}

#[test]
fn quantiles_are_ordered() {
    for (n_t, n_r) in [(1, 2), (2, 4), (3, 6)] {
        let p = rate_profile(Scheme::Sm, &config(n_t, n_r), Receiver::Mmse).unwrap();
        assert!(0.0 < p.q05 && p.q05 < p.q80, "{p:?}");
    }
}
