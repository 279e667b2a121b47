//! Special-function values checked against frozen high-precision tables
//! (see `oracles/generate.py`).

use smcov::geometry::mean_beta;
use smcov::specfun::{gamma, hyp2f1_negz, lambda_kernel, theta_kernel};

const HYP2F1: &str = include_str!("oracles/hyp2f1.csv");
const KERNELS: &str = include_str!("oracles/kernels.csv");
const SCALARS: &str = include_str!("oracles/scalars.csv");

fn rows(table: &str) -> impl Iterator<Item = Vec<f64>> + '_ {
    table
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|x| x.trim().parse::<f64>().unwrap()).collect())
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

#[test]
fn hyp2f1_table() {
    let mut worst = (0.0, vec![]);
    let mut count = 0;
    for r in rows(HYP2F1) {
        let (a, b, z, want) = (r[0], r[1], r[2], r[3]);
        let got = hyp2f1_negz(a, b, b + 1.0, z).unwrap();
        let e = rel_err(got, want);
        if e > worst.0 {
            worst = (e, r.clone());
        }
        count += 1;
    }
    assert_eq!(count, 720);
    assert!(worst.0 < 1e-12, "worst relative error {:e} at {:?}", worst.0, worst.1);
}

#[test]
fn kernel_table() {
    for r in rows(KERNELS) {
        let (s, nt, alpha, z) = (r[0] as usize, r[1] as usize, r[2], r[3]);
        let lam = lambda_kernel(s, nt, alpha, z).unwrap();
        let th = theta_kernel(s, nt, alpha, z).unwrap();
        assert!(rel_err(lam, r[4]) < 1e-12, "lambda {r:?}: {lam:e}");
        assert!(rel_err(th, r[5]) < 1e-12, "theta {r:?}: {th:e}");
    }
}

#[test]
fn scalar_table() {
    for line in SCALARS.lines().skip(1) {
        let (name, value) = line.split_once(',').unwrap();
        let want: f64 = value.parse().unwrap();
        let got = match name {
            "gamma_7_5" => gamma(7.5).unwrap(),
            "gamma_0_1" => gamma(0.1).unwrap(),
            "gamma_33_3" => gamma(33.3).unwrap(),
            "gamma_50" => gamma(50.0).unwrap(),
            "hyp2f1_2_m05_05_4" => hyp2f1_negz(2.0, -0.5, 0.5, 4.0).unwrap(),
            "lambda_1_2_4_2" => lambda_kernel(1, 2, 4.0, 2.0).unwrap(),
            "theta_2_3_4_5" => theta_kernel(2, 3, 4.0, 5.0).unwrap(),
            "mean_beta_5" => mean_beta(5).unwrap(),
            other => panic!("unknown oracle {other}"),
        };
        assert!(rel_err(got, want) < 1e-12, "{name}: got {got:e}, want {want:e}");
    }
}
