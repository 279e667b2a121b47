//! Linear MMSE coverage.
//!
//! After the substitution `u = πλr² Θ_0(z)` the radial integrand is a
//! polynomial in `u` times `e^{-u}`; without noise its moments are factorials,
//! which yields the integration-free form.

use crate::combinatorics::integer_partitions_bounded;
use crate::error::{Error, Result};
use crate::geometry::{poisson_head, NetworkConfig};
use crate::quadrature::{integrate_to_infinity, QuadOptions};
use crate::specfun::{binomial, factorial, scaled_hyp2f1, theta_kernel};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest receive-antenna count handled by the partition sums.
pub const MAX_MMSE_NR: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmseCoverageRequest {
    pub config: NetworkConfig,
    pub z: f64,
}

/// `coef[m][n]`: the weight of `z^m u^n` after averaging over interferers,
/// already multiplied by `(1+z)^{1-N_t}` and divided by `Θ_0^{n+1}`.
struct MmseTerms {
    theta0: f64,
    coef: Vec<Vec<f64>>,
}

impl MmseTerms {
    fn new(n_t: usize, n_r: usize, alpha: f64, z: f64) -> Result<Self> {
        if n_r > MAX_MMSE_NR {
            return Err(Error::SizeGuard { requested: n_r, limit: MAX_MMSE_NR });
        }
        if n_t == 0 || n_r == 0 {
            return Err(Error::InvalidConfig("antenna counts must be at least 1".into()));
        }
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Domain(format!("threshold z = {z} must be positive and finite")));
        }
        let theta0 = theta_kernel(0, n_t, alpha, z)?;
        // z^ς Θ_ς(z) for ς = 1..=N_t; larger parts carry C(N_t, ς) = 0
        let mut scaled = vec![0.0; n_t + 1];
        for (s, v) in scaled.iter_mut().enumerate().skip(1) {
            let b = s as f64 - 2.0 / alpha;
            *v = scaled_hyp2f1(n_t as f64, b, z, s as f64)?;
        }
        let ln_z = z.ln();
        let ln_1pz = z.ln_1p();
        let mut coef = vec![vec![0.0; n_r]; n_r];
        for (m, row) in coef.iter_mut().enumerate() {
            for k in 0..=m.min(n_t - 1) {
                let own = binomial(n_t - 1, k) * (k as f64 * ln_z - (n_t - 1) as f64 * ln_1pz).exp();
                for p in integer_partitions_bounded(m - k, n_t)? {
                    let mut kp = 1.0;
                    for &part in &p.parts {
                        kp *= binomial(n_t, part) * scaled[part] / (alpha * part as f64 - 2.0);
                    }
                    for &count in p.multiplicities.values() {
                        kp /= factorial(count);
                    }
                    let n = p.len();
                    row[n] += own * 2f64.powi(n as i32) * kp / theta0.powi(n as i32 + 1);
                }
            }
        }
        Ok(MmseTerms { theta0, coef })
    }
}

/// Interference-limited MMSE coverage; free of `λ`.
pub fn coverage_mmse_interflimited(n_t: usize, n_r: usize, alpha: f64, z: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::Domain(format!("alpha = {alpha} must exceed 2")));
    }
    let terms = MmseTerms::new(n_t, n_r, alpha, z)?;
    // ascending m, nonnegative terms
    let mut total = 0.0;
    for row in &terms.coef {
        for (n, c) in row.iter().enumerate() {
            total += c * factorial(n);
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

/// MMSE coverage with noise: one radial integral.
pub fn coverage_mmse(req: &MmseCoverageRequest) -> Result<f64> {
    let c = &req.config;
    c.validate()?;
    let terms = MmseTerms::new(c.n_t, c.n_r, c.alpha, req.z)?;
    let half_alpha = c.alpha / 2.0;
    let kappa = req.z * c.n_t as f64 * c.sigma2 * (PI * c.lambda * terms.theta0).powf(-half_alpha);
    let n_r = c.n_r;
    let v = integrate_to_infinity(
        |u| {
            if u <= 0.0 {
                return Ok(0.0);
            }
            let a = kappa * u.powf(half_alpha);
            let ln_u = u.ln();
            let mut acc = 0.0;
            for (m, row) in terms.coef.iter().enumerate() {
                let e = poisson_head(n_r - m, a);
                if e == 0.0 {
                    continue;
                }
                let mut poly = 0.0;
                for (n, coef) in row.iter().enumerate() {
                    if *coef != 0.0 {
                        poly += coef * (n as f64 * ln_u - u).exp();
                    }
                }
                acc += e * poly;
            }
            Ok(acc)
        },
        0.0,
        QuadOptions { abs_tol: 1e-12, rel_tol: 0.0, max_intervals: 4000 },
    )?;
    Ok(v.clamp(0.0, 1.0))
}

/// Coverage through the cheapest exact path: closed form at `σ² = 0`.
pub fn coverage(config: &NetworkConfig, z: f64) -> Result<f64> {
    config.validate()?;
    if config.sigma2 == 0.0 {
        coverage_mmse_interflimited(config.n_t, config.n_r, config.alpha, z)
    } else {
        coverage_mmse(&MmseCoverageRequest { config: *config, z })
    }
}

/// Coefficient of `z^m` in `(1+z)^{N_t-1} Π_x (1 + Γ_x z)^{N_t}` via the
/// integer-partition expansion over distinct interferer tuples.
pub fn interference_polynomial_coefficient(n_t: usize, gammas: &[f64], m: usize) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..=m.min(n_t.saturating_sub(1)) {
        for p in integer_partitions_bounded(m - k, n_t)? {
            if p.len() > gammas.len() {
                continue;
            }
            let mut used = vec![false; gammas.len()];
            let tuples = distinct_tuple_sum(&p.parts, gammas, &mut used);
            let mut w = binomial(n_t - 1, k);
            for &part in &p.parts {
                w *= binomial(n_t, part);
            }
            for &count in p.multiplicities.values() {
                w /= factorial(count);
            }
            total += w * tuples;
        }
    }
    Ok(total)
}

/// `Σ over ordered tuples of distinct points of Π Γ_{x_j}^{p_j}`.
fn distinct_tuple_sum(parts: &[usize], gammas: &[f64], used: &mut [bool]) -> f64 {
    let Some((&first, rest)) = parts.split_first() else {
        return 1.0;
    };
    let mut s = 0.0;
    for i in 0..gammas.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        s += gammas[i].powi(first as i32) * distinct_tuple_sum(rest, gammas, used);
        used[i] = false;
    }
    s
}

/// All coefficients of the same polynomial by direct multiplication.
pub fn interference_polynomial_brute_force(n_t: usize, gammas: &[f64]) -> Vec<f64> {
    let mut poly = vec![1.0];
    let mut mul = |factor: &[f64]| {
        let mut out = vec![0.0; poly.len() + factor.len() - 1];
        for (i, a) in poly.iter().enumerate() {
            for (j, b) in factor.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        poly = out;
    };
    for _ in 1..n_t {
        mul(&[1.0, 1.0]);
    }
    for &g in gammas {
        for _ in 0..n_t {
            mul(&[1.0, g]);
        }
    }
    poly
}
