//! Partial zero-forcing coverage.
//!
//! Everything is evaluated in scale-free variables: with `u = πλr²`,
//! `v = πλR²` and `β = R/r`, the pair `(v, β)` is independent, `v ~ Gamma(m)`,
//! and `β` has density [`pdf_beta`](crate::geometry::pdf_beta). Integrals over
//! `β ∈ (1, ∞)` run over `t = 1/β ∈ (0, 1)`, where the weight becomes
//! `2(m-1) t (1-t²)^{m-2}`.
//!
//! The `k`-th Laplace derivative terms are expanded over set-partition
//! signatures. With `w = z β^{-α}` and
//! `d_i = -c_i w^i Λ_i(w) / Λ_0(w)`, `c_i = (N_t)_i (-2/α)_i / ((α-2)/α)_i`,
//! every term is positive.

use crate::combinatorics::{set_partition_signatures, SetPartitionSignature};
use crate::error::{Error, Result};
use crate::geometry::{poisson_head, NetworkConfig, PzfSplit};
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};
use crate::specfun::{factorial, lambda_kernel, lambda_kernel_scaled, ln_gamma, pochhammer};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const OUTER_TOL: f64 = 1e-11;
const INNER_TOL: f64 = 1e-12;

/// A single PZF coverage query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PzfCoverageRequest {
    pub config: NetworkConfig,
    pub split: PzfSplit,
    pub z: f64,
}

fn laplace_coefficient(i: usize, n_t: usize, alpha: f64) -> f64 {
    let b = -2.0 / alpha;
    pochhammer(n_t as f64, i) * pochhammer(b, i) / pochhammer(b + 1.0, i)
}

/// Laplace transform of the interference from a PPP of `N_t`-stream
/// interferers outside radius `R`, each seen through unit-mean exponential
/// post-filter gains.
pub fn laplace_interference(s: f64, big_r: f64, lambda: f64, n_t: usize, alpha: f64) -> Result<f64> {
    if !(s >= 0.0) || !(big_r > 0.0) {
        return Err(Error::Domain(format!("need s >= 0 and R > 0 (s = {s}, R = {big_r})")));
    }
    let l0 = lambda_kernel(0, n_t, alpha, big_r.powf(-alpha) * s)?;
    Ok((-lambda * PI * big_r * big_r * (l0 - 1.0)).exp())
}

/// `d^k/ds^k` of [`laplace_interference`], by Faà di Bruno over set partitions.
pub fn laplace_interference_derivative(
    k: usize,
    s: f64,
    big_r: f64,
    lambda: f64,
    n_t: usize,
    alpha: f64,
) -> Result<f64> {
    let l = laplace_interference(s, big_r, lambda, n_t, alpha)?;
    if k == 0 {
        return Ok(l);
    }
    let scale = big_r.powf(-alpha);
    let w = scale * s;
    let mass = lambda * PI * big_r * big_r;
    let mut g = Vec::with_capacity(k);
    for i in 1..=k {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let li = lambda_kernel(i, n_t, alpha, w)?;
        g.push(-mass * sign * laplace_coefficient(i, n_t, alpha) * scale.powi(i as i32) * li);
    }
    Ok(l * crate::combinatorics::exp_derivative_ratio(k, &g)?)
}

/// Signature tables and coefficients for a fixed `(N_t, m, δ, α)`.
#[derive(Debug, Clone)]
struct PzfTerms {
    n_t: usize,
    m: usize,
    delta: usize,
    alpha: f64,
    sigs: Vec<Vec<SetPartitionSignature>>,
    neg_c: Vec<f64>,
}

impl PzfTerms {
    fn new(n_t: usize, m: usize, delta: usize, alpha: f64) -> Result<Self> {
        if n_t == 0 || m == 0 {
            return Err(Error::InvalidConfig("n_t and m must be at least 1".into()));
        }
        if !(alpha > 2.0) {
            return Err(Error::Domain(format!("alpha = {alpha} must exceed 2")));
        }
        let sigs = (0..=delta).map(set_partition_signatures).collect::<Result<Vec<_>>>()?;
        let neg_c = (0..=delta)
            .map(|i| if i == 0 { 0.0 } else { -laplace_coefficient(i, n_t, alpha) })
            .collect();
        Ok(PzfTerms { n_t, m, delta, alpha, sigs, neg_c })
    }

    /// `Λ_0(w)` and `coef[j][n] = (1/j!) Σ_{|υ| = n} weight Π d_i^{|υ|_i}`.
    fn polynomial(&self, w: f64) -> Result<(f64, Vec<Vec<f64>>)> {
        let l0 = lambda_kernel(0, self.n_t, self.alpha, w)?;
        let mut d = vec![0.0; self.delta + 1];
        for i in 1..=self.delta {
            d[i] = self.neg_c[i] * lambda_kernel_scaled(i, self.n_t, self.alpha, w)? / l0;
        }
        let mut coef = Vec::with_capacity(self.delta + 1);
        for (j, sigs) in self.sigs.iter().enumerate() {
            let mut row = vec![0.0; j + 1];
            let jf = factorial(j);
            for sig in sigs {
                let prod = sig
                    .blocks()
                    .fold(sig.weight as f64, |acc, (size, cnt)| acc * d[size].powi(cnt as i32));
                row[sig.block_count] += prod / jf;
            }
            coef.push(row);
        }
        Ok((l0, coef))
    }

    fn interference_limited(&self, w: f64) -> Result<f64> {
        let (l0, coef) = self.polynomial(w)?;
        let mf = self.m as f64;
        let total: f64 = coef
            .iter()
            .flat_map(|row| row.iter().enumerate())
            .map(|(n, c)| c * pochhammer(mf, n))
            .sum();
        Ok(total * l0.powf(-mf))
    }

    /// Conditional coverage given `β`, with normalised noise `κ0 = z N_t σ² (πλ)^{-α/2}`.
    fn with_noise(&self, w: f64, kappa: f64) -> Result<f64> {
        let (l0, coef) = self.polynomial(w)?;
        let mf = self.m as f64;
        let half_alpha = self.alpha / 2.0;
        let ln_gm = ln_gamma(mf);
        let delta = self.delta;
        let inner = integrate_to_infinity(
            |y| {
                if y <= 0.0 {
                    return Ok(0.0);
                }
                let a = kappa * (y / l0).powf(half_alpha);
                let ln_y = y.ln();
                let mut acc = 0.0;
                for (j, row) in coef.iter().enumerate() {
                    // e^{-a} Σ_{l ≤ δ-j} a^l / l!
                    let e = poisson_head(delta - j + 1, a);
                    if e == 0.0 {
                        continue;
                    }
                    let mut poly = 0.0;
                    for (n, c) in row.iter().enumerate() {
                        if *c != 0.0 {
                            poly += c * ((mf - 1.0 + n as f64) * ln_y - y - ln_gm).exp();
                        }
                    }
                    acc += e * poly;
                }
                Ok(acc)
            },
            0.0,
            QuadOptions { abs_tol: INNER_TOL, rel_tol: 0.0, max_intervals: 4000 },
        )?;
        Ok(inner * l0.powf(-mf))
    }

    fn average_over_beta<F>(&self, mut at_t: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if self.m == 1 {
            return at_t(1.0);
        }
        let mf = self.m as f64;
        let v = integrate(
            |t| {
                if t <= 0.0 {
                    return Ok(0.0);
                }
                let weight = 2.0 * (mf - 1.0) * t * (1.0 - t * t).powi(self.m as i32 - 2);
                Ok(weight * at_t(t)?)
            },
            0.0,
            1.0,
            QuadOptions { abs_tol: OUTER_TOL, rel_tol: 0.0, max_intervals: 4000 },
        )?;
        Ok(v.clamp(0.0, 1.0))
    }
}

fn check_z(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("threshold z = {z} must be positive and finite")))
    }
}

/// Interference-limited coverage conditioned on `β = R/r`.
pub fn coverage_pzf_at_beta(n_t: usize, m: usize, delta: usize, alpha: f64, z: f64, beta: f64) -> Result<f64> {
    check_z(z)?;
    if !(beta >= 1.0) {
        return Err(Error::Domain(format!("beta = {beta} must be >= 1")));
    }
    let terms = PzfTerms::new(n_t, m, delta, alpha)?;
    terms.interference_limited(z * beta.powf(-alpha))
}

/// Interference-limited (`σ² = 0`) PZF coverage, averaged over `β`.
pub fn coverage_pzf_interflimited(n_t: usize, n_r: usize, m: usize, delta: usize, alpha: f64, z: f64) -> Result<f64> {
    PzfSplit { m, delta }.check(n_t, n_r)?;
    check_z(z)?;
    let terms = PzfTerms::new(n_t, m, delta, alpha)?;
    terms.average_over_beta(|t| terms.interference_limited(z * t.powf(alpha)))
}

/// PZF coverage with noise: the double integral over `(r, R)`.
pub fn coverage_pzf(req: &PzfCoverageRequest) -> Result<f64> {
    let c = &req.config;
    c.validate()?;
    req.split.check(c.n_t, c.n_r)?;
    check_z(req.z)?;
    let terms = PzfTerms::new(c.n_t, req.split.m, req.split.delta, c.alpha)?;
    let kappa0 = req.z * c.n_t as f64 * c.normalized_noise();
    terms.average_over_beta(|t| {
        let ta = t.powf(c.alpha);
        terms.with_noise(req.z * ta, kappa0 * ta)
    })
}

/// Coverage through the cheapest exact path: closed form at `σ² = 0`.
pub fn coverage(config: &NetworkConfig, split: PzfSplit, z: f64) -> Result<f64> {
    if config.sigma2 == 0.0 {
        config.validate()?;
        coverage_pzf_interflimited(config.n_t, config.n_r, split.m, split.delta, config.alpha, z)
    } else {
        coverage_pzf(&PzfCoverageRequest { config: *config, split, z })
    }
}

fn delta_for(config: &NetworkConfig, m: usize) -> Result<usize> {
    config.validate()?;
    if m == 0 || m * config.n_t > config.n_r {
        return Err(Error::InvalidConfig(format!(
            "m = {m} infeasible for n_t = {}, n_r = {}",
            config.n_t, config.n_r
        )));
    }
    Ok(config.n_r - m * config.n_t)
}

fn inverse_sinr_prefactor(config: &NetworkConfig, delta: usize) -> (f64, f64) {
    let a = config.alpha / 2.0;
    let g = crate::specfun::gamma_unchecked(1.0 + a);
    (config.n_t as f64 * g / (2.0 * delta as f64), g * config.normalized_noise() * g)
}

/// Average interference-to-signal ratio; `+∞` when `δ = 0`.
pub fn mean_inverse_sinr(config: &NetworkConfig, m: usize) -> Result<f64> {
    let delta = delta_for(config, m)?;
    if delta == 0 {
        return Ok(f64::INFINITY);
    }
    let a = config.alpha / 2.0;
    let (pre, noise) = inverse_sinr_prefactor(config, delta);
    let g = crate::specfun::gamma_unchecked(1.0 + a);
    let mf = m as f64;
    // Σ_{k≥m} Γ(k)/Γ(k+a) telescopes to Γ(m) / ((a-1) Γ(m+a-1))
    let tail = g * (ln_gamma(mf) - ln_gamma(mf + a - 1.0)).exp() / (a - 1.0);
    Ok(pre * (noise + tail))
}

/// As [`mean_inverse_sinr`] with the interferer sum cut at `k ≤ k_max`.
pub fn mean_inverse_sinr_truncated(config: &NetworkConfig, m: usize, k_max: usize) -> Result<f64> {
    let delta = delta_for(config, m)?;
    if delta == 0 {
        return Ok(f64::INFINITY);
    }
    let a = config.alpha / 2.0;
    let (pre, noise) = inverse_sinr_prefactor(config, delta);
    let g = crate::specfun::gamma_unchecked(1.0 + a);
    let tail: f64 = (m..=k_max)
        .map(|k| g * (ln_gamma(k as f64) - ln_gamma(k as f64 + a)).exp())
        .sum();
    Ok(pre * (noise + tail))
}

/// Kershaw-approximated average interference-to-signal ratio.
pub fn mean_inverse_sinr_kershaw(config: &NetworkConfig, m: usize) -> Result<f64> {
    let delta = delta_for(config, m)?;
    if delta == 0 {
        return Ok(f64::INFINITY);
    }
    let alpha = config.alpha;
    let (pre, noise) = inverse_sinr_prefactor(config, delta);
    let g = crate::specfun::gamma_unchecked(1.0 + alpha / 2.0);
    let x = m as f64 + alpha / 4.0 - 0.5;
    Ok(pre * (noise + 2.0 * g * x.powf(1.0 - alpha / 2.0) / (alpha - 2.0)))
}

fn largest_feasible_m(config: &NetworkConfig) -> Result<usize> {
    config.validate()?;
    if config.n_r <= config.n_t {
        return Err(Error::Infeasible { n_t: config.n_t, n_r: config.n_r });
    }
    Ok((config.n_r - 1) / config.n_t)
}

/// Optimal number of cancelled groups from the stationarity condition of the
/// Kershaw approximation, clamped to splits with `δ ≥ 1`.
pub fn optimal_m(config: &NetworkConfig) -> Result<usize> {
    let m_max = largest_feasible_m(config)?;
    let alpha = config.alpha;
    let n_t = config.n_t as f64;
    let n_r = config.n_r as f64;
    let root = if config.sigma2 == 0.0 {
        Some((1.0 - 2.0 / alpha) * (n_r / n_t - 0.5))
    } else {
        let noise = config.normalized_noise();
        let f = |m: f64| {
            let x = m + alpha / 4.0 - 0.5;
            2.0 * x * n_t + noise * n_t * (alpha - 2.0) * x.powf(alpha / 2.0) - (n_r - m * n_t) * (alpha - 2.0)
        };
        if f(0.0) >= 0.0 {
            None
        } else {
            let (mut lo, mut hi) = (0.0, n_r / n_t);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-13 {
                    break;
                }
            }
            Some(0.5 * (lo + hi))
        }
    };
    let m = match root {
        Some(r) => (r - 1e-9).ceil().max(1.0) as usize,
        None => 1,
    };
    Ok(m.clamp(1, m_max))
}

/// Every feasible `m` (with `δ ≥ 1`) minimising [`mean_inverse_sinr`]; ties
/// within a relative `1e-12` are all returned, smallest first.
pub fn argmin_mean_inverse_sinr(config: &NetworkConfig) -> Result<Vec<usize>> {
    let m_max = largest_feasible_m(config)?;
    let values = (1..=m_max)
        .map(|m| mean_inverse_sinr(config, m))
        .collect::<Result<Vec<_>>>()?;
    let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((1..=m_max)
        .filter(|&m| values[m - 1] <= best * (1.0 + 1e-12))
        .collect())
}

/// Closed-form optimum next to the exhaustive argmin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalM {
    pub m_star: usize,
    pub argmin: Vec<usize>,
}

impl OptimalM {
    pub fn agrees(&self) -> bool {
        self.argmin.contains(&self.m_star)
    }
}

pub fn optimal_m_report(config: &NetworkConfig) -> Result<OptimalM> {
    Ok(OptimalM { m_star: optimal_m(config)?, argmin: argmin_mean_inverse_sinr(config)? })
}

/// Split used for rate figures: [`optimal_m`] when a split with `δ ≥ 1`
/// exists, otherwise full cancellation of the own cell only (`m = 1`).
pub fn rate_split(config: &NetworkConfig) -> Result<PzfSplit> {
    match optimal_m(config) {
        Ok(m) => PzfSplit::new(config.n_t, config.n_r, m),
        Err(Error::Infeasible { .. }) => PzfSplit::new(config.n_t, config.n_r, 1),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_at_zero_and_arctan_point() {
        assert_eq!(laplace_interference(0.0, 0.7, 1.3, 2, 3.5).unwrap(), 1.0);
        let v = laplace_interference(1.0, 1.0, 1.0, 1, 4.0).unwrap();
        assert!((v - (-PI * PI / 4.0).exp()).abs() < 1e-14);
    }

    #[test]
    fn single_antenna_anchor() {
        let p = coverage_pzf_interflimited(1, 1, 1, 0, 4.0, 1.0).unwrap();
        assert!((p - 1.0 / (1.0 + PI / 4.0)).abs() < 1e-13);
    }

    #[test]
    fn edge_user_closed_form() {
        let p = coverage_pzf_at_beta(1, 2, 0, 4.0, 1.0, 1.0).unwrap();
        assert!((p - (1.0 + PI / 4.0).powi(-2)).abs() < 1e-13);
        assert!((p - 0.313_711).abs() < 1e-6);
    }

    #[test]
    fn mean_inverse_sinr_examples() {
        let c = NetworkConfig::interference_limited(1, 10, 4.0);
        assert!((mean_inverse_sinr(&c, 5).unwrap() - 0.08).abs() < 1e-14);
        assert!((mean_inverse_sinr_kershaw(&c, 5).unwrap() - 0.2 * 2.0 / 5.5).abs() < 1e-14);
        assert!((mean_inverse_sinr_truncated(&c, 5, 100).unwrap() - 0.4 * (0.2 - 1.0 / 101.0)).abs() < 1e-14);
        assert_eq!(mean_inverse_sinr(&c, 10).unwrap(), f64::INFINITY);
        assert!(mean_inverse_sinr(&c, 11).is_err());
    }

    #[test]
    fn optimal_m_anchors() {
        let at = |n_t, n_r| optimal_m(&NetworkConfig::interference_limited(n_t, n_r, 4.0)).unwrap();
        assert_eq!(at(1, 10), 5);
        assert_eq!(at(2, 10), 3);
        assert_eq!(at(1, 4), 2);
        assert_eq!(at(1, 2), 1);
        assert!(matches!(
            optimal_m(&NetworkConfig::interference_limited(4, 4, 4.0)),
            Err(Error::Infeasible { n_t: 4, n_r: 4 })
        ));
    }

    #[test]
    fn noise_root_reduces_to_ceiling() {
        let mut c = NetworkConfig::interference_limited(1, 10, 4.0);
        c.sigma2 = 1e-14;
        assert_eq!(optimal_m(&c).unwrap(), 5);
        // heavy noise pushes antennas towards signal enhancement
        c.sigma2 = 50.0;
        assert!(optimal_m(&c).unwrap() < 5);
    }

    #[test]
    fn rate_split_falls_back_to_m1() {
        let s = rate_split(&NetworkConfig::interference_limited(4, 4, 4.0)).unwrap();
        assert_eq!(s, PzfSplit { m: 1, delta: 0 });
    }
}
