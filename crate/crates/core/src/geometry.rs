//! Scenario types and the distance laws of the Poisson cellular model.

use crate::error::{Error, Result};
use crate::specfun::{factorial, gamma_unchecked, ln_gamma};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Network-wide parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub lambda: f64,
    pub alpha: f64,
    pub sigma2: f64,
    pub n_t: usize,
    pub n_r: usize,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig { lambda: 1.0, alpha: 4.0, sigma2: 0.0, n_t: 1, n_r: 1 }
    }
}

impl NetworkConfig {
    pub fn new(lambda: f64, alpha: f64, sigma2: f64, n_t: usize, n_r: usize) -> Result<Self> {
        let c = NetworkConfig { lambda, alpha, sigma2, n_t, n_r };
        c.validate()?;
        Ok(c)
    }

    /// Interference-limited config with unit density.
    pub fn interference_limited(n_t: usize, n_r: usize, alpha: f64) -> Self {
        NetworkConfig { lambda: 1.0, alpha, sigma2: 0.0, n_t, n_r }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda = {} must be positive", self.lambda)));
        }
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha = {} must exceed 2", self.alpha)));
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma2 = {} must be >= 0", self.sigma2)));
        }
        if self.n_t == 0 || self.n_r == 0 {
            return Err(Error::InvalidConfig("antenna counts must be at least 1".into()));
        }
        Ok(())
    }

    /// `σ² (πλ)^{-α/2}`: the noise level in the scale-free units used throughout.
    pub fn normalized_noise(&self) -> f64 {
        self.sigma2 * (PI * self.lambda).powf(-self.alpha / 2.0)
    }
}

/// Receive-antenna split `N_r = m N_t + δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PzfSplit {
    pub m: usize,
    pub delta: usize,
}

impl PzfSplit {
    pub fn new(n_t: usize, n_r: usize, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig("m must be at least 1".into()));
        }
        if m * n_t > n_r {
            return Err(Error::InvalidConfig(format!(
                "m = {m} needs {} receive antennas but n_r = {n_r}",
                m * n_t
            )));
        }
        Ok(PzfSplit { m, delta: n_r - m * n_t })
    }

    pub fn check(&self, n_t: usize, n_r: usize) -> Result<()> {
        if self.m == 0 || self.m * n_t + self.delta != n_r {
            return Err(Error::InvalidConfig(format!(
                "split (m = {}, delta = {}) inconsistent with n_t = {n_t}, n_r = {n_r}",
                self.m, self.delta
            )));
        }
        Ok(())
    }
}

fn check_density(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("density lambda = {lambda} must be positive")))
    }
}

fn check_group(m: usize) -> Result<()> {
    if m < 2 {
        Err(Error::Domain(format!("m = {m}: the conditional law needs m >= 2")))
    } else {
        Ok(())
    }
}

/// Density of the distance to the nearest base station.
pub fn pdf_serving_distance(r: f64, lambda: f64) -> Result<f64> {
    check_density(lambda)?;
    if r < 0.0 {
        return Ok(0.0);
    }
    Ok((-lambda * PI * r * r).exp() * 2.0 * PI * lambda * r)
}

pub fn cdf_serving_distance(r: f64, lambda: f64) -> Result<f64> {
    check_density(lambda)?;
    Ok(if r <= 0.0 { 0.0 } else { -(-lambda * PI * r * r).exp_m1() })
}

/// Density of the distance `R` to the `(m-1)`-th interferer given the serving distance `r`.
pub fn pdf_conditional_interferer(big_r: f64, r: f64, m: usize, lambda: f64) -> Result<f64> {
    check_density(lambda)?;
    check_group(m)?;
    if big_r <= r {
        return Ok(0.0);
    }
    let x = PI * lambda * (big_r * big_r - r * r);
    Ok(2.0 * PI * lambda * big_r / factorial(m - 2) * (-x).exp() * x.powi(m as i32 - 2))
}

/// `P(R ≤ R₀ | r)`: at least `m - 1` points in the annulus between `r` and `R₀`.
pub fn cdf_conditional_interferer(big_r0: f64, r: f64, m: usize, lambda: f64) -> Result<f64> {
    check_density(lambda)?;
    check_group(m)?;
    if big_r0 <= r {
        return Ok(0.0);
    }
    let x = PI * lambda * (big_r0 * big_r0 - r * r);
    Ok(1.0 - poisson_head(m - 1, x))
}

/// `Σ_{k<n} e^{-x} x^k / k!`
pub(crate) fn poisson_head(n: usize, x: f64) -> f64 {
    let mut term = (-x).exp();
    let mut sum = 0.0;
    for k in 0..n {
        if k > 0 {
            term *= x / k as f64;
        }
        sum += term;
    }
    sum
}

/// Density of `β = R / r`; free of `λ`.
pub fn pdf_beta(beta: f64, m: usize) -> Result<f64> {
    check_group(m)?;
    if beta <= 1.0 {
        return Ok(0.0);
    }
    let mf = m as f64;
    Ok(2.0 * (mf - 1.0) * beta.powf(1.0 - 2.0 * mf) * (beta * beta - 1.0).powi(m as i32 - 2))
}

pub fn cdf_beta(beta: f64, m: usize) -> Result<f64> {
    check_group(m)?;
    if beta <= 1.0 {
        return Ok(0.0);
    }
    Ok((1.0 - beta.powi(-2)).powi(m as i32 - 1))
}

/// `E[β] = √π Γ(m) / Γ(m - 1/2)`.
pub fn mean_beta(m: usize) -> Result<f64> {
    check_group(m)?;
    let mf = m as f64;
    if m < 150 {
        Ok(PI.sqrt() * gamma_unchecked(mf) / gamma_unchecked(mf - 0.5))
    } else {
        Ok(PI.sqrt() * (ln_gamma(mf) - ln_gamma(mf - 0.5)).exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};

    #[test]
    fn serving_distance_examples() {
        assert_eq!(pdf_serving_distance(0.0, 1.0).unwrap(), 0.0);
        let v = pdf_serving_distance(1.0, 1.0).unwrap();
        assert!((v - 2.0 * PI * (-PI).exp()).abs() < 1e-15);
        assert!((v - 0.271_521).abs() < 1e-6);
        let total = integrate_to_infinity(|r| pdf_serving_distance(r, 2.5), 0.0, QuadOptions::abs(1e-12)).unwrap();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conditional_interferer_examples() {
        assert_eq!(pdf_conditional_interferer(0.5, 1.0, 2, 1.0).unwrap(), 0.0);
        let v = pdf_conditional_interferer(2.0, 1.0, 2, 1.0).unwrap();
        assert!((v - 4.0 * PI * (-3.0 * PI).exp()).abs() < 1e-15);
        assert!(matches!(pdf_conditional_interferer(2.0, 1.0, 1, 1.0), Err(Error::Domain(_))));
        for m in 2..6 {
            let r0 = 1.3;
            let num = integrate(|x| pdf_conditional_interferer(x, 0.7, m, 0.8), 0.7, r0, QuadOptions::abs(1e-13)).unwrap();
            let cdf = cdf_conditional_interferer(r0, 0.7, m, 0.8).unwrap();
            assert!((num - cdf).abs() < 1e-11, "m = {m}");
        }
    }

    #[test]
    fn beta_law() {
        assert!((pdf_beta(2.0, 2).unwrap() - 0.25).abs() < 1e-16);
        for m in 2..7 {
            let total = integrate(
                |t| Ok(if t <= 0.0 { 0.0 } else { pdf_beta(1.0 / t, m)? / (t * t) }),
                0.0,
                1.0,
                QuadOptions::abs(1e-12),
            )
            .unwrap();
            assert!((total - 1.0).abs() < 1e-10, "m = {m}");
            let c = integrate(|b| pdf_beta(b, m), 1.0, 1.7, QuadOptions::abs(1e-13)).unwrap();
            assert!((c - cdf_beta(1.7, m).unwrap()).abs() < 1e-11);
        }
    }

    #[test]
    fn mean_beta_values() {
        assert!((mean_beta(2).unwrap() - 2.0).abs() < 1e-14);
        assert!((mean_beta(5).unwrap() - 3.657_142_857_142_857).abs() < 1e-12);
        let m10 = mean_beta(10).unwrap();
        assert!((m10 / (9.0 * PI).sqrt() - 1.0).abs() < 0.03);
        assert!(matches!(mean_beta(1), Err(Error::Domain(_))));
    }

    #[test]
    fn second_moment_of_beta_diverges() {
        let partial = |b: f64| integrate(|x| Ok(x * x * pdf_beta(x, 3)?), 1.0, b, QuadOptions::abs(1e-10)).unwrap();
        let (a, b, c) = (partial(1e2), partial(1e4), partial(1e6));
        assert!(b > a + 1.0 && c > b + 1.0);
    }

    #[test]
    fn splits() {
        assert_eq!(PzfSplit::new(1, 4, 2).unwrap(), PzfSplit { m: 2, delta: 2 });
        assert!(PzfSplit::new(2, 4, 3).is_err());
        assert!(PzfSplit { m: 2, delta: 1 }.check(1, 4).is_err());
        assert!(NetworkConfig::new(1.0, 2.0, 0.0, 1, 1).is_err());
    }
}
