//! Ergodic rate, rate quantiles and sum rates.

use crate::error::{Error, Result};
use crate::geometry::{NetworkConfig, PzfSplit};
use crate::quadrature::{integrate, QuadOptions};
use crate::{mmse, pzf};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Spatial multiplexing: `N_t` users per cell, one stream each.
    Sm,
    /// Single-stream transmission with resources shared between users.
    Sst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Receiver {
    Pzf(PzfSplit),
    /// PZF with the split chosen by [`pzf::rate_split`].
    PzfOptimal,
    Mmse,
}

impl fmt::Display for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Receiver::Pzf(s) => write!(f, "pzf(m={},delta={})", s.m, s.delta),
            Receiver::PzfOptimal => write!(f, "pzf(optimal)"),
            Receiver::Mmse => write!(f, "mmse"),
        }
    }
}

impl Receiver {
    /// Resolve [`Receiver::PzfOptimal`] for a concrete configuration.
    pub fn resolve(&self, config: &NetworkConfig) -> Result<Receiver> {
        match self {
            Receiver::PzfOptimal => Ok(Receiver::Pzf(pzf::rate_split(config)?)),
            Receiver::Pzf(s) => {
                s.check(config.n_t, config.n_r)?;
                Ok(*self)
            }
            Receiver::Mmse => Ok(Receiver::Mmse),
        }
    }

    /// `P(SINR > z)` for this receiver.
    pub fn coverage(&self, config: &NetworkConfig, z: f64) -> Result<f64> {
        match self.resolve(config)? {
            Receiver::Pzf(s) => pzf::coverage(config, s, z),
            Receiver::Mmse => mmse::coverage(config, z),
            Receiver::PzfOptimal => unreachable!("resolved above"),
        }
    }
}

/// Where the rate integral is cut.
#[derive(Debug, Clone, Copy)]
pub struct RateCutoff {
    /// stop once `P(SINR ≥ 2^T - 1)` falls below this
    pub ccdf_floor: f64,
    /// largest admissible `T` (bits/s/Hz)
    pub max_t: f64,
}

impl Default for RateCutoff {
    fn default() -> Self {
        RateCutoff { ccdf_floor: 1e-8, max_t: 512.0 }
    }
}

fn ccdf_at_rate<F>(coverage_fn: &F, t: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let z = t.exp2() - 1.0;
    if z <= 0.0 {
        return Ok(1.0);
    }
    coverage_fn(z)
}

/// `E[log2(1 + SINR)] = ∫ P(SINR ≥ 2^t - 1) dt`.
pub fn ergodic_rate<F>(coverage_fn: F, cutoff: RateCutoff) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut t_end = 1.0;
    loop {
        if ccdf_at_rate(&coverage_fn, t_end)? < cutoff.ccdf_floor {
            break;
        }
        t_end *= 2.0;
        if t_end > cutoff.max_t {
            return Err(Error::Truncation(format!(
                "CCDF still above {:e} at t = {}",
                cutoff.ccdf_floor, cutoff.max_t
            )));
        }
    }
    // dyadic pieces keep the adaptive rule from wasting nodes on the flat tail
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = 1.0f64.min(t_end);
    while lo < t_end {
        total += integrate(|t| ccdf_at_rate(&coverage_fn, t), lo, hi, QuadOptions::abs(1e-9))?;
        lo = hi;
        hi = (hi * 2.0).min(t_end);
    }
    Ok(total)
}

/// Solve `P(mult · log2(1 + SINR) ≤ c) = q` for `c` by bisection.
fn quantile_scaled<F>(coverage_fn: F, mult: f64, q: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain(format!("quantile level q = {q} must lie in (0, 1)")));
    }
    let cdf = |c: f64| -> Result<f64> { Ok(1.0 - ccdf_at_rate(&coverage_fn, c / mult)?) };
    let mut hi = mult;
    while cdf(hi)? < q {
        hi *= 2.0;
        if hi > 512.0 * mult {
            return Err(Error::Bracket(format!("CDF stays below q = {q} up to c = {hi}")));
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-7 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid)? < q {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rate quantile for a scheme. SM measures the per-cell rate
/// `N_t log2(1 + SINR)`; SST measures `log2(1 + SINR)`.
pub fn rate_quantile<F>(scheme: Scheme, coverage_fn: F, n_t: usize, q: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mult = match scheme {
        Scheme::Sm => n_t as f64,
        Scheme::Sst => 1.0,
    };
    quantile_scaled(coverage_fn, mult, q)
}

/// Quantile of the single-stream rate `log2(1 + SINR)`.
pub fn rate_quantile_per_stream<F>(coverage_fn: F, q: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    quantile_scaled(coverage_fn, 1.0, q)
}

fn scheme_config(scheme: Scheme, config: &NetworkConfig) -> NetworkConfig {
    match scheme {
        Scheme::Sm => *config,
        Scheme::Sst => NetworkConfig { n_t: 1, ..*config },
    }
}

/// Total average downlink rate per cell.
pub fn mean_sum_rate(scheme: Scheme, config: &NetworkConfig, receiver: Receiver) -> Result<f64> {
    let cfg = scheme_config(scheme, config);
    let rx = receiver.resolve(&cfg)?;
    let c = ergodic_rate(|z| rx.coverage(&cfg, z), RateCutoff::default())?;
    Ok(match scheme {
        Scheme::Sm => cfg.n_t as f64 * c,
        Scheme::Sst => c,
    })
}

/// Mean, cell-edge (5 %) and 80 % rates of one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateProfile {
    pub mean_rate: f64,
    pub q05: f64,
    pub q80: f64,
    pub scheme: Scheme,
    pub receiver: Receiver,
    pub n_t: usize,
    pub n_r: usize,
}

pub fn rate_profile(scheme: Scheme, config: &NetworkConfig, receiver: Receiver) -> Result<RateProfile> {
    let cfg = scheme_config(scheme, config);
    let rx = receiver.resolve(&cfg)?;
    let cov = |z: f64| rx.coverage(&cfg, z);
    let c = ergodic_rate(cov, RateCutoff::default())?;
    let mean_rate = match scheme {
        Scheme::Sm => cfg.n_t as f64 * c,
        Scheme::Sst => c,
    };
    Ok(RateProfile {
        mean_rate,
        q05: rate_quantile(scheme, cov, cfg.n_t, 0.05)?,
        q80: rate_quantile(scheme, cov, cfg.n_t, 0.80)?,
        scheme,
        receiver: rx,
        n_t: cfg.n_t,
        n_r: cfg.n_r,
    })
}
