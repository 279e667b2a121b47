//! Monte Carlo network simulator used as an independent oracle.
//!
//! Each trial draws its own ChaCha8 stream from `(seed, trial index)`, and
//! samples are reduced in trial order, so results do not depend on the
//! number of worker threads.

use crate::error::{Error, Result};
use crate::geometry::{poisson_head, NetworkConfig, PzfSplit};
use crate::rate::Receiver;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// Added to the MMSE covariance diagonal so `σ² = 0` stays invertible.
pub const MMSE_DIAGONAL_FLOOR: f64 = 1e-12;
/// Condition-number bound above which an MMSE trial is redrawn.
pub const MAX_CONDITION: f64 = 1e12;
/// Interferers beyond the cancelled ones that the fast PZF path still draws
/// full channels for; the rest contribute their exact post-filter gain law.
const EXPLICIT_EXTRA: usize = 32;
const CHUNK: usize = 256;
const MAX_REDRAWS: usize = 100;

/// `40 / √(λπ)`: about 1600 base stations per drop.
pub fn default_window_radius(lambda: f64) -> f64 {
    40.0 / (lambda * PI).sqrt()
}

/// One drop of base stations and channels around a user at the origin.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    /// sorted by distance; index 0 is the serving station
    pub bs_positions: Vec<[f64; 2]>,
    /// per station, column-major `N_r × N_t`
    pub channels: Vec<Vec<Complex64>>,
    pub serving_distance: f64,
    pub n_t: usize,
    pub n_r: usize,
}

impl NetworkRealization {
    /// Channel vector from stream `q` of station `b`.
    pub fn channel(&self, b: usize, q: usize) -> &[Complex64] {
        &self.channels[b][q * self.n_r..(q + 1) * self.n_r]
    }

    pub fn distance(&self, b: usize) -> f64 {
        let [x, y] = self.bs_positions[b];
        x.hypot(y)
    }

    /// `(r / ‖x_b‖)^α`
    pub fn relative_power(&self, b: usize, alpha: f64) -> f64 {
        (self.serving_distance / self.distance(b)).powf(alpha)
    }
}

/// ChaCha8 generator on stream `index` of `seed`. Trial `t` of a simulation
/// uses stream `2t` for distances and `2t + 1` for fading.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Distances of PPP points within `window`, increasing; `πλ r_k²` are the
/// arrival times of a unit-rate Poisson process.
pub fn sample_distances<R: Rng + ?Sized>(lambda: f64, window: f64, rng: &mut R) -> Vec<f64> {
    let scale = 1.0 / (PI * lambda);
    let limit = window * window / scale;
    let mut acc = 0.0;
    let mut out = Vec::new();
    loop {
        let e: f64 = Exp1.sample(rng);
        acc += e;
        if acc > limit {
            return out;
        }
        out.push((acc * scale).sqrt());
    }
}

/// Draw a realization with an explicit generator.
pub fn sample_network_with<R: Rng + ?Sized>(config: &NetworkConfig, window: f64, rng: &mut R) -> Result<NetworkRealization> {
    config.validate()?;
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidConfig(format!("window radius {window} must be positive")));
    }
    let radii = loop {
        let r = sample_distances(config.lambda, window, rng);
        if !r.is_empty() {
            break r;
        }
    };
    let bs_positions = radii
        .iter()
        .map(|&d| {
            let th = rng.random::<f64>() * 2.0 * PI;
            [d * th.cos(), d * th.sin()]
        })
        .collect();
    let per_bs = config.n_t * config.n_r;
    let channels = radii
        .iter()
        .map(|_| (0..per_bs).map(|_| complex_normal(rng)).collect())
        .collect();
    Ok(NetworkRealization {
        bs_positions,
        channels,
        serving_distance: radii[0],
        n_t: config.n_t,
        n_r: config.n_r,
    })
}

/// Deterministic realization for `seed`.
pub fn sample_network(config: &NetworkConfig, window: f64, seed: u64) -> Result<NetworkRealization> {
    sample_network_with(config, window, &mut trial_rng(seed, 0))
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// `|v† h|²`
pub fn inner_gain(v: &[Complex64], h: &[Complex64]) -> f64 {
    dot(v, h).norm_sqr()
}

fn project_out(basis: &[Vec<Complex64>], x: &mut [Complex64]) {
    // two passes of modified Gram-Schmidt
    for _ in 0..2 {
        for e in basis {
            let c = dot(e, x);
            for (xi, ei) in x.iter_mut().zip(e) {
                *xi -= c * ei;
            }
        }
    }
}

/// Unit vector maximising `|v† h|` subject to `v ⟂` every vector in `nulls`.
pub fn constrained_matched_filter(h: &[Complex64], nulls: &[&[Complex64]]) -> Result<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(nulls.len());
    for g in nulls {
        let mut x = g.to_vec();
        let before = norm_sqr(&x).sqrt();
        project_out(&basis, &mut x);
        let after = norm_sqr(&x).sqrt();
        if !(after > 1e-10 * before) {
            return Err(Error::Degenerate("interference vectors are rank deficient".into()));
        }
        x.iter_mut().for_each(|v| *v /= after);
        basis.push(x);
    }
    let mut v = h.to_vec();
    let before = norm_sqr(&v).sqrt();
    project_out(&basis, &mut v);
    let n = norm_sqr(&v).sqrt();
    if !(n > 1e-10 * before) {
        return Err(Error::Degenerate("desired channel lies in the nulled subspace".into()));
    }
    v.iter_mut().for_each(|x| *x /= n);
    Ok(v)
}

fn pzf_nulls(real: &NetworkRealization, split: PzfSplit, k: usize) -> Result<Vec<&[Complex64]>> {
    split.check(real.n_t, real.n_r)?;
    if k >= real.n_t {
        return Err(Error::InvalidConfig(format!("stream {k} out of range")));
    }
    if real.bs_positions.len() < split.m {
        return Err(Error::Degenerate(format!(
            "only {} stations in the window, {} needed",
            real.bs_positions.len(),
            split.m
        )));
    }
    let mut nulls: Vec<&[Complex64]> = (0..real.n_t).filter(|&q| q != k).map(|q| real.channel(0, q)).collect();
    for b in 1..split.m {
        nulls.extend((0..real.n_t).map(|q| real.channel(b, q)));
    }
    Ok(nulls)
}

/// PZF filter for stream `k`: nulls the other own-cell streams and every
/// stream of the `m - 1` nearest interferers.
pub fn pzf_filter(real: &NetworkRealization, split: PzfSplit, k: usize) -> Result<Vec<Complex64>> {
    let nulls = pzf_nulls(real, split, k)?;
    constrained_matched_filter(real.channel(0, k), &nulls)
}

/// Post-filter SINR of stream `k` with a PZF receiver.
pub fn pzf_sinr(real: &NetworkRealization, config: &NetworkConfig, split: PzfSplit, k: usize) -> Result<f64> {
    let v = pzf_filter(real, split, k)?;
    let r = real.serving_distance;
    let signal = inner_gain(&v, real.channel(0, k));
    let mut interference = 0.0;
    for b in split.m..real.bs_positions.len() {
        let g: f64 = (0..real.n_t).map(|q| inner_gain(&v, real.channel(b, q))).sum();
        interference += real.relative_power(b, config.alpha) * g;
    }
    let noise = config.n_t as f64 * config.sigma2 * r.powf(config.alpha);
    Ok(signal / (noise + interference))
}

/// Lower-triangular accumulator for a Hermitian `n × n` matrix.
struct Hermitian {
    n: usize,
    a: Vec<Complex64>,
}

impl Hermitian {
    fn new(n: usize, diag: f64) -> Self {
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = Complex64::new(diag, 0.0);
        }
        Hermitian { n, a }
    }

    fn add_outer(&mut self, scale: f64, h: &[Complex64]) {
        let n = self.n;
        for i in 0..n {
            let hi = h[i] * scale;
            let row = &mut self.a[i * n..i * n + i + 1];
            for (j, aij) in row.iter_mut().enumerate() {
                *aij += hi * h[j].conj();
            }
        }
    }

    /// `h† A^{-1} h` via Cholesky, with a diagonal-ratio condition check.
    fn solve_quadratic(mut self, h: &[Complex64]) -> Result<f64> {
        let n = self.n;
        for j in 0..n {
            let mut d = self.a[j * n + j].re;
            for k in 0..j {
                d -= self.a[j * n + k].norm_sqr();
            }
            if !(d > 0.0) {
                return Err(Error::Degenerate("covariance is not positive definite".into()));
            }
            let d = d.sqrt();
            self.a[j * n + j] = Complex64::new(d, 0.0);
            for i in j + 1..n {
                let mut s = self.a[i * n + j];
                for k in 0..j {
                    s -= self.a[i * n + k] * self.a[j * n + k].conj();
                }
                self.a[i * n + j] = s / d;
            }
        }
        let diag: Vec<f64> = (0..n).map(|i| self.a[i * n + i].re).collect();
        let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
        if (hi / lo).powi(2) > MAX_CONDITION {
            return Err(Error::Degenerate(format!("condition estimate {:e} too large", (hi / lo).powi(2))));
        }
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut s = h[i];
            for k in 0..i {
                s -= self.a[i * n + k] * y[k];
            }
            y[i] = s / diag[i];
        }
        Ok(norm_sqr(&y))
    }
}

/// Post-filter SINR of stream `k` with the linear MMSE receiver.
pub fn mmse_sinr(real: &NetworkRealization, config: &NetworkConfig, k: usize) -> Result<f64> {
    if k >= real.n_t {
        return Err(Error::InvalidConfig(format!("stream {k} out of range")));
    }
    let noise = config.n_t as f64 * config.sigma2 * real.serving_distance.powf(config.alpha);
    let mut cov = Hermitian::new(real.n_r, noise + MMSE_DIAGONAL_FLOOR);
    for q in (0..real.n_t).filter(|&q| q != k) {
        cov.add_outer(1.0, real.channel(0, q));
    }
    for b in 1..real.bs_positions.len() {
        let g = real.relative_power(b, config.alpha);
        for q in 0..real.n_t {
            cov.add_outer(g, real.channel(b, q));
        }
    }
    cov.solve_quadratic(real.channel(0, k))
}

/// One fast trial: stream 0 of the typical user. Distances come from `geo`
/// and fading from `rng`, so runs that differ only in the window or density
/// share their near-field draws.
fn trial_sinr<R: Rng + ?Sized>(config: &NetworkConfig, rx: Receiver, window: f64, geo: &mut R, rng: &mut R) -> Result<f64> {
    let (n_t, n_r, alpha) = (config.n_t, config.n_r, config.alpha);
    let radii = sample_distances(config.lambda, window, geo);
    if radii.is_empty() {
        return Err(Error::Degenerate("empty window".into()));
    }
    let r = radii[0];
    let noise = n_t as f64 * config.sigma2 * r.powf(alpha);
    let draw = |rng: &mut R| -> Vec<Complex64> { (0..n_r).map(|_| complex_normal(rng)).collect() };
    match rx {
        Receiver::Pzf(split) => {
            if radii.len() < split.m {
                return Err(Error::Degenerate("too few stations for the cancellation set".into()));
            }
            let own: Vec<Vec<Complex64>> = (0..n_t).map(|_| draw(rng)).collect();
            let mut cancelled = Vec::with_capacity((split.m - 1) * n_t);
            for _ in 1..split.m {
                for _ in 0..n_t {
                    cancelled.push(draw(rng));
                }
            }
            let nulls: Vec<&[Complex64]> = own[1..].iter().chain(cancelled.iter()).map(|v| v.as_slice()).collect();
            let v = constrained_matched_filter(&own[0], &nulls)?;
            let signal = inner_gain(&v, &own[0]);
            let explicit_end = (split.m + EXPLICIT_EXTRA).min(radii.len());
            let mut interference = 0.0;
            for (b, d) in radii.iter().enumerate().skip(split.m) {
                let gain: f64 = if b < explicit_end {
                    (0..n_t).map(|_| inner_gain(&v, &draw(rng))).sum()
                } else {
                    // v is independent of this station: |v†h|² ~ Exp(1) per stream
                    (0..n_t).map(|_| -> f64 { Exp1.sample(rng) }).sum()
                };
                interference += (r / d).powf(alpha) * gain;
            }
            Ok(signal / (noise + interference))
        }
        Receiver::Mmse => {
            let desired = draw(rng);
            let mut cov = Hermitian::new(n_r, noise + MMSE_DIAGONAL_FLOOR);
            for _ in 1..n_t {
                cov.add_outer(1.0, &draw(rng));
            }
            let mut h = vec![Complex64::new(0.0, 0.0); n_r];
            for d in &radii[1..] {
                let g = (r / d).powf(alpha);
                for _ in 0..n_t {
                    for x in h.iter_mut() {
                        *x = complex_normal(rng);
                    }
                    cov.add_outer(g, &h);
                }
            }
            cov.solve_quadratic(&desired)
        }
        Receiver::PzfOptimal => unreachable!("resolved by the caller"),
    }
}

/// Simulation knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub trials: usize,
    pub seed: u64,
    /// worker threads; `None` uses the global pool
    pub threads: Option<usize>,
    /// `None` selects [`default_window_radius`]
    pub window_radius: Option<f64>,
}

impl McSettings {
    pub fn new(trials: usize, seed: u64) -> Self {
        McSettings { trials, seed, threads: None, window_radius: None }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

impl McEstimate {
    fn from_samples<I: Iterator<Item = f64>>(samples: I, trials: usize, seed: u64) -> Self {
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for x in samples {
            sum += x;
            sumsq += x * x;
        }
        let n = trials as f64;
        let mean = sum / n;
        let var = if trials > 1 { ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        McEstimate { mean, std_error: (var / n).sqrt(), trials, seed }
    }

    /// `(estimate - reference) / std_error`
    pub fn z_score(&self, reference: f64) -> f64 {
        let d = self.mean - reference;
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * f64::INFINITY
        }
    }
}

/// SINR of stream 0 of the typical user for every trial, in trial order.
pub fn simulate_sinr(config: &NetworkConfig, receiver: Receiver, settings: &McSettings) -> Result<Vec<f64>> {
    config.validate()?;
    let rx = receiver.resolve(config)?;
    let window = settings.window_radius.unwrap_or_else(|| default_window_radius(config.lambda));
    if !(window > 0.0 && window.is_finite()) {
        return Err(Error::InvalidConfig(format!("window radius {window} must be positive")));
    }
    let seed = settings.seed;
    let trials = settings.trials;
    let n_chunks = trials.div_ceil(CHUNK);
    let run = || -> Result<Vec<f64>> {
        let chunks = (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(trials);
                (start..end)
                    .map(|t| {
                        let mut geo = trial_rng(seed, 2 * t as u64);
                        let mut rng = trial_rng(seed, 2 * t as u64 + 1);
                        for _ in 0..MAX_REDRAWS {
                            match trial_sinr(config, rx, window, &mut geo, &mut rng) {
                                Err(Error::Degenerate(_)) => continue,
                                other => return other,
                            }
                        }
                        Err(Error::Degenerate(format!("trial {t}: {MAX_REDRAWS} degenerate draws")))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(chunks.into_iter().flatten().collect())
    };
    match settings.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    }
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < 1000 {
        return Err(Error::InvalidConfig(format!("trials = {trials}; at least 1000 required")));
    }
    Ok(())
}

/// Coverage estimates at several thresholds from one set of trials.
pub fn estimate_coverage_curve(
    config: &NetworkConfig,
    receiver: Receiver,
    zs: &[f64],
    settings: &McSettings,
) -> Result<Vec<McEstimate>> {
    check_trials(settings.trials)?;
    let sinr = simulate_sinr(config, receiver, settings)?;
    Ok(zs
        .iter()
        .map(|&z| {
            let hits = sinr.iter().map(|&s| if s > z { 1.0 } else { 0.0 });
            McEstimate::from_samples(hits, settings.trials, settings.seed)
        })
        .collect())
}

/// Monte Carlo estimate of `P(SINR > z)`.
pub fn estimate_coverage(config: &NetworkConfig, receiver: Receiver, z: f64, settings: &McSettings) -> Result<McEstimate> {
    Ok(estimate_coverage_curve(config, receiver, &[z], settings)?.remove(0))
}

/// Monte Carlo estimate of `E[log2(1 + SINR)]`.
pub fn estimate_rate(config: &NetworkConfig, receiver: Receiver, settings: &McSettings) -> Result<McEstimate> {
    check_trials(settings.trials)?;
    let sinr = simulate_sinr(config, receiver, settings)?;
    Ok(McEstimate::from_samples(sinr.iter().map(|s| s.ln_1p() / std::f64::consts::LN_2), settings.trials, settings.seed))
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Asymptotic KS p-value with Stephens' small-sample correction.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    if lam < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lam * lam).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// CDF of `Gamma(k, 1)` for integer shape `k ≥ 1`.
pub fn gamma_cdf_integer(k: usize, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - poisson_head(k, x)
    }
}
