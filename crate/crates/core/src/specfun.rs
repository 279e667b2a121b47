//! Gamma, Pochhammer and the Gauss hypergeometric family `2F1(a, b; b + 1; -z)`.
//!
//! Every coverage expression in this crate reduces to hypergeometric functions
//! whose third parameter exceeds the second by exactly one, evaluated at a
//! non-positive argument. That family is an incomplete beta function in
//! disguise, which is what makes a robust evaluation over `z ∈ [0, ∞)` cheap:
//!
//! * `z ≤ 1`: Pfaff transform to `y = z / (1 + z) ≤ 1/2` and sum the series
//!   `2F1(a, 1; b + 1; y)`, whose terms are all positive for `b > -1`.
//! * `z > 1`, `b > 0`, `a > b`, `y` below the beta mean: continued fraction of
//!   the incomplete beta integral `B_y(b, a - b)`.
//! * otherwise: the connection formula around `x = 1 / (1 + z)`,
//!   `Γ(b+1)Γ(a-b)/Γ(a) z^{-b} + b/(b-a) (1+z)^{-a} 2F1(a, 1; a+1-b; x)`.

use crate::error::{Error, Result};
use std::f64::consts::{E, PI};

const LN_PI: f64 = 1.144_729_885_849_400_2;
const TWO_SQRT_E_OVER_PI: f64 = 1.860_382_734_205_265_7;
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;

const GAMMA_R: f64 = 10.900511;
const GAMMA_DK: [f64; 11] = [
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];

const SERIES_EPS: f64 = 1e-17;
const PFAFF_MAX_Z: f64 = 20.0;
const SERIES_MAX_TERMS: usize = 200_000;
const FALLBACK_MAX_TERMS: usize = 20_000_000;

fn lanczos_sum(x: f64) -> f64 {
    GAMMA_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(GAMMA_DK[0], |s, (i, d)| s + d / (x + i as f64 - 1.0))
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

/// Gamma function (Lanczos approximation, Pugh's coefficient set).
pub fn gamma(x: f64) -> Result<f64> {
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if (1.0..=171.0).contains(&x) && x == x.trunc() {
        return factorial(x as usize - 1);
    }
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        lanczos_sum(x) * TWO_SQRT_E_OVER_PI * ((x - 0.5 + GAMMA_R) / E).powf(x - 0.5)
    }
}

/// Natural logarithm of `|Γ(x)|`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        LN_PI - (PI * x).sin().abs().ln() - ln_gamma(1.0 - x)
    } else {
        lanczos_sum(x).ln()
            + LN_2_SQRT_E_OVER_PI
            + (x - 0.5) * ((x - 0.5 + GAMMA_R) / E).ln()
    }
}

/// Rising factorial `x (x + 1) … (x + n - 1)`; `(x)_0 = 1`.
pub fn pochhammer(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// `n!` as a float.
pub fn factorial(n: usize) -> f64 {
    pochhammer(1.0, n)
}

/// Binomial coefficient `C(n, k)` as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `2F1(a, b; c; -z)` for the family `c = b + 1`, `z ≥ 0`.
pub fn hyp2f1_negz(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!(
            "third parameter c = {c} is a non-positive integer"
        )));
    }
    if (c - (b + 1.0)).abs() > 1e-12 * (1.0 + b.abs()) {
        return Err(Error::Domain(format!(
            "only the family c = b + 1 is supported (b = {b}, c = {c})"
        )));
    }
    scaled_hyp2f1(a, b, z, 0.0)
}

/// `z^p · 2F1(a, b; b + 1; -z)`, with the power folded into the evaluation so
/// that neither factor over- or underflows on its own at extreme `z`.
pub(crate) fn scaled_hyp2f1(a: f64, b: f64, z: f64, p: f64) -> Result<f64> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("argument z = {z} must be finite and >= 0")));
    }
    if !(b > -1.0) {
        return Err(Error::Domain(format!("second parameter b = {b} must exceed -1")));
    }
    if !(a > 0.0) {
        return Err(Error::Domain(format!("first parameter a = {a} must be positive")));
    }
    if z == 0.0 {
        return Ok(if p == 0.0 { 1.0 } else { 0.0 });
    }
    if b == 0.0 {
        return Ok(z.powf(p));
    }
    let ln_z = z.ln();
    let ln_1pz = z.ln_1p();
    let y = z / (1.0 + z);

    // the connection formula cancels badly for moderate z when b is large,
    // while the all-positive Pfaff series stays cheap up to about z = 20
    if z <= PFAFF_MAX_Z {
        let s = pfaff_series(a, b, y, SERIES_MAX_TERMS)?;
        return Ok(s * (p * ln_z - a * ln_1pz).exp());
    }

    if b > 0.0 && a > b && y < (b + 1.0) / (a + 2.0) {
        let h = beta_continued_fraction(b, a - b, y)?;
        return Ok(h * (p * ln_z - a * ln_1pz).exp());
    }

    let q = a - b;
    if is_nonpositive_integer(q) {
        // log-degenerate connection; plain summation is slow but exact
        let s = pfaff_series(a, b, y, FALLBACK_MAX_TERMS)?;
        return Ok(s * (p * ln_z - a * ln_1pz).exp());
    }
    let x = 1.0 / (1.0 + z);
    let lead = gamma_unchecked(b + 1.0) * gamma_unchecked(q) / gamma_unchecked(a);
    let t1 = lead * ((p - b) * ln_z).exp();
    let f = unit_series(a, q + 1.0, x)?;
    let t2 = b / (b - a) * f * (p * ln_z - a * ln_1pz).exp();
    Ok(t1 + t2)
}

/// `Σ (a)_n / (b + 1)_n · y^n`, i.e. `2F1(a, 1; b + 1; y)`.
fn pfaff_series(a: f64, b: f64, y: f64, max_terms: usize) -> Result<f64> {
    let c = b + 1.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..max_terms {
        let n = n as f64;
        let ratio = (a + n) / (c + n) * y;
        term *= ratio;
        sum += term;
        if ratio < 1.0 && term.abs() <= SERIES_EPS * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(format!(
        "Pfaff series for 2F1({a}, {b}; {c}; y = {y}) after {max_terms} terms"
    )))
}

/// `2F1(a, 1; c; x)` for `x ≤ 1/2`.
fn unit_series(a: f64, c: f64, x: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev_small = false;
    for n in 0..SERIES_MAX_TERMS {
        let n = n as f64;
        term *= (a + n) / (c + n) * x;
        sum += term;
        let small = term.abs() <= SERIES_EPS * sum.abs();
        // two consecutive small terms: c may be negative, so early terms can
        // dip before the tail settles
        if small && prev_small && (a + n).abs() < 2.0 * (c + n).abs() {
            return Ok(sum);
        }
        prev_small = small;
    }
    Err(Error::NoConvergence(format!(
        "connection series 2F1({a}, 1; {c}; x = {x})"
    )))
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction,
/// which equals `2F1(p + q, 1; p + 1; x)`.
fn beta_continued_fraction(p: f64, q: f64, x: f64) -> Result<f64> {
    const FPMIN: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = p + q;
    let qap = p + 1.0;
    let qam = p - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (q - m) * x / ((qam + m2) * (p + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(p + m) * (qab + m) * x / ((p + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence(format!(
        "incomplete beta continued fraction (p = {p}, q = {q}, x = {x})"
    )))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("path-loss exponent alpha = {alpha} must exceed 2")))
    }
}

/// `Λ_{ς,N_t}(z) = 2F1(N_t + ς, ς - 2/α; ς - 2/α + 1; -z)`.
pub fn lambda_kernel(varsigma: usize, n_t: usize, alpha: f64, z: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let b = varsigma as f64 - 2.0 / alpha;
    hyp2f1_negz((n_t + varsigma) as f64, b, b + 1.0, z)
}

/// `Θ_{ς,N_t}(z) = 2F1(N_t, ς - 2/α; ς - 2/α + 1; -z)`.
pub fn theta_kernel(varsigma: usize, n_t: usize, alpha: f64, z: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let b = varsigma as f64 - 2.0 / alpha;
    hyp2f1_negz(n_t as f64, b, b + 1.0, z)
}

/// `z^ς · Λ_{ς,N_t}(z)`; bounded growth (`~ z^{2/α}`) for every `ς`.
pub(crate) fn lambda_kernel_scaled(varsigma: usize, n_t: usize, alpha: f64, z: f64) -> Result<f64> {
    let b = varsigma as f64 - 2.0 / alpha;
    scaled_hyp2f1((n_t + varsigma) as f64, b, z, varsigma as f64)
}
