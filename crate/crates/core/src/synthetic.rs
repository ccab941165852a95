//! Seeded generators used as independent oracles.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`. Independent sub-streams, e.g. one per simulated day,
//! are obtained by keeping the seed and setting the ChaCha stream id to the
//! sub-stream index. Gaussian draws use `rand_distr::StandardNormal`. FFTs
//! use the scalar `rustfft` planner so results do not depend on the host's
//! SIMD support.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlannerScalar;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// RNG for sub-stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Fgn { hurst: f64 },
    Cascade { p: f64, levels: u32 },
    SvDay { n: u32, sigma: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub length: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Vec<f64>> {
        match self.kind {
            GeneratorKind::Fgn { hurst } => generate_fgn(hurst, self.length, self.seed),
            GeneratorKind::Cascade { p, levels } => {
                if self.length != 1usize << levels.min(63) {
                    return Err(Error::arg(format!(
                        "cascade length {} must equal 2^{levels}",
                        self.length
                    )));
                }
                generate_cascade(p, levels)
            }
            GeneratorKind::SvDay { n, sigma } => {
                if self.length != n as usize {
                    return Err(Error::arg(format!(
                        "sv_day length {} must equal n = {n}",
                        self.length
                    )));
                }
                generate_sv_day(n, sigma, self.seed)
            }
        }
    }
}

/// `γ(k) = ½(|k+1|^{2H} − 2|k|^{2H} + |k−1|^{2H})`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

/// Unit-variance fractional Gaussian noise by circulant embedding.
///
/// `length` must be a power of two, at least 1024.
pub fn generate_fgn(hurst: f64, length: usize, seed: u64) -> Result<Vec<f64>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::arg(format!("Hurst exponent {hurst} outside (0, 1)")));
    }
    if length < 1 << 10 || !length.is_power_of_two() {
        return Err(Error::arg(format!(
            "fGn length {length} must be a power of two ≥ 1024"
        )));
    }
    let m = 2 * length;
    let mut buf: Vec<Complex<f64>> = (0..m)
        .map(|k| {
            let lag = if k <= length { k } else { m - k };
            Complex::new(fgn_autocovariance(hurst, lag), 0.0)
        })
        .collect();
    let mut planner = FftPlannerScalar::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut buf);

    let peak = buf.iter().fold(0.0f64, |acc, c| acc.max(c.re.abs()));
    let mut eigen = Vec::with_capacity(m);
    for c in &buf {
        if c.re < -1e-9 * peak {
            return Err(Error::Numeric(format!(
                "circulant embedding is not positive semi-definite (eigenvalue {})",
                c.re
            )));
        }
        eigen.push(c.re.max(0.0));
    }

    let mut rng = stream_rng(seed, 0);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut z = vec![Complex::new(0.0, 0.0); m];
    z[0] = Complex::new(eigen[0].sqrt() * normal(), 0.0);
    z[length] = Complex::new(eigen[length].sqrt() * normal(), 0.0);
    for k in 1..length {
        let amp = (eigen[k] / 2.0).sqrt();
        let re = normal();
        let im = normal();
        z[k] = Complex::new(amp * re, amp * im);
        z[m - k] = z[k].conj();
    }
    fft.process(&mut z);
    let norm = (m as f64).sqrt();
    Ok(z[..length].iter().map(|c| c.re / norm).collect())
}

/// Deterministic binomial multiplicative cascade on `2^levels` cells: at
/// every dyadic split a fraction `p` of the mass goes left and `1 − p` right.
pub fn generate_cascade(p: f64, levels: u32) -> Result<Vec<f64>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::arg(format!("cascade weight {p} outside (0, 1)")));
    }
    if levels == 0 || levels > 30 {
        return Err(Error::arg(format!(
            "cascade levels {levels} outside 1..=30"
        )));
    }
    let mut cells = vec![1.0];
    for _ in 0..levels {
        cells = cells.iter().flat_map(|&w| [w * p, w * (1.0 - p)]).collect();
    }
    Ok(cells)
}

/// Closed-form generalized Hurst exponent of the binomial cascade,
/// `h(q) = 1/q − ln(p^q + (1−p)^q)/(q ln 2)` for `q ≠ 0`.
pub fn cascade_hurst(p: f64, q: f64) -> f64 {
    1.0 / q - (p.powf(q) + (1.0 - p).powf(q)).ln() / (q * std::f64::consts::LN_2)
}

/// `n` i.i.d. `N(0, σ²/n)` intraday returns, so the day's return has variance σ².
pub fn generate_sv_day(n: u32, sigma: f64, seed: u64) -> Result<Vec<f64>> {
    sv_day_from_stream(n, sigma, seed, 0)
}

fn sv_day_from_stream(n: u32, sigma: f64, seed: u64, stream: u64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::arg("samples per day must be at least 1"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::arg(format!("sigma must be positive, got {sigma}")));
    }
    let sd = sigma / f64::from(n).sqrt();
    let mut rng = stream_rng(seed, stream);
    Ok((0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            sd * z
        })
        .collect())
}

/// `days` independent simulated days; day `i` uses stream `i` of `seed`.
pub fn generate_sv_days(n: u32, sigma: f64, days: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    (0..days as u64)
        .into_par_iter()
        .map(|i| sv_day_from_stream(n, sigma, seed, i))
        .collect()
}
