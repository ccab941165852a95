//! Exact law of the standardized daily return `r̄ = r/√RV` when the day is
//! built from `n` i.i.d. Gaussian intraday returns.
//!
//! The density is `Γ(n/2) / (√(πn)·Γ((n−1)/2)) · (1 − x²/n)^{(n−3)/2}` on
//! `|x| < √n`. The `√(πn)` reading of the normalizing constant is the one that
//! integrates to one.

use statrs::function::gamma::ln_gamma;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiniteSampleLaw {
    n: u32,
}

impl FiniteSampleLaw {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("samples per day must be at least 1".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Upper end of the support, `√n`.
    pub fn support_bound(&self) -> f64 {
        f64::from(self.n).sqrt()
    }

    /// Log of the normalizing constant, evaluated through log-gamma so that
    /// large `n` does not overflow.
    fn ln_norm(&self) -> f64 {
        let n = f64::from(self.n);
        ln_gamma(n / 2.0) - ln_gamma((n - 1.0) / 2.0) - 0.5 * (std::f64::consts::PI * n).ln()
    }

    /// Density at `x`. Zero outside the open support `|x| < √n`. Requires `n ≥ 2`.
    pub fn density(&self, x: f64) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::Domain(
                "density is degenerate for n = 1 (two-point law at ±1)".into(),
            ));
        }
        if x.is_nan() {
            return Err(Error::Domain("density evaluated at NaN".into()));
        }
        if x.abs() >= self.support_bound() {
            return Ok(0.0);
        }
        let n = f64::from(self.n);
        let u = x * x / n;
        let exponent = (n - 3.0) / 2.0;
        Ok((self.ln_norm() + exponent * (-u).ln_1p()).exp())
    }

    /// `E[r̄^{2k}] = nᵏ (2k−1)!! / ((n+2k−2)(n+2k−4)···n)`.
    pub fn moment_2k(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::arg("moment order k must be at least 1"));
        }
        let n = f64::from(self.n);
        Ok((1..=k)
            .map(|j| {
                let j = f64::from(j);
                n * (2.0 * j - 1.0) / (n + 2.0 * j - 2.0)
            })
            .product())
    }

    /// `3n/(n+2)`.
    pub fn kurtosis(&self) -> f64 {
        let n = f64::from(self.n);
        3.0 * n / (n + 2.0)
    }
}

/// Relative bias `a/(n+a)` of the Hurst exponent under the finite-sample
/// ansatz, for `n ≥ 1` and `a ≥ 0`.
pub fn relative_error(n: u32, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("a must be non-negative, got {a}")));
    }
    Ok(a / (f64::from(n) + a))
}
