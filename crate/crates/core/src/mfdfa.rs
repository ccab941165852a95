//! Multifractal detrended fluctuation analysis.
//!
//! The series is integrated into a demeaned profile, cut into `N_s = ⌊N/s⌋`
//! non-overlapping segments of length `s` from the start and again from the
//! end (so `2N_s` segments in total), and each segment is detrended with an
//! order-`m` least-squares polynomial. The q-th order fluctuation function is
//! the power mean of the segment variances,
//!
//! ```text
//! F_q(s) = { 1/(2N_s) Σ_ν [F²(ν,s)]^{q/2} }^{1/q},   F_0(s) = exp{ 1/(4N_s) Σ_ν ln F²(ν,s) }
//! ```
//!
//! and the generalized Hurst exponent `h(q)` is the OLS slope of `ln F_q(s)`
//! against `ln s`.
//!
//! Segments whose detrended variance vanishes (to rounding) are excluded
//! from every power mean and counted in
//! [`FluctuationSurface::zero_variance_segments`].

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance used when matching q values by identity.
pub const Q_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfdfaConfig {
    pub q_values: Vec<f64>,
    /// Segment lengths, strictly increasing.
    pub scales: Vec<usize>,
    /// Order `m` of the detrending polynomial.
    pub detrend_order: usize,
    /// Inclusive `[s_min, s_max]` used by the log-log regression; both ends
    /// must be members of `scales`.
    pub fit_range: (usize, usize),
}

impl MfdfaConfig {
    pub const DEFAULT_MIN_SCALE: usize = 10;
    pub const DEFAULT_SCALE_COUNT: usize = 20;

    /// `{−3, −2.5, …, 3}`.
    pub fn default_q_grid() -> Vec<f64> {
        (-6..=6).map(|i| f64::from(i) * 0.5).collect()
    }

    /// Up to `count` integer scales, logarithmically spaced over `[min, max]`,
    /// deduplicated after rounding.
    pub fn log_spaced_scales(min: usize, max: usize, count: usize) -> Vec<usize> {
        if max <= min || count < 2 {
            return vec![min];
        }
        let ratio = (max as f64 / min as f64).ln();
        let mut scales: Vec<usize> = (0..count)
            .map(|k| {
                let t = k as f64 / (count - 1) as f64;
                ((min as f64) * (ratio * t).exp()).round() as usize
            })
            .map(|s| s.clamp(min, max))
            .collect();
        scales.dedup();
        scales
    }

    /// Default configuration for a series of length `n`: default q grid,
    /// order-1 detrending, ~20 log-spaced scales in `[10, ⌊n/4⌋]` and the full
    /// scale set as fit range.
    pub fn for_length(n: usize) -> Result<Self> {
        Self::with_order(n, 1)
    }

    pub fn with_order(n: usize, detrend_order: usize) -> Result<Self> {
        let min = Self::DEFAULT_MIN_SCALE.max(detrend_order + 2);
        let max = n / 4;
        if max < min {
            return Err(Error::InsufficientData(format!(
                "series of length {n} is too short for scales starting at {min}"
            )));
        }
        let scales = Self::log_spaced_scales(min, max, Self::DEFAULT_SCALE_COUNT);
        if scales.len() < 3 {
            return Err(Error::InsufficientData(format!(
                "series of length {n} yields only {} distinct scales",
                scales.len()
            )));
        }
        let fit_range = (scales[0], scales[scales.len() - 1]);
        Ok(Self {
            q_values: Self::default_q_grid(),
            scales,
            detrend_order,
            fit_range,
        })
    }

    /// Checks the configuration against a series of length `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.detrend_order == 0 {
            return Err(Error::arg("detrend order must be at least 1"));
        }
        if let Some(q) = self.q_values.iter().find(|q| !q.is_finite()) {
            return Err(Error::arg(format!("non-finite q value {q}")));
        }
        if self.scales.is_empty() {
            return Err(Error::arg("scale list is empty"));
        }
        if self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::arg("scales must be strictly increasing"));
        }
        let min_scale = self.detrend_order + 2;
        if self.scales[0] < min_scale {
            return Err(Error::arg(format!(
                "scale {} is below m + 2 = {min_scale}",
                self.scales[0]
            )));
        }
        let largest = self.scales[self.scales.len() - 1];
        if largest > n / 4 {
            return Err(Error::arg(format!(
                "largest scale {largest} exceeds ⌊N/4⌋ = {} for N = {n}",
                n / 4
            )));
        }
        let (lo, hi) = self.fit_range;
        if lo > hi || !self.scales.contains(&lo) || !self.scales.contains(&hi) {
            return Err(Error::arg(format!(
                "fit range [{lo}, {hi}] must be an ordered pair of configured scales"
            )));
        }
        Ok(())
    }
}

/// `Y(i) = Σ_{j≤i} (x_j − ⟨x⟩)`.
pub fn profile(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "profile needs at least 2 values, got {}",
            series.len()
        )));
    }
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    Ok(series
        .iter()
        .scan(0.0, |acc, &x| {
            *acc += x - mean;
            Some(*acc)
        })
        .collect())
}

/// Orthonormal polynomial basis of degree `≤ m` on `s` equispaced points.
struct DetrendBasis {
    vectors: Vec<Vec<f64>>,
}

impl DetrendBasis {
    fn new(s: usize, m: usize) -> Self {
        let half = (s as f64 - 1.0) / 2.0;
        let x: Vec<f64> = (0..s).map(|i| (i as f64 - half) / half).collect();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        for degree in 0..=m {
            let mut v: Vec<f64> = x.iter().map(|&xi| xi.powi(degree as i32)).collect();
            // Two Gram-Schmidt passes keep the basis orthogonal to rounding.
            for _ in 0..2 {
                for b in &vectors {
                    let c = dot(b, &v);
                    v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
                }
            }
            let norm = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|vi| *vi /= norm);
            vectors.push(v);
        }
        Self { vectors }
    }

    /// Mean squared residual of the least-squares polynomial fit; exactly zero
    /// when the residual is at rounding level relative to the segment.
    fn residual_variance(&self, segment: &[f64], residual: &mut Vec<f64>) -> f64 {
        residual.clear();
        residual.extend_from_slice(segment);
        for b in &self.vectors {
            let c = dot(b, residual);
            residual.iter_mut().zip(b).for_each(|(r, bi)| *r -= c * bi);
        }
        let s = segment.len() as f64;
        let f2 = residual.iter().map(|r| r * r).sum::<f64>() / s;
        let scale = segment.iter().fold(0.0f64, |m, y| m.max(y.abs()));
        let floor = 1e3 * f64::EPSILON * scale;
        if f2 <= floor * floor {
            0.0
        } else {
            f2
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn segment_variances_with(y: &[f64], s: usize, basis: &DetrendBasis) -> Vec<f64> {
    let n = y.len();
    let ns = n / s;
    let mut out = Vec::with_capacity(2 * ns);
    let mut scratch = Vec::with_capacity(s);
    for v in 0..ns {
        out.push(basis.residual_variance(&y[v * s..(v + 1) * s], &mut scratch));
    }
    for v in 0..ns {
        out.push(basis.residual_variance(&y[n - (v + 1) * s..n - v * s], &mut scratch));
    }
    out
}

/// Detrended variances `F²(ν, s)` of the `2N_s` segments of profile `y`:
/// the first `N_s` taken from the start, the rest from the end.
pub fn segment_variances(y: &[f64], s: usize, detrend_order: usize) -> Result<Vec<f64>> {
    if detrend_order == 0 {
        return Err(Error::arg("detrend order must be at least 1"));
    }
    if s < detrend_order + 2 {
        return Err(Error::arg(format!(
            "scale {s} is below m + 2 = {}",
            detrend_order + 2
        )));
    }
    if s > y.len() {
        return Err(Error::InsufficientData(format!(
            "scale {s} exceeds profile length {}",
            y.len()
        )));
    }
    let basis = DetrendBasis::new(s, detrend_order);
    Ok(segment_variances_with(y, s, &basis))
}

/// Power mean of order `q` of `sqrt(f2)` over positive entries, evaluated in
/// the log domain.
fn power_mean(log_f2: &[f64], q: f64) -> f64 {
    let count = log_f2.len() as f64;
    if q.abs() < Q_MATCH_TOL {
        return (log_f2.iter().sum::<f64>() / (2.0 * count)).exp();
    }
    let half_q = q / 2.0;
    let peak = log_f2
        .iter()
        .map(|l| half_q * l)
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = log_f2.iter().map(|l| (half_q * l - peak).exp()).sum();
    ((peak + (sum / count).ln()) / q).exp()
}

/// `F_q(s)` over a `(q, s)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationSurface {
    pub q_values: Vec<f64>,
    pub scales: Vec<usize>,
    /// `values[i][j] = F_{q_i}(s_j)`.
    pub values: Vec<Vec<f64>>,
    pub series_length: usize,
    pub detrend_order: usize,
    pub fit_range: (usize, usize),
    /// Total segments `2N_s` per scale.
    pub segments: Vec<usize>,
    /// Segments with vanishing detrended variance per scale, excluded from
    /// every mean.
    pub zero_variance_segments: Vec<usize>,
}

impl FluctuationSurface {
    /// Wraps externally computed `F_q(s)` values.
    pub fn from_values(
        q_values: Vec<f64>,
        scales: Vec<usize>,
        values: Vec<Vec<f64>>,
        fit_range: (usize, usize),
    ) -> Result<Self> {
        if values.len() != q_values.len() || values.iter().any(|row| row.len() != scales.len()) {
            return Err(Error::arg("surface shape does not match q and scale lists"));
        }
        if values
            .iter()
            .flatten()
            .any(|v| !(*v > 0.0 && v.is_finite()))
        {
            return Err(Error::arg("fluctuation values must be positive and finite"));
        }
        let k = scales.len();
        Ok(Self {
            q_values,
            scales,
            values,
            series_length: 0,
            detrend_order: 0,
            fit_range,
            segments: vec![0; k],
            zero_variance_segments: vec![0; k],
        })
    }

    /// CSV `q,s,Fq`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "q,s,Fq")?;
        for (q, row) in self.q_values.iter().zip(&self.values) {
            for (s, f) in self.scales.iter().zip(row) {
                writeln!(out, "{q},{s},{f}")?;
            }
        }
        Ok(())
    }

    pub fn total_zero_variance_segments(&self) -> usize {
        self.zero_variance_segments.iter().sum()
    }
}

/// Computes `F_q(s)` for every configured `q` and `s`. Scales are processed
/// in parallel; each one is summed in a fixed order, so results do not depend
/// on scheduling.
pub fn fluctuation_function(series: &[f64], config: &MfdfaConfig) -> Result<FluctuationSurface> {
    config.validate(series.len())?;
    let y = profile(series)?;
    let m = config.detrend_order;

    let per_scale: Vec<Result<(Vec<f64>, usize, usize)>> = config
        .scales
        .par_iter()
        .map(|&s| {
            let basis = DetrendBasis::new(s, m);
            let f2 = segment_variances_with(&y, s, &basis);
            let log_f2: Vec<f64> = f2.iter().filter(|&&v| v > 0.0).map(|v| v.ln()).collect();
            if log_f2.is_empty() {
                return Err(Error::UndefinedFluctuation { scale: s });
            }
            let zeros = f2.len() - log_f2.len();
            let column = config
                .q_values
                .iter()
                .map(|&q| power_mean(&log_f2, q))
                .collect();
            Ok((column, f2.len(), zeros))
        })
        .collect();

    let mut columns = Vec::with_capacity(config.scales.len());
    let mut segments = Vec::with_capacity(config.scales.len());
    let mut zero_variance_segments = Vec::with_capacity(config.scales.len());
    for r in per_scale {
        let (column, total, zeros) = r?;
        columns.push(column);
        segments.push(total);
        zero_variance_segments.push(zeros);
    }
    let values = (0..config.q_values.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    if zero_variance_segments.iter().any(|&z| z > 0) {
        log::debug!("zero-variance segments per scale: {zero_variance_segments:?}");
    }

    Ok(FluctuationSurface {
        q_values: config.q_values.clone(),
        scales: config.scales.clone(),
        values,
        series_length: series.len(),
        detrend_order: m,
        fit_range: config.fit_range,
        segments,
        zero_variance_segments,
    })
}

/// Ordinary least-squares line with slope diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

/// OLS of `y` on `x`; needs at least three points and non-constant `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let k = x.len();
    if k != y.len() {
        return Err(Error::arg("x and y lengths differ"));
    }
    if k < 3 {
        return Err(Error::FitFailure(format!(
            "need at least 3 points for a slope with error, got {k}"
        )));
    }
    let kf = k as f64;
    let mx = x.iter().sum::<f64>() / kf;
    let my = y.iter().sum::<f64>() / kf;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let syy: f64 = y.iter().map(|yi| (yi - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::FitFailure("regressor is constant".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - intercept - slope * xi).powi(2))
        .sum();
    let slope_stderr = (ssr / (kf - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 {
        (1.0 - ssr / syy).max(0.0)
    } else {
        1.0
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhePoint {
    pub q: f64,
    pub h: f64,
    pub stderr: f64,
    pub r2: f64,
}

/// Generalized Hurst exponents `h(q)` with regression diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GheCurve {
    pub points: Vec<GhePoint>,
    pub fit_range: (usize, usize),
}

impl GheCurve {
    /// Curve from `(q, h)` pairs with zero standard errors.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self {
            points: pairs
                .iter()
                .map(|&(q, h)| GhePoint {
                    q,
                    h,
                    stderr: 0.0,
                    r2: 1.0,
                })
                .collect(),
            fit_range: (0, 0),
        }
    }

    pub fn point(&self, q: f64) -> Option<&GhePoint> {
        self.points.iter().find(|p| (p.q - q).abs() <= Q_MATCH_TOL)
    }

    pub fn h(&self, q: f64) -> Option<f64> {
        self.point(q).map(|p| p.h)
    }

    /// Whether `h(q)` is non-increasing in `q` up to `slack`.
    pub fn is_non_increasing(&self, slack: f64) -> bool {
        let mut pts: Vec<&GhePoint> = self.points.iter().collect();
        pts.sort_by(|a, b| a.q.total_cmp(&b.q));
        pts.windows(2).all(|w| w[1].h <= w[0].h + slack)
    }

    /// CSV `q,h,stderr,r2`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "q,h,stderr,r2")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.q, p.h, p.stderr, p.r2)?;
        }
        Ok(())
    }
}

/// Slopes of `ln F_q(s)` against `ln s` over the surface's fit range.
pub fn generalized_hurst(surface: &FluctuationSurface) -> Result<GheCurve> {
    let (lo, hi) = surface.fit_range;
    let idx: Vec<usize> = surface
        .scales
        .iter()
        .enumerate()
        .filter(|(_, &s)| s >= lo && s <= hi)
        .map(|(i, _)| i)
        .collect();
    if idx.len() < 3 {
        return Err(Error::FitFailure(format!(
            "only {} scale(s) inside fit range [{lo}, {hi}]",
            idx.len()
        )));
    }
    let x: Vec<f64> = idx
        .iter()
        .map(|&i| (surface.scales[i] as f64).ln())
        .collect();
    let points = surface
        .q_values
        .iter()
        .zip(&surface.values)
        .map(|(&q, row)| {
            let y: Vec<f64> = idx.iter().map(|&i| row[i].ln()).collect();
            let fit = linear_fit(&x, &y)?;
            Ok(GhePoint {
                q,
                h: fit.slope,
                stderr: fit.slope_stderr,
                r2: fit.r_squared,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GheCurve {
        points,
        fit_range: surface.fit_range,
    })
}

/// Surface and curve in one call.
pub fn analyze(series: &[f64], config: &MfdfaConfig) -> Result<(FluctuationSurface, GheCurve)> {
    let surface = fluctuation_function(series, config)?;
    let curve = generalized_hurst(&surface)?;
    Ok((surface, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn profile_examples() {
        assert_eq!(profile(&[1.0, -1.0]).unwrap(), vec![1.0, 0.0]);
        assert!(profile(&[3.5; 7]).unwrap().iter().all(|&y| y == 0.0));
        assert_eq!(profile(&[1.0, 2.0, 3.0]).unwrap(), vec![-1.0, -1.0, 0.0]);
        assert!(profile(&[1.0]).is_err());
    }

    #[test]
    fn profile_ends_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..10_000).map(|_| rng.random::<f64>() * 100.0).collect();
        let y = profile(&x).unwrap();
        assert!(y[y.len() - 1].abs() < 1e-8);
    }

    #[test]
    fn polynomial_trends_are_absorbed() {
        let linear: Vec<f64> = (1..=100).map(|i| 3.0 * i as f64 - 7.0).collect();
        for s in [3, 7, 10, 25] {
            assert!(segment_variances(&linear, s, 1)
                .unwrap()
                .iter()
                .all(|&v| v == 0.0));
        }
        let quad: Vec<f64> = (1..=100).map(|i| (i * i) as f64).collect();
        for s in [4, 9, 20] {
            assert!(segment_variances(&quad, s, 2)
                .unwrap()
                .iter()
                .all(|&v| v == 0.0));
        }
        assert!(segment_variances(&quad, 9, 1)
            .unwrap()
            .iter()
            .all(|&v| v > 0.0));
    }

    #[test]
    fn segment_bookkeeping() {
        // Profile with a single bump at index 1 (0-based) is seen only by the
        // forward segment covering 1..=3; the backward segments start at 2.
        let mut y = vec![0.0; 10];
        y[0] = 5.0;
        let f2 = segment_variances(&y, 3, 1).unwrap();
        assert_eq!(f2.len(), 6);
        assert!(f2[0] > 0.0);
        assert!(f2[1..].iter().all(|&v| v == 0.0));
        let mut y = vec![0.0; 10];
        y[9] = 5.0;
        let f2 = segment_variances(&y, 3, 1).unwrap();
        assert!(f2[..3].iter().all(|&v| v == 0.0));
        assert!(f2[3] > 0.0);
        assert!(f2[4..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn segment_variance_matches_direct_fit() {
        // Independent route: closed-form simple linear regression on x = 1..s.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let y: Vec<f64> = (0..40).map(|_| rng.random::<f64>()).collect();
        let s = 8;
        let f2 = segment_variances(&y, s, 1).unwrap();
        for (v, seg) in y.chunks_exact(s).enumerate() {
            let x: Vec<f64> = (1..=s).map(|i| i as f64).collect();
            let fit = linear_fit(&x, seg).unwrap();
            let direct = seg
                .iter()
                .zip(&x)
                .map(|(yi, xi)| (yi - fit.intercept - fit.slope * xi).powi(2))
                .sum::<f64>()
                / s as f64;
            assert!(close(f2[v], direct, 1e-14));
        }
    }

    #[test]
    fn scale_argument_errors() {
        let y = vec![1.0; 10];
        assert!(matches!(
            segment_variances(&y, 2, 1),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            segment_variances(&y, 11, 1),
            Err(Error::InsufficientData(_))
        ));
        assert!(segment_variances(&y, 5, 0).is_err());
    }

    #[test]
    fn power_mean_collapses() {
        let single = [4f64.ln()];
        assert!(close(power_mean(&single, 2.0), 2.0, 1e-14));
        let c = 0.37f64;
        let same = vec![c.ln(); 12];
        for q in MfdfaConfig::default_q_grid() {
            assert!(close(power_mean(&same, q), c.sqrt(), 1e-14), "q = {q}");
        }
    }

    #[test]
    fn q2_is_root_mean_square() {
        let f2 = [0.5f64, 2.0, 1.5, 0.1];
        let logs: Vec<f64> = f2.iter().map(|v| v.ln()).collect();
        let rms = (f2.iter().sum::<f64>() / 4.0).sqrt();
        assert!(close(power_mean(&logs, 2.0), rms, 1e-14));
    }

    #[test]
    fn exact_power_law_surface() {
        let scales: Vec<usize> = vec![10, 20, 40, 80, 160];
        let q = vec![-2.0, 0.0, 2.0];
        let row: Vec<f64> = scales.iter().map(|&s| (s as f64).powf(0.3)).collect();
        let surface = FluctuationSurface::from_values(
            q,
            scales,
            vec![row.clone(), row.clone(), row],
            (10, 160),
        )
        .unwrap();
        let curve = generalized_hurst(&surface).unwrap();
        for p in &curve.points {
            assert!(close(p.h, 0.3, 1e-12));
            assert!(p.stderr < 1e-12);
            assert!(close(p.r2, 1.0, 1e-12));
        }
    }

    #[test]
    fn too_few_scales_in_fit_range() {
        let surface = FluctuationSurface::from_values(
            vec![2.0],
            vec![10, 20, 40],
            vec![vec![1.0, 2.0, 3.0]],
            (10, 20),
        )
        .unwrap();
        assert!(matches!(
            generalized_hurst(&surface),
            Err(Error::FitFailure(_))
        ));
    }

    #[test]
    fn config_validation() {
        let cfg = MfdfaConfig::for_length(1000).unwrap();
        assert_eq!(cfg.scales[0], 10);
        assert_eq!(*cfg.scales.last().unwrap(), 250);
        assert!(cfg.scales.len() >= 15);
        assert!(cfg.validate(1000).is_ok());
        assert!(cfg.validate(999).is_err());
        let mut bad = cfg.clone();
        bad.fit_range = (11, 250);
        assert!(bad.validate(1000).is_err());
        let mut bad = cfg.clone();
        bad.scales.swap(0, 1);
        assert!(bad.validate(1000).is_err());
        let mut bad = cfg;
        bad.detrend_order = 9;
        assert!(bad.validate(1000).is_err());
        assert!(MfdfaConfig::for_length(30).is_err());
    }

    #[test]
    fn all_zero_segments_name_the_scale() {
        let cfg = MfdfaConfig {
            q_values: vec![2.0],
            scales: vec![4, 5, 6],
            detrend_order: 1,
            fit_range: (4, 6),
        };
        // A constant series has an identically zero profile.
        let err = fluctuation_function(&[1.0; 40], &cfg).unwrap_err();
        assert!(matches!(err, Error::UndefinedFluctuation { scale: 4 }));
    }

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
    }

    #[test]
    fn profile_reversal_gives_same_variance_multiset() {
        let y = profile(&noise(5, 1003)).unwrap();
        let mut rev = y.clone();
        rev.reverse();
        for s in [10, 37, 100] {
            let mut a = segment_variances(&y, s, 2).unwrap();
            let mut b = segment_variances(&rev, s, 2).unwrap();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            for (x, z) in a.iter().zip(&b) {
                assert!(close(*x, *z, 1e-12 * x.abs().max(1e-30)));
            }
        }
    }

    #[test]
    fn reversed_series_gives_nearly_same_exponents() {
        let x = noise(11, 4096);
        let mut rev = x.clone();
        rev.reverse();
        let cfg = MfdfaConfig::for_length(x.len()).unwrap();
        let (_, a) = analyze(&x, &cfg).unwrap();
        let (_, b) = analyze(&rev, &cfg).unwrap();
        for (p, r) in a.points.iter().zip(&b.points) {
            assert!(close(p.h, r.h, 0.02), "q={} {} vs {}", p.q, p.h, r.h);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn affine_invariance(seed in 0u64..1000, alpha in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0], beta in -100.0f64..100.0) {
            let x = noise(seed, 600);
            let y: Vec<f64> = x.iter().map(|v| alpha * v + beta).collect();
            let cfg = MfdfaConfig::for_length(x.len()).unwrap();
            let (_, a) = analyze(&x, &cfg).unwrap();
            let (_, b) = analyze(&y, &cfg).unwrap();
            for (p, r) in a.points.iter().zip(&b.points) {
                prop_assert!((p.h - r.h).abs() < 1e-9);
            }
        }

        #[test]
        fn fluctuation_monotone_in_q(seed in 0u64..1000, m in 1usize..4) {
            let x = noise(seed, 800);
            let cfg = MfdfaConfig::with_order(x.len(), m).unwrap();
            let surface = fluctuation_function(&x, &cfg).unwrap();
            for j in 0..surface.scales.len() {
                for i in 1..surface.q_values.len() {
                    let lo = surface.values[i - 1][j];
                    let hi = surface.values[i][j];
                    prop_assert!(hi >= lo * (1.0 - 1e-12));
                }
            }
            prop_assert!(surface.values.iter().flatten().all(|&v| v > 0.0));
        }
    }
}
