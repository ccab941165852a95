//! Finite-sample ansatz `H(Δ) = H₀ · n/(n + a)` with `n = 1440/Δ`, fitted
//! across a sweep of sampling periods.
//!
//! The fit runs Gauss-Newton with backtracking in `(H₀, α)` where `a = e^α`,
//! from the fixed starts `a ∈ {0.5, 1, 2, 4, 8, 16}`. For each start `H₀` is
//! initialised by its closed-form least-squares value given `a`. The lowest
//! residual wins; ties go to the smaller `a`.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{samples_per_day, Error, Result};

pub const START_A: [f64; 6] = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
pub const MAX_ITERATIONS: usize = 200;
pub const RELATIVE_TOLERANCE: f64 = 1e-12;
/// Fitted `a` below this is reported as sitting on the positivity boundary.
pub const BOUNDARY_A: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub delta_minutes: u32,
    pub n: u32,
    pub h2: f64,
    pub h2_stderr: Option<f64>,
}

/// Measured Hurst exponents over distinct sampling periods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySweep {
    points: Vec<SweepPoint>,
}

impl FrequencySweep {
    /// Builds a sweep from `(Δ, h2, stderr)` triples; `n` is derived from Δ.
    pub fn new(entries: impl IntoIterator<Item = (u32, f64, Option<f64>)>) -> Result<Self> {
        let mut points = Vec::new();
        for (delta, h2, stderr) in entries {
            let n = samples_per_day(delta)?;
            if points.iter().any(|p: &SweepPoint| p.delta_minutes == delta) {
                return Err(Error::arg(format!("duplicate sampling period Δ = {delta}")));
            }
            if !h2.is_finite() {
                return Err(Error::arg(format!("non-finite h2 at Δ = {delta}")));
            }
            if let Some(se) = stderr {
                if !(se >= 0.0 && se.is_finite()) {
                    return Err(Error::arg(format!("invalid stderr {se} at Δ = {delta}")));
                }
            }
            points.push(SweepPoint {
                delta_minutes: delta,
                n,
                h2,
                h2_stderr: stderr,
            });
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[SweepPoint] {
        &self.points
    }

    /// Reads `delta,h2[,stderr]` rows; a non-numeric first line is taken as a
    /// header.
    pub fn read_csv<R: BufRead>(source: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse_err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let delta = match fields[0].parse::<u32>() {
                Ok(d) => d,
                Err(_) if entries.is_empty() && idx == 0 => continue,
                Err(e) => return Err(parse_err(format!("bad delta {:?}: {e}", fields[0]))),
            };
            if !(2..=3).contains(&fields.len()) {
                return Err(parse_err(format!(
                    "expected 2 or 3 fields, got {}",
                    fields.len()
                )));
            }
            let h2 = fields[1]
                .parse::<f64>()
                .map_err(|e| parse_err(format!("bad h2 {:?}: {e}", fields[1])))?;
            let stderr = match fields.get(2) {
                Some(s) if !s.is_empty() => Some(
                    s.parse::<f64>()
                        .map_err(|e| parse_err(format!("bad stderr {s:?}: {e}")))?,
                ),
                _ => None,
            };
            entries.push((delta, h2, stderr));
        }
        if entries.is_empty() {
            return Err(Error::EmptyInput("sweep file has no rows".into()));
        }
        Self::new(entries)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitOptions {
    /// Sampling periods left out of the fit.
    pub exclude: Vec<u32>,
    /// Ignore stderrs even when every retained point carries one.
    pub force_unweighted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzFit {
    pub h0: f64,
    pub a: f64,
    pub h0_stderr: f64,
    pub a_stderr: f64,
    /// Root mean square of `h2 − H(Δ)` over the fitted points.
    pub residual_rms: f64,
    pub excluded_deltas: Vec<u32>,
    pub points_used: usize,
    pub weighted: bool,
    /// `a` ended at the positivity boundary.
    pub boundary_warning: bool,
    pub iterations: usize,
}

impl AnsatzFit {
    /// Relative bias `a/(n+a)` at sampling period Δ.
    pub fn relative_error(&self, delta_minutes: u32) -> Result<f64> {
        crate::finite_sample::relative_error(samples_per_day(delta_minutes)?, self.a)
    }
}

/// `H₀ · n/(n + a)`.
pub fn ansatz(h0: f64, a: f64, n: f64) -> f64 {
    h0 * n / (n + a)
}

/// Forward evaluation of a fitted ansatz at sampling period Δ.
pub fn predict_h(fit: &AnsatzFit, delta_minutes: u32) -> Result<f64> {
    let n = samples_per_day(delta_minutes)?;
    Ok(ansatz(fit.h0, fit.a, f64::from(n)))
}

struct Problem {
    n: Vec<f64>,
    h: Vec<f64>,
    /// Square roots of the weights.
    sw: Vec<f64>,
}

impl Problem {
    fn ssr(&self, h0: f64, a: f64) -> f64 {
        self.n
            .iter()
            .zip(&self.h)
            .zip(&self.sw)
            .map(|((&n, &h), &w)| (w * (h - ansatz(h0, a, n))).powi(2))
            .sum()
    }

    /// Closed-form `H₀` minimising the residual for fixed `a`.
    fn best_h0(&self, a: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((&n, &h), &w) in self.n.iter().zip(&self.h).zip(&self.sw) {
            let g = n / (n + a);
            num += w * w * h * g;
            den += w * w * g * g;
        }
        num / den
    }

    /// Gauss-Newton in `(H₀, ln a)` from the given start.
    fn solve(&self, a_start: f64) -> Option<(f64, f64, f64, usize)> {
        let mut h0 = self.best_h0(a_start);
        let mut alpha = a_start.ln();
        let mut ssr = self.ssr(h0, alpha.exp());
        let scale: f64 = self
            .h
            .iter()
            .zip(&self.sw)
            .map(|(h, w)| (w * h).powi(2))
            .sum();
        let mut iterations = 0;
        while iterations < MAX_ITERATIONS {
            iterations += 1;
            if ssr <= 1e-30 * scale {
                break;
            }
            let a = alpha.exp();
            // Normal equations for the 2x2 step.
            let (mut j11, mut j12, mut j22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for ((&n, &h), &w) in self.n.iter().zip(&self.h).zip(&self.sw) {
                let d_h0 = w * n / (n + a);
                let d_alpha = -w * h0 * n * a / (n + a).powi(2);
                let r = w * (h - ansatz(h0, a, n));
                j11 += d_h0 * d_h0;
                j12 += d_h0 * d_alpha;
                j22 += d_alpha * d_alpha;
                g1 += d_h0 * r;
                g2 += d_alpha * r;
            }
            let det = j11 * j22 - j12 * j12;
            if !(det.abs() > 1e-300) {
                break;
            }
            let step_h0 = (j22 * g1 - j12 * g2) / det;
            let step_alpha = (j11 * g2 - j12 * g1) / det;

            let mut t = 1.0;
            let mut improved = None;
            for _ in 0..40 {
                let cand_h0 = h0 + t * step_h0;
                let cand_alpha = alpha + t * step_alpha;
                let cand = self.ssr(cand_h0, cand_alpha.exp());
                if cand.is_finite() && cand < ssr {
                    improved = Some((cand_h0, cand_alpha, cand));
                    break;
                }
                t *= 0.5;
            }
            let Some((nh0, nalpha, nssr)) = improved else {
                break;
            };
            let change = (ssr - nssr) / ssr;
            h0 = nh0;
            alpha = nalpha;
            ssr = nssr;
            if change < RELATIVE_TOLERANCE {
                break;
            }
        }
        let a = alpha.exp();
        (h0.is_finite() && a.is_finite() && ssr.is_finite()).then_some((h0, a, ssr, iterations))
    }
}

/// Nonlinear least squares of the sweep against the ansatz.
pub fn fit_ansatz(sweep: &FrequencySweep, options: &FitOptions) -> Result<AnsatzFit> {
    let used: Vec<&SweepPoint> = sweep
        .points
        .iter()
        .filter(|p| !options.exclude.contains(&p.delta_minutes))
        .collect();
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "ansatz fit needs at least 3 sampling periods, got {}",
            used.len()
        )));
    }
    if let Some(p) = used.iter().find(|p| !(p.h2 > 0.0)) {
        return Err(Error::Domain(format!(
            "h2 must be positive, got {} at Δ = {}",
            p.h2, p.delta_minutes
        )));
    }
    let weighted = !options.force_unweighted
        && used
            .iter()
            .all(|p| matches!(p.h2_stderr, Some(se) if se > 0.0));
    let problem = Problem {
        n: used.iter().map(|p| f64::from(p.n)).collect(),
        h: used.iter().map(|p| p.h2).collect(),
        sw: used
            .iter()
            .map(|p| {
                if weighted {
                    1.0 / p.h2_stderr.unwrap()
                } else {
                    1.0
                }
            })
            .collect(),
    };

    let runs: Vec<Option<(f64, f64, f64, usize)>> =
        START_A.par_iter().map(|&a| problem.solve(a)).collect();
    let mut best: Option<(f64, f64, f64, usize)> = None;
    for run in runs.into_iter().flatten() {
        best = match best {
            None => Some(run),
            Some(b) => {
                let tie = (run.2 - b.2).abs() <= RELATIVE_TOLERANCE * b.2.max(f64::MIN_POSITIVE);
                if run.2 < b.2 && !tie || tie && run.1 < b.1 {
                    Some(run)
                } else {
                    Some(b)
                }
            }
        };
    }
    let Some((h0, a, ssr, iterations)) = best else {
        return Err(Error::FitFailure(format!(
            "no start converged (starts a = {START_A:?})"
        )));
    };
    if !(h0 > 0.0 && h0 < 1.0) {
        return Err(Error::FitFailure(format!(
            "fitted H0 = {h0} outside (0, 1) with a = {a}"
        )));
    }

    // Standard errors from the Jacobian in (H0, a) at the optimum.
    let m = problem.n.len() as f64;
    let (mut j11, mut j12, mut j22) = (0.0, 0.0, 0.0);
    for (&n, &w) in problem.n.iter().zip(&problem.sw) {
        let d_h0 = w * n / (n + a);
        let d_a = -w * h0 * n / (n + a).powi(2);
        j11 += d_h0 * d_h0;
        j12 += d_h0 * d_a;
        j22 += d_a * d_a;
    }
    let det = j11 * j22 - j12 * j12;
    if !(det > 0.0) {
        return Err(Error::FitFailure("singular Jacobian at the optimum".into()));
    }
    let sigma2 = ssr / (m - 2.0);
    let h0_stderr = (sigma2 * j22 / det).sqrt();
    let a_stderr = (sigma2 * j11 / det).sqrt();

    let residual_rms = (problem
        .n
        .iter()
        .zip(&problem.h)
        .map(|(&n, &h)| (h - ansatz(h0, a, n)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    let boundary_warning = a < BOUNDARY_A;
    if boundary_warning {
        log::warn!("ansatz parameter a = {a:e} reached the positivity boundary");
    }

    let mut excluded_deltas: Vec<u32> = sweep
        .points
        .iter()
        .map(|p| p.delta_minutes)
        .filter(|d| options.exclude.contains(d))
        .collect();
    excluded_deltas.sort_unstable();
    Ok(AnsatzFit {
        h0,
        a,
        h0_stderr,
        a_stderr,
        residual_rms,
        excluded_deltas,
        points_used: used.len(),
        weighted,
        boundary_warning,
        iterations,
    })
}

impl AnsatzFit {
    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}
