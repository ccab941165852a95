//! Rolling-window experiment: per-Δ log-RV increments, MFDFA, ansatz fits
//! and multifractality metrics for every window, plus report emission.
//!
//! Windows are calendar based. Window `w` covers the days
//! `[start + w·step, start + w·step + window_days)`, so a span of `D` days
//! yields `⌊(D − window_days)/step⌋ + 1` windows. Windows and sampling periods
//! are evaluated on a rayon pool; every reduction restores input order, so the
//! report does not depend on the number of workers.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Days, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::market_data::{
    intraday_log_returns, resample_prices, DaySpan, ResampleOptions, TickSeries,
};
use crate::mfdfa::{self, GheCurve, MfdfaConfig};
use crate::multifractal_metrics;
use crate::realized_volatility::{compute_daily_rv, log_increments, RvSeries, ZeroPolicy};
use crate::scaling::{fit_ansatz, AnsatzFit, FitOptions, FrequencySweep};
use crate::{day_divisors, samples_per_day, Error, ErrorKind, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RollingSpec {
    pub window_days: u32,
    pub step_days: u32,
    /// Restricts the analysed span; defaults to the data's own span.
    pub date_range: Option<DaySpan>,
}

impl Default for RollingSpec {
    fn default() -> Self {
        Self {
            window_days: 2922,
            step_days: 5,
            date_range: None,
        }
    }
}

impl RollingSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.window_days > self.step_days && self.step_days > 0) {
            return Err(Error::arg(format!(
                "need window_days > step_days > 0, got {} and {}",
                self.window_days, self.step_days
            )));
        }
        Ok(())
    }

    /// `⌊(total − window)/step⌋ + 1`, or zero when the span is too short.
    pub fn window_count(&self, total_days: i64) -> usize {
        let window = i64::from(self.window_days);
        if total_days < window {
            0
        } else {
            ((total_days - window) / i64::from(self.step_days) + 1) as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub rolling: RollingSpec,
    pub deltas: Vec<u32>,
    pub reference_delta: u32,
    /// q grid for the reference-Δ curve.
    pub q_values: Vec<f64>,
    /// Fixed scale list; `None` picks log-spaced scales per window length.
    pub scales: Option<Vec<usize>>,
    pub detrend_order: usize,
    pub fit_min: Option<usize>,
    pub fit_max: Option<usize>,
    pub zero_policy: ZeroPolicy,
    pub exclude_deltas: Vec<u32>,
    pub weighted_fit: bool,
    /// `k` of Δh(k) and B₁.
    pub metric_k: f64,
    pub min_coverage: f64,
    /// Worker threads; 0 uses the rayon default. Not part of the report.
    #[serde(skip)]
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            rolling: RollingSpec::default(),
            deltas: day_divisors(),
            reference_delta: 5,
            q_values: MfdfaConfig::default_q_grid(),
            scales: None,
            detrend_order: 1,
            fit_min: None,
            fit_max: None,
            zero_policy: ZeroPolicy::Drop,
            exclude_deltas: Vec::new(),
            weighted_fit: false,
            metric_k: 3.0,
            min_coverage: 0.0,
            workers: 0,
        }
    }
}

/// `auto` for all divisors of 1440, otherwise a comma-separated list.
pub fn parse_deltas(text: &str) -> Result<Vec<u32>> {
    if text.trim().eq_ignore_ascii_case("auto") {
        return Ok(day_divisors());
    }
    let deltas = parse_list::<u32>(text)?;
    for &d in &deltas {
        samples_per_day(d)?;
    }
    Ok(deltas)
}

/// Comma-separated values; an empty string is an empty list.
pub fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| Error::arg(format!("bad list item {s:?}: {e}")))
        })
        .collect()
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| Error::arg(format!("bad value {value:?} for {key}: {e}")))
}

fn parse_date(key: &str, value: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(value, "%Y-%m-%d")
        .map_err(|e| Error::arg(format!("bad date {value:?} for {key}: {e}")))
}

/// `drop` or `floor[:eps]`.
pub fn parse_zero_policy(text: &str) -> Result<ZeroPolicy> {
    let text = text.trim();
    if text == "drop" {
        return Ok(ZeroPolicy::Drop);
    }
    match text.strip_prefix("floor") {
        Some("") => Ok(ZeroPolicy::Floor(ZeroPolicy::DEFAULT_FLOOR)),
        Some(rest) => {
            let eps = parse_value::<f64>("zero_policy", rest.trim_start_matches(':'))?;
            Ok(ZeroPolicy::Floor(eps))
        }
        None => Err(Error::arg(format!(
            "zero policy must be `drop` or `floor[:eps]`, got {text:?}"
        ))),
    }
}

impl PipelineConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "window_days" => self.rolling.window_days = parse_value(key, value)?,
            "step_days" => self.rolling.step_days = parse_value(key, value)?,
            "start_date" | "end_date" => {
                let date = parse_date(key, value)?;
                let mut range = self.rolling.date_range.unwrap_or(DaySpan {
                    start: date,
                    end: date,
                });
                if key.trim() == "start_date" {
                    range.start = date;
                } else {
                    range.end = date;
                }
                self.rolling.date_range = Some(range);
            }
            "deltas" => self.deltas = parse_deltas(value)?,
            "reference_delta" => self.reference_delta = parse_value(key, value)?,
            "q_list" => self.q_values = parse_list(value)?,
            "scales" => {
                self.scales = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(parse_list(value)?)
                }
            }
            "detrend_order" => self.detrend_order = parse_value(key, value)?,
            "fit_min" => self.fit_min = Some(parse_value(key, value)?),
            "fit_max" => self.fit_max = Some(parse_value(key, value)?),
            "zero_policy" => self.zero_policy = parse_zero_policy(value)?,
            "exclude_deltas" => self.exclude_deltas = parse_list(value)?,
            "weighted_fit" => self.weighted_fit = parse_value(key, value)?,
            "metric_k" => self.metric_k = parse_value(key, value)?,
            "min_coverage" => self.min_coverage = parse_value(key, value)?,
            "workers" => self.workers = parse_value(key, value)?,
            other => return Err(Error::arg(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            self.set(key, value).map_err(|e| Error::Parse {
                line: idx + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.rolling.validate()?;
        if self.deltas.is_empty() {
            return Err(Error::arg("no sampling periods configured"));
        }
        for &d in &self.deltas {
            samples_per_day(d)?;
        }
        if !self.deltas.contains(&self.reference_delta) {
            return Err(Error::arg(format!(
                "reference Δ = {} is not among the configured sampling periods",
                self.reference_delta
            )));
        }
        if self.detrend_order == 0 {
            return Err(Error::arg("detrend order must be at least 1"));
        }
        if !(self.metric_k > 0.0) {
            return Err(Error::arg("metric k must be positive"));
        }
        Ok(())
    }

    /// MFDFA configuration for a series of length `n`.
    fn mfdfa_config(&self, n: usize, q_values: Vec<f64>) -> Result<MfdfaConfig> {
        let mut cfg = match &self.scales {
            Some(scales) => {
                let scales = scales.clone();
                let fit_range = (scales[0], scales[scales.len() - 1]);
                MfdfaConfig {
                    q_values: Vec::new(),
                    scales,
                    detrend_order: self.detrend_order,
                    fit_range,
                }
            }
            None => MfdfaConfig::with_order(n, self.detrend_order)?,
        };
        cfg.q_values = q_values;
        if let Some(lo) = self.fit_min {
            cfg.fit_range.0 = lo;
        }
        if let Some(hi) = self.fit_max {
            cfg.fit_range.1 = hi;
        }
        cfg.validate(n)?;
        Ok(cfg)
    }
}

/// Why a report field is absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    InsufficientData,
    InvalidConfig,
    MissingQ,
    ZeroVariance,
    FitFailure,
    NumericFailure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absence {
    pub code: ReasonCode,
    pub detail: String,
}

impl From<&Error> for Absence {
    fn from(e: &Error) -> Self {
        let code = match e {
            Error::InsufficientData(_) | Error::EmptyInput(_) => ReasonCode::InsufficientData,
            Error::UndefinedFluctuation { .. } => ReasonCode::ZeroVariance,
            Error::FitFailure(_) => ReasonCode::FitFailure,
            Error::Argument(_) if e.to_string().contains("no point at q") => ReasonCode::MissingQ,
            _ => match e.kind() {
                ErrorKind::Usage => ReasonCode::InvalidConfig,
                ErrorKind::Data => ReasonCode::InsufficientData,
                ErrorKind::Numeric => ReasonCode::NumericFailure,
            },
        };
        Absence {
            code,
            detail: e.to_string(),
        }
    }
}

fn absence(code: ReasonCode, detail: impl Into<String>) -> Absence {
    Absence {
        code,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta: u32,
    pub n: u32,
    /// Log-RV increments fed to MFDFA.
    pub increments: usize,
    pub dropped_days: usize,
    pub h2: Option<f64>,
    pub h2_stderr: Option<f64>,
    pub r2: Option<f64>,
    pub zero_variance_segments: usize,
    pub absent: Option<Absence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub window_start: NaiveDate,
    /// Last calendar day of the window, inclusive.
    pub window_end: NaiveDate,
    pub reference_delta: u32,
    pub reference_n: u32,
    pub sweep: Vec<DeltaEstimate>,
    pub ansatz: Option<AnsatzFit>,
    pub ansatz_absent: Option<Absence>,
    pub curve: Option<GheCurve>,
    pub curve_absent: Option<Absence>,
    pub delta_h: Option<f64>,
    pub b1: Option<f64>,
    pub b0: Option<f64>,
    pub metrics_absent: Option<Absence>,
    /// Zero-variance segments excluded in the reference-Δ analysis.
    pub reference_zero_variance_segments: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub windows: usize,
    pub mean_delta_h: Option<f64>,
    pub mean_neg_b1: Option<f64>,
    pub mean_h0: Option<f64>,
    pub mean_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub library: String,
    pub version: String,
    pub config: PipelineConfig,
    pub summary: ReportSummary,
    pub windows: Vec<WindowReport>,
}

/// Input to [`run_rolling`].
#[derive(Debug, Clone)]
pub enum PipelineInput {
    Ticks(TickSeries),
    /// Precomputed daily RV, one series per sampling period.
    Rv(Vec<RvSeries>),
}

/// Daily RV series for every configured Δ, computed in parallel.
pub fn build_rv_series(
    ticks: &TickSeries,
    deltas: &[u32],
    span: DaySpan,
    options: &ResampleOptions,
) -> Result<Vec<RvSeries>> {
    deltas
        .par_iter()
        .map(|&d| {
            let grid = resample_prices(ticks, d, span, options)?;
            Ok(compute_daily_rv(&intraday_log_returns(&grid)))
        })
        .collect()
}

fn data_span(series: &[RvSeries]) -> Option<DaySpan> {
    let start = series
        .iter()
        .filter_map(|s| s.points.first())
        .map(|p| p.date)
        .min()?;
    let end = series
        .iter()
        .filter_map(|s| s.points.last())
        .map(|p| p.date)
        .max()?;
    Some(DaySpan { start, end })
}

struct WindowAnalysis {
    estimate: DeltaEstimate,
    curve: Option<std::result::Result<(GheCurve, usize), Error>>,
}

fn analyze_delta(
    rv: &RvSeries,
    from: NaiveDate,
    to: NaiveDate,
    config: &PipelineConfig,
    reference: bool,
) -> WindowAnalysis {
    let delta = rv.delta_minutes;
    let n = crate::MINUTES_PER_DAY / delta;
    let mut estimate = DeltaEstimate {
        delta,
        n,
        increments: 0,
        dropped_days: 0,
        h2: None,
        h2_stderr: None,
        r2: None,
        zero_variance_segments: 0,
        absent: None,
    };
    let window = rv.slice_dates(from, to);
    let increments = match log_increments(&window, config.zero_policy) {
        Ok(v) => v,
        Err(e) => {
            estimate.absent = Some(Absence::from(&e));
            return WindowAnalysis {
                estimate,
                curve: reference.then_some(Err(e)),
            };
        }
    };
    estimate.increments = increments.len();
    estimate.dropped_days = increments.dropped_days.len();
    let series = &increments.values;

    let h2 = config
        .mfdfa_config(series.len(), vec![2.0])
        .and_then(|cfg| mfdfa::analyze(series, &cfg));
    match h2 {
        Ok((surface, curve)) => {
            let p = curve.points[0];
            if p.h.is_finite() && p.stderr.is_finite() && p.r2.is_finite() {
                estimate.h2 = Some(p.h);
                estimate.h2_stderr = Some(p.stderr);
                estimate.r2 = Some(p.r2);
            } else {
                estimate.absent = Some(absence(
                    ReasonCode::NumericFailure,
                    "non-finite Hurst estimate",
                ));
            }
            estimate.zero_variance_segments = surface.total_zero_variance_segments();
        }
        Err(e) => estimate.absent = Some(Absence::from(&e)),
    }

    let curve = reference.then(|| {
        let cfg = config.mfdfa_config(series.len(), config.q_values.clone())?;
        let (surface, curve) = mfdfa::analyze(series, &cfg)?;
        if curve
            .points
            .iter()
            .any(|p| !(p.h.is_finite() && p.stderr.is_finite()))
        {
            return Err(Error::Numeric(
                "non-finite generalized Hurst exponent".into(),
            ));
        }
        Ok((curve, surface.total_zero_variance_segments()))
    });
    WindowAnalysis { estimate, curve }
}

fn analyze_window(series: &[RvSeries], start: NaiveDate, config: &PipelineConfig) -> WindowReport {
    let end_exclusive = start + Days::new(u64::from(config.rolling.window_days));
    let analyses: Vec<WindowAnalysis> = series
        .par_iter()
        .map(|rv| {
            let reference = rv.delta_minutes == config.reference_delta;
            analyze_delta(rv, start, end_exclusive, config, reference)
        })
        .collect();

    let mut report = WindowReport {
        window_start: start,
        window_end: end_exclusive - Days::new(1),
        reference_delta: config.reference_delta,
        reference_n: crate::MINUTES_PER_DAY / config.reference_delta,
        sweep: Vec::with_capacity(analyses.len()),
        ansatz: None,
        ansatz_absent: None,
        curve: None,
        curve_absent: None,
        delta_h: None,
        b1: None,
        b0: None,
        metrics_absent: None,
        reference_zero_variance_segments: 0,
    };

    for a in analyses {
        match a.curve {
            Some(Ok((curve, zeros))) => {
                report.reference_zero_variance_segments = zeros;
                report.curve = Some(curve);
            }
            Some(Err(e)) => report.curve_absent = Some(Absence::from(&e)),
            None => {}
        }
        report.sweep.push(a.estimate);
    }

    let sweep = FrequencySweep::new(
        report
            .sweep
            .iter()
            .filter_map(|e| e.h2.map(|h| (e.delta, h, e.h2_stderr))),
    );
    let fit = sweep.and_then(|s| {
        fit_ansatz(
            &s,
            &FitOptions {
                exclude: config.exclude_deltas.clone(),
                force_unweighted: !config.weighted_fit,
            },
        )
    });
    match fit {
        Ok(f) if f.h0_stderr.is_finite() && f.a_stderr.is_finite() => report.ansatz = Some(f),
        Ok(_) => {
            report.ansatz_absent = Some(absence(
                ReasonCode::NumericFailure,
                "non-finite ansatz standard errors",
            ))
        }
        Err(e) => report.ansatz_absent = Some(Absence::from(&e)),
    }

    match &report.curve {
        Some(curve) => match multifractal_metrics::strength(curve, config.metric_k) {
            Ok(s) => {
                report.delta_h = Some(s.delta_h);
                report.b1 = Some(s.b1);
                report.b0 = Some(s.b0);
            }
            Err(e) => report.metrics_absent = Some(Absence::from(&e)),
        },
        None => {
            report.metrics_absent = Some(absence(
                ReasonCode::InsufficientData,
                "no reference-Δ curve for this window",
            ))
        }
    }
    report
}

/// Runs every window. Per-window failures are recorded as absences; only
/// configuration and span problems abort the run.
pub fn run_rolling(input: &PipelineInput, config: &PipelineConfig) -> Result<Vec<WindowReport>> {
    config.validate()?;
    let run = || -> Result<Vec<WindowReport>> {
        let series: Vec<RvSeries> = match input {
            PipelineInput::Ticks(ticks) => {
                let span = config.rolling.date_range.unwrap_or_else(|| ticks.span());
                build_rv_series(
                    ticks,
                    &config.deltas,
                    span,
                    &ResampleOptions {
                        min_coverage: config.min_coverage,
                    },
                )?
            }
            PipelineInput::Rv(all) => {
                let mut by_delta: BTreeMap<u32, &RvSeries> = BTreeMap::new();
                for s in all {
                    by_delta.insert(s.delta_minutes, s);
                }
                config
                    .deltas
                    .iter()
                    .map(|d| {
                        by_delta.get(d).map(|s| (*s).clone()).ok_or_else(|| {
                            Error::InsufficientData(format!("no RV series for Δ = {d}"))
                        })
                    })
                    .collect::<Result<_>>()?
            }
        };
        let span = match config.rolling.date_range {
            Some(r) => r,
            None => {
                data_span(&series).ok_or_else(|| Error::InsufficientData("no RV data".into()))?
            }
        };
        let total = span.num_days();
        let count = config.rolling.window_count(total);
        if count == 0 {
            return Err(Error::InsufficientData(format!(
                "data span of {total} days is shorter than the {}-day window",
                config.rolling.window_days
            )));
        }
        let step = u64::from(config.rolling.step_days);
        Ok((0..count as u64)
            .into_par_iter()
            .map(|w| analyze_window(&series, span.start + Days::new(w * step), config))
            .collect())
    };
    if config.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::arg(format!("cannot build worker pool: {e}")))?;
        pool.install(run)
    } else {
        run()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

impl Report {
    pub fn new(config: &PipelineConfig, windows: Vec<WindowReport>) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::arg("report needs at least one window"));
        }
        let summary = ReportSummary {
            windows: windows.len(),
            mean_delta_h: mean(windows.iter().filter_map(|w| w.delta_h)),
            mean_neg_b1: mean(windows.iter().filter_map(|w| w.b1.map(|b| -b))),
            mean_h0: mean(
                windows
                    .iter()
                    .filter_map(|w| w.ansatz.as_ref().map(|f| f.h0)),
            ),
            mean_a: mean(
                windows
                    .iter()
                    .filter_map(|w| w.ansatz.as_ref().map(|f| f.a)),
            ),
        };
        Ok(Self {
            library: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            summary,
            windows,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_json()?.as_bytes())?;
        out.write_all(b"\n")?;
        Ok(())
    }

    /// CSV `window_start,delta,h2`; absent estimates leave `h2` empty.
    pub fn write_h2_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "window_start,delta,h2")?;
        for w in &self.windows {
            for e in &w.sweep {
                match e.h2 {
                    Some(h) => writeln!(out, "{},{},{}", w.window_start, e.delta, h)?,
                    None => writeln!(out, "{},{},", w.window_start, e.delta)?,
                }
            }
        }
        Ok(())
    }

    /// CSV `window_start,q,h` from the reference-Δ curves.
    pub fn write_hq_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "window_start,q,h")?;
        for w in &self.windows {
            if let Some(curve) = &w.curve {
                for p in &curve.points {
                    writeln!(out, "{},{},{}", w.window_start, p.q, p.h)?;
                }
            }
        }
        Ok(())
    }
}

/// Writes the JSON report and, when paths are given, the two CSV tables.
pub fn emit_report(
    report: &Report,
    json_path: &std::path::Path,
    h2_csv: Option<&std::path::Path>,
    hq_csv: Option<&std::path::Path>,
) -> Result<()> {
    use std::fs::File;
    use std::io::BufWriter;
    report.write_json(BufWriter::new(File::create(json_path)?))?;
    if let Some(p) = h2_csv {
        report.write_h2_csv(BufWriter::new(File::create(p)?))?;
    }
    if let Some(p) = hq_csv {
        report.write_hq_csv(BufWriter::new(File::create(p)?))?;
    }
    Ok(())
}
