//! Tick ingestion and previous-tick resampling onto a Δ-minute day grid.
//!
//! Days are UTC calendar days. A tick with timestamp `t` belongs to the day
//! `floor(t / 86400)`. Grid point `k` of a day sits at `day_start + k·Δ`
//! minutes for `k = 0..=n`, so the last point of one day coincides in time
//! with the first point of the next.

use std::io::{BufRead, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::{samples_per_day, Error, Result};

pub const SECONDS_PER_DAY: i64 = 86_400;

/// Days from 0001-01-01 (CE day 1) to 1970-01-01.
const UNIX_EPOCH_CE_DAYS: i64 = 719_163;

/// Day index since the Unix epoch for a calendar date.
pub fn epoch_day(date: NaiveDate) -> i64 {
    i64::from(chrono::Datelike::num_days_from_ce(&date)) - UNIX_EPOCH_CE_DAYS
}

/// Calendar date for a day index since the Unix epoch.
pub fn date_of_epoch_day(day: i64) -> NaiveDate {
    i32::try_from(day + UNIX_EPOCH_CE_DAYS)
        .ok()
        .and_then(NaiveDate::from_num_days_from_ce_opt)
        .expect("epoch day out of calendar range")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    /// Seconds since the Unix epoch, UTC.
    pub timestamp: i64,
    pub price: f64,
}

/// Time-ordered trades from one venue. Non-empty, strictly positive prices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickSeries {
    events: Vec<Tick>,
    venue_label: String,
}

impl TickSeries {
    /// Builds a series, stably sorting by timestamp. Rejects empty input and
    /// non-positive or non-finite prices.
    pub fn new(mut events: Vec<Tick>, venue_label: impl Into<String>) -> Result<Self> {
        if events.is_empty() {
            return Err(Error::EmptyInput("tick series has no events".into()));
        }
        if let Some(bad) = events
            .iter()
            .find(|t| !(t.price.is_finite() && t.price > 0.0))
        {
            return Err(Error::arg(format!(
                "tick at {} has non-positive price {}",
                bad.timestamp, bad.price
            )));
        }
        events.sort_by_key(|t| t.timestamp);
        Ok(Self {
            events,
            venue_label: venue_label.into(),
        })
    }

    pub fn events(&self) -> &[Tick] {
        &self.events
    }

    pub fn venue_label(&self) -> &str {
        &self.venue_label
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        date_of_epoch_day(self.events[0].timestamp.div_euclid(SECONDS_PER_DAY))
    }

    pub fn last_date(&self) -> NaiveDate {
        date_of_epoch_day(
            self.events[self.events.len() - 1]
                .timestamp
                .div_euclid(SECONDS_PER_DAY),
        )
    }

    /// The inclusive day span from the first to the last traded day.
    pub fn span(&self) -> DaySpan {
        DaySpan {
            start: self.first_date(),
            end: self.last_date(),
        }
    }
}

/// Layout of a tick CSV file.
#[derive(Debug, Clone)]
pub struct TickCsvFormat {
    pub has_header: bool,
    /// Number of malformed lines tolerated (and skipped) before parsing fails.
    pub malformed_tolerance: usize,
    pub venue_label: String,
}

impl Default for TickCsvFormat {
    fn default() -> Self {
        Self {
            has_header: false,
            malformed_tolerance: 0,
            venue_label: "bitstamp".into(),
        }
    }
}

/// What the parser did besides producing events.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParseReport {
    pub records: usize,
    pub dropped_nonpositive: usize,
    /// 1-based line numbers of skipped malformed lines.
    pub malformed_lines: Vec<usize>,
    pub reordered: bool,
}

fn parse_record(line: &str) -> std::result::Result<Tick, String> {
    let mut fields = line.split(',').map(str::trim);
    let ts = fields.next().ok_or("missing timestamp")?;
    let price = fields.next().ok_or("missing price")?;
    if let Some(amount) = fields.next() {
        amount
            .parse::<f64>()
            .map_err(|e| format!("bad amount {amount:?}: {e}"))?;
    }
    if fields.next().is_some() {
        return Err("too many fields".into());
    }
    let timestamp = ts
        .parse::<i64>()
        .map_err(|e| format!("bad timestamp {ts:?}: {e}"))?;
    let price = price
        .parse::<f64>()
        .map_err(|e| format!("bad price {price:?}: {e}"))?;
    if !price.is_finite() {
        return Err(format!("non-finite price {price}"));
    }
    Ok(Tick { timestamp, price })
}

/// Parses `timestamp,price[,amount]` records.
///
/// Out-of-order records are stably sorted, non-positive prices are dropped and
/// counted, blank lines are ignored. Malformed lines are skipped until more
/// than `format.malformed_tolerance` of them have been seen.
pub fn parse_ticks<R: BufRead>(
    source: R,
    format: &TickCsvFormat,
) -> Result<(TickSeries, ParseReport)> {
    let mut report = ParseReport::default();
    let mut events = Vec::new();
    let mut saw_content = false;
    let mut header_pending = format.has_header;

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        saw_content = true;
        if header_pending {
            header_pending = false;
            continue;
        }
        report.records += 1;
        match parse_record(line) {
            Ok(tick) if tick.price > 0.0 => events.push(tick),
            Ok(_) => report.dropped_nonpositive += 1,
            Err(message) => {
                report.malformed_lines.push(line_no);
                if report.malformed_lines.len() > format.malformed_tolerance {
                    return Err(Error::Parse {
                        line: line_no,
                        message,
                    });
                }
            }
        }
    }

    if !saw_content {
        return Err(Error::EmptyInput("tick stream is empty".into()));
    }
    if events.is_empty() {
        return Err(Error::EmptyInput(
            "tick stream contains no usable records".into(),
        ));
    }
    report.reordered = events.windows(2).any(|w| w[1].timestamp < w[0].timestamp);
    let series = TickSeries::new(events, format.venue_label.clone())?;
    Ok((series, report))
}

/// Inclusive range of UTC calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DaySpan {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DaySpan {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if end < start {
            return Err(Error::arg(format!("empty day span {start}..={end}")));
        }
        Ok(Self { start, end })
    }

    pub fn num_days(&self) -> i64 {
        epoch_day(self.end) - epoch_day(self.start) + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResampleOptions {
    /// Days whose coverage is below this fraction are excluded.
    pub min_coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDay {
    pub date: NaiveDate,
    /// `n + 1` previous-tick prices: day open, then one per interval end.
    pub prices: Vec<f64>,
    /// Fraction of the `n` intervals that contain at least one trade.
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceGrid {
    pub delta_minutes: u32,
    pub days: Vec<GridDay>,
    /// Traded days dropped because no earlier trade could price the day open.
    pub leading_days_omitted: usize,
    pub low_coverage_days_excluded: usize,
}

impl PriceGrid {
    pub fn samples_per_day(&self) -> usize {
        (crate::MINUTES_PER_DAY / self.delta_minutes) as usize
    }

    /// Long-form CSV `date,index,value` with grid point index `0..=n`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "date,index,value")?;
        for day in &self.days {
            for (k, p) in day.prices.iter().enumerate() {
                writeln!(out, "{},{},{}", day.date, k, p)?;
            }
        }
        Ok(())
    }
}

/// Resamples ticks onto the Δ-minute previous-tick grid of every traded day in
/// `span`.
///
/// Grid point `k` takes the last trade at or before its time; the day open
/// therefore carries the previous day's last trade forward. Days without
/// trades are omitted, as are leading days whose open precedes every tick.
pub fn resample_prices(
    ticks: &TickSeries,
    delta_minutes: u32,
    span: DaySpan,
    options: &ResampleOptions,
) -> Result<PriceGrid> {
    let n = samples_per_day(delta_minutes)? as usize;
    if span.end < span.start {
        return Err(Error::arg("empty day span"));
    }
    let step = i64::from(delta_minutes) * 60;
    let events = ticks.events();
    let span_lo = epoch_day(span.start) * SECONDS_PER_DAY;
    let span_hi = (epoch_day(span.end) + 1) * SECONDS_PER_DAY;
    let first_in = events.partition_point(|t| t.timestamp < span_lo);
    if first_in == events.len() || events[first_in].timestamp >= span_hi {
        return Err(Error::InsufficientData(format!(
            "no ticks inside {}..={}",
            span.start, span.end
        )));
    }

    let mut days = Vec::new();
    let mut leading_days_omitted = 0;
    let mut low_coverage_days_excluded = 0;
    let mut interval_hit = vec![false; n];

    // `cursor` always points one past the last tick at or before the current grid time.
    let mut day = epoch_day(span.start);
    let last_day = epoch_day(span.end);
    while day <= last_day {
        let day_start = day * SECONDS_PER_DAY;
        let day_end = day_start + SECONDS_PER_DAY;
        let lo = events.partition_point(|t| t.timestamp < day_start);
        let hi = events.partition_point(|t| t.timestamp < day_end);
        if lo == hi {
            day += 1;
            continue;
        }
        let mut cursor = events.partition_point(|t| t.timestamp <= day_start);
        if cursor == 0 {
            leading_days_omitted += 1;
            log::warn!(
                "omitting {}: no trade at or before the day open",
                date_of_epoch_day(day)
            );
            day += 1;
            continue;
        }

        let mut prices = Vec::with_capacity(n + 1);
        prices.push(events[cursor - 1].price);
        for k in 1..=n {
            let grid_time = day_start + k as i64 * step;
            while cursor < events.len() && events[cursor].timestamp <= grid_time {
                cursor += 1;
            }
            prices.push(events[cursor - 1].price);
        }

        interval_hit.iter_mut().for_each(|h| *h = false);
        for t in &events[lo..hi] {
            interval_hit[((t.timestamp - day_start) / step) as usize] = true;
        }
        let coverage = interval_hit.iter().filter(|&&h| h).count() as f64 / n as f64;
        if coverage < options.min_coverage {
            low_coverage_days_excluded += 1;
        } else {
            days.push(GridDay {
                date: date_of_epoch_day(day),
                prices,
                coverage,
            });
        }
        day += 1;
    }

    if leading_days_omitted > 0 {
        log::warn!("{leading_days_omitted} leading day(s) omitted at Δ = {delta_minutes} min");
    }
    if days.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no priced days inside {}..={}",
            span.start, span.end
        )));
    }
    Ok(PriceGrid {
        delta_minutes,
        days,
        leading_days_omitted,
        low_coverage_days_excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnDay {
    pub date: NaiveDate,
    /// `n` log returns; entry `i` ends at grid point `i + 1`.
    pub returns: Vec<f64>,
    pub coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntradayReturnGrid {
    pub delta_minutes: u32,
    pub days: Vec<ReturnDay>,
}

impl IntradayReturnGrid {
    pub fn samples_per_day(&self) -> usize {
        (crate::MINUTES_PER_DAY / self.delta_minutes) as usize
    }

    /// Long-form CSV `date,index,value` with return index `1..=n`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "date,index,value")?;
        for day in &self.days {
            for (i, r) in day.returns.iter().enumerate() {
                writeln!(out, "{},{},{}", day.date, i + 1, r)?;
            }
        }
        Ok(())
    }
}

/// `returns[i] = ln prices[i+1] − ln prices[i]` for every grid day.
pub fn intraday_log_returns(grid: &PriceGrid) -> IntradayReturnGrid {
    let days = grid
        .days
        .iter()
        .map(|day| {
            let logs: Vec<f64> = day.prices.iter().map(|p| p.ln()).collect();
            ReturnDay {
                date: day.date,
                returns: logs.windows(2).map(|w| w[1] - w[0]).collect(),
                coverage: day.coverage,
            }
        })
        .collect();
    IntradayReturnGrid {
        delta_minutes: grid.delta_minutes,
        days,
    }
}
