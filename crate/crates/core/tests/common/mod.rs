//! Shared oracles for integration tests.
#![allow(dead_code)]

use chrono::{Days, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use roughscale::market_data::{epoch_day, Tick, TickSeries, SECONDS_PER_DAY};
use roughscale::realized_volatility::{RvPoint, RvSeries};
use roughscale::synthetic::stream_rng;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    // Split first so that narrow peaks are not missed by the initial estimate.
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            recurse(
                f,
                lo,
                hi,
                fa,
                fm,
                fb,
                simpson(fa, fm, fb, lo, hi),
                tol / pieces as f64,
                48,
            )
        })
        .sum()
}

/// Standardized daily return `Σr/√Σr²`.
pub fn standardize(day: &[f64]) -> f64 {
    let sum: f64 = day.iter().sum();
    let ss: f64 = day.iter().map(|r| r * r).sum();
    sum / ss.sqrt()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// RV series whose log increments are exactly `v`, starting at `start`.
pub fn rv_from_increments(delta: u32, start: NaiveDate, v: &[f64]) -> RvSeries {
    let mut log_rv = 0.0;
    let mut points = Vec::with_capacity(v.len() + 1);
    points.push(RvPoint {
        date: start,
        rv: 1.0,
        daily_return: 0.0,
    });
    for (i, x) in v.iter().enumerate() {
        log_rv += x;
        points.push(RvPoint {
            date: start + Days::new(i as u64 + 1),
            rv: log_rv.exp(),
            daily_return: 0.0,
        });
    }
    RvSeries::new(delta, points).unwrap()
}

/// Random-walk trades on `days` consecutive UTC days from `start`: one trade
/// at every day open plus trades at random 1–120 s gaps, with day-level
/// volatility following a log-normal random walk.
pub fn synthetic_ticks(start: NaiveDate, days: u32, seed: u64) -> TickSeries {
    let mut rng = stream_rng(seed, 0);
    let mut events = Vec::new();
    let mut log_price = 9.0_f64;
    let mut log_vol = (0.03f64).ln();
    for d in 0..i64::from(days) {
        let day_start = (epoch_day(start) + d) * SECONDS_PER_DAY;
        let z: f64 = StandardNormal.sample(&mut rng);
        log_vol += 0.1 * z;
        let per_sec = log_vol.exp() / (SECONDS_PER_DAY as f64).sqrt();
        let mut t = day_start;
        let mut last = day_start;
        while t < day_start + SECONDS_PER_DAY {
            let gap = (t - last) as f64;
            let z: f64 = StandardNormal.sample(&mut rng);
            log_price += per_sec * gap.max(1.0).sqrt() * z;
            events.push(Tick {
                timestamp: t,
                price: log_price.exp(),
            });
            last = t;
            t += rng.random_range(1..=120);
        }
    }
    TickSeries::new(events, "fixture").unwrap()
}

pub fn ticks_to_csv(ticks: &TickSeries) -> String {
    let mut s = String::from("timestamp,price\n");
    for t in ticks.events() {
        s.push_str(&format!("{},{}\n", t.timestamp, t.price));
    }
    s
}
