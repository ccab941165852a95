mod common;

use chrono::Days;
use proptest::prelude::*;
use roughscale::market_data::{
    intraday_log_returns, parse_ticks, resample_prices, ResampleOptions, Tick, TickCsvFormat,
    TickSeries, SECONDS_PER_DAY,
};
use roughscale::realized_volatility::{compute_daily_rv, log_increments, ZeroPolicy};

fn fixture() -> TickSeries {
    common::synthetic_ticks(common::date(2016, 3, 1), 6, 5)
}

#[test]
fn shifting_by_whole_days_shifts_dates_only() {
    let ticks = fixture();
    for days in [1i64, 7, -30] {
        let shifted = TickSeries::new(
            ticks
                .events()
                .iter()
                .map(|t| Tick {
                    timestamp: t.timestamp + days * SECONDS_PER_DAY,
                    price: t.price,
                })
                .collect(),
            "fixture",
        )
        .unwrap();
        for delta in [1u32, 5, 30] {
            let a = intraday_log_returns(
                &resample_prices(&ticks, delta, ticks.span(), &ResampleOptions::default()).unwrap(),
            );
            let b = intraday_log_returns(
                &resample_prices(&shifted, delta, shifted.span(), &ResampleOptions::default())
                    .unwrap(),
            );
            assert_eq!(a.days.len(), b.days.len());
            for (x, y) in a.days.iter().zip(&b.days) {
                let expected = if days >= 0 {
                    x.date + Days::new(days as u64)
                } else {
                    x.date - Days::new((-days) as u64)
                };
                assert_eq!(y.date, expected);
                assert_eq!(x.returns, y.returns);
            }
        }
    }
}

#[test]
fn daily_sum_is_log_close_over_open() {
    let ticks = fixture();
    for delta in [1u32, 5, 60, 1440] {
        let grid =
            resample_prices(&ticks, delta, ticks.span(), &ResampleOptions::default()).unwrap();
        let returns = intraday_log_returns(&grid);
        for (g, r) in grid.days.iter().zip(&returns.days) {
            let sum: f64 = r.returns.iter().sum();
            let expected = (g.prices[g.prices.len() - 1] / g.prices[0]).ln();
            assert!(
                (sum - expected).abs() < 1e-12,
                "{delta}: {sum} vs {expected}"
            );
        }
    }
}

#[test]
fn coarser_returns_are_pairwise_sums() {
    let ticks = fixture();
    let grid5 = resample_prices(&ticks, 5, ticks.span(), &ResampleOptions::default()).unwrap();
    let grid10 = resample_prices(&ticks, 10, ticks.span(), &ResampleOptions::default()).unwrap();
    let r5 = intraday_log_returns(&grid5);
    let r10 = intraday_log_returns(&grid10);
    for (a, b) in r5.days.iter().zip(&r10.days) {
        assert_eq!(a.date, b.date);
        for (i, r) in b.returns.iter().enumerate() {
            let pair = a.returns[2 * i] + a.returns[2 * i + 1];
            assert!((pair - r).abs() < 1e-13);
        }
    }
}

#[test]
fn csv_round_trip_through_parser() {
    let ticks = fixture();
    let text = common::ticks_to_csv(&ticks);
    let format = TickCsvFormat {
        has_header: true,
        ..Default::default()
    };
    let (parsed, report) = parse_ticks(text.as_bytes(), &format).unwrap();
    assert_eq!(report.records, ticks.len());
    assert_eq!(parsed.events(), ticks.events());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rv_chain_is_price_scale_invariant(scale in 0.01f64..100.0, seed in 0u64..1000) {
        let ticks = common::synthetic_ticks(common::date(2018, 1, 1), 3, seed);
        let scaled = TickSeries::new(
            ticks.events().iter().map(|t| Tick { timestamp: t.timestamp, price: t.price * scale }).collect(),
            "fixture",
        ).unwrap();
        let rv = |t: &TickSeries| compute_daily_rv(&intraday_log_returns(
            &resample_prices(t, 15, t.span(), &ResampleOptions::default()).unwrap(),
        ));
        let a = rv(&ticks);
        let b = rv(&scaled);
        for (x, y) in a.points.iter().zip(&b.points) {
            prop_assert!((x.rv - y.rv).abs() <= 1e-9 * x.rv);
        }
        let va = log_increments(&a, ZeroPolicy::Drop).unwrap();
        let vb = log_increments(&b, ZeroPolicy::Drop).unwrap();
        for (x, y) in va.values.iter().zip(&vb.values) {
            prop_assert!((x - y).abs() < 1e-8);
        }
    }
}
