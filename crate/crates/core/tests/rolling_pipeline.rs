mod common;

use common::{date, rv_from_increments};
use roughscale::market_data::DaySpan;
use roughscale::pipeline::{
    run_rolling, PipelineConfig, PipelineInput, ReasonCode, Report, RollingSpec,
};
use roughscale::synthetic::generate_fgn;

const DELTAS: [u32; 6] = [1, 5, 15, 60, 240, 1440];

/// Ten years of days whose log-RV increments are one fGn(H = 0.13) path,
/// shared by every Δ.
fn fgn_input() -> PipelineInput {
    let v = generate_fgn(0.13, 4096, 13).unwrap();
    let start = date(2013, 1, 1);
    // 3652 daily points span 3652 calendar days.
    PipelineInput::Rv(
        DELTAS
            .iter()
            .map(|&d| rv_from_increments(d, start, &v[..3651]))
            .collect(),
    )
}

fn config() -> PipelineConfig {
    PipelineConfig {
        deltas: DELTAS.to_vec(),
        q_values: vec![-3.0, -2.0, 2.0, 3.0],
        ..Default::default()
    }
}

#[test]
fn eight_year_windows_over_ten_years() {
    let reports = run_rolling(&fgn_input(), &config()).unwrap();
    assert_eq!(reports.len(), 147);
    assert_eq!(reports[0].window_start, date(2013, 1, 1));
    for (i, r) in reports.iter().enumerate() {
        assert_eq!(r.reference_n, 288);
        assert_eq!((r.window_end - r.window_start).num_days(), 2921);
        if i > 0 {
            assert_eq!((r.window_start - reports[i - 1].window_start).num_days(), 5);
        }
        let h2: Vec<f64> = r.sweep.iter().map(|e| e.h2.unwrap()).collect();
        for &h in &h2 {
            assert!((h - 0.13).abs() < 0.04, "{}: {h}", r.window_start);
            assert_eq!(h, h2[0], "flat across Δ");
        }
        assert!(r.delta_h.is_some() && r.b1.is_some());
        let fit = r.ansatz.as_ref().unwrap();
        assert!((fit.h0 - h2[0]).abs() < 1e-6);
        assert!(fit.boundary_warning);
    }
}

#[test]
fn isolated_window_equals_its_value_in_the_full_run() {
    let input = fgn_input();
    let cfg = config();
    let full = run_rolling(&input, &cfg).unwrap();
    for idx in [0usize, 73, 146] {
        let target = &full[idx];
        let isolated = PipelineConfig {
            rolling: RollingSpec {
                date_range: Some(DaySpan::new(target.window_start, target.window_end).unwrap()),
                ..cfg.rolling.clone()
            },
            ..cfg.clone()
        };
        let single = run_rolling(&input, &isolated).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(&single[0], target);
    }
}

#[test]
fn report_json_round_trips_bit_exactly() {
    let cfg = PipelineConfig {
        rolling: RollingSpec {
            window_days: 2922,
            step_days: 100,
            date_range: None,
        },
        ..config()
    };
    let report = Report::new(&cfg, run_rolling(&fgn_input(), &cfg).unwrap()).unwrap();
    let text = report.to_json().unwrap();
    let back = Report::from_json(&text).unwrap();
    assert_eq!(back, report);
    for (a, b) in report.windows.iter().zip(&back.windows) {
        for (x, y) in a.sweep.iter().zip(&b.sweep) {
            assert_eq!(x.h2.unwrap().to_bits(), y.h2.unwrap().to_bits());
            assert_eq!(
                x.h2_stderr.unwrap().to_bits(),
                y.h2_stderr.unwrap().to_bits()
            );
        }
        let (fa, fb) = (a.ansatz.as_ref().unwrap(), b.ansatz.as_ref().unwrap());
        assert_eq!(fa.a.to_bits(), fb.a.to_bits());
        assert_eq!(fa.h0_stderr.to_bits(), fb.h0_stderr.to_bits());
    }
    assert_eq!(back.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn single_window_tables() {
    let v = generate_fgn(0.3, 1024, 4).unwrap();
    let start = date(2020, 1, 1);
    let input = PipelineInput::Rv(vec![
        rv_from_increments(5, start, &v[..500]),
        rv_from_increments(30, start, &v[..500]),
    ]);
    let cfg = PipelineConfig {
        rolling: RollingSpec {
            window_days: 501,
            step_days: 7,
            date_range: None,
        },
        deltas: vec![5, 30],
        ..Default::default()
    };
    let report = Report::new(&cfg, run_rolling(&input, &cfg).unwrap()).unwrap();
    assert_eq!(report.windows.len(), 1);
    let mut h2 = Vec::new();
    report.write_h2_csv(&mut h2).unwrap();
    let h2 = String::from_utf8(h2).unwrap();
    assert_eq!(h2.lines().count(), 3, "{h2}");
    assert!(h2.starts_with("window_start,delta,h2\n2020-01-01,5,"));
    let mut hq = Vec::new();
    report.write_hq_csv(&mut hq).unwrap();
    assert_eq!(String::from_utf8(hq).unwrap().lines().count(), 14);

    // Two points cannot support a two-parameter fit.
    let w = &report.windows[0];
    assert!(w.ansatz.is_none());
    assert_eq!(
        w.ansatz_absent.as_ref().unwrap().code,
        ReasonCode::InsufficientData
    );
}

#[test]
fn span_shorter_than_window_is_an_error() {
    let v = generate_fgn(0.3, 1024, 4).unwrap();
    let input = PipelineInput::Rv(vec![rv_from_increments(5, date(2020, 1, 1), &v[..100])]);
    let cfg = PipelineConfig {
        deltas: vec![5],
        ..Default::default()
    };
    assert!(run_rolling(&input, &cfg).is_err());
}

#[test]
fn tick_input_runs_end_to_end() {
    let ticks = common::synthetic_ticks(date(2019, 6, 1), 70, 8);
    let cfg = PipelineConfig {
        rolling: RollingSpec {
            window_days: 60,
            step_days: 5,
            date_range: None,
        },
        deltas: vec![5, 10, 30, 60, 120],
        ..Default::default()
    };
    let reports = run_rolling(&PipelineInput::Ticks(ticks), &cfg).unwrap();
    assert_eq!(reports.len(), 3);
    for r in &reports {
        for e in &r.sweep {
            assert_eq!(e.increments, 59);
            let h = e.h2.unwrap();
            assert!(h.is_finite() && e.h2_stderr.unwrap() > 0.0);
        }
        assert!(r.curve.is_some());
        assert!(r.ansatz.is_some() || r.ansatz_absent.is_some());
    }
}
