use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

use roughscale::finite_sample::FiniteSampleLaw;
use roughscale::market_data::{
    intraday_log_returns, parse_ticks, resample_prices, DaySpan, ResampleOptions, TickCsvFormat,
    TickSeries,
};
use roughscale::mfdfa::{self, MfdfaConfig};
use roughscale::pipeline::{
    emit_report, parse_deltas, parse_list, parse_zero_policy, run_rolling, PipelineConfig,
    PipelineInput, Report,
};
use roughscale::realized_volatility::{compute_daily_rv, log_increments};
use roughscale::scaling::{fit_ansatz, FitOptions, FrequencySweep};
use roughscale::synthetic::{GeneratorKind, GeneratorSpec};
use roughscale::{Error, ErrorKind};

#[derive(Parser)]
#[command(
    name = "roughscale",
    version,
    about = "Roughness and multifractality of realized volatility"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Resample ticks onto a Δ-minute price grid.
    Ingest(IngestArgs),
    /// Daily realized volatility, optionally with log-RV increments.
    Rv(RvArgs),
    /// Generalized Hurst exponents of a one-column series.
    Mfdfa(MfdfaArgs),
    /// Fit H(Δ) = H₀·n/(n+a) to a `delta,h2[,stderr]` table.
    FitAnsatz(FitArgs),
    /// Density table and moments of the standardized daily return.
    FiniteSample(FiniteSampleArgs),
    /// Synthetic series with known scaling.
    Synth(SynthArgs),
    /// Rolling-window experiment over all sampling periods.
    Rolling(RollingArgs),
}

#[derive(Args)]
struct TickInput {
    #[arg(long)]
    ticks: PathBuf,
    /// The tick file starts with a header line.
    #[arg(long)]
    header: bool,
    /// Malformed lines to skip before failing.
    #[arg(long, default_value_t = 0)]
    max_malformed: usize,
    #[arg(long)]
    start_date: Option<NaiveDate>,
    #[arg(long)]
    end_date: Option<NaiveDate>,
    #[arg(long, default_value_t = 0.0)]
    min_coverage: f64,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    input: TickInput,
    #[arg(long, default_value_t = 5)]
    delta: u32,
    /// Price grid CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the intraday log-return grid.
    #[arg(long)]
    returns: Option<PathBuf>,
}

#[derive(Args)]
struct RvArgs {
    #[command(flatten)]
    input: TickInput,
    #[arg(long, default_value_t = 5)]
    delta: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the log-RV increments `date,V`.
    #[arg(long)]
    increments: Option<PathBuf>,
    /// `drop` or `floor[:eps]`.
    #[arg(long, default_value = "drop")]
    zero_policy: String,
}

#[derive(Args)]
struct MfdfaArgs {
    /// Series file; the last column of each line is read.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    q_list: Option<String>,
    #[arg(long)]
    scales: Option<String>,
    #[arg(long, default_value_t = 1)]
    detrend_order: usize,
    #[arg(long)]
    fit_min: Option<usize>,
    #[arg(long)]
    fit_max: Option<usize>,
    /// Curve CSV `q,h,stderr,r2`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the fluctuation surface `q,s,Fq`.
    #[arg(long)]
    surface: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    exclude_deltas: Option<String>,
    #[arg(long)]
    unweighted: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FiniteSampleArgs {
    #[arg(long)]
    n: u32,
    /// Density grid points across the support.
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Density table `x,density`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Moments table `quantity,value`; appended to the density output when absent.
    #[arg(long)]
    moments: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    max_k: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    Fgn,
    Cascade,
    SvDay,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKind,
    #[arg(long, default_value_t = 0.5)]
    h: f64,
    #[arg(long, default_value_t = 0.6)]
    p: f64,
    #[arg(long, default_value_t = 288)]
    n: u32,
    #[arg(long, default_value_t = 0.01)]
    sigma: f64,
    /// Series length; cascades need a power of two.
    #[arg(long, default_value_t = 65536)]
    len: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RollingArgs {
    #[arg(long)]
    ticks: PathBuf,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 0)]
    max_malformed: usize,
    /// `key = value` file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    window_days: Option<u32>,
    #[arg(long)]
    step_days: Option<u32>,
    /// `auto` or a comma-separated list of divisors of 1440.
    #[arg(long)]
    deltas: Option<String>,
    #[arg(long)]
    reference_delta: Option<u32>,
    #[arg(long)]
    exclude_deltas: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    q_list: Option<String>,
    #[arg(long)]
    detrend_order: Option<usize>,
    #[arg(long)]
    zero_policy: Option<String>,
    #[arg(long)]
    start_date: Option<String>,
    #[arg(long)]
    end_date: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Table `window_start,delta,h2`.
    #[arg(long)]
    h2_csv: Option<PathBuf>,
    /// Table `window_start,q,h` at the reference Δ.
    #[arg(long)]
    hq_csv: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> roughscale::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_ticks(path: &Path, header: bool, max_malformed: usize) -> roughscale::Result<TickSeries> {
    let format = TickCsvFormat {
        has_header: header,
        malformed_tolerance: max_malformed,
        ..Default::default()
    };
    let (ticks, report) = parse_ticks(BufReader::new(File::open(path)?), &format)?;
    log::info!(
        "{} ticks read, {} non-positive dropped, {} malformed skipped",
        report.records,
        report.dropped_nonpositive,
        report.malformed_lines.len()
    );
    Ok(ticks)
}

fn resample(
    input: &TickInput,
    delta: u32,
) -> roughscale::Result<roughscale::market_data::PriceGrid> {
    let ticks = load_ticks(&input.ticks, input.header, input.max_malformed)?;
    let full = ticks.span();
    let span = DaySpan::new(
        input.start_date.unwrap_or(full.start),
        input.end_date.unwrap_or(full.end),
    )?;
    resample_prices(
        &ticks,
        delta,
        span,
        &ResampleOptions {
            min_coverage: input.min_coverage,
        },
    )
}

/// Last column of every numeric line; one leading header line is skipped.
fn read_series(path: &Path) -> roughscale::Result<Vec<f64>> {
    let mut values = Vec::new();
    for (idx, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if idx == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("{field:?}: {e}"),
                })
            }
        }
    }
    Ok(values)
}

fn cmd_ingest(args: IngestArgs) -> roughscale::Result<()> {
    let grid = resample(&args.input, args.delta)?;
    let mut out = output(args.out.as_deref())?;
    grid.write_csv(&mut out)?;
    out.flush()?;
    if let Some(p) = args.returns {
        let mut w = BufWriter::new(File::create(p)?);
        intraday_log_returns(&grid).write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_rv(args: RvArgs) -> roughscale::Result<()> {
    let policy = parse_zero_policy(&args.zero_policy)?;
    let grid = resample(&args.input, args.delta)?;
    let rv = compute_daily_rv(&intraday_log_returns(&grid));
    let mut out = output(args.out.as_deref())?;
    rv.write_csv(&mut out)?;
    out.flush()?;
    if let Some(p) = args.increments {
        let mut w = BufWriter::new(File::create(p)?);
        log_increments(&rv, policy)?.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_mfdfa(args: MfdfaArgs) -> roughscale::Result<()> {
    let series = read_series(&args.input)?;
    let mut cfg = MfdfaConfig::with_order(series.len(), args.detrend_order)?;
    if let Some(q) = &args.q_list {
        cfg.q_values = parse_list(q)?;
    }
    if let Some(s) = &args.scales {
        cfg.scales = parse_list(s)?;
        if let (Some(&lo), Some(&hi)) = (cfg.scales.first(), cfg.scales.last()) {
            cfg.fit_range = (lo, hi);
        }
    }
    if let Some(lo) = args.fit_min {
        cfg.fit_range.0 = lo;
    }
    if let Some(hi) = args.fit_max {
        cfg.fit_range.1 = hi;
    }
    let (surface, curve) = mfdfa::analyze(&series, &cfg)?;
    let mut out = output(args.out.as_deref())?;
    curve.write_csv(&mut out)?;
    out.flush()?;
    if let Some(p) = args.surface {
        let mut w = BufWriter::new(File::create(p)?);
        surface.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_fit(args: FitArgs) -> roughscale::Result<()> {
    let sweep = FrequencySweep::read_csv(BufReader::new(File::open(&args.input)?))?;
    let options = FitOptions {
        exclude: match &args.exclude_deltas {
            Some(list) => parse_list(list)?,
            None => Vec::new(),
        },
        force_unweighted: args.unweighted,
    };
    let fit = fit_ansatz(&sweep, &options)?;
    let mut out = output(args.out.as_deref())?;
    fit.write_json(&mut out)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn cmd_finite_sample(args: FiniteSampleArgs) -> roughscale::Result<()> {
    let law = FiniteSampleLaw::new(args.n)?;
    if args.points < 2 {
        return Err(Error::Argument("need at least 2 density points".into()));
    }
    let mut out = output(args.out.as_deref())?;
    if args.n >= 2 {
        let bound = law.support_bound();
        writeln!(out, "x,density")?;
        for i in 0..args.points {
            let x = -bound + 2.0 * bound * i as f64 / (args.points - 1) as f64;
            writeln!(out, "{x},{}", law.density(x)?)?;
        }
    } else {
        log::warn!("n = 1 has no density; only moments are written");
    }
    let mut moments = match &args.moments {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)) as Box<dyn Write>,
        None => out,
    };
    writeln!(moments, "quantity,value")?;
    for k in 1..=args.max_k {
        writeln!(moments, "m{},{}", 2 * k, law.moment_2k(k)?)?;
    }
    writeln!(moments, "kurtosis,{}", law.kurtosis())?;
    moments.flush()?;
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> roughscale::Result<()> {
    let kind = match args.kind {
        SynthKind::Fgn => GeneratorKind::Fgn { hurst: args.h },
        SynthKind::Cascade => {
            if !args.len.is_power_of_two() {
                return Err(Error::Argument(format!(
                    "cascade length {} is not a power of two",
                    args.len
                )));
            }
            GeneratorKind::Cascade {
                p: args.p,
                levels: args.len.trailing_zeros(),
            }
        }
        SynthKind::SvDay => GeneratorKind::SvDay {
            n: args.n,
            sigma: args.sigma,
        },
    };
    let length = match args.kind {
        SynthKind::SvDay => args.n as usize,
        _ => args.len,
    };
    let values = GeneratorSpec {
        kind,
        length,
        seed: args.seed,
    }
    .generate()?;
    let mut out = output(args.out.as_deref())?;
    for v in values {
        writeln!(out, "{v}")?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_rolling(args: RollingArgs) -> roughscale::Result<()> {
    let mut config = PipelineConfig::default();
    if let Some(p) = &args.config {
        config.apply_text(&std::fs::read_to_string(p)?)?;
    }
    let overrides: [(&str, Option<String>); 10] = [
        ("window_days", args.window_days.map(|v| v.to_string())),
        ("step_days", args.step_days.map(|v| v.to_string())),
        (
            "reference_delta",
            args.reference_delta.map(|v| v.to_string()),
        ),
        ("exclude_deltas", args.exclude_deltas.clone()),
        ("q_list", args.q_list.clone()),
        ("detrend_order", args.detrend_order.map(|v| v.to_string())),
        ("zero_policy", args.zero_policy.clone()),
        ("start_date", args.start_date.clone()),
        ("end_date", args.end_date.clone()),
        ("workers", args.workers.map(|v| v.to_string())),
    ];
    if let Some(d) = &args.deltas {
        config.deltas = parse_deltas(d)?;
    }
    for (key, value) in overrides {
        if let Some(v) = value {
            config.set(key, &v)?;
        }
    }
    let ticks = load_ticks(&args.ticks, args.header, args.max_malformed)?;
    let windows = run_rolling(&PipelineInput::Ticks(ticks), &config)?;
    let report = Report::new(&config, windows)?;
    emit_report(
        &report,
        &args.out,
        args.h2_csv.as_deref(),
        args.hq_csv.as_deref(),
    )
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Numeric => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Rv(a) => cmd_rv(a),
        Command::Mfdfa(a) => cmd_mfdfa(a),
        Command::FitAnsatz(a) => cmd_fit(a),
        Command::FiniteSample(a) => cmd_finite_sample(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Rolling(a) => cmd_rolling(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
