use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use logcap::bounds::{
    loglog_witness, phase_classify, tail_series, ursell_schedule, BoundReport, CoverDescription, MeasuringFunction,
};
use logcap::energy::{uniform_level_energy_fast, EvalPolicy, DEFAULT_AUTO_THRESHOLD};
use logcap::experiments::{
    averaged_table, pairs_table, run_counterexample_check, run_phase_scan, run_redistribution_convergence, run_windows,
    AveragedConfig, Cell, ConvergenceConfig, CounterexampleParams, OutputFormat, PhaseConfig, ResultTable,
    WeightPolicy,
};
use logcap::interval_sets::{LogLength, RadiusSchedule};
use logcap::measures::StepMeasure;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Logarithmic energy and capacity experiments on unions of intervals.
#[derive(Parser)]
#[command(name = "logcap", version, about)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, default_value = "csv")]
    format: Format,

    /// Seed for sampled level pairs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write tables into this directory instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// JSON config for the subcommand; replaces its flags. The `config`
    /// entry of a table's metadata is accepted as is.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Plot,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
            Format::Plot => OutputFormat::Plot,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Exact,
    PointCharge,
    Auto,
}

#[derive(Args, Clone, Copy)]
struct PolicyArgs {
    /// Pair evaluation: exact, point-charge or auto.
    #[arg(long, default_value = "auto")]
    policy: Policy,

    /// Relative size below which `auto` uses point charges.
    #[arg(long, default_value_t = DEFAULT_AUTO_THRESHOLD)]
    threshold: f64,
}

impl PolicyArgs {
    fn policy(self) -> EvalPolicy {
        match self.policy {
            Policy::Exact => EvalPolicy::Exact,
            Policy::PointCharge => EvalPolicy::PointCharge,
            Policy::Auto => EvalPolicy::Auto { threshold: self.threshold },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Energy of the uniform measure on one level V_n.
    Redistribute {
        #[arg(long, default_value_t = 100)]
        n: u64,
        /// Natural log of the interval length.
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        log_r: f64,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Single-level re-distribution along an n grid.
    Converge {
        /// power:A, subexp:B or dyadic.
        #[arg(long, default_value = "subexp:0.5")]
        schedule: String,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000,10000")]
        n_grid: Vec<u64>,
        /// Step density as StepMeasure JSON; the uniform density by default.
        #[arg(long)]
        density: Option<PathBuf>,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Averaged re-distribution over prime windows [m, 2m - 1].
    Averaged {
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "64,256,1024")]
        m_grid: Vec<u64>,
        /// Sampled between-level pairs per window.
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        /// Evaluate every level pair.
        #[arg(long)]
        full: bool,
        /// Put all weight on this prime.
        #[arg(long)]
        concentrate: Option<u64>,
        #[arg(long, default_value_t = 0.1)]
        pair_tolerance: f64,
        #[arg(long, default_value_t = 1024)]
        pair_check_from: u64,
        /// Also write the evaluated pairs of every window.
        #[arg(long)]
        pair_tables: bool,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Phase scan over alpha for r_n = exp(-n^alpha).
    Phase {
        #[arg(long, value_delimiter = ',', default_value = "0.5,1.5,2,2.5,3")]
        alpha_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "8,32,128")]
        m_grid: Vec<u64>,
        #[arg(long, default_value_t = 10_000)]
        terms: u64,
        #[arg(long, default_value_t = 50)]
        pairs: usize,
        #[command(flatten)]
        policy: PolicyArgs,
    },
    /// Exact checks of the disjoint-sets construction.
    Counterexample {
        /// Power of two.
        #[arg(long, default_value_t = 8)]
        n1: u64,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Energy and capacity bounds from a cover or a tail series.
    Bound {
        /// JSON file `{"lengths": [log r_1, ...]}`.
        #[arg(long, conflicts_with = "alpha")]
        cover: Option<PathBuf>,
        /// Tail of the cover by V_n, n >= m, for r_n = exp(-n^alpha).
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 1)]
        m: u64,
        #[arg(long, default_value_t = 10_000)]
        terms: u64,
    },
    /// Level schedule for the gauge 1/(|log r| log|log r|).
    Ursell {
        #[arg(long, default_value_t = 6)]
        count: usize,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct RedistributeConfig {
    n: u64,
    log_r: f64,
    #[serde(default)]
    policy: EvalPolicy,
}

#[derive(Debug, Serialize, Deserialize)]
struct AveragedRun {
    #[serde(flatten)]
    experiment: AveragedConfig,
    #[serde(default)]
    pair_tables: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct BoundConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cover: Option<CoverDescription>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default = "one")]
    m: u64,
    #[serde(default = "default_terms")]
    terms: u64,
}

fn one() -> u64 {
    1
}

fn default_terms() -> u64 {
    10_000
}

#[derive(Debug, Serialize, Deserialize)]
struct UrsellConfig {
    count: usize,
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    // A table's metadata stores the config as a JSON string.
    let value = match value {
        serde_json::Value::String(s) => serde_json::from_str(&s)?,
        v => v,
    };
    serde_json::from_value(value).with_context(|| format!("invalid config in {}", path.display()))
}

fn config_or<T: DeserializeOwned>(cli: &Cli, from_flags: impl FnOnce() -> Result<T>) -> Result<T> {
    match &cli.config {
        Some(path) => load(path),
        None => from_flags(),
    }
}

fn redistribute(cfg: &RedistributeConfig) -> Result<ResultTable> {
    let r = LogLength::from_log(cfg.log_r)?;
    let e = uniform_level_energy_fast(cfg.n, r, cfg.policy)?;
    let mut t = ResultTable::new("redistribution", &["n", "log_r", "self", "cross", "total", "certified_error"]);
    t.meta("breakdown", serde_json::to_string(&e)?);
    t.set_config(cfg)?;
    t.push(vec![
        Cell::Int(cfg.n as i64),
        Cell::Real(cfg.log_r),
        Cell::Real(e.self_part),
        Cell::Real(e.cross_part),
        Cell::Real(e.total()),
        Cell::Real(e.certified_error),
    ])?;
    Ok(t)
}

fn bound(cfg: &BoundConfig) -> Result<ResultTable> {
    let columns = ["source", "series_lower", "series_upper", "energy_lower_bound", "capacity_upper_bound", "converged"];
    let mut t = ResultTable::new("bound", &columns);
    t.set_config(cfg)?;
    let (source, lower, report) = match (&cfg.cover, cfg.alpha) {
        (Some(cover), None) => {
            let report = BoundReport::for_cover(cover)?;
            (format!("cover[{}]", cover.lengths.len()), report.series_value, report)
        }
        (None, Some(alpha)) => {
            let tail = tail_series(&RadiusSchedule::power_exp(alpha)?, cfg.m, cfg.terms)?;
            t.meta("phase", phase_classify(alpha)?.to_string());
            (format!("tail:alpha={alpha},m={}", cfg.m), tail.lower, tail.report())
        }
        _ => bail!("give exactly one of a cover or alpha"),
    };
    t.push(vec![
        Cell::Text(source),
        Cell::real_or_text(lower),
        Cell::real_or_text(report.series_value),
        Cell::real_or_text(report.energy_lower_bound),
        Cell::real_or_text(report.capacity_upper_bound),
        Cell::Flag(report.converged),
    ])?;
    Ok(t)
}

fn ursell(cfg: &UrsellConfig) -> Result<ResultTable> {
    let h = MeasuringFunction::LogLog;
    let s = ursell_schedule(&h, &loglog_witness(cfg.count), cfg.count)?;
    let columns = [
        "j",
        "log_abs_log_r",
        "log_n",
        "n",
        "log_volume",
        "log_density",
        "volume_partial_sum",
        "pass_volume",
        "pass_density",
    ];
    let mut t = ResultTable::new("ursell_schedule", &columns);
    t.meta("gauge", s.gauge.clone());
    t.meta("rejected", serde_json::to_string(&s.rejected)?);
    t.meta("verified", s.verify(&h)?.to_string());
    t.set_config(cfg)?;
    for (row, sum) in s.rows.iter().zip(&s.volume_partial_sums) {
        t.push(vec![
            Cell::Int(row.j as i64),
            Cell::Real(row.log_abs_log_r),
            Cell::Real(row.log_n),
            row.n.map_or(Cell::Empty, |n| Cell::Text(n.to_string())),
            Cell::Real(row.log_volume),
            Cell::Real(row.log_density),
            Cell::Real(*sum),
            Cell::Flag(row.volume_ok()),
            Cell::Flag(row.density_ok()),
        ])?;
    }
    Ok(t)
}

fn tables(cli: &Cli) -> Result<Vec<ResultTable>> {
    let t = match &cli.command {
        Command::Redistribute { n, log_r, policy } => {
            let cfg = config_or(cli, || Ok(RedistributeConfig { n: *n, log_r: *log_r, policy: policy.policy() }))?;
            vec![redistribute(&cfg)?]
        }
        Command::Converge { schedule, n_grid, density, policy } => {
            let cfg = config_or(cli, || {
                let mut c = ConvergenceConfig::new(schedule.parse::<RadiusSchedule>()?, n_grid.clone());
                c.policy = policy.policy();
                c.density = density.as_deref().map(load::<StepMeasure>).transpose()?;
                Ok(c)
            })?;
            vec![run_redistribution_convergence(&cfg)?]
        }
        Command::Averaged {
            alpha,
            m_grid,
            pairs,
            full,
            concentrate,
            pair_tolerance,
            pair_check_from,
            pair_tables,
            policy,
        } => {
            let run = config_or(cli, || {
                let mut c = AveragedConfig::new(*alpha, m_grid.clone());
                c.pairs = *pairs;
                c.full = *full;
                c.weights = concentrate.map_or(WeightPolicy::Uniform, |n| WeightPolicy::Concentrated { n });
                c.policy = policy.policy();
                c.seed = cli.seed;
                c.pair_tolerance = *pair_tolerance;
                c.pair_check_from = *pair_check_from;
                Ok(AveragedRun { experiment: c, pair_tables: *pair_tables })
            })?;
            let windows = run_windows(&run.experiment)?;
            let mut out = vec![averaged_table(&run.experiment, &windows)?];
            if run.pair_tables {
                for w in &windows {
                    out.push(pairs_table(w)?);
                }
            }
            out
        }
        Command::Phase { alpha_grid, m_grid, terms, pairs, policy } => {
            let cfg = config_or(cli, || {
                let mut c = PhaseConfig::new(alpha_grid.clone(), m_grid.clone());
                c.terms = *terms;
                c.pairs = *pairs;
                c.policy = policy.policy();
                c.seed = cli.seed;
                Ok(c)
            })?;
            vec![run_phase_scan(&cfg)?]
        }
        Command::Counterexample { n1, depth } => {
            let cfg = config_or(cli, || Ok(CounterexampleParams { n1: *n1, depth: *depth }))?;
            vec![run_counterexample_check(&cfg)?]
        }
        Command::Bound { cover, alpha, m, terms } => {
            let cfg = config_or(cli, || {
                let cover = cover.as_deref().map(load::<CoverDescription>).transpose()?;
                Ok(BoundConfig { cover, alpha: *alpha, m: *m, terms: *terms })
            })?;
            if let Some(c) = &cfg.cover {
                c.validate()?;
            }
            vec![bound(&cfg)?]
        }
        Command::Ursell { count } => {
            let cfg = config_or(cli, || Ok(UrsellConfig { count: *count }))?;
            vec![ursell(&cfg)?]
        }
    };
    Ok(t)
}

/// Prints or writes every table; true when all pass flags hold.
fn run(cli: &Cli) -> Result<bool> {
    let format = OutputFormat::from(cli.format);
    let mut ok = true;
    for t in tables(cli)? {
        match &cli.out {
            Some(dir) => {
                for path in t.emit(format, dir)? {
                    eprintln!("wrote {}", path.display());
                }
            }
            None => print!("{}", t.render(format)?),
        }
        for (row, column) in t.failures() {
            eprintln!("{}: row {row} fails {column}", t.name);
            ok = false;
        }
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
