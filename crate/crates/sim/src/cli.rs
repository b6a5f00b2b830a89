//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a simulation or file operation fails,
//! 2 for invalid flags or configurations.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use subgroup_ofdm::channel::{delays_to_samples, itu_indoor_pdp, tdl_structured_pdp, SampleGrid};
use subgroup_ofdm::config::{snr_grid, ChannelKind, Modulation, SimConfig, TrialsMode, DEFAULT_SEED};
use subgroup_ofdm::group::SubgroupSpec;

use crate::harness::{sweep, AggregateRow, SweepError, METHODS};
use crate::io::{read_csv, write_csv};
use crate::plot::{emit_plot, Metric};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "subgroup-sim", version, about = "Subgroup-structured OFDM channel estimation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a Monte Carlo sweep and write aggregate rows as CSV
    Run(RunArgs),
    /// Draw SVG charts from a results CSV
    Plot(PlotArgs),
    /// Print a subgroup of Z_n and its annihilator
    InspectGroup(InspectGroupArgs),
    /// Print the power delay profile of a channel model
    InspectChannel(InspectChannelArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Tdl,
    Itu,
}

impl From<ChannelArg> for ChannelKind {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Tdl => ChannelKind::Tdl,
            ChannelArg::Itu => ChannelKind::Itu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModArg {
    Qpsk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Mse,
    Ser,
    Throughput,
    All,
}

impl MetricArg {
    fn metrics(self) -> Vec<Metric> {
        match self {
            MetricArg::Mse => vec![Metric::Mse],
            MetricArg::Ser => vec![Metric::Ser],
            MetricArg::Throughput => vec![Metric::Throughput],
            MetricArg::All => Metric::ALL.to_vec(),
        }
    }
}

/// Inclusive SNR grid parsed from `start:stop:step`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid(pub Vec<f64>);

fn parse_snr(s: &str) -> Result<SnrGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err("expected start:stop:step".into());
    };
    let num = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number"));
    snr_grid(num(start)?, num(stop)?, num(step)?)
        .map(SnrGrid)
        .map_err(|e| e.to_string())
}

fn parse_trials(s: &str) -> Result<TrialsMode, String> {
    match s {
        "auto" => Ok(TrialsMode::Auto),
        k => match k.parse::<usize>() {
            Ok(0) | Err(_) => Err("expected `auto` or a positive integer".into()),
            Ok(k) => Ok(TrialsMode::Fixed(k)),
        },
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Subcarriers per OFDM symbol
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Cyclic prefix length in samples [default: n/8]
    #[arg(long)]
    pub cp: Option<usize>,
    /// Modulation
    #[arg(long = "mod", value_enum, default_value_t = ModArg::Qpsk)]
    pub modulation: ModArg,
    /// Energy threshold of the subgroup estimator
    #[arg(long, default_value_t = 0.15)]
    pub epsilon: f64,
    /// SNR grid in dB as start:stop:step, inclusive
    #[arg(long, value_parser = parse_snr, default_value = "0:25:5")]
    pub snr: SnrGrid,
    /// Comma-separated annihilator sizes; each must divide n
    #[arg(long, value_delimiter = ',', default_value = "2,8,16,64,128")]
    pub d: Vec<usize>,
    /// Channel model
    #[arg(long, value_enum, default_value_t = ChannelArg::Tdl)]
    pub channel: ChannelArg,
    /// Trials per cell: `auto` (300/200/100 by d) or a fixed count
    #[arg(long, value_parser = parse_trials, default_value = "auto")]
    pub trials: TrialsMode,
    /// Master seed
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Use fixed tap amplitudes instead of Rayleigh fading
    #[arg(long)]
    pub deterministic_taps: bool,
    /// Output CSV path
    #[arg(long, default_value = "results.csv")]
    pub out: PathBuf,
}

impl RunArgs {
    pub fn config(&self) -> SimConfig {
        SimConfig {
            n: self.n,
            n_cp: self.cp.unwrap_or(self.n / 8),
            modulation: match self.modulation {
                ModArg::Qpsk => Modulation::Qpsk,
            },
            epsilon: self.epsilon,
            snr_grid_db: self.snr.0.clone(),
            d_grid: self.d.clone(),
            channel: self.channel.into(),
            trials: self.trials,
            master_seed: self.seed,
            deterministic_taps: self.deterministic_taps,
            ..SimConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Results CSV written by `run`
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Metric to plot
    #[arg(long, value_enum, default_value_t = MetricArg::All)]
    pub metric: MetricArg,
    /// Output directory; files are named <metric>.svg
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// One panel per d instead of averaging over d
    #[arg(long)]
    pub facet: bool,
}

#[derive(Debug, Args)]
pub struct InspectGroupArgs {
    /// Group order
    #[arg(long)]
    pub n: usize,
    /// Subgroup generator; must divide n
    #[arg(long)]
    pub d: usize,
}

#[derive(Debug, Args)]
pub struct InspectChannelArgs {
    /// Channel model
    #[arg(long, value_enum, default_value_t = ChannelArg::Itu)]
    pub channel: ChannelArg,
    /// Subcarriers per OFDM symbol
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Cyclic prefix length in samples [default: n/8]
    #[arg(long)]
    pub cp: Option<usize>,
    /// Annihilator size for the TDL model
    #[arg(long, default_value_t = 16)]
    pub d: usize,
}

fn usage_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    eprintln!("\nFor more information, try '--help'.");
    EXIT_USAGE
}

fn summary_table(rows: &[AggregateRow]) -> String {
    let mut out = format!("{:<10} {:>8} {:>12} {:>12} {:>10}\n", "estimator", "snr_db", "mse", "ser", "throughput");
    let mut snrs: Vec<f64> = rows.iter().map(|r| r.snr_db).collect();
    snrs.sort_by(f64::total_cmp);
    snrs.dedup();
    for snr in snrs {
        for m in METHODS {
            let cell: Vec<&AggregateRow> = rows.iter().filter(|r| r.snr_db == snr && r.estimator == m).collect();
            if cell.is_empty() {
                continue;
            }
            let k = cell.len() as f64;
            let avg = |f: fn(&AggregateRow) -> f64| cell.iter().map(|r| f(r)).sum::<f64>() / k;
            out += &format!(
                "{:<10} {:>8} {:>12.4e} {:>12.4e} {:>10.4}\n",
                m.as_str(),
                snr,
                avg(|r| r.mean_mse),
                avg(|r| r.mean_ser),
                avg(|r| r.mean_throughput)
            );
        }
    }
    out
}

fn run(args: &RunArgs) -> i32 {
    let config = args.config();
    if let Err(e) = config.validate() {
        return usage_error(e);
    }
    let rows = match sweep(&config) {
        Ok(rows) => rows,
        Err(SweepError::Config(e)) => return usage_error(e),
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    if let Err(e) = write_csv(&rows, &args.out) {
        eprintln!("error: {e}");
        return EXIT_FAILURE;
    }
    println!(
        "channel {}, n = {}, n_cp = {}, d = {:?}, averaged over d",
        config.channel.as_str(),
        config.n,
        config.n_cp,
        config.d_grid
    );
    print!("{}", summary_table(&rows));
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    EXIT_OK
}

fn plot(args: &PlotArgs) -> i32 {
    let rows = match read_csv(&args.input) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: {}: {e}", args.out.display());
        return EXIT_FAILURE;
    }
    for metric in args.metric.metrics() {
        let path = args.out.join(format!("{}.svg", metric.as_str()));
        if let Err(e) = emit_plot(&rows, metric, args.facet, &path) {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
        println!("wrote {}", path.display());
    }
    EXIT_OK
}

fn set(v: &[usize]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

fn inspect_group(args: &InspectGroupArgs) -> i32 {
    let spec = match SubgroupSpec::new(args.n, args.d) {
        Ok(s) => s,
        Err(e) => return usage_error(e),
    };
    let bidual = spec.dual().annihilator_bruteforce() == spec.elements_h();
    println!("n = {}, d = {}", spec.n(), spec.d());
    println!("H = <{}> = {}", spec.d(), set(spec.elements_h()));
    println!("H_perp = <{}> = {}", spec.perp_stride(), set(spec.elements_h_perp()));
    println!("|H| = {}, |H_perp| = {}", spec.elements_h().len(), spec.elements_h_perp().len());
    println!("bidual check (H_perp)_perp = H: {}", if bidual { "ok" } else { "FAILED" });
    if bidual {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

fn inspect_channel(args: &InspectChannelArgs) -> i32 {
    let grid = SampleGrid {
        n_cp: args.cp.unwrap_or(args.n / 8),
        ..SampleGrid::with_default_timing(args.n)
    };
    let pdp = match args.channel {
        ChannelArg::Itu => Ok(itu_indoor_pdp()),
        ChannelArg::Tdl => tdl_structured_pdp(&grid, args.d, SimConfig::default().tdl_decay_rate),
    };
    let table = pdp.and_then(|p| delays_to_samples(&p, &grid).map(|s| (p, s)));
    let (pdp, samples) = match table {
        Ok(t) => t,
        Err(e) => return usage_error(e),
    };
    println!("{} (n = {}, n_cp = {}, {} ns/sample)", pdp.label, grid.n, grid.n_cp, grid.sample_period_ns());
    println!("{:>10} {:>8} {:>10} {:>12}", "delay_ns", "sample", "power_db", "linear");
    for (((delay, sample), db), lin) in pdp
        .delays_ns
        .iter()
        .zip(&samples)
        .zip(&pdp.powers_db)
        .zip(pdp.normalized_linear_powers())
    {
        println!("{delay:>10.1} {sample:>8} {db:>10.2} {lin:>12.6}");
    }
    EXIT_OK
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match &cli.command {
        Command::Run(a) => run(a),
        Command::Plot(a) => plot(a),
        Command::InspectGroup(a) => inspect_group(a),
        Command::InspectChannel(a) => inspect_channel(a),
    }
}
