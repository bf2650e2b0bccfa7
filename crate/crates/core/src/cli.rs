//! `aoi-eve` command-line front end.
//!
//! Exit status: 0 on success, 2 on a domain error, 3 when a solver does not
//! converge or a simulation is degenerate, 64 on malformed flags, 1 on I/O
//! failure.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::aoi::{aoi_pair, bergson_objective, utilities, SystemParams, TradeoffWeight};
use crate::error::{Error, Result};
use crate::experiments::{log_spaced, stepped, Format, OutputKind, Sweep, SweepGrid};
use crate::optimize::{asymptotic_root, maximize_objective, AsymptoteResult, OptimResult};
use crate::sim::{self, SimConfig, SimResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "aoi-eve",
    version,
    about = "Age of Information against an eavesdropper"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,

    /// Write output to this file (for `sweep`: a directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct Scenario {
    /// Service rate of both queues.
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Capture probability of each packet.
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form AoI at both receivers and the welfare objective.
    Analyze {
        /// Offered load lambda/mu.
        #[arg(long)]
        rho: f64,
        #[command(flatten)]
        scenario: Scenario,
        /// Trade-off weight.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
    },
    /// Offered load maximizing the welfare objective.
    Optimize {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
    },
    /// Limit of the optimal load as the capture probability vanishes.
    Asymptote {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
    },
    /// Discrete-event simulation of both queues.
    Simulate {
        #[arg(long)]
        rho: f64,
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Arrivals per replication.
        #[arg(long, default_value_t = 1_000_000)]
        arrivals: u64,
        #[arg(long, default_value_t = SimConfig::DEFAULT_REPLICATIONS)]
        replications: u32,
        /// Fraction of the horizon discarded as warmup.
        #[arg(long, default_value_t = SimConfig::DEFAULT_WARMUP)]
        warmup: f64,
        /// Dump the event log of replication 0 as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Parameter sweep producing a data table.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Asymptote,
}

impl Figure {
    fn kind(self) -> OutputKind {
        match self {
            Figure::Fig1 => OutputKind::ObjectiveCurve,
            Figure::Fig2 => OutputKind::RhoStarVsBeta,
            Figure::Fig3 => OutputKind::FStarVsA,
            Figure::Fig4 => OutputKind::RhoStarVsA,
            Figure::Asymptote => OutputKind::AsymptoteCurve,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub figure: Figure,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// Single trade-off weight (objective curves only).
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub grid_rho_min: Option<f64>,
    #[arg(long)]
    pub grid_rho_max: Option<f64>,
    #[arg(long)]
    pub grid_rho_step: Option<f64>,
    #[arg(long)]
    pub grid_beta_min: Option<f64>,
    #[arg(long)]
    pub grid_beta_max: Option<f64>,
    #[arg(long)]
    pub grid_beta_step: Option<f64>,
    /// Lower end of the log-spaced a axis.
    #[arg(long)]
    pub grid_a_min: Option<f64>,
    #[arg(long)]
    pub grid_a_max: Option<f64>,
    /// Number of log-spaced a values.
    #[arg(long)]
    pub grid_a_points: Option<usize>,
    /// Explicit capture probabilities, overriding the beta axis.
    #[arg(long, value_delimiter = ',')]
    pub beta_list: Option<Vec<f64>>,
    /// Explicit weights, overriding the a axis.
    #[arg(long, value_delimiter = ',')]
    pub a_list: Option<Vec<f64>>,
}

impl SweepArgs {
    pub fn grid(&self) -> Result<SweepGrid> {
        let mut g = SweepGrid::default_for(self.figure.kind());
        g.mu = self.mu;
        if self.grid_rho_min.is_some()
            || self.grid_rho_max.is_some()
            || self.grid_rho_step.is_some()
        {
            g.rho_values = stepped(
                self.grid_rho_min.unwrap_or(0.01),
                self.grid_rho_max.unwrap_or(0.99),
                self.grid_rho_step.unwrap_or(0.005),
            )?;
        }
        if self.grid_beta_min.is_some()
            || self.grid_beta_max.is_some()
            || self.grid_beta_step.is_some()
        {
            g.beta_values = stepped(
                self.grid_beta_min.unwrap_or(0.05),
                self.grid_beta_max.unwrap_or(1.0),
                self.grid_beta_step.unwrap_or(0.05),
            )?;
        }
        if self.grid_a_min.is_some() || self.grid_a_max.is_some() || self.grid_a_points.is_some() {
            g.a_values = log_spaced(
                self.grid_a_min.unwrap_or(1e-4),
                self.grid_a_max.unwrap_or(1e2),
                self.grid_a_points.unwrap_or(50),
            )?;
        }
        if let Some(b) = &self.beta_list {
            g.beta_values = b.clone();
        }
        if let Some(a) = &self.a_list {
            g.a_values = a.clone();
        }
        if let Some(a) = self.a {
            g.a_values = vec![a];
        }
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub rho: f64,
    pub mu: f64,
    pub beta: f64,
    pub a: f64,
    pub delta_b: f64,
    /// `None` when nothing is captured (infinite AoI).
    pub delta_e: Option<f64>,
    pub u1: f64,
    pub u2: Option<f64>,
    /// `None` when `beta = 0`.
    pub objective: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct OptimizeReport {
    pub beta: f64,
    pub a: f64,
    pub mu: f64,
    #[serde(flatten)]
    pub result: OptimResult,
}

#[derive(Debug, Serialize)]
pub struct AsymptoteReport {
    pub a: f64,
    #[serde(flatten)]
    pub result: AsymptoteResult,
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub config: SimConfig,
    pub delta_b_theory: f64,
    pub delta_e_theory: Option<f64>,
    pub result: SimResult,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "inf".to_string(), |v| v.to_string())
}

/// A flat list of labeled values for human and CSV output.
trait Fields {
    fn fields(&self) -> Vec<(&'static str, String)>;
}

impl Fields for AnalyzeReport {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("rho", self.rho.to_string()),
            ("mu", self.mu.to_string()),
            ("beta", self.beta.to_string()),
            ("a", self.a.to_string()),
            ("delta_b", self.delta_b.to_string()),
            ("delta_e", opt(self.delta_e)),
            ("u1", self.u1.to_string()),
            ("u2", opt(self.u2)),
            (
                "objective",
                self.objective
                    .map_or_else(|| "undefined".into(), |v| v.to_string()),
            ),
        ]
    }
}

impl Fields for OptimizeReport {
    fn fields(&self) -> Vec<(&'static str, String)> {
        let r = &self.result;
        vec![
            ("beta", self.beta.to_string()),
            ("a", self.a.to_string()),
            ("mu", self.mu.to_string()),
            ("rho_star", r.rho_star.to_string()),
            ("objective_at_star", r.objective_at_star.to_string()),
            ("objective", format!("{:?}", r.objective).to_lowercase()),
            ("iterations", r.iterations.to_string()),
            ("converged", r.converged.to_string()),
            ("bracket_lo", r.bracket.0.to_string()),
            ("bracket_hi", r.bracket.1.to_string()),
        ]
    }
}

impl Fields for AsymptoteReport {
    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("a", self.a.to_string()),
            ("rho_tilde", self.result.rho_tilde.to_string()),
            ("residual", self.result.residual.to_string()),
            ("iterations", self.result.iterations.to_string()),
        ]
    }
}

impl Fields for SimulateReport {
    fn fields(&self) -> Vec<(&'static str, String)> {
        let r = &self.result;
        let na = |x: Option<f64>| x.map_or_else(|| "na".to_string(), |v| v.to_string());
        vec![
            ("rho", self.config.params.rho().to_string()),
            ("mu", self.config.params.mu().to_string()),
            ("beta", self.config.params.beta().to_string()),
            ("seed", self.config.seed.to_string()),
            ("arrivals", self.config.num_arrivals.to_string()),
            ("replications", self.config.num_replications.to_string()),
            ("warmup", self.config.warmup_fraction.to_string()),
            ("delta_b_hat", r.delta_b_hat.to_string()),
            ("ci_halfwidth_b", na(r.ci_halfwidth_b)),
            ("delta_b_theory", self.delta_b_theory.to_string()),
            ("delta_e_hat", na(r.delta_e_hat)),
            ("ci_halfwidth_e", na(r.ci_halfwidth_e)),
            ("delta_e_theory", opt(self.delta_e_theory)),
            ("eavesdropped_fraction", r.eavesdropped_fraction.to_string()),
            ("sim_horizon", r.sim_horizon.to_string()),
            ("bob_mean_system_time", r.bob_mean_system_time.to_string()),
        ]
    }
}

fn render<T: Serialize + Fields>(
    report: &T,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    match format {
        OutputFormat::Human => {
            for (k, v) in report.fields() {
                writeln!(out, "{k} = {v}")?;
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, report)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            let fields = report.fields();
            let mut w = csv::Writer::from_writer(out);
            w.write_record(fields.iter().map(|(k, _)| *k))?;
            w.write_record(fields.iter().map(|(_, v)| v.as_str()))?;
            w.flush()?;
        }
    }
    Ok(())
}

fn analyze(rho: f64, s: Scenario, a: f64) -> Result<AnalyzeReport> {
    let params = SystemParams::from_load(rho, s.mu, s.beta)?;
    let w = TradeoffWeight::new(a)?;
    let pair = aoi_pair(&params)?;
    let (u1, u2) = utilities(&params)?;
    let objective = if s.beta > 0.0 {
        Some(bergson_objective(&params, w)?)
    } else {
        None
    };
    Ok(AnalyzeReport {
        rho,
        mu: s.mu,
        beta: s.beta,
        a,
        delta_b: pair.delta_b,
        delta_e: finite(pair.delta_e),
        u1,
        u2: finite(u2),
        objective,
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) => EXIT_DOMAIN,
        Error::NoConvergence { .. } | Error::Degenerate { .. } => EXIT_NO_CONVERGENCE,
        Error::Io(_) => EXIT_IO,
    }
}

fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

/// Runs a parsed invocation and returns the exit status.
pub fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Analyze { rho, scenario, a } => {
            let report = analyze(*rho, *scenario, *a)?;
            with_output(out, stdout, |w| render(&report, cli.format, w))?;
            Ok(EXIT_OK)
        }
        Command::Optimize { scenario, a } => {
            let w = TradeoffWeight::new(*a)?;
            let result = maximize_objective(scenario.beta, w, scenario.mu)?;
            let report = OptimizeReport {
                beta: scenario.beta,
                a: *a,
                mu: scenario.mu,
                result,
            };
            with_output(out, stdout, |w| render(&report, cli.format, w))?;
            Ok(if result.converged {
                EXIT_OK
            } else {
                EXIT_NO_CONVERGENCE
            })
        }
        Command::Asymptote { a } => {
            let report = AsymptoteReport {
                a: *a,
                result: asymptotic_root(TradeoffWeight::new(*a)?),
            };
            with_output(out, stdout, |w| render(&report, cli.format, w))?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            rho,
            scenario,
            seed,
            arrivals,
            replications,
            warmup,
            trace,
        } => {
            let params = SystemParams::from_load(*rho, scenario.mu, scenario.beta)?;
            let config = SimConfig {
                warmup_fraction: *warmup,
                num_replications: *replications,
                ..SimConfig::new(params, *arrivals, *seed)
            };
            config.validate()?;
            let theory = aoi_pair(&params)?;
            let result = sim::run(&config)?;
            if let Some(path) = trace {
                let rec = sim::record(&config, 0)?;
                sim::write_events_csv(&rec.events, BufWriter::new(File::create(path)?))?;
            }
            let report = SimulateReport {
                config,
                delta_b_theory: theory.delta_b,
                delta_e_theory: finite(theory.delta_e),
                result,
            };
            with_output(out, stdout, |w| render(&report, cli.format, w))?;
            Ok(EXIT_OK)
        }
        Command::Sweep(args) => {
            let grid = args.grid()?;
            let output = Sweep::new(grid.mu).run(&grid)?;
            let format = match cli.format {
                OutputFormat::Json => Format::JsonLines,
                _ => Format::Csv,
            };
            match out {
                Some(dir) => {
                    fs::create_dir_all(dir)?;
                    for (part, table) in output.parts() {
                        let path = dir.join(grid.file_name(&part, format));
                        let mut w = BufWriter::new(File::create(&path)?);
                        table.write(format, &mut w)?;
                        w.flush()?;
                        writeln!(stdout, "{}", path.display())?;
                    }
                }
                None => {
                    for (i, (_, table)) in output.parts().into_iter().enumerate() {
                        if i > 0 {
                            writeln!(stdout)?;
                        }
                        table.write(format, stdout)?;
                    }
                }
            }
            Ok(output_status(&output))
        }
    }
}

fn output_status(output: &crate::experiments::SweepOutput) -> i32 {
    use crate::experiments::SweepOutput as O;
    let failed = match output {
        O::ObjectiveCurves(t) => t.maxima.rows.iter().any(|r| r.status != "ok"),
        O::RhoStarVsBeta(t) => t.rows.iter().any(|r| r.status != "ok"),
        O::FStarVsA(t) => t.rows.iter().any(|r| r.status != "ok"),
        O::RhoStarVsA(t) => t.rows.iter().any(|r| r.status != "ok"),
        O::Asymptote(_) => false,
    };
    if failed {
        EXIT_NO_CONVERGENCE
    } else {
        EXIT_OK
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(&cli, stdout, stderr),
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{rendered}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{rendered}");
                    EXIT_USAGE
                }
            }
        }
    }
}
