//! Command-line front end for the `bcw` binary.

pub mod figure;
pub mod runlog;
pub mod spec;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use bcw_core::bounds::{bound_curve, to_csv, BoundReport, ChannelParams, Method};
use bcw_core::channels::{holevo_coherent_rate, ChannelSpec, QuadratureSpec};
use bcw_core::exec::Execution;
use bcw_core::verify::{run_suite, SuiteConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use runlog::{persist_run, RunRecord};
use spec::{parse_dist, parse_env, parse_grid, DistArg, EnvArg};

/// Exit status for a verify run with theorem violations.
pub const EXIT_VIOLATIONS: u8 = 1;
/// Exit status for errors, including checks that could not run.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "bcw", version, about = "Capacity bounds for non-Gaussian bosonic channels")]
pub struct Cli {
    /// Append an NDJSON run record to this file.
    #[arg(long, global = true, env = runlog::ENV_VAR)]
    pub runlog: Option<PathBuf>,
    /// Disable data parallelism.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper and lower capacity bounds over a photon grid.
    Bounds {
        #[command(subcommand)]
        channel: BoundsChannel,
    },
    /// CSV data for a named figure.
    Figure {
        /// fig1 or fig2
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized inequality checks.
    Verify {
        /// Key-value (TOML) configuration; defaults apply when omitted.
        config: Option<PathBuf>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one CSV row per trial.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Simulated coherent-state Holevo rate next to the bounds.
    Holevo {
        #[command(subcommand)]
        channel: HolevoChannel,
    },
}

#[derive(Debug, Args)]
pub struct AttenuatorArgs {
    /// Transmissivity in [0, 1].
    #[arg(long)]
    pub lambda: f64,
    /// Environment: thermal:N, number:n, vacuum, coherent:re[,im], superposition:c..., stats:N_E,S_E or a JSON file.
    #[arg(long)]
    pub env: String,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Noise strength t > 0.
    #[arg(long)]
    pub t: f64,
    /// Density: gaussian:iso[:var], gaussian:vq,vp, disc:R, stats:E,H or a JSON file.
    #[arg(long)]
    pub dist: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Photon budgets: a value, a comma list, or start:stop:step.
    #[arg(long = "N", alias = "n", default_value = "0:20:0.1")]
    pub grid: String,
    #[arg(long, default_value = "epi")]
    pub method: Method,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum BoundsChannel {
    Attenuator {
        #[command(flatten)]
        channel: AttenuatorArgs,
        #[command(flatten)]
        curve: CurveArgs,
    },
    ClassicalNoise {
        #[command(flatten)]
        channel: NoiseArgs,
        #[command(flatten)]
        curve: CurveArgs,
    },
}

#[derive(Debug, Args)]
pub struct HolevoArgs {
    /// Mean photon number of the coherent ensemble.
    #[arg(long = "N", alias = "n")]
    pub n: f64,
    /// Fock truncation of the environment and the minimum input truncation.
    #[arg(long, default_value_t = 40)]
    pub dim: usize,
    /// Quadrature nodes per axis for classical noise.
    #[arg(long, default_value_t = QuadratureSpec::default().nodes_per_axis)]
    pub nodes: usize,
}

#[derive(Debug, Subcommand)]
pub enum HolevoChannel {
    Attenuator {
        #[command(flatten)]
        channel: AttenuatorArgs,
        #[command(flatten)]
        run: HolevoArgs,
    },
    ClassicalNoise {
        #[command(flatten)]
        channel: NoiseArgs,
        #[command(flatten)]
        run: HolevoArgs,
    },
}

/// A parsed channel: its bound parameters and, when simulable, its full spec.
struct Channel {
    params: ChannelParams,
    spec: Option<ChannelSpec>,
    input: (&'static str, Value),
}

impl Channel {
    fn attenuator(a: &AttenuatorArgs) -> Result<Self> {
        let env = parse_env(&a.env).context("invalid --env")?;
        let stats = env.stats()?;
        let params = ChannelParams::attenuator(a.lambda, stats.mean_photon, stats.entropy);
        params.validate()?;
        let spec = match &env {
            EnvArg::State(s) => Some(ChannelSpec::Attenuator {
                lambda: a.lambda,
                env: s.clone(),
            }),
            EnvArg::Stats(_) => None,
        };
        Ok(Channel {
            params,
            spec,
            input: ("env", serde_json::to_value(&env)?),
        })
    }

    fn classical_noise(n: &NoiseArgs) -> Result<Self> {
        let dist = parse_dist(&n.dist).context("invalid --dist")?;
        let stats = dist.stats()?;
        let params = ChannelParams::classical_noise(n.t, stats.energy, stats.entropy);
        params.validate()?;
        let spec = match &dist {
            DistArg::Density(d) => Some(ChannelSpec::ClassicalNoise {
                t: n.t,
                noise: d.clone(),
            }),
            DistArg::Stats(_) => None,
        };
        Ok(Channel {
            params,
            spec,
            input: ("dist", serde_json::to_value(&dist)?),
        })
    }

    fn simulable(&self) -> Result<&ChannelSpec> {
        self.spec
            .as_ref()
            .context("simulation needs a state or density spec, not bare stats")
    }
}

fn emit(out: Option<&Path>, text: &str, record: &mut RunRecord) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            record.outputs.push(path.to_path_buf());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn json_text<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Reads the JSON emitted by `bcw bounds --format json`.
pub fn parse_bounds_json(text: &str) -> Result<Vec<BoundReport>> {
    Ok(serde_json::from_str(text)?)
}

fn cmd_bounds(channel: &BoundsChannel, exec: Execution, record: &mut RunRecord) -> Result<u8> {
    let (chan, curve) = match channel {
        BoundsChannel::Attenuator { channel, curve } => (Channel::attenuator(channel)?, curve),
        BoundsChannel::ClassicalNoise { channel, curve } => (Channel::classical_noise(channel)?, curve),
    };
    record.input(chan.input.0, &chan.input.1);
    let grid = parse_grid(&curve.grid).context("invalid --N")?;
    let reports = bound_curve(&chan.params, &grid, curve.method, exec)?;
    let text = match curve.format {
        Format::Json => json_text(&reports)?,
        Format::Csv => {
            let header = vec![
                format!("bcw {} bounds", env!("CARGO_PKG_VERSION")),
                format!("spec: {}", serde_json::to_string(&chan.params)?),
                format!("method: {}", curve.method.as_str()),
                "units: nats".to_string(),
            ];
            to_csv(&reports, &header)
        }
    };
    emit(curve.out.as_deref(), &text, record)?;
    Ok(0)
}

fn cmd_figure(name: &str, out: Option<&Path>, exec: Execution, record: &mut RunRecord) -> Result<u8> {
    let text = figure::figure_csv(name, exec)?;
    emit(out, &text, record)?;
    Ok(0)
}

fn cmd_verify(
    config: Option<&Path>,
    out: Option<&Path>,
    csv: Option<&Path>,
    exec: Execution,
    record: &mut RunRecord,
) -> Result<u8> {
    let cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            SuiteConfig::from_toml(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => SuiteConfig::default(),
    };
    record.config["suite"] = serde_json::to_value(&cfg)?;
    let report = run_suite(&cfg, exec)?;
    for c in &report.checks {
        let s = &c.summary;
        eprintln!(
            "{:<7} {:>4} trials  {} violations  {} flagged  {} errors  min margin {}",
            c.name,
            s.trials,
            s.violations,
            s.flagged,
            s.errors,
            s.min_margin.map_or("-".to_string(), |m| format!("{m:.3e}"))
        );
        for e in c.errors.iter().take(3) {
            eprintln!("  error: {e}");
        }
    }
    emit(out, &(report.to_json() + "\n"), record)?;
    if let Some(path) = csv {
        std::fs::write(path, report.to_csv()).with_context(|| format!("writing {}", path.display()))?;
        record.outputs.push(path.to_path_buf());
    }
    Ok(if report.violations() > 0 {
        eprintln!("FAILED: {} theorem violations", report.violations());
        EXIT_VIOLATIONS
    } else if report.theorem_errors() > 0 {
        eprintln!("FAILED: {} checks could not run", report.theorem_errors());
        EXIT_ERROR
    } else {
        eprintln!("passed");
        0
    })
}

fn cmd_holevo(channel: &HolevoChannel, exec: Execution, record: &mut RunRecord) -> Result<u8> {
    let (chan, run) = match channel {
        HolevoChannel::Attenuator { channel, run } => (Channel::attenuator(channel)?, run),
        HolevoChannel::ClassicalNoise { channel, run } => (Channel::classical_noise(channel)?, run),
    };
    record.input(chan.input.0, &chan.input.1);
    let quad = QuadratureSpec {
        nodes_per_axis: run.nodes,
        ..QuadratureSpec::default()
    };
    let estimate = holevo_coherent_rate(chan.simulable()?, run.n, run.dim, &quad, exec)?;
    let epi = chan.params.bounds(run.n, Method::Epi)?;
    let epni = chan.params.bounds(run.n, Method::Epni)?;
    eprintln!(
        "chi = {:.6} nats | epi [{:.6}, {:.6}] | epni [{:.6}, {:.6}]",
        estimate.rate, epi.lower, epi.upper, epni.lower, epni.upper
    );
    let out = json!({
        "N": run.n,
        "dim": run.dim,
        "holevo": estimate,
        "epi": epi,
        "epni": epni,
    });
    emit(None, &json_text(&out)?, record)?;
    Ok(0)
}

/// Runs one command and returns the process exit status.
pub fn run(cli: &Cli) -> Result<u8> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let mut record = RunRecord::new(std::env::args().collect(), json!({ "sequential": cli.sequential }));
    let status = match &cli.command {
        Command::Bounds { channel } => cmd_bounds(channel, exec, &mut record),
        Command::Figure { name, out } => cmd_figure(name, out.as_deref(), exec, &mut record),
        Command::Verify { config, out, csv } => {
            cmd_verify(config.as_deref(), out.as_deref(), csv.as_deref(), exec, &mut record)
        }
        Command::Holevo { channel } => cmd_holevo(channel, exec, &mut record),
    }?;
    if let Some(path) = &cli.runlog {
        persist_run(&record, path);
    }
    Ok(status)
}
