use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use relaycap_core::sweep::{csv_record, CSV_HEADER};
use relaycap_core::{
    analyze_sweep, emit_csv, evaluate_gains, gains_from_geometry, run_sweep, two_hop_allocate,
    verify, BetaPolicy, LinkGains,
};
use thiserror::Error;

use crate::config::{parse_config, ConfigError, RunConfig, HIGH_SNR_PRESET, LOW_SNR_PRESET};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

const DEFAULT_OUT: &str = "sweep.csv";

#[derive(Debug, Parser)]
#[command(name = "relaycap", version, about = "Relay channel capacity bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Configuration file (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    pub config: Option<PathBuf>,

    /// Built-in scenario, used when no configuration file is given [default: low-snr].
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,

    /// CSV output path for `sweep`.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Samples per verification suite.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: Option<u64>,

    /// Seed for the verification samples.
    #[arg(long, global = true, value_name = "S")]
    pub seed: Option<u64>,

    /// Relay position along the source-destination axis, meters.
    #[arg(
        long = "d-sr",
        global = true,
        value_name = "X",
        allow_negative_numbers = true
    )]
    pub d_sr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Rates at one relay position.
    Capacity,
    /// Rates over a range of relay positions, written as CSV.
    Sweep,
    /// Two-hop power allocation at one relay position.
    OptimizePower,
    /// Cross-check the closed forms against independent oracles.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    HighSnr,
    LowSnr,
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Model(#[from] relaycap_core::Error),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) | AppError::Model(_) => EXIT_USAGE,
            AppError::File { .. } | AppError::Io(_) => EXIT_IO,
        }
    }
}

/// Loads the configuration named on the command line and applies flag overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, AppError> {
    let mut config = match (&cli.config, cli.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|source| AppError::File {
                path: path.clone(),
                source,
            })?;
            parse_config(&text)?
        }
        (None, Some(Preset::HighSnr)) => parse_config(HIGH_SNR_PRESET)?,
        (None, Some(Preset::LowSnr) | None) => parse_config(LOW_SNR_PRESET)?,
    };
    if let Some(out) = &cli.out {
        config.out_path = Some(out.clone());
    }
    if let Some(n) = cli.samples {
        config.samples = n as usize;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(x) = cli.d_sr {
        config.d_sr = x;
    }
    Ok(config)
}

/// Runs one command, writing everything user-facing to `out`. Returns the
/// process exit status.
pub fn execute(command: Command, config: &RunConfig, out: &mut dyn Write) -> Result<i32, AppError> {
    match command {
        Command::Capacity => capacity(config, out),
        Command::Sweep => sweep(config, out),
        Command::OptimizePower => optimize_power(config, out),
        Command::Verify => run_verify(config, out),
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, AppError> {
    let config = resolve_config(cli)?;
    execute(cli.command, &config, out)
}

fn position_gains(config: &RunConfig) -> Result<LinkGains, AppError> {
    let overrides = &config.gains;
    if overrides.sr.is_some() && overrides.rd.is_some() && overrides.sd.is_some() {
        return Ok(overrides.apply(LinkGains::default()));
    }
    let geometric = gains_from_geometry(&config.geometry(), &config.path)?;
    Ok(overrides.apply(geometric))
}

fn capacity(config: &RunConfig, out: &mut dyn Write) -> Result<i32, AppError> {
    let gains = position_gains(config)?;
    let fallback = gains.gamma_sr == 0.0 || gains.gamma_rd == 0.0;
    // A relay that hears nothing (or cannot be heard) only adds noise, so it
    // stays silent and the relay-dependent rates collapse to the direct link.
    let beta = if fallback {
        BetaPolicy::Fixed(0.0)
    } else {
        config.beta
    };
    let row = evaluate_gains(config.d_sr, &gains, &config.budget, beta)?;
    let beta_value = beta.resolve(&gains, &config.budget)?;

    writeln!(
        out,
        "relay at d_sr = {} m (d_sd = {} m, d_r = {} m)",
        config.d_sr, config.d_sd, config.d_r
    )?;
    writeln!(
        out,
        "gains: gamma_sr = {:.6e}, gamma_rd = {:.6e}, gamma_sd = {:.6e}",
        gains.gamma_sr, gains.gamma_rd, gains.gamma_sd
    )?;
    writeln!(
        out,
        "budget: p_s_max = {} W, p_r_max = {} W, noise = {} W",
        config.budget.p_s_max, config.budget.p_r_max, config.budget.noise
    )?;
    let mark = if fallback {
        "  [direct-link fallback]"
    } else {
        ""
    };
    writeln!(out, "direct : {:.9} bits", row.rate_direct)?;
    writeln!(out, "MRC    : {:.9} bits{mark}", row.rate_mrc)?;
    writeln!(
        out,
        "AF     : {:.9} bits (beta = {:.6e}){mark}",
        row.rate_af, beta_value
    )?;
    writeln!(
        out,
        "cutset : {:.9} bits (rho* = {:.9}, binding {}){mark}",
        row.rate_cutset, row.rho_star, row.binding
    )?;
    if fallback {
        writeln!(
            out,
            "relay hop has zero gain; relay-dependent rates equal the direct link"
        )?;
    }
    writeln!(out, "{CSV_HEADER}")?;
    writeln!(out, "{}", csv_record(&row).join(","))?;
    Ok(EXIT_OK)
}

fn sweep(config: &RunConfig, out: &mut dyn Write) -> Result<i32, AppError> {
    let output = run_sweep(&config.sweep_spec())?;
    let path = config
        .out_path
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let file = fs::File::create(&path).map_err(|source| AppError::File {
        path: path.clone(),
        source,
    })?;
    emit_csv(&output.rows, io::BufWriter::new(file)).map_err(|source| AppError::File {
        path: path.clone(),
        source,
    })?;

    writeln!(
        out,
        "wrote {} rows to {}",
        output.rows.len(),
        path.display()
    )?;
    for skip in &output.skipped {
        writeln!(out, "skipped d_sr = {}: {}", skip.d_sr_axis, skip.reason)?;
    }
    if output.rows.len() >= 3 {
        writeln!(out, "{}", analyze_sweep(&output.rows)?)?;
    } else {
        writeln!(out, "too few rows for shape analysis")?;
    }
    Ok(EXIT_OK)
}

fn optimize_power(config: &RunConfig, out: &mut dyn Write) -> Result<i32, AppError> {
    let gains = position_gains(config)?;
    let a = two_hop_allocate(&gains, &config.budget)?;
    writeln!(out, "relay at d_sr = {} m", config.d_sr)?;
    writeln!(out, "p_s  = {:.9e} W", a.p_s)?;
    writeln!(out, "p_r  = {:.9e} W", a.p_r)?;
    writeln!(out, "flow = {:.9e} W", a.flow)?;
    writeln!(out, "rate = {:.9} bits", a.rate)?;
    writeln!(
        out,
        "balance residual = {:.3e} W",
        a.balance_residual(&gains)
    )?;
    Ok(EXIT_OK)
}

fn run_verify(config: &RunConfig, out: &mut dyn Write) -> Result<i32, AppError> {
    writeln!(
        out,
        "verify: {} samples, seed {}",
        config.samples, config.seed
    )?;
    let report = verify::run_all(config.samples, config.seed, &config.sweep_spec())?;
    writeln!(out, "{report}")?;
    let passed = report.passed();
    writeln!(
        out,
        "{}",
        if passed {
            "all invariants hold"
        } else {
            "invariant failures"
        }
    )?;
    Ok(if passed { EXIT_OK } else { EXIT_INVARIANT })
}
