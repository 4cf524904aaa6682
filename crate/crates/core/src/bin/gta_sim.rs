//! Monte Carlo SER benchmark CLI.
//!
//! Sweeps an SNR grid, runs every selected detector on the same channel
//! instances, and prints a CSV or JSON report. Exit code 0 on success,
//! nonzero with a diagnostic line on configuration errors.

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use gta_mimo::harness::{dump_first_tree, emit_report, run_sweep};
use gta_mimo::{DetectorSpec, Error, OutputFormat, SimConfig};

#[derive(Parser, Debug)]
#[command(
    name = "gta-sim",
    about = "Monte Carlo symbol-error-rate benchmark for GTA and baseline MIMO detectors",
    after_help = "SNR convention: SNR(dB) = 10·log10(n·e/σ²) with n the number of REAL \
variables (2× antennas for complex systems), e the mean PAM energy per real dimension, \
and σ² the noise variance per real component. Detectors: zf, mmse, sic, gta, gta:line, \
gta:zf, gta:max, ml, loopybp."
)]
struct Cli {
    /// Transmit antennas (variables per real dimension in --real mode)
    #[arg(long, default_value_t = 4)]
    tx: usize,

    /// Receive antennas; defaults to --tx
    #[arg(long)]
    rx: Option<usize>,

    /// QAM order (4, 16, 64, 256); in --real mode the per-dimension PAM
    /// alphabet of this order is used
    #[arg(long, default_value_t = 16)]
    qam: u32,

    /// First SNR point in dB
    #[arg(long, default_value_t = 8.0)]
    snr_start: f64,

    /// Last SNR point in dB (inclusive)
    #[arg(long, default_value_t = 24.0)]
    snr_stop: f64,

    /// SNR step in dB
    #[arg(long, default_value_t = 4.0)]
    snr_step: f64,

    /// Explicit comma-separated SNR list in dB; overrides start/stop/step
    #[arg(long, conflicts_with_all = ["snr_start", "snr_stop", "snr_step"])]
    snr_list: Option<String>,

    /// Monte Carlo trials per SNR point (one channel use per trial)
    #[arg(long, default_value_t = 10_000)]
    trials: u64,

    /// Comma-separated detector list
    #[arg(long, default_value = "zf,mmse,sic,gta")]
    detectors: String,

    /// Master seed for the reproducible trial substreams
    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Run a real-valued system directly (H is rx×tx with N(0,1) entries)
    #[arg(long)]
    real: bool,

    /// Report format
    #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
    format: String,

    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<String>,

    /// Write the Chow-Liu tree of the first instance (point 0, trial 0) to
    /// this path as `child parent weight` lines
    #[arg(long)]
    dump_tree: Option<String>,
}

fn parse_snr_grid(cli: &Cli) -> Result<Vec<f64>, Error> {
    if let Some(list) = &cli.snr_list {
        let grid: Result<Vec<f64>, _> = list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidArgument(format!("bad SNR value '{s}'")))
            })
            .collect();
        return grid;
    }
    if cli.snr_step <= 0.0 {
        return Err(Error::InvalidArgument("--snr-step must be positive".into()));
    }
    let mut grid = Vec::new();
    let mut v = cli.snr_start;
    while v <= cli.snr_stop + 1e-9 {
        grid.push(v);
        v += cli.snr_step;
    }
    Ok(grid)
}

fn build_config(cli: &Cli) -> Result<SimConfig, Error> {
    let detectors: Result<Vec<DetectorSpec>, _> =
        cli.detectors.split(',').map(str::parse).collect();
    Ok(SimConfig {
        tx_antennas: cli.tx,
        rx_antennas: cli.rx.unwrap_or(cli.tx),
        qam_order: cli.qam,
        snr_grid_db: parse_snr_grid(cli)?,
        trials_per_point: cli.trials,
        detectors: detectors?,
        master_seed: cli.seed,
        real_mode: cli.real,
        output_format: if cli.format == "json" {
            OutputFormat::Json
        } else {
            OutputFormat::Csv
        },
    })
}

fn run(cli: &Cli) -> Result<(), Error> {
    let cfg = build_config(cli)?;
    cfg.validate()?;

    if let Some(path) = &cli.dump_tree {
        let dump = dump_first_tree(&cfg)?;
        fs::write(path, dump).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }

    let report = run_sweep(&cfg)?;
    let bytes = emit_report(&report, cfg.output_format)?;
    match &cli.out {
        Some(path) => fs::write(path, bytes).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes).map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
