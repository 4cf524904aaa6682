//! Monte Carlo experiment driver: SNR sweeps, paired-instance SER
//! estimation, worst-case decode timing, and CSV/JSON report emission.
//!
//! Every (SNR point, trial) pair derives its own RNG substream from
//! (master seed, point index, trial index), so reports are bit-identical
//! across runs and across worker counts, and adding trials never changes
//! the instances already drawn. Within a trial all configured detectors see
//! the same (H, x, ε), which makes SER comparisons paired.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    expand_channel, sample_channel, sample_real_channel, snr_to_noise_variance, transmit,
    LinearSystem,
};
use crate::constellation::Constellation;
use crate::detectors::DetectorSpec;
use crate::posterior::mmse_posterior;
use crate::tree::{dump_edge_list, max_spanning_tree};
use crate::{Error, Result};

/// Report serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Full description of one sweep; two runs with equal configs produce
/// byte-identical reports (timing fields aside).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub qam_order: u32,
    pub snr_grid_db: Vec<f64>,
    pub trials_per_point: u64,
    pub detectors: Vec<DetectorSpec>,
    pub master_seed: u64,
    /// Run a real-valued system directly: H is tx×rx real with N(0,1)
    /// entries and the alphabet is the PAM of `qam_order`.
    pub real_mode: bool,
    pub output_format: OutputFormat,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tx_antennas == 0 || self.rx_antennas == 0 {
            return Err(Error::InvalidArgument(
                "antenna counts must be at least 1".into(),
            ));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::InvalidArgument("SNR grid must be nonempty".into()));
        }
        if self.trials_per_point == 0 {
            return Err(Error::InvalidArgument(
                "trials_per_point must be at least 1".into(),
            ));
        }
        if self.detectors.is_empty() {
            return Err(Error::InvalidArgument(
                "detector list must be nonempty".into(),
            ));
        }
        Constellation::make_qam(self.qam_order).map(|_| ())
    }

    /// Number of real variables per instance.
    pub fn n_real_vars(&self) -> usize {
        if self.real_mode {
            self.tx_antennas
        } else {
            2 * self.tx_antennas
        }
    }
}

/// Accumulated results for one (SNR, detector) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub snr_db: f64,
    pub detector: String,
    pub trials: u64,
    pub symbol_errors: u64,
    pub ser: f64,
    pub vector_error_rate: f64,
    pub max_detect_time_us: f64,
    pub mean_detect_time_us: f64,
    /// Complex-symbol errors (a pair of real components counts as one
    /// symbol); absent for real-mode sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complex_symbol_errors: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ser_complex: Option<f64>,
}

/// Sweep results plus the echoed configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub cells: Vec<CellReport>,
}

/// Derives the RNG substream for one (point, trial) pair.
pub fn trial_rng(master_seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    // ChaCha streams are cheap and independent; pack the coordinates into one
    rng.set_stream(point.wrapping_shl(40) ^ trial);
    rng
}

struct Tally {
    symbol_errors: u64,
    vector_errors: u64,
    complex_errors: u64,
    max_ns: u64,
    sum_ns: u64,
}

impl Tally {
    fn zero() -> Self {
        Tally {
            symbol_errors: 0,
            vector_errors: 0,
            complex_errors: 0,
            max_ns: 0,
            sum_ns: 0,
        }
    }

    fn merge(mut self, other: &Tally) -> Self {
        self.symbol_errors += other.symbol_errors;
        self.vector_errors += other.vector_errors;
        self.complex_errors += other.complex_errors;
        self.max_ns = self.max_ns.max(other.max_ns);
        self.sum_ns += other.sum_ns;
        self
    }
}

fn draw_instance(
    cfg: &SimConfig,
    c: &Constellation,
    noise_variance: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(LinearSystem, DVector<f64>)> {
    let h = if cfg.real_mode {
        sample_real_channel(cfg.rx_antennas, cfg.tx_antennas, rng)?
    } else {
        expand_channel(&sample_channel(cfg.rx_antennas, cfg.tx_antennas, rng)?)
    };
    let n = h.ncols();
    let m = h.nrows();
    let x = DVector::from_fn(n, |_, _| {
        c.levels()[rng.random_range(0..c.len())]
    });
    let mut sys = LinearSystem::new(h, DVector::zeros(m), noise_variance)?;
    if !cfg.real_mode {
        sys = sys.with_complex_pairs(cfg.tx_antennas);
    }
    let y = transmit(&sys, &x, rng)?;
    sys.set_observation(y)?;
    Ok((sys, x))
}

/// Runs the configured sweep. Within each (SNR, trial) cell every detector
/// decodes the same instance; trials run on the rayon worker pool and merge
/// into order-independent integer tallies.
pub fn run_sweep(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let c = Constellation::make_qam(cfg.qam_order)?;
    let n_vars = cfg.n_real_vars();

    // A budget refusal depends only on the instance shape, so probe it once
    // per detector and mark those cells absent instead of aborting.
    let active: Vec<DetectorSpec> = cfg
        .detectors
        .iter()
        .filter(|spec| {
            !matches!(spec, DetectorSpec::Ml)
                || (c.len() as f64).powi(n_vars as i32)
                    <= crate::detectors::DEFAULT_ML_BUDGET as f64
        })
        .cloned()
        .collect();

    let mut cells = Vec::new();
    for (pi, &snr_db) in cfg.snr_grid_db.iter().enumerate() {
        if active.is_empty() {
            break;
        }
        let noise_variance = snr_to_noise_variance(snr_db, n_vars, c.energy())?;
        let tallies = (0..cfg.trials_per_point)
            .into_par_iter()
            .map(|trial| -> Result<Vec<Tally>> {
                let mut rng = trial_rng(cfg.master_seed, pi as u64, trial);
                let (sys, x) = draw_instance(cfg, &c, noise_variance, &mut rng)?;
                let mut per_detector = Vec::with_capacity(active.len());
                for spec in &active {
                    let res = spec.detect(&sys, &c)?;
                    let mut t = Tally::zero();
                    let mut any = false;
                    for (a, b) in res.hard.iter().zip(x.iter()) {
                        if a != b {
                            t.symbol_errors += 1;
                            any = true;
                        }
                    }
                    t.vector_errors = u64::from(any);
                    if let Some(pairs) = sys.n_complex() {
                        for p in 0..pairs {
                            if res.hard[p] != x[p] || res.hard[p + pairs] != x[p + pairs] {
                                t.complex_errors += 1;
                            }
                        }
                    }
                    let ns = res.elapsed.as_nanos().min(u128::from(u64::MAX)) as u64;
                    t.max_ns = ns;
                    t.sum_ns = ns;
                    per_detector.push(t);
                }
                Ok(per_detector)
            })
            .try_reduce(
                Vec::new,
                |a, b| {
                    if a.is_empty() {
                        return Ok(b);
                    }
                    if b.is_empty() {
                        return Ok(a);
                    }
                    Ok(a.into_iter().zip(b.iter()).map(|(x, y)| x.merge(y)).collect())
                },
            )?;

        let symbols_per_trial = n_vars as u64;
        for (spec, tally) in active.iter().zip(tallies.iter()) {
            let trials = cfg.trials_per_point;
            let total_symbols = trials * symbols_per_trial;
            let (complex_symbol_errors, ser_complex) = if cfg.real_mode {
                (None, None)
            } else {
                let total_complex = trials * cfg.tx_antennas as u64;
                (
                    Some(tally.complex_errors),
                    Some(tally.complex_errors as f64 / total_complex as f64),
                )
            };
            cells.push(CellReport {
                snr_db,
                detector: spec.to_string(),
                trials,
                symbol_errors: tally.symbol_errors,
                ser: tally.symbol_errors as f64 / total_symbols as f64,
                vector_error_rate: tally.vector_errors as f64 / trials as f64,
                max_detect_time_us: tally.max_ns as f64 / 1000.0,
                mean_detect_time_us: tally.sum_ns as f64 / trials as f64 / 1000.0,
                complex_symbol_errors,
                ser_complex,
            });
        }
    }
    Ok(SimReport {
        config: cfg.clone(),
        cells,
    })
}

/// CSV header used by [`emit_report`].
pub const CSV_HEADER: &str =
    "snr_db,detector,trials,symbol_errors,ser,vector_error_rate,max_detect_time_us,mean_detect_time_us";

/// Serializes a report: CSV with one row per cell, or a JSON document with
/// the same fields plus the echoed configuration. Decimal separator is
/// always '.', independent of locale.
pub fn emit_report(report: &SimReport, format: OutputFormat) -> Result<Vec<u8>> {
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(CSV_HEADER);
            out.push('\n');
            for cell in &report.cells {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    cell.snr_db,
                    cell.detector,
                    cell.trials,
                    cell.symbol_errors,
                    cell.ser,
                    cell.vector_error_rate,
                    cell.max_detect_time_us,
                    cell.mean_detect_time_us
                ));
            }
            Ok(out.into_bytes())
        }
        OutputFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(report).map_err(|e| {
                Error::NumericFailure(format!("report serialization failed: {e}"))
            })?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// Builds the Chow-Liu tree for the first instance of the sweep (point 0,
/// trial 0) and returns it as `child parent weight` lines — a debugging aid
/// behind the CLI's `--dump-tree` flag.
pub fn dump_first_tree(cfg: &SimConfig) -> Result<String> {
    cfg.validate()?;
    let c = Constellation::make_qam(cfg.qam_order)?;
    let n_vars = cfg.n_real_vars();
    let noise_variance = snr_to_noise_variance(cfg.snr_grid_db[0], n_vars, c.energy())?;
    let mut rng = trial_rng(cfg.master_seed, 0, 0);
    let (sys, _) = draw_instance(cfg, &c, noise_variance, &mut rng)?;
    let post = mmse_posterior(&sys, c.energy())?;
    let weights = post.squared_correlation_weights()?;
    let tree = max_spanning_tree(&weights)?;
    Ok(dump_edge_list(&tree, &weights))
}
