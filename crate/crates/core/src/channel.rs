//! Random MIMO channel instances, the complex → real expansion, SNR
//! bookkeeping, and transmission.
//!
//! All detector math runs on the real-valued model: an m×n complex channel
//! becomes a 2m×2n real system with the block structure
//! `[[Re(H), −Im(H)], [Im(H), Re(H)]]`. SNR accounting is likewise done in
//! the real model: `σ² = n_vars · e / 10^(SNR/10)` where `n_vars` counts
//! real variables and `e` is the mean PAM energy per real dimension, and
//! `σ²` is the noise variance per real component. The complex convention
//! differs only by a constant dB offset.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Complex channel matrix with i.i.d. CN(0, 1) entries
/// (the real and imaginary parts each have variance 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexChannel {
    entries: DMatrix<Complex<f64>>,
}

impl ComplexChannel {
    pub fn new(entries: DMatrix<Complex<f64>>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "channel matrix must have at least one row and column".into(),
            ));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<Complex<f64>> {
        &self.entries
    }

    /// Receive antennas (rows).
    pub fn rx(&self) -> usize {
        self.entries.nrows()
    }

    /// Transmit antennas (columns).
    pub fn tx(&self) -> usize {
        self.entries.ncols()
    }
}

/// Real-valued observation model `y = Hx + ε` with ε i.i.d. N(0, σ²)
/// per component.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    h: DMatrix<f64>,
    y: DVector<f64>,
    noise_variance: f64,
    n_complex: Option<usize>,
}

impl LinearSystem {
    pub fn new(h: DMatrix<f64>, y: DVector<f64>, noise_variance: f64) -> Result<Self> {
        if h.nrows() == 0 || h.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "system matrix must have at least one row and column".into(),
            ));
        }
        if y.len() != h.nrows() {
            return Err(Error::InvalidArgument(format!(
                "observation length {} does not match {} rows",
                y.len(),
                h.nrows()
            )));
        }
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be finite and nonnegative, got {noise_variance}"
            )));
        }
        Ok(Self {
            h,
            y,
            noise_variance,
            n_complex: None,
        })
    }

    /// Tags the system with the antenna count of the complex model it was
    /// expanded from; real variable `i` pairs with `i + n_complex`.
    pub fn with_complex_pairs(mut self, n_complex: usize) -> Self {
        self.n_complex = Some(n_complex);
        self
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    /// Noise variance σ² per real component.
    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Antenna count of the originating complex model, if any.
    pub fn n_complex(&self) -> Option<usize> {
        self.n_complex
    }

    /// Number of unknowns (columns of H).
    pub fn n_vars(&self) -> usize {
        self.h.ncols()
    }

    /// Number of observations (rows of H).
    pub fn n_obs(&self) -> usize {
        self.h.nrows()
    }

    /// Replaces the stored observation vector.
    pub fn set_observation(&mut self, y: DVector<f64>) -> Result<()> {
        if y.len() != self.h.nrows() {
            return Err(Error::InvalidArgument(format!(
                "observation length {} does not match {} rows",
                y.len(),
                self.h.nrows()
            )));
        }
        self.y = y;
        Ok(())
    }
}

/// Draws an m×n channel with i.i.d. CN(0, 1) entries.
///
/// Entries are filled row by row so the draw order is stable across runs.
pub fn sample_channel<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<ComplexChannel> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "channel dimensions must be positive, got {m}×{n}"
        )));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut entries = DMatrix::<Complex<f64>>::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            entries[(i, j)] = Complex::new(re * scale, im * scale);
        }
    }
    ComplexChannel::new(entries)
}

/// Draws an m×n real channel with i.i.d. N(0, 1) entries, for running
/// real-valued systems directly.
pub fn sample_real_channel<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "channel dimensions must be positive, got {m}×{n}"
        )));
    }
    let mut h = DMatrix::<f64>::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            h[(i, j)] = rng.sample(StandardNormal);
        }
    }
    Ok(h)
}

/// Double-size real expansion `[[Re(H), −Im(H)], [Im(H), Re(H)]]`.
pub fn expand_channel(hc: &ComplexChannel) -> DMatrix<f64> {
    let m = hc.rx();
    let n = hc.tx();
    let mut h = DMatrix::<f64>::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let z = hc.entries()[(i, j)];
            h[(i, j)] = z.re;
            h[(i, j + n)] = -z.im;
            h[(i + m, j)] = z.im;
            h[(i + m, j + n)] = z.re;
        }
    }
    h
}

/// Expands a complex observation model to the equivalent real one.
///
/// `total_complex_noise_variance` is the variance of the complex noise per
/// receive antenna; each real component then has variance σ²/2.
pub fn expand_to_real(
    hc: &ComplexChannel,
    y_complex: &DVector<Complex<f64>>,
    total_complex_noise_variance: f64,
) -> Result<LinearSystem> {
    if y_complex.len() != hc.rx() {
        return Err(Error::InvalidArgument(format!(
            "complex observation length {} does not match {} receive antennas",
            y_complex.len(),
            hc.rx()
        )));
    }
    let m = hc.rx();
    let mut y = DVector::<f64>::zeros(2 * m);
    for i in 0..m {
        y[i] = y_complex[i].re;
        y[i + m] = y_complex[i].im;
    }
    Ok(LinearSystem::new(expand_channel(hc), y, total_complex_noise_variance / 2.0)?
        .with_complex_pairs(hc.tx()))
}

/// Maps an SNR point to the noise variance per real component:
/// `σ² = n_vars · e / 10^(snr_db/10)`.
///
/// `n_vars` is the number of real variables (twice the antenna count for
/// expanded complex systems) and `e` the mean PAM energy per real dimension.
pub fn snr_to_noise_variance(snr_db: f64, n_vars: usize, e: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "mean symbol energy must be positive, got {e}"
        )));
    }
    if n_vars == 0 {
        return Err(Error::InvalidArgument("n_vars must be at least 1".into()));
    }
    Ok(n_vars as f64 * e / 10f64.powf(snr_db / 10.0))
}

/// Simulates one channel use: `y = Hx + ε` with ε i.i.d. N(0, σ²).
pub fn transmit<R: Rng + ?Sized>(
    sys: &LinearSystem,
    x: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    if x.len() != sys.n_vars() {
        return Err(Error::InvalidArgument(format!(
            "symbol vector length {} does not match {} columns",
            x.len(),
            sys.n_vars()
        )));
    }
    let mut y = sys.h() * x;
    if sys.noise_variance() > 0.0 {
        let std = sys.noise_variance().sqrt();
        for v in y.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v += std * g;
        }
    }
    Ok(y)
}
