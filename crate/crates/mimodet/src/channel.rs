//! Block-fading MIMO channel and noise model.

use crate::linalg::{
    qr_decompose, Complex, ComplexMatrix, ComplexVector, LinalgError,
};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("noise variance must be positive, got {0}")]
    InvalidVariance(f64),
    #[error("need r >= t, got t={t}, r={r}")]
    BadAntennaCounts { t: usize, r: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One fading realization with its QR factors precomputed. The same instance
/// serves a whole fading block of consecutive signals.
#[derive(Debug, Clone)]
pub struct ChannelInstance {
    pub h: ComplexMatrix,
    pub q: ComplexMatrix,
    pub r: ComplexMatrix,
    pub block_remaining: usize,
}

/// Noise variance `phi^2 = t * E_s * 10^(-SNR/10)`, the total per-entry
/// variance of the complex receive noise.
pub fn noise_variance(snr_db: f64, t: usize, es: f64) -> f64 {
    t as f64 * es * 10f64.powf(-snr_db / 10.0)
}

/// SNR and noise bookkeeping for one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub variance: f64,
    pub snr_db: f64,
    pub t: usize,
    pub es: f64,
}

impl NoiseModel {
    pub fn new(snr_db: f64, t: usize, es: f64) -> Self {
        Self {
            variance: noise_variance(snr_db, t, es),
            snr_db,
            t,
            es,
        }
    }
}

fn std_complex_normal<R: Rng>(rng: &mut R, std_per_part: f64) -> Complex {
    let normal = Normal::new(0.0, std_per_part).unwrap();
    Complex::new(normal.sample(rng), normal.sample(rng))
}

/// Draws an r x t matrix of i.i.d. CN(0,1) fading coefficients and computes
/// its QR factors. A rank-deficient draw (measure zero, but possible in
/// floating point) surfaces as an error so the caller can redraw.
pub fn draw_channel<R: Rng>(
    rng: &mut R,
    t: usize,
    r: usize,
) -> Result<ChannelInstance, ChannelError> {
    if r < t {
        return Err(ChannelError::BadAntennaCounts { t, r });
    }
    let std = std::f64::consts::FRAC_1_SQRT_2; // N(0, 1/2) per real part
    let data: Vec<Complex> = (0..r * t).map(|_| std_complex_normal(rng, std)).collect();
    let h = ComplexMatrix::from_rows(r, t, data);
    let (q, rmat) = qr_decompose(&h)?;
    Ok(ChannelInstance {
        h,
        q,
        r: rmat,
        block_remaining: 0,
    })
}

/// Like [`draw_channel`] but redraws on a rank-deficient realization.
pub fn draw_channel_retrying<R: Rng>(
    rng: &mut R,
    t: usize,
    r: usize,
) -> Result<ChannelInstance, ChannelError> {
    loop {
        match draw_channel(rng, t, r) {
            Ok(ch) => return Ok(ch),
            Err(ChannelError::Linalg(LinalgError::RankDeficient { .. })) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Draws circularly symmetric complex Gaussian noise with per-entry variance
/// `variance` (real and imaginary parts each N(0, variance/2)).
pub fn draw_noise<R: Rng>(
    rng: &mut R,
    r: usize,
    variance: f64,
) -> Result<ComplexVector, ChannelError> {
    if !(variance > 0.0) {
        return Err(ChannelError::InvalidVariance(variance));
    }
    let std = (variance / 2.0).sqrt();
    Ok(ComplexVector::from(
        (0..r)
            .map(|_| std_complex_normal(rng, std))
            .collect::<Vec<_>>(),
    ))
}

/// Receive vector `y = Hx + z`. Channel simulation is not part of any
/// detector's complexity, so this is unmetered.
pub fn transmit(
    channel: &ChannelInstance,
    x: &ComplexVector,
    z: &ComplexVector,
) -> Result<ComplexVector, LinalgError> {
    if z.len() != channel.h.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "noise length {} != {} receive antennas",
            z.len(),
            channel.h.rows()
        )));
    }
    let hx = channel.h.mul_vec(x)?;
    let mut out = Vec::with_capacity(hx.len());
    for i in 0..hx.len() {
        out.push(hx[i] + z[i]);
    }
    Ok(ComplexVector::from(out))
}
