//! C ABI for the tree-search MIMO detectors.
//!
//! The surface is a single opaque detector handle plus plain-C structs for
//! configuration, counters and status codes. Complex arrays cross the
//! boundary as interleaved doubles `[re0, im0, re1, im1, ...]`, matrices in
//! row-major order. Every function returns a [`MimodetStatus`]; out
//! parameters are written only on `Ok`.

use mimodet::channel::noise_variance;
use mimodet::constellation::{make_qam, Constellation};
use mimodet::detectors::{detect, Algorithm, DetectError, DetectionProblem, DetectorConfig};
use mimodet::linalg::{
    qr_decompose, rotate_received, Complex, ComplexMatrix, ComplexVector, LinalgError, OpCounters,
};

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MimodetStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    RankDeficient = 3,
    SearchExhausted = 4,
    InstanceTooLarge = 5,
}

/// Detector selection for [`mimodet_detector_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MimodetAlgorithm {
    BruteForceMl = 0,
    QrdMld = 1,
    QrdMldImproved = 2,
    DijkstraBounded = 3,
    DijkstraUnbounded = 4,
}

/// Detector parameters. `snr_db` is used to derive the noise variance
/// consumed by the improved QRD-MLD threshold.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MimodetConfig {
    /// Transmit antennas (columns of H).
    pub t: usize,
    /// Receive antennas (rows of H), must be >= t.
    pub r: usize,
    /// Square QAM order: 4, 16 or 64.
    pub qam_order: usize,
    pub algorithm: MimodetAlgorithm,
    /// QRD-MLD breadth.
    pub m: usize,
    /// Improved-QRD-MLD threshold factor.
    pub x: f64,
    /// Dijkstra list bound.
    pub l: usize,
    /// Number of outputs (N-best).
    pub n: usize,
    /// Operating SNR in dB.
    pub snr_db: f64,
}

/// Exact operation counts for one detection.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MimodetCounters {
    pub complex_mul_div: u64,
    pub real_comparisons: u64,
    pub detection_nodes: u64,
}

/// Opaque detector handle.
pub struct MimodetDetector {
    constellation: Constellation,
    config: DetectorConfig,
    t: usize,
    r: usize,
}

fn to_algorithm(a: MimodetAlgorithm) -> Algorithm {
    match a {
        MimodetAlgorithm::BruteForceMl => Algorithm::BruteForceML,
        MimodetAlgorithm::QrdMld => Algorithm::QrdMld,
        MimodetAlgorithm::QrdMldImproved => Algorithm::QrdMldImproved,
        MimodetAlgorithm::DijkstraBounded => Algorithm::DijkstraBounded,
        MimodetAlgorithm::DijkstraUnbounded => Algorithm::DijkstraUnbounded,
    }
}

/// Creates a detector from `cfg` and writes the handle to `out`.
/// Free it with [`mimodet_detector_free`].
///
/// # Safety
/// `cfg` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mimodet_detector_new(
    cfg: *const MimodetConfig,
    out: *mut *mut MimodetDetector,
) -> MimodetStatus {
    if cfg.is_null() || out.is_null() {
        return MimodetStatus::NullPointer;
    }
    let cfg = &*cfg;
    if cfg.t == 0 || cfg.r < cfg.t {
        return MimodetStatus::InvalidArgument;
    }
    let Ok(constellation) = make_qam(cfg.qam_order) else {
        return MimodetStatus::InvalidArgument;
    };
    let mut dc = DetectorConfig::new(to_algorithm(cfg.algorithm));
    dc.m = cfg.m;
    dc.x = cfg.x;
    dc.l = cfg.l;
    dc.n = cfg.n;
    dc.noise_variance = noise_variance(cfg.snr_db, cfg.t, constellation.energy());
    if dc.m < 1 || dc.l < 1 || dc.n < 1 || dc.x < 0.0 {
        return MimodetStatus::InvalidArgument;
    }
    let det = Box::new(MimodetDetector {
        constellation,
        config: dc,
        t: cfg.t,
        r: cfg.r,
    });
    *out = Box::into_raw(det);
    MimodetStatus::Ok
}

/// Releases a handle returned by [`mimodet_detector_new`]. A null pointer is
/// a no-op.
///
/// # Safety
/// `det` must be a pointer from [`mimodet_detector_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mimodet_detector_free(det: *mut MimodetDetector) {
    if !det.is_null() {
        drop(Box::from_raw(det));
    }
}

unsafe fn read_complex_slice(ptr: *const f64, count: usize) -> Vec<Complex> {
    let raw = std::slice::from_raw_parts(ptr, 2 * count);
    raw.chunks_exact(2)
        .map(|c| Complex::new(c[0], c[1]))
        .collect()
}

/// Runs one detection.
///
/// Inputs: `h` is the row-major r x t channel matrix (`2*r*t` doubles,
/// interleaved), `y` the received vector (`2*r` doubles). Outputs: `x_out`
/// receives the `n` best symbol vectors back to back (`2*t*n` doubles, best
/// first); `metrics_out` (nullable) receives `n` accumulated metrics;
/// `counters_out` (nullable) receives the operation counts. QR runs per call
/// and is excluded from the counts.
///
/// # Safety
/// Pointers must be valid for the lengths stated above.
#[no_mangle]
pub unsafe extern "C" fn mimodet_detect(
    det: *const MimodetDetector,
    h: *const f64,
    y: *const f64,
    x_out: *mut f64,
    metrics_out: *mut f64,
    counters_out: *mut MimodetCounters,
) -> MimodetStatus {
    if det.is_null() || h.is_null() || y.is_null() || x_out.is_null() {
        return MimodetStatus::NullPointer;
    }
    let det = &*det;
    let h = ComplexMatrix::from_rows(det.r, det.t, read_complex_slice(h, det.r * det.t));
    let y = ComplexVector::from(read_complex_slice(y, det.r));

    let (q, r_mat) = match qr_decompose(&h) {
        Ok(qr) => qr,
        Err(LinalgError::RankDeficient { .. }) => return MimodetStatus::RankDeficient,
        Err(LinalgError::DimensionMismatch(_)) => return MimodetStatus::InvalidArgument,
    };
    let mut ctx = OpCounters::new();
    let xi = match rotate_received(&q, &y, &mut ctx) {
        Ok(xi) => xi,
        Err(_) => return MimodetStatus::InvalidArgument,
    };
    let problem = DetectionProblem {
        r_mat: &r_mat,
        xi,
        constellation: &det.constellation,
        t: det.t,
    };
    let res = match detect(&problem, &det.config, &mut ctx) {
        Ok(res) => res,
        Err(DetectError::SearchExhausted { .. }) => return MimodetStatus::SearchExhausted,
        Err(DetectError::InstanceTooLarge { .. }) => return MimodetStatus::InstanceTooLarge,
        Err(DetectError::InvalidConfig(_)) => return MimodetStatus::InvalidArgument,
    };

    let n = det.config.n;
    let out = std::slice::from_raw_parts_mut(x_out, 2 * det.t * n);
    for (k, est) in res.estimates.iter().take(n).enumerate() {
        for i in 0..det.t {
            out[2 * (k * det.t + i)] = est[i].re;
            out[2 * (k * det.t + i) + 1] = est[i].im;
        }
    }
    if !metrics_out.is_null() {
        let m = std::slice::from_raw_parts_mut(metrics_out, n);
        for (k, &metric) in res.metrics.iter().take(n).enumerate() {
            m[k] = metric;
        }
    }
    if !counters_out.is_null() {
        *counters_out = MimodetCounters {
            complex_mul_div: ctx.complex_mul_div,
            real_comparisons: ctx.real_comparisons,
            detection_nodes: ctx.detection_nodes,
        };
    }
    MimodetStatus::Ok
}

/// Noise variance `phi^2 = t * E_s * 10^(-SNR/10)` for a supported QAM
/// order; returns a negative value for an unsupported order.
#[no_mangle]
pub extern "C" fn mimodet_noise_variance(snr_db: f64, t: usize, qam_order: usize) -> f64 {
    match make_qam(qam_order) {
        Ok(c) => noise_variance(snr_db, t, c.energy()),
        Err(_) => -1.0,
    }
}
