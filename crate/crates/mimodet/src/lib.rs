//! Tree-search detection of spatially multiplexed signals over MIMO channels.
//!
//! The crate provides four detectors behind a common interface — exhaustive
//! maximum-likelihood, the QR-decomposition M-algorithm (QRD-MLD), its
//! threshold-improved variant, and best-first (Dijkstra) search with a
//! bounded candidate list — together with a block-fading channel model and a
//! Monte Carlo harness that measures symbol error rate and exact operation
//! counts (complex multiplications/divisions, real-number comparisons,
//! detection nodes) per detector.
//!
//! Everything downstream of the QR decomposition is metered through
//! [`linalg::OpCounters`]; the QR itself is common to all detectors and is
//! deliberately left out of the counts.

pub mod channel;
pub mod config;
pub mod constellation;
pub mod detectors;
pub mod harness;
pub mod linalg;
pub mod report;
pub mod seeding;
pub mod verify;
