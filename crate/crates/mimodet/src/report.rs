//! CSV serialization of sweep results.
//!
//! One row per (detector, snr) pair. Floating point fields use Rust's
//! shortest round-trip formatting, so parsing the file back reproduces the
//! exact values and identical runs produce byte-identical files.

use crate::harness::SweepResult;
use std::io::{self, Write};
use std::path::Path;

pub const CSV_HEADER: &str =
    "detector,snr_db,ser,ser_stderr,avg_muldiv,max_muldiv,avg_nodes,max_nodes,avg_cmps,max_cmps,trials";

/// Writes the sweep as CSV. Detector labels never contain commas by
/// construction, so no quoting is needed.
pub fn emit_csv<W: Write>(result: &SweepResult, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for p in &result.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.detector,
            p.snr_db,
            p.ser,
            p.ser_stderr,
            p.muldiv.avg,
            p.muldiv.max,
            p.nodes.avg,
            p.nodes.max,
            p.comparisons.avg,
            p.comparisons.max,
            p.trials
        )?;
    }
    Ok(())
}

pub fn emit_csv_string(result: &SweepResult) -> String {
    let mut buf = Vec::new();
    emit_csv(result, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

pub fn emit_csv_file(result: &SweepResult, path: &Path) -> io::Result<()> {
    let file = std::fs::File::create(path)?;
    emit_csv(result, io::BufWriter::new(file))
}
