//! Square QAM symbol alphabets.

use crate::linalg::{Complex, ComplexVector};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConstellationError {
    #[error("unsupported QAM order {0} (expected 4, 16 or 64)")]
    UnsupportedOrder(usize),
}

/// A finite symbol alphabet on the unnormalized integer grid, with its
/// average symbol energy `E_s` carried explicitly. The noise-variance formula
/// consumes `E_s` directly, so the grid is never rescaled.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex>,
    energy: f64,
    name: String,
}

impl Constellation {
    pub fn points(&self) -> &[Complex] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, idx: usize) -> Complex {
        self.points[idx]
    }

    /// Average symbol energy `E_s = mean(|s|^2)`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Constructs an arbitrary alphabet, bypassing the QAM grid. Exists for
    /// the verifier's fault-injection path; not part of the normal API.
    #[doc(hidden)]
    pub fn from_parts_for_fault_injection(points: Vec<Complex>, energy: f64, name: String) -> Self {
        Self {
            points,
            energy,
            name,
        }
    }
}

/// Gray-mapped square QAM on the `{±1, ±3, ...}` grid per axis.
///
/// Point order follows the Gray label so the index-to-symbol map is fixed;
/// symbol error rate does not depend on the labeling, reproducibility does.
pub fn make_qam(order: usize) -> Result<Constellation, ConstellationError> {
    let side = match order {
        4 => 2usize,
        16 => 4,
        64 => 8,
        _ => return Err(ConstellationError::UnsupportedOrder(order)),
    };
    let axis_bits = side.trailing_zeros();
    // Pulse amplitude level for a Gray label g on one axis.
    let level = |g: usize| -> f64 {
        // invert gray code to the level rank
        let mut b = g;
        let mut mask = b >> 1;
        while mask != 0 {
            b ^= mask;
            mask >>= 1;
        }
        (2 * b) as f64 - (side as f64 - 1.0)
    };
    let mut points = Vec::with_capacity(order);
    for label in 0..order {
        let gi = label >> axis_bits;
        let gq = label & (side - 1);
        points.push(Complex::new(level(gi), level(gq)));
    }
    let energy = points.iter().map(|s| s.norm_sqr()).sum::<f64>() / order as f64;
    Ok(Constellation {
        points,
        energy,
        name: format!("{}-QAM", order),
    })
}

/// Draws `t` symbols i.i.d. uniform over the alphabet.
pub fn draw_uniform<R: Rng>(c: &Constellation, rng: &mut R, t: usize) -> ComplexVector {
    ComplexVector::from(
        (0..t)
            .map(|_| c.point(rng.random_range(0..c.len())))
            .collect::<Vec<_>>(),
    )
}
