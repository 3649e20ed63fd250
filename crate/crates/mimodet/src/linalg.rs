//! Complex dense linear algebra with instrumented arithmetic.
//!
//! All detector-side arithmetic goes through [`OpCounters`] so that the
//! complexity of each detection is an exact count, not an estimate. The QR
//! decomposition is shared preprocessing and is not metered.

use num_complex::Complex64;
use thiserror::Error;

pub type Complex = Complex64;

/// Cost charged for a squared magnitude `|z|^2` (one conjugate multiply).
/// Exposed so the counting convention is visible and restatable.
pub const NORM_SQR_COST: u64 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("rank deficient: |R[{index},{index}]| below tolerance")]
    RankDeficient { index: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Metered counts for one detection trial.
///
/// Counts are exact and monotone: complex multiplications and divisions
/// (additions are free), comparisons of real metric values, and detection
/// nodes (nodes whose children were generated). One instance belongs to one
/// trial; trials running in parallel each own their counters.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OpCounters {
    pub complex_mul_div: u64,
    pub real_comparisons: u64,
    pub detection_nodes: u64,
}

impl OpCounters {
    pub fn new() -> Self {
        Self::default()
    }

    /// Metered complex multiplication.
    #[inline]
    pub fn mul(&mut self, a: Complex, b: Complex) -> Complex {
        self.complex_mul_div += 1;
        a * b
    }

    /// Metered complex division.
    #[inline]
    pub fn div(&mut self, a: Complex, b: Complex) -> Complex {
        self.complex_mul_div += 1;
        a / b
    }

    /// Metered squared magnitude (costs [`NORM_SQR_COST`]).
    #[inline]
    pub fn norm_sqr(&mut self, a: Complex) -> f64 {
        self.complex_mul_div += NORM_SQR_COST;
        a.norm_sqr()
    }

    /// Record `n` comparisons of real numbers.
    #[inline]
    pub fn comparisons(&mut self, n: u64) {
        self.real_comparisons += n;
    }

    /// Record one detection node (a node whose children are generated).
    #[inline]
    pub fn detection_node(&mut self) {
        self.detection_nodes += 1;
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must be rows*cols");
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Unmetered matrix-vector product (channel simulation, oracles).
    pub fn mul_vec(&self, x: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "matrix is {}x{}, vector has length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = Complex::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self.get(i, j) * x[j];
            }
            out.push(acc);
        }
        Ok(ComplexVector::from(out))
    }

    /// Unmetered conjugate-transpose times vector.
    pub fn hermitian_mul_vec(&self, y: &ComplexVector) -> Result<ComplexVector, LinalgError> {
        if y.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "matrix is {}x{}, vector has length {}",
                self.rows,
                self.cols,
                y.len()
            )));
        }
        let mut out = Vec::with_capacity(self.cols);
        for j in 0..self.cols {
            let mut acc = Complex::new(0.0, 0.0);
            for i in 0..self.rows {
                acc += self.get(i, j).conj() * y[i];
            }
            out.push(acc);
        }
        Ok(ComplexVector::from(out))
    }
}

/// Dense complex column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex>,
}

impl ComplexVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![Complex::new(0.0, 0.0); len],
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex> {
        self.data.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }
}

impl From<Vec<Complex>> for ComplexVector {
    fn from(data: Vec<Complex>) -> Self {
        Self { data }
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = Complex;
    fn index(&self, i: usize) -> &Complex {
        &self.data[i]
    }
}

impl std::ops::IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex {
        &mut self.data[i]
    }
}

/// Relative tolerance below which an R diagonal flags a rank-deficient draw.
pub const RANK_TOL: f64 = 1e-12;

/// Householder QR of a tall (rows >= cols) complex matrix.
///
/// Returns a thin `Q` (rows x cols, orthonormal columns) and a square upper
/// triangular `R` (cols x cols) with real positive diagonal, `QR = H`. Not
/// metered: the decomposition is common preprocessing for every detector and
/// excluded from complexity counts.
pub fn qr_decompose(h: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix), LinalgError> {
    let (m, n) = (h.rows(), h.cols());
    if m < n {
        return Err(LinalgError::DimensionMismatch(format!(
            "QR requires rows >= cols, got {}x{}",
            m, n
        )));
    }
    let h_norm = h.frobenius_norm();

    let mut a = h.clone();
    let mut q = ComplexMatrix::identity(m);

    for k in 0..n {
        // Householder vector for column k, rows k..m.
        let norm_x = (k..m).map(|i| a.get(i, k).norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            return Err(LinalgError::RankDeficient { index: k });
        }
        let akk = a.get(k, k);
        let phase = if akk.norm() > 0.0 {
            akk / akk.norm()
        } else {
            Complex::new(1.0, 0.0)
        };
        // alpha = -phase * ||x|| keeps v[0] = akk - alpha away from cancellation.
        let alpha = -phase * norm_x;
        let mut v: Vec<Complex> = (k..m).map(|i| a.get(i, k)).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 > 0.0 {
            let beta = 2.0 / vnorm2;
            // A <- (I - beta v v*) A on the trailing block.
            for j in k..n {
                let mut s = Complex::new(0.0, 0.0);
                for i in k..m {
                    s += v[i - k].conj() * a.get(i, j);
                }
                s *= beta;
                for i in k..m {
                    let cur = a.get(i, j);
                    a.set(i, j, cur - v[i - k] * s);
                }
            }
            // Q <- Q (I - beta v v*).
            for i in 0..m {
                let mut s = Complex::new(0.0, 0.0);
                for j in k..m {
                    s += q.get(i, j) * v[j - k];
                }
                s *= beta;
                for j in k..m {
                    let cur = q.get(i, j);
                    q.set(i, j, cur - s * v[j - k].conj());
                }
            }
        }
        a.set(k, k, alpha);
        for i in (k + 1)..m {
            a.set(i, k, Complex::new(0.0, 0.0));
        }
    }

    // Thin Q and square R with a phase correction making the diagonal of R
    // real positive, so decompositions are canonical and reproducible.
    let mut r = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r.set(i, j, a.get(i, j));
        }
    }
    let mut q_thin = ComplexMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            q_thin.set(i, j, q.get(i, j));
        }
    }
    for i in 0..n {
        let d = r.get(i, i);
        if d.norm() < RANK_TOL * h_norm {
            return Err(LinalgError::RankDeficient { index: i });
        }
        let ph = d / d.norm();
        let ph_conj = ph.conj();
        for j in i..n {
            r.set(i, j, ph_conj * r.get(i, j));
        }
        r.set(i, i, Complex::new(r.get(i, i).re, 0.0));
        for row in 0..m {
            q_thin.set(row, i, q_thin.get(row, i) * ph);
        }
    }
    Ok((q_thin, r))
}

/// Computes `xi = Q* y`, truncated to the first `cols(Q)` components (the
/// remaining components do not depend on the transmitted vector). Metered:
/// one complex multiply per matrix entry touched.
pub fn rotate_received(
    q: &ComplexMatrix,
    y: &ComplexVector,
    ctx: &mut OpCounters,
) -> Result<ComplexVector, LinalgError> {
    if y.len() != q.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "Q is {}x{}, y has length {}",
            q.rows(),
            q.cols(),
            y.len()
        )));
    }
    let mut out = Vec::with_capacity(q.cols());
    for j in 0..q.cols() {
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..q.rows() {
            acc += ctx.mul(q.get(i, j).conj(), y[i]);
        }
        out.push(acc);
    }
    Ok(ComplexVector::from(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn counted_mul_examples() {
        let mut ctx = OpCounters::new();
        assert_eq!(ctx.mul(c(1.0, 0.0), c(1.0, 0.0)), c(1.0, 0.0));
        assert_eq!(ctx.complex_mul_div, 1);
        assert_eq!(ctx.mul(c(0.0, 1.0), c(0.0, 1.0)), c(-1.0, 0.0));
        assert_eq!(ctx.complex_mul_div, 2);
        assert_eq!(ctx.mul(c(2.0, 1.0), c(1.0, -1.0)), c(3.0, -1.0));
        assert_eq!(ctx.complex_mul_div, 3);
        let q = ctx.div(c(3.0, -1.0), c(1.0, -1.0));
        assert!((q - c(2.0, 1.0)).norm() < 1e-14);
        assert_eq!(ctx.complex_mul_div, 4);
    }

    #[test]
    fn qr_identity() {
        let h = ComplexMatrix::identity(4);
        let (q, r) = qr_decompose(&h).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((q.get(i, j) - c(want, 0.0)).norm() < 1e-12);
                assert!((r.get(i, j) - c(want, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn qr_single_column() {
        let h = ComplexMatrix::from_rows(2, 1, vec![c(3.0, 0.0), c(4.0, 0.0)]);
        let (q, r) = qr_decompose(&h).unwrap();
        assert!((r.get(0, 0) - c(5.0, 0.0)).norm() < 1e-12);
        assert!((q.get(0, 0) - c(0.6, 0.0)).norm() < 1e-12);
        assert!((q.get(1, 0) - c(0.8, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn qr_random_reconstruction() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let n = 6;
        let data: Vec<Complex> = (0..n * n)
            .map(|_| c(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        let h = ComplexMatrix::from_rows(n, n, data);
        let (q, r) = qr_decompose(&h).unwrap();

        // Reconstruction.
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = c(0.0, 0.0);
                for k in 0..n {
                    acc += q.get(i, k) * r.get(k, j);
                }
                err += (acc - h.get(i, j)).norm_sqr();
            }
        }
        assert!(err.sqrt() <= 1e-10 * h.frobenius_norm());

        // Orthonormal columns.
        let mut ortho_err = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let mut acc = c(0.0, 0.0);
                for k in 0..n {
                    acc += q.get(k, a).conj() * q.get(k, b);
                }
                let want = if a == b { 1.0 } else { 0.0 };
                ortho_err += (acc - c(want, 0.0)).norm_sqr();
            }
        }
        assert!(ortho_err.sqrt() <= 1e-10);

        // Canonical diagonal and exact lower-triangle zeros.
        for i in 0..n {
            assert!(r.get(i, i).im == 0.0 && r.get(i, i).re > 0.0);
            for j in 0..i {
                assert_eq!(r.get(i, j), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn qr_tall_matrix() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let (m, n) = (6, 4);
        let data: Vec<Complex> = (0..m * n)
            .map(|_| c(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        let h = ComplexMatrix::from_rows(m, n, data);
        let (q, r) = qr_decompose(&h).unwrap();
        assert_eq!((q.rows(), q.cols()), (m, n));
        assert_eq!((r.rows(), r.cols()), (n, n));
        let mut err = 0.0f64;
        for i in 0..m {
            for j in 0..n {
                let mut acc = c(0.0, 0.0);
                for k in 0..n {
                    acc += q.get(i, k) * r.get(k, j);
                }
                err += (acc - h.get(i, j)).norm_sqr();
            }
        }
        assert!(err.sqrt() <= 1e-10 * h.frobenius_norm());
    }

    #[test]
    fn qr_rank_deficient_rejected() {
        // Two identical columns.
        let h = ComplexMatrix::from_rows(
            2,
            2,
            vec![c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)],
        );
        match qr_decompose(&h) {
            Err(LinalgError::RankDeficient { .. }) => {}
            other => panic!("expected RankDeficient, got {:?}", other),
        }
    }

    #[test]
    fn rotate_identity() {
        let q = ComplexMatrix::identity(3);
        let y = ComplexVector::from(vec![c(1.0, 2.0), c(-3.0, 0.5), c(0.0, -1.0)]);
        let mut ctx = OpCounters::new();
        let xi = rotate_received(&q, &y, &mut ctx).unwrap();
        assert_eq!(xi.data(), y.data());
        assert_eq!(ctx.complex_mul_div, 9);
    }

    #[test]
    fn rotate_preserves_norm_square_q() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        let n = 4;
        let data: Vec<Complex> = (0..n * n)
            .map(|_| c(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        let h = ComplexMatrix::from_rows(n, n, data);
        let (q, _) = qr_decompose(&h).unwrap();
        let y = ComplexVector::from(
            (0..n)
                .map(|_| c(normal.sample(&mut rng), normal.sample(&mut rng)))
                .collect::<Vec<_>>(),
        );
        let mut ctx = OpCounters::new();
        let xi = rotate_received(&q, &y, &mut ctx).unwrap();
        assert!((xi.norm_sqr() - y.norm_sqr()).abs() < 1e-10);
    }

    #[test]
    fn rotate_matches_unmetered_reference() {
        let q = ComplexMatrix::from_rows(
            2,
            2,
            vec![
                c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                c(0.0, std::f64::consts::FRAC_1_SQRT_2),
                c(0.0, -std::f64::consts::FRAC_1_SQRT_2),
            ],
        );
        let y = ComplexVector::from(vec![c(1.0, -1.0), c(2.0, 3.0)]);
        let mut ctx = OpCounters::new();
        let xi = rotate_received(&q, &y, &mut ctx).unwrap();
        let reference = q.hermitian_mul_vec(&y).unwrap();
        for i in 0..2 {
            assert!((xi[i] - reference[i]).norm() < 1e-14);
        }
        assert_eq!(ctx.complex_mul_div, 4);
    }

    #[test]
    fn rotate_dimension_mismatch() {
        let q = ComplexMatrix::identity(3);
        let y = ComplexVector::from(vec![c(1.0, 0.0)]);
        let mut ctx = OpCounters::new();
        assert!(matches!(
            rotate_received(&q, &y, &mut ctx),
            Err(LinalgError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn counter_determinism() {
        let run = || {
            let mut ctx = OpCounters::new();
            let q = ComplexMatrix::identity(4);
            let y = ComplexVector::from(vec![c(1.0, 1.0); 4]);
            rotate_received(&q, &y, &mut ctx).unwrap();
            ctx
        };
        assert_eq!(run(), run());
    }
}
