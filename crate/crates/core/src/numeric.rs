//! Dense matrices, seeded Gaussian sampling and a Jacobi-based singular value solver.
//!
//! Everything is `f64`. Matrices are row-major. Random streams are derived from
//! a 64-bit seed through ChaCha8, a counter-based generator, so child streams can
//! be handed to parallel workers without sharing state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Hashes a sequence of words into a seed. Stable across platforms and builds.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(word)
}

/// A seeded, single-owner random stream.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent stream keyed by `(self.seed, index)`.
    ///
    /// The parent is not advanced, so children are content-addressed: the
    /// same parent seed and index always yield the same child stream.
    pub fn child(&self, index: u64) -> RandomSource {
        RandomSource::new(mix_seed(&[self.seed, index]))
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn normal(&mut self, std: f64) -> f64 {
        std * self.standard_normal()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.rng.gen_range(0..=i);
            items.swap(i, j);
        }
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }
}

/// Draws `n` i.i.d. standard normal variates.
pub fn sample_standard_normal(rng: &mut RandomSource, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.standard_normal()).collect()
}

/// Dense row-major matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "Matrix::new",
                format!("{} entries for {rows}x{cols}", rows * cols),
                data.len(),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::shape(
                    "Matrix::from_rows",
                    format!("{cols} columns"),
                    format!("{} in row {i}", r.len()),
                ));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Entries drawn i.i.d. from N(0, std²), row-major order.
    pub fn gaussian(rows: usize, cols: usize, std: f64, rng: &mut RandomSource) -> Self {
        let data = (0..rows * cols).map(|_| rng.normal(std)).collect();
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Gathers the given rows into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        matmul(self, other)
    }
}

/// Row-major product `a · b`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::shape(
            "matmul",
            format!("left cols == right rows ({})", a.cols),
            format!("{}x{} · {}x{}", a.rows, a.cols, b.rows, b.cols),
        ));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        let out_row = &mut out.data[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            let b_row = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += aik * bv;
            }
        }
    }
    Ok(out)
}

pub const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_ABS_TOL: f64 = 1e-12;
const JACOBI_REL_TOL: f64 = 1e-15;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations (unsorted).
///
/// A pair is considered decoupled once `|s_pq| <= 1e-12·||S||_F` and
/// `|s_pq| <= 1e-15·sqrt(|s_pp·s_qq|)`. The second condition keeps small
/// eigenvalues of scaled Gram matrices accurate to high relative precision.
pub fn symmetric_eigenvalues(s: &Matrix) -> Result<Vec<f64>> {
    let n = s.rows;
    if s.cols != n {
        return Err(Error::shape(
            "symmetric_eigenvalues",
            "square matrix",
            format!("{}x{}", s.rows, s.cols),
        ));
    }
    let mut a = s.data.clone();
    let abs_tol = JACOBI_ABS_TOL * s.frobenius_norm();
    let decoupled = |a: &[f64], p: usize, q: usize| {
        let apq = a[p * n + q].abs();
        apq <= abs_tol && apq <= JACOBI_REL_TOL * (a[p * n + p] * a[q * n + q]).abs().sqrt()
    };

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut converged = true;
        for p in 0..n {
            for q in (p + 1)..n {
                if decoupled(&a, p, q) {
                    continue;
                }
                converged = false;
                rotate(&mut a, n, p, q);
            }
        }
        if converged {
            return Ok((0..n).map(|i| a[i * n + i]).collect());
        }
    }

    let mut converged = true;
    let mut residual = 0.0f64;
    for p in 0..n {
        for q in (p + 1)..n {
            residual = residual.max(a[p * n + q].abs());
            converged &= decoupled(&a, p, q);
        }
    }
    if converged {
        return Ok((0..n).map(|i| a[i * n + i]).collect());
    }
    Err(Error::Convergence {
        sweeps: JACOBI_MAX_SWEEPS,
        residual,
    })
}

/// Applies the rotation that zeroes `a[p][q]` (symmetric, in place).
fn rotate(a: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;
}

/// Singular values of `w` in descending order, `min(rows, cols)` of them.
///
/// One-sided Jacobi: the cyclic rotations that would diagonalize the smaller
/// Gram matrix are applied to the columns of `w` (or `wᵀ`) directly, and the
/// singular values are the final column norms. Working on `w` instead of the
/// explicit Gram matrix keeps small singular values accurate relative to
/// themselves rather than to the largest one.
pub fn singular_values(w: &Matrix) -> Result<Vec<f64>> {
    if !w.is_finite() {
        return Err(Error::InvalidInput(
            "singular_values: matrix has non-finite entries".into(),
        ));
    }
    // columns of `a` are rows of `cols` (contiguous), `k` columns of length `len`
    let (cols, k, len) = if w.cols <= w.rows {
        (w.transpose().data, w.cols, w.rows)
    } else {
        (w.data.clone(), w.rows, w.cols)
    };
    let mut a = cols;
    let tol = (len as f64 * f64::EPSILON).max(JACOBI_REL_TOL);
    let dot = |a: &[f64], p: usize, q: usize| -> f64 {
        a[p * len..(p + 1) * len]
            .iter()
            .zip(&a[q * len..(q + 1) * len])
            .map(|(x, y)| x * y)
            .sum()
    };

    let mut converged = false;
    let mut residual = 0.0f64;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        converged = true;
        residual = 0.0;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = dot(&a, p, p);
                let beta = dot(&a, q, q);
                let gamma = dot(&a, p, q);
                let scale = (alpha * beta).sqrt();
                if gamma == 0.0 || gamma.abs() <= tol * scale {
                    continue;
                }
                converged = false;
                residual = residual.max(gamma.abs() / scale);
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = c * t;
                let (head, tail) = a.split_at_mut(q * len);
                let col_p = &mut head[p * len..(p + 1) * len];
                let col_q = &mut tail[..len];
                for (x, y) in col_p.iter_mut().zip(col_q.iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            sweeps: JACOBI_MAX_SWEEPS,
            residual,
        });
    }
    let mut sv: Vec<f64> = (0..k).map(|p| dot(&a, p, p).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normal_stream_is_reproducible() {
        let a = sample_standard_normal(&mut RandomSource::new(7), 5);
        let b = sample_standard_normal(&mut RandomSource::new(7), 5);
        assert_eq!(a, b);
        assert!(sample_standard_normal(&mut RandomSource::new(7), 0).is_empty());
    }

    #[test]
    fn children_are_content_addressed() {
        let mut parent = RandomSource::new(11);
        let c1 = parent.child(3);
        parent.standard_normal();
        let c2 = parent.child(3);
        assert_eq!(c1.seed(), c2.seed());
        assert_ne!(parent.child(3).seed(), parent.child(4).seed());
    }

    #[test]
    fn normal_moments() {
        let xs = sample_standard_normal(&mut RandomSource::new(2024), 1_000_000);
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn normal_chi_squared_sixteen_bins() {
        use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
        let std = Normal::new(0.0, 1.0).unwrap();
        let edges: Vec<f64> = (1..16).map(|k| std.inverse_cdf(k as f64 / 16.0)).collect();
        let n = 1_000_000;
        let mut counts = [0usize; 16];
        let mut rng = RandomSource::new(99);
        for _ in 0..n {
            let x = rng.standard_normal();
            let bin = edges.partition_point(|&e| e <= x);
            counts[bin] += 1;
        }
        let expected = n as f64 / 16.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let critical = ChiSquared::new(15.0).unwrap().inverse_cdf(1.0 - 1e-6);
        assert!(chi2 < critical, "chi2 {chi2} >= {critical}");
    }

    #[test]
    fn matmul_hand_cases() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![5.0], vec![6.0]]).unwrap();
        assert_eq!(matmul(&a, &b).unwrap().data(), &[17.0, 39.0]);

        let mut rng = RandomSource::new(1);
        let b = Matrix::gaussian(3, 5, 1.0, &mut rng);
        assert_eq!(matmul(&Matrix::identity(3), &b).unwrap(), b);

        assert!(matches!(matmul(&a, &a.transpose().select_rows(&[0])), Err(Error::Shape { .. })));
    }

    #[test]
    fn matmul_transpose_identity() {
        let mut rng = RandomSource::new(5);
        let a = Matrix::gaussian(4, 3, 1.0, &mut rng);
        let b = Matrix::gaussian(3, 2, 1.0, &mut rng);
        let lhs = matmul(&a, &b).unwrap().transpose();
        let rhs = matmul(&b.transpose(), &a.transpose()).unwrap();
        for (x, y) in lhs.data().iter().zip(rhs.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_values_simple_cases() {
        assert_eq!(singular_values(&Matrix::identity(4)).unwrap(), vec![1.0; 4]);
        let d = Matrix::from_diagonal(&[3.0, -4.0]);
        let sv = singular_values(&d).unwrap();
        assert!((sv[0] - 4.0).abs() < 1e-15 && (sv[1] - 3.0).abs() < 1e-15);
        assert_eq!(singular_values(&Matrix::zeros(3, 2)).unwrap(), vec![0.0, 0.0]);
        assert_eq!(singular_values(&Matrix::zeros(2, 5)).unwrap().len(), 2);
    }

    #[test]
    fn singular_values_match_two_by_two_closed_form() {
        let mut rng = RandomSource::new(77);
        for _ in 0..50 {
            let w = Matrix::gaussian(2, 2, 1.0, &mut rng);
            // eigenvalues of WᵀW from the characteristic polynomial
            let (a, b, c, d) = (w.get(0, 0), w.get(0, 1), w.get(1, 0), w.get(1, 1));
            let g11 = a * a + c * c;
            let g22 = b * b + d * d;
            let g12 = a * b + c * d;
            let tr = g11 + g22;
            let det = g11 * g22 - g12 * g12;
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            let expected = [(tr / 2.0 + disc).sqrt(), (tr / 2.0 - disc).max(0.0).sqrt()];
            let sv = singular_values(&w).unwrap();
            for (s, e) in sv.iter().zip(expected) {
                assert!((s - e).abs() < 1e-9, "{s} vs {e}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sum_of_squared_singular_values_is_frobenius(rows in 1usize..=64, cols in 1usize..=64, seed: u64) {
            let w = Matrix::gaussian(rows, cols, 1.0, &mut RandomSource::new(seed));
            let sv = singular_values(&w).unwrap();
            prop_assert_eq!(sv.len(), rows.min(cols));
            prop_assert!(sv.windows(2).all(|p| p[0] >= p[1]));
            let lhs: f64 = sv.iter().map(|s| s * s).sum();
            let rhs = w.frobenius_norm().powi(2);
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
        }

        #[test]
        fn singular_values_scale_with_abs_c(rows in 1usize..=24, cols in 1usize..=24, c in -20.0f64..20.0, seed: u64) {
            prop_assume!(c.abs() > 1e-3);
            let w = Matrix::gaussian(rows, cols, 1.0, &mut RandomSource::new(seed));
            let base = singular_values(&w).unwrap();
            let scaled = singular_values(&w.scaled(c)).unwrap();
            for (s, b) in scaled.iter().zip(&base) {
                prop_assert!((s - c.abs() * b).abs() <= 1e-9 * c.abs() * b);
            }
        }

        #[test]
        fn matmul_is_associative(n in 1usize..=32, k in 1usize..=32, l in 1usize..=32, m in 1usize..=32, seed: u64) {
            let mut rng = RandomSource::new(seed);
            let a = Matrix::gaussian(n, k, 1.0, &mut rng);
            let b = Matrix::gaussian(k, l, 1.0, &mut rng);
            let c = Matrix::gaussian(l, m, 1.0, &mut rng);
            let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
            let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
            let scale = left.frobenius_norm().max(1e-300);
            for (x, y) in left.data().iter().zip(right.data()) {
                prop_assert!((x - y).abs() <= 1e-10 * scale);
            }
        }
    }
}
