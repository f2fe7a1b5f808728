//! Conditioning of random teacher weight matrices.
//!
//! `λ(W) = (∏ᵢ σᵢ) / σ_k^k` with `k = min(d, M)`, kept in the natural-log
//! domain because it overflows doubles well before `M = 64`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{singular_values, Matrix, RandomSource};

/// Singular values below this are clamped before taking logs.
pub const SIGMA_FLOOR: f64 = 1e-300;

/// `G ⊙ h` with `G` d×M, entries N(0, 1/d), and `h` a 1×M row, entries N(0, 1/M),
/// broadcast down the columns. `G` is drawn row-major, then `h`.
pub fn sample_weight_matrix(d: usize, m: usize, rng: &mut RandomSource) -> Result<Matrix> {
    if d == 0 || m == 0 {
        return Err(Error::InvalidInput(format!("matrix dims must be positive, got {d}x{m}")));
    }
    let mut g = Matrix::gaussian(d, m, (1.0 / d as f64).sqrt(), rng);
    let h_std = (1.0 / m as f64).sqrt();
    let h: Vec<f64> = (0..m).map(|_| rng.normal(h_std)).collect();
    for i in 0..d {
        for (w, hj) in g.row_mut(i).iter_mut().zip(&h) {
            *w *= hj;
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaSample {
    pub d: usize,
    pub m: usize,
    /// Natural log of λ.
    pub log_lambda: f64,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// σ_k fell below [`SIGMA_FLOOR`]; `log_lambda` is then a lower bound.
    pub overflow: bool,
}

impl LambdaSample {
    pub fn log10_lambda(&self) -> f64 {
        self.log_lambda / std::f64::consts::LN_10
    }
}

/// `Σ ln σᵢ − k ln σ_k` over the first `k` of descending singular values.
pub fn log_lambda_from_singular_values(sv: &[f64], k: usize) -> (f64, bool) {
    let k = k.min(sv.len());
    if k == 0 {
        return (0.0, false);
    }
    let overflow = sv[k - 1] < SIGMA_FLOOR;
    let ln_k = sv[k - 1].max(SIGMA_FLOOR).ln();
    let sum: f64 = sv[..k].iter().map(|s| s.max(SIGMA_FLOOR).ln()).sum();
    (sum - k as f64 * ln_k, overflow)
}

pub fn compute_lambda(w: &Matrix) -> Result<LambdaSample> {
    let sv = singular_values(w)?;
    let k = w.rows().min(w.cols());
    let (log_lambda, overflow) = log_lambda_from_singular_values(&sv, k);
    Ok(LambdaSample {
        d: w.rows(),
        m: w.cols(),
        log_lambda,
        singular_values: sv,
        overflow,
    })
}

/// Quantile with linear interpolation between order statistics. `sorted` must be ascending.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    #[serde(rename = "M")]
    pub m: usize,
    pub d: usize,
    pub trials: usize,
    pub overflowed: usize,
    pub median_log10: f64,
    pub q05_log10: f64,
    pub q95_log10: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSweep {
    pub samples: Vec<LambdaSample>,
    pub rows: Vec<LambdaRow>,
}

#[derive(Serialize)]
struct SampleRecord {
    #[serde(rename = "M")]
    m: usize,
    d: usize,
    trial: usize,
    log10_lambda: f64,
}

impl LambdaSweep {
    /// Per-sample CSV: `M,d,trial,log10_lambda`.
    pub fn write_samples_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut trial = 0;
        let mut last_m = None;
        for s in &self.samples {
            if last_m != Some(s.m) {
                trial = 0;
                last_m = Some(s.m);
            }
            w.serialize(SampleRecord {
                m: s.m,
                d: s.d,
                trial,
                log10_lambda: s.log10_lambda(),
            })?;
            trial += 1;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples `trials` matrices with `d = 2M` for every `M`. Trial `t` at width `M`
/// uses `rng.child(M).child(t)`, so grids can be extended without reshuffling.
pub fn lambda_sweep(m_list: &[usize], trials: usize, rng: &RandomSource) -> Result<LambdaSweep> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be at least 1".into()));
    }
    let mut samples = Vec::with_capacity(m_list.len() * trials);
    let mut rows = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let d = 2 * m;
        let stream = rng.child(m as u64);
        let mut logs = Vec::with_capacity(trials);
        let mut overflowed = 0;
        for t in 0..trials {
            let w = sample_weight_matrix(d, m, &mut stream.child(t as u64))?;
            let s = compute_lambda(&w)?;
            if s.overflow {
                overflowed += 1;
            } else {
                logs.push(s.log10_lambda());
            }
            samples.push(s);
        }
        if logs.is_empty() {
            return Err(Error::InvalidInput(format!("every sample overflowed at M={m}")));
        }
        logs.sort_by(f64::total_cmp);
        rows.push(LambdaRow {
            m,
            d,
            trials,
            overflowed,
            median_log10: quantile(&logs, 0.5),
            q05_log10: quantile(&logs, 0.05),
            q95_log10: quantile(&logs, 0.95),
        });
    }
    Ok(LambdaSweep { samples, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_are_scaled_gaussian_columns() {
        let (d, m) = (5, 3);
        let mut a = RandomSource::new(9);
        let w = sample_weight_matrix(d, m, &mut a).unwrap();
        let mut b = RandomSource::new(9);
        let g = Matrix::gaussian(d, m, (1.0 / d as f64).sqrt(), &mut b);
        let h: Vec<f64> = (0..m).map(|_| b.normal((1.0 / m as f64).sqrt())).collect();
        for i in 0..d {
            for j in 0..m {
                assert_eq!(w.get(i, j), g.get(i, j) * h[j]);
            }
        }
    }

    #[test]
    fn entry_variance_matches_product() {
        let mut rng = RandomSource::new(17);
        let (d, m, reps) = (4, 4, 100_000);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..reps {
            let w = sample_weight_matrix(d, m, &mut rng).unwrap();
            for &x in w.data() {
                sum += x;
                sum_sq += x * x;
            }
        }
        let count = (reps * d * m) as f64;
        let mean = sum / count;
        let var = sum_sq / count - mean * mean;
        let expected = 1.0 / (d * m) as f64;
        assert!((var / expected - 1.0).abs() < 0.05, "var {var} vs {expected}");
    }

    #[test]
    fn closed_form_cases() {
        for n in 1..6 {
            let s = compute_lambda(&Matrix::identity(n)).unwrap();
            assert!(s.log_lambda.abs() < 1e-12);
        }
        let s = compute_lambda(&Matrix::from_diagonal(&[2.0, 1.0])).unwrap();
        assert!((s.log_lambda - 2f64.ln()).abs() < 1e-12);
        let s = compute_lambda(&Matrix::from_rows(&[vec![3.0], vec![4.0]]).unwrap()).unwrap();
        assert_eq!(s.log_lambda, 0.0);
    }

    #[test]
    fn zero_singular_value_is_flagged() {
        let w = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = compute_lambda(&w).unwrap();
        assert!(s.overflow);
        assert!(s.log_lambda.is_finite());
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 5.0);
        assert!((quantile(&v, 0.05) - 1.2).abs() < 1e-12);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
    }

    #[test]
    fn single_column_gives_unit_lambda() {
        let sweep = lambda_sweep(&[1], 50, &RandomSource::new(3)).unwrap();
        assert_eq!(sweep.rows[0].median_log10, 0.0);
        assert!(sweep.samples.iter().all(|s| s.log_lambda == 0.0));
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = lambda_sweep(&[2, 3], 20, &RandomSource::new(8)).unwrap();
        let b = lambda_sweep(&[2, 3], 20, &RandomSource::new(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn median_grows_with_width() {
        let sweep = lambda_sweep(&[2, 4, 8, 16, 32], 200, &RandomSource::new(2024)).unwrap();
        for pair in sweep.rows.windows(2) {
            assert!(pair[1].median_log10 > pair[0].median_log10, "{:?}", sweep.rows);
        }
    }

    #[test]
    fn csv_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let sweep = lambda_sweep(&[1, 2], 3, &RandomSource::new(1)).unwrap();
        let p = dir.path().join("lambda.csv");
        sweep.write_samples_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "M,d,trial,log10_lambda");
        assert_eq!(lines.len(), 7);
        assert!(lines[4].starts_with("2,4,0,"));
        let q = dir.path().join("summary.csv");
        sweep.write_summary_csv(&q).unwrap();
        assert!(std::fs::read_to_string(&q).unwrap().starts_with("M,d,trials,overflowed,"));
    }
}
