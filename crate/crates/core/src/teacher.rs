//! Random single-hidden-layer ReLU teachers and the noisy datasets they generate.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{matmul, Matrix, RandomSource};

#[inline]
pub fn relu(z: f64) -> f64 {
    z.max(0.0)
}

/// Teacher hyperparameters: input dimension, hidden width and noise level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gamma {
    pub d: usize,
    pub m: usize,
    pub sigma: f64,
}

impl Gamma {
    pub fn new(d: usize, m: usize, sigma: f64) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::InvalidInput(format!(
                "teacher dimensions must be positive (d={d}, M={m})"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidInput(format!("noise sigma must be > 0, got {sigma}")));
        }
        Ok(Self { d, m, sigma })
    }
}

/// `g(x) = Σ_i θ_i relu(a_iᵀx + b_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TeacherNet {
    a: Matrix,
    b: Vec<f64>,
    theta: Vec<f64>,
    gamma: Gamma,
}

impl TeacherNet {
    pub fn from_parts(a: Matrix, b: Vec<f64>, theta: Vec<f64>, sigma: f64) -> Result<Self> {
        let gamma = Gamma::new(a.cols(), a.rows(), sigma)?;
        if b.len() != gamma.m || theta.len() != gamma.m {
            return Err(Error::shape(
                "TeacherNet::from_parts",
                format!("b and theta of length {}", gamma.m),
                format!("{} and {}", b.len(), theta.len()),
            ));
        }
        Ok(Self { a, b, theta, gamma })
    }

    pub fn gamma(&self) -> Gamma {
        self.gamma
    }

    /// Hidden weights, one row per unit (M×d).
    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    /// Evaluates the teacher at a single input, unit by unit.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.gamma.d {
            return Err(Error::shape("teacher_forward", self.gamma.d, x.len()));
        }
        let mut out = 0.0;
        for i in 0..self.gamma.m {
            let pre: f64 = self.a.row(i).iter().zip(x).map(|(a, x)| a * x).sum::<f64>() + self.b[i];
            out += self.theta[i] * relu(pre);
        }
        Ok(out)
    }

    /// Evaluates every row of `xs` through the matrix product `xs·aᵀ`.
    pub fn forward_batch(&self, xs: &Matrix) -> Result<Vec<f64>> {
        if xs.cols() != self.gamma.d {
            return Err(Error::shape("teacher_forward_batch", self.gamma.d, xs.cols()));
        }
        let pre = matmul(xs, &self.a.transpose())?;
        Ok((0..xs.rows())
            .map(|r| {
                pre.row(r)
                    .iter()
                    .zip(&self.b)
                    .zip(&self.theta)
                    .map(|((z, b), t)| t * relu(z + b))
                    .sum()
            })
            .collect())
    }
}

/// Samples a teacher: `a` row-major, then `b`, then `θ`, from one stream.
pub fn sample_teacher(gamma: Gamma, rng: &mut RandomSource) -> TeacherNet {
    let inner_std = (1.0 / (gamma.d as f64 + 1.0)).sqrt();
    let outer_std = (1.0 / gamma.m as f64).sqrt();
    let a = Matrix::gaussian(gamma.m, gamma.d, inner_std, rng);
    let b = (0..gamma.m).map(|_| rng.normal(inner_std)).collect();
    let theta = (0..gamma.m).map(|_| rng.normal(outer_std)).collect();
    TeacherNet { a, b, theta, gamma }
}

/// Labeled samples `(x, y)` with the noiseless teacher output kept alongside.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub xs: Matrix,
    pub ys: Vec<f64>,
    pub ys_noiseless: Vec<f64>,
}

impl Dataset {
    pub fn new(xs: Matrix, ys: Vec<f64>, ys_noiseless: Vec<f64>) -> Result<Self> {
        if xs.rows() != ys.len() || ys.len() != ys_noiseless.len() {
            return Err(Error::shape(
                "Dataset::new",
                format!("{} labels", xs.rows()),
                format!("{} / {}", ys.len(), ys_noiseless.len()),
            ));
        }
        Ok(Self { xs, ys, ys_noiseless })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.xs.cols()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            xs: self.xs.select_rows(indices),
            ys: indices.iter().map(|&i| self.ys[i]).collect(),
            ys_noiseless: indices.iter().map(|&i| self.ys_noiseless[i]).collect(),
        }
    }

    /// Writes `x_1..x_d,y,y_noiseless` with a header row.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (1..=self.dim()).map(|i| format!("x_{i}")).collect();
        header.push("y".into());
        header.push("y_noiseless".into());
        w.write_record(&header)?;
        for r in 0..self.len() {
            let mut rec: Vec<String> = self.xs.row(r).iter().map(f64::to_string).collect();
            rec.push(self.ys[r].to_string());
            rec.push(self.ys_noiseless[r].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws `n` Gaussian inputs (row-major), labels them with `g`, then adds N(0, σ²) noise.
pub fn generate_dataset(g: &TeacherNet, n: usize, rng: &mut RandomSource) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let gamma = g.gamma();
    let xs = Matrix::gaussian(n, gamma.d, 1.0, rng);
    let ys_noiseless = g.forward_batch(&xs)?;
    let ys = ys_noiseless.iter().map(|y| y + rng.normal(gamma.sigma)).collect();
    Dataset::new(xs, ys, ys_noiseless)
}
