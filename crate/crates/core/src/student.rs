//! The fitting network: a ReLU MLP with 1–3 equal-width hidden layers and a
//! scalar linear output, with hand-written backpropagation for the mean
//! squared error.
//!
//! Parameters live in one flat buffer, layer by layer: the `fan_in × fan_out`
//! weight block (row-major) followed by the `fan_out` biases. Gradients and the
//! optimizer moments share that layout, so an update is a single slice pass.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{Matrix, RandomSource};
use crate::teacher::TeacherNet;

pub const MAX_DEPTH: usize = 3;

/// Rows evaluated at once by [`StudentNet::predict`].
const PREDICT_CHUNK: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LayerShape {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weight_offset: usize,
    pub bias_offset: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudentNet {
    d: usize,
    depth: usize,
    width: usize,
    layers: Vec<LayerShape>,
    params: Vec<f64>,
}

/// Gradient of the loss, laid out exactly like [`StudentNet::params`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet {
    pub values: Vec<f64>,
}

/// Per-layer inputs and hidden pre-activations from one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    batch: usize,
    /// `inputs[l]` is the input to layer `l` (`inputs[0]` is the batch itself).
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of each hidden layer.
    preacts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.batch
    }

    /// Hidden-layer pre-activations, row-major `batch × width` per layer.
    pub fn preactivations(&self) -> &[Vec<f64>] {
        &self.preacts
    }
}

fn layer_chain(d: usize, depth: usize, width: usize) -> Vec<LayerShape> {
    let mut layers = Vec::with_capacity(depth + 1);
    let mut offset = 0;
    let mut fan_in = d;
    for l in 0..=depth {
        let fan_out = if l == depth { 1 } else { width };
        layers.push(LayerShape {
            fan_in,
            fan_out,
            weight_offset: offset,
            bias_offset: offset + fan_in * fan_out,
        });
        offset += fan_in * fan_out + fan_out;
        fan_in = fan_out;
    }
    layers
}

/// `out[r] = input[r]·W + b` for a row-major batch.
fn affine(input: &[f64], rows: usize, shape: &LayerShape, params: &[f64]) -> Vec<f64> {
    let (fan_in, fan_out) = (shape.fan_in, shape.fan_out);
    let w = &params[shape.weight_offset..shape.bias_offset];
    let b = &params[shape.bias_offset..shape.bias_offset + fan_out];
    let mut out = vec![0.0; rows * fan_out];
    for r in 0..rows {
        let out_row = &mut out[r * fan_out..(r + 1) * fan_out];
        for (k, &x) in input[r * fan_in..(r + 1) * fan_in].iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let w_row = &w[k * fan_out..(k + 1) * fan_out];
            for (o, &wv) in out_row.iter_mut().zip(w_row) {
                *o += x * wv;
            }
        }
        // bias last, so a copied teacher reproduces its outputs bit for bit
        for (o, &bv) in out_row.iter_mut().zip(b) {
            *o += bv;
        }
    }
    out
}

impl StudentNet {
    pub fn zeros(d: usize, depth: usize, width: usize) -> Result<Self> {
        if d == 0 || width == 0 || !(1..=MAX_DEPTH).contains(&depth) {
            return Err(Error::InvalidInput(format!(
                "student needs d >= 1, width >= 1, depth in 1..={MAX_DEPTH} (got d={d}, depth={depth}, width={width})"
            )));
        }
        let layers = layer_chain(d, depth, width);
        let last = layers[depth];
        let n = last.bias_offset + last.fan_out;
        Ok(Self {
            d,
            depth,
            width,
            layers,
            params: vec![0.0; n],
        })
    }

    /// Weights ~ N(0, 1/fan_in), drawn layer by layer in row-major order; biases zero.
    pub fn init(d: usize, depth: usize, width: usize, rng: &mut RandomSource) -> Result<Self> {
        let mut net = Self::zeros(d, depth, width)?;
        for shape in net.layers.clone() {
            let std = (1.0 / shape.fan_in as f64).sqrt();
            for w in &mut net.params[shape.weight_offset..shape.bias_offset] {
                *w = rng.normal(std);
            }
        }
        Ok(net)
    }

    /// A depth-1 student that computes exactly the teacher function.
    pub fn from_teacher(teacher: &TeacherNet) -> Self {
        let gamma = teacher.gamma();
        let mut net = Self::zeros(gamma.d, 1, gamma.m).expect("teacher dimensions are positive");
        let (hidden, out) = (net.layers[0], net.layers[1]);
        for i in 0..gamma.m {
            for k in 0..gamma.d {
                net.params[hidden.weight_offset + k * gamma.m + i] = teacher.a().get(i, k);
            }
            net.params[hidden.bias_offset + i] = teacher.b()[i];
            net.params[out.weight_offset + i] = teacher.theta()[i];
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> &[LayerShape] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn weights(&self, layer: usize) -> &[f64] {
        let s = &self.layers[layer];
        &self.params[s.weight_offset..s.bias_offset]
    }

    pub fn weights_mut(&mut self, layer: usize) -> &mut [f64] {
        let s = self.layers[layer];
        &mut self.params[s.weight_offset..s.bias_offset]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        let s = &self.layers[layer];
        &self.params[s.bias_offset..s.bias_offset + s.fan_out]
    }

    pub fn bias_mut(&mut self, layer: usize) -> &mut [f64] {
        let s = self.layers[layer];
        &mut self.params[s.bias_offset..s.bias_offset + s.fan_out]
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn check_input(&self, xs: &Matrix) -> Result<()> {
        if xs.cols() != self.d {
            return Err(Error::shape("student forward", self.d, xs.cols()));
        }
        Ok(())
    }

    pub fn forward(&self, xs: &Matrix) -> Result<(Vec<f64>, ForwardCache)> {
        self.check_input(xs)?;
        let rows = xs.rows();
        let mut inputs = Vec::with_capacity(self.depth + 1);
        let mut preacts = Vec::with_capacity(self.depth);
        inputs.push(xs.data().to_vec());
        for l in 0..self.depth {
            let z = affine(&inputs[l], rows, &self.layers[l], &self.params);
            inputs.push(z.iter().map(|&v| v.max(0.0)).collect());
            preacts.push(z);
        }
        let predictions = affine(&inputs[self.depth], rows, &self.layers[self.depth], &self.params);
        Ok((
            predictions,
            ForwardCache {
                batch: rows,
                inputs,
                preacts,
            },
        ))
    }

    /// Predictions only, evaluated in bounded-memory chunks.
    pub fn predict(&self, xs: &Matrix) -> Result<Vec<f64>> {
        self.check_input(xs)?;
        let mut out = Vec::with_capacity(xs.rows());
        for chunk in xs.data().chunks(PREDICT_CHUNK * self.d) {
            let rows = chunk.len() / self.d;
            let mut act = chunk.to_vec();
            for l in 0..self.depth {
                act = affine(&act, rows, &self.layers[l], &self.params);
                act.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            out.extend(affine(&act, rows, &self.layers[self.depth], &self.params));
        }
        Ok(out)
    }

    /// Mean squared error over a batch and its exact gradient.
    ///
    /// `relu'(0)` is taken as 0.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        predictions: &[f64],
        targets: &[f64],
    ) -> Result<(f64, GradientSet)> {
        let batch = cache.batch;
        if predictions.len() != batch || targets.len() != batch || batch == 0 {
            return Err(Error::shape(
                "student backward",
                format!("{batch} predictions and targets"),
                format!("{} / {}", predictions.len(), targets.len()),
            ));
        }
        let scale = 1.0 / batch as f64;
        let mut loss = 0.0;
        let mut delta: Vec<f64> = predictions
            .iter()
            .zip(targets)
            .map(|(p, t)| {
                let e = p - t;
                loss += e * e;
                2.0 * scale * e
            })
            .collect();
        loss *= scale;

        let mut grads = vec![0.0; self.params.len()];
        for l in (0..=self.depth).rev() {
            let shape = self.layers[l];
            let (fan_in, fan_out) = (shape.fan_in, shape.fan_out);
            let input = &cache.inputs[l];

            let (gw, rest) = grads[shape.weight_offset..].split_at_mut(fan_in * fan_out);
            let gb = &mut rest[..fan_out];
            for r in 0..batch {
                let d_row = &delta[r * fan_out..(r + 1) * fan_out];
                for (g, &dv) in gb.iter_mut().zip(d_row) {
                    *g += dv;
                }
                for (k, &x) in input[r * fan_in..(r + 1) * fan_in].iter().enumerate() {
                    if x == 0.0 {
                        continue;
                    }
                    for (g, &dv) in gw[k * fan_out..(k + 1) * fan_out].iter_mut().zip(d_row) {
                        *g += x * dv;
                    }
                }
            }

            if l == 0 {
                break;
            }
            let w = &self.params[shape.weight_offset..shape.bias_offset];
            let pre = &cache.preacts[l - 1];
            let mut prev = vec![0.0; batch * fan_in];
            for r in 0..batch {
                let d_row = &delta[r * fan_out..(r + 1) * fan_out];
                for k in 0..fan_in {
                    if pre[r * fan_in + k] <= 0.0 {
                        continue;
                    }
                    prev[r * fan_in + k] = w[k * fan_out..(k + 1) * fan_out]
                        .iter()
                        .zip(d_row)
                        .map(|(a, b)| a * b)
                        .sum();
                }
            }
            delta = prev;
        }
        Ok((loss, GradientSet { values: grads }))
    }

    pub fn loss_and_gradient(&self, xs: &Matrix, ys: &[f64]) -> Result<(f64, GradientSet)> {
        let (pred, cache) = self.forward(xs)?;
        self.backward(&cache, &pred, ys)
    }

    pub fn mse(&self, xs: &Matrix, ys: &[f64]) -> Result<f64> {
        let pred = self.predict(xs)?;
        if pred.len() != ys.len() || ys.is_empty() {
            return Err(Error::shape("student mse", pred.len(), ys.len()));
        }
        Ok(pred.iter().zip(ys).map(|(p, y)| (p - y) * (p - y)).sum::<f64>() / ys.len() as f64)
    }

    pub fn snapshot(&self) -> StudentSnapshot {
        StudentSnapshot {
            d: self.d,
            depth: self.depth,
            width: self.width,
            params: self.params.clone(),
        }
    }

    pub fn from_snapshot(snap: &StudentSnapshot) -> Result<Self> {
        let mut net = Self::zeros(snap.d, snap.depth, snap.width)?;
        if snap.params.len() != net.params.len() {
            return Err(Error::shape("StudentNet::from_snapshot", net.params.len(), snap.params.len()));
        }
        net.params.copy_from_slice(&snap.params);
        Ok(net)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(file, &self.snapshot())?;
        Ok(())
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let snap: StudentSnapshot = serde_json::from_reader(file)?;
        Self::from_snapshot(&snap)
    }
}

/// Serializable parameter dump, layer-ordered and row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudentSnapshot {
    pub d: usize,
    pub depth: usize,
    pub width: usize,
    pub params: Vec<f64>,
}
