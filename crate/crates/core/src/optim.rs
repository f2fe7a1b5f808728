//! Adam, reduce-on-plateau learning-rate decay and the exponential-ramp
//! learning-rate finder.

use std::path::Path;

use crate::error::{Error, Result};
use crate::numeric::RandomSource;
use crate::student::StudentNet;
use crate::teacher::Dataset;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Bias-corrected Adam over a flat parameter vector.
#[derive(Clone, Debug)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
            lr,
            beta1: ADAM_BETA1,
            beta2: ADAM_BETA2,
            eps: ADAM_EPS,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        adam_step(self, params, grads);
    }
}

/// One Adam update: `p ← p − lr·m̂/(√v̂ + eps)`.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64]) {
    assert_eq!(params.len(), grads.len(), "adam_step: params/grads length mismatch");
    assert_eq!(params.len(), state.m.len(), "adam_step: state length mismatch");
    state.t += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let bc1 = 1.0 - b1.powi(state.t as i32);
    let bc2 = 1.0 - b2.powi(state.t as i32);
    let (lr, eps) = (state.lr, state.eps);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// Divides the learning rate by 10 once validation loss has failed to improve
/// for more than `patience` consecutive epochs.
#[derive(Clone, Debug)]
pub struct PlateauScheduler {
    pub patience: usize,
    /// Relative improvement needed to count as progress.
    pub threshold: f64,
    best: f64,
    bad_epochs: usize,
    lr: f64,
}

impl PlateauScheduler {
    pub const PATIENCE: usize = 12;
    pub const THRESHOLD: f64 = 1e-4;

    pub fn new(lr: f64) -> Self {
        Self {
            patience: Self::PATIENCE,
            threshold: Self::THRESHOLD,
            best: f64::INFINITY,
            bad_epochs: 0,
            lr,
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn epochs_since_improve(&self) -> usize {
        self.bad_epochs
    }

    /// Feeds one epoch's validation loss and returns the (possibly reduced) rate.
    pub fn update(&mut self, val_loss: f64) -> f64 {
        if val_loss < self.best * (1.0 - self.threshold) {
            self.best = val_loss;
            self.bad_epochs = 0;
        } else {
            self.bad_epochs += 1;
        }
        if self.bad_epochs > self.patience {
            self.lr /= 10.0;
            self.bad_epochs = 0;
        }
        self.lr
    }
}

#[derive(Clone, Debug)]
pub struct LrFinderConfig {
    pub start_lr: f64,
    pub max_lr: f64,
    pub steps_per_decade: u32,
    /// Exponential smoothing factor applied to the raw step losses.
    pub smoothing: f64,
    /// Stop once the smoothed loss exceeds this multiple of its running minimum.
    pub divergence_factor: f64,
    pub minimum_divisor: f64,
    /// Relative band around the trace minimum that defines the valley.
    pub valley_band: f64,
    pub fallback_lr: f64,
}

impl Default for LrFinderConfig {
    fn default() -> Self {
        Self {
            start_lr: 1e-8,
            max_lr: 10.0,
            steps_per_decade: 100,
            smoothing: 0.98,
            divergence_factor: 4.0,
            minimum_divisor: 20.0,
            valley_band: 0.05,
            fallback_lr: 1e-3,
        }
    }
}

impl LrFinderConfig {
    pub fn lr_at(&self, step: usize) -> f64 {
        self.start_lr * 10f64.powf(step as f64 / self.steps_per_decade as f64)
    }

    pub fn max_steps(&self) -> usize {
        let decades = (self.max_lr / self.start_lr).log10();
        (decades * self.steps_per_decade as f64 + 1e-9).floor() as usize + 1
    }

    /// Horizon of the loss smoother, `1 / (1 − smoothing)` steps.
    pub fn warmup_steps(&self) -> usize {
        (1.0 / (1.0 - self.smoothing)).round() as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LrFinderResult {
    pub lr_steep: f64,
    pub lr_minimum: f64,
    pub lr_valley: f64,
    /// Median of the three estimates (or the fallback rate).
    pub chosen: f64,
    /// `(lr, smoothed loss)` per step.
    pub trace: Vec<(f64, f64)>,
    pub steps: usize,
    /// Data points consumed by the ramp.
    pub queries: u64,
    /// Set when no usable decrease was observed and `chosen` is the fallback.
    pub fallback: bool,
}

impl LrFinderResult {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["lr", "smoothed_loss"])?;
        for (lr, loss) in &self.trace {
            w.write_record([lr.to_string(), loss.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn median3(a: f64, b: f64, c: f64) -> f64 {
    let mut v = [a, b, c];
    v.sort_by(f64::total_cmp);
    v[1]
}

/// Runs the ramp against an arbitrary training step.
///
/// `step(lr)` must perform one update at `lr` and return the loss measured on
/// that step's batch together with the number of data points it consumed.
pub fn lr_find_with<F>(config: &LrFinderConfig, mut step: F) -> Result<LrFinderResult>
where
    F: FnMut(f64) -> Result<(f64, u64)>,
{
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut queries = 0u64;
    let mut avg = 0.0;
    let mut best = f64::INFINITY;
    let mut steps = 0;

    for i in 0..config.max_steps() {
        let lr = config.lr_at(i);
        let (loss, used) = step(lr)?;
        steps += 1;
        queries += used;
        if !loss.is_finite() {
            break;
        }
        avg = config.smoothing * avg + (1.0 - config.smoothing) * loss;
        let smoothed = avg / (1.0 - config.smoothing.powi(i as i32 + 1));
        if !smoothed.is_finite() {
            break;
        }
        trace.push((lr, smoothed));
        best = best.min(smoothed);
        if smoothed > config.divergence_factor * best {
            break;
        }
    }

    let fallback = |trace, steps, queries| LrFinderResult {
        lr_steep: config.fallback_lr,
        lr_minimum: config.fallback_lr,
        lr_valley: config.fallback_lr,
        chosen: config.fallback_lr,
        trace,
        steps,
        queries,
        fallback: true,
    };

    let Some(min_idx) = argmin(trace.iter().map(|p| p.1)) else {
        return Ok(fallback(trace, steps, queries));
    };
    if min_idx == 0 || trace[min_idx].1 >= trace[0].1 {
        return Ok(fallback(trace, steps, queries));
    }

    let lr_minimum = trace[min_idx].0 / config.minimum_divisor;
    let lr_steep = steepest_descent_lr(&trace, config.warmup_steps());
    let lr_valley = valley_lr(&trace, config.valley_band);
    let chosen = median3(lr_steep, lr_minimum, lr_valley);
    if !(chosen.is_finite() && chosen > 0.0) {
        return Ok(fallback(trace, steps, queries));
    }
    Ok(LrFinderResult {
        lr_steep,
        lr_minimum,
        lr_valley,
        chosen,
        trace,
        steps,
        queries,
        fallback: false,
    })
}

fn argmin(values: impl Iterator<Item = f64>) -> Option<usize> {
    values
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
}

/// Rate at the most negative slope of `ln(loss)` against `log10(lr)`, ignoring
/// the first `skip` points while the smoother is still dominated by a few batches.
fn steepest_descent_lr(trace: &[(f64, f64)], skip: usize) -> f64 {
    let ln = |v: f64| v.max(f64::MIN_POSITIVE).ln();
    let skip = if trace.len() >= skip + 2 { skip } else { 0 };
    let mut best = (skip, f64::INFINITY);
    for (i, pair) in trace.windows(2).enumerate().skip(skip) {
        let dx = pair[1].0.log10() - pair[0].0.log10();
        let slope = (ln(pair[1].1) - ln(pair[0].1)) / dx;
        if slope < best.1 {
            best = (i, slope);
        }
    }
    trace[best.0].0
}

/// Log-midpoint of the longest contiguous run whose loss stays within
/// `band` of the trace minimum.
fn valley_lr(trace: &[(f64, f64)], band: f64) -> f64 {
    let floor = trace.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let limit = floor + band * floor.abs();
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for (i, &(_, loss)) in trace.iter().enumerate() {
        let inside = loss <= limit;
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.map_or(true, |(bs, be)| i - s > be - bs) {
                    best = Some((s, i));
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        if best.map_or(true, |(bs, be)| trace.len() - s > be - bs) {
            best = Some((s, trace.len()));
        }
    }
    let (s, e) = best.expect("the minimum itself is inside the band");
    let lo = trace[s].0.log10();
    let hi = trace[e - 1].0.log10();
    10f64.powf(0.5 * (lo + hi))
}

/// Cycles through shuffled passes of a dataset in fixed-size batches.
pub(crate) struct BatchStream {
    order: Vec<usize>,
    pos: usize,
    batch: usize,
}

impl BatchStream {
    pub(crate) fn new(n: usize, batch: usize, rng: &mut RandomSource) -> Self {
        Self {
            order: rng.permutation(n),
            pos: 0,
            batch: batch.min(n),
        }
    }

    pub(crate) fn next_batch(&mut self, rng: &mut RandomSource) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.batch);
        while out.len() < self.batch {
            if self.pos == self.order.len() {
                rng.shuffle(&mut self.order);
                self.pos = 0;
            }
            let take = (self.batch - out.len()).min(self.order.len() - self.pos);
            out.extend_from_slice(&self.order[self.pos..self.pos + take]);
            self.pos += take;
        }
        out
    }
}

/// Learning-rate ramp for a student on its training split.
///
/// Works on a copy of `net` with fresh Adam state; `net` itself is untouched.
/// Each step consumes `min(batch_size, |data|)` points.
pub fn lr_find(
    net: &StudentNet,
    data: &Dataset,
    batch_size: usize,
    rng: &mut RandomSource,
    config: &LrFinderConfig,
) -> Result<LrFinderResult> {
    if data.is_empty() || batch_size == 0 {
        return Err(Error::InsufficientData {
            needed: 1,
            got: data.len().min(batch_size),
        });
    }
    let mut probe = net.clone();
    let mut adam = AdamState::new(probe.param_count(), config.start_lr);
    let mut stream = BatchStream::new(data.len(), batch_size, rng);
    lr_find_with(config, |lr| {
        let idx = stream.next_batch(rng);
        let batch = data.subset(&idx);
        let (loss, grads) = probe.loss_and_gradient(&batch.xs, &batch.ys)?;
        adam.lr = lr;
        adam.step(probe.params_mut(), &grads.values);
        Ok((loss, idx.len() as u64))
    })
}
