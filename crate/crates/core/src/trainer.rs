//! A complete training run at a fixed architecture.
//!
//! The run splits the data 80/20, ramps the learning rate on the training
//! split, then trains with Adam in shuffled mini-batches. Each epoch ends with
//! a validation pass that drives both the plateau decay and early stopping.
//! The parameters with the lowest validation loss are returned.
//!
//! Every training data point consumed (ramp steps and epochs alike) is counted
//! towards the query total `T`. Validation passes are not counted.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::RandomSource;
use crate::optim::{lr_find, AdamState, LrFinderConfig, LrFinderResult, PlateauScheduler};
use crate::student::StudentNet;
use crate::teacher::Dataset;

pub const BATCH_SIZE: usize = 64;
pub const MAX_EPOCHS: usize = 1500;
pub const EARLY_STOP_WINDOW: usize = 24;
pub const EARLY_STOP_REL: f64 = 0.01;
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub early_stop_window: usize,
    pub early_stop_rel: f64,
    pub lr_finder: LrFinderConfig,
    /// Per-epoch CSV log (`epoch,train_loss,val_loss,lr`), if set.
    pub epoch_log: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: BATCH_SIZE,
            max_epochs: MAX_EPOCHS,
            early_stop_window: EARLY_STOP_WINDOW,
            early_stop_rel: EARLY_STOP_REL,
            lr_finder: LrFinderConfig::default(),
            epoch_log: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainFlag {
    /// The learning-rate ramp saw no decrease; the fallback rate was used.
    LrFallback,
    /// A non-finite loss appeared; the best checkpoint was restored.
    Diverged,
}

impl TrainFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrainFlag::LrFallback => "lr_fallback",
            TrainFlag::Diverged => "diverged",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub best_val_loss: f64,
    /// 1-based epoch at which `best_val_loss` was observed (0 if none).
    pub best_epoch: usize,
    pub epochs_run: usize,
    pub queries: u64,
    pub finder_queries: u64,
    pub initial_lr: f64,
    pub final_lr: f64,
    pub val_history: Vec<f64>,
    pub best_params: StudentNet,
    pub flags: Vec<TrainFlag>,
    pub finder: LrFinderResult,
}

impl TrainReport {
    pub fn is_flagged(&self, flag: TrainFlag) -> bool {
        self.flags.contains(&flag)
    }
}

/// Random 80/20 partition; both parts are non-empty.
pub fn split_dataset(data: &Dataset, rng: &mut RandomSource) -> Result<(Dataset, Dataset)> {
    let (train_idx, val_idx) = split_indices(data.len(), rng)?;
    Ok((data.subset(&train_idx), data.subset(&val_idx)))
}

pub fn split_indices(n: usize, rng: &mut RandomSource) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let n_train = ((TRAIN_FRACTION * n as f64).round() as usize).clamp(1, n - 1);
    let mut perm = rng.permutation(n);
    let val = perm.split_off(n_train);
    Ok((perm, val))
}

/// Stops once the best validation loss has not dropped by more than
/// `rel` (relative) over the last `window` epochs.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    window: usize,
    rel: f64,
    /// Best-so-far after each observed epoch.
    best_history: Vec<f64>,
}

impl EarlyStopping {
    pub fn new(window: usize, rel: f64) -> Self {
        Self {
            window,
            rel,
            best_history: Vec::new(),
        }
    }

    /// Records one epoch and reports whether training should stop.
    pub fn observe(&mut self, val_loss: f64) -> bool {
        let prev = self.best_history.last().copied().unwrap_or(f64::INFINITY);
        self.best_history.push(prev.min(val_loss));
        let e = self.best_history.len();
        if e <= self.window {
            return false;
        }
        let at_window_start = self.best_history[e - 1 - self.window];
        self.best_history[e - 1] >= (1.0 - self.rel) * at_window_start
    }
}

/// Splits `data`, then trains a fresh student of the given shape.
pub fn train(
    data: &Dataset,
    depth: usize,
    width: usize,
    rng: &RandomSource,
    config: &TrainConfig,
) -> Result<TrainReport> {
    let (train_set, val_set) = split_dataset(data, &mut rng.child(0))?;
    train_on_split(&train_set, &val_set, depth, width, rng, config)
}

/// Trains on an explicit train/validation split.
pub fn train_on_split(
    train_set: &Dataset,
    val_set: &Dataset,
    depth: usize,
    width: usize,
    rng: &RandomSource,
    config: &TrainConfig,
) -> Result<TrainReport> {
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::InsufficientData {
            needed: 2,
            got: train_set.len() + val_set.len(),
        });
    }
    let mut net = StudentNet::init(train_set.dim(), depth, width, &mut rng.child(1))?;
    let finder = lr_find(
        &net,
        train_set,
        config.batch_size,
        &mut rng.child(2),
        &config.lr_finder,
    )?;
    let mut flags = Vec::new();
    if finder.fallback {
        flags.push(TrainFlag::LrFallback);
    }

    let mut shuffle_rng = rng.child(3);
    let mut adam = AdamState::new(net.param_count(), finder.chosen);
    let mut plateau = PlateauScheduler::new(finder.chosen);
    let mut stopper = EarlyStopping::new(config.early_stop_window, config.early_stop_rel);
    let mut log = match &config.epoch_log {
        Some(path) => {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(["epoch", "train_loss", "val_loss", "lr"])?;
            Some(w)
        }
        None => None,
    };

    let mut queries = finder.queries;
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0;
    let mut best_params = net.clone();
    let mut val_history = Vec::new();
    let mut epochs_run = 0;
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    while epochs_run < config.max_epochs {
        epochs_run += 1;
        shuffle_rng.shuffle(&mut order);
        let mut train_loss_sum = 0.0;
        let mut diverged = false;
        for idx in order.chunks(config.batch_size) {
            let batch = train_set.subset(idx);
            let (loss, grads) = net.loss_and_gradient(&batch.xs, &batch.ys)?;
            queries += idx.len() as u64;
            if !loss.is_finite() {
                diverged = true;
                break;
            }
            train_loss_sum += loss * idx.len() as f64;
            adam.step(net.params_mut(), &grads.values);
        }
        let val = if diverged || !net.is_finite() {
            f64::NAN
        } else {
            net.mse(&val_set.xs, &val_set.ys)?
        };
        if !val.is_finite() {
            flags.push(TrainFlag::Diverged);
            break;
        }
        val_history.push(val);
        if val < best_val {
            best_val = val;
            best_epoch = epochs_run;
            best_params = net.clone();
        }
        adam.lr = plateau.update(val);
        if let Some(w) = log.as_mut() {
            let train_loss = train_loss_sum / train_set.len() as f64;
            w.write_record([
                epochs_run.to_string(),
                train_loss.to_string(),
                val.to_string(),
                adam.lr.to_string(),
            ])?;
        }
        if stopper.observe(val) {
            break;
        }
    }
    if let Some(mut w) = log {
        w.flush()?;
    }

    Ok(TrainReport {
        best_val_loss: best_val,
        best_epoch,
        epochs_run,
        queries,
        finder_queries: finder.queries,
        initial_lr: finder.chosen,
        final_lr: adam.lr,
        val_history,
        best_params,
        flags,
        finder,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Matrix;
    use std::collections::BTreeSet;

    fn toy_data(n: usize, seed: u64) -> Dataset {
        let mut rng = RandomSource::new(seed);
        let xs = Matrix::gaussian(n, 2, 1.0, &mut rng);
        let clean: Vec<f64> = (0..n).map(|r| (xs.row(r)[0] - 0.3 * xs.row(r)[1]).max(0.0)).collect();
        let ys = clean.iter().map(|c| c + rng.normal(0.05)).collect();
        Dataset::new(xs, ys, clean).unwrap()
    }

    #[test]
    fn pure_noise_targets_reach_the_noise_floor() {
        use crate::teacher::{generate_dataset, sample_teacher, Gamma};
        let sigma = 0.1;
        let mut teacher = sample_teacher(Gamma::new(1, 1, sigma).unwrap(), &mut RandomSource::new(8));
        teacher.theta_mut()[0] = 0.0;
        let data = generate_dataset(&teacher, 2048, &mut RandomSource::new(9)).unwrap();
        let report = train(&data, 1, 4, &RandomSource::new(10), &TrainConfig::default()).unwrap();
        let ratio = report.best_val_loss / (sigma * sigma);
        assert!((ratio - 1.0).abs() <= 0.2, "best val {} vs sigma^2", report.best_val_loss);
    }

    #[test]
    fn split_sizes() {
        let mut rng = RandomSource::new(1);
        let (t, v) = split_indices(10, &mut rng).unwrap();
        assert_eq!((t.len(), v.len()), (8, 2));
        let (t, v) = split_indices(2, &mut rng).unwrap();
        assert_eq!((t.len(), v.len()), (1, 1));
        assert!(matches!(split_indices(1, &mut rng), Err(Error::InsufficientData { .. })));

        let (t, v) = split_indices(37, &mut rng).unwrap();
        let all: BTreeSet<usize> = t.iter().chain(&v).copied().collect();
        assert_eq!(all.len(), 37);
        assert_eq!(all, (0..37).collect());
    }

    #[test]
    fn early_stopping_requires_one_percent_in_window() {
        let mut s = EarlyStopping::new(24, 0.01);
        assert!(!s.observe(1.0));
        for _ in 0..23 {
            assert!(!s.observe(0.995));
        }
        // 25th epoch: best 0.995 vs 1.0 at window start, less than 1% better
        assert!(s.observe(1.0));

        let mut s = EarlyStopping::new(24, 0.01);
        for e in 0..MAX_EPOCHS {
            assert!(!s.observe(0.98f64.powi(e as i32)));
        }
    }

    #[test]
    fn query_accounting_is_exact() {
        let data = toy_data(400, 2);
        let cfg = TrainConfig {
            max_epochs: 3,
            early_stop_window: 1000,
            ..TrainConfig::default()
        };
        let report = train(&data, 1, 8, &RandomSource::new(3), &cfg).unwrap();
        assert_eq!(report.epochs_run, 3);
        assert_eq!(report.finder_queries, 64 * report.finder.steps as u64);
        assert_eq!(report.queries, 960 + report.finder_queries);
    }

    #[test]
    fn report_is_consistent_and_deterministic() {
        let data = toy_data(300, 4);
        let rng = RandomSource::new(5);
        let cfg = TrainConfig::default();
        let a = train(&data, 1, 16, &rng, &cfg).unwrap();
        let b = train(&data, 1, 16, &rng, &cfg).unwrap();
        assert_eq!(a.best_params, b.best_params);
        assert_eq!(a.val_history, b.val_history);
        assert_eq!(a.queries, b.queries);

        let min = a.val_history.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(a.best_val_loss, min);

        let (_, val) = split_dataset(&data, &mut rng.child(0)).unwrap();
        let again = a.best_params.mse(&val.xs, &val.ys).unwrap();
        assert!((again - a.best_val_loss).abs() < 1e-10);
        assert!(a.best_val_loss < 0.05, "toy problem should be learnable: {}", a.best_val_loss);
    }

    #[test]
    fn hard_cap_bounds_epochs() {
        let data = toy_data(10, 8);
        let cfg = TrainConfig {
            early_stop_window: usize::MAX,
            ..TrainConfig::default()
        };
        let report = train(&data, 1, 2, &RandomSource::new(9), &cfg).unwrap();
        assert_eq!(report.epochs_run, MAX_EPOCHS);
        assert_eq!(report.queries, report.finder_queries + 8 * MAX_EPOCHS as u64);
    }

    #[test]
    fn epoch_log_written() {
        let data = toy_data(100, 6);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("epochs.csv");
        let cfg = TrainConfig {
            max_epochs: 5,
            epoch_log: Some(path.clone()),
            ..TrainConfig::default()
        };
        let report = train(&data, 2, 4, &RandomSource::new(7), &cfg).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "epoch,train_loss,val_loss,lr");
        assert_eq!(text.lines().count(), report.epochs_run + 1);
    }
}
