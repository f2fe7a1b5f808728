//! Teacher-student sample-complexity benchmark for shallow ReLU networks.
//!
//! A random one-hidden-layer ReLU teacher labels Gaussian inputs with additive
//! noise. Students are ReLU MLPs trained with Adam, an exponential-ramp
//! learning-rate finder and plateau decay, with the hidden width picked by
//! golden-section search on `log2(width)`. Sweeps over teacher shapes record
//! the smallest tested sample size reaching a target error, and the total
//! number of training-point queries spent getting there.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod lambda;
pub mod numeric;
pub mod optim;
pub mod report;
pub mod selftest;
pub mod student;
pub mod teacher;
pub mod trainer;
pub mod width;

pub use error::{Error, Result};
pub use experiment::{estimate_error, run_sweep, run_trial, SweepConfig, TrialResult};
pub use numeric::{Matrix, RandomSource};
pub use student::StudentNet;
pub use teacher::{generate_dataset, sample_teacher, Dataset, Gamma, TeacherNet};
pub use trainer::{train, TrainConfig, TrainReport};
pub use width::{select_and_train, WidthScheme};
