//! Train one student at a fixed width and report the test error.

use sampcomp::experiment::estimate_error;
use sampcomp::numeric::RandomSource;
use sampcomp::teacher::{generate_dataset, sample_teacher, Gamma};
use sampcomp::trainer::{train, TrainConfig};

fn main() -> sampcomp::Result<()> {
    let gamma = Gamma::new(2, 3, 0.1)?;
    let root = RandomSource::new(9);
    let teacher = sample_teacher(gamma, &mut root.child(0));
    let data = generate_dataset(&teacher, 1024, &mut root.child(1))?;

    let report = train(&data, 1, 12, &root.child(2), &TrainConfig::default())?;
    let error = estimate_error(&report.best_params, &teacher, gamma.sigma, 8192, &mut root.child(3))?;

    println!(
        "lr {:.2e} -> {:.2e}, {} epochs (best at {}), {} queries",
        report.initial_lr, report.final_lr, report.epochs_run, report.best_epoch, report.queries
    );
    println!("best validation MSE {:.5} (noise floor {:.5})", report.best_val_loss, gamma.sigma * gamma.sigma);
    println!("test error {error:.4}");
    Ok(())
}
