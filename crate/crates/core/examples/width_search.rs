//! Tune the student width by golden-section search over log2(width).

use sampcomp::numeric::RandomSource;
use sampcomp::teacher::{generate_dataset, sample_teacher, Gamma};
use sampcomp::trainer::TrainConfig;
use sampcomp::width::{golden_section, select_and_train, WidthScheme};

fn main() -> sampcomp::Result<()> {
    let toy = golden_section(|u| (u - 3.0) * (u - 3.0), 1.0, 5.0, 0.25);
    println!("toy search: argmin {:.3} in {} evaluations", toy.best_x, toy.evaluations.len());

    let gamma = Gamma::new(4, 4, 0.1)?;
    let root = RandomSource::new(11);
    let teacher = sample_teacher(gamma, &mut root.child(0));
    let data = generate_dataset(&teacher, 512, &mut root.child(1))?;
    let outcome = select_and_train(&gamma, &data, 1, WidthScheme::Tune, &root.child(2), &TrainConfig::default())?;

    for (w, q) in &outcome.queries_per_width {
        println!("width {w:4}: {q} queries");
    }
    println!(
        "chosen width {} (validation {:.5}), total queries {}",
        outcome.best_width, outcome.best_report.best_val_loss, outcome.total_queries
    );
    Ok(())
}
