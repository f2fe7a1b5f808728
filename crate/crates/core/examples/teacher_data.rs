//! Sample a teacher, draw a noisy dataset and write it to CSV.
//!
//! cargo run --example teacher_data -- [d] [M] [N]

use sampcomp::numeric::RandomSource;
use sampcomp::teacher::{generate_dataset, sample_teacher, Gamma};

fn main() -> sampcomp::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (d, m, n) = (
        *args.first().unwrap_or(&4),
        *args.get(1).unwrap_or(&4),
        *args.get(2).unwrap_or(&256),
    );
    let gamma = Gamma::new(d, m, 0.1)?;
    let root = RandomSource::new(1);
    let teacher = sample_teacher(gamma, &mut root.child(0));
    let data = generate_dataset(&teacher, n, &mut root.child(1))?;

    let mean = data.ys_noiseless.iter().sum::<f64>() / n as f64;
    let var = data.ys_noiseless.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
    let noise = data
        .ys
        .iter()
        .zip(&data.ys_noiseless)
        .map(|(y, g)| (y - g).powi(2))
        .sum::<f64>()
        / n as f64;
    println!("teacher d={d} M={m}: theta = {:?}", teacher.theta());
    println!("{n} points, Var[g(X)] ~ {var:.4}, mean squared noise {noise:.5} (sigma^2 = 0.01)");

    let path = std::env::temp_dir().join("sampcomp_teacher_data.csv");
    data.write_csv(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}
