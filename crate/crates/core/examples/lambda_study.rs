//! Sample lambda for d = 2M and print the quantiles per M.

use sampcomp::lambda::{compute_lambda, lambda_sweep, sample_weight_matrix};
use sampcomp::numeric::RandomSource;

fn main() -> sampcomp::Result<()> {
    let mut rng = RandomSource::new(13);
    let w = sample_weight_matrix(6, 3, &mut rng)?;
    let one = compute_lambda(&w)?;
    println!("d=6 M=3: singular values {:?}, log10 lambda {:.3}", one.singular_values, one.log10_lambda());

    let sweep = lambda_sweep(&[2, 4, 8, 16], 300, &RandomSource::new(14))?;
    println!("   M    d   q05     median  q95");
    for r in &sweep.rows {
        println!(
            "{:4} {:4} {:7.2} {:7.2} {:7.2}",
            r.m, r.d, r.q05_log10, r.median_log10, r.q95_log10
        );
    }
    Ok(())
}
