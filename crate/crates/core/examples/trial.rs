//! One full trial under each width scheme.

use sampcomp::experiment::{run_trial, trial_seed, ExperimentSettings};
use sampcomp::{Gamma, WidthScheme};

fn main() -> sampcomp::Result<()> {
    let gamma = Gamma::new(2, 2, 0.1)?;
    let n = 256;
    let settings = ExperimentSettings::new();
    let seed = trial_seed(42, &gamma, n, 0);
    let tuned = run_trial(&gamma, n, 1, WidthScheme::Tune, 0, seed, &settings)?;
    let mut rows = vec![tuned.clone()];
    for scheme in [WidthScheme::Same, WidthScheme::FourM, WidthScheme::Best(tuned.width)] {
        rows.push(run_trial(&gamma, n, 1, scheme, 0, seed, &settings)?);
    }
    for r in rows {
        println!(
            "{:7} width {:3}  error {:.4}  queries {:7}  {}",
            r.scheme, r.width, r.error, r.queries, r.flag
        );
    }
    Ok(())
}
