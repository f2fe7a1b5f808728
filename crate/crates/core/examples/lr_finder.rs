//! Run the learning-rate range test on a fresh student and print the three estimates.

use sampcomp::numeric::RandomSource;
use sampcomp::optim::lr_find;
use sampcomp::teacher::{generate_dataset, sample_teacher, Gamma};
use sampcomp::trainer::BATCH_SIZE;
use sampcomp::StudentNet;

fn main() -> sampcomp::Result<()> {
    let gamma = Gamma::new(4, 4, 0.1)?;
    let root = RandomSource::new(5);
    let teacher = sample_teacher(gamma, &mut root.child(0));
    let data = generate_dataset(&teacher, 512, &mut root.child(1))?;
    let net = StudentNet::init(4, 1, 16, &mut root.child(2))?;
    let res = lr_find(&net, &data, BATCH_SIZE, &mut root.child(3), &Default::default())?;

    println!("{} steps, {} queries", res.steps, res.queries);
    println!("steep   {:.3e}", res.lr_steep);
    println!("minimum {:.3e}", res.lr_minimum);
    println!("valley  {:.3e}", res.lr_valley);
    println!("chosen  {:.3e}{}", res.chosen, if res.fallback { " (fallback)" } else { "" });
    for (lr, loss) in res.trace.iter().step_by(50) {
        println!("  lr {lr:9.2e}  loss {loss:.4}");
    }
    Ok(())
}
