//! Compare backprop gradients with central differences on a few random students.

use sampcomp::numeric::{Matrix, RandomSource};
use sampcomp::selftest::gradient_violation;
use sampcomp::StudentNet;

fn main() -> sampcomp::Result<()> {
    let mut rng = RandomSource::new(3);
    for depth in 1..=3 {
        let net = StudentNet::init(5, depth, 6, &mut rng)?;
        let xs = Matrix::gaussian(8, 5, 1.0, &mut rng);
        let ys: Vec<f64> = (0..8).map(|_| rng.standard_normal()).collect();
        let (loss, grad) = net.loss_and_gradient(&xs, &ys)?;
        let worst = gradient_violation(&net, &xs, &ys, 1e-5, 1e-4, 1e-7);
        println!(
            "depth {depth}: {} params, loss {loss:.4}, |grad| {:.4}, tolerance violation {worst:e}",
            net.param_count(),
            grad.values.iter().map(|g| g * g).sum::<f64>().sqrt()
        );
    }
    Ok(())
}
