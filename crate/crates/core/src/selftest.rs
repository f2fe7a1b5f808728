//! Fast built-in checks: analytic gradients, the Adam recurrence and golden-section search.

use crate::numeric::{Matrix, RandomSource};
use crate::optim::AdamState;
use crate::student::StudentNet;
use crate::width::golden_section;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Largest violation of `|analytic − numeric| ≤ max(rel·|numeric|, abs)` over all
/// parameters, using central differences with step `h`. Zero means every entry passed.
pub fn gradient_violation(net: &StudentNet, xs: &Matrix, ys: &[f64], h: f64, rel: f64, abs: f64) -> f64 {
    let (_, grad) = net.loss_and_gradient(xs, ys).expect("shapes checked by caller");
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    for i in 0..net.param_count() {
        let p = net.params()[i];
        probe.params_mut()[i] = p + h;
        let up = probe.mse(xs, ys).expect("shapes checked by caller");
        probe.params_mut()[i] = p - h;
        let down = probe.mse(xs, ys).expect("shapes checked by caller");
        probe.params_mut()[i] = p;
        let numeric = (up - down) / (2.0 * h);
        let diff = (grad.values[i] - numeric).abs();
        let allowed = (rel * numeric.abs()).max(abs);
        worst = worst.max(diff - allowed);
    }
    worst.max(0.0)
}

fn check_gradients() -> CheckResult {
    let mut rng = RandomSource::new(11);
    let mut failures = 0;
    let configs = 24;
    for c in 0..configs {
        let depth = 1 + c % 3;
        let d = 1 + (rng.uniform() * 8.0) as usize;
        let width = 1 + (rng.uniform() * 8.0) as usize;
        let batch = 1 + (rng.uniform() * 6.0) as usize;
        let mut net = StudentNet::init(d, depth, width, &mut rng).expect("valid shape");
        for b in 0..depth {
            for v in net.bias_mut(b) {
                *v = 0.3 * rng.standard_normal();
            }
        }
        let xs = Matrix::gaussian(batch, d, 1.0, &mut rng);
        let ys: Vec<f64> = (0..batch).map(|_| rng.standard_normal()).collect();
        if gradient_violation(&net, &xs, &ys, 1e-5, 1e-4, 1e-7) > 0.0 {
            failures += 1;
        }
    }
    CheckResult {
        name: "gradient",
        passed: failures == 0,
        detail: format!("{failures} of {configs} configurations off finite differences"),
    }
}

fn check_adam() -> CheckResult {
    let (lr, g) = (0.01, -2.5);
    let mut state = AdamState::new(1, lr);
    let mut p = [1.0];
    let (mut m, mut v, mut expected) = (0.0, 0.0, 1.0f64);
    let mut worst: f64 = 0.0;
    for t in 1..=5 {
        state.step(&mut p, &[g]);
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        let mh = m / (1.0 - 0.9f64.powi(t));
        let vh = v / (1.0 - 0.999f64.powi(t));
        expected -= lr * mh / (vh.sqrt() + 1e-8);
        worst = worst.max((p[0] - expected).abs());
    }
    CheckResult {
        name: "adam",
        passed: worst <= 1e-12,
        detail: format!("max deviation from recurrence {worst:.3e}"),
    }
}

fn check_golden_section() -> CheckResult {
    let s = golden_section(|u| (u - 3.0) * (u - 3.0), 1.0, 5.0, 0.25);
    let n = s.evaluations.len();
    CheckResult {
        name: "golden-section",
        passed: (s.best_x - 3.0).abs() <= 0.25 && n <= 10,
        detail: format!("argmin {:.4} after {n} evaluations", s.best_x),
    }
}

pub fn run_selftest() -> Vec<CheckResult> {
    vec![check_gradients(), check_adam(), check_golden_section()]
}
