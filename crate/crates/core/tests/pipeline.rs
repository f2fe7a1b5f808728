use std::collections::BTreeMap;

use proptest::prelude::*;
use sampcomp::experiment::{
    read_results, run_sweep, run_trial, run_trial_detailed, summarize, trial_seed, ExperimentSettings,
    SweepConfig, TrialResult, TRIALS_FILE,
};
use sampcomp::numeric::RandomSource;
use sampcomp::teacher::{generate_dataset, sample_teacher, Gamma};
use sampcomp::trainer::{train, TrainConfig, EARLY_STOP_REL, EARLY_STOP_WINDOW, MAX_EPOCHS};
use sampcomp::width::WidthScheme;

fn teacher_data(d: usize, m: usize, n: usize, seed: u64) -> sampcomp::Dataset {
    let g = sample_teacher(Gamma::new(d, m, 0.1).unwrap(), &mut RandomSource::new(seed));
    generate_dataset(&g, n, &mut RandomSource::new(seed + 1)).unwrap()
}

#[test]
fn early_stop_predicate_holds_at_termination() {
    for seed in 0..6 {
        let data = teacher_data(3, 3, 256, seed);
        let r = train(&data, 1 + (seed as usize) % 3, 8, &RandomSource::new(seed), &TrainConfig::default()).unwrap();
        assert!(r.flags.is_empty(), "{:?}", r.flags);
        let h = &r.val_history;
        assert_eq!(h.len(), r.epochs_run);
        assert_eq!(r.best_val_loss, h.iter().copied().fold(f64::INFINITY, f64::min));
        if r.epochs_run < MAX_EPOCHS {
            let start = h.len() - EARLY_STOP_WINDOW;
            let before = h[..start].iter().copied().fold(f64::INFINITY, f64::min);
            for &v in &h[start..] {
                assert!(v > (1.0 - EARLY_STOP_REL) * before);
            }
        }
        assert!(r.queries > r.finder_queries);
    }
}

#[test]
fn trial_queries_sum_over_every_trained_width() {
    let gamma = Gamma::new(2, 3, 0.1).unwrap();
    let seed = trial_seed(3, &gamma, 128, 0);
    let settings = ExperimentSettings::new();
    let out = run_trial_detailed(&gamma, 128, 1, WidthScheme::Tune, 0, seed, &settings).unwrap();
    assert_eq!(out.result.queries, out.search.total_queries);
    assert_eq!(
        out.search.total_queries,
        out.search.queries_per_width.iter().map(|q| q.1).sum::<u64>()
    );
    assert_eq!(out.search.queries_per_width.len(), out.search.evaluations.len());

    // retrain one width on its own stream and compare the count
    let root = RandomSource::new(seed);
    let teacher = sample_teacher(gamma, &mut root.child(0));
    let data = generate_dataset(&teacher, 128, &mut root.child(1)).unwrap();
    let (w, q) = out.search.queries_per_width[0];
    let again = train(&data, 1, w, &root.child(2).child(w as u64), &settings.train).unwrap();
    assert_eq!(again.queries, q);

    let twice = run_trial(&gamma, 128, 1, WidthScheme::Tune, 0, seed, &settings).unwrap();
    assert_eq!(twice, out.result);
}

#[test]
fn one_unit_teacher_is_learned_from_4096_samples() {
    let gamma = Gamma::new(1, 1, 0.1).unwrap();
    let settings = ExperimentSettings::new();
    let good = (0..5)
        .filter(|&t| {
            let r = run_trial(&gamma, 4096, 1, WidthScheme::Tune, t, trial_seed(11, &gamma, 4096, t), &settings).unwrap();
            r.error <= 1.0
        })
        .count();
    assert!(good >= 4, "only {good} of 5 trials reached error 1");
}

#[test]
fn sweep_resumes_and_improves_with_n() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SweepConfig::from_toml_str(
        "d = [1, 4]\nm = [1, 4]\nsigma = [0.1]\nepsilon = [1.0, 0.5]\ntrials = 8\nn0 = 16\nseed = 5\n",
        std::path::Path::new("inline"),
    )
    .unwrap();
    let first = run_sweep(&cfg, dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join(TRIALS_FILE)).unwrap();

    // rerunning over a complete directory must not add rows
    let second = run_sweep(&cfg, dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join(TRIALS_FILE)).unwrap(), text);
    assert_eq!(first.summary, second.summary);

    // drop the last cell and resume: it is recomputed byte for byte
    let lines: Vec<&str> = text.lines().collect();
    std::fs::write(dir.path().join(TRIALS_FILE), lines[..lines.len() - 8].join("\n") + "\n").unwrap();
    run_sweep(&cfg, dir.path()).unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join(TRIALS_FILE)).unwrap(), text);

    let rows = read_results(dir.path().join(TRIALS_FILE)).unwrap();
    let mut by_gamma: BTreeMap<(usize, usize), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in &rows {
        by_gamma.entry((r.d, r.m)).or_default().entry(r.n).or_default().push(r.error);
    }
    for (g, cells) in &by_gamma {
        let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
        let first = mean(cells.values().next().unwrap());
        let last = mean(cells.values().last().unwrap());
        assert!(cells.len() == 1 || last < first, "{g:?}: {first} -> {last}");
    }
    for c in &first.summary.cells {
        let members: Vec<&TrialResult> = rows.iter().filter(|r| (r.d, r.m, r.n) == (c.d, c.m, c.n)).collect();
        let mean = members.iter().map(|r| r.error).sum::<f64>() / members.len() as f64;
        assert_eq!(mean, c.mean_error);
    }
}

fn arb_rows() -> impl Strategy<Value = Vec<TrialResult>> {
    prop::collection::vec((0usize..3, 0usize..5, 0usize..4, 0.0f64..5.0), 1..60).prop_map(|raw| {
        raw.into_iter()
            .map(|(g, k, t, error)| TrialResult {
                d: 1 + g,
                m: 1,
                sigma: 0.1,
                depth: 1,
                scheme: "tune".into(),
                n: 16 << k,
                trial: t,
                seed: 0,
                error,
                queries: 1000,
                width: 4,
                flag: String::new(),
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn sample_complexity_is_monotone_in_epsilon(rows in arb_rows()) {
        let eps = [0.25, 0.5, 1.0, 2.0];
        let s = summarize(&rows, &eps);
        for chunk in s.sample_complexity.chunks(eps.len()) {
            for pair in chunk.windows(2) {
                // larger epsilon never needs more samples
                match (pair[0].n_eps, pair[1].n_eps) {
                    (Some(a), Some(b)) => prop_assert!(b <= a),
                    (Some(_), None) => prop_assert!(false, "reached a smaller target but not a larger one"),
                    _ => {}
                }
            }
        }
    }
}
