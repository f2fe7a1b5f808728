//! Trials, sweeps and sample-complexity estimation.
//!
//! A trial samples a teacher, draws `N` noisy samples, selects and trains a
//! student, then measures the KL error `E[(ĝ(X) − g(X))²] / (2σ²)` by Monte
//! Carlo over fresh inputs. A sweep doubles `N` per teacher configuration until
//! the trial-averaged error reaches the smallest target, and `N_ε` is read off
//! the tested grid.
//!
//! Results are appended to `trials.csv` one cell at a time; rerunning a sweep
//! over the same directory skips every `(γ, N, trial)` already on disk.

use std::collections::{BTreeMap, HashSet};
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{mix_seed, Matrix, RandomSource};
use crate::student::StudentNet;
use crate::teacher::{generate_dataset, sample_teacher, Gamma, TeacherNet};
use crate::trainer::{TrainConfig, TrainFlag};
use crate::width::{median_width, select_and_train, SearchOutcome, WidthScheme};

pub const DEFAULT_MC_SAMPLES: usize = 8192;
pub const DEFAULT_N0: usize = 16;
pub const DEFAULT_N_CAP: usize = 1 << 20;
pub const TRIALS_FILE: &str = "trials.csv";
pub const SUMMARY_FILE: &str = "summary.json";
/// Overrides the output directory when the config does not set one.
pub const OUT_DIR_ENV: &str = "SAMPCOMP_OUT";

/// Rows evaluated per chunk during Monte-Carlo error estimation.
const MC_CHUNK: usize = 1024;

/// Per-sample squared deviations `(ĝ(x_j) − g(x_j))²` over fresh Gaussian inputs.
///
/// Inputs are drawn row-major from `rng`, so a longer run extends a shorter one
/// with the same seed.
pub fn squared_deviations(
    student: &StudentNet,
    teacher: &TeacherNet,
    n_mc: usize,
    rng: &mut RandomSource,
) -> Result<Vec<f64>> {
    let d = teacher.gamma().d;
    let mut out = Vec::with_capacity(n_mc);
    let mut remaining = n_mc;
    while remaining > 0 {
        let rows = remaining.min(MC_CHUNK);
        let xs = Matrix::gaussian(rows, d, 1.0, rng);
        let pred = student.predict(&xs)?;
        let truth = teacher.forward_batch(&xs)?;
        out.extend(pred.iter().zip(&truth).map(|(p, t)| (p - t) * (p - t)));
        remaining -= rows;
    }
    Ok(out)
}

/// Monte-Carlo estimate of `E[(ĝ(X) − g(X))²] / (2σ²)`.
pub fn estimate_error(
    student: &StudentNet,
    teacher: &TeacherNet,
    sigma: f64,
    n_mc: usize,
    rng: &mut RandomSource,
) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::InvalidInput("n_mc must be at least 1".into()));
    }
    let sq = squared_deviations(student, teacher, n_mc, rng)?;
    let sum: f64 = sq.iter().sum();
    Ok(sum / n_mc as f64 / (2.0 * sigma * sigma))
}

/// One row of `trials.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub sigma: f64,
    pub depth: usize,
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub error: f64,
    pub queries: u64,
    pub width: usize,
    pub flag: String,
}

impl TrialResult {
    pub fn gamma(&self) -> Gamma {
        Gamma {
            d: self.d,
            m: self.m,
            sigma: self.sigma,
        }
    }

    pub fn is_flagged(&self) -> bool {
        !self.flag.is_empty()
    }

    fn key(&self) -> TrialKey {
        TrialKey {
            cell: CellKey::new(&self.gamma(), self.depth, &self.scheme, self.n),
            trial: self.trial,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct CellKey {
    d: usize,
    m: usize,
    sigma_bits: u64,
    depth: usize,
    scheme: String,
    n: usize,
}

impl CellKey {
    fn new(gamma: &Gamma, depth: usize, scheme: &str, n: usize) -> Self {
        Self {
            d: gamma.d,
            m: gamma.m,
            sigma_bits: gamma.sigma.to_bits(),
            depth,
            scheme: scheme.to_string(),
            n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct TrialKey {
    cell: CellKey,
    trial: usize,
}

/// Content-addressed trial seed: depends on the master seed, `γ`, `N` and the
/// trial index only, so every width scheme sees the same teacher and data.
pub fn trial_seed(master: u64, gamma: &Gamma, n: usize, trial: usize) -> u64 {
    mix_seed(&[
        master,
        gamma.d as u64,
        gamma.m as u64,
        gamma.sigma.to_bits(),
        n as u64,
        trial as u64,
    ])
}

#[derive(Clone, Debug, Default)]
pub struct ExperimentSettings {
    pub train: TrainConfig,
    pub mc_samples: usize,
}

impl ExperimentSettings {
    pub fn new() -> Self {
        Self {
            train: TrainConfig::default(),
            mc_samples: DEFAULT_MC_SAMPLES,
        }
    }
}

/// Full output of one trial: the CSV row plus the search details behind it.
#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub result: TrialResult,
    pub teacher: TeacherNet,
    pub search: SearchOutcome,
}

pub fn run_trial_detailed(
    gamma: &Gamma,
    n: usize,
    depth: usize,
    scheme: WidthScheme,
    trial: usize,
    seed: u64,
    settings: &ExperimentSettings,
) -> Result<TrialOutcome> {
    let root = RandomSource::new(seed);
    let teacher = sample_teacher(*gamma, &mut root.child(0));
    let data = generate_dataset(&teacher, n, &mut root.child(1))?;
    let search = select_and_train(gamma, &data, depth, scheme, &root.child(2), &settings.train)?;

    let report = &search.best_report;
    let mut flags: Vec<&str> = report.flags.iter().map(TrainFlag::as_str).collect();
    flags.dedup();
    let error = if report.is_flagged(TrainFlag::Diverged) {
        f64::INFINITY
    } else {
        estimate_error(
            &report.best_params,
            &teacher,
            gamma.sigma,
            settings.mc_samples,
            &mut root.child(3),
        )?
    };
    let result = TrialResult {
        d: gamma.d,
        m: gamma.m,
        sigma: gamma.sigma,
        depth,
        scheme: scheme.label().to_string(),
        n,
        trial,
        seed,
        error,
        queries: search.total_queries,
        width: search.best_width,
        flag: flags.join(";"),
    };
    Ok(TrialOutcome {
        result,
        teacher,
        search,
    })
}

/// Samples a teacher and data, trains under `scheme`, and measures the error.
pub fn run_trial(
    gamma: &Gamma,
    n: usize,
    depth: usize,
    scheme: WidthScheme,
    trial: usize,
    seed: u64,
    settings: &ExperimentSettings,
) -> Result<TrialResult> {
    run_trial_detailed(gamma, n, depth, scheme, trial, seed, settings).map(|o| o.result)
}

/// Sweep configuration, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub d: Vec<usize>,
    #[serde(rename = "m")]
    pub m: Vec<usize>,
    pub sigma: Vec<f64>,
    #[serde(default = "default_depth")]
    pub depth: usize,
    #[serde(default = "default_scheme")]
    pub scheme: String,
    pub epsilon: Vec<f64>,
    pub trials: usize,
    #[serde(default = "default_n0")]
    pub n0: usize,
    #[serde(default = "default_n_cap")]
    pub n_cap: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub max_epochs: Option<usize>,
}

fn default_depth() -> usize {
    1
}
fn default_scheme() -> String {
    "tune".into()
}
fn default_n0() -> usize {
    DEFAULT_N0
}
fn default_n_cap() -> usize {
    DEFAULT_N_CAP
}
fn default_parallelism() -> usize {
    1
}
fn default_mc_samples() -> usize {
    DEFAULT_MC_SAMPLES
}

impl SweepConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.validate().map_err(|message| Error::Config {
            path: origin.to_path_buf(),
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, path)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.d.is_empty() || self.m.is_empty() || self.sigma.is_empty() {
            return Err("d, m and sigma lists must be non-empty".into());
        }
        if self.d.contains(&0) || self.m.contains(&0) {
            return Err("d and m entries must be positive".into());
        }
        if self.sigma.iter().any(|s| !(*s > 0.0)) {
            return Err("sigma entries must be positive".into());
        }
        if self.epsilon.is_empty() || self.epsilon.iter().any(|e| !(*e > 0.0)) {
            return Err("epsilon targets must be positive and non-empty".into());
        }
        if self.trials == 0 || self.parallelism == 0 || self.mc_samples == 0 {
            return Err("trials, parallelism and mc_samples must be >= 1".into());
        }
        if self.n0 < 2 || self.n_cap < self.n0 {
            return Err("need 2 <= n0 <= n_cap".into());
        }
        if !(1..=3).contains(&self.depth) {
            return Err("depth must be 1, 2 or 3".into());
        }
        let scheme: WidthScheme = self.scheme.parse().map_err(|e: Error| e.to_string())?;
        if matches!(scheme, WidthScheme::Best(w) if w > 0) {
            return Err("use scheme = \"best\"; the width is derived from tuned trials".into());
        }
        Ok(())
    }

    pub fn width_scheme(&self) -> WidthScheme {
        self.scheme.parse().expect("validated on load")
    }

    pub fn gammas(&self) -> Vec<Gamma> {
        let mut out = Vec::new();
        for &sigma in &self.sigma {
            for &d in &self.d {
                for &m in &self.m {
                    out.push(Gamma { d, m, sigma });
                }
            }
        }
        out
    }

    /// Flags beat config, config beats the environment.
    pub fn resolve_out_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = &self.out {
            return p.clone();
        }
        std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("results"))
    }

    pub fn settings(&self) -> ExperimentSettings {
        let mut s = ExperimentSettings::new();
        s.mc_samples = self.mc_samples;
        if let Some(e) = self.max_epochs {
            s.train.max_epochs = e;
        }
        s
    }
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<TrialResult>> {
    let path = path.as_ref();
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Appends rows, writing the header only when the file is new or empty.
pub fn append_results(path: impl AsRef<Path>, rows: &[TrialResult]) -> Result<()> {
    let path = path.as_ref();
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Trial-averaged statistics for one `(γ, depth, scheme, N)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub sigma: f64,
    pub depth: usize,
    pub scheme: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub trials: usize,
    pub mean_error: f64,
    pub mean_queries: f64,
    pub flagged: usize,
}

/// `N_ε` for one configuration and target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleComplexity {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub sigma: f64,
    pub depth: usize,
    pub scheme: String,
    pub epsilon: f64,
    /// Smallest tested `N` whose mean error is at most `epsilon`.
    pub n_eps: Option<usize>,
    /// Largest tested `N` below `n_eps` whose mean error is above `epsilon`.
    pub n_below: Option<usize>,
    /// Largest `N` tested for this configuration.
    pub max_tested: usize,
}

impl SampleComplexity {
    pub fn reached(&self) -> bool {
        self.n_eps.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub cells: Vec<CellSummary>,
    pub sample_complexity: Vec<SampleComplexity>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub summary: SweepSummary,
    pub trials: Vec<TrialResult>,
    pub out_dir: PathBuf,
}

/// Aggregates trial rows into cell means and `N_ε` for each target.
pub fn summarize(rows: &[TrialResult], epsilons: &[f64]) -> SweepSummary {
    let mut groups: BTreeMap<CellKey, Vec<&TrialResult>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.key().cell).or_default().push(r);
    }
    let cells: Vec<CellSummary> = groups
        .iter()
        .map(|(k, rs)| {
            let count = rs.len() as f64;
            CellSummary {
                d: k.d,
                m: k.m,
                sigma: f64::from_bits(k.sigma_bits),
                depth: k.depth,
                scheme: k.scheme.clone(),
                n: k.n,
                trials: rs.len(),
                mean_error: rs.iter().map(|r| r.error).sum::<f64>() / count,
                mean_queries: rs.iter().map(|r| r.queries as f64).sum::<f64>() / count,
                flagged: rs.iter().filter(|r| r.is_flagged()).count(),
            }
        })
        .collect();

    // cells are sorted by key, so N ascends within each configuration
    let mut by_config: BTreeMap<(usize, usize, u64, usize, String), Vec<&CellSummary>> = BTreeMap::new();
    for c in &cells {
        by_config
            .entry((c.d, c.m, c.sigma.to_bits(), c.depth, c.scheme.clone()))
            .or_default()
            .push(c);
    }
    let mut sample_complexity = Vec::new();
    for ((d, m, sigma_bits, depth, scheme), cs) in &by_config {
        for &eps in epsilons {
            let n_eps = cs.iter().find(|c| c.mean_error <= eps).map(|c| c.n);
            let n_below = cs
                .iter()
                .filter(|c| n_eps.map_or(true, |n| c.n < n) && c.mean_error > eps)
                .map(|c| c.n)
                .max();
            sample_complexity.push(SampleComplexity {
                d: *d,
                m: *m,
                sigma: f64::from_bits(*sigma_bits),
                depth: *depth,
                scheme: scheme.clone(),
                epsilon: eps,
                n_eps,
                n_below,
                max_tested: cs.last().map_or(0, |c| c.n),
            });
        }
    }
    SweepSummary {
        cells,
        sample_complexity,
    }
}

fn run_cell(
    pool: Option<&rayon::ThreadPool>,
    gamma: &Gamma,
    n: usize,
    depth: usize,
    scheme: WidthScheme,
    trials: &[usize],
    master_seed: u64,
    settings: &ExperimentSettings,
) -> Result<Vec<TrialResult>> {
    let job = |&t: &usize| {
        let seed = trial_seed(master_seed, gamma, n, t);
        run_trial(gamma, n, depth, scheme, t, seed, settings)
    };
    let mut rows: Vec<TrialResult> = match pool {
        Some(p) => p.install(|| trials.par_iter().map(job).collect::<Result<_>>())?,
        None => trials.iter().map(job).collect::<Result<_>>()?,
    };
    rows.sort_by_key(|r| r.trial);
    Ok(rows)
}

/// For each `γ`, doubles `N` from `n0` until
/// the mean error reaches the smallest target or `N` reaches `n_cap`.
pub fn run_sweep(config: &SweepConfig, out_dir: &Path) -> Result<SweepResult> {
    std::fs::create_dir_all(out_dir)?;
    let trials_path = out_dir.join(TRIALS_FILE);
    let mut all = read_results(&trials_path)?;
    let mut done: HashSet<TrialKey> = all.iter().map(TrialResult::key).collect();

    let settings = config.settings();
    let scheme = config.width_scheme();
    let target = config.epsilon.iter().copied().fold(f64::INFINITY, f64::min);
    let pool = if config.parallelism > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(config.parallelism)
                .build()
                .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?,
        )
    } else {
        None
    };

    let mut fill = |gamma: &Gamma, n: usize, scheme: WidthScheme, all: &mut Vec<TrialResult>| -> Result<Vec<TrialResult>> {
        let label = scheme.label();
        let missing: Vec<usize> = (0..config.trials)
            .filter(|&t| {
                !done.contains(&TrialKey {
                    cell: CellKey::new(gamma, config.depth, label, n),
                    trial: t,
                })
            })
            .collect();
        if !missing.is_empty() {
            info!(
                "d={} M={} sigma={} N={} scheme={}: running {} trial(s)",
                gamma.d, gamma.m, gamma.sigma, n, label, missing.len()
            );
            let rows = run_cell(pool.as_ref(), gamma, n, config.depth, scheme, &missing, config.seed, &settings)?;
            append_results(&trials_path, &rows)?;
            done.extend(rows.iter().map(TrialResult::key));
            all.extend(rows);
        }
        Ok(all
            .iter()
            .filter(|r| r.key().cell == CellKey::new(gamma, config.depth, label, n) && r.trial < config.trials)
            .cloned()
            .collect())
    };

    for gamma in config.gammas() {
        let mut n = config.n0;
        loop {
            let effective = match scheme {
                WidthScheme::Best(_) => {
                    let tuned = fill(&gamma, n, WidthScheme::Tune, &mut all)?;
                    let widths: Vec<usize> = tuned.iter().map(|r| r.width).collect();
                    WidthScheme::Best(median_width(&widths).expect("trials >= 1"))
                }
                s => s,
            };
            let rows = fill(&gamma, n, effective, &mut all)?;
            let mean = rows.iter().map(|r| r.error).sum::<f64>() / rows.len() as f64;
            info!("d={} M={} sigma={} N={}: mean error {mean:.4}", gamma.d, gamma.m, gamma.sigma, n);
            if mean <= target || n >= config.n_cap {
                break;
            }
            n = (2 * n).min(config.n_cap);
        }
    }

    let wanted: HashSet<(usize, usize, u64)> = config
        .gammas()
        .iter()
        .map(|g| (g.d, g.m, g.sigma.to_bits()))
        .collect();
    let trials: Vec<TrialResult> = all
        .into_iter()
        .filter(|r| {
            r.depth == config.depth
                && r.trial < config.trials
                && wanted.contains(&(r.d, r.m, r.sigma.to_bits()))
        })
        .collect();
    let summary = summarize(&trials, &config.epsilon);
    let file = std::io::BufWriter::new(std::fs::File::create(out_dir.join(SUMMARY_FILE))?);
    serde_json::to_writer_pretty(file, &summary)?;
    Ok(SweepResult {
        summary,
        trials,
        out_dir: out_dir.to_path_buf(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(d: usize, n: usize, trial: usize, error: f64) -> TrialResult {
        TrialResult {
            d,
            m: 1,
            sigma: 0.1,
            depth: 1,
            scheme: "tune".into(),
            n,
            trial,
            seed: 0,
            error,
            queries: 100 * n as u64,
            width: 4,
            flag: String::new(),
        }
    }

    #[test]
    fn identical_student_has_zero_error() {
        let g = sample_teacher(Gamma::new(6, 5, 0.1).unwrap(), &mut RandomSource::new(1));
        let s = StudentNet::from_teacher(&g);
        let e = estimate_error(&s, &g, 0.1, 4096, &mut RandomSource::new(2)).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn longer_run_extends_shorter_one() {
        let g = sample_teacher(Gamma::new(3, 4, 0.2).unwrap(), &mut RandomSource::new(3));
        let s = StudentNet::init(3, 1, 5, &mut RandomSource::new(4)).unwrap();
        let short = squared_deviations(&s, &g, 1500, &mut RandomSource::new(5)).unwrap();
        let long = squared_deviations(&s, &g, 3000, &mut RandomSource::new(5)).unwrap();
        assert_eq!(&long[..1500], &short[..]);
        let partial: f64 = long[..1500].iter().sum();
        let e = estimate_error(&s, &g, 0.2, 1500, &mut RandomSource::new(5)).unwrap();
        assert_eq!(partial / 1500.0 / (2.0 * 0.2 * 0.2), e);
    }

    #[test]
    fn summary_means_and_sample_complexity() {
        let rows = vec![
            row(1, 16, 0, 3.0),
            row(1, 16, 1, 2.0),
            row(1, 32, 0, 1.5),
            row(1, 32, 1, 0.4),
            row(1, 64, 0, 0.2),
            row(1, 64, 1, 0.2),
            row(2, 16, 0, 9.0),
        ];
        let s = summarize(&rows, &[1.0, 0.5, 0.1]);
        assert_eq!(s.cells.len(), 4);
        assert_eq!(s.cells[0].mean_error, 2.5);
        assert_eq!(s.cells[1].mean_error, (1.5 + 0.4) / 2.0);
        let nc: Vec<Option<usize>> = s.sample_complexity.iter().map(|c| c.n_eps).collect();
        assert_eq!(nc, vec![Some(32), Some(64), None, None, None, None]);
        assert_eq!(s.sample_complexity[0].n_below, Some(16));
        assert_eq!(s.sample_complexity[2].max_tested, 64);
    }

    #[test]
    fn results_file_round_trip_and_append() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(TRIALS_FILE);
        append_results(&path, &[row(1, 16, 0, 0.5)]).unwrap();
        let mut inf_row = row(1, 16, 1, f64::INFINITY);
        inf_row.flag = "diverged".into();
        append_results(&path, &[inf_row.clone()]).unwrap();
        let back = read_results(&path).unwrap();
        assert_eq!(back, vec![row(1, 16, 0, 0.5), inf_row]);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "d,M,sigma,depth,scheme,N,trial,seed,error,queries,width,flag"
        );
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn config_parsing_and_validation() {
        let text = r#"
            d = [1, 2]
            m = [1]
            sigma = [0.1]
            epsilon = [1.0, 0.5]
            trials = 4
            seed = 7
        "#;
        let cfg = SweepConfig::from_toml_str(text, Path::new("inline")).unwrap();
        assert_eq!(cfg.n0, DEFAULT_N0);
        assert_eq!(cfg.n_cap, DEFAULT_N_CAP);
        assert_eq!(cfg.width_scheme(), WidthScheme::Tune);
        assert_eq!(cfg.gammas().len(), 2);

        let bad = text.replace("trials = 4", "trials = 0");
        assert!(matches!(
            SweepConfig::from_toml_str(&bad, Path::new("inline")),
            Err(Error::Config { .. })
        ));
        let unknown = format!("{text}\nbogus = 1\n");
        assert!(SweepConfig::from_toml_str(&unknown, Path::new("inline")).is_err());
    }

    #[test]
    fn out_dir_precedence() {
        let mut cfg = SweepConfig::from_toml_str(
            "d=[1]\nm=[1]\nsigma=[0.1]\nepsilon=[1.0]\ntrials=1\nout='from-config'",
            Path::new("inline"),
        )
        .unwrap();
        assert_eq!(cfg.resolve_out_dir(Some(Path::new("flag"))), PathBuf::from("flag"));
        assert_eq!(cfg.resolve_out_dir(None), PathBuf::from("from-config"));
        cfg.out = None;
        // falls through to the environment or the default
        let resolved = cfg.resolve_out_dir(None);
        match std::env::var_os(OUT_DIR_ENV) {
            Some(v) => assert_eq!(resolved, PathBuf::from(v)),
            None => assert_eq!(resolved, PathBuf::from("results")),
        }
    }

    #[test]
    fn trial_seeds_are_content_addressed() {
        let g = Gamma::new(2, 3, 0.1).unwrap();
        assert_eq!(trial_seed(1, &g, 16, 0), trial_seed(1, &g, 16, 0));
        assert_ne!(trial_seed(1, &g, 16, 0), trial_seed(1, &g, 16, 1));
        assert_ne!(trial_seed(1, &g, 16, 0), trial_seed(1, &g, 32, 0));
        assert_ne!(trial_seed(1, &g, 16, 0), trial_seed(2, &g, 16, 0));
    }
}
