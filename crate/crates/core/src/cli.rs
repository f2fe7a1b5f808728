//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::experiment::{
    run_sweep, run_trial, read_results, trial_seed, ExperimentSettings, SweepConfig, TrialResult,
};
use crate::lambda::lambda_sweep;
use crate::numeric::RandomSource;
use crate::optim::lr_find;
use crate::report::{
    lambda_figure, read_lambda_samples, render_loglog, sample_complexity_table, sweep_figure, Figure,
};
use crate::experiment::summarize;
use crate::selftest::run_selftest;
use crate::student::StudentNet;
use crate::teacher::{generate_dataset, sample_teacher, Gamma};
use crate::trainer::{split_dataset, BATCH_SIZE};
use crate::width::WidthScheme;

#[derive(Parser, Debug)]
#[command(name = "sampcomp", version, about = "Teacher-student sample-complexity benchmark")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per cell.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output directory (or file, for `report`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for trials.
    #[arg(long, global = true)]
    parallelism: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a sample-complexity sweep from a TOML config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one trial and print its results row.
    Trial(TrialArgs),
    /// Sample λ for d = 2M over a list of M.
    Lambda {
        #[arg(long = "m-list", value_delimiter = ',', default_value = "2,4,8,16,32")]
        m_list: Vec<usize>,
    },
    /// Dump a learning-rate finder trace for a fresh student.
    Lrfind(LrfindArgs),
    /// Render a figure and the N_ε table from a results file.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// samples, epsilon, queries, per-m, per-d or lambda.
        #[arg(long, default_value = "samples")]
        fig: String,
        #[arg(long, value_delimiter = ',', default_value = "1.0")]
        eps: Vec<f64>,
        /// Keep only rows with this scheme label.
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Run the built-in gradient, optimizer and golden-section checks.
    Selftest,
}

#[derive(Args, Debug)]
struct TrialArgs {
    #[arg(long)]
    d: usize,
    #[arg(long = "m")]
    m: usize,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long = "n")]
    n: usize,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// same, four_m, tune or best:WIDTH.
    #[arg(long, default_value = "tune")]
    scheme: String,
    #[arg(long, default_value_t = 0)]
    trial: usize,
}

#[derive(Args, Debug)]
struct LrfindArgs {
    #[arg(long)]
    d: usize,
    #[arg(long = "m")]
    m: usize,
    #[arg(long, default_value_t = 0.1)]
    sigma: f64,
    #[arg(long = "n")]
    n: usize,
    #[arg(long, default_value_t = 1)]
    depth: usize,
    #[arg(long)]
    width: usize,
}

/// Parses `args` (including the program name) and runs the command. Returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    match cli.command {
        Command::Sweep { config } => {
            let mut cfg = SweepConfig::load(&config).map_err(|e| match e {
                Error::Io(io) => Error::Config {
                    path: config.clone(),
                    message: io.to_string(),
                },
                other => other,
            })?;
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            if let Some(t) = g.trials {
                cfg.trials = t;
            }
            if let Some(p) = g.parallelism {
                cfg.parallelism = p.max(1);
            }
            let out = cfg.resolve_out_dir(g.out.as_deref());
            let res = run_sweep(&cfg, &out)?;
            print!("{}", sample_complexity_table(&res.summary.sample_complexity));
            println!("results in {}", out.display());
        }
        Command::Trial(a) => {
            let gamma = Gamma::new(a.d, a.m, a.sigma)?;
            let scheme: WidthScheme = a.scheme.parse()?;
            if scheme == WidthScheme::Best(0) {
                return Err(Error::InvalidInput("give the width as best:WIDTH".into()));
            }
            let seed = trial_seed(g.seed.unwrap_or(0), &gamma, a.n, a.trial);
            let row = run_trial(&gamma, a.n, a.depth, scheme, a.trial, seed, &ExperimentSettings::new())?;
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.serialize(&row)?;
            w.flush()?;
            if let Some(dir) = g.out {
                std::fs::create_dir_all(&dir)?;
                crate::experiment::append_results(dir.join(crate::experiment::TRIALS_FILE), &[row])?;
            }
        }
        Command::Lambda { m_list } => {
            let trials = g.trials.unwrap_or(1000);
            let sweep = lambda_sweep(&m_list, trials, &RandomSource::new(g.seed.unwrap_or(0)))?;
            let out = g.out.unwrap_or_else(|| PathBuf::from("results"));
            std::fs::create_dir_all(&out)?;
            sweep.write_samples_csv(out.join("lambda.csv"))?;
            sweep.write_summary_csv(out.join("lambda_summary.csv"))?;
            println!("M\td\tmedian_log10\tq05\tq95\toverflowed");
            for r in &sweep.rows {
                println!(
                    "{}\t{}\t{:.4}\t{:.4}\t{:.4}\t{}",
                    r.m, r.d, r.median_log10, r.q05_log10, r.q95_log10, r.overflowed
                );
            }
        }
        Command::Lrfind(a) => {
            let gamma = Gamma::new(a.d, a.m, a.sigma)?;
            let root = RandomSource::new(g.seed.unwrap_or(0));
            let teacher = sample_teacher(gamma, &mut root.child(0));
            let data = generate_dataset(&teacher, a.n, &mut root.child(1))?;
            let (train, _) = split_dataset(&data, &mut root.child(2))?;
            let net = StudentNet::init(a.d, a.depth, a.width, &mut root.child(3))?;
            let res = lr_find(&net, &train, BATCH_SIZE, &mut root.child(4), &Default::default())?;
            let path = g.out.unwrap_or_else(|| PathBuf::from("lrfind.csv"));
            res.write_csv(&path)?;
            println!(
                "steep {:.3e}  minimum {:.3e}  valley {:.3e}  chosen {:.3e}{}",
                res.lr_steep,
                res.lr_minimum,
                res.lr_valley,
                res.chosen,
                if res.fallback { "  (fallback)" } else { "" }
            );
            println!("{} steps, {} queries, trace in {}", res.steps, res.queries, path.display());
        }
        Command::Report {
            input,
            fig,
            eps,
            scheme,
            depth,
        } => {
            let fig: Figure = fig.parse()?;
            let spec = if fig == Figure::Lambda {
                lambda_figure(&read_lambda_samples(&input)?)?
            } else {
                let rows = filtered_rows(&input, scheme.as_deref(), depth)?;
                print!("{}", sample_complexity_table(&summarize(&rows, &eps).sample_complexity));
                sweep_figure(fig, &rows, &eps)?
            };
            let path = g.out.unwrap_or_else(|| default_figure_path(&input, fig));
            render_loglog(&spec, &path)?;
            println!("wrote {}", path.display());
        }
        Command::Selftest => {
            let results = run_selftest();
            for c in &results {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if results.iter().any(|c| !c.passed) {
                return Err(Error::InvalidInput("self-test failed".into()));
            }
        }
    }
    Ok(())
}

fn filtered_rows(input: &Path, scheme: Option<&str>, depth: Option<usize>) -> Result<Vec<TrialResult>> {
    let rows = read_results(input)?;
    if rows.is_empty() {
        return Err(Error::InvalidInput(format!("{} has no trial rows", input.display())));
    }
    Ok(rows
        .into_iter()
        .filter(|r| scheme.map_or(true, |s| r.scheme == s) && depth.map_or(true, |d| r.depth == d))
        .collect())
}

fn default_figure_path(input: &Path, fig: Figure) -> PathBuf {
    input
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(format!("{}.svg", fig.name()))
}
