//! A small resumable sweep. Run it twice: the second run finds every cell done.
//!
//! cargo run --release --example desk_sweep -- [out_dir]

use std::path::PathBuf;

use sampcomp::experiment::run_sweep;
use sampcomp::report::sample_complexity_table;
use sampcomp::SweepConfig;

const CONFIG: &str = r#"
d = [1, 2]
m = [1, 2]
sigma = [0.1]
depth = 1
scheme = "tune"
epsilon = [1.0, 2.0]
trials = 4
n0 = 16
n_cap = 1024
seed = 3
"#;

fn main() -> sampcomp::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("sampcomp_desk_sweep"));
    let config = SweepConfig::from_toml_str(CONFIG, &PathBuf::from("<inline>"))?;
    let res = run_sweep(&config, &out)?;
    print!("{}", sample_complexity_table(&res.summary.sample_complexity));
    println!("{} trial rows in {}", res.trials.len(), out.display());
    Ok(())
}
