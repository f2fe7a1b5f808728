//! Build the sweep figures from a results file and write them as SVG.
//!
//! cargo run --release --example report_figures -- <trials.csv> [out_dir]
//!
//! Without arguments a tiny synthetic results set is used.

use std::path::PathBuf;

use sampcomp::experiment::{read_results, TrialResult};
use sampcomp::report::{fit_reference, render_loglog, sweep_figure, Figure};

fn synthetic() -> Vec<TrialResult> {
    let mut rows = Vec::new();
    for (d, m) in [(1, 1), (2, 2), (4, 4)] {
        for k in 0..4 {
            let n = 16usize << k;
            for trial in 0..3 {
                rows.push(TrialResult {
                    d,
                    m,
                    sigma: 0.1,
                    depth: 1,
                    scheme: "tune".into(),
                    n,
                    trial,
                    seed: 0,
                    error: 2.0 * (d * m) as f64 / n as f64 * (1.0 + 0.1 * trial as f64),
                    queries: 2000 * n as u64,
                    width: 4 * m,
                    flag: String::new(),
                });
            }
        }
    }
    rows
}

fn main() -> sampcomp::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let rows = match args.first() {
        Some(p) => read_results(p)?,
        None => synthetic(),
    };
    let out = args
        .get(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("sampcomp_figures"));
    std::fs::create_dir_all(&out)?;

    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.queries as f64)).collect();
    let fit = fit_reference(&pts)?;
    println!("T ~ {:.0} N (free slope {:.3}, R^2 {:.3})", fit.unit_c, fit.slope, fit.r_squared);

    for fig in [Figure::Samples, Figure::Epsilon, Figure::Queries, Figure::PerM, Figure::PerD] {
        let spec = sweep_figure(fig, &rows, &[0.5, 1.0])?;
        let path = out.join(format!("{}.svg", fig.name()));
        render_loglog(&spec, &path)?;
        println!("{:8} {} points -> {}", fig.name(), spec.point_count(), path.display());
    }
    Ok(())
}
