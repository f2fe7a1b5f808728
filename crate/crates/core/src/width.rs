//! Choosing the student width: golden-section search on `log2(width)` plus the
//! fixed schemes used for ablations.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::RandomSource;
use crate::teacher::{Dataset, Gamma};
use crate::trainer::{train, TrainConfig, TrainFlag, TrainReport};

pub const MIN_WIDTH: usize = 2;
pub const LOG2_TOLERANCE: f64 = 0.25;

/// `1/φ`
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WidthScheme {
    /// Student width equals the teacher width `M`.
    Same,
    /// `4·M`.
    FourM,
    /// Golden-section search over `[2, max_width]`.
    Tune,
    /// A precomputed width, normally the median of earlier tuned widths.
    Best(usize),
}

impl WidthScheme {
    pub fn label(&self) -> &'static str {
        match self {
            WidthScheme::Same => "same",
            WidthScheme::FourM => "four_m",
            WidthScheme::Tune => "tune",
            WidthScheme::Best(_) => "best",
        }
    }
}

impl fmt::Display for WidthScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Parses `same`, `four_m` (or `4m`), `tune`, or `best` / `best:<width>`.
/// A bare `best` parses to `Best(0)`, a placeholder resolved by the sweep.
impl FromStr for WidthScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "same" => Ok(WidthScheme::Same),
            "four_m" | "4m" => Ok(WidthScheme::FourM),
            "tune" => Ok(WidthScheme::Tune),
            "best" => Ok(WidthScheme::Best(0)),
            other => match other.strip_prefix("best:") {
                Some(w) => w
                    .parse()
                    .map(WidthScheme::Best)
                    .map_err(|_| Error::InvalidInput(format!("bad width in scheme {s:?}"))),
                None => Err(Error::InvalidInput(format!("unknown width scheme {s:?}"))),
            },
        }
    }
}

/// Largest width the search may try, by hidden-layer count.
pub fn max_width(n: usize, d: usize, m: usize, depth: usize) -> usize {
    let (n, d, m) = (n as f64, d as f64, m as f64);
    let arch = (d * m).sqrt() + d.max(m);
    let w = match depth {
        1 => 32.0 + 8.0 * n.max(arch),
        2 => 32.0 + 2.0 * (2.0 * n.sqrt()).max(2.0 * arch),
        _ => 16.0 + 2.0 * (2.0 * n.sqrt()).max(2.0 * arch),
    };
    w.floor() as usize
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoldenSearch {
    pub best_x: f64,
    pub best_value: f64,
    /// Every evaluation in call order.
    pub evaluations: Vec<(f64, f64)>,
}

/// Golden-section minimization of `f` on `[lo, hi]` until the bracket is at most `tol` wide.
///
/// Returns the best point actually evaluated.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> GoldenSearch {
    let mut evaluations = Vec::new();
    let mut eval = |x: f64, evals: &mut Vec<(f64, f64)>| {
        let v = f(x);
        evals.push((x, v));
        v
    };
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c, &mut evaluations);
    let mut fd = eval(d, &mut evaluations);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            if b - a <= tol {
                break;
            }
            fc = eval(c, &mut evaluations);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            if b - a <= tol {
                break;
            }
            fd = eval(d, &mut evaluations);
        }
    }
    let &(best_x, best_value) = evaluations
        .iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .expect("at least two evaluations");
    GoldenSearch {
        best_x,
        best_value,
        evaluations,
    }
}

/// Integer width for a probe at `u = log2(width)`.
pub fn probe_width(u: f64, max_width: usize) -> usize {
    (2f64.powf(u).round() as usize).clamp(MIN_WIDTH, max_width.max(MIN_WIDTH))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WidthSearch {
    pub best_width: usize,
    pub best_value: f64,
    /// Distinct widths in the order they were first evaluated.
    pub evaluations: Vec<(usize, f64)>,
}

/// Golden-section search over `u = log2(width) ∈ [lo, hi]`.
///
/// Probes are rounded to integer widths in `[2, max_width]`; a width is
/// evaluated at most once.
pub fn golden_section_log2<F: FnMut(usize) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: f64,
    max_width: usize,
) -> WidthSearch {
    let mut cache: BTreeMap<usize, f64> = BTreeMap::new();
    let mut order = Vec::new();
    golden_section(
        |u| {
            let w = probe_width(u, max_width);
            *cache.entry(w).or_insert_with(|| {
                let v = f(w);
                order.push((w, v));
                v
            })
        },
        lo,
        hi,
        tol,
    );
    let &(best_width, best_value) = order
        .iter()
        .min_by(|p, q| p.1.total_cmp(&q.1).then(p.0.cmp(&q.0)))
        .expect("search evaluates at least one width");
    WidthSearch {
        best_width,
        best_value,
        evaluations: order,
    }
}

/// Search over `[2, max_width]` (in log2 space) or a fixed width, depending on the scheme.
pub fn search_widths<F: FnMut(usize) -> f64>(
    scheme: WidthScheme,
    teacher_width: usize,
    max_width: usize,
    mut f: F,
) -> Result<WidthSearch> {
    let fixed = match scheme {
        WidthScheme::Same => teacher_width,
        WidthScheme::FourM => 4 * teacher_width,
        WidthScheme::Best(0) => {
            return Err(Error::InvalidInput(
                "best scheme needs a resolved width".into(),
            ))
        }
        WidthScheme::Best(w) => w,
        WidthScheme::Tune => {
            let hi = (max_width.max(MIN_WIDTH) as f64).log2();
            let lo = (MIN_WIDTH as f64).log2();
            if hi <= lo {
                let v = f(MIN_WIDTH);
                return Ok(WidthSearch {
                    best_width: MIN_WIDTH,
                    best_value: v,
                    evaluations: vec![(MIN_WIDTH, v)],
                });
            }
            return Ok(golden_section_log2(f, lo, hi, LOG2_TOLERANCE, max_width));
        }
    };
    let v = f(fixed);
    Ok(WidthSearch {
        best_width: fixed,
        best_value: v,
        evaluations: vec![(fixed, v)],
    })
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub best_width: usize,
    pub best_report: TrainReport,
    /// `(width, selection loss)` per trained width, in evaluation order.
    pub evaluations: Vec<(usize, f64)>,
    /// `(width, queries)` per trained width, ascending by width.
    pub queries_per_width: Vec<(usize, u64)>,
    pub total_queries: u64,
}

/// Loss used to rank a width: the best validation loss, or `+∞` if the run diverged.
pub fn selection_loss(report: &TrainReport) -> f64 {
    if report.is_flagged(TrainFlag::Diverged) {
        f64::INFINITY
    } else {
        report.best_val_loss
    }
}

/// Picks a width by `scheme` and returns the winning training run.
///
/// Each width trains with its own stream `rng.child(width)`.
pub fn select_and_train(
    gamma: &Gamma,
    data: &Dataset,
    depth: usize,
    scheme: WidthScheme,
    rng: &RandomSource,
    config: &TrainConfig,
) -> Result<SearchOutcome> {
    let cap = max_width(data.len(), gamma.d, gamma.m, depth);
    let mut reports: BTreeMap<usize, TrainReport> = BTreeMap::new();
    let mut failure = None;
    let search = search_widths(scheme, gamma.m, cap, |w| {
        if failure.is_some() {
            return f64::INFINITY;
        }
        match train(data, depth, w, &rng.child(w as u64), config) {
            Ok(report) => {
                let v = selection_loss(&report);
                reports.insert(w, report);
                v
            }
            Err(e) => {
                failure = Some(e);
                f64::INFINITY
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let queries_per_width: Vec<(usize, u64)> = reports.iter().map(|(&w, r)| (w, r.queries)).collect();
    let total_queries = queries_per_width.iter().map(|q| q.1).sum();
    let best_report = reports
        .remove(&search.best_width)
        .expect("best width was trained");
    Ok(SearchOutcome {
        best_width: search.best_width,
        best_report,
        evaluations: search.evaluations,
        queries_per_width,
        total_queries,
    })
}

/// Median of tuned widths, rounding the midpoint of an even count to nearest.
pub fn median_width(widths: &[usize]) -> Option<usize> {
    if widths.is_empty() {
        return None;
    }
    let mut w = widths.to_vec();
    w.sort_unstable();
    let n = w.len();
    Some(if n % 2 == 1 {
        w[n / 2]
    } else {
        ((w[n / 2 - 1] + w[n / 2]) as f64 / 2.0).round() as usize
    })
}
