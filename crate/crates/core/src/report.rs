//! Reference-line fits and SVG scatter plots built from results files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiment::{summarize, SampleComplexity, TrialResult};
use crate::lambda::quantile;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ys` on `xs`.
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<Regression> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!("{} x values but {} y values", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all x values are equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Regression {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceFit {
    /// Free fit of `log10 y = slope·log10 x + intercept`.
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `c` in the unit-slope fit `y = c·x`, i.e. the geometric mean of `y/x`.
    pub unit_c: f64,
}

pub fn fit_reference(points: &[(f64, f64)]) -> Result<ReferenceFit> {
    if points.len() < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::Fit("points must be positive and finite".into()));
    }
    let lx: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let reg = linear_regression(&lx, &ly)?;
    // sort the residuals so the mean does not depend on input order
    let mut resid: Vec<f64> = lx.iter().zip(&ly).map(|(x, y)| y - x).collect();
    resid.sort_by(f64::total_cmp);
    let log_c = resid.iter().sum::<f64>() / resid.len() as f64;
    Ok(ReferenceFit {
        slope: reg.slope,
        intercept: reg.intercept,
        r_squared: reg.r_squared,
        unit_c: 10f64.powf(log_c),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn map(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.log10(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// Optional `(low, high)` vertical bar per point.
    pub error_bars: Vec<Option<(f64, f64)>>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        let error_bars = vec![None; points.len()];
        Self {
            label: label.into(),
            points,
            error_bars,
        }
    }
}

/// A straight line in the transformed plot coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceLine {
    pub slope: f64,
    pub intercept: f64,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
    pub reference: Option<ReferenceLine>,
    pub equal_aspect: bool,
}

impl PlotSpec {
    pub fn loglog(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            x_scale: Scale::Log,
            y_scale: Scale::Log,
            series: Vec::new(),
            reference: None,
            equal_aspect: true,
        }
    }

    pub fn point_count(&self) -> usize {
        self.series.iter().map(|s| s.points.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.point_count() == 0 {
            return Err(Error::Plot("nothing to plot".into()));
        }
        for s in &self.series {
            if s.error_bars.len() != s.points.len() {
                return Err(Error::Plot(format!("series {:?}: error bar count mismatch", s.label)));
            }
            let bar_values = s.error_bars.iter().flatten().flat_map(|&(lo, hi)| [lo, hi]);
            for y in s.points.iter().map(|p| p.1).chain(bar_values) {
                check_value(y, self.y_scale, &s.label)?;
            }
            for &(x, _) in &s.points {
                check_value(x, self.x_scale, &s.label)?;
            }
        }
        Ok(())
    }
}

fn check_value(v: f64, scale: Scale, label: &str) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::Plot(format!("series {label:?}: non-finite value")));
    }
    if scale == Scale::Log && v <= 0.0 {
        return Err(Error::Plot(format!("series {label:?}: nonpositive value {v} on a log axis")));
    }
    Ok(())
}

const CANVAS_W: f64 = 720.0;
const CANVAS_H: f64 = 640.0;
const LEFT: f64 = 80.0;
const TOP: f64 = 50.0;
const PLOT: f64 = 500.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

#[derive(Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn span(&self) -> f64 {
        self.hi - self.lo
    }

    fn padded(lo: f64, hi: f64) -> Range {
        let span = hi - lo;
        let pad = if span > 0.0 { 0.06 * span } else { 0.5 };
        Range {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn widen_to(&self, span: f64) -> Range {
        let extra = (span - self.span()) / 2.0;
        Range {
            lo: self.lo - extra,
            hi: self.hi + extra,
        }
    }
}

fn ticks(r: Range, scale: Scale) -> Vec<f64> {
    let step = match scale {
        Scale::Log => (r.span() / 8.0).ceil().max(1.0),
        Scale::Linear => {
            let raw = r.span() / 6.0;
            let mag = 10f64.powf(raw.log10().floor());
            let unit = raw / mag;
            mag * if unit < 1.5 {
                1.0
            } else if unit < 3.5 {
                2.0
            } else if unit < 7.5 {
                5.0
            } else {
                10.0
            }
        }
    };
    let first = (r.lo / step).ceil() as i64;
    let last = (r.hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64, scale: Scale) -> String {
    match scale {
        Scale::Log => format!("1e{}", v.round() as i64),
        Scale::Linear => {
            let s = format!("{v:.3}");
            let s = s.trim_end_matches('0').trim_end_matches('.');
            if s == "-0" { "0".into() } else { s.to_string() }
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the plot as a standalone SVG string. Output depends only on `spec`.
pub fn render_svg(spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in &spec.series {
        for (i, &(x, y)) in s.points.iter().enumerate() {
            xs.push(spec.x_scale.map(x));
            ys.push(spec.y_scale.map(y));
            if let Some((lo, hi)) = s.error_bars[i] {
                ys.push(spec.y_scale.map(lo));
                ys.push(spec.y_scale.map(hi));
            }
        }
    }
    let fold = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Range::padded(lo, hi)
    };
    let mut xr = fold(&xs);
    let mut yr = fold(&ys);
    if spec.equal_aspect {
        let span = xr.span().max(yr.span());
        xr = xr.widen_to(span);
        yr = yr.widen_to(span);
    }
    let px = |x: f64| LEFT + (x - xr.lo) / xr.span() * PLOT;
    let py = |y: f64| TOP + PLOT - (y - yr.lo) / yr.span() * PLOT;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_W}" height="{CANVAS_H}" viewBox="0 0 {CANVAS_W} {CANVAS_H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{CANVAS_W}" height="{CANVAS_H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="28" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + PLOT / 2.0,
        escape(&spec.title)
    );
    let _ = writeln!(
        out,
        r#"<path d="M{LEFT:.2},{TOP:.2}V{:.2}H{:.2}" fill="none" stroke="black"/>"#,
        TOP + PLOT,
        LEFT + PLOT
    );

    let mut grid = String::new();
    for t in ticks(xr, spec.x_scale) {
        let x = px(t);
        let _ = write!(grid, "M{x:.2},{:.2}V{:.2}", TOP + PLOT, TOP + PLOT + 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + PLOT + 20.0,
            tick_label(t, spec.x_scale)
        );
    }
    for t in ticks(yr, spec.y_scale) {
        let y = py(t);
        let _ = write!(grid, "M{:.2},{y:.2}H{LEFT:.2}", LEFT - 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t, spec.y_scale)
        );
    }
    let _ = writeln!(out, r#"<path d="{grid}" stroke="black"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + PLOT / 2.0,
        TOP + PLOT + 42.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="22" y="{:.2}" text-anchor="middle" transform="rotate(-90 22 {:.2})">{}</text>"#,
        TOP + PLOT / 2.0,
        TOP + PLOT / 2.0,
        escape(&spec.y_label)
    );

    let _ = writeln!(
        out,
        r#"<clipPath id="area"><rect x="{LEFT:.2}" y="{TOP:.2}" width="{PLOT:.2}" height="{PLOT:.2}"/></clipPath>"#
    );
    if let Some(r) = &spec.reference {
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="6,4" clip-path="url(#area)"/>"#,
            px(xr.lo),
            py(r.slope * xr.lo + r.intercept),
            px(xr.hi),
            py(r.slope * xr.hi + r.intercept)
        );
    }

    let mut legend_y = TOP + 10.0;
    for (k, s) in spec.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut bars = String::new();
        for (i, &(x, _)) in s.points.iter().enumerate() {
            if let Some((lo, hi)) = s.error_bars[i] {
                let _ = write!(
                    bars,
                    "M{:.2},{:.2}V{:.2}",
                    px(spec.x_scale.map(x)),
                    py(spec.y_scale.map(lo)),
                    py(spec.y_scale.map(hi))
                );
            }
        }
        if !bars.is_empty() {
            let _ = writeln!(out, r#"<path d="{bars}" stroke="{color}" fill="none"/>"#);
        }
        for &(x, y) in &s.points {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#,
                px(spec.x_scale.map(x)),
                py(spec.y_scale.map(y))
            );
        }
        if !s.label.is_empty() {
            let lx = LEFT + PLOT + 16.0;
            let _ = writeln!(
                out,
                r#"<rect x="{lx:.2}" y="{:.2}" width="8" height="8" fill="{color}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                legend_y - 8.0,
                lx + 12.0,
                legend_y,
                escape(&s.label)
            );
            legend_y += 18.0;
        }
    }
    if let Some(r) = &spec.reference {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="gray">{}</text>"#,
            LEFT + 10.0,
            TOP + 16.0,
            escape(&r.label)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Writes [`render_svg`] output to `path`.
pub fn render_loglog(spec: &PlotSpec, path: impl AsRef<Path>) -> Result<()> {
    let svg = render_svg(spec)?;
    std::fs::write(path, svg)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// εN_ε against dM, one series per ε.
    Samples,
    /// N_ε against dM/ε.
    Epsilon,
    /// Mean query count against N.
    Queries,
    /// εN_ε against d, one series per M.
    PerM,
    /// εN_ε against M, one series per d.
    PerD,
    /// Median log10 λ against M.
    Lambda,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::Samples,
        Figure::Epsilon,
        Figure::Queries,
        Figure::PerM,
        Figure::PerD,
        Figure::Lambda,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Samples => "samples",
            Figure::Epsilon => "epsilon",
            Figure::Queries => "queries",
            Figure::PerM => "per-m",
            Figure::PerD => "per-d",
            Figure::Lambda => "lambda",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown figure {s:?}")))
    }
}

fn unit_reference(points: &[(f64, f64)], label: impl Fn(f64) -> String) -> Option<ReferenceLine> {
    let fit = fit_reference(points).ok()?;
    Some(ReferenceLine {
        slope: 1.0,
        intercept: fit.unit_c.log10(),
        label: format!("{} (fitted slope {:.2})", label(fit.unit_c), fit.slope),
    })
}

fn reached(sc: &[SampleComplexity]) -> impl Iterator<Item = (&SampleComplexity, usize)> {
    sc.iter().filter_map(|c| c.n_eps.map(|n| (c, n)))
}

/// Bar from `ε·n_below` to `ε·N_ε`, or none when `N_ε` is the first tested size.
fn bracket(c: &SampleComplexity, n: usize, scale: f64) -> Option<(f64, f64)> {
    c.n_below.map(|lo| (scale * lo as f64, scale * n as f64))
}

fn grouped_series<K: Ord + Copy>(
    sc: &[SampleComplexity],
    key: impl Fn(&SampleComplexity) -> K,
    label: impl Fn(K) -> String,
    x: impl Fn(&SampleComplexity) -> f64,
) -> Vec<Series> {
    let mut groups: BTreeMap<K, Series> = BTreeMap::new();
    for (c, n) in reached(sc) {
        let s = groups.entry(key(c)).or_insert_with(|| Series::new(label(key(c)), Vec::new()));
        s.points.push((x(c), c.epsilon * n as f64));
        s.error_bars.push(bracket(c, n, c.epsilon));
    }
    groups.into_values().collect()
}

/// Builds one of the sweep figures from trial rows alone.
pub fn sweep_figure(fig: Figure, rows: &[TrialResult], epsilons: &[f64]) -> Result<PlotSpec> {
    let summary = summarize(rows, epsilons);
    let sc = &summary.sample_complexity;
    let eps_min = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let at_min: Vec<SampleComplexity> = sc.iter().filter(|c| c.epsilon == eps_min).cloned().collect();
    let dm = |c: &SampleComplexity| (c.d * c.m) as f64;

    let mut spec;
    match fig {
        Figure::Samples => {
            spec = PlotSpec::loglog("Sample complexity", "dM", "ε·N_ε");
            spec.series = grouped_series(sc, |c| c.epsilon.to_bits(), |b| format!("ε={}", f64::from_bits(b)), dm);
            let pts: Vec<(f64, f64)> = spec.series.iter().flat_map(|s| s.points.clone()).collect();
            spec.reference = unit_reference(&pts, |c| format!("εN_ε = {c:.3}·dM"));
        }
        Figure::Epsilon => {
            spec = PlotSpec::loglog("Sample complexity against target", "dM/ε", "N_ε");
            let mut s = grouped_series(sc, |c| c.epsilon.to_bits(), |b| format!("ε={}", f64::from_bits(b)), |c| {
                dm(c) / c.epsilon
            });
            for series in &mut s {
                let eps = series.label.trim_start_matches("ε=").parse::<f64>().unwrap_or(1.0);
                for p in &mut series.points {
                    p.1 /= eps;
                }
                for b in series.error_bars.iter_mut().flatten() {
                    *b = (b.0 / eps, b.1 / eps);
                }
            }
            spec.series = s;
            let pts: Vec<(f64, f64)> = spec.series.iter().flat_map(|s| s.points.clone()).collect();
            spec.reference = unit_reference(&pts, |c| format!("N_ε = {c:.3}·dM/ε"));
        }
        Figure::Queries => {
            spec = PlotSpec::loglog("Queries", "N", "T");
            let pts: Vec<(f64, f64)> = summary
                .cells
                .iter()
                .filter(|c| c.mean_queries > 0.0)
                .map(|c| (c.n as f64, c.mean_queries))
                .collect();
            spec.reference = unit_reference(&pts, |c| format!("T = {c:.1}·N"));
            spec.series = vec![Series::new("", pts)];
        }
        Figure::PerM => {
            spec = PlotSpec::loglog("Sample complexity per M", "d", "ε·N_ε");
            spec.series = grouped_series(&at_min, |c| c.m, |m| format!("M={m}"), |c| c.d as f64);
        }
        Figure::PerD => {
            spec = PlotSpec::loglog("Sample complexity per d", "M", "ε·N_ε");
            spec.series = grouped_series(&at_min, |c| c.d, |d| format!("d={d}"), |c| c.m as f64);
        }
        Figure::Lambda => {
            return Err(Error::InvalidInput("the lambda figure is built from lambda samples".into()));
        }
    }
    spec.validate()?;
    Ok(spec)
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct LambdaRecord {
    #[serde(rename = "M")]
    pub m: usize,
    pub d: usize,
    pub trial: usize,
    pub log10_lambda: f64,
}

pub fn read_lambda_samples(path: impl AsRef<Path>) -> Result<Vec<LambdaRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Median log10 λ per M with 5th–95th percentile bars and a least-squares line.
pub fn lambda_figure(records: &[LambdaRecord]) -> Result<PlotSpec> {
    let mut by_m: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.log10_lambda.is_finite()) {
        by_m.entry(r.m).or_default().push(r.log10_lambda);
    }
    let mut series = Series::new("median", Vec::new());
    for (m, mut v) in by_m {
        v.sort_by(f64::total_cmp);
        series.points.push((m as f64, quantile(&v, 0.5)));
        series.error_bars.push(Some((quantile(&v, 0.05), quantile(&v, 0.95))));
    }
    let xs: Vec<f64> = series.points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = series.points.iter().map(|p| p.1).collect();
    let reference = linear_regression(&xs, &ys).ok().map(|r| ReferenceLine {
        slope: r.slope,
        intercept: r.intercept,
        label: format!("log10 λ ≈ {:.3}·M + {:.3} (R² {:.3})", r.slope, r.intercept, r.r_squared),
    });
    let spec = PlotSpec {
        title: "Conditioning of random teacher weights".into(),
        x_label: "M (d = 2M)".into(),
        y_label: "log10 λ".into(),
        x_scale: Scale::Linear,
        y_scale: Scale::Linear,
        series: vec![series],
        reference,
        equal_aspect: false,
    };
    spec.validate()?;
    Ok(spec)
}

/// Plain-text N_ε table, one line per configuration and target.
pub fn sample_complexity_table(sc: &[SampleComplexity]) -> String {
    let mut out = String::from("d\tM\tsigma\tdepth\tscheme\tepsilon\tN_eps\n");
    for c in sc {
        let n = match c.n_eps {
            Some(n) => n.to_string(),
            None => format!(">{}", c.max_tested),
        };
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            c.d, c.m, c.sigma, c.depth, c.scheme, c.epsilon, n
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point_spec() -> PlotSpec {
        let mut spec = PlotSpec::loglog("t", "x", "y");
        spec.series.push(Series::new("a", vec![(1.0, 2.0), (10.0, 30.0)]));
        spec.reference = Some(ReferenceLine {
            slope: 1.0,
            intercept: 0.3,
            label: "ref".into(),
        });
        spec
    }

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 5.0, 40.0].iter().map(|&x| (x, 3.0 * x)).collect();
        let f = fit_reference(&pts).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!((f.unit_c - 3.0).abs() < 1e-12);
        let sq: Vec<(f64, f64)> = [1.0, 3.0, 9.0].iter().map(|&x| (x, x * x)).collect();
        assert!((fit_reference(&sq).unwrap().slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(fit_reference(&[(1.0, 1.0)]), Err(Error::Fit(_))));
        assert!(fit_reference(&[(1.0, 1.0), (2.0, -1.0)]).is_err());
        assert!(linear_regression(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn regression_r_squared() {
        let r = linear_regression(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert_eq!((r.slope, r.intercept, r.r_squared), (2.0, 1.0, 1.0));
        let r = linear_regression(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(r.r_squared < 0.5);
    }

    #[test]
    fn svg_structure() {
        let svg = render_svg(&two_point_spec()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn svg_is_deterministic() {
        assert_eq!(render_svg(&two_point_spec()).unwrap(), render_svg(&two_point_spec()).unwrap());
    }

    #[test]
    fn invalid_specs() {
        let empty = PlotSpec::loglog("t", "x", "y");
        assert!(matches!(render_svg(&empty), Err(Error::Plot(_))));
        let mut neg = two_point_spec();
        neg.series[0].points[0].1 = -1.0;
        assert!(render_svg(&neg).is_err());
        neg.y_scale = Scale::Linear;
        assert!(render_svg(&neg).is_ok());
    }

    #[test]
    fn figure_names_round_trip() {
        for f in Figure::ALL {
            assert_eq!(f.name().parse::<Figure>().unwrap(), f);
        }
        assert!("nope".parse::<Figure>().is_err());
    }

    #[test]
    fn lambda_figure_from_records() {
        let recs: Vec<LambdaRecord> = (1..=4)
            .flat_map(|m| {
                (0..5).map(move |t| LambdaRecord {
                    m,
                    d: 2 * m,
                    trial: t,
                    log10_lambda: m as f64 + 0.1 * t as f64,
                })
            })
            .collect();
        let spec = lambda_figure(&recs).unwrap();
        assert_eq!(spec.series[0].points[0], (1.0, 1.2));
        let r = spec.reference.unwrap();
        assert!((r.slope - 1.0).abs() < 1e-12);
    }
}
