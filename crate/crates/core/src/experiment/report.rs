//! CSV / JSON / SVG output. Everything is formatted with fixed rules so equal
//! results give byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Test1Result, Test2Result};
use crate::adapt::Strategy;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Report {
    Uniform(Test1Result),
    Adaptive(Test2Result),
}

impl Report {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" | "svg-plot" => Ok(Self::Svg),
            other => Err(Error::InvalidParameter(format!("unknown report format {other:?}"))),
        }
    }
}

/// Six significant digits: fixed notation for moderate magnitudes,
/// scientific otherwise.
pub(crate) fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-3..6).contains(&exponent) {
        let decimals = (5 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.5e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

fn uniform_table(result: &Test1Result) -> String {
    let mut out = String::from("mode");
    for run in &result.runs {
        write!(out, ",n={}", run.n).unwrap();
    }
    out.push_str(",order,extrapolated,fit_residual\n");
    if result.runs.is_empty() {
        return out;
    }
    out.push_str("dofs");
    for run in &result.runs {
        write!(out, ",{}", run.dofs).unwrap();
    }
    out.push_str(",,,\n");
    for (i, fit) in result.fits.iter().enumerate() {
        write!(out, "{}", i + 1).unwrap();
        for run in &result.runs {
            write!(out, ",{}", sig6(run.frequencies[i])).unwrap();
        }
        match fit {
            Some(f) => writeln!(out, ",{},{},{}", sig6(f.order), sig6(f.limit), sig6(f.residual)),
            None => writeln!(out, ",,,"),
        }
        .unwrap();
    }
    out
}

/// Side-by-side `(N, ω_h1)` columns per strategy, then fitted order and the
/// reference frequency.
fn frequency_table(result: &Test2Result) -> String {
    let mut out = String::new();
    let header: Vec<String> = result
        .runs
        .iter()
        .flat_map(|r| [format!("{} N", r.strategy.name()), format!("{} omega_h1", r.strategy.name())])
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    let rows = result.runs.iter().map(|r| r.steps.len()).max().unwrap_or(0);
    if rows == 0 {
        return out;
    }
    for i in 0..rows {
        let cells: Vec<String> = result
            .runs
            .iter()
            .flat_map(|r| match r.steps.get(i) {
                Some(s) => [s.dofs.to_string(), sig6(s.omega)],
                None => [String::new(), String::new()],
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let order: Vec<String> = result
        .runs
        .iter()
        .flat_map(|r| ["order".to_string(), opt(r.rate.map(|f| f.exponent))])
        .collect();
    out.push_str(&order.join(","));
    out.push('\n');
    let reference: Vec<String> = result
        .runs
        .iter()
        .flat_map(|_| ["omega_1".to_string(), opt(result.reference)])
        .collect();
    out.push_str(&reference.join(","));
    out.push('\n');
    out
}

/// Estimator components along the adaptive VEM run.
fn estimator_table(result: &Test2Result) -> String {
    let mut out = String::from("N,omega_h1,error,R2,theta2,J2,eta2,effectivity\n");
    if let Some(run) = result.run(Strategy::Vem) {
        for s in &run.steps {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.dofs,
                sig6(s.omega),
                opt(s.error),
                sig6(s.r2),
                sig6(s.theta2),
                sig6(s.j2),
                sig6(s.eta2),
                opt(s.effectivity)
            )
            .unwrap();
        }
    }
    out
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Log-log polylines with decade ticks.
fn loglog_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (w, h, margin) = (640.0, 480.0, 70.0);
    let points = series.iter().flat_map(|s| &s.points).filter(|(x, y)| *x > 0.0 && *y > 0.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x.log10());
        x1 = x1.max(x.log10());
        y0 = y0.min(y.log10());
        y1 = y1.max(y.log10());
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x0, x1, y0, y1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0), y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |x: f64| margin + (x.log10() - x0) / (x1 - x0) * (w - 2.0 * margin);
    let py = |y: f64| h - margin - (y.log10() - y0) / (y1 - y0) * (h - 2.0 * margin);
    let mut svg = String::new();
    writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0).unwrap();
    let (left, right, top, bottom) = (margin, w - margin, margin, h - margin);
    writeln!(svg, r#"<path d="M{left} {top}V{bottom}H{right}" fill="none" stroke="black"/>"#).unwrap();
    for d in x0 as i32..=x1 as i32 {
        let x = px(10f64.powi(d));
        writeln!(svg, r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{}" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">1e{d}</text>"#, bottom + 5.0, bottom + 20.0).unwrap();
    }
    for d in y0 as i32..=y1 as i32 {
        let y = py(10f64.powi(d));
        writeln!(svg, r#"<line x1="{}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"#, left - 5.0, left - 8.0, y + 4.0).unwrap();
    }
    writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, w / 2.0, h - 20.0).unwrap();
    writeln!(svg, r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{y_label}</text>"#, h / 2.0, h / 2.0).unwrap();
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, coords.join(" ")).unwrap();
        for c in &coords {
            let (cx, cy) = c.split_once(',').unwrap();
            writeln!(svg, r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{color}"/>"#).unwrap();
        }
        let ly = top + 16.0 * k as f64;
        writeln!(svg, r#"<text x="{}" y="{ly:.2}" fill="{color}" text-anchor="end">{}</text>"#, right, s.label).unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}

fn uniform_plot(result: &Test1Result) -> String {
    let series: Vec<Series> = result
        .fits
        .iter()
        .enumerate()
        .filter_map(|(i, fit)| {
            let fit = fit.as_ref()?;
            Some(Series {
                label: format!("mode {} (order {})", i + 1, sig6(fit.order)),
                points: result
                    .runs
                    .iter()
                    .map(|r| (1.0 / r.n as f64, (r.frequencies[i] - fit.limit).abs()))
                    .collect(),
            })
        })
        .collect();
    loglog_svg(
        &format!("{} meshes: distance to extrapolated frequency", result.family.name()),
        "h",
        "|omega_h - omega_extrapolated|",
        &series,
    )
}

fn adaptive_plot(result: &Test2Result) -> String {
    let series: Vec<Series> = result
        .runs
        .iter()
        .map(|r| Series {
            label: match r.rate {
                Some(f) => format!("{} (N^{})", r.strategy.name(), sig6(f.exponent)),
                None => r.strategy.name().to_string(),
            },
            points: r.steps.iter().filter_map(|s| Some((s.dofs as f64, s.error?))).collect(),
        })
        .collect();
    loglog_svg("Error curves", "N", "|omega_1 - omega_h1|", &series)
}

fn write(dir: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    written.push(path);
    Ok(())
}

/// Writes the requested formats into `dir` (created if missing) and returns
/// the paths written.
pub fn emit_report(report: &Report, dir: impl AsRef<Path>, formats: &[Format]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for format in formats {
        match (format, report) {
            (Format::Csv, Report::Uniform(r)) => {
                write(dir, &format!("table1_{}.csv", r.family.name()), &uniform_table(r), &mut written)?
            }
            (Format::Csv, Report::Adaptive(r)) => {
                write(dir, "table5.csv", &frequency_table(r), &mut written)?;
                write(dir, "table4.csv", &estimator_table(r), &mut written)?;
            }
            (Format::Json, Report::Uniform(r)) => {
                write(dir, &format!("test1_{}.json", r.family.name()), &report.to_json()?, &mut written)?
            }
            (Format::Json, Report::Adaptive(_)) => write(dir, "test2.json", &report.to_json()?, &mut written)?,
            (Format::Svg, Report::Uniform(r)) => {
                write(dir, &format!("convergence_{}.svg", r.family.name()), &uniform_plot(r), &mut written)?
            }
            (Format::Svg, Report::Adaptive(r)) => write(dir, "error_curves.svg", &adaptive_plot(r), &mut written)?,
        }
    }
    Ok(written)
}
