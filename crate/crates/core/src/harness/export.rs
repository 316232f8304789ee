use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use statrs::distribution::{ContinuousCDF, Normal};

use super::train::EpochMetrics;
use crate::error::{Error, Result};

pub const TRACE_HEADER: &str =
    "epoch,train_r2,train_mae,train_mse,validation_r2,validation_mae,validation_mse";

/// Pairs `(theoretical, sample)`: sorted residuals against standard normal
/// quantiles at `(i - 0.5) / N`.
pub fn qq_pairs(residuals: &[f64]) -> Vec<(f64, f64)> {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .into_iter()
        .enumerate()
        .map(|(i, r)| (normal.inverse_cdf((i as f64 + 0.5) / n), r))
        .collect()
}

/// Q-Q pairs and absolute residuals of one model's test predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualDiagnostics {
    pub model: String,
    pub qq: Vec<(f64, f64)>,
    pub abs_residuals: Vec<f64>,
}

impl ResidualDiagnostics {
    pub fn qq_csv(&self) -> String {
        let mut out = String::from("theoretical,sample\n");
        for (t, s) in &self.qq {
            let _ = writeln!(out, "{t},{s}");
        }
        out
    }

    pub fn residuals_csv(&self) -> String {
        let mut out = String::from("abs_residual\n");
        for r in &self.abs_residuals {
            let _ = writeln!(out, "{r}");
        }
        out
    }

    /// Writes `qq_<model>.csv` and `residuals_<model>.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let qq = dir.join(format!("qq_{}.csv", self.model));
        let res = dir.join(format!("residuals_{}.csv", self.model));
        write_file(&qq, &self.qq_csv())?;
        write_file(&res, &self.residuals_csv())?;
        Ok(vec![qq, res])
    }

    pub fn qq_svg(&self) -> String {
        let lo = self.qq.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let hi = self
            .qq
            .iter()
            .map(|p| p.0)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut series = vec![Series::points("residuals", self.qq.clone())];
        if lo.is_finite() && hi > lo {
            series.push(Series::line("y = x", vec![(lo, lo), (hi, hi)]));
        }
        render_svg_plot(
            &format!("Q-Q {}", self.model),
            "theoretical",
            "sample",
            &series,
        )
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Residual diagnostics from `truth - prediction`.
pub fn export_residual_diagnostics(
    model: &str,
    predictions: &[f64],
    truth: &[f64],
) -> Result<ResidualDiagnostics> {
    if predictions.len() != truth.len() {
        return Err(Error::shape(
            "export_residual_diagnostics",
            format!(
                "{} predictions vs {} targets",
                predictions.len(),
                truth.len()
            ),
        ));
    }
    let residuals: Vec<f64> = truth.iter().zip(predictions).map(|(t, p)| t - p).collect();
    Ok(ResidualDiagnostics {
        model: model.to_string(),
        qq: qq_pairs(&residuals),
        abs_residuals: residuals.iter().map(|r| r.abs()).collect(),
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One CSV row per epoch under [`TRACE_HEADER`].
pub fn export_epoch_trace(trace: &[EpochMetrics]) -> String {
    let mut out = format!("{TRACE_HEADER}\n");
    for e in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.epoch,
            opt(e.train.r2),
            e.train.mae,
            e.train.mse,
            opt(e.validation.r2),
            e.validation.mae,
            e.validation.mse
        );
    }
    out
}

/// Train and validation R^2 per epoch as an SVG line chart.
pub fn epoch_trace_svg(title: &str, trace: &[EpochMetrics]) -> String {
    let pick = |f: fn(&EpochMetrics) -> Option<f64>| {
        trace
            .iter()
            .filter_map(|e| f(e).map(|v| (e.epoch as f64, v)))
            .collect::<Vec<_>>()
    };
    render_svg_plot(
        title,
        "epoch",
        "r2",
        &[
            Series::line("train", pick(|e| e.train.r2)),
            Series::line("validation", pick(|e| e.validation.r2)),
        ],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub connect: bool,
}

impl Series {
    pub fn line(name: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.to_string(),
            points,
            connect: true,
        }
    }

    pub fn points(name: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.to_string(),
            points,
            connect: false,
        }
    }
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Minimal static SVG: axes, a legend, and each series as a polyline or dots.
pub fn render_svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let all = series
        .iter()
        .flat_map(|s| &s.points)
        .filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="25" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r#"<line x1="{M}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(
        out,
        r#"<line x1="{M}" y1="{M}" x2="{M}" y2="{}" stroke="black"/>"#,
        H - M
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        W / 2.0,
        H - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 15 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (label, v, x, y) in [
        ("x0", x0, sx(x0), H - M + 15.0),
        ("x1", x1, sx(x1), H - M + 15.0),
        ("y0", y0, M - 5.0, sy(y0)),
        ("y1", y1, M - 5.0, sy(y1)),
    ] {
        let anchor = if label.starts_with('y') {
            "end"
        } else {
            "middle"
        };
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-family="sans-serif" font-size="10">{v:.4}</text>"#
        );
    }
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(x, y)| (sx(x), sy(y)))
            .collect();
        if s.connect {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        } else {
            for (x, y) in pts {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{x:.1}" cy="{y:.1}" r="2" fill="{color}"/>"#
                );
            }
        }
        let ly = M + 15.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{ly}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            W - M - 100.0,
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}
