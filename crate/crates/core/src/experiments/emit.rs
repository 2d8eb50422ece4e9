//! CSV / JSON / SVG emission. Rows are already sorted; floats are printed
//! with the shortest round-trip representation, so identical reports are
//! byte-identical on disk.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

use super::report::{ExperimentReport, ReportRow};

const CSV_HEADER: [&str; 10] = [
    "experiment", "q", "d", "label", "x", "lhs", "rhs", "ratio", "pass", "note",
];

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(row: &ReportRow) -> String {
    let pass = match row.pass {
        None => "",
        Some(true) => "true",
        Some(false) => "false",
    };
    [
        csv_field(&row.experiment),
        row.q.to_string(),
        row.d.to_string(),
        csv_field(&row.label),
        row.x.to_string(),
        format!("{}", row.lhs),
        format!("{}", row.rhs),
        format!("{}", row.ratio),
        pass.to_string(),
        csv_field(&row.note),
    ]
    .join(",")
}

pub fn csv_bytes(report: &ExperimentReport) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(&CSV_HEADER.join(","));
    out.push_str("\r\n");
    for row in &report.rows {
        out.push_str(&csv_row(row));
        out.push_str("\r\n");
    }
    out.into_bytes()
}

pub fn emit_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    write_all(path, &csv_bytes(report))
}

pub fn json_bytes(report: &ExperimentReport) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(&report.rows).expect("rows serialize");
    bytes.push(b'\n');
    bytes
}

pub fn emit_json(report: &ExperimentReport, path: &Path) -> Result<()> {
    write_all(path, &json_bytes(report))
}

fn write_all(path: &Path, bytes: &[u8]) -> Result<()> {
    let ctx = |e| Error::io(path.display().to_string(), e);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(ctx)?;
        }
    }
    let mut file = std::fs::File::create(path).map_err(ctx)?;
    file.write_all(bytes).map_err(ctx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotAxis {
    D,
    Q,
}

/// Scatter of row ratios against d or q on log-log axes.
pub fn plot_svg(report: &ExperimentReport, axis: PlotAxis) -> String {
    let points: Vec<(f64, f64, &str)> = report
        .rows
        .iter()
        .filter_map(|r| {
            let x = match axis {
                PlotAxis::D => r.d as f64,
                PlotAxis::Q => r.q as f64,
            };
            (x >= 2.0 && r.ratio.is_finite() && r.ratio > 0.0)
                .then_some((x.log10(), r.ratio.log10(), r.experiment.as_str()))
        })
        .collect();
    let (w, h, ml, mb, mt, mr) = (720.0, 480.0, 60.0, 40.0, 20.0, 20.0);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    let label = match axis {
        PlotAxis::D => "d",
        PlotAxis::Q => "q",
    };
    if points.is_empty() {
        svg.push_str("<text x=\"360\" y=\"240\" text-anchor=\"middle\">no plottable rows</text>\n</svg>\n");
        return svg;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(x, y, _) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - mr);
    let sy = |y: f64| h - mb - (y - y0) / (y1 - y0) * (h - mb - mt);
    // decade gridlines
    for ex in (x0.floor() as i64)..=(x1.ceil() as i64) {
        let px = sx(ex as f64);
        if px >= ml && px <= w - mr {
            svg.push_str(&format!(
                "<line x1=\"{px:.1}\" y1=\"{mt}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>\n",
                h - mb
            ));
            svg.push_str(&format!(
                "<text x=\"{px:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">1e{ex}</text>\n",
                h - mb + 14.0
            ));
        }
    }
    for ey in (y0.floor() as i64)..=(y1.ceil() as i64) {
        let py = sy(ey as f64);
        if py >= mt && py <= h - mb {
            svg.push_str(&format!(
                "<line x1=\"{ml}\" y1=\"{py:.1}\" x2=\"{:.1}\" y2=\"{py:.1}\" stroke=\"#ddd\"/>\n",
                w - mr
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{py:.1}\" font-size=\"11\" text-anchor=\"end\">1e{ey}</text>\n",
                ml - 6.0
            ));
        }
    }
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{:.1}\" stroke=\"black\"/>\n",
        h - mb
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{label}</text>\n",
        (ml + w - mr) / 2.0,
        h - 6.0
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{:.1}\" font-size=\"12\" transform=\"rotate(-90 14 {:.1})\" text-anchor=\"middle\">ratio</text>\n",
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0
    ));
    // fixed palette keyed by experiment name order of first appearance
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
    let mut series: Vec<&str> = Vec::new();
    for &(_, _, e) in &points {
        if !series.contains(&e) {
            series.push(e);
        }
    }
    for (x, y, e) in &points {
        let color = palette[series.iter().position(|s| s == e).unwrap() % palette.len()];
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\" fill-opacity=\"0.7\"/>\n",
            sx(*x),
            sy(*y)
        ));
    }
    for (i, e) in series.iter().enumerate() {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"{}\">{e}</text>\n",
            w - mr - 120.0,
            mt + 14.0 * (i + 1) as f64,
            palette[i % palette.len()]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_plot(report: &ExperimentReport, path: &Path, axis: PlotAxis) -> Result<()> {
    write_all(path, plot_svg(report, axis).as_bytes())
}
