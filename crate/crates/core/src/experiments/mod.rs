//! Experiment harness: configuration ingestion, theorem-by-theorem sweeps
//! over (q, d, x), and deterministic CSV / JSON / SVG emission.

mod config;
mod emit;
mod report;
mod scans;

pub use config::{Constants, DPolicy, ExperimentConfig, XPolicy};
pub use emit::{csv_bytes, emit_csv, emit_json, emit_plot, json_bytes, plot_svg, PlotAxis};
pub use report::{ratio_of, ExperimentReport, ReportRow};
pub use scans::{run_elementary_scan, run_levelset_scan, run_meansquare_scan, run_pv_scan};
