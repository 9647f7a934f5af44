//! Output emission and the pipeline stages behind the `cogload` CLI.

pub mod config;
mod pipeline;
pub mod svg;
pub mod tables;

pub use pipeline::{
    exit_code, run_analyze, run_calibrate, run_report, run_simulate, AnalyzeOptions, AnalyzeSummary, CalibrateOptions,
    CalibrateSummary, ReportOptions, ANALYSIS_META_FILE, CALIBRATION_FILE, CALIBRATION_SUMMARY_FILE, EXCLUSIONS_FILE,
    HEATMAP_FILE, LEARNERS_FILE, PROXY_FILE, SEGMENTS_FILE, TRENDS_FILE, TRENDS_SVG_FILE, WARNINGS_FILE,
};
