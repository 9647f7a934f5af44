use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{self, SubscaleMap, SubscaleScores};
use crate::irt::{calibrate_jml, CalibrationConfig, CalibrationResult};
use crate::proxy::{self, Alignment};
use crate::segmenting::{self, Segment, SegmentDifficulty};
use crate::simgen::{self, GroundTruth, SimConfig, Study};

use super::svg;
use super::tables::{self, ExclusionRow};

pub const CALIBRATION_FILE: &str = "calibration.csv";
pub const EXCLUSIONS_FILE: &str = "exclusions.csv";
pub const CALIBRATION_SUMMARY_FILE: &str = "calibration_summary.json";
pub const SEGMENTS_FILE: &str = "segments.csv";
pub const PROXY_FILE: &str = "proxy.csv";
pub const TRENDS_FILE: &str = "trends.csv";
pub const LEARNERS_FILE: &str = "learners.csv";
pub const WARNINGS_FILE: &str = "warnings.txt";
pub const ANALYSIS_META_FILE: &str = "analysis_meta.json";
pub const HEATMAP_FILE: &str = "heatmap.svg";
pub const TRENDS_SVG_FILE: &str = "trends.svg";

/// Exit status for an error: 1 for input and validation problems, 2 when
/// calibration itself fails, 3 for I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => 3,
        Error::EmptyAfterReduction | Error::NumericalFailure { .. } => 2,
        _ => 1,
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_bytes(path, &buf)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_owned(),
        source,
    })?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

#[derive(Debug, Clone)]
pub struct CalibrateOptions {
    pub events: PathBuf,
    pub out_dir: PathBuf,
    pub min_responses: usize,
    pub calibration: CalibrationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrateSummary {
    pub events_read: usize,
    pub first_attempts: usize,
    pub kept_item_count: usize,
    pub removed_item_count: usize,
    pub calibrated_items: usize,
    pub calibrated_learners: usize,
    pub excluded: usize,
    pub iterations_used: usize,
    pub converged: bool,
    pub initial_log_likelihood: f64,
    pub final_log_likelihood: f64,
    #[serde(skip)]
    pub result: CalibrationResult,
}

/// events -> first attempts -> minimum-response filter -> matrix -> JML.
/// Writes `calibration.csv`, `exclusions.csv` and `calibration_summary.json`.
pub fn run_calibrate(opts: &CalibrateOptions) -> Result<CalibrateSummary> {
    opts.calibration.validate()?;
    let events = ingest::read_events(&opts.events)?;
    let first = ingest::first_attempts(&events);
    let filtered = ingest::filter_min_responses(&first, opts.min_responses)?;
    let matrix = ingest::build_response_matrix(&filtered.events)?;
    let result = calibrate_jml(&matrix, &opts.calibration)?;

    ensure_dir(&opts.out_dir)?;
    let rows = tables::calibration_rows(&result);
    write_with(&opts.out_dir.join(CALIBRATION_FILE), |w| {
        tables::write_calibration(w, &rows)
    })?;

    let mut exclusions: Vec<ExclusionRow> = filtered
        .removed_items
        .iter()
        .map(|id| ExclusionRow {
            id: id.clone(),
            kind: "item".into(),
            reason: "too_few_responses".into(),
        })
        .collect();
    exclusions.extend(result.exclusions.iter().map(|e| ExclusionRow {
        id: e.id.clone(),
        kind: e.kind.to_string(),
        reason: e.reason.to_string(),
    }));
    write_with(&opts.out_dir.join(EXCLUSIONS_FILE), |w| {
        tables::write_exclusions(w, &exclusions)
    })?;

    let summary = CalibrateSummary {
        events_read: events.len(),
        first_attempts: first.len(),
        kept_item_count: filtered.kept_item_count,
        removed_item_count: filtered.removed_item_count,
        calibrated_items: result.items.len(),
        calibrated_learners: result.abilities.len(),
        excluded: result.exclusions.len(),
        iterations_used: result.iterations_used,
        converged: result.converged,
        initial_log_likelihood: result.initial_log_likelihood,
        final_log_likelihood: result.final_log_likelihood,
        result,
    };
    write_json(&opts.out_dir.join(CALIBRATION_SUMMARY_FILE), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub events: PathBuf,
    pub questionnaires: PathBuf,
    /// Default mapping (r1-r3 intrinsic, r4-r6 extraneous, r7-r10 germane)
    /// when absent.
    pub subscale_map: Option<PathBuf>,
    pub calibration: PathBuf,
    /// Item metadata; when given, events on unknown items are warned about.
    pub items: Option<PathBuf>,
    /// `ground_truth.json` (by `.json` extension) or a
    /// `learner_id,routing_end_ts` CSV. Without it no segment is routing.
    pub routing: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub emit_svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeSummary {
    pub n_segments: usize,
    pub n_records: usize,
    pub n_learners: usize,
    pub n_unassigned_events: usize,
    pub n_warnings: usize,
    pub alignment_combined_vs_cl: Option<Alignment>,
}

#[derive(Serialize)]
struct AnalysisMeta<'a> {
    heatmap_column_order: &'static str,
    heatmap_rows: Vec<&'static str>,
    difficulty_source_min: f64,
    difficulty_source_max: f64,
    difficulty_constant: bool,
    constant_series_value: f64,
    likert_standardization: &'static str,
    subscale_map: &'static str,
    summary: &'a AnalyzeSummary,
}

fn read_routing(path: &Path) -> Result<HashMap<String, f64>> {
    if path.extension().is_some_and(|e| e == "json") {
        Ok(GroundTruth::read(path)?.routing_end_ts.into_iter().collect())
    } else {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        tables::parse_routing(file, &path.display().to_string())
    }
}

/// Segments -> per-segment difficulty -> standardized proxy records ->
/// per-learner and per-administration aggregates.
pub fn run_analyze(opts: &AnalyzeOptions) -> Result<AnalyzeSummary> {
    let events = ingest::read_events(&opts.events)?;
    let q_text = fs::read_to_string(&opts.questionnaires).map_err(|e| Error::io(&opts.questionnaires, e))?;
    let admins = if q_text.trim().is_empty() {
        Vec::new()
    } else {
        ingest::parse_questionnaires(q_text.as_bytes(), &opts.questionnaires.display().to_string())?
    };
    if admins.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no administrations in {}",
            opts.questionnaires.display()
        )));
    }
    let map = match &opts.subscale_map {
        Some(p) => ingest::read_subscale_map(p)?,
        None => SubscaleMap::default(),
    };
    let difficulties = tables::difficulty_table(&tables::read_calibration(&opts.calibration)?);
    let routing = match &opts.routing {
        Some(p) => read_routing(p)?,
        None => HashMap::new(),
    };

    let mut warnings = Vec::new();
    if let Some(path) = &opts.items {
        let known: std::collections::HashSet<String> =
            ingest::read_items(path)?.into_iter().map(|i| i.item_id).collect();
        let mut unknown: Vec<&str> = events
            .iter()
            .map(|e| e.item_id.as_str())
            .filter(|id| !known.contains(*id))
            .collect();
        unknown.sort_unstable();
        unknown.dedup();
        warnings.extend(unknown.iter().map(|id| format!("unknown item {id} in events")));
    }

    let mut segmentation = segmenting::build_segments(&events, &admins)?;
    segmenting::label_phases(&mut segmentation.segments, &routing);

    let mut scores: HashMap<(&str, usize), SubscaleScores> = HashMap::new();
    let mut counters: HashMap<&str, usize> = HashMap::new();
    for a in &admins {
        let k = counters.entry(a.learner_id.as_str()).or_insert(0);
        *k += 1;
        scores.insert((a.learner_id.as_str(), *k), ingest::score_questionnaire(a, &map)?);
    }

    let mut per_segment: Vec<(Segment, Option<SegmentDifficulty>)> = Vec::new();
    let mut joined = Vec::new();
    for s in &segmentation.segments {
        match segmenting::segment_mean_difficulty(s, &difficulties) {
            Ok(d) => {
                joined.push((d.clone(), scores[&(s.learner_id.as_str(), s.administration_index)]));
                per_segment.push((s.clone(), Some(d)));
            }
            Err(Error::UndefinedDifficulty { .. }) => {
                warnings.push(format!(
                    "undefined difficulty: learner {} segment {} ({} items, none calibrated)",
                    s.learner_id,
                    s.administration_index,
                    s.n_items()
                ));
                per_segment.push((s.clone(), None));
            }
            Err(e) => return Err(e),
        }
    }
    let mut unassigned: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &segmentation.unassigned {
        *unassigned.entry(e.learner_id.as_str()).or_default() += 1;
    }
    warnings.extend(
        unassigned
            .iter()
            .map(|(l, n)| format!("unassigned: learner {l} has {n} events after the last administration")),
    );

    if joined.is_empty() {
        return Err(Error::InvalidArgument(
            "no segment contains a calibrated item; nothing to standardize".into(),
        ));
    }
    let table = proxy::assemble_records(&joined)?;
    let rows = proxy::learner_rows(&table.records);
    let trends = proxy::trend_series(&table.records);
    let combined: Vec<f64> = table.records.iter().map(|r| r.combined_std).collect();
    let cl: Vec<f64> = table.records.iter().map(|r| r.cl_reported).collect();
    let alignment = if combined.len() >= 2 {
        Some(proxy::alignment_stats(&combined, &cl)?)
    } else {
        None
    };

    let summary = AnalyzeSummary {
        n_segments: segmentation.segments.len(),
        n_records: table.records.len(),
        n_learners: rows.len(),
        n_unassigned_events: segmentation.unassigned.len(),
        n_warnings: warnings.len(),
        alignment_combined_vs_cl: alignment,
    };

    let out = &opts.out_dir;
    ensure_dir(out)?;
    write_with(&out.join(SEGMENTS_FILE), |w| tables::write_segments(w, &per_segment))?;
    write_with(&out.join(PROXY_FILE), |w| tables::write_proxy(w, &table.records))?;
    write_with(&out.join(TRENDS_FILE), |w| tables::write_trends(w, &trends))?;
    write_with(&out.join(LEARNERS_FILE), |w| tables::write_learners(w, &rows))?;
    let mut warning_text = warnings.join("\n");
    if !warning_text.is_empty() {
        warning_text.push('\n');
    }
    write_bytes(&out.join(WARNINGS_FILE), warning_text.as_bytes())?;
    write_json(
        &out.join(ANALYSIS_META_FILE),
        &AnalysisMeta {
            heatmap_column_order: "ascending mean cl_reported, ties by learner_id",
            heatmap_rows: svg::HEATMAP_MEASURES.iter().map(|(n, _)| *n).collect(),
            difficulty_source_min: table.difficulty_scale.source_min,
            difficulty_source_max: table.difficulty_scale.source_max,
            difficulty_constant: table.difficulty_scale.is_constant(),
            constant_series_value: proxy::CONSTANT_SERIES_VALUE,
            likert_standardization: "(r - 1) / 9",
            subscale_map: if opts.subscale_map.is_some() { "file" } else { "default" },
            summary: &summary,
        },
    )?;
    if opts.emit_svg {
        write_bytes(&out.join(HEATMAP_FILE), svg::heatmap_svg(&rows).as_bytes())?;
        write_bytes(&out.join(TRENDS_SVG_FILE), svg::trend_svg(&trends).as_bytes())?;
    }
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub proxy: PathBuf,
    pub trends: PathBuf,
    pub out_dir: PathBuf,
}

/// Re-renders the heatmap and trend SVGs from `proxy.csv` and `trends.csv`.
pub fn run_report(opts: &ReportOptions) -> Result<()> {
    let file = fs::File::open(&opts.proxy).map_err(|e| Error::io(&opts.proxy, e))?;
    let records = tables::parse_proxy(file, &opts.proxy.display().to_string())?;
    let file = fs::File::open(&opts.trends).map_err(|e| Error::io(&opts.trends, e))?;
    let trends = tables::parse_trends(file, &opts.trends.display().to_string())?;
    ensure_dir(&opts.out_dir)?;
    let rows = proxy::learner_rows(&records);
    write_bytes(&opts.out_dir.join(HEATMAP_FILE), svg::heatmap_svg(&rows).as_bytes())?;
    write_bytes(&opts.out_dir.join(TRENDS_SVG_FILE), svg::trend_svg(&trends).as_bytes())
}

pub fn run_simulate(config: &SimConfig, out_dir: &Path) -> Result<Study> {
    let study = simgen::simulate_study(config)?;
    simgen::emit_fixture(&study, out_dir)?;
    Ok(study)
}
