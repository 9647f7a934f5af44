//! CSV outputs of the pipeline and the readers for the ones that feed a
//! later stage. Floats use Rust's shortest round-trip formatting.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::{flush, write_row};
use crate::irt::CalibrationResult;
use crate::proxy::{FieldMeans, LearnerRow, ProxyRecord, TrendPoint};
use crate::segmenting::{Segment, SegmentDifficulty};

pub const CALIBRATION_HEADER: [&str; 4] = ["item_id", "b", "se", "n_responses"];
pub const EXCLUSIONS_HEADER: [&str; 3] = ["id", "kind", "reason"];
pub const SEGMENTS_HEADER: [&str; 9] = [
    "learner_id",
    "administration_index",
    "start_ts",
    "end_ts",
    "phase",
    "n_items",
    "n_mapped",
    "n_unmapped",
    "mean_b",
];
pub const PROXY_HEADER: [&str; 8] = [
    "learner_id",
    "administration_index",
    "diff_std",
    "el_std",
    "combined_raw",
    "combined_std",
    "il_reported",
    "cl_reported",
];
pub const TRENDS_HEADER: [&str; 7] = [
    "administration_index",
    "n",
    "diff_std_mean",
    "il_mean",
    "cl_mean",
    "el_mean",
    "combined_std_mean",
];
pub const LEARNERS_HEADER: [&str; 8] = [
    "learner_id",
    "n_records",
    "diff_std",
    "el_std",
    "combined_raw",
    "combined_std",
    "il_reported",
    "cl_reported",
];

/// Row of `calibration.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub item_id: String,
    pub b: f64,
    pub se: f64,
    pub n_responses: usize,
}

/// Calibrated items sorted by item id.
pub fn calibration_rows(result: &CalibrationResult) -> Vec<CalibrationRow> {
    let mut rows: Vec<CalibrationRow> = result
        .items
        .iter()
        .zip(&result.standard_errors)
        .zip(&result.responses_per_item)
        .map(|((item, &se), &n)| CalibrationRow {
            item_id: item.item_id.clone(),
            b: item.b,
            se,
            n_responses: n,
        })
        .collect();
    rows.sort_by(|a, b| a.item_id.cmp(&b.item_id));
    rows
}

pub fn write_calibration<W: Write>(out: W, rows: &[CalibrationRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    write_row(&mut w, CALIBRATION_HEADER)?;
    for r in rows {
        write_row(
            &mut w,
            [
                r.item_id.clone(),
                r.b.to_string(),
                r.se.to_string(),
                r.n_responses.to_string(),
            ],
        )?;
    }
    flush(w)
}

struct Table {
    source_name: String,
    records: Vec<csv::StringRecord>,
}

impl Table {
    fn read<R: Read>(input: R, source_name: &str, header: &[&str]) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(input);
        let parse_err = |line: u64, message: String| Error::Parse {
            source_name: source_name.to_owned(),
            line,
            column: String::new(),
            message,
        };
        let found = reader.headers().map_err(|e| parse_err(1, e.to_string()))?;
        if found.iter().ne(header.iter().copied()) {
            return Err(parse_err(1, format!("expected header `{}`", header.join(","))));
        }
        let records = reader
            .records()
            .map(|r| r.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source_name: source_name.to_owned(),
            records,
        })
    }

    fn field<T: std::str::FromStr>(&self, record: &csv::StringRecord, column: usize, name: &str) -> Result<T> {
        let text = &record[column];
        text.parse().map_err(|_| Error::Parse {
            source_name: self.source_name.clone(),
            line: record.position().map_or(0, |p| p.line()),
            column: name.to_owned(),
            message: format!("cannot parse `{text}`"),
        })
    }
}

pub fn parse_calibration<R: Read>(input: R, source_name: &str) -> Result<Vec<CalibrationRow>> {
    let t = Table::read(input, source_name, &CALIBRATION_HEADER)?;
    t.records
        .iter()
        .map(|r| {
            Ok(CalibrationRow {
                item_id: r[0].to_owned(),
                b: t.field(r, 1, "b")?,
                se: t.field(r, 2, "se")?,
                n_responses: t.field(r, 3, "n_responses")?,
            })
        })
        .collect()
}

pub fn read_calibration(path: &Path) -> Result<Vec<CalibrationRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_calibration(file, &path.display().to_string())
}

pub fn difficulty_table(rows: &[CalibrationRow]) -> HashMap<String, f64> {
    rows.iter().map(|r| (r.item_id.clone(), r.b)).collect()
}

/// Row of `exclusions.csv`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExclusionRow {
    pub id: String,
    pub kind: String,
    pub reason: String,
}

pub fn write_exclusions<W: Write>(out: W, rows: &[ExclusionRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    write_row(&mut w, EXCLUSIONS_HEADER)?;
    for r in rows {
        write_row(&mut w, [&r.id, &r.kind, &r.reason])?;
    }
    flush(w)
}

pub fn write_segments<W: Write>(out: W, segments: &[(Segment, Option<SegmentDifficulty>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    write_row(&mut w, SEGMENTS_HEADER)?;
    for (s, d) in segments {
        let (n_mapped, n_unmapped, mean_b) = match d {
            Some(d) => (d.n_mapped, d.n_unmapped, d.mean_b.to_string()),
            None => (0, s.n_items(), String::new()),
        };
        write_row(
            &mut w,
            [
                s.learner_id.clone(),
                s.administration_index.to_string(),
                s.start_ts.to_string(),
                s.end_ts.to_string(),
                s.phase.as_str().to_owned(),
                s.n_items().to_string(),
                n_mapped.to_string(),
                n_unmapped.to_string(),
                mean_b,
            ],
        )?;
    }
    flush(w)
}

pub fn write_proxy<W: Write>(out: W, records: &[ProxyRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    write_row(&mut w, PROXY_HEADER)?;
    for r in records {
        write_row(
            &mut w,
            [
                r.learner_id.clone(),
                r.administration_index.to_string(),
                r.diff_std.to_string(),
                r.el_std.to_string(),
                r.combined_raw.to_string(),
                r.combined_std.to_string(),
                r.il_reported.to_string(),
                r.cl_reported.to_string(),
            ],
        )?;
    }
    flush(w)
}

pub fn parse_proxy<R: Read>(input: R, source_name: &str) -> Result<Vec<ProxyRecord>> {
    let t = Table::read(input, source_name, &PROXY_HEADER)?;
    t.records
        .iter()
        .map(|r| {
            Ok(ProxyRecord {
                learner_id: r[0].to_owned(),
                administration_index: t.field(r, 1, PROXY_HEADER[1])?,
                diff_std: t.field(r, 2, PROXY_HEADER[2])?,
                el_std: t.field(r, 3, PROXY_HEADER[3])?,
                combined_raw: t.field(r, 4, PROXY_HEADER[4])?,
                combined_std: t.field(r, 5, PROXY_HEADER[5])?,
                il_reported: t.field(r, 6, PROXY_HEADER[6])?,
                cl_reported: t.field(r, 7, PROXY_HEADER[7])?,
            })
        })
        .collect()
}

pub fn write_trends<W: Write>(out: W, points: &[TrendPoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    write_row(&mut w, TRENDS_HEADER)?;
    for p in points {
        let m = &p.means;
        write_row(
            &mut w,
            [
                p.administration_index.to_string(),
                p.n.to_string(),
                m.diff_std.to_string(),
                m.il_reported.to_string(),
                m.cl_reported.to_string(),
                m.el_std.to_string(),
                m.combined_std.to_string(),
            ],
        )?;
    }
    flush(w)
}

/// Reads `trends.csv`. The file does not carry `combined_raw`, which is
/// restored as twice `combined_std`.
pub fn parse_trends<R: Read>(input: R, source_name: &str) -> Result<Vec<TrendPoint>> {
    let t = Table::read(input, source_name, &TRENDS_HEADER)?;
    t.records
        .iter()
        .map(|r| {
            let combined_std: f64 = t.field(r, 6, TRENDS_HEADER[6])?;
            Ok(TrendPoint {
                administration_index: t.field(r, 0, TRENDS_HEADER[0])?,
                n: t.field(r, 1, TRENDS_HEADER[1])?,
                means: FieldMeans {
                    diff_std: t.field(r, 2, TRENDS_HEADER[2])?,
                    il_reported: t.field(r, 3, TRENDS_HEADER[3])?,
                    cl_reported: t.field(r, 4, TRENDS_HEADER[4])?,
                    el_std: t.field(r, 5, TRENDS_HEADER[5])?,
                    combined_std,
                    combined_raw: 2.0 * combined_std,
                },
            })
        })
        .collect()
}

pub fn write_learners<W: Write>(out: W, rows: &[LearnerRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    write_row(&mut w, LEARNERS_HEADER)?;
    for r in rows {
        let m = &r.means;
        write_row(
            &mut w,
            [
                r.learner_id.clone(),
                r.n_records.to_string(),
                m.diff_std.to_string(),
                m.el_std.to_string(),
                m.combined_raw.to_string(),
                m.combined_std.to_string(),
                m.il_reported.to_string(),
                m.cl_reported.to_string(),
            ],
        )?;
    }
    flush(w)
}

pub const ROUTING_HEADER: [&str; 2] = ["learner_id", "routing_end_ts"];

/// Reads a `learner_id,routing_end_ts` table.
pub fn parse_routing<R: Read>(input: R, source_name: &str) -> Result<HashMap<String, f64>> {
    let t = Table::read(input, source_name, &ROUTING_HEADER)?;
    t.records
        .iter()
        .map(|r| Ok((r[0].to_owned(), t.field(r, 1, ROUTING_HEADER[1])?)))
        .collect()
}
