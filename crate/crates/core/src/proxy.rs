//! Standardized measures and the combined difficulty + extraneous-load proxy.
//!
//! Per-segment mean difficulty is min-max standardized over the whole
//! analysis dataset (difficulty has no natural bounds). Questionnaire
//! subscales arrive already on `[0, 1]` from their theoretical Likert bounds.
//! The proxy is `combined_raw = diff_std + el_std` and its halved form
//! `combined_std`, which is back on `[0, 1]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SubscaleScores;
use crate::segmenting::SegmentDifficulty;

/// Value every element of a constant series maps to.
pub const CONSTANT_SERIES_VALUE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizedSeries {
    pub values: Vec<f64>,
    pub source_min: f64,
    pub source_max: f64,
}

impl StandardizedSeries {
    pub fn is_constant(&self) -> bool {
        self.source_max <= self.source_min
    }

    /// Applies the recorded transform to another value, clamped to `[0, 1]`.
    pub fn transform(&self, v: f64) -> f64 {
        if self.is_constant() {
            CONSTANT_SERIES_VALUE
        } else {
            ((v - self.source_min) / (self.source_max - self.source_min)).clamp(0.0, 1.0)
        }
    }
}

/// `v -> (v - min) / (max - min)`; a constant series maps to 0.5.
pub fn minmax_standardize(values: &[f64]) -> Result<StandardizedSeries> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("cannot standardize an empty series".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "cannot standardize non-finite value {v}"
        )));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut series = StandardizedSeries {
        values: Vec::new(),
        source_min: min,
        source_max: max,
    };
    series.values = values.iter().map(|&v| series.transform(v)).collect();
    Ok(series)
}

/// Returns `(diff_std + el_std, (diff_std + el_std) / 2)`.
pub fn combined_load(diff_std: f64, el_std: f64) -> Result<(f64, f64)> {
    for (name, v) in [("diff_std", diff_std), ("el_std", el_std)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!("{name} = {v} is outside [0, 1]")));
        }
    }
    let raw = diff_std + el_std;
    Ok((raw, raw / 2.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxyRecord {
    pub learner_id: String,
    pub administration_index: usize,
    pub diff_std: f64,
    pub el_std: f64,
    pub combined_raw: f64,
    pub combined_std: f64,
    pub il_reported: f64,
    pub cl_reported: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxyTable {
    pub records: Vec<ProxyRecord>,
    /// Transform applied to segment mean difficulties.
    pub difficulty_scale: StandardizedSeries,
}

/// Joins each defined segment difficulty with the scores of the
/// questionnaire that closes the segment.
pub fn assemble_records(rows: &[(SegmentDifficulty, SubscaleScores)]) -> Result<ProxyTable> {
    let means: Vec<f64> = rows.iter().map(|(d, _)| d.mean_b).collect();
    let scale = minmax_standardize(&means)?;
    let records = rows
        .iter()
        .zip(&scale.values)
        .map(|((d, scores), &diff_std)| {
            let (combined_raw, combined_std) = combined_load(diff_std, scores.extraneous)?;
            Ok(ProxyRecord {
                learner_id: d.learner_id.clone(),
                administration_index: d.administration_index,
                diff_std,
                el_std: scores.extraneous,
                combined_raw,
                combined_std,
                il_reported: scores.intrinsic,
                cl_reported: scores.overall,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProxyTable {
        records,
        difficulty_scale: scale,
    })
}

/// Means of the numeric [`ProxyRecord`] fields over a group of records.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldMeans {
    pub diff_std: f64,
    pub el_std: f64,
    pub combined_raw: f64,
    pub combined_std: f64,
    pub il_reported: f64,
    pub cl_reported: f64,
}

impl FieldMeans {
    fn of(records: &[&ProxyRecord]) -> Self {
        let n = records.len() as f64;
        let mean = |f: fn(&ProxyRecord) -> f64| records.iter().map(|r| f(r)).sum::<f64>() / n;
        Self {
            diff_std: mean(|r| r.diff_std),
            el_std: mean(|r| r.el_std),
            combined_raw: mean(|r| r.combined_raw),
            combined_std: mean(|r| r.combined_std),
            il_reported: mean(|r| r.il_reported),
            cl_reported: mean(|r| r.cl_reported),
        }
    }
}

/// One heatmap column: a learner's averages over all their records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerRow {
    pub learner_id: String,
    pub n_records: usize,
    pub means: FieldMeans,
}

/// Per-learner means sorted ascending by mean reported cognitive load, ties
/// broken by learner id.
pub fn learner_rows(records: &[ProxyRecord]) -> Vec<LearnerRow> {
    let mut groups: BTreeMap<&str, Vec<&ProxyRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.learner_id.as_str()).or_default().push(r);
    }
    let mut rows: Vec<LearnerRow> = groups
        .into_iter()
        .map(|(learner, mut group)| {
            group.sort_by_key(|r| r.administration_index);
            LearnerRow {
                learner_id: learner.to_owned(),
                n_records: group.len(),
                means: FieldMeans::of(&group),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        a.means
            .cl_reported
            .total_cmp(&b.means.cl_reported)
            .then_with(|| a.learner_id.cmp(&b.learner_id))
    });
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub administration_index: usize,
    /// Learners contributing a record at this index.
    pub n: usize,
    pub means: FieldMeans,
}

/// Cross-learner means at each administration index present in `records`.
pub fn trend_series(records: &[ProxyRecord]) -> Vec<TrendPoint> {
    let mut groups: BTreeMap<usize, Vec<&ProxyRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.administration_index).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(administration_index, mut group)| {
            group.sort_by(|a, b| a.learner_id.cmp(&b.learner_id));
            TrendPoint {
                administration_index,
                n: group.len(),
                means: FieldMeans::of(&group),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    /// `None` when either series is constant.
    pub pearson_r: Option<f64>,
    /// `None` when either series' ranks are constant.
    pub spearman_rho: Option<f64>,
    pub n: usize,
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - mean_a, y - mean_b);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks; tied values share the mean of their positions.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson product-moment and Spearman rank correlation of two paired
/// series.
pub fn alignment_stats(a: &[f64], b: &[f64]) -> Result<Alignment> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "series lengths differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidArgument("alignment needs at least two pairs".into()));
    }
    if let Some(v) = a.iter().chain(b).find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite value {v} in series")));
    }
    Ok(Alignment {
        pearson_r: pearson(a, b),
        spearman_rho: pearson(&average_ranks(a), &average_ranks(b)),
        n: a.len(),
    })
}
