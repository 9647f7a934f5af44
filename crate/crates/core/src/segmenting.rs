//! Learning segments: the questions a learner answered between two
//! consecutive questionnaire administrations.
//!
//! Segment `k` of a learner spans `(t_{k-1}, t_k]` where `t_k` is the
//! timestamp of the k-th administration and `t_0 = 0` is session start. An
//! event that coincides with an administration belongs to the segment that
//! questionnaire closes. The first segment also owns an event at exactly
//! `t = 0`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{InteractionEvent, QuestionnaireAdministration};
use crate::irt::CalibrationResult;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Routing,
    Learning,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Routing => "routing",
            Phase::Learning => "learning",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub learner_id: String,
    /// 1-based ordinal of the administration that closes the segment.
    pub administration_index: usize,
    pub start_ts: f64,
    pub end_ts: f64,
    /// Events in `(start_ts, end_ts]`, sorted by timestamp (stable).
    pub events: Vec<InteractionEvent>,
    pub phase: Phase,
}

impl Segment {
    pub fn item_ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.events.iter().map(|e| e.item_id.as_str())
    }

    pub fn n_items(&self) -> usize {
        self.events.len()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Segmentation {
    /// Ordered by `(learner_id, administration_index)`.
    pub segments: Vec<Segment>,
    /// Events after a learner's last administration, or from learners with
    /// no administrations at all.
    pub unassigned: Vec<InteractionEvent>,
}

fn by_timestamp(a: &InteractionEvent, b: &InteractionEvent) -> std::cmp::Ordering {
    a.timestamp.total_cmp(&b.timestamp)
}

/// Splits every learner's events into one segment per administration.
///
/// Administrations must be strictly increasing in time per learner. An
/// administration at `t = 0` produces an empty first segment.
pub fn build_segments(
    events: &[InteractionEvent],
    administrations: &[QuestionnaireAdministration],
) -> Result<Segmentation> {
    let mut admin_times: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for a in administrations {
        admin_times.entry(a.learner_id.as_str()).or_default().push(a.timestamp);
    }
    for (learner, times) in &admin_times {
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::AdministrationsOutOfOrder {
                learner_id: (*learner).to_owned(),
                index: k + 2,
            });
        }
    }

    let mut events_by_learner: BTreeMap<&str, Vec<&InteractionEvent>> = BTreeMap::new();
    for e in events {
        events_by_learner.entry(e.learner_id.as_str()).or_default().push(e);
    }

    let mut out = Segmentation::default();
    for (learner, times) in &admin_times {
        let mut segments: Vec<Segment> = times
            .iter()
            .enumerate()
            .map(|(k, &end_ts)| Segment {
                learner_id: (*learner).to_owned(),
                administration_index: k + 1,
                start_ts: if k == 0 { 0.0 } else { times[k - 1] },
                end_ts,
                events: Vec::new(),
                phase: Phase::Learning,
            })
            .collect();
        let mut mine: Vec<&InteractionEvent> = events_by_learner.remove(learner).unwrap_or_default();
        mine.sort_by(|a, b| by_timestamp(a, b));
        for e in mine {
            let k = times.partition_point(|&t| t < e.timestamp);
            match segments.get_mut(k) {
                Some(s) => s.events.push(e.clone()),
                None => out.unassigned.push(e.clone()),
            }
        }
        out.segments.extend(segments);
    }
    for (_, mut rest) in events_by_learner {
        rest.sort_by(|a, b| by_timestamp(a, b));
        out.unassigned.extend(rest.into_iter().cloned());
    }
    Ok(out)
}

/// Item difficulties by item id.
pub trait DifficultyLookup {
    fn difficulty(&self, item_id: &str) -> Option<f64>;
}

impl DifficultyLookup for HashMap<String, f64> {
    fn difficulty(&self, item_id: &str) -> Option<f64> {
        self.get(item_id).copied()
    }
}

impl DifficultyLookup for BTreeMap<String, f64> {
    fn difficulty(&self, item_id: &str) -> Option<f64> {
        self.get(item_id).copied()
    }
}

impl DifficultyLookup for CalibrationResult {
    fn difficulty(&self, item_id: &str) -> Option<f64> {
        self.difficulty_of(item_id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDifficulty {
    pub learner_id: String,
    pub administration_index: usize,
    /// Mean difficulty of the segment's calibrated items.
    pub mean_b: f64,
    pub n_mapped: usize,
    pub n_unmapped: usize,
}

/// Arithmetic mean of `b` over the segment's items that have a difficulty;
/// the rest are counted in `n_unmapped`.
pub fn segment_mean_difficulty(segment: &Segment, difficulties: &impl DifficultyLookup) -> Result<SegmentDifficulty> {
    let mut sum = 0.0;
    let mut n_mapped = 0;
    let mut n_unmapped = 0;
    for id in segment.item_ids() {
        match difficulties.difficulty(id) {
            Some(b) => {
                sum += b;
                n_mapped += 1;
            }
            None => n_unmapped += 1,
        }
    }
    if n_mapped == 0 {
        return Err(Error::UndefinedDifficulty {
            learner_id: segment.learner_id.clone(),
            administration_index: segment.administration_index,
        });
    }
    Ok(SegmentDifficulty {
        learner_id: segment.learner_id.clone(),
        administration_index: segment.administration_index,
        mean_b: sum / n_mapped as f64,
        n_mapped,
        n_unmapped,
    })
}

/// A segment is routing when it ends at or before the learner's routing end
/// time; one that straddles the boundary counts as learning. Learners
/// missing from `routing_end_ts`, or with a routing end of zero, have no
/// routing phase.
pub fn label_phases(segments: &mut [Segment], routing_end_ts: &HashMap<String, f64>) {
    for s in segments {
        let routing_end = routing_end_ts.get(&s.learner_id).copied().unwrap_or(0.0);
        s.phase = if routing_end > 0.0 && s.end_ts <= routing_end {
            Phase::Routing
        } else {
            Phase::Learning
        };
    }
}
