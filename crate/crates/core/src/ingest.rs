//! Input files and the preprocessing applied before calibration.
//!
//! File schemas (UTF-8, LF line endings, `.` as decimal separator):
//!
//! | file                 | header                                      |
//! |----------------------|---------------------------------------------|
//! | `events.csv`         | `learner_id,item_id,timestamp_s,correct`    |
//! | `items.csv`          | `item_id,kind,passage_id,level`             |
//! | `questionnaires.csv` | `learner_id,timestamp_s,r1,...,r10`         |
//! | `subscale_map.json`  | `{"r1": "intrinsic", ..., "r10": "germane"}`|
//!
//! Timestamps are seconds since the learner's session start. Floats are
//! written in Rust's shortest round-trip decimal form.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irt::ResponseMatrix;

pub const EVENTS_HEADER: [&str; 4] = ["learner_id", "item_id", "timestamp_s", "correct"];
pub const ITEMS_HEADER: [&str; 4] = ["item_id", "kind", "passage_id", "level"];
/// Number of Likert items in the cognitive-load questionnaire.
pub const RATING_COUNT: usize = 10;
pub const LIKERT_MIN: u8 = 1;
pub const LIKERT_MAX: u8 = 10;
pub const DEFAULT_MIN_RESPONSES: usize = 100;

pub fn questionnaire_header() -> Vec<String> {
    let mut header = vec!["learner_id".to_owned(), "timestamp_s".to_owned()];
    header.extend((1..=RATING_COUNT).map(|k| format!("r{k}")));
    header
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    pub learner_id: String,
    pub item_id: String,
    /// Seconds since the learner's session start.
    pub timestamp: f64,
    pub correct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Independent,
    Passage,
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ItemKind::Independent => "independent",
            ItemKind::Passage => "passage",
        })
    }
}

impl FromStr for ItemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "independent" => Ok(ItemKind::Independent),
            "passage" => Ok(ItemKind::Passage),
            other => Err(format!("expected `independent` or `passage`, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemMeta {
    pub item_id: String,
    pub kind: ItemKind,
    /// Present exactly when `kind` is [`ItemKind::Passage`].
    pub passage_id: Option<String>,
    pub level: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireAdministration {
    pub learner_id: String,
    pub timestamp: f64,
    /// Exactly [`RATING_COUNT`] Likert ratings in `1..=10`.
    pub ratings: Vec<u8>,
}

impl QuestionnaireAdministration {
    pub fn new(learner_id: impl Into<String>, timestamp: f64, ratings: Vec<u8>) -> Result<Self> {
        if ratings.len() != RATING_COUNT {
            return Err(Error::InvalidArgument(format!(
                "questionnaire needs {RATING_COUNT} ratings, got {}",
                ratings.len()
            )));
        }
        if let Some(r) = ratings.iter().find(|r| !(LIKERT_MIN..=LIKERT_MAX).contains(*r)) {
            return Err(Error::InvalidArgument(format!("rating {r} outside 1..=10")));
        }
        if !(timestamp.is_finite() && timestamp >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "timestamp {timestamp} must be non-negative"
            )));
        }
        Ok(Self {
            learner_id: learner_id.into(),
            timestamp,
            ratings,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subscale {
    Intrinsic,
    Extraneous,
    Germane,
}

/// Assignment of questionnaire rating positions to load subscales.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubscaleMap(Vec<Subscale>);

impl SubscaleMap {
    pub fn new(assignment: Vec<Subscale>) -> Result<Self> {
        for s in [Subscale::Intrinsic, Subscale::Extraneous, Subscale::Germane] {
            if !assignment.contains(&s) {
                return Err(Error::InvalidArgument(format!(
                    "subscale {s:?} has no rating positions"
                )));
            }
        }
        Ok(Self(assignment))
    }

    pub fn positions(&self) -> &[Subscale] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let raw: BTreeMap<String, Subscale> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let mut assignment = Vec::with_capacity(RATING_COUNT);
        for k in 1..=RATING_COUNT {
            let key = format!("r{k}");
            assignment.push(*raw.get(&key).ok_or_else(|| format!("missing key `{key}`"))?);
        }
        if let Some(extra) = raw.keys().find(|k| !(1..=RATING_COUNT).any(|i| **k == format!("r{i}"))) {
            return Err(format!("unexpected key `{extra}`"));
        }
        SubscaleMap::new(assignment).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, Subscale> = self
            .0
            .iter()
            .enumerate()
            .map(|(k, &s)| (format!("r{}", k + 1), s))
            .collect();
        let mut text = serde_json::to_string_pretty(&map).expect("subscale map serializes");
        text.push('\n');
        text
    }
}

impl Default for SubscaleMap {
    /// r1-r3 intrinsic, r4-r6 extraneous, r7-r10 germane.
    fn default() -> Self {
        use Subscale::*;
        Self(vec![
            Intrinsic, Intrinsic, Intrinsic, Extraneous, Extraneous, Extraneous, Germane, Germane, Germane, Germane,
        ])
    }
}

/// Subscale means on `[0, 1]`; each rating `r` contributes `(r - 1) / 9`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubscaleScores {
    pub intrinsic: f64,
    pub extraneous: f64,
    pub germane: f64,
    /// Mean over all rating positions.
    pub overall: f64,
}

fn unit_rating(r: u8) -> f64 {
    f64::from(r - LIKERT_MIN) / f64::from(LIKERT_MAX - LIKERT_MIN)
}

pub fn score_questionnaire(admin: &QuestionnaireAdministration, map: &SubscaleMap) -> Result<SubscaleScores> {
    if admin.ratings.len() != map.len() {
        return Err(Error::InconsistentInput(format!(
            "{} ratings but the subscale map covers {} positions",
            admin.ratings.len(),
            map.len()
        )));
    }
    let mut sums = [0.0f64; 3];
    let mut counts = [0usize; 3];
    let mut total = 0.0;
    for (&r, &s) in admin.ratings.iter().zip(map.positions()) {
        if !(LIKERT_MIN..=LIKERT_MAX).contains(&r) {
            return Err(Error::InvalidArgument(format!("rating {r} outside 1..=10")));
        }
        let v = unit_rating(r);
        sums[s as usize] += v;
        counts[s as usize] += 1;
        total += v;
    }
    let mean = |k: usize| sums[k] / counts[k] as f64;
    Ok(SubscaleScores {
        intrinsic: mean(Subscale::Intrinsic as usize),
        extraneous: mean(Subscale::Extraneous as usize),
        germane: mean(Subscale::Germane as usize),
        overall: total / admin.ratings.len() as f64,
    })
}

/// Keeps, for each (learner, item) pair, only the earliest event. Survivors
/// keep their relative order.
pub fn first_attempts(events: &[InteractionEvent]) -> Vec<InteractionEvent> {
    let mut earliest: HashMap<(&str, &str), usize> = HashMap::new();
    for (k, e) in events.iter().enumerate() {
        earliest
            .entry((e.learner_id.as_str(), e.item_id.as_str()))
            .and_modify(|best| {
                if e.timestamp < events[*best].timestamp {
                    *best = k;
                }
            })
            .or_insert(k);
    }
    let mut keep = vec![false; events.len()];
    for &k in earliest.values() {
        keep[k] = true;
    }
    events
        .iter()
        .zip(keep)
        .filter(|&(_, k)| k)
        .map(|(e, _)| e.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinResponseFilter {
    pub events: Vec<InteractionEvent>,
    pub removed_item_count: usize,
    pub kept_item_count: usize,
    /// Removed item ids, sorted.
    pub removed_items: Vec<String>,
}

/// Drops items answered by fewer than `threshold` distinct learners, along
/// with all their events. Items at exactly `threshold` are kept.
pub fn filter_min_responses(events: &[InteractionEvent], threshold: usize) -> Result<MinResponseFilter> {
    if threshold == 0 {
        return Err(Error::InvalidArgument(
            "minimum response threshold must be positive".into(),
        ));
    }
    let mut learners_per_item: HashMap<&str, HashSet<&str>> = HashMap::new();
    for e in events {
        learners_per_item
            .entry(e.item_id.as_str())
            .or_default()
            .insert(e.learner_id.as_str());
    }
    let kept: HashSet<&str> = learners_per_item
        .iter()
        .filter(|(_, learners)| learners.len() >= threshold)
        .map(|(&item, _)| item)
        .collect();
    let mut removed_items: Vec<String> = learners_per_item
        .keys()
        .filter(|item| !kept.contains(*item))
        .map(|s| (*s).to_owned())
        .collect();
    removed_items.sort();
    Ok(MinResponseFilter {
        events: events
            .iter()
            .filter(|e| kept.contains(e.item_id.as_str()))
            .cloned()
            .collect(),
        removed_item_count: removed_items.len(),
        kept_item_count: kept.len(),
        removed_items,
    })
}

/// One matrix entry per event. Events must already be reduced to one per
/// (learner, item) pair.
pub fn build_response_matrix(events: &[InteractionEvent]) -> Result<ResponseMatrix> {
    let mut builder = ResponseMatrix::builder();
    for e in events {
        builder.push(&e.learner_id, &e.item_id, e.correct)?;
    }
    Ok(builder.build())
}

// ---------------------------------------------------------------------------
// CSV / JSON

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn source_name(path: &Path) -> String {
    path.display().to_string()
}

struct Rows<R: Read> {
    reader: csv::Reader<R>,
    source_name: String,
}

struct Row<'a> {
    record: csv::StringRecord,
    header: &'a [String],
    source_name: &'a str,
}

impl Row<'_> {
    fn line(&self) -> u64 {
        self.record.position().map_or(0, |p| p.line())
    }

    fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            source_name: self.source_name.to_owned(),
            line: self.line(),
            column: self.header[column].clone(),
            message: message.into(),
        }
    }

    fn text(&self, column: usize) -> &str {
        &self.record[column]
    }

    fn id(&self, column: usize) -> Result<String> {
        let s = self.text(column);
        if s.is_empty() {
            return Err(self.error(column, "empty identifier"));
        }
        Ok(s.to_owned())
    }

    fn timestamp(&self, column: usize) -> Result<f64> {
        let s = self.text(column);
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
            Ok(v) => Err(self.error(column, format!("timestamp {v} must be finite and non-negative"))),
            Err(_) => Err(self.error(column, format!("`{s}` is not a decimal number"))),
        }
    }
}

impl<R: Read> Rows<R> {
    fn new(input: R, source_name: String, expected: &[String]) -> Result<(Self, Vec<String>)> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| csv_error(&source_name, e))?
            .iter()
            .map(str::to_owned)
            .collect();
        if header != expected {
            return Err(Error::Parse {
                source_name,
                line: 1,
                column: header.join(","),
                message: format!("expected header `{}`", expected.join(",")),
            });
        }
        Ok((Self { reader, source_name }, header))
    }

    fn for_each(&mut self, header: &[String], mut f: impl FnMut(&Row<'_>) -> Result<()>) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(true) => {
                    let row = Row {
                        record: record.clone(),
                        header,
                        source_name: &self.source_name,
                    };
                    f(&row)?;
                }
                Ok(false) => return Ok(()),
                Err(e) => return Err(csv_error(&self.source_name, e)),
            }
        }
    }
}

fn csv_error(source_name: &str, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(source_name, io),
        kind => Error::Parse {
            source_name: source_name.to_owned(),
            line,
            column: String::new(),
            message: format!("{kind:?}"),
        },
    }
}

fn owned(header: &[&str]) -> Vec<String> {
    header.iter().map(|s| (*s).to_owned()).collect()
}

/// Parses `events.csv`. Rejects malformed rows and repeated
/// (learner, item, timestamp) triples.
pub fn parse_events<R: Read>(input: R, source_name: &str) -> Result<Vec<InteractionEvent>> {
    let (mut rows, header) = Rows::new(input, source_name.to_owned(), &owned(&EVENTS_HEADER))?;
    let mut events = Vec::new();
    let mut seen: HashMap<(String, String, u64), u64> = HashMap::new();
    rows.for_each(&header, |row| {
        let learner_id = row.id(0)?;
        let item_id = row.id(1)?;
        let timestamp = row.timestamp(2)?;
        let correct = match row.text(3) {
            "0" => false,
            "1" => true,
            other => return Err(row.error(3, format!("expected 0 or 1, got `{other}`"))),
        };
        // +0.0 and -0.0 compare equal; normalise before hashing the bits
        let key = (learner_id.clone(), item_id.clone(), (timestamp + 0.0).to_bits());
        if let Some(&first_line) = seen.get(&key) {
            return Err(Error::DuplicateEvent {
                source_name: source_name.to_owned(),
                line: row.line(),
                first_line,
                learner_id,
                item_id,
                timestamp,
            });
        }
        seen.insert(key, row.line());
        events.push(InteractionEvent {
            learner_id,
            item_id,
            timestamp,
            correct,
        });
        Ok(())
    })?;
    Ok(events)
}

pub fn read_events(path: &Path) -> Result<Vec<InteractionEvent>> {
    parse_events(open(path)?, &source_name(path))
}

pub fn write_events<W: Write>(out: W, events: &[InteractionEvent]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    write_row(&mut w, EVENTS_HEADER)?;
    for e in events {
        write_row(
            &mut w,
            [
                e.learner_id.as_str(),
                e.item_id.as_str(),
                &e.timestamp.to_string(),
                if e.correct { "1" } else { "0" },
            ],
        )?;
    }
    flush(w)
}

pub fn parse_items<R: Read>(input: R, source_name: &str) -> Result<Vec<ItemMeta>> {
    let (mut rows, header) = Rows::new(input, source_name.to_owned(), &owned(&ITEMS_HEADER))?;
    let mut items = Vec::new();
    let mut seen = HashSet::new();
    rows.for_each(&header, |row| {
        let item_id = row.id(0)?;
        let kind: ItemKind = row.text(1).parse().map_err(|m: String| row.error(1, m))?;
        let passage_id = match (kind, row.text(2)) {
            (ItemKind::Passage, "") => return Err(row.error(2, "passage items need a passage_id")),
            (ItemKind::Passage, p) => Some(p.to_owned()),
            (ItemKind::Independent, "") => None,
            (ItemKind::Independent, _) => return Err(row.error(2, "independent items cannot carry a passage_id")),
        };
        let level = match row.text(3) {
            "" => None,
            s => Some(
                s.parse::<i64>()
                    .map_err(|_| row.error(3, format!("`{s}` is not an integer grade level")))?,
            ),
        };
        if !seen.insert(item_id.clone()) {
            return Err(row.error(0, format!("item {item_id} listed twice")));
        }
        items.push(ItemMeta {
            item_id,
            kind,
            passage_id,
            level,
        });
        Ok(())
    })?;
    Ok(items)
}

pub fn read_items(path: &Path) -> Result<Vec<ItemMeta>> {
    parse_items(open(path)?, &source_name(path))
}

pub fn write_items<W: Write>(out: W, items: &[ItemMeta]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    write_row(&mut w, ITEMS_HEADER)?;
    for item in items {
        write_row(
            &mut w,
            [
                item.item_id.clone(),
                item.kind.to_string(),
                item.passage_id.clone().unwrap_or_default(),
                item.level.map(|l| l.to_string()).unwrap_or_default(),
            ],
        )?;
    }
    flush(w)
}

pub fn parse_questionnaires<R: Read>(input: R, source_name: &str) -> Result<Vec<QuestionnaireAdministration>> {
    let (mut rows, header) = Rows::new(input, source_name.to_owned(), &questionnaire_header())?;
    let mut admins = Vec::new();
    rows.for_each(&header, |row| {
        let learner_id = row.id(0)?;
        let timestamp = row.timestamp(1)?;
        let mut ratings = Vec::with_capacity(RATING_COUNT);
        for column in 2..2 + RATING_COUNT {
            let s = row.text(column);
            match s.parse::<u8>() {
                Ok(r) if (LIKERT_MIN..=LIKERT_MAX).contains(&r) => ratings.push(r),
                _ => return Err(row.error(column, format!("expected an integer 1-10, got `{s}`"))),
            }
        }
        admins.push(QuestionnaireAdministration {
            learner_id,
            timestamp,
            ratings,
        });
        Ok(())
    })?;
    Ok(admins)
}

pub fn read_questionnaires(path: &Path) -> Result<Vec<QuestionnaireAdministration>> {
    parse_questionnaires(open(path)?, &source_name(path))
}

pub fn write_questionnaires<W: Write>(out: W, admins: &[QuestionnaireAdministration]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    write_row(&mut w, questionnaire_header())?;
    for a in admins {
        let mut row = vec![a.learner_id.clone(), a.timestamp.to_string()];
        row.extend(a.ratings.iter().map(u8::to_string));
        write_row(&mut w, row)?;
    }
    flush(w)
}

pub fn read_subscale_map(path: &Path) -> Result<SubscaleMap> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SubscaleMap::from_json(&text).map_err(|message| Error::Parse {
        source_name: source_name(path),
        line: 1,
        column: String::new(),
        message,
    })
}

pub(crate) fn write_row<W: Write, I, T>(w: &mut csv::Writer<W>, row: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| csv_error("<output>", e))
}

pub(crate) fn flush<W: Write>(w: csv::Writer<W>) -> Result<()> {
    w.into_inner()
        .map_err(|e| Error::io("<output>", std::io::Error::other(e.to_string())))?
        .flush()
        .map_err(|e| Error::io("<output>", e))
}
