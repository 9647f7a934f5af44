use std::collections::HashMap;

use crate::error::{Error, Result};

/// One observed response, by dense learner and item index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Response {
    pub learner: usize,
    pub item: usize,
    pub correct: bool,
}

/// Sparse binary learner x item correctness matrix.
///
/// Learner and item indices are assigned in order of first appearance. Every
/// indexed learner and item has at least one entry, and each
/// (learner, item) pair occurs at most once.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResponseMatrix {
    learners: Vec<String>,
    items: Vec<String>,
    learner_index: HashMap<String, usize>,
    item_index: HashMap<String, usize>,
    entries: Vec<Response>,
    by_learner: Vec<Vec<(usize, bool)>>,
    by_item: Vec<Vec<(usize, bool)>>,
}

impl ResponseMatrix {
    pub fn builder() -> MatrixBuilder {
        MatrixBuilder::default()
    }

    /// Builds a matrix from `(learner_id, item_id, correct)` triples.
    pub fn from_triples<L, I>(triples: impl IntoIterator<Item = (L, I, bool)>) -> Result<Self>
    where
        L: AsRef<str>,
        I: AsRef<str>,
    {
        let mut builder = MatrixBuilder::default();
        for (learner, item, correct) in triples {
            builder.push(learner.as_ref(), item.as_ref(), correct)?;
        }
        Ok(builder.build())
    }

    /// Builds a complete matrix from a dense row-major grid of responses.
    pub fn from_dense(learner_ids: &[String], item_ids: &[String], grid: &[Vec<bool>]) -> Result<Self> {
        if grid.len() != learner_ids.len() {
            return Err(Error::InconsistentInput(format!(
                "{} response rows for {} learners",
                grid.len(),
                learner_ids.len()
            )));
        }
        let mut builder = MatrixBuilder::default();
        for (learner, row) in learner_ids.iter().zip(grid) {
            if row.len() != item_ids.len() {
                return Err(Error::InconsistentInput(format!(
                    "learner {learner} has {} responses for {} items",
                    row.len(),
                    item_ids.len()
                )));
            }
            for (item, &correct) in item_ids.iter().zip(row) {
                builder.push(learner, item, correct)?;
            }
        }
        Ok(builder.build())
    }

    pub fn n_learners(&self) -> usize {
        self.learners.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn n_entries(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn learner_ids(&self) -> &[String] {
        &self.learners
    }

    pub fn item_ids(&self) -> &[String] {
        &self.items
    }

    pub fn learner_position(&self, learner_id: &str) -> Option<usize> {
        self.learner_index.get(learner_id).copied()
    }

    pub fn item_position(&self, item_id: &str) -> Option<usize> {
        self.item_index.get(item_id).copied()
    }

    /// Entries in insertion order.
    pub fn entries(&self) -> &[Response] {
        &self.entries
    }

    /// `(item, correct)` pairs answered by `learner`, in insertion order.
    pub fn learner_responses(&self, learner: usize) -> &[(usize, bool)] {
        &self.by_learner[learner]
    }

    /// `(learner, correct)` pairs recorded for `item`, in insertion order.
    pub fn item_responses(&self, item: usize) -> &[(usize, bool)] {
        &self.by_item[item]
    }

    pub fn get(&self, learner: usize, item: usize) -> Option<bool> {
        self.by_learner
            .get(learner)?
            .iter()
            .find(|&&(j, _)| j == item)
            .map(|&(_, x)| x)
    }

    /// Entries as `(learner_id, item_id, correct)` in insertion order.
    pub fn triples(&self) -> impl Iterator<Item = (&str, &str, bool)> + '_ {
        self.entries.iter().map(move |r| {
            (
                self.learners[r.learner].as_str(),
                self.items[r.item].as_str(),
                r.correct,
            )
        })
    }

    /// Keeps only the entries whose learner and item both pass the filters,
    /// re-indexing in first-appearance order.
    pub(crate) fn retain(&self, keep_learner: &[bool], keep_item: &[bool]) -> ResponseMatrix {
        let mut builder = MatrixBuilder::default();
        for r in &self.entries {
            if keep_learner[r.learner] && keep_item[r.item] {
                builder.push_unchecked(&self.learners[r.learner], &self.items[r.item], r.correct);
            }
        }
        builder.build()
    }
}

/// Incremental [`ResponseMatrix`] construction that rejects duplicate pairs.
#[derive(Debug, Clone, Default)]
pub struct MatrixBuilder {
    matrix: ResponseMatrix,
    seen: std::collections::HashSet<(usize, usize)>,
}

impl MatrixBuilder {
    pub fn push(&mut self, learner_id: &str, item_id: &str, correct: bool) -> Result<()> {
        let learner = self.learner_slot(learner_id);
        let item = self.item_slot(item_id);
        if !self.seen.insert((learner, item)) {
            return Err(Error::InconsistentInput(format!(
                "duplicate response for learner {learner_id} on item {item_id}"
            )));
        }
        self.record(learner, item, correct);
        Ok(())
    }

    fn push_unchecked(&mut self, learner_id: &str, item_id: &str, correct: bool) {
        let learner = self.learner_slot(learner_id);
        let item = self.item_slot(item_id);
        self.seen.insert((learner, item));
        self.record(learner, item, correct);
    }

    fn record(&mut self, learner: usize, item: usize, correct: bool) {
        let m = &mut self.matrix;
        m.entries.push(Response { learner, item, correct });
        m.by_learner[learner].push((item, correct));
        m.by_item[item].push((learner, correct));
    }

    fn learner_slot(&mut self, id: &str) -> usize {
        let m = &mut self.matrix;
        if let Some(&i) = m.learner_index.get(id) {
            return i;
        }
        let i = m.learners.len();
        m.learners.push(id.to_owned());
        m.learner_index.insert(id.to_owned(), i);
        m.by_learner.push(Vec::new());
        i
    }

    fn item_slot(&mut self, id: &str) -> usize {
        let m = &mut self.matrix;
        if let Some(&j) = m.item_index.get(id) {
            return j;
        }
        let j = m.items.len();
        m.items.push(id.to_owned());
        m.item_index.insert(id.to_owned(), j);
        m.by_item.push(Vec::new());
        j
    }

    pub fn len(&self) -> usize {
        self.matrix.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.entries.is_empty()
    }

    pub fn build(self) -> ResponseMatrix {
        self.matrix
    }
}
