//! Synthetic learners, item banks and adaptive sessions with known ground
//! truth.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Independent streams are selected with
//! `set_stream`: stream 0 draws the ability population, stream 1 the
//! calibration-bank responses, and stream `2 + i` learner `i`'s session.
//! Normal deviates use `rand_distr::Normal`. Outputs are therefore a pure
//! function of `(SimConfig, seed)` and do not depend on thread count.
//!
//! Session policy: the first `routing_item_count` items are served at
//! `routing_level`. Every answer, routing ones included, moves an adaptive
//! level up by `adaptation_step` after a correct response and down after an
//! incorrect one, clamped to `[b_min, b_max]`; after routing, items are
//! served at that level. Each served item is the not-yet-served bank item
//! nearest the level, ties going to the easier item. Items are answered
//! every `event_spacing_s` seconds and a questionnaire follows every
//! `administration_every` items, stamped with the time of the interval's
//! last answer.
//!
//! Questionnaire ratings use the default [`SubscaleMap`]. Intrinsic ratings
//! track the interval's mean served difficulty rescaled by the bank range,
//! extraneous ratings a per-learner constant, both plus `Normal(0, noise_sd)`
//! per rating; germane ratings are fixed at `germane_level`. A unit value `v`
//! becomes the rating `round(1 + 9 * clamp(v, 0, 1))`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{self, InteractionEvent, ItemKind, ItemMeta, QuestionnaireAdministration, Subscale, SubscaleMap};
use crate::irt::{logistic, ResponseMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_learners: usize,
    pub n_items: usize,
    pub theta_mean: f64,
    pub theta_sd: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub routing_item_count: usize,
    pub routing_level: f64,
    pub adaptation_step: f64,
    pub session_item_count: usize,
    pub administration_every: usize,
    pub noise_sd: f64,
    pub seed: u64,
    /// Learners in the calibration bank; each answers every item once.
    pub bank_learners: usize,
    pub event_spacing_s: f64,
    /// Per-learner extraneous load is drawn from `Normal(el_mean, el_sd)`
    /// and clamped to `[0, 1]`.
    pub el_mean: f64,
    pub el_sd: f64,
    pub germane_level: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_learners: 35,
            n_items: 300,
            theta_mean: 0.0,
            theta_sd: 1.0,
            b_min: -3.0,
            b_max: 3.0,
            routing_item_count: 20,
            routing_level: 1.5,
            adaptation_step: 0.25,
            session_item_count: 90,
            administration_every: 10,
            noise_sd: 0.05,
            seed: 42,
            bank_learners: 400,
            event_spacing_s: 30.0,
            el_mean: 0.5,
            el_sd: 0.15,
            germane_level: 0.75,
        }
    }
}

fn invalid(field: &str, message: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("{field}: {message}"))
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn unit(field: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(field, format!("must lie in [0, 1], got {v}")))
    }
}

impl SimConfig {
    /// Checks every field; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        if self.n_learners == 0 {
            return Err(invalid("n_learners", "must be positive"));
        }
        if self.n_items == 0 {
            return Err(invalid("n_items", "must be positive"));
        }
        if self.session_item_count == 0 {
            return Err(invalid("session_item_count", "must be positive"));
        }
        if self.administration_every == 0 {
            return Err(invalid("administration_every", "must be positive"));
        }
        for (field, v) in [
            ("theta_mean", self.theta_mean),
            ("theta_sd", self.theta_sd),
            ("b_min", self.b_min),
            ("b_max", self.b_max),
            ("routing_level", self.routing_level),
            ("adaptation_step", self.adaptation_step),
            ("noise_sd", self.noise_sd),
            ("event_spacing_s", self.event_spacing_s),
            ("el_sd", self.el_sd),
        ] {
            finite(field, v)?;
        }
        for (field, v) in [
            ("theta_sd", self.theta_sd),
            ("noise_sd", self.noise_sd),
            ("el_sd", self.el_sd),
        ] {
            if v < 0.0 {
                return Err(invalid(field, format!("must be non-negative, got {v}")));
            }
        }
        if self.b_min >= self.b_max {
            return Err(invalid(
                "b_min",
                format!("must be below b_max ({} >= {})", self.b_min, self.b_max),
            ));
        }
        if self.session_item_count < self.routing_item_count {
            return Err(invalid(
                "routing_item_count",
                format!(
                    "exceeds session_item_count ({} > {})",
                    self.routing_item_count, self.session_item_count
                ),
            ));
        }
        if self.adaptation_step <= 0.0 {
            return Err(invalid("adaptation_step", "must be positive"));
        }
        if self.event_spacing_s <= 0.0 {
            return Err(invalid("event_spacing_s", "must be positive"));
        }
        unit("el_mean", self.el_mean)?;
        unit("germane_level", self.germane_level)?;
        Ok(())
    }

    /// Time at which the last routing answer is given.
    pub fn routing_end_ts(&self) -> f64 {
        self.event_spacing_s * self.routing_item_count as f64
    }
}

/// Stream `stream` of the ChaCha8 generator seeded with `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const POPULATION_STREAM: u64 = 0;
const BANK_STREAM: u64 = 1;
const FIRST_SESSION_STREAM: u64 = 2;

fn padded(prefix: char, k: usize, count: usize) -> String {
    let width = count.to_string().len();
    format!("{prefix}{:0width$}", k + 1)
}

pub fn learner_id(i: usize, n: usize) -> String {
    padded('L', i, n)
}

pub fn bank_learner_id(i: usize, n: usize) -> String {
    padded('B', i, n)
}

pub fn item_id(j: usize, n: usize) -> String {
    padded('I', j, n)
}

/// Items ordered by ascending difficulty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemBank {
    pub item_ids: Vec<String>,
    pub b: Vec<f64>,
}

impl ItemBank {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub learner_ids: Vec<String>,
    pub thetas: Vec<f64>,
    pub bank: ItemBank,
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn equally_spaced(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![(lo + hi) / 2.0],
        _ => (0..n).map(|j| lo + (hi - lo) * j as f64 / (n - 1) as f64).collect(),
    }
}

pub fn sample_population(config: &SimConfig) -> Result<Population> {
    config.validate()?;
    let normal = Normal::new(config.theta_mean, config.theta_sd).map_err(|e| invalid("theta_sd", e))?;
    let mut rng = rng_stream(config.seed, POPULATION_STREAM);
    let thetas: Vec<f64> = (0..config.n_learners).map(|_| normal.sample(&mut rng)).collect();
    Ok(Population {
        learner_ids: (0..config.n_learners)
            .map(|i| learner_id(i, config.n_learners))
            .collect(),
        thetas,
        bank: ItemBank {
            item_ids: (0..config.n_items).map(|j| item_id(j, config.n_items)).collect(),
            b: equally_spaced(config.n_items, config.b_min, config.b_max),
        },
    })
}

fn response_grid(thetas: &[f64], true_b: &[f64], rng: &mut ChaCha8Rng) -> Result<Vec<Vec<bool>>> {
    if let Some(v) = thetas.iter().chain(true_b).find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite parameter {v}")));
    }
    Ok(thetas
        .iter()
        .map(|&theta| {
            true_b
                .iter()
                .map(|&b| rng.random::<f64>() < logistic(theta - b))
                .collect()
        })
        .collect())
}

/// Complete matrix of Rasch-distributed responses with generated ids
/// (`L..` learners, `I..` items).
pub fn simulate_responses(thetas: &[f64], true_b: &[f64], seed: u64) -> Result<ResponseMatrix> {
    let learners: Vec<String> = (0..thetas.len()).map(|i| learner_id(i, thetas.len())).collect();
    let items: Vec<String> = (0..true_b.len()).map(|j| item_id(j, true_b.len())).collect();
    simulate_responses_with_ids(&learners, thetas, &items, true_b, seed)
}

pub fn simulate_responses_with_ids(
    learner_ids: &[String],
    thetas: &[f64],
    item_ids: &[String],
    true_b: &[f64],
    seed: u64,
) -> Result<ResponseMatrix> {
    let mut rng = rng_stream(seed, BANK_STREAM);
    let grid = response_grid(thetas, true_b, &mut rng)?;
    ResponseMatrix::from_dense(learner_ids, item_ids, &grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdministrationTruth {
    pub timestamp: f64,
    pub mean_served_b: f64,
    /// Interval mean difficulty rescaled by the bank range to `[0, 1]`.
    pub intrinsic: f64,
    pub extraneous: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTruth {
    pub learner_id: String,
    pub theta: f64,
    /// Level each item was chosen for, per event.
    pub levels: Vec<f64>,
    /// True difficulty of the item served, per event.
    pub served_b: Vec<f64>,
    pub routing_end_ts: f64,
    /// The learner's extraneous-load constant before rating noise.
    pub extraneous_level: f64,
    pub administrations: Vec<AdministrationTruth>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub events: Vec<InteractionEvent>,
    pub administrations: Vec<QuestionnaireAdministration>,
    pub truth: SessionTruth,
}

/// Index of the unserved item nearest `level`; ties go to the lower b.
fn nearest_unserved(b: &[f64], served: &[bool], level: f64) -> Option<usize> {
    let split = b.partition_point(|&v| v < level);
    let below = (0..split).rev().find(|&k| !served[k]);
    let above = (split..b.len()).find(|&k| !served[k]);
    match (below, above) {
        (Some(lo), Some(hi)) => Some(if level - b[lo] <= b[hi] - level { lo } else { hi }),
        (lo, hi) => lo.or(hi),
    }
}

fn to_rating(v: f64) -> u8 {
    (1.0 + 9.0 * v.clamp(0.0, 1.0)).round() as u8
}

/// Simulates one adaptive session for a learner of ability `theta`.
pub fn simulate_session(
    learner_id: &str,
    theta: f64,
    bank: &ItemBank,
    config: &SimConfig,
    seed: u64,
) -> Result<Session> {
    config.validate()?;
    if config.session_item_count > bank.len() {
        return Err(Error::BankExhausted {
            needed: config.session_item_count,
            available: bank.len(),
        });
    }
    finite("theta", theta)?;
    let noise = Normal::new(0.0, config.noise_sd).map_err(|e| invalid("noise_sd", e))?;
    let el_dist = Normal::new(config.el_mean, config.el_sd).map_err(|e| invalid("el_sd", e))?;
    let map = SubscaleMap::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let extraneous_level = el_dist.sample(&mut rng).clamp(0.0, 1.0);
    let mut served = vec![false; bank.len()];
    let mut adaptive = config.routing_level.clamp(config.b_min, config.b_max);
    let mut truth = SessionTruth {
        learner_id: learner_id.to_owned(),
        theta,
        levels: Vec::with_capacity(config.session_item_count),
        served_b: Vec::with_capacity(config.session_item_count),
        routing_end_ts: config.routing_end_ts(),
        extraneous_level,
        administrations: Vec::new(),
    };
    let mut events = Vec::with_capacity(config.session_item_count);
    let mut administrations = Vec::new();
    let range = config.b_max - config.b_min;

    for k in 0..config.session_item_count {
        let level = if k < config.routing_item_count {
            config.routing_level
        } else {
            adaptive
        };
        let j = nearest_unserved(&bank.b, &served, level).ok_or(Error::BankExhausted {
            needed: config.session_item_count,
            available: bank.len(),
        })?;
        served[j] = true;
        let correct = rng.random::<f64>() < logistic(theta - bank.b[j]);
        let step = if correct {
            config.adaptation_step
        } else {
            -config.adaptation_step
        };
        adaptive = (adaptive + step).clamp(config.b_min, config.b_max);

        let timestamp = config.event_spacing_s * (k + 1) as f64;
        truth.levels.push(level);
        truth.served_b.push(bank.b[j]);
        events.push(InteractionEvent {
            learner_id: learner_id.to_owned(),
            item_id: bank.item_ids[j].clone(),
            timestamp,
            correct,
        });

        if (k + 1) % config.administration_every == 0 {
            let interval = &truth.served_b[k + 1 - config.administration_every..=k];
            let mean_served_b = interval.iter().sum::<f64>() / interval.len() as f64;
            let intrinsic = ((mean_served_b - config.b_min) / range).clamp(0.0, 1.0);
            let ratings = map
                .positions()
                .iter()
                .map(|s| match s {
                    Subscale::Intrinsic => to_rating(intrinsic + noise.sample(&mut rng)),
                    Subscale::Extraneous => to_rating(extraneous_level + noise.sample(&mut rng)),
                    Subscale::Germane => to_rating(config.germane_level),
                })
                .collect();
            administrations.push(QuestionnaireAdministration::new(learner_id, timestamp, ratings)?);
            truth.administrations.push(AdministrationTruth {
                timestamp,
                mean_served_b,
                intrinsic,
                extraneous: extraneous_level,
            });
        }
    }
    Ok(Session {
        events,
        administrations,
        truth,
    })
}

/// Session seed of learner `index`: the first word of its ChaCha stream.
pub fn session_seed(seed: u64, index: usize) -> u64 {
    rng_stream(seed, FIRST_SESSION_STREAM + index as u64).random()
}

/// Everything a simulated study produces.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub config: SimConfig,
    pub population: Population,
    pub items: Vec<ItemMeta>,
    /// Complete calibration dataset, absent when `bank_learners` is zero.
    pub bank_responses: Option<ResponseMatrix>,
    pub sessions: Vec<Session>,
}

impl Study {
    pub fn events(&self) -> Vec<InteractionEvent> {
        self.sessions.iter().flat_map(|s| s.events.iter().cloned()).collect()
    }

    pub fn administrations(&self) -> Vec<QuestionnaireAdministration> {
        self.sessions
            .iter()
            .flat_map(|s| s.administrations.iter().cloned())
            .collect()
    }

    /// Bank responses as events: each bank learner answers items in bank
    /// order, one every `event_spacing_s` seconds.
    pub fn bank_events(&self) -> Vec<InteractionEvent> {
        let Some(m) = &self.bank_responses else {
            return Vec::new();
        };
        let spacing = self.config.event_spacing_s;
        (0..m.n_learners())
            .flat_map(|i| {
                m.learner_responses(i)
                    .iter()
                    .enumerate()
                    .map(move |(k, &(j, correct))| InteractionEvent {
                        learner_id: m.learner_ids()[i].clone(),
                        item_id: m.item_ids()[j].clone(),
                        timestamp: spacing * (k + 1) as f64,
                        correct,
                    })
            })
            .collect()
    }

    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            theta: self
                .population
                .learner_ids
                .iter()
                .cloned()
                .zip(self.population.thetas.iter().copied())
                .collect(),
            b: self
                .population
                .bank
                .item_ids
                .iter()
                .cloned()
                .zip(self.population.bank.b.iter().copied())
                .collect(),
            routing_end_ts: self
                .sessions
                .iter()
                .map(|s| (s.truth.learner_id.clone(), s.truth.routing_end_ts))
                .collect(),
            config: self.config.clone(),
            seed: self.config.seed,
        }
    }
}

/// Runs the whole simulation: population, calibration bank and one session
/// per learner. Sessions run in parallel and are merged in learner order.
pub fn simulate_study(config: &SimConfig) -> Result<Study> {
    let population = sample_population(config)?;
    let bank = &population.bank;

    let bank_responses = if config.bank_learners > 0 {
        let normal = Normal::new(config.theta_mean, config.theta_sd).map_err(|e| invalid("theta_sd", e))?;
        let mut rng = rng_stream(config.seed, BANK_STREAM);
        let thetas: Vec<f64> = (0..config.bank_learners).map(|_| normal.sample(&mut rng)).collect();
        let ids: Vec<String> = (0..config.bank_learners)
            .map(|i| bank_learner_id(i, config.bank_learners))
            .collect();
        let grid = response_grid(&thetas, &bank.b, &mut rng)?;
        Some(ResponseMatrix::from_dense(&ids, &bank.item_ids, &grid)?)
    } else {
        None
    };

    let sessions = population
        .learner_ids
        .par_iter()
        .zip(&population.thetas)
        .enumerate()
        .map(|(i, (id, &theta))| simulate_session(id, theta, bank, config, session_seed(config.seed, i)))
        .collect::<Result<Vec<_>>>()?;

    let items = bank
        .item_ids
        .iter()
        .map(|id| ItemMeta {
            item_id: id.clone(),
            kind: ItemKind::Independent,
            passage_id: None,
            level: None,
        })
        .collect();

    Ok(Study {
        config: config.clone(),
        population,
        items,
        bank_responses,
        sessions,
    })
}

/// Contents of `ground_truth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub theta: BTreeMap<String, f64>,
    pub b: BTreeMap<String, f64>,
    pub routing_end_ts: BTreeMap<String, f64>,
    pub config: SimConfig,
    pub seed: u64,
}

impl GroundTruth {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_owned(),
            source,
        })
    }
}

pub const EVENTS_FILE: &str = "events.csv";
pub const BANK_EVENTS_FILE: &str = "bank_events.csv";
pub const ITEMS_FILE: &str = "items.csv";
pub const QUESTIONNAIRES_FILE: &str = "questionnaires.csv";
pub const SUBSCALE_MAP_FILE: &str = "subscale_map.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

fn write_file(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Writes the study as a fixture directory in the ingest schemas plus
/// `ground_truth.json`.
pub fn emit_fixture(study: &Study, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_file(&dir.join(EVENTS_FILE), |w| ingest::write_events(w, &study.events()))?;
    if study.bank_responses.is_some() {
        write_file(&dir.join(BANK_EVENTS_FILE), |w| {
            ingest::write_events(w, &study.bank_events())
        })?;
    }
    write_file(&dir.join(ITEMS_FILE), |w| ingest::write_items(w, &study.items))?;
    write_file(&dir.join(QUESTIONNAIRES_FILE), |w| {
        ingest::write_questionnaires(w, &study.administrations())
    })?;
    write_file(&dir.join(SUBSCALE_MAP_FILE), |w| {
        w.extend_from_slice(SubscaleMap::default().to_json().as_bytes());
        Ok(())
    })?;
    write_file(&dir.join(GROUND_TRUTH_FILE), |w| {
        let path = dir.join(GROUND_TRUTH_FILE);
        serde_json::to_writer_pretty(&mut *w, &study.ground_truth()).map_err(|source| Error::Json { path, source })?;
        w.push(b'\n');
        Ok(())
    })
}
