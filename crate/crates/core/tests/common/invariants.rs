//! Property suites for the invariants of every module, runnable both as
//! ordinary tests and from the acceptance harness.
//!
//! Each suite drives a deterministic proptest runner so failures reproduce.

use std::collections::{BTreeMap, HashMap, HashSet};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestError, TestRng, TestRunner};

use cogload::ingest::{self, InteractionEvent, QuestionnaireAdministration, Subscale, SubscaleMap, RATING_COUNT};
use cogload::irt::{self, calibrate_jml, log_likelihood, rasch_probability, CalibrationConfig, ResponseMatrix};
use cogload::proxy::{self, ProxyRecord};
use cogload::report::{svg, tables};
use cogload::segmenting::{self, build_segments};
use cogload::simgen::{self, SimConfig};

use super::max_gradient_error;

/// Cases for the suites the invariant list requires at 200 or more.
pub const REQUIRED_CASES: u32 = 256;

#[derive(Debug)]
pub struct Outcome {
    pub name: &'static str,
    pub cases: u32,
    pub result: Result<(), String>,
}

fn run<S: Strategy>(
    name: &'static str,
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Outcome
where
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    let mut runner = TestRunner::new_with_rng(config, rng);
    let result = runner.run(&strategy, test).map_err(|e| match e {
        TestError::Fail(reason, value) => format!("{reason} for input {value:?}"),
        TestError::Abort(reason) => format!("aborted: {reason}"),
    });
    Outcome { name, cases, result }
}

fn approx(a: f64, b: f64, tol: f64) -> Result<(), TestCaseError> {
    prop_assert!((a - b).abs() <= tol, "{} vs {} (tol {})", a, b, tol);
    Ok(())
}

// ---------------------------------------------------------------- strategies

/// Sparse response grid: `None` cells are missing.
fn response_grid(max_learners: usize, max_items: usize) -> impl Strategy<Value = Vec<Vec<Option<bool>>>> {
    (1..=max_learners, 1..=max_items).prop_flat_map(|(n, m)| {
        prop::collection::vec(prop::collection::vec(prop::option::weighted(0.8, any::<bool>()), m), n)
    })
}

fn grid_matrix(grid: &[Vec<Option<bool>>]) -> ResponseMatrix {
    let mut triples = Vec::new();
    for (i, row) in grid.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Some(x) = cell {
                triples.push((format!("L{i}"), format!("I{j}"), *x));
            }
        }
    }
    ResponseMatrix::from_triples(triples).unwrap()
}

fn matrix_with_parameters() -> impl Strategy<Value = (Vec<Vec<Option<bool>>>, Vec<f64>, Vec<f64>)> {
    response_grid(10, 10).prop_flat_map(|grid| {
        let (n, m) = (grid.len(), grid[0].len());
        (
            Just(grid),
            prop::collection::vec(-4.0..4.0f64, n),
            prop::collection::vec(-4.0..4.0f64, m),
        )
    })
}

/// Parameters for the learners and items actually present in `matrix`,
/// looked up by the original grid position encoded in each id.
fn present(matrix: &ResponseMatrix, theta: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let pos = |id: &str| id[1..].parse::<usize>().unwrap();
    (
        matrix.learner_ids().iter().map(|id| theta[pos(id)]).collect(),
        matrix.item_ids().iter().map(|id| b[pos(id)]).collect(),
    )
}

fn events_strategy(max_len: usize) -> impl Strategy<Value = Vec<InteractionEvent>> {
    prop::collection::vec((0..4usize, 0..5usize, 0..40u32, any::<bool>()), 0..max_len).prop_map(|raw| {
        raw.into_iter()
            .map(|(l, i, t, c)| InteractionEvent {
                learner_id: format!("L{l}"),
                item_id: format!("I{i}"),
                timestamp: f64::from(t) / 2.0,
                correct: c,
            })
            .collect()
    })
}

/// Events with one distinct item per event and unique timestamps per
/// learner, plus strictly increasing administration times per learner.
fn session_strategy() -> impl Strategy<Value = (Vec<InteractionEvent>, Vec<QuestionnaireAdministration>)> {
    let events = prop::collection::btree_set((0..5usize, 0..200u32), 0..60);
    let admins = prop::collection::btree_set((0..5usize, 0..220u32), 0..15);
    (events, admins).prop_map(|(events, admins)| {
        let events = events
            .into_iter()
            .enumerate()
            .map(|(k, (l, t))| InteractionEvent {
                learner_id: format!("L{l}"),
                item_id: format!("I{k}"),
                timestamp: f64::from(t),
                correct: k % 3 == 0,
            })
            .collect();
        let admins = admins
            .into_iter()
            .map(|(l, t)| {
                QuestionnaireAdministration::new(format!("L{l}"), f64::from(t), vec![5; RATING_COUNT]).unwrap()
            })
            .collect();
        (events, admins)
    })
}

fn subscale_map_strategy() -> impl Strategy<Value = SubscaleMap> {
    prop::collection::vec(0..3u8, RATING_COUNT)
        .prop_filter("every subscale needs a position", |v| (0..3).all(|s| v.contains(&s)))
        .prop_map(|v| {
            SubscaleMap::new(
                v.into_iter()
                    .map(|s| match s {
                        0 => Subscale::Intrinsic,
                        1 => Subscale::Extraneous,
                        _ => Subscale::Germane,
                    })
                    .collect(),
            )
            .unwrap()
        })
}

fn record_strategy() -> impl Strategy<Value = Vec<ProxyRecord>> {
    prop::collection::btree_map((0..6usize, 1..6usize), prop::collection::vec(0.0..=1.0f64, 4), 1..30).prop_map(|m| {
        m.into_iter()
            .map(|((l, k), v)| {
                let (raw, std) = proxy::combined_load(v[0], v[1]).unwrap();
                ProxyRecord {
                    learner_id: format!("L{l}"),
                    administration_index: k,
                    diff_std: v[0],
                    el_std: v[1],
                    combined_raw: raw,
                    combined_std: std,
                    il_reported: v[2],
                    cl_reported: v[3],
                }
            })
            .collect()
    })
}

// -------------------------------------------------------------------- irt

pub fn complement_symmetry(cases: u32) -> Outcome {
    run(
        "complement symmetry",
        cases,
        (-60.0..60.0f64, -60.0..60.0f64),
        |(theta, b)| {
            let p = rasch_probability(theta, b).unwrap();
            let q = rasch_probability(b, theta).unwrap();
            approx(p, 1.0 - q, 1e-15)
        },
    )
}

pub fn translation_invariance(cases: u32) -> Outcome {
    run(
        "translation invariance",
        cases,
        (matrix_with_parameters(), -10.0..10.0f64),
        |((grid, theta, b), c)| {
            let m = grid_matrix(&grid);
            prop_assume!(!m.is_empty());
            let (t, d) = present(&m, &theta, &b);
            let base = log_likelihood(&m, &t, &d).unwrap();
            let ts: Vec<f64> = t.iter().map(|x| x + c).collect();
            let ds: Vec<f64> = d.iter().map(|x| x + c).collect();
            let shifted = log_likelihood(&m, &ts, &ds).unwrap();
            approx(base, shifted, 1e-12 * base.abs().max(1.0))
        },
    )
}

pub fn probability_monotone_in_difficulty(cases: u32) -> Outcome {
    run(
        "probability decreases in b",
        cases,
        (-15.0..15.0f64, -15.0..15.0f64, 1e-6..5.0f64),
        |(theta, b, delta)| {
            let lo = rasch_probability(theta, b).unwrap();
            let hi = rasch_probability(theta, b + delta).unwrap();
            prop_assert!(hi < lo, "P({theta}, {}) = {hi} >= P({theta}, {b}) = {lo}", b + delta);
            Ok(())
        },
    )
}

pub fn gradient_matches_finite_differences(cases: u32) -> Outcome {
    run(
        "gradient vs finite differences",
        cases,
        matrix_with_parameters(),
        |(grid, theta, b)| {
            let m = grid_matrix(&grid);
            prop_assume!(!m.is_empty());
            let (t, d) = present(&m, &theta, &b);
            let err = max_gradient_error(&m, &t, &d, 1e-5);
            prop_assert!(err <= 1e-6, "relative error {err}");
            Ok(())
        },
    )
}

pub fn calibration_ascends(cases: u32) -> Outcome {
    run("calibration ascent", cases, response_grid(8, 8), |grid| {
        let m = grid_matrix(&grid);
        let result = match calibrate_jml(&m, &CalibrationConfig::default()) {
            Ok(r) => r,
            Err(cogload::Error::EmptyAfterReduction) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        // Recentering is exact in real arithmetic but may move the final
        // value by rounding.
        let slack = 1e-12 * result.initial_log_likelihood.abs();
        prop_assert!(result.final_log_likelihood >= result.initial_log_likelihood - slack);
        for w in result.log_likelihood_trace.windows(2) {
            prop_assert!(w[1] >= w[0], "trace decreased: {:?}", result.log_likelihood_trace);
        }
        let mean_b = result.items.iter().map(|p| p.b).sum::<f64>() / result.items.len() as f64;
        approx(mean_b, 0.0, 1e-9)
    })
}

pub fn calibration_independent_of_thread_count(cases: u32) -> Outcome {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    run(
        "calibration determinism across pools",
        cases,
        response_grid(12, 12),
        move |grid| {
            let m = grid_matrix(&grid);
            let cfg = CalibrationConfig::default();
            let a = single.install(|| calibrate_jml(&m, &cfg));
            let b = many.install(|| calibrate_jml(&m, &cfg));
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    let bits = |r: &irt::CalibrationResult| -> Vec<u64> {
                        r.items
                            .iter()
                            .map(|p| p.b.to_bits())
                            .chain(r.abilities.iter().map(|a| a.theta.to_bits()))
                            .chain(r.standard_errors.iter().map(|s| s.to_bits()))
                            .collect()
                    };
                    prop_assert_eq!(bits(&a), bits(&b));
                    prop_assert_eq!(a, b);
                }
                (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
                (a, b) => prop_assert!(false, "outcomes differ: {:?} vs {:?}", a.is_ok(), b.is_ok()),
            }
            Ok(())
        },
    )
}

// ----------------------------------------------------------------- ingest

pub fn first_attempt_idempotence(cases: u32) -> Outcome {
    run("first-attempt idempotence", cases, events_strategy(60), |events| {
        let once = ingest::first_attempts(&events);
        let twice = ingest::first_attempts(&once);
        prop_assert_eq!(&once, &twice);
        let mut earliest: HashMap<(&str, &str), f64> = HashMap::new();
        for e in &events {
            let t = earliest.entry((&e.learner_id, &e.item_id)).or_insert(e.timestamp);
            *t = t.min(e.timestamp);
        }
        prop_assert_eq!(once.len(), earliest.len());
        for e in &once {
            prop_assert_eq!(e.timestamp, earliest[&(e.learner_id.as_str(), e.item_id.as_str())]);
        }
        Ok(())
    })
}

pub fn filter_conserves_items(cases: u32) -> Outcome {
    run(
        "minimum-response filter conservation",
        cases,
        (events_strategy(60), 1..6usize),
        |(events, threshold)| {
            let events = ingest::first_attempts(&events);
            let f = ingest::filter_min_responses(&events, threshold).unwrap();
            let distinct: HashSet<&str> = events.iter().map(|e| e.item_id.as_str()).collect();
            prop_assert_eq!(f.removed_item_count + f.kept_item_count, distinct.len());
            let kept: HashSet<&str> = f.events.iter().map(|e| e.item_id.as_str()).collect();
            let expected: Vec<&InteractionEvent> =
                events.iter().filter(|e| kept.contains(e.item_id.as_str())).collect();
            prop_assert_eq!(f.events.iter().collect::<Vec<_>>(), expected);
            for item in &f.removed_items {
                let n: HashSet<&str> = events
                    .iter()
                    .filter(|e| &e.item_id == item)
                    .map(|e| e.learner_id.as_str())
                    .collect();
                prop_assert!(n.len() < threshold);
            }
            Ok(())
        },
    )
}

pub fn score_permutation_invariance(cases: u32) -> Outcome {
    let strategy = (
        subscale_map_strategy(),
        prop::collection::vec(1..=10u8, RATING_COUNT),
        any::<u64>(),
    );
    run(
        "questionnaire scores ignore order within a subscale",
        cases,
        strategy,
        |(map, ratings, salt)| {
            let admin = QuestionnaireAdministration::new("L", 0.0, ratings.clone()).unwrap();
            let base = ingest::score_questionnaire(&admin, &map).unwrap();
            // Rotate ratings among the positions of each subscale.
            let mut permuted = ratings.clone();
            for s in [Subscale::Intrinsic, Subscale::Extraneous, Subscale::Germane] {
                let pos: Vec<usize> = (0..RATING_COUNT).filter(|&k| map.positions()[k] == s).collect();
                let shift = (salt as usize) % pos.len();
                for (k, &p) in pos.iter().enumerate() {
                    permuted[p] = ratings[pos[(k + shift) % pos.len()]];
                }
            }
            let admin = QuestionnaireAdministration::new("L", 0.0, permuted).unwrap();
            let other = ingest::score_questionnaire(&admin, &map).unwrap();
            approx(base.intrinsic, other.intrinsic, 1e-12)?;
            approx(base.extraneous, other.extraneous, 1e-12)?;
            approx(base.germane, other.germane, 1e-12)?;
            approx(base.overall, other.overall, 1e-12)
        },
    )
}

pub fn csv_round_trip(cases: u32) -> Outcome {
    let strategy = (
        prop::collection::vec((0..50usize, 0..50usize, 0.0..1e7f64, any::<bool>()), 0..30),
        prop::collection::vec(
            (0..50usize, 0.0..1e5f64, prop::collection::vec(1..=10u8, RATING_COUNT)),
            0..10,
        ),
    );
    run(
        "parse -> serialize -> parse identity",
        cases,
        strategy,
        |(raw_events, raw_admins)| {
            let events: Vec<InteractionEvent> = raw_events
                .into_iter()
                .map(|(l, i, t, c)| InteractionEvent {
                    learner_id: format!("L{l}"),
                    item_id: format!("item {i}, \"quoted\""),
                    timestamp: t,
                    correct: c,
                })
                .collect();
            let mut buf = Vec::new();
            ingest::write_events(&mut buf, &events).unwrap();
            let parsed = ingest::parse_events(buf.as_slice(), "events").unwrap();
            prop_assert_eq!(&parsed, &events);
            let mut again = Vec::new();
            ingest::write_events(&mut again, &parsed).unwrap();
            prop_assert_eq!(&buf, &again);

            let admins: Vec<QuestionnaireAdministration> = raw_admins
                .into_iter()
                .map(|(l, t, r)| QuestionnaireAdministration::new(format!("L{l}"), t, r).unwrap())
                .collect();
            let mut buf = Vec::new();
            ingest::write_questionnaires(&mut buf, &admins).unwrap();
            prop_assert_eq!(ingest::parse_questionnaires(buf.as_slice(), "q").unwrap(), admins);
            Ok(())
        },
    )
}

// ------------------------------------------------------------- segmenting

pub fn segment_partition(cases: u32) -> Outcome {
    run("segment partition", cases, session_strategy(), |(events, admins)| {
        let seg = build_segments(&events, &admins).unwrap();
        let mut times: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for a in &admins {
            times.entry(&a.learner_id).or_default().push(a.timestamp);
        }
        let mut seen = 0usize;
        for e in &events {
            let in_segments: Vec<_> = seg.segments.iter().filter(|s| s.events.contains(e)).collect();
            let in_unassigned = seg.unassigned.iter().filter(|u| *u == e).count();
            let last = times.get(e.learner_id.as_str()).and_then(|t| t.last()).copied();
            match last {
                Some(last) if e.timestamp <= last => {
                    prop_assert_eq!(in_segments.len(), 1, "event {:?}", e);
                    prop_assert_eq!(in_unassigned, 0);
                    let s = in_segments[0];
                    prop_assert_eq!(&s.learner_id, &e.learner_id);
                    let first = s.administration_index == 1;
                    prop_assert!(e.timestamp <= s.end_ts);
                    prop_assert!(e.timestamp > s.start_ts || (first && e.timestamp == 0.0 && s.start_ts == 0.0));
                    seen += 1;
                }
                _ => {
                    prop_assert!(in_segments.is_empty());
                    prop_assert_eq!(in_unassigned, 1);
                }
            }
        }
        let total: usize = seg.segments.iter().map(|s| s.n_items()).sum();
        prop_assert_eq!(total, seen);
        prop_assert_eq!(seg.segments.len(), admins.len());
        Ok(())
    })
}

pub fn segment_mean_matches_brute_force(cases: u32) -> Outcome {
    let strategy = (
        session_strategy(),
        prop::collection::vec(prop::option::weighted(0.7, -3.0..3.0f64), 60),
    );
    run(
        "segment mean difficulty vs brute force",
        cases,
        strategy,
        |((events, admins), bs)| {
            let difficulties: HashMap<String, f64> =
                (0..60).filter_map(|k| bs[k].map(|b| (format!("I{k}"), b))).collect();
            let seg = build_segments(&events, &admins).unwrap();
            for s in &seg.segments {
                // Independent selection from the raw event list.
                let mut members: Vec<&InteractionEvent> = events
                    .iter()
                    .filter(|e| {
                        e.learner_id == s.learner_id
                            && e.timestamp <= s.end_ts
                            && (e.timestamp > s.start_ts || (s.administration_index == 1 && e.timestamp == 0.0))
                    })
                    .collect();
                members.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
                let mapped: Vec<f64> = members
                    .iter()
                    .filter_map(|e| difficulties.get(&e.item_id).copied())
                    .collect();
                match segmenting::segment_mean_difficulty(s, &difficulties) {
                    Ok(d) => {
                        let mut sum = 0.0;
                        for b in &mapped {
                            sum += b;
                        }
                        prop_assert_eq!(d.mean_b, sum / mapped.len() as f64);
                        prop_assert_eq!(d.n_mapped, mapped.len());
                        prop_assert_eq!(d.n_unmapped, members.len() - mapped.len());
                    }
                    Err(cogload::Error::UndefinedDifficulty { .. }) => prop_assert!(mapped.is_empty()),
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                }
            }
            Ok(())
        },
    )
}

pub fn segments_ignore_event_order(cases: u32) -> Outcome {
    let strategy = session_strategy().prop_flat_map(|(events, admins)| {
        let shuffled = Just(events.clone()).prop_shuffle();
        (Just(events), shuffled, Just(admins))
    });
    run(
        "segments invariant under event shuffling",
        cases,
        strategy,
        |(events, shuffled, admins)| {
            let a = build_segments(&events, &admins).unwrap();
            let b = build_segments(&shuffled, &admins).unwrap();
            prop_assert_eq!(a.segments, b.segments);
            let key = |v: &[InteractionEvent]| {
                let mut k: Vec<String> = v.iter().map(|e| format!("{}/{}", e.learner_id, e.item_id)).collect();
                k.sort();
                k
            };
            prop_assert_eq!(key(&a.unassigned), key(&b.unassigned));
            Ok(())
        },
    )
}

// ------------------------------------------------------------------ proxy

pub fn standardization_preserves_order(cases: u32) -> Outcome {
    let strategy = (
        prop::collection::vec(-1000..1000i32, 1..40),
        prop::collection::vec(-1e6..1e6f64, 1..40),
    );
    run(
        "standardization order preservation",
        cases,
        strategy,
        |(ints, floats)| {
            let argsort = |v: &[f64]| {
                let mut idx: Vec<usize> = (0..v.len()).collect();
                idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b)));
                idx
            };
            let x: Vec<f64> = ints.iter().map(|&k| f64::from(k)).collect();
            let y = proxy::minmax_standardize(&x).unwrap().values;
            prop_assert_eq!(argsort(&x), argsort(&y));
            let y = proxy::minmax_standardize(&floats).unwrap().values;
            for i in 0..floats.len() {
                prop_assert!((0.0..=1.0).contains(&y[i]));
                for j in 0..floats.len() {
                    if floats[i] < floats[j] {
                        prop_assert!(y[i] <= y[j]);
                    }
                    if floats[i] == floats[j] {
                        prop_assert_eq!(y[i], y[j]);
                    }
                }
            }
            Ok(())
        },
    )
}

pub fn standardization_idempotent(cases: u32) -> Outcome {
    let strategy = prop::collection::vec(0.0..=1.0f64, 0..30).prop_flat_map(|mut v| {
        v.push(0.0);
        v.push(1.0);
        Just(v).prop_shuffle()
    });
    run("standardization idempotent on unit series", cases, strategy, |v| {
        let y = proxy::minmax_standardize(&v).unwrap().values;
        prop_assert_eq!(y, v);
        Ok(())
    })
}

pub fn combined_load_symmetric_monotone(cases: u32) -> Outcome {
    let strategy = (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64);
    run(
        "combined load symmetry and monotonicity",
        cases,
        strategy,
        |(a, b, c)| {
            prop_assert_eq!(proxy::combined_load(a, b).unwrap(), proxy::combined_load(b, a).unwrap());
            let (lo, hi) = (a.min(c), a.max(c));
            let (raw_lo, std_lo) = proxy::combined_load(lo, b).unwrap();
            let (raw_hi, std_hi) = proxy::combined_load(hi, b).unwrap();
            prop_assert!(raw_lo <= raw_hi && std_lo <= std_hi);
            Ok(())
        },
    )
}

pub fn learner_rows_ignore_record_order(cases: u32) -> Outcome {
    let strategy = record_strategy().prop_flat_map(|r| (Just(r.clone()), Just(r).prop_shuffle()));
    run(
        "learner rows invariant under shuffling",
        cases,
        strategy,
        |(records, shuffled)| {
            prop_assert_eq!(proxy::learner_rows(&records), proxy::learner_rows(&shuffled));
            prop_assert_eq!(proxy::trend_series(&records), proxy::trend_series(&shuffled));
            Ok(())
        },
    )
}

pub fn alignment_symmetric(cases: u32) -> Outcome {
    let strategy = (2..40usize).prop_flat_map(|n| {
        (
            prop::collection::vec(prop_oneof![-5.0..5.0f64, Just(1.0)], n),
            prop::collection::vec(prop_oneof![-5.0..5.0f64, Just(1.0)], n),
        )
    });
    run("alignment symmetry", cases, strategy, |(a, b)| {
        let ab = proxy::alignment_stats(&a, &b).unwrap();
        let ba = proxy::alignment_stats(&b, &a).unwrap();
        prop_assert_eq!(ab, ba);
        for r in [ab.pearson_r, ab.spearman_rho].into_iter().flatten() {
            prop_assert!((-1.0..=1.0).contains(&r));
        }
        Ok(())
    })
}

// ----------------------------------------------------------------- simgen

fn small_config() -> impl Strategy<Value = SimConfig> {
    (1..6usize, 10..40usize, 0..4usize, 1..6usize, any::<u64>(), -2.0..2.0f64).prop_map(
        |(n_learners, n_items, routing, every, seed, routing_level)| {
            let session = n_items / 2;
            SimConfig {
                n_learners,
                n_items,
                session_item_count: session,
                routing_item_count: routing.min(session),
                administration_every: every,
                routing_level,
                bank_learners: 3,
                seed,
                ..SimConfig::default()
            }
        },
    )
}

pub fn simulation_deterministic(cases: u32) -> Outcome {
    run(
        "simulation determinism and bank coverage",
        cases,
        small_config(),
        |cfg| {
            let a = simgen::simulate_study(&cfg).unwrap();
            let b = simgen::simulate_study(&cfg).unwrap();
            prop_assert_eq!(&a, &b);
            let bank: HashSet<&str> = a.population.bank.item_ids.iter().map(String::as_str).collect();
            for e in a.events().iter().chain(&a.bank_events()) {
                prop_assert!(bank.contains(e.item_id.as_str()));
            }
            for s in &a.sessions {
                for &level in &s.truth.levels[..cfg.routing_item_count] {
                    prop_assert_eq!(level, cfg.routing_level);
                }
                prop_assert_eq!(
                    s.administrations.len(),
                    cfg.session_item_count / cfg.administration_every
                );
            }
            Ok(())
        },
    )
}

// ----------------------------------------------------------------- report

pub fn proxy_table_closed_loop(cases: u32) -> Outcome {
    run(
        "proxy and trend CSV closed loop; one rect per heatmap cell",
        cases,
        record_strategy(),
        |records| {
            let mut buf = Vec::new();
            tables::write_proxy(&mut buf, &records).unwrap();
            prop_assert_eq!(tables::parse_proxy(buf.as_slice(), "proxy").unwrap(), records.clone());
            let trends = proxy::trend_series(&records);
            let mut buf = Vec::new();
            tables::write_trends(&mut buf, &trends).unwrap();
            let parsed = tables::parse_trends(buf.as_slice(), "trends").unwrap();
            prop_assert_eq!(parsed.len(), trends.len());
            for (p, t) in parsed.iter().zip(&trends) {
                prop_assert_eq!(p.administration_index, t.administration_index);
                prop_assert_eq!(p.means.diff_std, t.means.diff_std);
                prop_assert_eq!(p.means.cl_reported, t.means.cl_reported);
            }
            let rows = proxy::learner_rows(&records);
            let doc = svg::heatmap_svg(&rows);
            prop_assert_eq!(doc.matches("<rect ").count(), svg::HEATMAP_MEASURES.len() * rows.len());
            prop_assert_eq!(doc.clone(), svg::heatmap_svg(&rows));
            Ok(())
        },
    )
}

/// Every suite, in module order.
pub fn all(cases: u32) -> Vec<Outcome> {
    vec![
        complement_symmetry(cases),
        translation_invariance(cases),
        probability_monotone_in_difficulty(cases),
        gradient_matches_finite_differences(cases),
        calibration_ascends(cases),
        calibration_independent_of_thread_count(cases / 4),
        first_attempt_idempotence(cases),
        filter_conserves_items(cases),
        score_permutation_invariance(cases),
        csv_round_trip(cases),
        segment_partition(cases),
        segment_mean_matches_brute_force(cases),
        segments_ignore_event_order(cases),
        standardization_preserves_order(cases),
        standardization_idempotent(cases),
        combined_load_symmetric_monotone(cases),
        learner_rows_ignore_record_order(cases),
        alignment_symmetric(cases),
        simulation_deterministic(cases / 4),
        proxy_table_closed_loop(cases),
    ]
}
