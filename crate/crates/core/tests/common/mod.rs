//! Oracles and fixtures shared by the integration test targets.
#![allow(dead_code)]

pub mod invariants;

use std::path::Path;

use cogload::ingest::{InteractionEvent, ItemKind, ItemMeta, DEFAULT_MIN_RESPONSES};
use cogload::irt::{log_likelihood, CalibrationConfig, ResponseMatrix};
use cogload::report::{self, AnalyzeOptions, AnalyzeSummary, CalibrateOptions, CalibrateSummary};
use cogload::simgen::{self, SimConfig};

/// Non-degenerate 3 x 3 grids whose joint likelihood has an interior
/// maximum.
pub const ORACLE_GRIDS: [[&str; 3]; 5] = [
    ["110", "011", "101"],
    ["100", "010", "001"],
    ["110", "100", "011"],
    ["101", "100", "011"],
    ["001", "011", "110"],
];

pub fn bool_grid(rows: &[&str]) -> Vec<Vec<bool>> {
    rows.iter().map(|r| r.chars().map(|c| c == '1').collect()).collect()
}

/// Builds a matrix from rows of '0'/'1' characters; '.' marks a missing
/// response. Learners are `L{i}`, items `I{j}`.
pub fn matrix_from_rows(rows: &[&str]) -> ResponseMatrix {
    let mut triples = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        for (j, ch) in row.chars().enumerate() {
            if ch != '.' {
                triples.push((format!("L{i}"), format!("I{j}"), ch == '1'));
            }
        }
    }
    ResponseMatrix::from_triples(triples).unwrap()
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Largest relative discrepancy between the analytic gradient and a central
/// finite difference of the log-likelihood, over every parameter.
/// Relative error is `|a - fd| / max(1, |a|, |fd|)`.
pub fn max_gradient_error(matrix: &ResponseMatrix, theta: &[f64], b: &[f64], step: f64) -> f64 {
    let g = cogload::irt::likelihood_gradients(matrix, theta, b).unwrap();
    let ll = |t: &[f64], d: &[f64]| log_likelihood(matrix, t, d).unwrap();
    let rel = |a: f64, fd: f64| (a - fd).abs() / a.abs().max(fd.abs()).max(1.0);
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        let (mut up, mut down) = (theta.to_vec(), theta.to_vec());
        up[i] += step;
        down[i] -= step;
        let fd = (ll(&up, b) - ll(&down, b)) / (2.0 * step);
        worst = worst.max(rel(g.ability[i], fd));
    }
    for j in 0..b.len() {
        let (mut up, mut down) = (b.to_vec(), b.to_vec());
        up[j] += step;
        down[j] -= step;
        let fd = (ll(theta, &up) - ll(theta, &down)) / (2.0 * step);
        worst = worst.max(rel(g.difficulty[j], fd));
    }
    worst
}

fn ln1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Brute-force joint maximum of the Rasch log-likelihood of a complete
/// learner x item grid over the lattice `{-4.00, -3.99, ..., 4.00}` for every
/// parameter, with difficulties constrained to sum to zero.
///
/// The difficulty search is exhaustive over all lattice points satisfying the
/// constraint (the last item's difficulty is determined by the others). For
/// fixed difficulties the log-likelihood separates by learner and is concave
/// in each ability, so each learner's lattice argmax is found by bisection on
/// the sign of the forward difference.
///
/// Returns `(b, theta, on_boundary)`; `on_boundary` is set when any argmax
/// parameter sits at the lattice edge, meaning the maximizer may lie
/// outside the box.
pub fn grid_search_argmax(grid: &[Vec<bool>]) -> (Vec<f64>, Vec<f64>, bool) {
    const K: i32 = 400;
    let n_items = grid[0].len();
    assert!(n_items >= 2);
    let scale = |k: i32| k as f64 / 100.0;

    // Row i contributes r_i * theta - sum_j x_ij b_j - sum_j ln(1 + e^(theta - b_j)),
    // so its maximizing ability depends on the row only through its raw score.
    let scores: Vec<usize> = grid.iter().map(|row| row.iter().filter(|&&x| x).count()).collect();
    let profile = |b: &[f64], score: usize| -> (f64, i32) {
        let ll = |m: i32| {
            let t = scale(m);
            score as f64 * t - b.iter().map(|&bj| ln1p_exp(t - bj)).sum::<f64>()
        };
        let (mut lo, mut hi) = (-K, K);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if ll(mid + 1) > ll(mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        (ll(lo), lo)
    };
    let learner_best = |b: &[f64], cache: &mut [Option<(f64, i32)>], i: usize| -> (f64, i32) {
        let (value, m) = *cache[scores[i]].get_or_insert_with(|| profile(b, scores[i]));
        let fixed: f64 = grid[i].iter().zip(b).filter(|(&x, _)| x).map(|(_, &bj)| bj).sum();
        (value - fixed, m)
    };
    let evaluate = |b: &[f64]| -> (f64, Vec<i32>) {
        let mut cache = vec![None; n_items + 1];
        let mut total = 0.0;
        let mut ms = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let (v, m) = learner_best(b, &mut cache, i);
            total += v;
            ms.push(m);
        }
        (total, ms)
    };

    let mut best = (f64::NEG_INFINITY, Vec::new());
    let mut ks = vec![-K; n_items - 1];
    loop {
        let last = -ks.iter().sum::<i32>();
        if last.abs() <= K {
            let mut kb = ks.clone();
            kb.push(last);
            let b: Vec<f64> = kb.iter().map(|&k| scale(k)).collect();
            let total = evaluate(&b).0;
            if total > best.0 {
                best = (total, kb);
            }
        }
        // Odometer increment over the free difficulties.
        let mut pos = 0;
        loop {
            if pos == ks.len() {
                let kb = best.1;
                let b: Vec<f64> = kb.iter().map(|&k| scale(k)).collect();
                let thetas_k = evaluate(&b).1;
                let edge = kb.iter().chain(&thetas_k).any(|k| k.abs() == K);
                return (b, thetas_k.iter().map(|&k| scale(k)).collect(), edge);
            }
            ks[pos] += 1;
            if ks[pos] <= K {
                break;
            }
            ks[pos] = -K;
            pos += 1;
        }
    }
}

/// Probability that a ±`step` random walk started at offset 0 stays within
/// `radius` steps for `transitions` moves, when a walker at offset `o` moves
/// up with probability `logistic(ability_gap - o * step)`.
pub fn stay_within_probability(ability_gap: f64, step: f64, radius: i32, transitions: usize) -> f64 {
    let width = (2 * radius + 1) as usize;
    let mut dist = vec![0.0; width];
    dist[radius as usize] = 1.0;
    for _ in 0..transitions {
        let mut next = vec![0.0; width];
        for (k, &mass) in dist.iter().enumerate() {
            let o = k as i32 - radius;
            let up = 1.0 / (1.0 + (-(ability_gap - o as f64 * step)).exp());
            if o < radius {
                next[k + 1] += mass * up;
            }
            if o > -radius {
                next[k - 1] += mass * (1.0 - up);
            }
        }
        dist = next;
    }
    dist.iter().sum()
}

/// Events where `n_items - n_sparse` items are answered by at least
/// `threshold` distinct learners and `n_sparse` items by fewer.
///
/// Every sparse item is also re-attempted by each of its learners, so its
/// total attempt count reaches or exceeds `threshold` whenever it has at
/// least `threshold / 2` learners: only first-attempt counting removes it.
pub fn filtering_fixture(
    n_items: usize,
    n_sparse: usize,
    threshold: usize,
    kind: ItemKind,
) -> (Vec<ItemMeta>, Vec<InteractionEvent>) {
    let n_learners = threshold + 2;
    let learner = |i: usize| format!("P{i:04}");
    let mut items = Vec::with_capacity(n_items);
    let mut events = Vec::new();
    for j in 0..n_items {
        let item_id = format!("Q{j:05}");
        items.push(ItemMeta {
            item_id: item_id.clone(),
            kind,
            passage_id: (kind == ItemKind::Passage).then(|| format!("S{:04}", j / 4)),
            level: None,
        });
        let sparse = j < n_sparse;
        let n = if sparse {
            1 + j % (threshold - 1)
        } else {
            threshold + j % 3
        };
        for i in 0..n {
            let start = (j * 7 + i) % n_learners;
            let l = learner(start);
            events.push(InteractionEvent {
                learner_id: l.clone(),
                item_id: item_id.clone(),
                timestamp: (j * 2 + 1) as f64,
                correct: (i + j) % 2 == 0,
            });
            if sparse {
                events.push(InteractionEvent {
                    learner_id: l,
                    item_id: item_id.clone(),
                    timestamp: (j * 2 + 2) as f64,
                    correct: true,
                });
            }
        }
    }
    (items, events)
}

/// `simulate -> calibrate -> analyze` through the library entry points the
/// CLI uses. Calibration reads the fixture's bank events.
pub fn run_pipeline(config: &SimConfig, dir: &Path) -> (CalibrateSummary, AnalyzeSummary) {
    let fixture = dir.join("fixture");
    report::run_simulate(config, &fixture).unwrap();
    let cal = report::run_calibrate(&CalibrateOptions {
        events: fixture.join(simgen::BANK_EVENTS_FILE),
        out_dir: dir.join("calibration"),
        min_responses: DEFAULT_MIN_RESPONSES,
        calibration: CalibrationConfig::default(),
    })
    .unwrap();
    let analysis = report::run_analyze(&AnalyzeOptions {
        events: fixture.join(simgen::EVENTS_FILE),
        questionnaires: fixture.join(simgen::QUESTIONNAIRES_FILE),
        subscale_map: Some(fixture.join(simgen::SUBSCALE_MAP_FILE)),
        calibration: dir.join("calibration").join("calibration.csv"),
        items: Some(fixture.join(simgen::ITEMS_FILE)),
        routing: Some(fixture.join(simgen::GROUND_TRUTH_FILE)),
        out_dir: dir.join("analysis"),
        emit_svg: true,
    })
    .unwrap();
    (cal, analysis)
}
