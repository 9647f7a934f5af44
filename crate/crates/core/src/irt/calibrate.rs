use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::matrix::ResponseMatrix;
use super::model::{ln_failure, ln_success, log_likelihood_unchecked, logistic};

/// Step halvings tried before a Newton update is abandoned for a sweep.
const MAX_HALVINGS: usize = 40;
/// Clamp applied to proportions correct when seeding the iteration.
const START_PROPORTION_CLAMP: (f64, f64) = (0.01, 0.99);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub max_iterations: usize,
    /// Largest absolute parameter change in a sweep below which the
    /// iteration stops.
    pub convergence_tolerance: f64,
    /// Fraction of the full Newton step taken before step halving, in (0, 1].
    pub newton_damping: f64,
    /// Iterates are clamped to `[-theta_bound, theta_bound]`.
    pub theta_bound: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            convergence_tolerance: 1e-4,
            newton_damping: 1.0,
            theta_bound: 10.0,
        }
    }
}

impl CalibrationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        if !(self.convergence_tolerance > 0.0 && self.convergence_tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "convergence_tolerance must be positive, got {}",
                self.convergence_tolerance
            )));
        }
        if !(self.newton_damping > 0.0 && self.newton_damping <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "newton_damping must lie in (0, 1], got {}",
                self.newton_damping
            )));
        }
        if !(self.theta_bound > 0.0 && self.theta_bound.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "theta_bound must be positive, got {}",
                self.theta_bound
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Learner,
    Item,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    AllCorrect,
    AllIncorrect,
    /// Became degenerate only after other rows or columns were removed.
    Cascade,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::AllCorrect => "all_correct",
            ExclusionReason::AllIncorrect => "all_incorrect",
            ExclusionReason::Cascade => "cascade",
        }
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Learner => "learner",
            EntityKind::Item => "item",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub id: String,
    pub kind: EntityKind,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemParameters {
    pub item_id: String,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbilityEstimate {
    pub learner_id: String,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    /// One entry per retained item, in the reduced matrix's item order.
    pub items: Vec<ItemParameters>,
    pub abilities: Vec<AbilityEstimate>,
    /// Asymptotic standard error of each entry of `items`.
    pub standard_errors: Vec<f64>,
    /// Responses that entered the estimate of each entry of `items`.
    pub responses_per_item: Vec<usize>,
    pub initial_log_likelihood: f64,
    pub final_log_likelihood: f64,
    /// Log-likelihood after each sweep.
    pub log_likelihood_trace: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    pub exclusions: Vec<Exclusion>,
}

impl CalibrationResult {
    pub fn difficulty_of(&self, item_id: &str) -> Option<f64> {
        self.items.iter().find(|p| p.item_id == item_id).map(|p| p.b)
    }

    /// Item id to difficulty.
    pub fn difficulty_map(&self) -> HashMap<String, f64> {
        self.items.iter().map(|p| (p.item_id.clone(), p.b)).collect()
    }
}

fn is_degenerate(correct: usize, total: usize) -> Option<ExclusionReason> {
    if total == 0 {
        Some(ExclusionReason::Cascade)
    } else if correct == total {
        Some(ExclusionReason::AllCorrect)
    } else if correct == 0 {
        Some(ExclusionReason::AllIncorrect)
    } else {
        None
    }
}

/// Removes learners and items whose remaining responses are all correct or
/// all incorrect, repeating until no such row or column is left.
///
/// Rows and columns flagged in the first pass keep their own reason; anything
/// that only becomes degenerate in a later pass is reported as
/// [`ExclusionReason::Cascade`].
pub fn exclude_degenerate(matrix: &ResponseMatrix) -> Result<(ResponseMatrix, Vec<Exclusion>)> {
    let mut keep_learner = vec![true; matrix.n_learners()];
    let mut keep_item = vec![true; matrix.n_items()];
    let mut exclusions = Vec::new();

    for round in 0.. {
        let mut flagged_items = Vec::new();
        let mut flagged_learners = Vec::new();

        for j in (0..matrix.n_items()).filter(|&j| keep_item[j]) {
            let (correct, total) = tally(matrix.item_responses(j), &keep_learner);
            if let Some(reason) = is_degenerate(correct, total) {
                flagged_items.push((j, reason));
            }
        }
        for i in (0..matrix.n_learners()).filter(|&i| keep_learner[i]) {
            let (correct, total) = tally(matrix.learner_responses(i), &keep_item);
            if let Some(reason) = is_degenerate(correct, total) {
                flagged_learners.push((i, reason));
            }
        }
        if flagged_items.is_empty() && flagged_learners.is_empty() {
            break;
        }

        let label = |reason| if round == 0 { reason } else { ExclusionReason::Cascade };
        for (j, reason) in flagged_items {
            keep_item[j] = false;
            exclusions.push(Exclusion {
                id: matrix.item_ids()[j].clone(),
                kind: EntityKind::Item,
                reason: label(reason),
            });
        }
        for (i, reason) in flagged_learners {
            keep_learner[i] = false;
            exclusions.push(Exclusion {
                id: matrix.learner_ids()[i].clone(),
                kind: EntityKind::Learner,
                reason: label(reason),
            });
        }
    }

    let reduced = matrix.retain(&keep_learner, &keep_item);
    if reduced.is_empty() {
        return Err(Error::EmptyAfterReduction);
    }
    Ok((reduced, exclusions))
}

fn tally(responses: &[(usize, bool)], keep_other: &[bool]) -> (usize, usize) {
    responses
        .iter()
        .filter(|&&(k, _)| keep_other[k])
        .fold((0, 0), |(c, t), &(_, x)| (c + usize::from(x), t + 1))
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn start_value(responses: &[(usize, bool)]) -> f64 {
    let correct = responses.iter().filter(|&&(_, x)| x).count();
    let p = (correct as f64 / responses.len() as f64).clamp(START_PROPORTION_CLAMP.0, START_PROPORTION_CLAMP.1);
    logit(p)
}

/// Log-likelihood contribution of responses sharing one parameter, as a
/// function of that parameter's logit offset. `sign` is +1 for an ability
/// (logit = theta - other) and -1 for a difficulty (logit = other - b).
fn block_log_likelihood(responses: &[(usize, bool)], others: &[f64], value: f64, sign: f64) -> f64 {
    responses
        .iter()
        .map(|&(k, x)| {
            let z = sign * (value - others[k]);
            if x {
                ln_success(z)
            } else {
                ln_failure(z)
            }
        })
        .sum()
}

/// One damped Newton update of a single parameter with the other block held
/// fixed, halving the step until the block log-likelihood does not decrease.
fn newton_update(
    responses: &[(usize, bool)],
    others: &[f64],
    current: f64,
    sign: f64,
    config: &CalibrationConfig,
) -> f64 {
    let mut score = 0.0;
    let mut information = 0.0;
    for &(k, x) in responses {
        let p = logistic(sign * (current - others[k]));
        score += f64::from(u8::from(x)) - p;
        information += p * (1.0 - p);
    }
    if information.is_nan() || information <= 0.0 {
        return current;
    }
    // d/d(theta) of the block is +score and d/db is -score; both ascend along
    // sign * score / information.
    let mut step = config.newton_damping * sign * score / information;
    let bound = config.theta_bound;
    let baseline = block_log_likelihood(responses, others, current, sign);
    for _ in 0..MAX_HALVINGS {
        let candidate = (current + step).clamp(-bound, bound);
        if block_log_likelihood(responses, others, candidate, sign) >= baseline {
            return candidate;
        }
        step *= 0.5;
    }
    current
}

fn first_non_finite(values: &[f64]) -> Option<(usize, f64)> {
    values.iter().copied().enumerate().find(|(_, v)| !v.is_finite())
}

/// Joint maximum-likelihood calibration of the Rasch model.
///
/// Degenerate learners and items are excluded first (and reported). Each
/// sweep updates every ability with difficulties fixed, then every difficulty
/// with the new abilities fixed. Updates inside a block are independent and
/// run in parallel; every sum is taken in a fixed order, so results do not
/// depend on the thread count. After the last sweep difficulties are shifted
/// to mean zero and abilities by the same constant.
///
/// No small-sample bias correction is applied.
pub fn calibrate_jml(matrix: &ResponseMatrix, config: &CalibrationConfig) -> Result<CalibrationResult> {
    config.validate()?;
    let (reduced, exclusions) = exclude_degenerate(matrix)?;
    let bound = config.theta_bound;

    let mut theta: Vec<f64> = (0..reduced.n_learners())
        .map(|i| start_value(reduced.learner_responses(i)).clamp(-bound, bound))
        .collect();
    let mut b: Vec<f64> = (0..reduced.n_items())
        .map(|j| (-start_value(reduced.item_responses(j))).clamp(-bound, bound))
        .collect();

    let initial_log_likelihood = log_likelihood_unchecked(&reduced, &theta, &b);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations_used = 0;

    for iteration in 1..=config.max_iterations {
        iterations_used = iteration;

        let new_theta: Vec<f64> = (0..reduced.n_learners())
            .into_par_iter()
            .map(|i| newton_update(reduced.learner_responses(i), &b, theta[i], 1.0, config))
            .collect();
        if let Some((i, v)) = first_non_finite(&new_theta) {
            return Err(Error::NumericalFailure {
                iteration,
                detail: format!("ability of learner {} became {v}", reduced.learner_ids()[i]),
            });
        }

        let new_b: Vec<f64> = (0..reduced.n_items())
            .into_par_iter()
            .map(|j| newton_update(reduced.item_responses(j), &new_theta, b[j], -1.0, config))
            .collect();
        if let Some((j, v)) = first_non_finite(&new_b) {
            return Err(Error::NumericalFailure {
                iteration,
                detail: format!("difficulty of item {} became {v}", reduced.item_ids()[j]),
            });
        }

        let max_change = theta
            .iter()
            .zip(&new_theta)
            .chain(b.iter().zip(&new_b))
            .map(|(old, new)| (new - old).abs())
            .fold(0.0, f64::max);
        theta = new_theta;
        b = new_b;

        let ll = log_likelihood_unchecked(&reduced, &theta, &b);
        if !ll.is_finite() {
            return Err(Error::NumericalFailure {
                iteration,
                detail: format!("log-likelihood became {ll}"),
            });
        }
        trace.push(ll);

        if max_change < config.convergence_tolerance {
            converged = true;
            break;
        }
    }

    let shift = b.iter().sum::<f64>() / b.len() as f64;
    b.iter_mut().for_each(|v| *v -= shift);
    theta.iter_mut().for_each(|v| *v -= shift);

    let final_log_likelihood = log_likelihood_unchecked(&reduced, &theta, &b);
    let standard_errors = item_standard_errors(&reduced, &theta, &b)?;

    Ok(CalibrationResult {
        items: reduced
            .item_ids()
            .iter()
            .zip(&b)
            .map(|(id, &b)| ItemParameters { item_id: id.clone(), b })
            .collect(),
        abilities: reduced
            .learner_ids()
            .iter()
            .zip(&theta)
            .map(|(id, &theta)| AbilityEstimate {
                learner_id: id.clone(),
                theta,
            })
            .collect(),
        standard_errors,
        responses_per_item: (0..reduced.n_items())
            .map(|j| reduced.item_responses(j).len())
            .collect(),
        initial_log_likelihood,
        final_log_likelihood,
        log_likelihood_trace: trace,
        iterations_used,
        converged,
        exclusions,
    })
}

fn item_standard_errors(matrix: &ResponseMatrix, theta: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    (0..matrix.n_items())
        .map(|j| {
            let info: f64 = matrix
                .item_responses(j)
                .iter()
                .map(|&(i, _)| {
                    let p = logistic(theta[i] - b[j]);
                    p * (1.0 - p)
                })
                .sum();
            information_to_se(info, &matrix.item_ids()[j])
        })
        .collect()
}

fn information_to_se(information: f64, item_id: &str) -> Result<f64> {
    if information > 0.0 {
        Ok(1.0 / information.sqrt())
    } else {
        Err(Error::InconsistentInput(format!(
            "item {item_id} carries no information"
        )))
    }
}

/// `SE_j = 1 / sqrt(sum_i P_ij (1 - P_ij))` over the learners of `result`
/// who answered item `j` in `matrix`, for every item of `result`.
pub fn standard_errors(matrix: &ResponseMatrix, result: &CalibrationResult) -> Result<Vec<f64>> {
    let theta_of: HashMap<&str, f64> = result
        .abilities
        .iter()
        .map(|a| (a.learner_id.as_str(), a.theta))
        .collect();
    result
        .items
        .iter()
        .map(|item| {
            let j = matrix
                .item_position(&item.item_id)
                .ok_or_else(|| Error::InconsistentInput(format!("item {} has no responses", item.item_id)))?;
            let mut answered = 0usize;
            let mut information = 0.0;
            for &(i, _) in matrix.item_responses(j) {
                if let Some(&theta) = theta_of.get(matrix.learner_ids()[i].as_str()) {
                    let p = logistic(theta - item.b);
                    information += p * (1.0 - p);
                    answered += 1;
                }
            }
            if answered == 0 {
                return Err(Error::InconsistentInput(format!(
                    "item {} has no responses from calibrated learners",
                    item.item_id
                )));
            }
            information_to_se(information, &item.item_id)
        })
        .collect()
}
