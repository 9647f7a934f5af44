use crate::error::{Error, Result};

use super::matrix::ResponseMatrix;

/// Logistic function, evaluated without overflow for large |x|.
#[inline]
pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// ln P(correct) for logit `x = theta - b`.
#[inline]
pub(crate) fn ln_success(x: f64) -> f64 {
    -softplus(-x)
}

/// ln P(incorrect) for logit `x = theta - b`.
#[inline]
pub(crate) fn ln_failure(x: f64) -> f64 {
    -softplus(x)
}

/// Probability that a learner of ability `theta` answers an item of
/// difficulty `b` correctly: `exp(theta - b) / (1 + exp(theta - b))`.
pub fn rasch_probability(theta: f64, b: f64) -> Result<f64> {
    if !theta.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "rasch_probability needs finite inputs, got theta={theta}, b={b}"
        )));
    }
    Ok(logistic(theta - b))
}

fn check_parameters(matrix: &ResponseMatrix, abilities: &[f64], difficulties: &[f64]) -> Result<()> {
    if abilities.len() != matrix.n_learners() {
        return Err(Error::InconsistentInput(format!(
            "{} abilities for {} learners",
            abilities.len(),
            matrix.n_learners()
        )));
    }
    if difficulties.len() != matrix.n_items() {
        return Err(Error::InconsistentInput(format!(
            "{} difficulties for {} items",
            difficulties.len(),
            matrix.n_items()
        )));
    }
    if let Some(v) = abilities.iter().chain(difficulties).find(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite parameter {v}")));
    }
    Ok(())
}

/// Bernoulli log-likelihood of every observed entry; `abilities` and
/// `difficulties` are indexed by the matrix's learner and item positions.
pub fn log_likelihood(matrix: &ResponseMatrix, abilities: &[f64], difficulties: &[f64]) -> Result<f64> {
    check_parameters(matrix, abilities, difficulties)?;
    Ok(log_likelihood_unchecked(matrix, abilities, difficulties))
}

pub(crate) fn log_likelihood_unchecked(matrix: &ResponseMatrix, abilities: &[f64], difficulties: &[f64]) -> f64 {
    matrix
        .entries()
        .iter()
        .map(|r| {
            let x = abilities[r.learner] - difficulties[r.item];
            if r.correct {
                ln_success(x)
            } else {
                ln_failure(x)
            }
        })
        .sum()
}

/// First and second derivatives of the log-likelihood.
///
/// Off-diagonal second derivatives are not computed; within one parameter
/// block the Hessian is diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodGradients {
    /// d/dtheta_i = sum_j (x_ij - P_ij)
    pub ability: Vec<f64>,
    /// d/db_j = sum_i (P_ij - x_ij)
    pub difficulty: Vec<f64>,
    /// d2/dtheta_i2 = -sum_j P_ij (1 - P_ij)
    pub ability_curvature: Vec<f64>,
    /// d2/db_j2 = -sum_i P_ij (1 - P_ij)
    pub difficulty_curvature: Vec<f64>,
}

pub fn likelihood_gradients(
    matrix: &ResponseMatrix,
    abilities: &[f64],
    difficulties: &[f64],
) -> Result<LikelihoodGradients> {
    check_parameters(matrix, abilities, difficulties)?;
    let mut g = LikelihoodGradients {
        ability: vec![0.0; matrix.n_learners()],
        difficulty: vec![0.0; matrix.n_items()],
        ability_curvature: vec![0.0; matrix.n_learners()],
        difficulty_curvature: vec![0.0; matrix.n_items()],
    };
    for r in matrix.entries() {
        let p = logistic(abilities[r.learner] - difficulties[r.item]);
        let residual = f64::from(u8::from(r.correct)) - p;
        let info = p * (1.0 - p);
        g.ability[r.learner] += residual;
        g.difficulty[r.item] -= residual;
        g.ability_curvature[r.learner] -= info;
        g.difficulty_curvature[r.item] -= info;
    }
    Ok(g)
}
