//! Reduction from zero-target Subset-Sum to the full-information LDA problem.
//!
//! Each weight `w_i` becomes a value `x_i` holding `2|w_i|` people of group 1
//! (positive weights) or group 2 (negative weights). A single group-1 person
//! of value `x*` forms the baseline selection, and value `x**` (with
//! `sigma = 0`) pads both groups to equal size, plus `alpha` extra people per
//! group so that selecting it always costs more utility than everything else
//! can provide. An LDA then exists iff some nonempty subset of weights sums
//! to zero, and its selected `x_i` are such a subset.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{FullInfoInstance, LdaSolution, LdaStatus, Rational, ValueRecord};
use crate::error::{LdaError, Result};

pub const SLACK_START_ID: &str = "x*";
pub const SLACK_BALANCE_ID: &str = "x**";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetSumInstance {
    weights: Vec<i64>,
}

impl SubsetSumInstance {
    pub fn new(weights: Vec<i64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(LdaError::InvalidParameter("subset-sum instance needs at least one weight".into()));
        }
        if weights.contains(&0) {
            return Err(LdaError::InvalidParameter("subset-sum weights must be nonzero".into()));
        }
        Ok(SubsetSumInstance { weights })
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn value_id(i: usize) -> String {
        format!("x{}", i + 1)
    }
}

/// Smallest integer strictly above `(sum|w| + 1/2) / lambda`.
pub fn slack_alpha(weights: &SubsetSumInstance, lambda: &Rational) -> Result<i128> {
    if !lambda.is_positive() {
        return Err(LdaError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    let abs_sum: i128 = weights.weights.iter().map(|&w| i128::from(w).abs()).sum();
    let bound = (Rational::from_integer(abs_sum) + Rational::new(1, 2)) / lambda;
    Ok(bound.floor().to_integer() + 1)
}

pub fn reduce_subset_sum(weights: &SubsetSumInstance, lambda: Rational) -> Result<FullInfoInstance> {
    let alpha = slack_alpha(weights, &lambda)?;

    // (id, group-1 people, group-2 people, sigma)
    let mut people: Vec<(String, i128, i128, Rational)> = Vec::new();
    let one = Rational::from_integer(1);
    for (i, &w) in weights.weights.iter().enumerate() {
        let count = 2 * i128::from(w).abs();
        let (g1, g2) = if w > 0 { (count, 0) } else { (0, count) };
        people.push((SubsetSumInstance::value_id(i), g1, g2, one));
    }
    people.push((SLACK_START_ID.to_string(), 1, 0, one));
    let g1: i128 = people.iter().map(|p| p.1).sum();
    let g2: i128 = people.iter().map(|p| p.2).sum();
    let gap = g1 - g2; // = 2 * sum(w) + 1, never zero
    let (pad1, pad2) = if gap > 0 { (alpha, gap + alpha) } else { (-gap + alpha, alpha) };
    people.push((SLACK_BALANCE_ID.to_string(), pad1, pad2, Rational::zero()));

    let group_size = g1 + pad1;
    debug_assert_eq!(group_size, g2 + pad2);
    let values = people
        .into_iter()
        .map(|(id, n1, n2, sigma)| ValueRecord {
            id,
            rho1: Rational::new(n1, group_size),
            rho2: Rational::new(n2, group_size),
            sigma,
        })
        .collect();
    FullInfoInstance::new(values, lambda, [SLACK_START_ID.to_string()].into(), None)
}

/// Total population `N` of the reduction: both groups have `N / 2` people.
pub fn reduction_population(weights: &SubsetSumInstance, lambda: &Rational) -> Result<i128> {
    let alpha = slack_alpha(weights, lambda)?;
    let abs_sum: i128 = weights.weights.iter().map(|&w| i128::from(w).abs()).sum();
    let sum: i128 = weights.weights.iter().map(|&w| i128::from(w)).sum();
    Ok(2 * abs_sum + 1 + (2 * sum + 1).abs() + 2 * alpha)
}

/// Weights whose values the solution selects; they sum to zero.
pub fn extract_subset_sum_solution(weights: &SubsetSumInstance, solution: &LdaSolution) -> Result<Vec<i64>> {
    if solution.status != LdaStatus::Found {
        return Err(LdaError::InvalidParameter(format!(
            "no subset to extract from a `{}` solution",
            solution.status.as_str()
        )));
    }
    let mut subset = Vec::new();
    for id in &solution.selection {
        if id == SLACK_START_ID || id == SLACK_BALANCE_ID {
            return Err(LdaError::Internal(format!("LDA on a reduction instance selected slack value `{id}`")));
        }
        let i: usize = id
            .strip_prefix('x')
            .and_then(|s| s.parse().ok())
            .filter(|&i| i >= 1 && i <= weights.weights.len())
            .ok_or_else(|| LdaError::Internal(format!("unexpected value id `{id}` in reduction solution")))?;
        subset.push(weights.weights[i - 1]);
    }
    if subset.is_empty() || subset.iter().sum::<i64>() != 0 {
        return Err(LdaError::Internal(format!("extracted subset {subset:?} does not sum to zero")));
    }
    Ok(subset)
}
