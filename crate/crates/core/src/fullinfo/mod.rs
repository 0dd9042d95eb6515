//! The full-information LDA problem.
//!
//! The solver knows every data value `x`, the group densities `rho_1(x)`,
//! `rho_2(x)` and the Bayes probability `sigma(x) = P[y = 1 | x]`. A classifier
//! is a subset of values; selecting `x` contributes disparity
//! `d = rho_1 - rho_2` and utility `u = (rho_1 + rho_2) / 2 * (sigma - lambda * (1 - sigma))`,
//! assuming both groups carry equal mass. An LDA is a subset whose utility is
//! at least the baseline's and whose absolute disparity is strictly smaller.
//!
//! Everything here is exact: densities are rationals and the solvers work on
//! integer multiples of a common denominator.

mod approx;
mod exact;
mod generate;
mod io;
mod rational;
mod reduction;

use std::collections::{BTreeSet, HashMap};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{LdaError, Result};

pub use approx::solve_approx;
pub use exact::{solve_exact, solve_exact_with, ExactOptions};
pub use generate::{generate_instance, generate_instance_with_lambda};
pub use io::{instance_to_strings, read_instance, read_instance_str, write_instance, InstanceSidecar};
pub use rational::{decimal_places, format_rational, parse_rational, rational_from_f64, to_f64, Rational};
pub use reduction::{
    extract_subset_sum_solution, reduce_subset_sum, reduction_population, slack_alpha, SubsetSumInstance, SLACK_BALANCE_ID,
    SLACK_START_ID,
};

/// One data value with its group densities and Bayes probability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueRecord {
    pub id: String,
    pub rho1: Rational,
    pub rho2: Rational,
    pub sigma: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullInfoInstance {
    pub values: Vec<ValueRecord>,
    pub lambda: Rational,
    /// Ids selected by the baseline classifier.
    pub baseline: BTreeSet<String>,
    /// Maximum decimal places of the densities (sigma uses at most 2), or
    /// `None` when densities are arbitrary rationals.
    pub digits: Option<u32>,
}

impl FullInfoInstance {
    pub fn new(
        values: Vec<ValueRecord>,
        lambda: Rational,
        baseline: BTreeSet<String>,
        digits: Option<u32>,
    ) -> Result<Self> {
        let inst = FullInfoInstance {
            values,
            lambda,
            baseline,
            digits,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LdaError::InvalidInstance(m));
        if self.values.is_empty() {
            return bad("no data values".into());
        }
        if !self.lambda.is_positive() {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        let zero = Rational::zero();
        let one = Rational::from_integer(1);
        let mut ids = BTreeSet::new();
        for v in &self.values {
            if !ids.insert(v.id.as_str()) {
                return bad(format!("duplicate value id `{}`", v.id));
            }
            for (name, p) in [("rho1", &v.rho1), ("rho2", &v.rho2), ("sigma", &v.sigma)] {
                if *p < zero || *p > one {
                    return bad(format!("{name} of `{}` is {p}, outside [0, 1]", v.id));
                }
            }
            if let Some(digits) = self.digits {
                for (name, p, limit) in [("rho1", &v.rho1, digits), ("rho2", &v.rho2, digits), ("sigma", &v.sigma, 2)] {
                    match decimal_places(p) {
                        Some(k) if k <= limit => {}
                        _ => {
                            return bad(format!(
                                "{name} of `{}` ({}) needs more than {limit} decimal places",
                                v.id,
                                format_rational(p)
                            ))
                        }
                    }
                }
            }
        }
        let s1: Rational = self.values.iter().map(|v| v.rho1).sum();
        let s2: Rational = self.values.iter().map(|v| v.rho2).sum();
        if s1 != one || s2 != one {
            return bad(format!(
                "densities must each sum to 1, got {} and {}",
                format_rational(&s1),
                format_rational(&s2)
            ));
        }
        if let Some(unknown) = self.baseline.iter().find(|id| !ids.contains(id.as_str())) {
            return bad(format!("baseline references unknown id `{unknown}`"));
        }
        Ok(())
    }

    pub fn n_values(&self) -> usize {
        self.values.len()
    }

    pub fn lambda_f64(&self) -> f64 {
        to_f64(&self.lambda)
    }

    fn index_of(&self) -> HashMap<&str, usize> {
        self.values.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect()
    }
}

/// Disparity and utility contributed by selecting one value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueScores {
    pub id: String,
    pub d: Rational,
    pub u: Rational,
}

pub fn value_scores(instance: &FullInfoInstance) -> Vec<ValueScores> {
    let one = Rational::from_integer(1);
    let two = Rational::from_integer(2);
    instance
        .values
        .iter()
        .map(|v| {
            let mass = (v.rho1 + v.rho2) / two;
            let gain = v.sigma - instance.lambda * (one - v.sigma);
            ValueScores {
                id: v.id.clone(),
                d: v.rho1 - v.rho2,
                u: mass * gain,
            }
        })
        .collect()
}

fn sum_over(scores: &[ValueScores], selected: impl Iterator<Item = usize>) -> (Rational, Rational) {
    selected.fold((Rational::zero(), Rational::zero()), |(d, u), i| {
        (d + scores[i].d, u + scores[i].u)
    })
}

fn resolve(instance: &FullInfoInstance, ids: &BTreeSet<String>) -> Result<Vec<usize>> {
    let index = instance.index_of();
    ids.iter()
        .map(|id| {
            index.get(id.as_str()).copied().ok_or_else(|| {
                LdaError::InvalidInstance(format!("unknown value id `{id}`"))
            })
        })
        .collect()
}

/// `(delta0, u0)` of the baseline selection.
pub fn baseline_scores(instance: &FullInfoInstance) -> Result<(Rational, Rational)> {
    let scores = value_scores(instance);
    let idx = resolve(instance, &instance.baseline)?;
    Ok(sum_over(&scores, idx.into_iter()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LdaStatus {
    Found,
    NoneExists,
    NotFoundAtEpsilon,
}

impl LdaStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            LdaStatus::Found => "found",
            LdaStatus::NoneExists => "none_exists",
            LdaStatus::NotFoundAtEpsilon => "not_found_at_epsilon",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LdaSolution {
    pub status: LdaStatus,
    /// Selected ids, in instance order.
    pub selection: Vec<String>,
    pub delta: Rational,
    pub utility: Rational,
    pub baseline_delta: Rational,
    pub baseline_utility: Rational,
    pub note: Option<String>,
}

/// JSON shape of a solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub status: LdaStatus,
    pub selection: Vec<String>,
    pub delta: f64,
    pub utility: f64,
    pub baseline_delta: f64,
    pub baseline_utility: f64,
    pub delta_exact: String,
    pub utility_exact: String,
    pub baseline_delta_exact: String,
    pub baseline_utility_exact: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LdaSolution {
    pub fn record(&self) -> SolutionRecord {
        SolutionRecord {
            status: self.status,
            selection: self.selection.clone(),
            delta: to_f64(&self.delta),
            utility: to_f64(&self.utility),
            baseline_delta: to_f64(&self.baseline_delta),
            baseline_utility: to_f64(&self.baseline_utility),
            delta_exact: format_rational(&self.delta),
            utility_exact: format_rational(&self.utility),
            baseline_delta_exact: format_rational(&self.baseline_delta),
            baseline_utility_exact: format_rational(&self.baseline_utility),
            note: self.note.clone(),
        }
    }

    /// Selection as a set of ids.
    pub fn selected_ids(&self) -> BTreeSet<String> {
        self.selection.iter().cloned().collect()
    }
}

/// Result of checking a candidate selection in one pass over the values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub delta: Rational,
    pub utility: Rational,
    pub baseline_delta: Rational,
    pub baseline_utility: Rational,
    /// Utility at least the baseline's and absolute disparity strictly below it.
    pub is_lda: bool,
}

pub fn verify(instance: &FullInfoInstance, selection: &BTreeSet<String>) -> Result<Verdict> {
    let scores = value_scores(instance);
    let (delta, utility) = sum_over(&scores, resolve(instance, selection)?.into_iter());
    let (baseline_delta, baseline_utility) = sum_over(&scores, resolve(instance, &instance.baseline)?.into_iter());
    let is_lda = utility >= baseline_utility && delta.abs() < baseline_delta.abs();
    Ok(Verdict {
        delta,
        utility,
        baseline_delta,
        baseline_utility,
        is_lda,
    })
}

/// Scores scaled to integers over common denominators, shared by the solvers.
#[derive(Clone, Debug)]
pub(crate) struct Integerized {
    pub d: Vec<i128>,
    pub u: Vec<i128>,
    pub d0: i128,
    pub u0: i128,
    pub baseline_delta: Rational,
    pub baseline_utility: Rational,
    pub scores: Vec<ValueScores>,
}

impl Integerized {
    pub fn new(instance: &FullInfoInstance) -> Result<Self> {
        instance.validate()?;
        let scores = value_scores(instance);
        let d_scale = rational::lcm_of_denominators(scores.iter().map(|s| &s.d));
        let u_scale = rational::lcm_of_denominators(scores.iter().map(|s| &s.u));
        let d = scores
            .iter()
            .map(|s| rational::scaled_integer(&s.d, d_scale))
            .collect::<Result<Vec<_>>>()?;
        let u = scores
            .iter()
            .map(|s| rational::scaled_integer(&s.u, u_scale))
            .collect::<Result<Vec<_>>>()?;
        let base = resolve(instance, &instance.baseline)?;
        let d0 = base.iter().map(|&i| d[i]).sum();
        let u0 = base.iter().map(|&i| u[i]).sum();
        let (baseline_delta, baseline_utility) = sum_over(&scores, base.into_iter());
        Ok(Integerized {
            d,
            u,
            d0,
            u0,
            baseline_delta,
            baseline_utility,
            scores,
        })
    }

    pub fn solution(&self, status: LdaStatus, selected: &[usize], note: Option<String>) -> LdaSolution {
        let mut idx = selected.to_vec();
        idx.sort_unstable();
        let (delta, utility) = sum_over(&self.scores, idx.iter().copied());
        LdaSolution {
            status,
            selection: idx.iter().map(|&i| self.scores[i].id.clone()).collect(),
            delta,
            utility,
            baseline_delta: self.baseline_delta,
            baseline_utility: self.baseline_utility,
            note,
        }
    }
}

/// Total decimal places over every density and Bayes probability.
pub fn input_size_digits(instance: &FullInfoInstance) -> Result<u32> {
    let mut total = 0;
    for v in &instance.values {
        for p in [&v.rho1, &v.rho2, &v.sigma] {
            total += decimal_places(p).ok_or_else(|| {
                LdaError::InvalidInstance(format!(
                    "value `{}` has a non-terminating decimal ({})",
                    v.id,
                    format_rational(p)
                ))
            })?;
        }
    }
    Ok(total)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    pub fn instance(rows: &[(&str, &str, &str, &str)], lambda: &str, baseline: &[&str]) -> FullInfoInstance {
        let values = rows
            .iter()
            .map(|(id, r1, r2, s)| ValueRecord {
                id: id.to_string(),
                rho1: q(r1),
                rho2: q(r2),
                sigma: q(s),
            })
            .collect();
        FullInfoInstance::new(
            values,
            q(lambda),
            baseline.iter().map(|s| s.to_string()).collect(),
            None,
        )
        .unwrap()
    }

    /// Minimum |delta| over all subsets with utility at least the baseline's.
    pub fn brute_force_optimum(inst: &FullInfoInstance) -> (Rational, Vec<usize>) {
        let scores = value_scores(inst);
        let (_, u0) = baseline_scores(inst).unwrap();
        let n = scores.len();
        let mut best: Option<(Rational, Vec<usize>)> = None;
        for mask in 0u64..(1u64 << n) {
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let (d, u) = idx.iter().fold((Rational::zero(), Rational::zero()), |(d, u), &i| {
                (d + scores[i].d, u + scores[i].u)
            });
            if u >= u0 && best.as_ref().is_none_or(|(b, _)| d.abs() < *b) {
                best = Some((d.abs(), idx));
            }
        }
        best.expect("baseline itself is feasible")
    }
}
