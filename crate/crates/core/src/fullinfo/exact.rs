//! Pseudo-polynomial dynamic program over integer disparity sums.
//!
//! The table has one column per attainable signed disparity sum in
//! `[-sum of negative d, sum of positive d]` and records the largest utility
//! reaching it. Its width scales with the common denominator of the
//! densities, i.e. exponentially in their decimal precision.

use std::time::Instant;

use super::{FullInfoInstance, Integerized, LdaSolution, LdaStatus};
use crate::error::{LdaError, Result};

const UNREACHED: i128 = i128::MIN;

#[derive(Clone, Copy, Debug)]
pub struct ExactOptions {
    /// Upper bound on `values * columns` table cells.
    pub max_cells: u128,
    /// Abort with [`LdaError::TimedOut`] once this instant passes.
    pub deadline: Option<Instant>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            max_cells: 200_000_000,
            deadline: None,
        }
    }
}

pub fn solve_exact(instance: &FullInfoInstance) -> Result<LdaSolution> {
    solve_exact_with(instance, ExactOptions::default())
}

pub fn solve_exact_with(instance: &FullInfoInstance, options: ExactOptions) -> Result<LdaSolution> {
    let ints = Integerized::new(instance)?;
    let n = ints.d.len();
    let offset: i128 = ints.d.iter().filter(|&&d| d < 0).map(|d| -d).sum();
    let span: i128 = offset + ints.d.iter().filter(|&&d| d > 0).sum::<i128>();
    let width = span as u128 + 1;
    let cells = width * n as u128;
    if cells > options.max_cells {
        return Err(LdaError::InstanceTooLarge {
            cells,
            cap: options.max_cells,
        });
    }
    let width = width as usize;

    // best[c]: max utility over subsets of the values seen so far whose
    // disparity sum is c - offset. took[i][c]: whether that optimum selects value i.
    let mut best = vec![UNREACHED; width];
    best[offset as usize] = 0;
    let mut took: Vec<Vec<bool>> = Vec::with_capacity(n);
    let mut next = best.clone();
    for i in 0..n {
        if options.deadline.is_some_and(|t| Instant::now() >= t) {
            return Err(LdaError::TimedOut);
        }
        let (di, ui) = (ints.d[i] as isize, ints.u[i]);
        let mut take = vec![false; width];
        next.copy_from_slice(&best);
        for (c, &b) in best.iter().enumerate() {
            if b == UNREACHED {
                continue;
            }
            let target = (c as isize + di) as usize;
            let cand = b + ui;
            // Strict: on ties the selection without value i is kept.
            if cand > next[target] {
                next[target] = cand;
                take[target] = true;
            }
        }
        std::mem::swap(&mut best, &mut next);
        took.push(take);
    }

    // Smallest |delta| whose best utility meets the baseline; between +D and
    // -D prefer the larger utility, then the positive side.
    let mut chosen: Option<(i128, usize)> = None;
    for (c, &u) in best.iter().enumerate() {
        if u == UNREACHED || u < ints.u0 {
            continue;
        }
        let d = c as i128 - offset;
        let better = match chosen {
            None => true,
            Some((bd, bc)) => {
                let bu = best[bc];
                d.abs() < bd.abs() || (d.abs() == bd.abs() && (u > bu || (u == bu && d > bd)))
            }
        };
        if better {
            chosen = Some((d, c));
        }
    }
    let (d_opt, mut c) = chosen.ok_or_else(|| {
        LdaError::Internal("baseline selection missing from the exact table".into())
    })?;

    let mut selected = Vec::new();
    for i in (0..n).rev() {
        if took[i][c] {
            selected.push(i);
            c = (c as isize - ints.d[i] as isize) as usize;
        }
    }
    if c != offset as usize {
        return Err(LdaError::Internal("exact reconstruction did not return to the empty selection".into()));
    }

    let status = if d_opt.abs() < ints.d0.abs() {
        LdaStatus::Found
    } else {
        LdaStatus::NoneExists
    };
    Ok(ints.solution(status, &selected, None))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::*;
    use super::*;
    use num_traits::Zero;
    use proptest::prelude::*;

    #[test]
    fn finds_zero_disparity_subset() {
        let inst = instance(
            &[("a", "0.5", "0.25", "1"), ("b", "0.5", "0.75", "1")],
            "1",
            &["a"],
        );
        let sol = solve_exact(&inst).unwrap();
        assert_eq!(sol.status, LdaStatus::Found);
        assert_eq!(sol.selection, vec!["a".to_string(), "b".to_string()]);
        assert!(sol.delta.is_zero());
    }

    #[test]
    fn baseline_already_optimal() {
        // Selecting b alone has disparity 0 but negative utility; baseline {} is already at 0.
        let inst = instance(
            &[("a", "0.5", "0.25", "1"), ("b", "0.5", "0.75", "0")],
            "1",
            &["a"],
        );
        let (d0, _) = baseline_scores(&inst).unwrap();
        assert_eq!(d0, q("0.25"));
        let sol = solve_exact(&inst).unwrap();
        assert_eq!(sol.status, LdaStatus::NoneExists);
        assert_eq!(sol.delta.abs(), q("0.25"));
    }

    #[test]
    fn cell_cap_is_enforced() {
        let inst = instance(&[("a", "0.0001", "0.9999", "1"), ("b", "0.9999", "0.0001", "1")], "1", &["a"]);
        let err = solve_exact_with(
            &inst,
            ExactOptions {
                max_cells: 100,
                deadline: None,
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("instance too large for exact solve"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn matches_exhaustive_enumeration(n in 2usize..=10, digits in 1u32..=3, seed in any::<u64>()) {
            let inst = generate_instance(n, digits, seed).unwrap();
            let sol = solve_exact(&inst).unwrap();
            let (best, _) = brute_force_optimum(&inst);
            prop_assert_eq!(sol.delta.abs(), best);
            prop_assert!(sol.utility >= sol.baseline_utility);
            let v = verify(&inst, &sol.selected_ids()).unwrap();
            prop_assert_eq!(v.delta, sol.delta);
            prop_assert_eq!(v.is_lda, sol.status == LdaStatus::Found);
            prop_assert_eq!(sol.status == LdaStatus::Found, best < sol.baseline_delta.abs());
        }
    }
}
