//! Trimmed-list approximation scheme.
//!
//! Partial selections are kept as `(disparity, utility)` states. After each
//! value is processed, states whose signed disparity falls in the same
//! bucket of width `w = eps * |delta0| / (2 n (1 + eps))` are merged, keeping
//! the one with the largest utility. Positive and negative partial sums land
//! in disjoint buckets, so both sides are trimmed independently. A state
//! tracking any subset `S` survives with utility at least `U(S)` and
//! disparity within `n * w` of `delta(S)`; if `|delta(S)| <= |delta0| / (1 + eps)`
//! the survivor therefore has `|delta| <= |delta0| (1 + eps / 2) / (1 + eps) < |delta0|`.
//! The number of live states is at most `2 * sum|d| / w + 2`.

use num_traits::Signed;

use super::{FullInfoInstance, Integerized, LdaSolution, LdaStatus};
use crate::error::{LdaError, Result};

#[derive(Clone, Copy, Debug)]
struct State {
    d: i128,
    u: i128,
    /// Index into the previous layer, `u32::MAX` for the root.
    parent: u32,
    took: bool,
}

pub fn solve_approx(instance: &FullInfoInstance, epsilon: f64) -> Result<LdaSolution> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(LdaError::InvalidParameter(format!(
            "epsilon must be a positive real, got {epsilon}"
        )));
    }
    let ints = Integerized::new(instance)?;
    if ints.d0 == 0 {
        let base: Vec<usize> = (0..ints.d.len())
            .filter(|&i| instance.baseline.contains(&ints.scores[i].id))
            .collect();
        return Ok(ints.solution(
            LdaStatus::NotFoundAtEpsilon,
            &base,
            Some("baseline disparity is zero; no alternative can have strictly smaller disparity".into()),
        ));
    }

    let n = ints.d.len();
    let width_f = epsilon * ints.d0.abs() as f64 / (2.0 * n as f64 * (1.0 + epsilon));
    // Flooring only tightens the guarantee.
    let width = (width_f.floor() as i128).max(1);

    let mut layers: Vec<Vec<State>> = Vec::with_capacity(n + 1);
    layers.push(vec![State {
        d: 0,
        u: 0,
        parent: u32::MAX,
        took: false,
    }]);
    for i in 0..n {
        let prev = &layers[i];
        let mut merged: Vec<State> = Vec::with_capacity(prev.len() * 2);
        for (p, s) in prev.iter().enumerate() {
            merged.push(State {
                d: s.d,
                u: s.u,
                parent: p as u32,
                took: false,
            });
            merged.push(State {
                d: s.d + ints.d[i],
                u: s.u + ints.u[i],
                parent: p as u32,
                took: true,
            });
        }
        // Within a bucket keep max utility, then smaller |d|, then the earlier state.
        merged.sort_by(|a, b| {
            a.d.div_euclid(width)
                .cmp(&b.d.div_euclid(width))
                .then(b.u.cmp(&a.u))
                .then(a.d.abs().cmp(&b.d.abs()))
                .then(a.took.cmp(&b.took))
        });
        merged.dedup_by(|later, first| later.d.div_euclid(width) == first.d.div_euclid(width));
        layers.push(merged);
    }

    let last = &layers[n];
    let pick = last
        .iter()
        .enumerate()
        .filter(|(_, s)| s.u >= ints.u0)
        .min_by(|(_, a), (_, b)| {
            a.d.abs()
                .cmp(&b.d.abs())
                .then(b.u.cmp(&a.u))
                .then(b.d.cmp(&a.d))
        })
        .map(|(i, _)| i);

    let Some(mut at) = pick else {
        return Ok(ints.solution(
            LdaStatus::NotFoundAtEpsilon,
            &[],
            Some("no surviving state meets the baseline utility".into()),
        ));
    };
    let found = last[at].d.abs() < ints.d0.abs();
    let mut selected = Vec::new();
    for i in (1..=n).rev() {
        let s = layers[i][at];
        if s.took {
            selected.push(i - 1);
        }
        at = s.parent as usize;
    }
    let sol = ints.solution(
        if found { LdaStatus::Found } else { LdaStatus::NotFoundAtEpsilon },
        &selected,
        None,
    );
    if sol.status == LdaStatus::Found && !(sol.utility >= sol.baseline_utility && sol.delta.abs() < sol.baseline_delta.abs()) {
        return Err(LdaError::Internal("approximate solution fails its own check".into()));
    }
    Ok(sol)
}
