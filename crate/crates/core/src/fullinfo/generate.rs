//! Random full-information instances with a controlled number of decimal digits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FullInfoInstance, Rational, ValueRecord};
use crate::error::{LdaError, Result};

const MAX_RETRIES: usize = 100;

/// Uniform draws normalized to sum to `10^digits`, rounded to integers, with
/// the rounding residual added to the largest entry.
fn density_numerators(rng: &mut impl Rng, n: usize, scale: i128) -> Option<Vec<i128>> {
    let draws: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let total: f64 = draws.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let mut k: Vec<i128> = draws
        .iter()
        .map(|x| (x / total * scale as f64).round() as i128)
        .collect();
    let residual = scale - k.iter().sum::<i128>();
    let largest = (0..n).max_by_key(|&i| (k[i], std::cmp::Reverse(i)))?;
    k[largest] += residual;
    k.iter().all(|&v| (0..=scale).contains(&v)).then_some(k)
}

/// Instance with `n_options` values, densities with at most `max_digits`
/// decimals, Bayes probabilities with at most 2 decimals, `lambda = 1`, and a
/// random nonempty proper baseline subset.
pub fn generate_instance(n_options: usize, max_digits: u32, seed: u64) -> Result<FullInfoInstance> {
    generate_instance_with_lambda(n_options, max_digits, Rational::from_integer(1), seed)
}

pub fn generate_instance_with_lambda(
    n_options: usize,
    max_digits: u32,
    lambda: Rational,
    seed: u64,
) -> Result<FullInfoInstance> {
    if n_options < 2 {
        return Err(LdaError::InvalidParameter("n_options must be at least 2".into()));
    }
    if !(1..=18).contains(&max_digits) {
        return Err(LdaError::InvalidParameter("max_digits must lie in 1..=18".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 10i128.pow(max_digits);
    for _ in 0..MAX_RETRIES {
        let (Some(r1), Some(r2)) = (
            density_numerators(&mut rng, n_options, scale),
            density_numerators(&mut rng, n_options, scale),
        ) else {
            continue;
        };
        let values: Vec<ValueRecord> = (0..n_options)
            .map(|i| ValueRecord {
                id: format!("x{}", i + 1),
                rho1: Rational::new(r1[i], scale),
                rho2: Rational::new(r2[i], scale),
                sigma: Rational::new(rng.random_range(0..=100), 100),
            })
            .collect();
        let full = (1u64 << n_options.min(63)) - 1;
        let mask = rng.random_range(1..full);
        let baseline = (0..n_options)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| values[i].id.clone())
            .collect();
        return FullInfoInstance::new(values, lambda, baseline, Some(max_digits));
    }
    Err(LdaError::InvalidParameter(format!(
        "could not generate densities for n_options={n_options}, max_digits={max_digits} after {MAX_RETRIES} attempts"
    )))
}
