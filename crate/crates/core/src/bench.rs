//! Runtime and hit-rate comparison of the exact and approximate
//! full-information solvers on generated instances.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LdaError, Result};
use crate::fullinfo::{
    generate_instance, input_size_digits, solve_approx, solve_exact_with, verify, ExactOptions, FullInfoInstance,
    LdaSolution, LdaStatus,
};
use crate::seed::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub n_options_values: Vec<usize>,
    pub max_digits_values: Vec<u32>,
    pub instance_count: usize,
    pub epsilons: Vec<f64>,
    pub master_seed: u64,
    /// Limit on one exact solve, in milliseconds.
    pub time_limit_ms: u64,
    /// Each timed solve repeats until this much time has elapsed; the
    /// reported time is the per-call average.
    pub min_timing_ms: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_options_values: vec![4, 5],
            max_digits_values: vec![1, 2, 3, 4],
            instance_count: 250,
            epsilons: vec![0.5, 0.1, 0.01],
            master_seed: 0,
            time_limit_ms: 60_000,
            min_timing_ms: 1.0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.instance_count == 0 {
            return Err(LdaError::InvalidParameter("instance_count must be positive".into()));
        }
        if self.n_options_values.is_empty() || self.max_digits_values.is_empty() {
            return Err(LdaError::InvalidParameter("n_options and max_digits lists must be nonempty".into()));
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(LdaError::InvalidParameter("epsilons must be nonempty and positive".into()));
        }
        if !(self.min_timing_ms.is_finite() && self.min_timing_ms >= 0.0) {
            return Err(LdaError::InvalidParameter("min_timing_ms must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchInstance {
    pub instance_id: usize,
    pub n_options: usize,
    pub max_digits: u32,
    pub instance: FullInfoInstance,
}

/// Instance `i` cycles through `n_options_values`, then `max_digits_values`.
pub fn generate_bench_instances(config: &BenchConfig) -> Result<Vec<BenchInstance>> {
    config.validate()?;
    let n_n = config.n_options_values.len();
    let n_d = config.max_digits_values.len();
    (0..config.instance_count)
        .map(|i| {
            let n_options = config.n_options_values[i % n_n];
            let max_digits = config.max_digits_values[(i / n_n) % n_d];
            let seed = derive_seed(config.master_seed, "bench-instance", i as u64);
            Ok(BenchInstance {
                instance_id: i,
                n_options,
                max_digits,
                instance: generate_instance(n_options, max_digits, seed)?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance_id: usize,
    pub n_options: usize,
    pub max_digits: u32,
    pub input_digits: u32,
    /// `exact` or `approx`.
    pub algorithm: String,
    pub epsilon: Option<f64>,
    pub wall_ms: f64,
    /// A solver status, or `timed_out`.
    pub status: String,
    /// False only if a `found` selection fails verification.
    pub valid: bool,
    /// Ground truth from the exact solver; `None` when it timed out.
    pub lda_exists: Option<bool>,
}

impl BenchRow {
    pub fn algorithm_label(&self) -> String {
        match self.epsilon {
            Some(e) => format!("approx(eps={e})"),
            None => self.algorithm.clone(),
        }
    }

    pub fn found(&self) -> bool {
        self.status == LdaStatus::Found.as_str()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
}

/// Average wall time of `solve` over repeated calls, after one warm-up call
/// whose result is returned.
fn timed<T>(min_ms: f64, mut solve: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let result = solve()?;
    let start = Instant::now();
    let mut calls = 0u32;
    loop {
        solve()?;
        calls += 1;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        if elapsed >= min_ms || calls >= 1_000_000 {
            return Ok((result, elapsed / f64::from(calls)));
        }
    }
}

fn is_valid(instance: &FullInfoInstance, solution: &LdaSolution) -> Result<bool> {
    if solution.status != LdaStatus::Found {
        return Ok(true);
    }
    Ok(verify(instance, &solution.selected_ids())?.is_lda)
}

fn bench_one(config: &BenchConfig, b: &BenchInstance) -> Result<Vec<BenchRow>> {
    let input_digits = input_size_digits(&b.instance)?;
    let row = |algorithm: &str, epsilon, wall_ms, status: &str, valid, lda_exists| BenchRow {
        instance_id: b.instance_id,
        n_options: b.n_options,
        max_digits: b.max_digits,
        input_digits,
        algorithm: algorithm.to_string(),
        epsilon,
        wall_ms,
        status: status.to_string(),
        valid,
        lda_exists,
    };
    let limit = Duration::from_millis(config.time_limit_ms);
    let exact = timed(config.min_timing_ms, || {
        solve_exact_with(
            &b.instance,
            ExactOptions {
                deadline: Some(Instant::now() + limit),
                ..ExactOptions::default()
            },
        )
    });
    let mut rows = Vec::with_capacity(1 + config.epsilons.len());
    let lda_exists = match exact {
        Ok((sol, ms)) => {
            let exists = sol.status == LdaStatus::Found;
            rows.push(row("exact", None, ms, sol.status.as_str(), is_valid(&b.instance, &sol)?, Some(exists)));
            Some(exists)
        }
        Err(LdaError::TimedOut | LdaError::InstanceTooLarge { .. }) => {
            rows.push(row("exact", None, limit.as_secs_f64() * 1e3, "timed_out", true, None));
            None
        }
        Err(e) => return Err(e),
    };
    for &eps in &config.epsilons {
        let (sol, ms) = timed(config.min_timing_ms, || solve_approx(&b.instance, eps))?;
        let mut valid = is_valid(&b.instance, &sol)?;
        if sol.status == LdaStatus::Found && lda_exists == Some(false) {
            valid = false;
        }
        rows.push(row("approx", Some(eps), ms, sol.status.as_str(), valid, lda_exists));
    }
    Ok(rows)
}

pub fn run_on_instances(config: &BenchConfig, instances: &[BenchInstance]) -> Result<BenchReport> {
    config.validate()?;
    let per_instance = instances
        .par_iter()
        .map(|b| bench_one(config, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(BenchReport {
        config: config.clone(),
        rows: per_instance.into_iter().flatten().collect(),
    })
}

pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    let instances = generate_bench_instances(config)?;
    run_on_instances(config, &instances)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HitRate {
    pub algorithm: String,
    pub epsilon: Option<f64>,
    pub found: usize,
    pub positives: usize,
    pub rate: f64,
}

/// Per algorithm, found / instances with an LDA. Instances whose exact solve
/// timed out are excluded.
pub fn hit_rate(report: &BenchReport) -> Result<Vec<HitRate>> {
    if report.rows.is_empty() {
        return Err(LdaError::InvalidParameter("empty benchmark report".into()));
    }
    let mut by_algo: BTreeMap<String, HitRate> = BTreeMap::new();
    let mut order = Vec::new();
    for r in &report.rows {
        let label = r.algorithm_label();
        let entry = by_algo.entry(label.clone()).or_insert_with(|| {
            order.push(label);
            HitRate {
                algorithm: r.algorithm.clone(),
                epsilon: r.epsilon,
                found: 0,
                positives: 0,
                rate: 0.0,
            }
        });
        if r.lda_exists == Some(true) {
            entry.positives += 1;
            entry.found += usize::from(r.found());
        }
    }
    if by_algo.values().all(|h| h.positives == 0) {
        return Err(LdaError::NoPositiveInstances);
    }
    Ok(order
        .into_iter()
        .map(|label| {
            let mut h = by_algo.remove(&label).expect("label recorded");
            h.rate = h.found as f64 / h.positives as f64;
            h
        })
        .collect())
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        (values[m - 1] + values[m]) / 2.0
    })
}

/// Median wall time per algorithm and digit bucket, excluding timeouts.
pub fn median_times(report: &BenchReport) -> BTreeMap<String, BTreeMap<u32, f64>> {
    let mut times: BTreeMap<String, BTreeMap<u32, Vec<f64>>> = BTreeMap::new();
    for r in report.rows.iter().filter(|r| r.status != "timed_out") {
        times
            .entry(r.algorithm_label())
            .or_default()
            .entry(r.max_digits)
            .or_default()
            .push(r.wall_ms);
    }
    times
        .into_iter()
        .map(|(algo, buckets)| {
            let medians = buckets
                .into_iter()
                .filter_map(|(d, mut v)| median(&mut v).map(|m| (d, m)))
                .collect();
            (algo, medians)
        })
        .collect()
}

/// Least-squares slope of `log10(median ms)` against the digit bucket.
pub fn log10_growth_per_digit(medians: &BTreeMap<u32, f64>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = medians
        .iter()
        .filter(|(_, &m)| m > 0.0)
        .map(|(&d, &m)| (f64::from(d), m.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub instances: usize,
    pub timed_out: usize,
    pub invalid_rows: usize,
    pub hit_rates: Vec<HitRate>,
    pub median_wall_ms: BTreeMap<String, BTreeMap<u32, f64>>,
    pub log10_growth_per_digit: BTreeMap<String, Option<f64>>,
}

pub fn summarize(report: &BenchReport) -> Result<BenchSummary> {
    let median_wall_ms = median_times(report);
    let growth = median_wall_ms.iter().map(|(a, m)| (a.clone(), log10_growth_per_digit(m))).collect();
    let mut ids: Vec<usize> = report.rows.iter().map(|r| r.instance_id).collect();
    ids.dedup();
    Ok(BenchSummary {
        instances: ids.len(),
        timed_out: report.rows.iter().filter(|r| r.status == "timed_out").count(),
        invalid_rows: report.rows.iter().filter(|r| !r.valid).count(),
        hit_rates: hit_rate(report)?,
        median_wall_ms,
        log10_growth_per_digit: growth,
    })
}

pub fn write_report_csv(report: &BenchReport, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "instance_id",
        "n_options",
        "max_digits",
        "input_digits",
        "algorithm",
        "epsilon",
        "wall_ms",
        "status",
        "valid",
        "lda_exists",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.instance_id.to_string(),
            r.n_options.to_string(),
            r.max_digits.to_string(),
            r.input_digits.to_string(),
            r.algorithm.clone(),
            r.epsilon.map_or(String::new(), |e| e.to_string()),
            format!("{:.6}", r.wall_ms),
            r.status.clone(),
            r.valid.to_string(),
            r.lda_exists.map_or(String::new(), |b| b.to_string()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(count: usize) -> BenchConfig {
        BenchConfig {
            instance_count: count,
            min_timing_ms: 0.0,
            ..BenchConfig::default()
        }
    }

    #[test]
    fn row_counts() {
        let report = run_benchmark(&quick(1)).unwrap();
        assert_eq!(report.rows.len(), 4);
        let report = run_benchmark(&quick(16)).unwrap();
        assert_eq!(report.rows.len(), 16 * 4);
    }

    #[test]
    fn rows_are_consistent_and_deterministic() {
        let a = run_benchmark(&quick(40)).unwrap();
        let b = run_benchmark(&quick(40)).unwrap();
        let strip = |r: &BenchReport| -> Vec<BenchRow> {
            r.rows.iter().cloned().map(|row| BenchRow { wall_ms: 0.0, ..row }).collect()
        };
        assert_eq!(strip(&a), strip(&b));
        for r in &a.rows {
            assert!(r.valid);
            let exact = a.rows.iter().find(|e| e.instance_id == r.instance_id && e.epsilon.is_none()).unwrap();
            assert_eq!(r.lda_exists, exact.lda_exists);
            if r.found() {
                assert_eq!(r.lda_exists, Some(true));
            }
        }
        let rates = hit_rate(&a).unwrap();
        assert_eq!(rates[0].algorithm, "exact");
        assert_eq!(rates[0].rate, 1.0);
    }

    #[test]
    fn instance_grid_covers_buckets() {
        let inst = generate_bench_instances(&quick(16)).unwrap();
        let mut seen: Vec<(usize, u32)> = inst.iter().map(|b| (b.n_options, b.max_digits)).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 8);
        assert_eq!(inst, generate_bench_instances(&quick(16)).unwrap());
    }

    #[test]
    fn hit_rate_needs_positives() {
        let row = BenchRow {
            instance_id: 0,
            n_options: 4,
            max_digits: 1,
            input_digits: 10,
            algorithm: "exact".into(),
            epsilon: None,
            wall_ms: 0.1,
            status: "none_exists".into(),
            valid: true,
            lda_exists: Some(false),
        };
        let report = BenchReport {
            config: quick(1),
            rows: vec![row],
        };
        assert!(matches!(hit_rate(&report), Err(LdaError::NoPositiveInstances)));
    }

    #[test]
    fn timeouts_are_reported_and_excluded() {
        let config = BenchConfig {
            time_limit_ms: 0,
            ..quick(4)
        };
        let report = run_benchmark(&config).unwrap();
        assert!(report.rows.iter().filter(|r| r.epsilon.is_none()).all(|r| r.status == "timed_out"));
        assert!(report.rows.iter().all(|r| r.lda_exists.is_none()));
        assert!(matches!(hit_rate(&report), Err(LdaError::NoPositiveInstances)));
    }

    #[test]
    fn slope_of_exponential_medians() {
        let m: BTreeMap<u32, f64> = [(1, 1e-3), (2, 1e-2), (3, 1e-1)].into();
        assert!((log10_growth_per_digit(&m).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(median(&mut [3.0, 1.0, 2.0, 10.0]), Some(2.5));
    }

    #[test]
    fn rejects_bad_config() {
        assert!(run_benchmark(&quick(0)).is_err());
        let bad = BenchConfig {
            epsilons: vec![0.0],
            ..quick(1)
        };
        assert!(run_benchmark(&bad).is_err());
    }
}
