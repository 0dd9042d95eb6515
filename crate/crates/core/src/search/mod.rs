//! Randomized LDA search over retrained models.
//!
//! A pool of models is trained by resampling the training split (`sample`)
//! or reseeding a random forest (`random_seed`), and each model's disparity
//! and utility is recorded on the train, eval and test splits. A trial draws
//! `n` models, keeps the one with the smallest eval |disparity| and compares
//! its test performance with the average of the `n` drawn.

mod models;

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LdaError, Result};
use crate::population::{metrics_from_predictions, Group, LabeledDataset};
use crate::seed::{derive_seed, rng};

pub use models::{train, LogisticModel, Model, ModelKind, Node, Trainer, TrainerSpec, Tree, FOREST_DEFAULT_MAX_DEPTH};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub eval_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, eval_fraction: f64, test_fraction: f64, seed: u64) -> Result<Self> {
        let spec = SplitSpec {
            train_fraction,
            eval_fraction,
            test_fraction,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let f = [self.train_fraction, self.eval_fraction, self.test_fraction];
        if f.iter().any(|x| !(x.is_finite() && *x > 0.0)) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(LdaError::InvalidParameter(format!(
                "split fractions must be positive and sum to 1, got {f:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Splits {
    pub train: LabeledDataset,
    pub eval: LabeledDataset,
    pub test: LabeledDataset,
}

impl Splits {
    pub fn get(&self, which: SplitName) -> &LabeledDataset {
        match which {
            SplitName::Train => &self.train,
            SplitName::Eval => &self.eval,
            SplitName::Test => &self.test,
        }
    }
}

fn check_split(name: &str, data: &LabeledDataset) -> Result<()> {
    let has = |g: Group, y: bool| data.rows().iter().any(|r| r.group == g && r.label == y);
    let missing: Vec<&str> = [
        (!has(Group::One, true) && !has(Group::One, false), "group 1"),
        (!has(Group::Two, true) && !has(Group::Two, false), "group 2"),
        (!data.rows().iter().any(|r| r.label), "positive labels"),
        (!data.rows().iter().any(|r| !r.label), "negative labels"),
    ]
    .into_iter()
    .filter_map(|(m, what)| m.then_some(what))
    .collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(LdaError::DegenerateSplit(format!("{name} split ({} rows) has no {}", data.len(), missing.join(", "))))
    }
}

/// Shuffled partition into train/eval/test. Train and eval sizes are the
/// rounded fractions of the row count; test takes the rest.
pub fn split(dataset: &LabeledDataset, spec: &SplitSpec) -> Result<Splits> {
    spec.validate()?;
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let n_train = ((n as f64 * spec.train_fraction).round() as usize).min(n);
    let n_eval = ((n as f64 * spec.eval_fraction).round() as usize).min(n - n_train);
    let (train, rest) = order.split_at(n_train);
    let (eval, test) = rest.split_at(n_eval);
    let splits = Splits {
        train: dataset.select(format!("{}/train", dataset.name), train),
        eval: dataset.select(format!("{}/eval", dataset.name), eval),
        test: dataset.select(format!("{}/test", dataset.name), test),
    };
    check_split("train", &splits.train)?;
    check_split("eval", &splits.eval)?;
    check_split("test", &splits.test)?;
    Ok(splits)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchType {
    /// Retrain on a bootstrap resample of the training split.
    Sample,
    /// Retrain on the full training split with a different seed.
    RandomSeed,
}

impl SearchType {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchType::Sample => "sample",
            SearchType::RandomSeed => "random_seed",
        }
    }
}

impl fmt::Display for SearchType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SearchType {
    type Err = LdaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" => Ok(SearchType::Sample),
            "random_seed" => Ok(SearchType::RandomSeed),
            _ => Err(LdaError::InvalidParameter(format!("unknown search type `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitName {
    Train,
    Eval,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Eval, SplitName::Test];

    pub fn as_str(&self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Eval => "eval",
            SplitName::Test => "test",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    /// Signed disparity `SR_1 - SR_2`.
    pub disparity: f64,
    pub utility: f64,
    pub sr_1: f64,
    pub sr_2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolRecord {
    pub model_id: usize,
    pub seed: u64,
    pub search_type: SearchType,
    pub train: SplitMetrics,
    pub eval: SplitMetrics,
    pub test: SplitMetrics,
}

impl PoolRecord {
    pub fn split(&self, which: SplitName) -> &SplitMetrics {
        match which {
            SplitName::Train => &self.train,
            SplitName::Eval => &self.eval,
            SplitName::Test => &self.test,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatePool {
    pub search_type: SearchType,
    pub lambda: f64,
    pub records: Vec<PoolRecord>,
}

impl CandidatePool {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Seed of pool member `model_id`.
pub fn model_seed(master_seed: u64, model_id: usize) -> u64 {
    derive_seed(master_seed, "pool-model", model_id as u64)
}

/// Trains the model of one pool member, exactly as [`build_pool`] does.
pub fn train_pool_member(
    trainer: &Trainer<'_>,
    train_rows: usize,
    search_type: SearchType,
    seed: u64,
) -> Result<Model> {
    let rows: Vec<usize> = match search_type {
        SearchType::Sample => {
            let mut r = rng(seed, "bootstrap", 0);
            (0..train_rows).map(|_| rand::Rng::random_range(&mut r, 0..train_rows)).collect()
        }
        SearchType::RandomSeed => (0..train_rows).collect(),
    };
    trainer.fit(&rows, seed)
}

pub fn split_metrics(model: &Model, data: &LabeledDataset, lambda: f64) -> Result<SplitMetrics> {
    let m = metrics_from_predictions(data, &model.predict_dataset(data), lambda)?;
    Ok(SplitMetrics {
        disparity: m.delta,
        utility: m.utility,
        sr_1: m.sr_1,
        sr_2: m.sr_2,
    })
}

pub fn build_pool(
    spec: &TrainerSpec,
    search_type: SearchType,
    splits: &Splits,
    count: usize,
    master_seed: u64,
    lambda: f64,
) -> Result<CandidatePool> {
    if search_type == SearchType::RandomSeed && spec.kind != ModelKind::RandomForest {
        return Err(LdaError::InvalidParameter(format!(
            "search type `random_seed` requires random_forest, got {}",
            spec.kind.as_str()
        )));
    }
    if count == 0 {
        return Err(LdaError::InvalidParameter("pool count must be positive".into()));
    }
    let trainer = Trainer::new(spec, &splits.train)?;
    let records = (0..count)
        .into_par_iter()
        .map(|model_id| {
            let seed = model_seed(master_seed, model_id);
            let model = train_pool_member(&trainer, splits.train.len(), search_type, seed)?;
            Ok(PoolRecord {
                model_id,
                seed,
                search_type,
                train: split_metrics(&model, &splits.train, lambda)?,
                eval: split_metrics(&model, &splits.eval, lambda)?,
                test: split_metrics(&model, &splits.test, lambda)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CandidatePool {
        search_type,
        lambda,
        records,
    })
}

const POOL_HEADER: [&str; 8] = ["model_id", "seed", "search_type", "split", "disparity", "utility", "sr_1", "sr_2"];

/// Three rows per model: train, eval, test.
pub fn write_pool_csv(pool: &CandidatePool, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(POOL_HEADER)?;
    for r in &pool.records {
        for which in SplitName::ALL {
            let m = r.split(which);
            w.write_record([
                r.model_id.to_string(),
                r.seed.to_string(),
                r.search_type.to_string(),
                which.as_str().to_string(),
                m.disparity.to_string(),
                m.utility.to_string(),
                m.sr_1.to_string(),
                m.sr_2.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_pool_csv(input: impl Read, lambda: f64) -> Result<CandidatePool> {
    #[derive(Deserialize)]
    struct Line {
        model_id: usize,
        seed: u64,
        search_type: SearchType,
        split: SplitName,
        disparity: f64,
        utility: f64,
        sr_1: f64,
        sr_2: f64,
    }
    let mut reader = csv::Reader::from_reader(input);
    let mut records: Vec<PoolRecord> = Vec::new();
    let mut pending: Vec<Line> = Vec::new();
    for (k, line) in reader.deserialize::<Line>().enumerate() {
        let line = line.map_err(|e| LdaError::Parse {
            line: k + 2,
            message: e.to_string(),
        })?;
        pending.push(line);
        if pending.len() == 3 {
            let lines = std::mem::take(&mut pending);
            let ok = lines.iter().map(|l| l.split).eq(SplitName::ALL)
                && lines.iter().all(|l| l.model_id == lines[0].model_id && l.seed == lines[0].seed);
            if !ok {
                return Err(LdaError::Parse {
                    line: k + 2,
                    message: "expected train, eval, test rows for each model".into(),
                });
            }
            let m = |l: &Line| SplitMetrics {
                disparity: l.disparity,
                utility: l.utility,
                sr_1: l.sr_1,
                sr_2: l.sr_2,
            };
            records.push(PoolRecord {
                model_id: lines[0].model_id,
                seed: lines[0].seed,
                search_type: lines[0].search_type,
                train: m(&lines[0]),
                eval: m(&lines[1]),
                test: m(&lines[2]),
            });
        }
    }
    if !pending.is_empty() {
        return Err(LdaError::Parse {
            line: 0,
            message: "pool file ends mid-model".into(),
        });
    }
    let search_type = records
        .first()
        .map(|r| r.search_type)
        .ok_or_else(|| LdaError::InvalidParameter("empty pool file".into()))?;
    if records.iter().any(|r| r.search_type != search_type) {
        return Err(LdaError::InvalidParameter("pool mixes search types".into()));
    }
    Ok(CandidatePool {
        search_type,
        lambda,
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub selected_model_id: usize,
    /// Selected test |disparity| minus the trial mean.
    pub delta_test_disparity: f64,
    /// Selected test utility minus the trial mean.
    pub delta_test_utility: f64,
    pub perfect_guess: bool,
    pub selected_eval_abs_disparity: f64,
    pub mean_eval_abs_disparity: f64,
}

/// Mean of `x_selected - x_i` over the drawn; exactly 0 when all are equal.
fn delta_vs_mean(drawn: &[&PoolRecord], selected: &PoolRecord, f: impl Fn(&PoolRecord) -> f64) -> f64 {
    let s = f(selected);
    drawn.iter().map(|r| s - f(r)).sum::<f64>() / drawn.len() as f64
}

/// One trial on records drawn without replacement.
pub fn subsample_select(pool: &CandidatePool, n: usize, seed: u64) -> Result<TrialRecord> {
    if n == 0 || n > pool.len() {
        return Err(LdaError::InvalidParameter(format!(
            "models per trial must lie in 1..={}, got {n}",
            pool.len()
        )));
    }
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let drawn: Vec<&PoolRecord> = index::sample(&mut r, pool.len(), n).into_iter().map(|i| &pool.records[i]).collect();
    Ok(select_among(&drawn))
}

fn select_among(drawn: &[&PoolRecord]) -> TrialRecord {
    let selected = *drawn
        .iter()
        .min_by(|a, b| {
            a.eval
                .disparity
                .abs()
                .total_cmp(&b.eval.disparity.abs())
                .then(a.model_id.cmp(&b.model_id))
        })
        .expect("at least one model drawn");
    let test_min = drawn.iter().map(|r| r.test.disparity.abs()).fold(f64::INFINITY, f64::min);
    TrialRecord {
        selected_model_id: selected.model_id,
        delta_test_disparity: delta_vs_mean(drawn, selected, |r| r.test.disparity.abs()),
        delta_test_utility: delta_vs_mean(drawn, selected, |r| r.test.utility),
        perfect_guess: selected.test.disparity.abs() == test_min,
        selected_eval_abs_disparity: selected.eval.disparity.abs(),
        mean_eval_abs_disparity: drawn.iter().map(|r| r.eval.disparity.abs()).sum::<f64>() / drawn.len() as f64,
    }
}

/// Summary of one delta over all reps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSummary {
    pub mean: f64,
    pub p2_5: f64,
    pub p97_5: f64,
    pub frac_negative: f64,
    pub frac_positive: f64,
    /// Sign constant in at least 95% of reps.
    pub significant: bool,
}

/// Linear-interpolation percentile of sorted data, `q` in [0, 100].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub const SIGNIFICANCE_SHARE: f64 = 0.95;

fn summarize(values: &[f64]) -> DeltaSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let frac_negative = values.iter().filter(|&&v| v < 0.0).count() as f64 / n;
    let frac_positive = values.iter().filter(|&&v| v > 0.0).count() as f64 / n;
    DeltaSummary {
        mean: values.iter().sum::<f64>() / n,
        p2_5: percentile(&sorted, 2.5),
        p97_5: percentile(&sorted, 97.5),
        frac_negative,
        frac_positive,
        significant: frac_negative.max(frac_positive) >= SIGNIFICANCE_SHARE,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialStatistics {
    pub n: usize,
    pub reps: usize,
    pub disparity: DeltaSummary,
    pub utility: DeltaSummary,
    pub perfect_guess_freq: f64,
    /// Trials whose selected eval |disparity| exceeded the trial mean (always 0).
    pub eval_improvement_violations: usize,
}

/// Seed of rep `rep` for trials of size `n`.
pub fn trial_seed(seed: u64, n: usize, rep: usize) -> u64 {
    derive_seed(derive_seed(seed, "trial-size", n as u64), "trial-rep", rep as u64)
}

pub fn run_trials(pool: &CandidatePool, n: usize, reps: usize, seed: u64) -> Result<Vec<TrialRecord>> {
    if reps == 0 {
        return Err(LdaError::InvalidParameter("reps must be at least 1".into()));
    }
    (0..reps)
        .into_par_iter()
        .map(|rep| subsample_select(pool, n, trial_seed(seed, n, rep)))
        .collect()
}

pub fn trial_statistics(pool: &CandidatePool, n: usize, reps: usize, seed: u64) -> Result<TrialStatistics> {
    let trials = run_trials(pool, n, reps, seed)?;
    let disparity: Vec<f64> = trials.iter().map(|t| t.delta_test_disparity).collect();
    let utility: Vec<f64> = trials.iter().map(|t| t.delta_test_utility).collect();
    let hits = trials.iter().filter(|t| t.perfect_guess).count();
    let violations = trials
        .iter()
        .filter(|t| t.selected_eval_abs_disparity > t.mean_eval_abs_disparity + 1e-12)
        .count();
    Ok(TrialStatistics {
        n,
        reps,
        disparity: summarize(&disparity),
        utility: summarize(&utility),
        perfect_guess_freq: hits as f64 / reps as f64,
        eval_improvement_violations: violations,
    })
}

pub fn perfect_guess_frequency(
    pool: &CandidatePool,
    n_values: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    n_values
        .iter()
        .map(|&n| Ok((n, trial_statistics(pool, n, reps, seed)?.perfect_guess_freq)))
        .collect()
}

pub fn sweep(pool: &CandidatePool, n_values: &[usize], reps: usize, seed: u64) -> Result<Vec<TrialStatistics>> {
    n_values.iter().map(|&n| trial_statistics(pool, n, reps, seed)).collect()
}

pub fn write_statistics_csv(stats: &[TrialStatistics], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "reps",
        "disparity_mean",
        "disparity_p2_5",
        "disparity_p97_5",
        "disparity_significant",
        "utility_mean",
        "utility_p2_5",
        "utility_p97_5",
        "utility_significant",
        "perfect_guess_freq",
    ])?;
    for s in stats {
        w.write_record([
            s.n.to_string(),
            s.reps.to_string(),
            s.disparity.mean.to_string(),
            s.disparity.p2_5.to_string(),
            s.disparity.p97_5.to_string(),
            s.disparity.significant.to_string(),
            s.utility.mean.to_string(),
            s.utility.p2_5.to_string(),
            s.utility.p97_5.to_string(),
            s.utility.significant.to_string(),
            s.perfect_guess_freq.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row in the layout of a results table: mean changes with significance
/// flags and the perfect-guess frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub model: String,
    pub search_type: SearchType,
    pub n: usize,
    pub disparity: f64,
    pub disparity_significant: bool,
    pub utility: f64,
    pub utility_significant: bool,
    pub freq_min_disp: f64,
}

pub fn summary_row(kind: ModelKind, search_type: SearchType, stats: &TrialStatistics) -> SearchSummary {
    SearchSummary {
        model: kind.as_str().to_string(),
        search_type,
        n: stats.n,
        disparity: stats.disparity.mean,
        disparity_significant: stats.disparity.significant,
        utility: stats.utility.mean,
        utility_significant: stats.utility.significant,
        freq_min_disp: stats.perfect_guess_freq,
    }
}

#[cfg(test)]
mod tests;
