//! Logistic regression, decision tree and random forest, trained from scratch
//! with optional balanced class weights.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LdaError, Result};
use crate::population::LabeledDataset;
use crate::seed::derive_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    LogisticRegression,
    DecisionTree,
    RandomForest,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::DecisionTree => "decision_tree",
            ModelKind::RandomForest => "random_forest",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainerSpec {
    pub kind: ModelKind,
    /// Depth limit for trees; `None` means unlimited for a single tree and 5
    /// for forest members.
    pub max_depth: Option<usize>,
    pub n_trees: usize,
    pub balanced_weights: bool,
    pub iterations: usize,
    pub step_size: f64,
    pub l2: f64,
    pub min_samples_split: usize,
}

impl Default for TrainerSpec {
    fn default() -> Self {
        TrainerSpec {
            kind: ModelKind::RandomForest,
            max_depth: None,
            n_trees: 100,
            balanced_weights: true,
            iterations: 300,
            step_size: 1.0,
            l2: 1e-4,
            min_samples_split: 2,
        }
    }
}

pub const FOREST_DEFAULT_MAX_DEPTH: usize = 5;

impl TrainerSpec {
    pub fn new(kind: ModelKind) -> Self {
        TrainerSpec {
            kind,
            ..TrainerSpec::default()
        }
    }

    pub fn effective_max_depth(&self) -> Option<usize> {
        match (self.kind, self.max_depth) {
            (ModelKind::RandomForest, None) => Some(FOREST_DEFAULT_MAX_DEPTH),
            (_, d) => d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == ModelKind::RandomForest && self.n_trees == 0 {
            return Err(LdaError::InvalidParameter("n_trees must be positive".into()));
        }
        if self.kind == ModelKind::LogisticRegression && !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(LdaError::InvalidParameter("step_size must be positive".into()));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(LdaError::InvalidParameter("l2 must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A trained classifier. `score` estimates `P[y = 1 | x]`; predictions select
/// iff the score exceeds 1/2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Logistic(LogisticModel),
    Tree(Tree),
    Forest(Vec<Tree>),
}

impl Model {
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Model::Logistic(m) => m.score(x),
            Model::Tree(t) => t.score(x),
            Model::Forest(trees) => trees.iter().map(|t| t.score(x)).sum::<f64>() / trees.len() as f64,
        }
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.score(x) > 0.5
    }

    pub fn predict_dataset(&self, data: &LabeledDataset) -> Vec<bool> {
        data.rows().iter().map(|r| self.predict(&r.features)).collect()
    }
}

/// Trains on every row of `data`.
pub fn train(spec: &TrainerSpec, data: &LabeledDataset, seed: u64) -> Result<Model> {
    let all: Vec<usize> = (0..data.len()).collect();
    Trainer::new(spec, data)?.fit(&all, seed)
}

/// Reusable training state for one dataset; `fit` takes a row multiset so
/// bootstrap resamples share the feature binning.
pub struct Trainer<'a> {
    spec: &'a TrainerSpec,
    data: &'a LabeledDataset,
    bins: Option<Binned>,
}

impl<'a> Trainer<'a> {
    pub fn new(spec: &'a TrainerSpec, data: &'a LabeledDataset) -> Result<Self> {
        spec.validate()?;
        for (i, row) in data.rows().iter().enumerate() {
            if let Some(j) = row.features.iter().position(|x| !x.is_finite()) {
                return Err(LdaError::NonFiniteFeature { row: i, column: j });
            }
        }
        let bins = (spec.kind != ModelKind::LogisticRegression).then(|| Binned::new(data));
        Ok(Trainer { spec, data, bins })
    }

    pub fn fit(&self, rows: &[usize], seed: u64) -> Result<Model> {
        let labels: Vec<bool> = rows.iter().map(|&i| self.data.rows()[i].label).collect();
        let n_pos = labels.iter().filter(|&&y| y).count();
        let n_neg = labels.len() - n_pos;
        if n_pos == 0 || n_neg == 0 {
            return Err(LdaError::DegenerateLabels {
                n_pos: n_pos as u64,
                n_neg: n_neg as u64,
            });
        }
        // Balanced weights n / (2 n_c) give both classes equal total weight.
        let (w_pos, w_neg) = if self.spec.balanced_weights {
            let n = labels.len() as f64;
            (n / (2.0 * n_pos as f64), n / (2.0 * n_neg as f64))
        } else {
            (1.0, 1.0)
        };
        let weights: Vec<f64> = labels.iter().map(|&y| if y { w_pos } else { w_neg }).collect();
        let bins = || self.bins.as_ref().expect("tree models are binned");
        Ok(match self.spec.kind {
            ModelKind::LogisticRegression => Model::Logistic(fit_logistic(self.spec, self.data, rows, &weights)),
            ModelKind::DecisionTree => {
                let cfg = TreeConfig::new(self.spec, None);
                Model::Tree(grow_tree(bins(), rows, &weights, &cfg, &mut ChaCha8Rng::seed_from_u64(seed)))
            }
            ModelKind::RandomForest => {
                let p = self.data.n_features();
                let cfg = TreeConfig::new(self.spec, Some((p as f64).sqrt().ceil() as usize));
                let trees = (0..self.spec.n_trees)
                    .map(|t| {
                        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "tree", t as u64));
                        let draws: Vec<usize> = (0..rows.len()).map(|_| rng.random_range(0..rows.len())).collect();
                        let sample: Vec<usize> = draws.iter().map(|&k| rows[k]).collect();
                        let w: Vec<f64> = draws.iter().map(|&k| weights[k]).collect();
                        grow_tree(bins(), &sample, &w, &cfg, &mut rng)
                    })
                    .collect();
                Model::Forest(trees)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    fn margin(&self, x: &[f64]) -> f64 {
        self.bias
            + x.iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .zip(&self.weights)
                .map(|(((x, m), s), w)| w * (x - m) / s)
                .sum::<f64>()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        1.0 / (1.0 + (-self.margin(x)).exp())
    }
}

/// Full-batch gradient descent on the weight-normalized log-loss plus
/// `l2 / 2 * |w|^2`, on features standardized with the training statistics.
fn fit_logistic(spec: &TrainerSpec, data: &LabeledDataset, rows: &[usize], weights: &[f64]) -> LogisticModel {
    let p = data.n_features();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; p];
    for &i in rows {
        for (m, x) in mean.iter_mut().zip(&data.rows()[i].features) {
            *m += x / n;
        }
    }
    let mut var = vec![0.0; p];
    for &i in rows {
        for ((v, x), m) in var.iter_mut().zip(&data.rows()[i].features).zip(&mean) {
            *v += (x - m) * (x - m) / n;
        }
    }
    let scale: Vec<f64> = var.iter().map(|v| if *v > 0.0 { v.sqrt() } else { 1.0 }).collect();
    let z: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| {
            data.rows()[i].features.iter().zip(&mean).zip(&scale).map(|((x, m), s)| (x - m) / s).collect()
        })
        .collect();
    let y: Vec<f64> = rows.iter().map(|&i| f64::from(u8::from(data.rows()[i].label))).collect();
    let total_w: f64 = weights.iter().sum();

    let mut w = vec![0.0; p];
    let mut b = 0.0;
    let mut grad = vec![0.0; p];
    for _ in 0..spec.iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for ((zi, yi), wi) in z.iter().zip(&y).zip(weights) {
            let margin = b + zi.iter().zip(&w).map(|(a, c)| a * c).sum::<f64>();
            let r = wi * (1.0 / (1.0 + (-margin).exp()) - yi) / total_w;
            grad_b += r;
            for (g, a) in grad.iter_mut().zip(zi) {
                *g += r * a;
            }
        }
        for (wj, g) in w.iter_mut().zip(&grad) {
            *wj -= spec.step_size * (g + spec.l2 * *wj);
        }
        b -= spec.step_size * grad_b;
    }
    LogisticModel {
        mean,
        scale,
        weights: w,
        bias: b,
    }
}

/// Per-feature rank of each row among the feature's sorted distinct values.
struct Binned {
    /// `codes[j][i]`: bin of row `i` on feature `j`.
    codes: Vec<Vec<u32>>,
    /// `values[j][b]`: the value of bin `b`.
    values: Vec<Vec<f64>>,
    labels: Vec<bool>,
}

impl Binned {
    fn new(data: &LabeledDataset) -> Self {
        let p = data.n_features();
        let mut codes = Vec::with_capacity(p);
        let mut values = Vec::with_capacity(p);
        for j in 0..p {
            let column: Vec<f64> = data.rows().iter().map(|r| r.features[j]).collect();
            let mut distinct = column.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            codes.push(
                column
                    .iter()
                    .map(|x| distinct.partition_point(|v| v < x) as u32)
                    .collect(),
            );
            values.push(distinct);
        }
        Binned {
            codes,
            values,
            labels: data.labels(),
        }
    }
}

struct TreeConfig {
    max_depth: Option<usize>,
    min_samples_split: usize,
    features_per_split: Option<usize>,
}

impl TreeConfig {
    fn new(spec: &TrainerSpec, features_per_split: Option<usize>) -> Self {
        TreeConfig {
            max_depth: spec.effective_max_depth(),
            min_samples_split: spec.min_samples_split.max(2),
            features_per_split,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        score: f64,
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    /// Node 0 is the root.
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn score(&self, x: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Leaf { score } => return score,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => k = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, k: usize) -> usize {
            match t.nodes[k] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, left).max(go(t, right)),
            }
        }
        go(self, 0)
    }
}

fn gini(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = pos / total;
    2.0 * p * (1.0 - p)
}

struct Candidate {
    feature: usize,
    bin: u32,
    threshold: f64,
    impurity: f64,
}

/// Best weighted-Gini split of one feature over the rows `items`
/// (`(row, weight, label)`), or `None` if the feature is constant there.
fn best_split_on(bins: &Binned, j: usize, items: &[(usize, f64, bool)], hist: &mut Vec<(f64, f64)>) -> Option<Candidate> {
    let codes = &bins.codes[j];
    let values = &bins.values[j];
    let (total, total_pos) = items.iter().fold((0.0, 0.0), |(t, p), &(_, w, y)| (t + w, if y { p + w } else { p }));

    // Weighted (total, positive) per occupied bin, in bin order.
    let mut occupied: Vec<(u32, f64, f64)> = Vec::new();
    if items.len() * 8 >= values.len() {
        hist.clear();
        hist.resize(values.len(), (0.0, 0.0));
        for &(i, w, y) in items {
            let h = &mut hist[codes[i] as usize];
            h.0 += w;
            if y {
                h.1 += w;
            }
        }
        occupied.extend(hist.iter().enumerate().filter(|(_, h)| h.0 > 0.0).map(|(b, h)| (b as u32, h.0, h.1)));
    } else {
        let mut keyed: Vec<(u32, f64, bool)> = items.iter().map(|&(i, w, y)| (codes[i], w, y)).collect();
        keyed.sort_unstable_by_key(|k| k.0);
        for (b, w, y) in keyed {
            match occupied.last_mut() {
                Some(last) if last.0 == b => {
                    last.1 += w;
                    if y {
                        last.2 += w;
                    }
                }
                _ => occupied.push((b, w, if y { w } else { 0.0 })),
            }
        }
    }
    if occupied.len() < 2 {
        return None;
    }
    let mut best: Option<Candidate> = None;
    let (mut left, mut left_pos) = (0.0, 0.0);
    for k in 0..occupied.len() - 1 {
        left += occupied[k].1;
        left_pos += occupied[k].2;
        let right = total - left;
        let impurity = (left * gini(left_pos, left) + right * gini(total_pos - left_pos, right)) / total;
        if best.as_ref().is_none_or(|c| impurity < c.impurity) {
            let (lo, hi) = (values[occupied[k].0 as usize], values[occupied[k + 1].0 as usize]);
            let mut threshold = lo + (hi - lo) / 2.0;
            // Guard against the midpoint rounding up to `hi`.
            if threshold >= hi {
                threshold = lo;
            }
            best = Some(Candidate {
                feature: j,
                bin: occupied[k].0,
                threshold,
                impurity,
            });
        }
    }
    best
}

fn grow_tree(bins: &Binned, rows: &[usize], weights: &[f64], cfg: &TreeConfig, rng: &mut impl Rng) -> Tree {
    let items: Vec<(usize, f64, bool)> = rows.iter().zip(weights).map(|(&i, &w)| (i, w, bins.labels[i])).collect();
    let mut tree = Tree { nodes: Vec::new() };
    let mut hist = Vec::new();
    grow_node(bins, items, 0, cfg, rng, &mut tree, &mut hist);
    tree
}

fn grow_node(
    bins: &Binned,
    items: Vec<(usize, f64, bool)>,
    depth: usize,
    cfg: &TreeConfig,
    rng: &mut impl Rng,
    tree: &mut Tree,
    hist: &mut Vec<(f64, f64)>,
) -> usize {
    let id = tree.nodes.len();
    let (total, pos) = items.iter().fold((0.0, 0.0), |(t, p), &(_, w, y)| (t + w, if y { p + w } else { p }));
    let score = if total > 0.0 { pos / total } else { 0.0 };
    tree.nodes.push(Node::Leaf { score });

    let parent_impurity = gini(pos, total);
    if cfg.max_depth.is_some_and(|d| depth >= d) || items.len() < cfg.min_samples_split || parent_impurity == 0.0 {
        return id;
    }
    let p = bins.codes.len();
    let features: Vec<usize> = match cfg.features_per_split {
        Some(k) if k < p => {
            let mut f = index::sample(rng, p, k).into_vec();
            f.sort_unstable();
            f
        }
        _ => (0..p).collect(),
    };
    let mut best: Option<Candidate> = None;
    for &j in &features {
        if let Some(c) = best_split_on(bins, j, &items, hist) {
            if best.as_ref().is_none_or(|b| c.impurity < b.impurity) {
                best = Some(c);
            }
        }
    }
    let Some(split) = best.filter(|c| c.impurity < parent_impurity - 1e-12) else {
        return id;
    };
    let codes = &bins.codes[split.feature];
    let (left_items, right_items): (Vec<_>, Vec<_>) = items.into_iter().partition(|&(i, _, _)| codes[i] <= split.bin);
    let left = grow_node(bins, left_items, depth + 1, cfg, rng, tree, hist);
    let right = grow_node(bins, right_items, depth + 1, cfg, rng, tree, hist);
    tree.nodes[id] = Node::Split {
        feature: split.feature,
        threshold: split.threshold,
        left,
        right,
    };
    id
}
