//! Finite populations, randomized cell classifiers and the selection-rate,
//! disparity and utility metrics defined over them.
//!
//! A population is summarized by its four `(group, label)` cell counts. A
//! randomized classifier is summarized by the fraction of each cell it
//! selects; every metric is a linear function of those four fractions.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LdaError, Result};

/// Protected group. Group 1 is conventionally the group with the higher base rate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Group {
    One,
    Two,
}

impl Group {
    pub fn other(self) -> Group {
        match self {
            Group::One => Group::Two,
            Group::Two => Group::One,
        }
    }
}

impl From<Group> for u8 {
    fn from(g: Group) -> u8 {
        match g {
            Group::One => 1,
            Group::Two => 2,
        }
    }
}

impl TryFrom<u8> for Group {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, Self::Error> {
        match v {
            1 => Ok(Group::One),
            2 => Ok(Group::Two),
            other => Err(format!("group must be 1 or 2, got {other}")),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

/// One labeled individual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub features: Vec<f64>,
    pub group: Group,
    pub label: bool,
}

/// Feature matrix with binary groups and labels.
///
/// Categorical inputs are expected to be one-hot encoded by the loader, so
/// every feature here is a real number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub name: String,
    pub feature_names: Vec<String>,
    rows: Vec<Row>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, feature_names: Vec<String>, rows: Vec<Row>) -> Result<Self> {
        let arity = feature_names.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.features.len() != arity) {
            return Err(LdaError::InvalidParameter(format!(
                "row {i} has {} features, expected {arity}",
                row.features.len()
            )));
        }
        Ok(LabeledDataset {
            name: name.into(),
            feature_names,
            rows,
        })
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [Row] {
        &mut self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Dataset made of the rows at `indices` (repeats allowed, order kept).
    pub fn select(&self, name: impl Into<String>, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            name: name.into(),
            feature_names: self.feature_names.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }

    pub fn labels(&self) -> Vec<bool> {
        self.rows.iter().map(|r| r.label).collect()
    }
}

/// Person counts per `(group, label)` cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupTally {
    pub n_1_pos: u64,
    pub n_1_neg: u64,
    pub n_2_pos: u64,
    pub n_2_neg: u64,
}

impl GroupTally {
    pub fn new(n_1_pos: u64, n_1_neg: u64, n_2_pos: u64, n_2_neg: u64) -> Result<Self> {
        let t = GroupTally {
            n_1_pos,
            n_1_neg,
            n_2_pos,
            n_2_neg,
        };
        if t.n() == 0 {
            return Err(LdaError::EmptyPopulation);
        }
        Ok(t)
    }

    pub fn n(&self) -> u64 {
        self.n_1_pos + self.n_1_neg + self.n_2_pos + self.n_2_neg
    }

    pub fn cell(&self, group: Group, label: bool) -> u64 {
        match (group, label) {
            (Group::One, true) => self.n_1_pos,
            (Group::One, false) => self.n_1_neg,
            (Group::Two, true) => self.n_2_pos,
            (Group::Two, false) => self.n_2_neg,
        }
    }

    pub fn n_group(&self, group: Group) -> u64 {
        self.cell(group, true) + self.cell(group, false)
    }

    pub fn n_pos(&self) -> u64 {
        self.n_1_pos + self.n_2_pos
    }

    pub fn n_neg(&self) -> u64 {
        self.n_1_neg + self.n_2_neg
    }

    /// Fraction of `group` with a positive label.
    pub fn base_rate(&self, group: Group) -> Result<f64> {
        let n = self.n_group(group);
        if n == 0 {
            return Err(LdaError::EmptyGroup(group.into()));
        }
        Ok(self.cell(group, true) as f64 / n as f64)
    }

    /// The same population with group labels 1 and 2 exchanged.
    pub fn swap_groups(&self) -> GroupTally {
        GroupTally {
            n_1_pos: self.n_2_pos,
            n_1_neg: self.n_2_neg,
            n_2_pos: self.n_1_pos,
            n_2_neg: self.n_1_neg,
        }
    }

    pub(crate) fn check_metric_domain(&self) -> Result<()> {
        if self.n_pos() == 0 || self.n_neg() == 0 {
            return Err(LdaError::DegenerateLabels {
                n_pos: self.n_pos(),
                n_neg: self.n_neg(),
            });
        }
        for g in [Group::One, Group::Two] {
            if self.n_group(g) == 0 {
                return Err(LdaError::EmptyGroup(g.into()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for GroupTally {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.n_1_pos, self.n_1_neg, self.n_2_pos, self.n_2_neg
        )
    }
}

/// Counts every `(group, label)` cell of a dataset.
pub fn tally(dataset: &LabeledDataset) -> Result<GroupTally> {
    if dataset.is_empty() {
        return Err(LdaError::EmptyPopulation);
    }
    let mut t = GroupTally {
        n_1_pos: 0,
        n_1_neg: 0,
        n_2_pos: 0,
        n_2_neg: 0,
    };
    for row in dataset.rows() {
        match (row.group, row.label) {
            (Group::One, true) => t.n_1_pos += 1,
            (Group::One, false) => t.n_1_neg += 1,
            (Group::Two, true) => t.n_2_pos += 1,
            (Group::Two, false) => t.n_2_neg += 1,
        }
    }
    Ok(t)
}

/// Randomized classifier given by the fraction of each `(group, label)` cell it selects.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellClassifier {
    pub p_1_pos: f64,
    pub p_1_neg: f64,
    pub p_2_pos: f64,
    pub p_2_neg: f64,
}

impl CellClassifier {
    pub const NONE: CellClassifier = CellClassifier {
        p_1_pos: 0.0,
        p_1_neg: 0.0,
        p_2_pos: 0.0,
        p_2_neg: 0.0,
    };
    pub const ALL: CellClassifier = CellClassifier {
        p_1_pos: 1.0,
        p_1_neg: 1.0,
        p_2_pos: 1.0,
        p_2_neg: 1.0,
    };
    /// Selects exactly the positively labeled individuals.
    pub const PERFECT: CellClassifier = CellClassifier {
        p_1_pos: 1.0,
        p_1_neg: 0.0,
        p_2_pos: 1.0,
        p_2_neg: 0.0,
    };

    pub fn new(p_1_pos: f64, p_1_neg: f64, p_2_pos: f64, p_2_neg: f64) -> Result<Self> {
        let c = CellClassifier {
            p_1_pos,
            p_1_neg,
            p_2_pos,
            p_2_neg,
        };
        if c.fractions().iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(LdaError::InvalidParameter(format!(
                "selection fractions must lie in [0, 1]: {c:?}"
            )));
        }
        Ok(c)
    }

    /// Deterministic classifier selecting `k` individuals from each cell.
    pub fn from_counts(tally: &GroupTally, k: [u64; 4]) -> Result<Self> {
        let cells = [tally.n_1_pos, tally.n_1_neg, tally.n_2_pos, tally.n_2_neg];
        let mut p = [0.0; 4];
        for i in 0..4 {
            if k[i] > cells[i] {
                return Err(LdaError::InvalidParameter(format!(
                    "cannot select {} from a cell of {}",
                    k[i], cells[i]
                )));
            }
            p[i] = if cells[i] == 0 { 0.0 } else { k[i] as f64 / cells[i] as f64 };
        }
        CellClassifier::new(p[0], p[1], p[2], p[3])
    }

    /// Fractions in `[1+, 1-, 2+, 2-]` order.
    pub fn fractions(&self) -> [f64; 4] {
        [self.p_1_pos, self.p_1_neg, self.p_2_pos, self.p_2_neg]
    }

    pub fn swap_groups(&self) -> CellClassifier {
        CellClassifier {
            p_1_pos: self.p_2_pos,
            p_1_neg: self.p_2_neg,
            p_2_pos: self.p_1_pos,
            p_2_neg: self.p_1_neg,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub sr_1: f64,
    pub sr_2: f64,
    /// `sr_1 - sr_2`.
    pub delta: f64,
    pub tpr: f64,
    pub fpr: f64,
    /// `tpr - lambda * fpr`.
    pub utility: f64,
    pub lambda: f64,
}

impl Metrics {
    fn from_rates(sr_1: f64, sr_2: f64, tpr: f64, fpr: f64, lambda: f64) -> Metrics {
        Metrics {
            sr_1,
            sr_2,
            delta: sr_1 - sr_2,
            tpr,
            fpr,
            utility: tpr - lambda * fpr,
            lambda,
        }
    }

    pub fn abs_delta(&self) -> f64 {
        self.delta.abs()
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(LdaError::InvalidParameter(format!(
            "lambda must be a positive real, got {lambda}"
        )));
    }
    Ok(())
}

/// Selection rates, disparity and utility of a cell classifier on a population.
pub fn metrics(tally: &GroupTally, classifier: &CellClassifier, lambda: f64) -> Result<Metrics> {
    check_lambda(lambda)?;
    tally.check_metric_domain()?;
    let c = classifier;
    let (n1p, n1n, n2p, n2n) = (
        tally.n_1_pos as f64,
        tally.n_1_neg as f64,
        tally.n_2_pos as f64,
        tally.n_2_neg as f64,
    );
    let sr_1 = (c.p_1_pos * n1p + c.p_1_neg * n1n) / (n1p + n1n);
    let sr_2 = (c.p_2_pos * n2p + c.p_2_neg * n2n) / (n2p + n2n);
    let tpr = (c.p_1_pos * n1p + c.p_2_pos * n2p) / (n1p + n2p);
    let fpr = (c.p_1_neg * n1n + c.p_2_neg * n2n) / (n1n + n2n);
    Ok(Metrics::from_rates(sr_1, sr_2, tpr, fpr, lambda))
}

/// Metrics of hard decisions, counted row by row.
pub fn metrics_from_predictions(
    dataset: &LabeledDataset,
    predictions: &[bool],
    lambda: f64,
) -> Result<Metrics> {
    check_lambda(lambda)?;
    if predictions.len() != dataset.len() {
        return Err(LdaError::InvalidParameter(format!(
            "{} predictions for {} rows",
            predictions.len(),
            dataset.len()
        )));
    }
    if dataset.is_empty() {
        return Err(LdaError::EmptyPopulation);
    }
    // [group][label] -> (rows, selected)
    let mut counts = [[(0u64, 0u64); 2]; 2];
    for (row, &pred) in dataset.rows().iter().zip(predictions) {
        let gi = usize::from(row.group == Group::Two);
        let cell = &mut counts[gi][usize::from(row.label)];
        cell.0 += 1;
        cell.1 += u64::from(pred);
    }
    let n_pos = counts[0][1].0 + counts[1][1].0;
    let n_neg = counts[0][0].0 + counts[1][0].0;
    if n_pos == 0 || n_neg == 0 {
        return Err(LdaError::DegenerateLabels { n_pos, n_neg });
    }
    let mut sr = [0.0; 2];
    for (gi, cells) in counts.iter().enumerate() {
        let n = cells[0].0 + cells[1].0;
        if n == 0 {
            return Err(LdaError::EmptyGroup(gi as u8 + 1));
        }
        sr[gi] = (cells[0].1 + cells[1].1) as f64 / n as f64;
    }
    let tpr = (counts[0][1].1 + counts[1][1].1) as f64 / n_pos as f64;
    let fpr = (counts[0][0].1 + counts[1][0].1) as f64 / n_neg as f64;
    Ok(Metrics::from_rates(sr[0], sr[1], tpr, fpr, lambda))
}

/// Fraction of predictions that equal the label.
pub fn accuracy(dataset: &LabeledDataset, predictions: &[bool]) -> f64 {
    let hits = dataset
        .rows()
        .iter()
        .zip(predictions)
        .filter(|(r, &p)| r.label == p)
        .count();
    hits as f64 / dataset.len().max(1) as f64
}

fn feature_key(features: &[f64]) -> Vec<u64> {
    // -0.0 and 0.0 describe the same applicant.
    features
        .iter()
        .map(|&v| if v == 0.0 { 0 } else { v.to_bits() })
        .collect()
}

/// Lookup-table decision rule that reproduces the labels of one dataset and
/// selects everyone in another.
#[derive(Clone, Debug)]
pub struct PathologicalRule {
    pre_positive: HashSet<Vec<u64>>,
    post: HashSet<Vec<u64>>,
}

impl PathologicalRule {
    pub fn decide(&self, features: &[f64]) -> bool {
        let key = feature_key(features);
        self.post.contains(&key) || self.pre_positive.contains(&key)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathologicalTranscript {
    pub pre_decisions: Vec<bool>,
    pub post_decisions: Vec<bool>,
    pub pre_accuracy: f64,
    pub post_disparity: f64,
    pub post_sr_1: f64,
    pub post_sr_2: f64,
}

/// Builds the rule that is perfectly accurate on `pre_deploy` and has zero
/// disparity on `post_deploy`, and reports its decisions on both.
pub fn pathological_rule(
    pre_deploy: &LabeledDataset,
    post_deploy: &LabeledDataset,
) -> Result<(PathologicalRule, PathologicalTranscript)> {
    if pre_deploy.is_empty() || post_deploy.is_empty() {
        return Err(LdaError::EmptyPopulation);
    }
    let mut pre_keys = HashSet::new();
    let mut pre_positive = HashSet::new();
    for (i, row) in pre_deploy.rows().iter().enumerate() {
        let key = feature_key(&row.features);
        if row.label {
            pre_positive.insert(key.clone());
        }
        if !pre_keys.insert(key) {
            return Err(LdaError::IdenticalApplicants(format!(
                "pre-deployment row {i} duplicates an earlier row"
            )));
        }
    }
    let mut post = HashSet::new();
    for (i, row) in post_deploy.rows().iter().enumerate() {
        let key = feature_key(&row.features);
        if pre_keys.contains(&key) {
            return Err(LdaError::IdenticalApplicants(format!(
                "post-deployment row {i} also appears in the pre-deployment data"
            )));
        }
        if !post.insert(key) {
            return Err(LdaError::IdenticalApplicants(format!(
                "post-deployment row {i} duplicates an earlier row"
            )));
        }
    }
    let rule = PathologicalRule { pre_positive, post };

    let pre_decisions: Vec<bool> = pre_deploy.rows().iter().map(|r| rule.decide(&r.features)).collect();
    let post_decisions: Vec<bool> = post_deploy.rows().iter().map(|r| rule.decide(&r.features)).collect();
    let pre_accuracy = accuracy(pre_deploy, &pre_decisions);

    let mut selected = [0u64; 2];
    let mut sizes = [0u64; 2];
    for (row, &d) in post_deploy.rows().iter().zip(&post_decisions) {
        let gi = usize::from(row.group == Group::Two);
        sizes[gi] += 1;
        selected[gi] += u64::from(d);
    }
    if let Some(gi) = sizes.iter().position(|&s| s == 0) {
        return Err(LdaError::EmptyGroup(gi as u8 + 1));
    }
    let post_sr_1 = selected[0] as f64 / sizes[0] as f64;
    let post_sr_2 = selected[1] as f64 / sizes[1] as f64;

    let transcript = PathologicalTranscript {
        pre_decisions,
        post_decisions,
        pre_accuracy,
        post_disparity: post_sr_1 - post_sr_2,
        post_sr_1,
        post_sr_2,
    };
    Ok((rule, transcript))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fig1a() -> GroupTally {
        GroupTally::new(15, 20, 5, 10).unwrap()
    }

    fn row(x: f64, g: Group, y: bool) -> Row {
        Row {
            features: vec![x],
            group: g,
            label: y,
        }
    }

    /// Dataset whose tally is `t`, with one distinct feature value per row.
    fn expand(t: &GroupTally) -> LabeledDataset {
        let mut rows = Vec::new();
        let mut x = 0.0;
        for (g, y, n) in [
            (Group::One, true, t.n_1_pos),
            (Group::One, false, t.n_1_neg),
            (Group::Two, true, t.n_2_pos),
            (Group::Two, false, t.n_2_neg),
        ] {
            for _ in 0..n {
                rows.push(row(x, g, y));
                x += 1.0;
            }
        }
        LabeledDataset::new("expanded", vec!["x".into()], rows).unwrap()
    }

    #[test]
    fn tally_of_example_population() {
        let ds = expand(&fig1a());
        assert_eq!(ds.len(), 50);
        assert_eq!(tally(&ds).unwrap(), fig1a());
    }

    #[test]
    fn tally_singleton_and_empty() {
        let ds = LabeledDataset::new("one", vec!["x".into()], vec![row(0.0, Group::One, true)]).unwrap();
        assert_eq!(tally(&ds).unwrap(), GroupTally::new(1, 0, 0, 0).unwrap());
        let empty = LabeledDataset::new("none", vec!["x".into()], vec![]).unwrap();
        assert!(matches!(tally(&empty), Err(LdaError::EmptyPopulation)));
    }

    #[test]
    fn perfect_classifier_on_example_population() {
        let m = metrics(&fig1a(), &CellClassifier::PERFECT, 1.0).unwrap();
        assert_abs_diff_eq!(m.sr_1, 3.0 / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.sr_2, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.delta, 2.0 / 21.0, epsilon = 1e-15);
        assert_eq!(m.tpr, 1.0);
        assert_eq!(m.fpr, 0.0);
        assert_eq!(m.utility, 1.0);

        // Cross-check by enumerating rows.
        let ds = expand(&fig1a());
        let preds = ds.labels();
        let by_row = metrics_from_predictions(&ds, &preds, 1.0).unwrap();
        assert_abs_diff_eq!(by_row.delta, 2.0 / 21.0, epsilon = 1e-15);
    }

    #[test]
    fn constant_classifiers() {
        let m = metrics(&fig1a(), &CellClassifier::NONE, 1.0).unwrap();
        assert_eq!((m.sr_1, m.sr_2, m.delta, m.tpr, m.fpr, m.utility), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));
        let m = metrics(&fig1a(), &CellClassifier::ALL, 1.0).unwrap();
        assert_eq!((m.sr_1, m.sr_2, m.delta, m.utility), (1.0, 1.0, 0.0, 0.0));
        let m = metrics(&fig1a(), &CellClassifier::ALL, 2.5).unwrap();
        assert_eq!(m.utility, -1.5);
    }

    #[test]
    fn degenerate_labels_rejected() {
        let t = GroupTally::new(3, 0, 2, 0).unwrap();
        assert!(matches!(
            metrics(&t, &CellClassifier::PERFECT, 1.0),
            Err(LdaError::DegenerateLabels { .. })
        ));
        assert!(matches!(
            metrics(&fig1a(), &CellClassifier::PERFECT, 0.0),
            Err(LdaError::InvalidParameter(_))
        ));
        assert!(CellClassifier::new(1.2, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn pathological_two_row_example() {
        let pre = LabeledDataset::new(
            "pre",
            vec!["x".into()],
            vec![row(1.0, Group::One, true), row(2.0, Group::Two, false)],
        )
        .unwrap();
        let post = LabeledDataset::new(
            "post",
            vec!["x".into()],
            vec![row(3.0, Group::One, false), row(4.0, Group::Two, false)],
        )
        .unwrap();
        let (rule, t) = pathological_rule(&pre, &post).unwrap();
        assert_eq!(t.pre_decisions, vec![true, false]);
        assert_eq!(t.post_decisions, vec![true, true]);
        assert_eq!(t.pre_accuracy, 1.0);
        assert_eq!(t.post_disparity, 0.0);
        assert!(!rule.decide(&[5.0]));
    }

    #[test]
    fn pathological_rejects_shared_applicant() {
        let pre = LabeledDataset::new("pre", vec!["x".into()], vec![row(1.0, Group::One, true)]).unwrap();
        let post = LabeledDataset::new(
            "post",
            vec!["x".into()],
            vec![row(1.0, Group::One, false), row(2.0, Group::Two, false)],
        )
        .unwrap();
        let err = pathological_rule(&pre, &post).unwrap_err();
        assert!(err.to_string().contains("identicality assumption violated"));
    }

    fn arb_tally() -> impl Strategy<Value = GroupTally> {
        (1u64..30, 1u64..30, 0u64..30, 0u64..30)
            .prop_filter("both groups nonempty", |(_, _, c, d)| c + d > 0)
            .prop_map(|(a, b, c, d)| GroupTally::new(a, b, c, d).unwrap())
    }

    fn arb_classifier() -> impl Strategy<Value = CellClassifier> {
        (0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64)
            .prop_map(|(a, b, c, d)| CellClassifier::new(a, b, c, d).unwrap())
    }

    proptest! {
        #[test]
        fn tally_metrics_match_row_enumeration(t in arb_tally(), ks in any::<[u64; 4]>(), lambda in 0.1..5.0f64) {
            let cells = [t.n_1_pos, t.n_1_neg, t.n_2_pos, t.n_2_neg];
            let k: Vec<u64> = ks.iter().zip(cells).map(|(&r, n)| r % (n + 1)).collect();
            let c = CellClassifier::from_counts(&t, [k[0], k[1], k[2], k[3]]).unwrap();
            let m = metrics(&t, &c, lambda).unwrap();

            // Select the first k rows of each cell.
            let ds = expand(&t);
            let mut seen = [0u64; 4];
            let preds: Vec<bool> = ds.rows().iter().map(|r| {
                let ci = match (r.group, r.label) {
                    (Group::One, true) => 0, (Group::One, false) => 1,
                    (Group::Two, true) => 2, (Group::Two, false) => 3,
                };
                seen[ci] += 1;
                seen[ci] <= k[ci]
            }).collect();
            let r = metrics_from_predictions(&ds, &preds, lambda).unwrap();
            prop_assert!((m.delta - r.delta).abs() < 1e-12);
            prop_assert!((m.utility - r.utility).abs() < 1e-12);
            prop_assert!((m.sr_1 - r.sr_1).abs() < 1e-12);
            prop_assert!((m.sr_2 - r.sr_2).abs() < 1e-12);
        }

        #[test]
        fn group_swap_negates_disparity(t in arb_tally(), c in arb_classifier(), lambda in 0.1..5.0f64) {
            prop_assume!(t.n_1_pos + t.n_1_neg > 0);
            let m = metrics(&t, &c, lambda).unwrap();
            let s = metrics(&t.swap_groups(), &c.swap_groups(), lambda).unwrap();
            prop_assert!((m.delta + s.delta).abs() < 1e-12);
            prop_assert!((m.utility - s.utility).abs() < 1e-12);
        }

        #[test]
        fn utility_monotone_in_fractions(t in arb_tally(), c in arb_classifier(), lambda in 0.1..5.0f64, bump in 0.0..1.0f64) {
            let base = metrics(&t, &c, lambda).unwrap();
            let mut up = c;
            up.p_1_pos = (c.p_1_pos + bump).min(1.0);
            up.p_2_pos = (c.p_2_pos + bump).min(1.0);
            prop_assert!(metrics(&t, &up, lambda).unwrap().utility >= base.utility - 1e-12);
            let mut neg = c;
            neg.p_1_neg = (c.p_1_neg + bump).min(1.0);
            neg.p_2_neg = (c.p_2_neg + bump).min(1.0);
            prop_assert!(metrics(&t, &neg, lambda).unwrap().utility <= base.utility + 1e-12);
        }

        #[test]
        fn metric_ranges(t in arb_tally(), c in arb_classifier(), lambda in 0.1..5.0f64) {
            let m = metrics(&t, &c, lambda).unwrap();
            prop_assert!((0.0..=1.0).contains(&m.sr_1) && (0.0..=1.0).contains(&m.sr_2));
            prop_assert!(m.delta.abs() <= 1.0);
            prop_assert!(m.utility >= -lambda - 1e-12 && m.utility <= 1.0 + 1e-12);
        }

        #[test]
        fn pathological_is_perfect_then_fair(n_pre in 1usize..40, n_post in 2usize..40, seed in any::<u64>()) {
            let mut s = seed;
            let mut next = || { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); s >> 33 };
            let pre: Vec<Row> = (0..n_pre).map(|i| row(i as f64, if next() % 2 == 0 { Group::One } else { Group::Two }, next() % 2 == 0)).collect();
            let mut post: Vec<Row> = (0..n_post).map(|i| row(1000.0 + i as f64, if next() % 2 == 0 { Group::One } else { Group::Two }, next() % 2 == 0)).collect();
            post[0].group = Group::One;
            post[1].group = Group::Two;
            let pre = LabeledDataset::new("pre", vec!["x".into()], pre).unwrap();
            let post = LabeledDataset::new("post", vec!["x".into()], post).unwrap();
            let (_, t) = pathological_rule(&pre, &post).unwrap();
            prop_assert_eq!(t.pre_accuracy, 1.0);
            prop_assert_eq!(t.post_disparity, 0.0);
        }
    }
}
