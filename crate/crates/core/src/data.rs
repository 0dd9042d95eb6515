//! Dataset ingestion: column schemas for the Adult and German Credit files,
//! a CSV loader with one-hot encoding, and a synthetic generator for runs
//! without external data.
//!
//! Data files are never bundled; see [`source_instructions`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LdaError, Result};
use crate::population::{Group, LabeledDataset, Row};

/// Category assigned to missing categorical values.
pub const MISSING_CATEGORY: &str = "<missing>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Categorical,
    Numeric,
}

/// A source column. Header matching ignores case and non-alphanumeric
/// characters, so `marital-status` matches `maritalstatus`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    #[serde(flatten)]
    pub column: ColumnSpec,
    pub kind: FeatureKind,
}

/// Raw group codes. A cell matches a code if, after trimming and lowercasing,
/// it equals the code or starts with it (`M` matches `Male`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    #[serde(flatten)]
    pub column: ColumnSpec,
    pub group_1: String,
    pub group_2: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositiveRule {
    /// Positive iff the normalized cell equals one of these (case-insensitive,
    /// trailing period ignored).
    OneOf(Vec<String>),
    /// Positive iff the cell parses as a number above this.
    GreaterThan(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelSpec {
    #[serde(flatten)]
    pub column: ColumnSpec,
    pub positive: PositiveRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub dataset_name: String,
    pub features: Vec<FeatureSpec>,
    pub group: GroupSpec,
    pub label: LabelSpec,
    /// Cell values treated as missing, compared after trimming.
    #[serde(default = "default_missing_tokens")]
    pub missing_tokens: Vec<String>,
}

fn default_missing_tokens() -> Vec<String> {
    ["", "?", "NA", "N/A", "nan", "NaN", "null"].map(String::from).to_vec()
}

fn col(name: &str, aliases: &[&str]) -> ColumnSpec {
    ColumnSpec {
        name: name.into(),
        aliases: aliases.iter().map(|a| a.to_string()).collect(),
    }
}

fn feature(name: &str, aliases: &[&str], kind: FeatureKind) -> FeatureSpec {
    FeatureSpec {
        column: col(name, aliases),
        kind,
    }
}

pub fn adult_schema() -> Schema {
    use FeatureKind::*;
    Schema {
        dataset_name: "adult".into(),
        features: vec![
            feature("maritalstatus", &["marital_status"], Categorical),
            feature("hoursperweek", &["hours_per_week"], Numeric),
            feature("education", &[], Categorical),
            feature("workclass", &[], Categorical),
        ],
        group: GroupSpec {
            column: col("gender", &["sex"]),
            group_1: "M".into(),
            group_2: "F".into(),
        },
        label: LabelSpec {
            column: col("income", &["class", "income_bracket"]),
            positive: PositiveRule::OneOf(vec![">50K".into(), "1".into()]),
        },
        missing_tokens: default_missing_tokens(),
    }
}

pub fn german_schema() -> Schema {
    use FeatureKind::*;
    Schema {
        dataset_name: "german".into(),
        features: vec![
            feature("credit_history_category", &["credit_history"], Categorical),
            feature("credit_amount", &[], Numeric),
            feature("unemployment_category", &["present_employment", "employment"], Categorical),
            feature("installment_rate_percentage_income", &["installment_rate"], Numeric),
            feature("present_residence_duration", &["present_residence"], Numeric),
        ],
        group: GroupSpec {
            column: col("gender", &["sex"]),
            group_1: "M".into(),
            group_2: "F".into(),
        },
        label: LabelSpec {
            column: col("creditworthiness", &["credit_risk", "class"]),
            positive: PositiveRule::OneOf(vec!["1".into(), "good".into()]),
        },
        missing_tokens: default_missing_tokens(),
    }
}

impl Schema {
    pub fn by_name(name: &str) -> Option<Schema> {
        match name {
            "adult" => Some(adult_schema()),
            "german" => Some(german_schema()),
            _ => None,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Schema> {
        let schema: Schema = serde_json::from_str(&fs::read_to_string(path)?)?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        let columns = self
            .features
            .iter()
            .map(|f| &f.column)
            .chain([&self.group.column, &self.label.column]);
        for c in columns {
            if !seen.insert(normalize_header(&c.name)) {
                return Err(LdaError::InvalidParameter(format!("duplicate schema column `{}`", c.name)));
            }
        }
        if normalize_cell(&self.group.group_1) == normalize_cell(&self.group.group_2) {
            return Err(LdaError::InvalidParameter("group codes must differ".into()));
        }
        Ok(())
    }

    fn is_missing(&self, cell: &str) -> bool {
        self.missing_tokens.iter().any(|t| t == cell)
    }
}

/// Where to obtain the data files this crate does not ship.
pub fn source_instructions(dataset: &str) -> &'static str {
    match dataset {
        "adult" => "Adult: download `adult.data` from the UCI Machine Learning Repository \
            (https://archive.ics.uci.edu/dataset/2/adult), add a header row, and pass the file with --data.",
        "german" => "German Credit: download the Statlog (German Credit Data) set from the UCI Machine Learning \
            Repository (https://archive.ics.uci.edu/dataset/144), export it to CSV with the schema's column \
            names (or supply --schema overrides), and pass the file with --data.",
        _ => "Supply a CSV file with --data and a JSON schema with --schema.",
    }
}

fn normalize_header(s: &str) -> String {
    s.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect()
}

fn normalize_cell(s: &str) -> String {
    s.trim().trim_end_matches('.').trim().to_lowercase()
}

fn find_column(headers: &[String], spec: &ColumnSpec) -> Result<usize> {
    let wanted: Vec<String> = std::iter::once(&spec.name).chain(&spec.aliases).map(|n| normalize_header(n)).collect();
    headers
        .iter()
        .position(|h| wanted.contains(&normalize_header(h)))
        .ok_or_else(|| LdaError::MissingColumn(spec.name.clone()))
}

fn match_group(spec: &GroupSpec, cell: &str) -> Option<Group> {
    let cell = normalize_cell(cell);
    let hit = |code: &str| {
        let code = normalize_cell(code);
        cell == code || (!code.is_empty() && cell.starts_with(&code))
    };
    match (hit(&spec.group_1), hit(&spec.group_2)) {
        (true, false) => Some(Group::One),
        (false, true) => Some(Group::Two),
        _ => None,
    }
}

fn match_label(rule: &PositiveRule, cell: &str) -> Option<bool> {
    match rule {
        PositiveRule::OneOf(values) => {
            let cell = normalize_cell(cell);
            Some(values.iter().any(|v| normalize_cell(v) == cell))
        }
        PositiveRule::GreaterThan(t) => cell.trim().parse::<f64>().ok().filter(|x| x.is_finite()).map(|x| x > *t),
    }
}

/// Counts of rows the loader discarded, by reason.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DropReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub malformed: usize,
    pub missing_group_or_label: usize,
    pub unrecognized_group: usize,
    pub unparseable_numeric: usize,
    /// Numeric cells left as NaN for later mean imputation.
    pub missing_numeric_cells: usize,
}

impl DropReport {
    pub fn dropped(&self) -> usize {
        self.rows_read - self.rows_kept
    }
}

enum Cell {
    Category(String),
    Number(f64),
}

/// Loads `text` (CSV with a header row) under `schema`.
///
/// Categorical features become one indicator column per value seen in the
/// file, in sorted order, named `column=value`. Missing numeric cells are
/// kept as NaN; see [`impute_numeric_means`].
pub fn load_csv_str(text: &str, schema: &Schema) -> Result<(LabeledDataset, DropReport)> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let feature_idx = schema
        .features
        .iter()
        .map(|f| find_column(&headers, &f.column))
        .collect::<Result<Vec<_>>>()?;
    let group_idx = find_column(&headers, &schema.group.column)?;
    let label_idx = find_column(&headers, &schema.label.column)?;

    let mut report = DropReport::default();
    let mut parsed: Vec<(Vec<Cell>, Group, bool)> = Vec::new();
    'rows: for record in reader.records() {
        report.rows_read += 1;
        let Ok(record) = record else {
            report.malformed += 1;
            continue;
        };
        if record.len() != headers.len() {
            report.malformed += 1;
            continue;
        }
        let (g, y) = (record[group_idx].trim(), record[label_idx].trim());
        if schema.is_missing(g) || schema.is_missing(y) {
            report.missing_group_or_label += 1;
            continue;
        }
        let Some(group) = match_group(&schema.group, g) else {
            report.unrecognized_group += 1;
            continue;
        };
        let Some(label) = match_label(&schema.label.positive, y) else {
            report.unparseable_numeric += 1;
            continue;
        };
        let mut cells = Vec::with_capacity(feature_idx.len());
        let mut missing = 0;
        for (spec, &k) in schema.features.iter().zip(&feature_idx) {
            let raw = record[k].trim();
            cells.push(match spec.kind {
                FeatureKind::Categorical if schema.is_missing(raw) => Cell::Category(MISSING_CATEGORY.into()),
                FeatureKind::Categorical => Cell::Category(raw.to_string()),
                FeatureKind::Numeric if schema.is_missing(raw) => {
                    missing += 1;
                    Cell::Number(f64::NAN)
                }
                FeatureKind::Numeric => match raw.parse::<f64>() {
                    Ok(x) if x.is_finite() => Cell::Number(x),
                    _ => {
                        report.unparseable_numeric += 1;
                        continue 'rows;
                    }
                },
            });
        }
        report.missing_numeric_cells += missing;
        parsed.push((cells, group, label));
    }
    report.rows_kept = parsed.len();
    if parsed.is_empty() {
        return Err(LdaError::NoUsableRows(schema.dataset_name.clone()));
    }

    // Per categorical feature: sorted vocabulary -> offset within its block.
    let mut vocab: Vec<BTreeMap<String, usize>> = vec![BTreeMap::new(); schema.features.len()];
    for (cells, _, _) in &parsed {
        for (j, cell) in cells.iter().enumerate() {
            if let Cell::Category(v) = cell {
                vocab[j].entry(v.clone()).or_insert(0);
            }
        }
    }
    let mut feature_names = Vec::new();
    let mut offsets = Vec::with_capacity(schema.features.len());
    for (j, spec) in schema.features.iter().enumerate() {
        offsets.push(feature_names.len());
        match spec.kind {
            FeatureKind::Numeric => feature_names.push(spec.column.name.clone()),
            FeatureKind::Categorical => {
                for (k, (value, slot)) in vocab[j].iter_mut().enumerate() {
                    *slot = k;
                    feature_names.push(format!("{}={value}", spec.column.name));
                }
            }
        }
    }
    let width = feature_names.len();
    let rows = parsed
        .into_iter()
        .map(|(cells, group, label)| {
            let mut features = vec![0.0; width];
            for (j, cell) in cells.into_iter().enumerate() {
                match cell {
                    Cell::Number(x) => features[offsets[j]] = x,
                    Cell::Category(v) => features[offsets[j] + vocab[j][&v]] = 1.0,
                }
            }
            Row { features, group, label }
        })
        .collect();
    Ok((LabeledDataset::new(&schema.dataset_name, feature_names, rows)?, report))
}

pub fn load_csv(path: &Path, schema: &Schema) -> Result<(LabeledDataset, DropReport)> {
    load_csv_str(&fs::read_to_string(path)?, schema)
}

/// Replaces NaN features in every dataset with the column mean over the
/// finite values of `reference` (0 when the column has none).
pub fn impute_numeric_means(reference: &LabeledDataset, targets: &mut [&mut LabeledDataset]) {
    let p = reference.n_features();
    let mut sum = vec![0.0; p];
    let mut count = vec![0usize; p];
    for row in reference.rows() {
        for (j, &x) in row.features.iter().enumerate() {
            if x.is_finite() {
                sum[j] += x;
                count[j] += 1;
            }
        }
    }
    let means: Vec<f64> = sum.iter().zip(&count).map(|(s, &c)| if c == 0 { 0.0 } else { s / c as f64 }).collect();
    for data in targets.iter_mut() {
        for row in data.rows_mut() {
            for (x, m) in row.features.iter_mut().zip(&means) {
                if x.is_nan() {
                    *x = *m;
                }
            }
        }
    }
}

/// Parameters of the Gaussian synthetic dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_rows: usize,
    /// Probability that a row belongs to group 1.
    pub group_balance: f64,
    /// Positive-label probability within group 1 and group 2.
    pub base_rates: (f64, f64),
    /// Mean shift between the label classes on the informative features.
    pub signal_strength: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_rows: 5000,
            group_balance: 0.5,
            base_rates: (0.4, 0.25),
            signal_strength: 1.0,
        }
    }
}

/// Rows with group drawn at `group_balance`, label at the group's base rate,
/// two informative features `signal * (y - 1/2) + N(0, 1)` and one pure-noise
/// feature. Features carry no group information beyond the label.
pub fn synthetic_dataset(spec: &SyntheticSpec, seed: u64) -> Result<LabeledDataset> {
    let open_unit = |x: f64| x > 0.0 && x < 1.0;
    if spec.n_rows == 0 {
        return Err(LdaError::InvalidParameter("synthetic dataset needs at least one row".into()));
    }
    if !open_unit(spec.group_balance) {
        return Err(LdaError::InvalidParameter(format!(
            "group_balance must lie in (0, 1), got {}",
            spec.group_balance
        )));
    }
    let (b1, b2) = spec.base_rates;
    if !open_unit(b1) || !open_unit(b2) {
        return Err(LdaError::InvalidParameter(format!("infeasible base rates ({b1}, {b2}): each must lie in (0, 1)")));
    }
    if !spec.signal_strength.is_finite() || spec.signal_strength < 0.0 {
        return Err(LdaError::InvalidParameter("signal_strength must be finite and nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..spec.n_rows)
        .map(|_| {
            let group = if rng.random_bool(spec.group_balance) { Group::One } else { Group::Two };
            let rate = if group == Group::One { b1 } else { b2 };
            let label = rng.random_bool(rate);
            let shift = spec.signal_strength * (f64::from(u8::from(label)) - 0.5);
            let mut noise = || rng.sample::<f64, _>(StandardNormal);
            let features = vec![shift + noise(), 0.5 * shift + noise(), noise()];
            Row { features, group, label }
        })
        .collect();
    LabeledDataset::new(
        "synthetic",
        vec!["signal_a".into(), "signal_b".into(), "noise".into()],
        rows,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::tally;

    const ADULT_SNIPPET: &str = "\
age,workclass,education,marital-status,hours-per-week,sex,income
39,State-gov,Bachelors,Never-married,40,Male,<=50K
50,Self-emp,Bachelors,Married,13,Male,>50K
38,Private,HS-grad,Divorced,40,Female,<=50K.
53,?,11th,Married,?,Female,>50K.
";

    #[test]
    fn schemas_match_dataset_descriptions() {
        let adult = adult_schema();
        assert_eq!(adult.features.len(), 4);
        assert_eq!((adult.group.group_1.as_str(), adult.group.group_2.as_str()), ("M", "F"));
        let german = german_schema();
        assert_eq!(german.features.len(), 5);
        assert_eq!((german.group.group_1.as_str(), german.group.group_2.as_str()), ("M", "F"));
        adult.validate().unwrap();
        german.validate().unwrap();
    }

    #[test]
    fn loads_and_one_hot_encodes() {
        let (data, report) = load_csv_str(ADULT_SNIPPET, &adult_schema()).unwrap();
        assert_eq!(data.len(), 4);
        assert_eq!(report.dropped(), 0);
        assert_eq!(report.missing_numeric_cells, 1);
        let t = tally(&data).unwrap();
        assert_eq!((t.n_1_pos, t.n_1_neg, t.n_2_pos, t.n_2_neg), (1, 1, 1, 1));
        assert!(data.feature_names.contains(&"workclass=<missing>".to_string()));
        assert!(data.feature_names.contains(&"hoursperweek".to_string()));
        // Indicators per categorical column sum to one.
        for row in data.rows() {
            for prefix in ["maritalstatus=", "education=", "workclass="] {
                let s: f64 = data
                    .feature_names
                    .iter()
                    .zip(&row.features)
                    .filter(|(n, _)| n.starts_with(prefix))
                    .map(|(_, x)| x)
                    .sum();
                assert_eq!(s, 1.0);
            }
        }
        let (again, _) = load_csv_str(ADULT_SNIPPET, &adult_schema()).unwrap();
        // Debug output compares the NaN placeholder too.
        assert_eq!(format!("{again:?}"), format!("{data:?}"));
    }

    #[test]
    fn malformed_row_is_dropped_and_reported() {
        let text = format!("{ADULT_SNIPPET}41,Private,HS-grad,Married,forty,Male,>50K\n30,Private\n");
        let (data, report) = load_csv_str(&text, &adult_schema()).unwrap();
        assert_eq!(data.len(), 4);
        assert_eq!(report.dropped(), 2);
        assert_eq!((report.malformed, report.unparseable_numeric), (1, 1));
    }

    #[test]
    fn missing_column_and_no_rows() {
        let err = load_csv_str("age,workclass,education,maritalstatus,hoursperweek,income\n", &adult_schema())
            .unwrap_err();
        assert_eq!(err.to_string(), "missing column `gender`");
        let err = load_csv_str(
            "workclass,education,maritalstatus,hoursperweek,gender,income\na,b,c,1,X,>50K\n",
            &adult_schema(),
        )
        .unwrap_err();
        assert!(matches!(err, LdaError::NoUsableRows(_)));
    }

    #[test]
    fn schema_overrides_from_json() {
        let json = r#"{
            "dataset_name": "toy",
            "features": [{"name": "x", "kind": "numeric"}],
            "group": {"name": "g", "group_1": "a", "group_2": "b"},
            "label": {"name": "y", "positive": {"greater_than": 0.5}}
        }"#;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        fs::write(&path, json).unwrap();
        let schema = Schema::from_json_file(&path).unwrap();
        let (data, _) = load_csv_str("x,g,y\n1.5,a,1\n2,b,0\n", &schema).unwrap();
        assert_eq!(data.rows()[0].features, vec![1.5]);
        assert!(data.rows()[0].label && !data.rows()[1].label);
        assert_eq!(data.rows()[1].group, Group::Two);
    }

    #[test]
    fn imputes_reference_means() {
        let (mut data, _) = load_csv_str(ADULT_SNIPPET, &adult_schema()).unwrap();
        let reference = data.clone();
        impute_numeric_means(&reference, &mut [&mut data]);
        let j = data.feature_names.iter().position(|n| n == "hoursperweek").unwrap();
        assert_eq!(data.rows()[3].features[j], 31.0);
        assert!(data.rows().iter().all(|r| r.features.iter().all(|x| x.is_finite())));
    }

    #[test]
    fn synthetic_base_rates_and_determinism() {
        let spec = SyntheticSpec {
            n_rows: 50_000,
            group_balance: 0.5,
            base_rates: (0.4286, 0.3333),
            signal_strength: 1.0,
        };
        let data = synthetic_dataset(&spec, 5).unwrap();
        let t = tally(&data).unwrap();
        assert!((t.base_rate(Group::One).unwrap() - 0.4286).abs() < 0.02);
        assert!((t.base_rate(Group::Two).unwrap() - 0.3333).abs() < 0.02);
        assert_eq!(synthetic_dataset(&spec, 5).unwrap(), data);
        let bad = SyntheticSpec {
            base_rates: (1.2, 0.3),
            ..spec
        };
        assert!(synthetic_dataset(&bad, 5).is_err());
    }
}
