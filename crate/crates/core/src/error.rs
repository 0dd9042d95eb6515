use thiserror::Error;

pub type Result<T, E = LdaError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LdaError {
    #[error("empty population")]
    EmptyPopulation,

    #[error("degenerate labels: population needs at least one positive and one negative (n+ = {n_pos}, n- = {n_neg})")]
    DegenerateLabels { n_pos: u64, n_neg: u64 },

    #[error("empty group {0}: selection rate undefined")]
    EmptyGroup(u8),

    #[error("identicality assumption violated: no two applicants are identical ({0})")]
    IdenticalApplicants(String),

    #[error("base rate of group 1 ({br1}) is below group 2 ({br2}); relabel groups so that group 1 has the higher base rate")]
    GroupOrientation { br1: f64, br2: f64 },

    #[error("utility unachievable: {0} exceeds the perfect classifier's utility 1")]
    UtilityUnachievable(f64),

    #[error("grid too large: {required} points exceed cap {cap}; raise the cap to at least {required}")]
    GridTooLarge { required: u128, cap: u128 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance too large for exact solve: {cells} table cells exceed cap {cap}")]
    InstanceTooLarge { cells: u128, cap: u128 },

    #[error("exact solve exceeded its time limit")]
    TimedOut,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("no positive instances: no instance admits an LDA")]
    NoPositiveInstances,

    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    #[error("non-finite feature value in row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: usize },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("no usable rows in {0}")]
    NoUsableRows(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
