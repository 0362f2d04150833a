use thiserror::Error;

/// Errors surfaced by the numerical modules.
///
/// `exit_code` groups them the way the CLI reports them: invalid
/// configuration (1), computation failure (2), budget overrun (3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {field}: {message}")]
    InvalidConfig { field: String, message: String },

    #[error("point {0:?} lies outside the scenario domain")]
    OutOfDomain(Vec<f64>),

    #[error("metric is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("eigenvalue {value} of the intensity matrix has no pairing partner (residual {residual:.3e} > tol {tol:.3e})")]
    UnpairedEigenvalue { value: f64, residual: f64, tol: f64 },

    #[error("intensity matrix is rank deficient (rank {rank} < dimension {dim})")]
    RankDeficient { rank: usize, dim: usize },

    #[error("{0} requires constant metric and field coefficients")]
    NonConstantField(&'static str),

    #[error("drift field is undefined: intensity matrix is singular")]
    SingularIntensity,

    #[error("missing parameter: {0}")]
    MissingParameter(String),

    #[error("magnetic flux through plane ({axis_a},{axis_b}) is {flux:.6} flux quanta; periodic boundary needs an integer")]
    FluxQuantization {
        axis_a: usize,
        axis_b: usize,
        flux: f64,
    },

    #[error("hopping phase |{phase:.3}| >= pi on axis {axis}: lattice too coarse for this field")]
    PhaseAliasing { axis: usize, phase: f64 },

    #[error("derivative evaluation failed: {0}")]
    Derivative(String),

    #[error("sampling grid is empty")]
    EmptyGrid,

    #[error("factorization breakdown at pivot {index} (|pivot| {pivot:.3e})")]
    FactorizationBreakdown { index: usize, pivot: f64 },

    #[error("negative pivot count {0} is odd; the complex embedding must produce pairs")]
    InertiaParity(usize),

    #[error("eigenvalue clusters unresolved: width {width:.3e} exceeds half the minimal level gap {gap:.3e}")]
    ClusterUnresolved { width: f64, gap: f64 },

    #[error("LAPACK {routine} failed with info={info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("dense path needs N={n} <= budget {budget}")]
    DenseBudget { n: usize, budget: usize },

    #[error("level enumeration would exceed {budget} tuples")]
    TupleBudget { budget: usize },

    #[error("quadrature budget exceeded: {cells} cells > {budget}")]
    QuadratureBudget { cells: usize, budget: usize },

    #[error("max resonance order {0} exceeds the combinatorial guard 8")]
    OrderGuard(u32),

    #[error("fit needs at least 3 usable records, got {0}")]
    TooFewRecords(usize),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid_config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            message: message.into(),
        }
    }

    /// CLI process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig { .. } | Error::MissingParameter(_) => 1,
            Error::DenseBudget { .. }
            | Error::TupleBudget { .. }
            | Error::QuadratureBudget { .. }
            | Error::OrderGuard(_) => 3,
            _ => 2,
        }
    }

    /// Config field path associated with the error, when there is one.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::InvalidConfig { field, .. } => Some(field),
            Error::MissingParameter(f) => Some(f),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
