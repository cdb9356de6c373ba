use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("amplitude {index} is not positive ({value})")]
    NonPositiveAmplitude { index: usize, value: String },

    #[error("invalid cluster spec: {0}")]
    InvalidSpec(String),

    #[error("infeasible cluster geometry: violates {0}")]
    InfeasibleGeometry(String),

    #[error("invalid measurement grid: {0}")]
    InvalidGrid(String),

    #[error("pencil needs at least one row (N = {n}, need N >= 3)")]
    TooFewSamples { n: usize },

    #[error("model order d = {d} outside 1..={n_hat}")]
    ModelOrder { d: usize, n_hat: usize },

    #[error("rank-deficient pencil: sigma_{d} of H_l is below the numerical floor")]
    RankDeficientPencil { d: usize },

    #[error("pencil inversion failed: reduced H_u is numerically singular")]
    PencilInversionFailed,

    #[error("Vandermonde matrix is numerically rank-deficient: {0}")]
    RankDeficientVandermonde(String),

    #[error("SVD did not converge to a valid factorization (relative residual {residual:e})")]
    SvdFailed { residual: f64 },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("moment Hankel matrix is singular")]
    SingularMomentMatrix,

    #[error("perturbation too large: no real p-spike attains these moments ({0})")]
    NoRealSpikes(String),

    #[error("epsilon_tilde exceeds constructible regime: {0}")]
    ConstructibleRegime(String),

    #[error("no non-cluster part (d = p)")]
    NoNonCluster,

    #[error("no admissible ε̃ found after {halvings} halvings")]
    NoAdmissibleEpsilonTilde { halvings: u32 },

    #[error("interpolation nodes are not pairwise distinct")]
    DuplicateNodes,

    #[error("oracle: {0}")]
    Oracle(String),

    #[error("regression: {0}")]
    Regression(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Stable kebab-case identifier, used by the CLI when reporting failures.
    pub fn name(&self) -> &'static str {
        match self {
            Error::DegenerateSignal(_) => "degenerate-signal",
            Error::NonPositiveAmplitude { .. } => "non-positive-amplitude",
            Error::InvalidSpec(_) => "invalid-spec",
            Error::InfeasibleGeometry(_) => "infeasible-geometry",
            Error::InvalidGrid(_) => "invalid-grid",
            Error::TooFewSamples { .. } => "too-few-samples",
            Error::ModelOrder { .. } => "model-order",
            Error::RankDeficientPencil { .. } => "rank-deficient-pencil",
            Error::PencilInversionFailed => "pencil-inversion-failed",
            Error::RankDeficientVandermonde(_) => "rank-deficient-vandermonde",
            Error::SvdFailed { .. } => "svd-failed",
            Error::Stage { source, .. } => source.name(),
            Error::SingularMomentMatrix => "singular-moment-matrix",
            Error::NoRealSpikes(_) => "no-real-spikes",
            Error::ConstructibleRegime(_) => "constructible-regime",
            Error::NoNonCluster => "no-non-cluster",
            Error::NoAdmissibleEpsilonTilde { .. } => "no-admissible-epsilon-tilde",
            Error::DuplicateNodes => "duplicate-nodes",
            Error::Oracle(_) => "oracle",
            Error::Regression(_) => "regression",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}
