use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report. Each variant maps to a stable
/// machine-readable code (see [`Error::code`]) used by the command line.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("jet value at s=0 is {value}, expected 1")]
    NonUnitEigenvalueAtZero { value: f64 },
    #[error("log-jet residual {residual:e} at order {order} is inconsistent with sigma2")]
    ResidualCumulant { order: usize, residual: f64 },
    #[error("jet of order {have} is too short, order {need} required")]
    InsufficientJetOrder { need: usize, have: usize },
    #[error("polynomial has Gaussian mean {mean:e}, cannot integrate against the density")]
    NotSolvable { mean: f64 },
    #[error("imaginary residue {residue:e} in a quantity that must be real")]
    ImaginaryResidue { residue: f64 },
    #[error("model or expansion is not lattice valued")]
    NotLattice,
    #[error("unsupported test function: {0}")]
    UnsupportedTestFunction(String),

    #[error("incidence matrix is reducible")]
    Reducible,
    #[error("incidence matrix is periodic")]
    Periodic,
    #[error("Perron eigenvalue is degenerate (gap {gap:e})")]
    DegeneratePerron { gap: f64 },
    #[error("grid too coarse: refinement moved the jet by {change:e}")]
    GridTooCoarse { change: f64 },
    #[error("untwisted operator has no spectral gap (second/first modulus {ratio})")]
    NoSpectralGap { ratio: f64 },
    #[error("block alphabet has {blocks} symbols, cap is {cap}")]
    RangeTooLarge { blocks: usize, cap: usize },
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("eigen-solver did not converge (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("dominant eigenvalue is not simple (moduli {first} and {second})")]
    NonSimpleDominant { first: f64, second: f64 },
    #[error("jet methods disagree at coefficient {index}: {fd} vs {rs}")]
    JetDisagreement { index: usize, fd: String, rs: String },
    #[error("asymptotic variance {sigma2:e} is zero (coboundary observable)")]
    ZeroVariance { sigma2: f64 },
    #[error("correlation series did not converge within {terms} terms")]
    SlowDecay { terms: usize },
    #[error("eigenprojection jet failed: {0}")]
    ProjectionJetFailure(String),
    #[error("extracted cumulant has imaginary part {residue:e}")]
    ResidualImaginary { residue: f64 },
    #[error("characteristic-function tail bound {bound:e} exceeds the target")]
    TailBoundExceeded { bound: f64 },
    #[error("linear system is singular or ill-conditioned (condition {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonUnitEigenvalueAtZero { .. } => "NON_UNIT_EIGENVALUE_AT_ZERO",
            Error::ResidualCumulant { .. } => "RESIDUAL_CUMULANT",
            Error::InsufficientJetOrder { .. } => "INSUFFICIENT_JET_ORDER",
            Error::NotSolvable { .. } => "NOT_SOLVABLE",
            Error::ImaginaryResidue { .. } => "IMAGINARY_RESIDUE",
            Error::NotLattice => "NOT_LATTICE",
            Error::UnsupportedTestFunction(_) => "UNSUPPORTED_TEST_FUNCTION",
            Error::Reducible => "REDUCIBLE",
            Error::Periodic => "PERIODIC",
            Error::DegeneratePerron { .. } => "DEGENERATE_PERRON",
            Error::GridTooCoarse { .. } => "GRID_TOO_COARSE",
            Error::NoSpectralGap { .. } => "NO_SPECTRAL_GAP",
            Error::RangeTooLarge { .. } => "RANGE_TOO_LARGE",
            Error::InvalidSpec(_) => "INVALID_SPEC",
            Error::NoConvergence { .. } => "NO_CONVERGENCE",
            Error::NonSimpleDominant { .. } => "NON_SIMPLE_DOMINANT",
            Error::JetDisagreement { .. } => "JET_DISAGREEMENT",
            Error::ZeroVariance { .. } => "ZERO_VARIANCE",
            Error::SlowDecay { .. } => "SLOW_DECAY",
            Error::ProjectionJetFailure(_) => "PROJECTION_JET_FAILURE",
            Error::ResidualImaginary { .. } => "RESIDUAL_IMAGINARY",
            Error::TailBoundExceeded { .. } => "TAIL_BOUND_EXCEEDED",
            Error::IllConditioned { .. } => "ILL_CONDITIONED",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
        }
    }
}
