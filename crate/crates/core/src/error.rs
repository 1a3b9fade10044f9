use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the domain of the formula it feeds.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("singular system at omega = {omega:e} rad/s ({reason})")]
    SingularSystem { omega: f64, reason: String },

    #[error("slab reduction not applicable: {0}")]
    ReductionNotApplicable(String),

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("coupling coefficient |k| = {k} exceeds 1 for pair {pair}")]
    CoefficientBound { pair: String, k: f64 },

    #[error("separation {separation:e} m outside coupling table range [{min:e}, {max:e}] m")]
    Extrapolation { separation: f64, min: f64, max: f64 },

    #[error("invalid coupling table: {0}")]
    Table(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("voltage gain undefined: {0}")]
    UndefinedGain(String),

    #[error("closed-form gain denominator vanishes at omega = {omega:e} rad/s")]
    SingularFormula { omega: f64 },

    #[error("sweep produced no solvable points")]
    EmptyResult,

    #[error("nothing to compare: {0}")]
    NothingToCompare(String),

    #[error("tuning failed: {0}")]
    Tuning(String),

    #[error("infeasible target: {0}")]
    InfeasibleTarget(String),

    #[error("objective evaluation failed at position {position:e} m: {source}")]
    Probe { position: f64, source: Box<Error> },
}

impl Error {
    /// Short stable identifier used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Model(_) => "model",
            Error::SingularSystem { .. } => "singular_system",
            Error::ReductionNotApplicable(_) => "reduction_not_applicable",
            Error::SingularGeometry(_) => "singular_geometry",
            Error::Geometry(_) => "geometry",
            Error::CoefficientBound { .. } => "coefficient_bound",
            Error::Extrapolation { .. } => "extrapolation",
            Error::Table(_) => "table",
            Error::Quadrature(_) => "quadrature",
            Error::UndefinedGain(_) => "undefined_gain",
            Error::SingularFormula { .. } => "singular_formula",
            Error::EmptyResult => "empty_result",
            Error::NothingToCompare(_) => "nothing_to_compare",
            Error::Tuning(_) => "tuning",
            Error::InfeasibleTarget(_) => "infeasible_target",
            Error::Probe { .. } => "probe",
        }
    }
}
