use crate::Point;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension {0}: expected a positive integer")]
    InvalidDimension(i64),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("domain is not flagged as regular for the Dirichlet problem")]
    NotRegular,

    #[error("grid mask is disconnected ({components} components)")]
    DisconnectedMask { components: usize },

    #[error("linear solver stalled: relative residual {residual:e} after {iterations} iterations")]
    SolverStalled { residual: f64, iterations: usize },

    #[error("pole {0} is not an interior point of the domain")]
    PoleNotInterior(Point),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("gluing hypothesis violated at {point}: v exceeds v0 by {excess:e} (tolerance {tol:e})")]
    GluingHypothesis { point: Point, excess: f64, tol: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("normalization estimate unstable: spread {spread:.4} over dyadic radii")]
    EstimateUnstable { estimate: f64, spread: f64 },

    #[error("hypothesis ({condition}) violated: {detail}")]
    Hypothesis { condition: &'static str, detail: String },

    #[error("indeterminate extended-real expression: {0}")]
    Indeterminate(String),

    #[error("invalid formula `{formula}`: {message}")]
    Formula { formula: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
