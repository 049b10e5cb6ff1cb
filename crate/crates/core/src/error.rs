use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("point at or too close to the cone tip (r = {r:e})")]
    DegeneratePoint { r: f64 },
    #[error("ill-conditioned chart: |z_elim| = {z_elim:e} relative to |z| = {norm:e}")]
    IllConditionedChart { z_elim: f64, norm: f64 },
    #[error("point outside the domain: {0}")]
    OutsideDomain(String),
    #[error("scale parameter must be nonzero")]
    InvalidScale,
    #[error("shape error: {0}")]
    Shape(String),
    #[error("jet order {have} is below the required {need}")]
    Order { have: usize, need: usize },
    #[error("t = 0: use the cone potential r^2 = |z|^(4/3) instead")]
    UseConePotential,
    #[error("decay fit failed: {0}")]
    FitFailure(String),
    #[error("linear solve failed: {0}")]
    Solve(String),
    #[error("(2,2)-form is not a square of a positive (1,1)-form: eigenvalue {eigenvalue:e}")]
    NotASquare { eigenvalue: f64 },
    #[error("metric is singular or not positive definite (min eigenvalue {min_eig:e})")]
    SingularMetric { min_eig: f64 },
    #[error("perturbation too large: |theta + conj theta| = {size:e} exceeds {limit:e}")]
    PerturbationTooLarge { size: f64, limit: f64 },
    #[error("form degree overflow: ({p},{q})")]
    Degree { p: usize, q: usize },
    #[error("field evaluation failed: {0}")]
    Evaluation(String),
    #[error("empty sample set")]
    EmptySamples,
    #[error("non-finite samples at indices {0:?}")]
    NonFinite(Vec<usize>),
}

pub type Result<T> = std::result::Result<T, GeomError>;
