use thiserror::Error;

/// Errors raised by the laboratory's numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("grid function does not live on the expected mesh: {0}")]
    MeshMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value at cell {cell}")]
    NonFinite { cell: usize },
    #[error("invalid Lorentz exponents (p = {p}, q = {q})")]
    InvalidExponents { p: f64, q: f64 },
    #[error("negative value {value} at cell {cell} where a nonnegative one is required")]
    NegativeValue { cell: usize, value: f64 },
    #[error("nonpositive weight {value} at cell {cell}")]
    NonPositiveWeight { cell: usize, value: f64 },
    #[error("gradient vanishes identically")]
    ZeroGradient,
    #[error("flow is not discretely divergence-free (max |div U| = {divergence:e}, max boundary flux = {boundary_flux:e})")]
    NotDivergenceFree { divergence: f64, boundary_flux: f64 },
    #[error("mesh Peclet number {peclet} exceeds 1; refine the mesh or weaken the flow")]
    PecletViolation { peclet: f64 },
    #[error("domain is not contained in the enclosing box: {0}")]
    NotContained(String),
    #[error("linear solver failed: backward error {residual:e} after refinement")]
    SolverBreakdown { residual: f64 },
    #[error("singular system: zero pivot at row {row}")]
    Singular { row: usize },
    #[error("iteration did not converge within {iterations} steps (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("principal eigenvector is not single-signed (min/max = {ratio:e})")]
    PerronViolation { ratio: f64 },
    #[error("fit window starved: {found} usable cells, need at least {needed}")]
    WindowStarved { found: usize, needed: usize },
    #[error("eigenbasis is not orthonormal (max Gram defect {defect:e})")]
    NotOrthonormal { defect: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
