use thiserror::Error;

/// Failures raised by the geometric and numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("conformal radius must be positive and finite, got {0}")]
    InvalidRadius(f64),

    #[error("map is not univalent: area formula gives {area}")]
    NonUnivalentMap { area: f64 },

    #[error("point |w| = {modulus} lies inside the omitted disk |w| < {r0}")]
    InsideOmittedDisk { modulus: f64, r0: f64 },

    #[error("layer radii must satisfy r0 < r_1 < ... < r_N (violated at layer {layer})")]
    NonIncreasingRadii { layer: usize },

    #[error("conductivity sigma_{index} = {value} must be positive and finite")]
    InvalidConductivity { index: usize, value: f64 },

    #[error("interface {interface} separates equal conductivities {sigma}; merge the layers instead")]
    DegenerateInterface { interface: usize, sigma: f64 },

    #[error("truncation order must be at least 1")]
    ZeroTruncation,

    #[error("truncation order {order} with outer radius {radius} overflows the transfer diagonals")]
    TransferOverflow { order: usize, radius: f64 },

    #[error("transfer diagonal d4 vanishes at mode k = {k}")]
    SingularTransfer { k: usize },

    #[error("FPT linear system is ill-conditioned (pivot ratio {pivot_ratio:e})")]
    IllConditionedSystem { pivot_ratio: f64 },

    #[error("ellipse closed form is singular at m = {m}: lambda^2 equals |a1|^(2m)/(4 r^(4m))")]
    SingularContrast { m: usize },

    #[error("contrast tau = {0} is outside the real-conductivity range |tau| >= 1")]
    InvalidContrast(f64),

    #[error("conductivity equal to the background (contrast undefined)")]
    NoInclusion,

    #[error("table has truncation {table} but {requested} was requested")]
    InconsistentTruncation { table: usize, requested: usize },

    #[error("core consistency residual {residual:e} exceeds {tolerance:e}")]
    ConsistencyFailure { residual: f64, tolerance: f64 },

    #[error("loading must have at least one nonzero finite coefficient")]
    EmptyLoading,

    #[error("loading degree {degree} exceeds truncation {order}")]
    LoadingTooLong { degree: usize, order: usize },

    #[error("point is outside the domain of the requested evaluation")]
    OutOfDomain,

    #[error("design needs at least one coating layer")]
    NothingToDesign,

    #[error("design target order must be at least 1")]
    InvalidOrder,

    #[error("expected {expected} conductivities, got {got}")]
    ParameterCount { expected: usize, got: usize },

    #[error("initial conductivities are infeasible: {0}")]
    InfeasibleStart(alloc::boxed::Box<Error>),

    #[error("objective became non-finite at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("invalid solver option: {0}")]
    InvalidOption(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
