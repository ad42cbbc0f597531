use thiserror::Error;

/// Errors produced by operator construction and the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("radius {radius} out of range for depth {depth}")]
    RadiusOutOfRange { radius: usize, depth: usize },

    #[error("vertex {index} outside tree of depth {depth}")]
    VertexOutOfRange { index: usize, depth: usize },

    #[error("vertices lie on different spheres ({left} vs {right})")]
    LevelMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    /// `Pi* Pi = 2 I` holds only away from the last sphere of a truncated
    /// tree; vectors supported there have no outward edges.
    #[error("vector has support on sphere {level}, the truncation boundary")]
    TruncationBoundary { level: usize },

    #[error("vertex at level {level} touches the truncation boundary (depth {depth})")]
    BoundaryVertex { level: usize, depth: usize },

    #[error("eigensolver failed to converge after {iterations} implicit-shift iterations")]
    NoConvergence { iterations: usize },

    #[error("eigendecomposition residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("invalid window: need delta > 0 and b - a > 2 delta (a = {a}, b = {b}, delta = {delta})")]
    InvalidWindow { a: f64, b: f64, delta: f64 },

    #[error("window [{a}, {b}] is not properly contained in the spectral bulk (-2*sqrt(2), 2*sqrt(2))")]
    WindowOutsideBulk { a: f64, b: f64 },

    #[error("generator is outside the requested subspace (residual {residual:e})")]
    GeneratorOutsideSubspace { residual: f64 },

    #[error("generator is not normalized (norm {norm})")]
    GeneratorNotNormalized { norm: f64 },

    #[error("depth {depth} too small for this check (need at least {minimum})")]
    DepthTooSmall { depth: usize, minimum: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
