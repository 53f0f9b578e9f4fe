use alloc::string::String;

/// Failures raised by frame construction and the numerical routines built on it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("weight {weight} needs {expected} Hodge numbers, got {found}")]
    HodgeLength {
        weight: usize,
        expected: usize,
        found: usize,
    },
    #[error("asymmetric Hodge numbers: h[{i}] = {hi} but h[{j}] = {hj}")]
    AsymmetricHodgeNumbers { i: usize, hi: usize, j: usize, hj: usize },
    #[error("total dimension is zero")]
    EmptyFrame,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix does not preserve the polarization (residual {0:e})")]
    NotInAlgebra(f64),
    #[error("element is not real (residual {0:e})")]
    NotReal(f64),
    #[error("element is not in p0 (residual {0:e})")]
    NotInP0(f64),
    #[error("Cartan subalgebra is zero")]
    TrivialCartan,
    #[error("joint eigenspace for weight {weight} has dimension {dim}")]
    DegenerateRootSpace { weight: String, dim: usize },
    #[error("basis element {index} is not an ad(h)-eigenvector")]
    NotEigenvector { index: usize },
    #[error("Weyl normalization failed for root {root}: {reason}")]
    Normalization { root: usize, reason: String },
    #[error("leading block minor {block} lies in the indeterminate band (ratio {ratio:e})")]
    IndeterminateMembership { block: usize, ratio: f64 },
    #[error("flag is outside the big cell (leading block minor {block} vanishes)")]
    OutsideBigCell { block: usize },
    #[error("matrix is not strictly block lower triangular (residual {0:e})")]
    NotNilpotent(f64),
    #[error("matrix is not block unipotent (residual {0:e})")]
    NotUnipotent(f64),
    #[error("exponential out of range: t*|X| = {0}")]
    ExpRange(f64),
    #[error("singular linear system")]
    Singular,
    #[error("rank deficient flag basis")]
    RankDeficient,
    #[error("index {index} out of range (len {len})")]
    OutOfRange { index: usize, len: usize },
    #[error("reduction did not converge: best residual {0:e}")]
    NoConvergence(f64),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
