//! Error type shared by all modules of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system shape: {0}")]
    InvalidShape(String),

    #[error("matrix is not Hermitian: max |M - M^dag| = {defect:.3e} exceeds {tol:.1e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("operator trace {trace:.12} deviates from 1 beyond {tol:.1e}")]
    NotUnitTrace { trace: f64, tol: f64 },

    #[error("operator has eigenvalue {min_eig:.3e} below -{tol:.1e}")]
    NotPositive { min_eig: f64, tol: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("site set must not be empty")]
    EmptySiteSet,

    #[error("matrix is not unitary: max |U^dag U - I| = {defect:.3e}")]
    NotUnitary { defect: f64 },

    #[error("map is not Hermiticity-preserving: Choi asymmetry {defect:.3e}")]
    NotHermiticityPreserving { defect: f64 },

    #[error("eigendecomposition did not converge")]
    EigenFailed,

    #[error("constant c = {c} is below the bound (2^(N-1)-2)*nu = {bound}")]
    ConstantBelowBound { c: f64, bound: f64 },

    #[error("need moments up to s_{required}, only {available} available")]
    InsufficientMoments { required: usize, available: usize },

    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("imaginary residue {residue:.3e} exceeds 1e-9; the operator is mis-built")]
    ImaginaryResidue { residue: f64 },

    #[error("unsupported map for this operation: {0}")]
    UnsupportedMap(String),

    #[error("assembled dimension {dim} exceeds the dense backend cap of {cap}")]
    DimensionCapExceeded { dim: usize, cap: usize },

    #[error("observable is not Hermitian: defect {defect:.3e}")]
    NonHermitianObservable { defect: f64 },

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
