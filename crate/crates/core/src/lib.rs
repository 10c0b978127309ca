//! Detection of genuine multipartite entanglement (GME) from truncated
//! moments of positive maps.
//!
//! The library builds GME maps out of single-site positive maps (transposition,
//! reduction, Lindblad-generated), computes moment vectors and Hankel-determinant
//! verdicts, cross-validates moments against multi-copy observable expectations,
//! and locates noise thresholds by parameter sweeps.

pub mod error;
pub mod gme;
pub mod maps;
pub mod moments;
pub mod qcore;
pub mod realization;
pub mod states;
pub mod threshold;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use gme::{Bipartition, Detection, GmeMap, NuEstimate};
pub use maps::{LindbladSpec, SingleSiteMap};
pub use moments::{HankelReport, MomentVector, PptVerdict, PtMomentVector, Verdict};
pub use qcore::{CMatrix, DensityOperator, HermitianOperator, SystemShape};
pub use realization::{MultiCopyObservable, ShotEstimate, TermIndexString};
