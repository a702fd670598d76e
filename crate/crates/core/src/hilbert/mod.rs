//! Discrete measurement bases over the logical OAM index space: logical kets, complete MUB
//! families, the angular (Fourier) basis and Weyl–Heisenberg SIC-POVMs.

mod basis;
mod certify;
pub mod galois;
mod io;
mod mub;
mod sic;
mod weyl;

pub use basis::{
    build_angular_basis, build_logical_basis, logical_index_map, BasisVector, ModeBasis, ModeBasisKind,
    OamIndexMap, NORM_TOL,
};
pub use certify::{certify_mub, certify_sic, MubCertificate, SicCertificate, WorstPair};
pub use io::{basis_from_json, basis_to_json, load_vector, BasisDocument, ComplexPair};
pub use mub::{build_mub_family, is_supported_dim, MubFamily, MAX_MUB_DIM};
pub use sic::{build_sic_povm, find_sic_fiducial, FiducialCache, FrameObjective, SicSearchOptions};
pub use weyl::{displace, displacement_operator};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HilbertError {
    #[error("invalid dimension {0}: need d >= 2")]
    InvalidDimension(usize),
    #[error("unsupported dimension {0}: MUB families are built for prime powers up to {max} and for d = 6 (partial)", max = MAX_MUB_DIM)]
    UnsupportedDimension(usize),
    #[error("{0} is not a prime power")]
    NotPrimePower(usize),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("vector is not unit-norm (norm = {norm})")]
    NotNormalized { norm: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{kind:?} basis needs {expected} vectors, found {found}")]
    WrongVectorCount {
        kind: ModeBasisKind,
        expected: usize,
        found: usize,
    },
    #[error("expected a {expected:?} basis, found {found:?}")]
    WrongKind {
        expected: ModeBasisKind,
        found: ModeBasisKind,
    },
    #[error("SIC fiducial search in d = {dim} failed after {restarts} restarts (best residual {best_residual:e})")]
    SearchFailed {
        dim: usize,
        restarts: usize,
        best_residual: f64,
    },
    #[error("invalid search options: tol must be positive and restarts nonzero")]
    InvalidSearchOptions,
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}
