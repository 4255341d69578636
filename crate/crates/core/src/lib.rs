//! Singular triples, Schmidt and Schur representations, and Hilbert–Schmidt
//! norms of bilinear operators `T: H1 × H2 → K` between finite-dimensional
//! real Hilbert spaces, stored as dense third-order tensors.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fixtures;
pub mod io;
pub mod oracle;
pub mod schmidt;
pub mod schur;
pub mod search;
pub mod spectra;
pub mod synth;
pub mod tensor;
pub mod vecops;

pub use error::{Error, Mode, Result};
pub use oracle::{
    certify_completeness, exhaustive_small_spectrum, fd_tangent_gradient, grid_norm_oracle, stationarity_fd_check,
    GridSpec,
};
pub use schmidt::{
    reconstruct, schmidt_decompose, schmidt_sum_sq, verify_representation, DeflationReport, FailureReason,
    RepresentationReport, SchmidtRepresentation, SchmidtTerm, Status,
};
pub use schur::{
    is_self_adjoint, is_symmetric, schur_from_schmidt, verify_schur, SchurReport, SchurRepresentation, SchurTerm,
};
pub use search::{enumerate_triples, hopm_refine, operator_norm, HopmRun, NonConvergence};
pub use spectra::{
    canonicalize, is_ordered, orbit_distance, verify_triple, OrderedReport, Residuals, SearchConfig, SingularTriple,
    Spectrum, TripleReport,
};
pub use tensor::{Dims, Tensor3};
