//! Quantum Fisher information matrices for density operators written in
//! non-orthogonal bases, with a discrete point-source imaging model and
//! closed-form reference results.

pub mod basis;
pub mod closed_forms;
pub mod error;
pub mod imaging;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod qfim;
pub mod rmatrix;
pub mod sld;
pub mod unitary;

pub use basis::{build_basis, extend_basis, BasisSet, Extension, RANK_TOL};
pub use closed_forms::{
    three_source_distance_qfi, three_source_intensity_qfim, two_source_gamma, two_source_qfim,
    two_source_scaled_qfi,
};
pub use error::{QfimError, Result};
pub use imaging::{
    build_state_model, centroid_relative_jacobian, generator_moments, generators, photon_state,
    source_ket, Axis, CollectionPoint, GeneratorMoments, GeneratorSet, ImagingScene, ParamSpec, Source,
};
pub use linalg::{BlockPartition, CMatrix, C64};
pub use model::{ParameterSlot, StateModel};
pub use oracle::{qfim_oracle_eigen, qfim_safranek, qfim_safranek_regularized, RegularizedQfim};
pub use qfim::{compatibility, gamma, qfi_single, qfim, qfim_with_options, QfimOptions, QfimReport};
pub use rmatrix::{reparameterize, RealMatrix};
pub use sld::{sld_nonortho, SldSolution};
pub use unitary::{qfim_unitary, unitary_model};
