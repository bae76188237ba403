//! Quantum Fisher information of edge states and many-body ground states in
//! topological lattice models, with finite-size exponent fits and simulated
//! position-measurement estimation.

pub mod cli;
pub mod edge;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod many_body;
pub mod measure;
pub mod models;
pub mod scaling;
pub mod table;

pub use edge::{
    numeric_edge_information, qfi_phi_z_closed_form, qfi_phi_z_complex, qfi_tpt_limit, ssh_edge_family, ssh_edge_qfi,
    EdgeAnsatz,
};
pub use error::{Error, Result};
pub use estimation::{cfi, qfi_pure, sld_pure, PureState, StateDerivative};
pub use linalg::{hermitian_eig, ComplexMatrix, EigenDecomposition, C64};
pub use many_body::{
    band_inversion_lowest_modes, chern_tpt_sum, qfi_obc_projector, qfi_pbc_sum, qfi_slater_projector,
    qfi_slater_states, ssh_continuum_limit, ssh_tpt_closed_form,
};
pub use measure::{estimator_stats, mle_estimate, sample_positions, EstimationReport, SimConfig};
pub use models::{Boundary, ModelFamily};
pub use scaling::{exponent_scan, fit_power_law, FitResult, ScalingSeries};
