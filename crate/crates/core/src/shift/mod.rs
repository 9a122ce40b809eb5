//! Finite-alphabet Markov shifts: exact transfer-operator computations and
//! Monte Carlo statistics.

pub mod martingale;
pub mod model;
pub mod operator;
pub mod sample;

pub use martingale::{martingale_decomposition, MartingaleDecomposition};
pub use model::{normalize_potential, CylinderFunction, MarkovShiftModel, ModelFile, ObservableFile};
pub use operator::{
    center, correlation_profile, equilibrium_measure, exact_correlation, green_kubo_sigma2, operator_identities,
    transfer_matrix, Equilibrium, GreenKubo, OperatorIdentities, TransferOperator,
};
pub use sample::{empirical_clt, empirical_ldp, empirical_lln, sample_trajectory, simulated_variance, Sampler};
