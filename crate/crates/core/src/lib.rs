//! Loschmidt echo and ground-state Berry phase of a central spin coupled to
//! a transverse-field XY chain.
//!
//! The chain is solved exactly through its Bogoliubov modes ([`spectrum`]);
//! the echo is a product over momentum pairs ([`loschmidt`]) cross-checked by
//! direct 2x2 evolution ([`oracle`]); the central spin's Berry phase and its
//! finite-size scaling live in [`berry`].

pub mod berry;
pub mod error;
pub mod loschmidt;
pub mod oracle;
pub mod quadrature;
pub mod search;
pub mod spectrum;

pub use berry::{
    berry_phase_finite, berry_phase_finite_with_delta, berry_phase_thermodynamic, dbeta_dlambda,
    dbeta_dlambda_with_delta, df_thermodynamic, effective_energies, f_thermodynamic, find_peak,
    find_pseudocritical, peak_exponent, scaling_fit, scaling_fit_in, BerryResult, DerivativeMethod,
    PeakTarget, Regime, ScalingFit, Slope, REFERENCE_EXPONENT,
};
pub use error::{Error, Result};
pub use loschmidt::{
    echo_series, heuristic_tau, log_echo, loschmidt_echo, partial_product, purity,
    small_k_log_echo, EchoSeries, HeuristicParams, PurityInput,
};
pub use oracle::{build_pair_subspace, oracle_echo, PairSubspace};
pub use spectrum::{
    derive_branch_params, df_dlambda, f_function, mode_table, BranchParams, CentralSpinParams,
    ChainParams, ModeData,
};
