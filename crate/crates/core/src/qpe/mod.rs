//! Phase-estimation based estimation of diagonal entries of `A^m`.
//!
//! With `U = exp(iA)` and `||A|| <= 1`, phase estimation on `e_j` returns an
//! outcome `a`; mapping `a` back to an eigenvalue estimate `z` and averaging
//! `z^m` over `k` runs estimates `(A^m)_{jj}`.

pub mod analytic;
pub mod estimator;
pub mod outcome;
pub mod params;
pub mod perturb;
pub mod statevector;

pub use analytic::{
    eigenstate_expected_power, expected_power, fejer_probability, mass_within,
    qpe_distribution_analytic, SpectralSampler,
};
pub use estimator::{
    derive_seed, draw_samples, estimate_diag, estimate_diag_with_samples, estimate_moment,
    estimate_offdiag, exact_expected_power, EstimatorBackend, MomentEstimate, OutcomeSampler,
};
pub use outcome::{eigenphase, outcome_to_z, phase_distance, z_power, MeasurementSample};
pub use params::{
    choose_params, control_qubits, hoeffding_failure_bound, hoeffding_samples,
    perturbation_bound, PhaseBudget, QpeParams,
};
pub use perturb::{perturbation_shift, perturbed_unitary, unitary_distance, PerturbationReport};
pub use statevector::{
    qpe_statevector, qpe_statevector_unitary, qpe_statevector_with, DEFAULT_QUBIT_CAP,
};
