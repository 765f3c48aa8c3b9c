//! Moment estimation by sampling phase-estimation outcomes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::analytic::SpectralSampler;
use super::outcome::{z_power, MeasurementSample};
use super::params::{choose_params, QpeParams};
use super::statevector::{qpe_statevector, DEFAULT_QUBIT_CAP};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, pairwise_sum};
use crate::sparse::{DeeDecision, DeeInstance, SparseSymmetricMatrix};
use crate::spectral::{eig_sym, induced_measure};

/// How outcomes are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorBackend {
    /// Full gate-level simulation; `p + log2(N)` may not exceed `qubit_cap`.
    Statevector { qubit_cap: u32 },
    /// Closed-form outcome statistics from the eigendecomposition.
    AnalyticSpectral,
}

impl EstimatorBackend {
    pub fn statevector() -> Self {
        EstimatorBackend::Statevector {
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorBackend::Statevector { .. } => "statevector",
            EstimatorBackend::AnalyticSpectral => "analytic",
        }
    }
}

impl Default for EstimatorBackend {
    fn default() -> Self {
        Self::statevector()
    }
}

/// Draws outcomes `a` for one input state.
#[derive(Debug, Clone)]
pub enum OutcomeSampler {
    Table { cumulative: Vec<f64> },
    Spectral(SpectralSampler),
}

impl OutcomeSampler {
    /// Sampler for `exp(iA/b)` at `psi`.
    pub fn new(
        matrix: &SparseSymmetricMatrix,
        b: f64,
        psi: &[f64],
        p: u32,
        backend: EstimatorBackend,
    ) -> Result<Self> {
        let dense = matrix.to_dense() / b;
        match backend {
            EstimatorBackend::Statevector { qubit_cap } => {
                let dist = qpe_statevector(&dense, psi, p, qubit_cap)?;
                let mut acc = 0.0;
                let cumulative = dist
                    .iter()
                    .map(|x| {
                        acc += x;
                        acc
                    })
                    .collect();
                Ok(OutcomeSampler::Table { cumulative })
            }
            EstimatorBackend::AnalyticSpectral => {
                let decomp = eig_sym(&dense)?;
                let measure = induced_measure(&decomp, psi, decomp.default_merge_tol())?;
                Ok(OutcomeSampler::Spectral(SpectralSampler::new(&measure, p)?))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            OutcomeSampler::Table { cumulative } => {
                let total = cumulative[cumulative.len() - 1];
                let u = rng.random::<f64>() * total;
                cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1) as u64
            }
            OutcomeSampler::Spectral(s) => s.sample(rng),
        }
    }
}

/// `k` samples; sample `i` uses stream `i` of the generator seeded by `seed`,
/// so the result does not depend on the number of worker threads.
pub fn draw_samples(
    sampler: &OutcomeSampler,
    p: u32,
    k: usize,
    seed: u64,
) -> Result<Vec<MeasurementSample>> {
    (0..k)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            MeasurementSample::new(sampler.sample(&mut rng), p)
        })
        .collect()
}

/// Sample mean of `z^m` at unit scale, with the samples it came from.
#[derive(Debug, Clone)]
pub struct MomentEstimate {
    pub mean: f64,
    pub samples: Vec<MeasurementSample>,
}

/// Estimates `<psi| (A/b)^m |psi>`.
pub fn estimate_moment(
    matrix: &SparseSymmetricMatrix,
    b: f64,
    psi: &[f64],
    params: &QpeParams,
    backend: EstimatorBackend,
    seed: u64,
) -> Result<MomentEstimate> {
    if psi.len() != matrix.dim() {
        return Err(Error::DimensionMismatch {
            expected: matrix.dim(),
            got: psi.len(),
        });
    }
    let sampler = OutcomeSampler::new(matrix, b, psi, params.p, backend)?;
    let samples = draw_samples(&sampler, params.p, params.k, seed)?;
    let powers: Vec<f64> = samples.iter().map(|s| z_power(s.z, params.m)).collect();
    Ok(MomentEstimate {
        mean: pairwise_sum(&powers) / params.k as f64,
        samples,
    })
}

fn check_consistent(instance: &DeeInstance, params: &QpeParams) -> Result<()> {
    if params.m != instance.m() || params.epsilon != instance.epsilon() {
        return Err(Error::InvalidParameter(format!(
            "parameters for (m = {}, eps = {}) do not match instance (m = {}, eps = {})",
            params.m,
            params.epsilon,
            instance.m(),
            instance.epsilon()
        )));
    }
    params.validate()
}

fn basis_vector(n: usize, j: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[j] = 1.0;
    v
}

/// Decides an instance from `k` samples at `e_j`.
pub fn estimate_diag(
    instance: &DeeInstance,
    params: &QpeParams,
    backend: EstimatorBackend,
    seed: u64,
) -> Result<DeeDecision> {
    Ok(estimate_diag_with_samples(instance, params, backend, seed)?.0)
}

/// [`estimate_diag`] that also returns the raw samples.
pub fn estimate_diag_with_samples(
    instance: &DeeInstance,
    params: &QpeParams,
    backend: EstimatorBackend,
    seed: u64,
) -> Result<(DeeDecision, Vec<MeasurementSample>)> {
    check_consistent(instance, params)?;
    let psi = basis_vector(instance.matrix().dim(), instance.j());
    let est = estimate_moment(instance.matrix(), instance.b(), &psi, params, backend, seed)?;
    let estimate = est.mean * instance.scale();
    Ok((DeeDecision::from_estimate(estimate, instance.g()), est.samples))
}

/// Deterministic child seed for a labelled sub-run.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Estimates `(A^m)_{ij}` as half the difference of the moments at
/// `(e_i + e_j)/sqrt 2` and `(e_i - e_j)/sqrt 2`. Each run gets accuracy
/// `eps / 2` and the full failure probability of `params`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_offdiag(
    matrix: &SparseSymmetricMatrix,
    b: f64,
    i: usize,
    j: usize,
    params: &QpeParams,
    backend: EstimatorBackend,
    seed: u64,
) -> Result<f64> {
    let n = matrix.dim();
    for idx in [i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, dim: n });
        }
    }
    if i == j {
        return Err(Error::InvalidParameter(
            "off-diagonal estimation needs i != j; use estimate_diag".into(),
        ));
    }
    let sub = choose_params(params.m, params.epsilon / 2.0, params.fail_prob)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (lo, hi) = (i.min(j), i.max(j));
    let mut plus = vec![0.0; n];
    plus[lo] = s;
    plus[hi] = s;
    let mut minus = plus.clone();
    minus[hi] = -s;
    let e_plus = estimate_moment(matrix, b, &plus, &sub, backend, derive_seed(seed, 1))?.mean;
    let e_minus = estimate_moment(matrix, b, &minus, &sub, backend, derive_seed(seed, 2))?.mean;
    Ok(0.5 * (e_plus - e_minus) * b.powf(f64::from(params.m)))
}

/// Exact expectation `E[Z^m]` at `psi` (no sampling), for checking budgets.
pub fn exact_expected_power(
    matrix: &SparseSymmetricMatrix,
    b: f64,
    psi: &[f64],
    p: u32,
    m: u32,
) -> Result<f64> {
    let dense = matrix.to_dense() / b;
    let decomp = eig_sym(&dense)?;
    let measure = induced_measure(&decomp, psi, decomp.default_merge_tol())?;
    Ok(compensated_sum(
        measure
            .atoms()
            .iter()
            .map(|&(l, w)| super::analytic::eigenstate_expected_power(l, p, m).map(|e| w * e))
            .collect::<Result<Vec<_>>>()?,
    ))
}
