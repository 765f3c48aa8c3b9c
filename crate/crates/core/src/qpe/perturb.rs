//! Error injection for the simulated unitary.
//!
//! `V = exp(iA) exp(i d G)` with a random symmetric `G`, `||G|| = 1` and
//! `d = 2 asin(delta / 2)`, so `||V - exp(iA)|| = delta` up to round-off.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::analytic::expected_power;
use super::statevector::{qpe_statevector_unitary, DEFAULT_QUBIT_CAP};
use crate::error::{Error, Result};
use crate::spectral::{complex_operator_norm, eig_sym, spectral_norm};

// keeps the realized distance on the safe side of delta after round-off
const SHRINK: f64 = 1.0 - 1e-9;

fn random_unit_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.random_range(-1.0..1.0);
            g[(i, j)] = x;
            g[(j, i)] = x;
        }
    }
    let norm = spectral_norm(&g)?;
    if norm == 0.0 {
        g[(0, 0)] = 1.0;
        return Ok(g);
    }
    Ok(g / norm)
}

/// A unitary within operator-norm distance `delta` of `exp(iA)`.
pub fn perturbed_unitary(a: &DMatrix<f64>, delta: f64, seed: u64) -> Result<DMatrix<Complex64>> {
    if !(0.0..=2.0).contains(&delta) {
        return Err(Error::InvalidParameter(format!("delta must lie in [0, 2], got {delta}")));
    }
    let u = eig_sym(a)?.unitary_exp(1.0);
    if delta == 0.0 || a.nrows() == 0 {
        return Ok(u);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_unit_symmetric(a.nrows(), &mut rng)?;
    let angle = 2.0 * (delta / 2.0).asin() * SHRINK;
    Ok(u * eig_sym(&g)?.unitary_exp(angle))
}

/// `||V - exp(iA)||` measured directly.
pub fn unitary_distance(a: &DMatrix<f64>, v: &DMatrix<Complex64>) -> Result<f64> {
    let u = eig_sym(a)?.unitary_exp(1.0);
    complex_operator_norm(&(v - u))
}

/// Result of running phase estimation with the exact and a perturbed unitary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationReport {
    pub exact: f64,
    pub perturbed: f64,
    pub distance: f64,
    /// `2^(p+2) delta`.
    pub bound: f64,
}

impl PerturbationReport {
    pub fn shift(&self) -> f64 {
        (self.perturbed - self.exact).abs()
    }

    pub fn within_bound(&self) -> bool {
        self.shift() <= self.bound
    }
}

/// `E[Z^m]` at `psi` for `exp(iA)` and for a `delta`-perturbed copy.
pub fn perturbation_shift(
    a: &DMatrix<f64>,
    psi: &[f64],
    p: u32,
    m: u32,
    delta: f64,
    seed: u64,
) -> Result<PerturbationReport> {
    let u = eig_sym(a)?.unitary_exp(1.0);
    let v = perturbed_unitary(a, delta, seed)?;
    let exact = expected_power(&qpe_statevector_unitary(&u, psi, p, DEFAULT_QUBIT_CAP)?, p, m)?;
    let perturbed = expected_power(&qpe_statevector_unitary(&v, psi, p, DEFAULT_QUBIT_CAP)?, p, m)?;
    Ok(PerturbationReport {
        exact,
        perturbed,
        distance: complex_operator_norm(&(v - u))?,
        bound: super::params::perturbation_bound(p, delta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_observable() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0.2, 0.3, 0.0, 0.3, -0.1, 0.4, 0.0, 0.4, 0.5])
    }

    #[test]
    fn zero_delta_is_exact() {
        let a = sample_observable();
        let v = perturbed_unitary(&a, 0.0, 7).unwrap();
        assert_eq!(v, eig_sym(&a).unwrap().unitary_exp(1.0));
    }

    #[test]
    fn distance_is_at_most_delta() {
        let a = sample_observable();
        for seed in 0..5 {
            let v = perturbed_unitary(&a, 1e-3, seed).unwrap();
            let d = unitary_distance(&a, &v).unwrap();
            assert!(d > 0.0 && d <= 1e-3, "d = {d}");
        }
    }

    #[test]
    fn shift_respects_bound() {
        let a = sample_observable();
        let r = perturbation_shift(&a, &[1.0, 0.0, 0.0], 6, 3, 1e-2, 1).unwrap();
        assert!(r.within_bound(), "{r:?}");
    }
}
