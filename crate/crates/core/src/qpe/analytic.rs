//! Closed-form phase-estimation statistics.
//!
//! For an eigenvector with eigenphase `phi`, textbook phase estimation with
//! `p` control qubits returns `a` with probability
//! `sin^2(2^p pi D) / (2^(2p) sin^2(pi D))`, `D = phi - a / 2^p`
//! (a Fejer kernel, equal to 1 when `D` is an integer). A general input
//! state gives the mixture of these kernels weighted by its spectral measure.

use std::f64::consts::PI;

use rand::Rng;

use super::outcome::{eigenphase, outcome_to_z, phase_distance, z_power};
use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::spectral::SpectralMeasure;

/// Largest register for which full outcome vectors are materialized.
pub const MAX_TABLE_QUBITS: u32 = 26;

const NORMALIZED_TOL: f64 = 1e-9;

/// `Pr(a | phi)` for `p` control qubits.
pub fn fejer_probability(phi: f64, a: u64, p: u32) -> f64 {
    let n = 2f64.powi(p as i32);
    let t = phi * n;
    let frac = t - t.floor();
    if frac == 0.0 {
        let b = (t as u64) & ((1u64 << p) - 1);
        return if b == a { 1.0 } else { 0.0 };
    }
    let d = t - a as f64;
    let d = d - n * (d / n).round();
    let num = (PI * frac).sin().powi(2);
    let den = (n * (PI * d / n).sin()).powi(2);
    num / den
}

fn check_normalized(measure: &SpectralMeasure) -> Result<()> {
    for &(l, _) in measure.atoms() {
        if l.abs() > 1.0 + NORMALIZED_TOL {
            return Err(Error::InvalidParameter(format!(
                "eigenvalue {l} outside [-1, 1]; rescale the observable by its norm bound"
            )));
        }
    }
    Ok(())
}

fn check_table_size(p: u32) -> Result<()> {
    if p == 0 || p > MAX_TABLE_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "outcome tables need 1 <= p <= {MAX_TABLE_QUBITS}, got {p}"
        )));
    }
    Ok(())
}

/// Full outcome distribution for a mixture of eigenstates.
pub fn qpe_distribution_analytic(measure: &SpectralMeasure, p: u32) -> Result<Vec<f64>> {
    check_normalized(measure)?;
    check_table_size(p)?;
    let n = 1u64 << p;
    let mut dist = vec![0.0; n as usize];
    for &(l, w) in measure.atoms() {
        if w == 0.0 {
            continue;
        }
        let phi = eigenphase(l);
        for (a, slot) in dist.iter_mut().enumerate() {
            *slot += w * fejer_probability(phi, a as u64, p);
        }
    }
    Ok(dist)
}

/// `E[Z^m]` under an outcome distribution.
pub fn expected_power(dist: &[f64], p: u32, m: u32) -> Result<f64> {
    if dist.len() as u64 != 1u64 << p {
        return Err(Error::DimensionMismatch {
            expected: 1usize << p,
            got: dist.len(),
        });
    }
    let mut acc = CompensatedSum::new();
    for (a, &pr) in dist.iter().enumerate() {
        if pr != 0.0 {
            acc.add(pr * z_power(outcome_to_z(a as u64, p)?, m));
        }
    }
    Ok(acc.value())
}

/// Exact `E[Z^m]` for a single eigenstate with eigenvalue `lambda`.
pub fn eigenstate_expected_power(lambda: f64, p: u32, m: u32) -> Result<f64> {
    check_table_size(p)?;
    let phi = eigenphase(lambda);
    let mut acc = CompensatedSum::new();
    for a in 0..(1u64 << p) {
        let pr = fejer_probability(phi, a, p);
        if pr != 0.0 {
            acc.add(pr * z_power(outcome_to_z(a, p)?, m));
        }
    }
    Ok(acc.value())
}

/// `Pr(|phi - a/2^p| < eta)` with the distance taken on the circle.
pub fn mass_within(phi: f64, p: u32, eta: f64) -> f64 {
    let n = 2f64.powi(p as i32);
    let modulus = 1i64 << p;
    let t = phi * n;
    let lo = (t - eta * n).floor() as i64;
    let hi = (t + eta * n).ceil() as i64;
    // a window wider than the circle covers everything
    if hi - lo >= modulus {
        return compensated_sum((0..modulus as u64).map(|a| fejer_probability(phi, a, p)));
    }
    compensated_sum((lo..=hi).filter_map(|a| {
        let a = a.rem_euclid(modulus) as u64;
        (phase_distance(phi, a, p) < eta).then(|| fejer_probability(phi, a, p))
    }))
}

/// Draws one outcome for eigenphase `phi` by walking candidates outward from
/// `phi 2^p` in order of distance. `u` is uniform in `[0, 1)`.
pub fn sample_eigenphase_outcome(phi: f64, p: u32, u: f64) -> u64 {
    let modulus = 1u64 << p;
    let n = modulus as f64;
    let t = phi * n;
    let base = t.floor();
    let frac = t - base;
    let b0 = (base as u64) & (modulus - 1);
    if frac == 0.0 {
        return b0;
    }
    let num = (PI * frac).sin().powi(2);
    let prob_at = |dist: f64| num / (n * (PI * dist / n).sin()).powi(2);
    let (mut below, mut above) = (0u64, 0u64);
    let mut cum = 0.0;
    for _ in 0..modulus {
        let d_below = frac + below as f64;
        let d_above = (1.0 - frac) + above as f64;
        let (a, d) = if d_below <= d_above {
            below += 1;
            ((b0 + modulus - (below - 1)) & (modulus - 1), d_below)
        } else {
            above += 1;
            ((b0 + above) & (modulus - 1), d_above)
        };
        cum += prob_at(d);
        if u < cum {
            return a;
        }
    }
    // round-off left u above the accumulated total
    if frac <= 0.5 {
        b0
    } else {
        (b0 + 1) & (modulus - 1)
    }
}

/// Samples outcomes of phase estimation on a spectral mixture without
/// materializing the `2^p` outcome table.
#[derive(Debug, Clone)]
pub struct SpectralSampler {
    phases: Vec<f64>,
    cumulative: Vec<f64>,
    p: u32,
}

impl SpectralSampler {
    pub fn new(measure: &SpectralMeasure, p: u32) -> Result<Self> {
        check_normalized(measure)?;
        if p == 0 || p >= 63 {
            return Err(Error::InvalidParameter(format!("unsupported control register p = {p}")));
        }
        let atoms: Vec<_> = measure.atoms().iter().filter(|a| a.1 > 0.0).collect();
        let mut acc = CompensatedSum::new();
        let mut cumulative = Vec::with_capacity(atoms.len());
        for a in &atoms {
            acc.add(a.1);
            cumulative.push(acc.value());
        }
        Ok(Self {
            phases: atoms.iter().map(|a| eigenphase(a.0)).collect(),
            cumulative,
            p,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cumulative.last().expect("measure has positive weight");
        let u1: f64 = rng.random::<f64>() * total;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= u1)
            .min(self.phases.len() - 1);
        let u2: f64 = rng.random();
        sample_eigenphase_outcome(self.phases[idx], self.p, u2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_phase_is_a_point_mass() {
        let p = 6;
        let lambda = 2.0 * PI * 3.0 / 64.0;
        let m = SpectralMeasure::new(vec![(lambda, 1.0)]).unwrap();
        let d = qpe_distribution_analytic(&m, p).unwrap();
        assert_eq!(d[3], 1.0);
        assert_eq!(d.iter().sum::<f64>(), 1.0);
        assert_eq!(sample_eigenphase_outcome(eigenphase(lambda), p, 0.999), 3);
    }

    #[test]
    fn kernel_sums_to_one() {
        for &phi in &[0.1234, 0.5, 0.999, 1.0 / PI] {
            let s = compensated_sum((0..256).map(|a| fejer_probability(phi, a, 8)));
            assert!((s - 1.0).abs() < 1e-12, "phi={phi} sum={s}");
        }
    }

    #[test]
    fn mixtures_are_linear() {
        let a = SpectralMeasure::new(vec![(0.3, 1.0)]).unwrap();
        let b = SpectralMeasure::new(vec![(-0.7, 1.0)]).unwrap();
        let ab = SpectralMeasure::new(vec![(0.3, 0.5), (-0.7, 0.5)]).unwrap();
        let (da, db, dab) = (
            qpe_distribution_analytic(&a, 8).unwrap(),
            qpe_distribution_analytic(&b, 8).unwrap(),
            qpe_distribution_analytic(&ab, 8).unwrap(),
        );
        for i in 0..256 {
            assert!((dab[i] - 0.5 * (da[i] + db[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn unnormalized_measure_rejected() {
        let m = SpectralMeasure::new(vec![(1.5, 1.0)]).unwrap();
        assert!(qpe_distribution_analytic(&m, 4).is_err());
        assert!(SpectralSampler::new(&m, 4).is_err());
    }

    #[test]
    fn unit_eigenvalue_meets_its_phase_contract() {
        // p = 12, eta = 1/(13 pi), theta = 1/13 (m = 1, eps = 1)
        let mass = mass_within(eigenphase(1.0), 12, 1.0 / (13.0 * PI));
        assert!(mass > 12.0 / 13.0, "mass {mass}");
    }

    #[test]
    fn window_mass_matches_full_scan() {
        let (p, eta) = (9, 0.02);
        for &phi in &[0.001, 0.37, 0.9995] {
            let brute = compensated_sum(
                (0..512u64)
                    .filter(|&a| phase_distance(phi, a, p) < eta)
                    .map(|a| fejer_probability(phi, a, p)),
            );
            assert!((mass_within(phi, p, eta) - brute).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_cdf_walk_matches_table() {
        // Each candidate's CDF interval must map back to that candidate.
        let (phi, p) = (0.3217, 7);
        let table: Vec<f64> = (0..128).map(|a| fejer_probability(phi, a, p)).collect();
        let mut order: Vec<u64> = (0..128).collect();
        order.sort_by(|&x, &y| {
            phase_distance(phi, x, p)
                .total_cmp(&phase_distance(phi, y, p))
        });
        let mut cum = 0.0;
        for &a in order.iter().take(20) {
            let mid = cum + 0.5 * table[a as usize];
            assert_eq!(sample_eigenphase_outcome(phi, p, mid), a);
            cum += table[a as usize];
        }
    }
}
