//! From a phase-estimation outcome `a` to an eigenvalue estimate `z`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// One measured outcome and its eigenvalue estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSample {
    pub a: u64,
    pub z: f64,
}

impl MeasurementSample {
    pub fn new(a: u64, p: u32) -> Result<Self> {
        Ok(Self {
            a,
            z: outcome_to_z(a, p)?,
        })
    }
}

/// Maps `a in [0, 2^p)` to `z in [-1, 1]`.
///
/// Outcomes read as phases `2 pi a / 2^p`; phases past `pi` are negative
/// eigenvalues, and anything that would land outside `[-1, 1]` is clamped
/// to the nearer end.
pub fn outcome_to_z(a: u64, p: u32) -> Result<f64> {
    if p >= 63 {
        return Err(Error::InvalidParameter(format!("p = {p} control qubits is too many")));
    }
    let n = (1u64 << p) as f64;
    if a >= 1u64 << p {
        return Err(Error::IndexOutOfRange {
            index: a as usize,
            dim: 1usize << p,
        });
    }
    let af = a as f64;
    Ok(if af < n / TAU {
        af * TAU / n
    } else if af < n / 2.0 {
        1.0
    } else if af < n - n / TAU {
        -1.0
    } else {
        af * TAU / n - TAU
    })
}

/// Eigenphase `phi in [0, 1)` of `exp(i lambda)`.
pub fn eigenphase(lambda: f64) -> f64 {
    let phi = (lambda / TAU).rem_euclid(1.0);
    if phi >= 1.0 {
        0.0
    } else {
        phi
    }
}

/// Distance between `phi` and `a / 2^p` on the unit circle.
pub fn phase_distance(phi: f64, a: u64, p: u32) -> f64 {
    let d = (phi - a as f64 / 2f64.powi(p as i32)).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// `z^m`, exact for the clamped values `+-1`.
pub fn z_power(z: f64, m: u32) -> f64 {
    z.powi(m as i32)
}
