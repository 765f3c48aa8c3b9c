//! Gate-level phase estimation on a full statevector.
//!
//! The register is `p` control qubits followed by the system. Amplitude of
//! control value `c` and system index `s` lives at `c * d + s`; control
//! qubit `l` is bit `l` of `c`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::params::ceil_log2;
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::spectral::eig_sym;

/// Default cap on `p + log2(dim)`.
pub const DEFAULT_QUBIT_CAP: u32 = 22;

fn check_cap(p: u32, dim: usize, cap: u32) -> Result<()> {
    let needed = p + ceil_log2(dim as f64);
    if p == 0 || needed > cap || needed >= 40 {
        return Err(Error::QubitCapExceeded { needed, cap });
    }
    Ok(())
}

/// Outcome distribution of phase estimation for `U = exp(iA)`, `A` already
/// scaled to `||A|| <= 1`. Each `U^(2^l)` comes from the eigendecomposition.
pub fn qpe_statevector(a: &DMatrix<f64>, psi: &[f64], p: u32, cap: u32) -> Result<Vec<f64>> {
    check_cap(p, a.nrows(), cap)?;
    let decomp = eig_sym(a)?;
    if decomp.spectral_radius() > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "observable norm {} exceeds 1",
            decomp.spectral_radius()
        )));
    }
    qpe_statevector_with(p, psi, cap, |l| decomp.unitary_exp(2f64.powi(l as i32)))
}

/// Phase estimation for a unitary given as a dense matrix; powers come from
/// repeated squaring.
pub fn qpe_statevector_unitary(
    u: &DMatrix<Complex64>,
    psi: &[f64],
    p: u32,
    cap: u32,
) -> Result<Vec<f64>> {
    check_cap(p, u.nrows(), cap)?;
    let mut powers = Vec::with_capacity(p as usize);
    let mut cur = u.clone();
    for _ in 0..p {
        let next = &cur * &cur;
        powers.push(cur);
        cur = next;
    }
    qpe_statevector_with(p, psi, cap, |l| powers[l as usize].clone())
}

/// Phase estimation with `power(l) = U^(2^l)` supplied by the caller.
pub fn qpe_statevector_with(
    p: u32,
    psi: &[f64],
    cap: u32,
    power: impl Fn(u32) -> DMatrix<Complex64>,
) -> Result<Vec<f64>> {
    let d = psi.len();
    check_cap(p, d, cap)?;
    let norm_sq = compensated_sum(psi.iter().map(|x| x * x));
    if (norm_sq - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(norm_sq));
    }
    let n_ctrl = 1usize << p;
    let amp = 1.0 / (n_ctrl as f64).sqrt();
    // Hadamards on every control qubit
    let mut state: Vec<Complex64> = (0..n_ctrl)
        .flat_map(|_| psi.iter().map(move |&x| Complex64::new(x * amp, 0.0)))
        .collect();

    for l in 0..p {
        let ul = power(l);
        if ul.nrows() != d || ul.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: ul.nrows(),
            });
        }
        state.par_chunks_mut(d).enumerate().for_each(|(c, block)| {
            if c >> l & 1 == 1 {
                let old: Vec<Complex64> = block.to_vec();
                for (r, out) in block.iter_mut().enumerate() {
                    *out = (0..d).map(|s| ul[(r, s)] * old[s]).sum();
                }
            }
        });
    }

    inverse_qft(&mut state, p, d);

    Ok(state
        .chunks(d)
        .map(|block| compensated_sum(block.iter().map(|z| z.norm_sqr())))
        .collect())
}

fn hadamard(state: &mut [Complex64], q: u32, d: usize) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bit = 1usize << q;
    let n_ctrl = state.len() / d;
    for c in 0..n_ctrl {
        if c & bit == 0 {
            for i in 0..d {
                let (x, y) = (state[c * d + i], state[(c | bit) * d + i]);
                state[c * d + i] = (x + y) * s;
                state[(c | bit) * d + i] = (x - y) * s;
            }
        }
    }
}

fn controlled_phase(state: &mut [Complex64], angle: f64, q1: u32, q2: u32, d: usize) {
    let mask = (1usize << q1) | (1usize << q2);
    let phase = Complex64::from_polar(1.0, angle);
    for (c, block) in state.chunks_mut(d).enumerate() {
        if c & mask == mask {
            block.iter_mut().for_each(|z| *z *= phase);
        }
    }
}

fn swap_qubits(state: &mut [Complex64], q1: u32, q2: u32, d: usize) {
    let (b1, b2) = (1usize << q1, 1usize << q2);
    let n_ctrl = state.len() / d;
    for c in 0..n_ctrl {
        if c & b1 != 0 && c & b2 == 0 {
            let other = (c ^ b1) | b2;
            for i in 0..d {
                state.swap(c * d + i, other * d + i);
            }
        }
    }
}

/// Inverse quantum Fourier transform on the control register, built from
/// swaps, controlled phases and Hadamards.
pub(crate) fn inverse_qft(state: &mut [Complex64], p: u32, d: usize) {
    for j in 0..p / 2 {
        swap_qubits(state, j, p - 1 - j, d);
    }
    for j in 0..p {
        for k in 0..j {
            controlled_phase(state, -PI / 2f64.powi((j - k) as i32), k, j, d);
        }
        hadamard(state, j, d);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpe::analytic::qpe_distribution_analytic;
    use crate::spectral::induced_measure;

    #[test]
    fn gate_level_inverse_qft_matches_dft() {
        let p = 5;
        let n = 1usize << p;
        let input: Vec<Complex64> = (0..n)
            .map(|c| Complex64::new((c as f64 * 0.7).sin(), (c as f64 * 1.3).cos()))
            .collect();
        let mut state = input.clone();
        inverse_qft(&mut state, p, 1);
        for (a, got) in state.iter().enumerate() {
            let want: Complex64 = input
                .iter()
                .enumerate()
                .map(|(c, x)| {
                    x * Complex64::from_polar(1.0, -2.0 * PI * (a * c) as f64 / n as f64)
                })
                .sum::<Complex64>()
                / (n as f64).sqrt();
            assert!((got - want).norm() < 1e-12, "a={a}");
        }
    }

    #[test]
    fn zero_observable_gives_point_mass() {
        let a = DMatrix::zeros(2, 2);
        let d = qpe_statevector(&a, &[0.6, 0.8], 4, DEFAULT_QUBIT_CAP).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12);
    }

    fn tv(x: &[f64], y: &[f64]) -> f64 {
        0.5 * x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    #[test]
    fn agrees_with_closed_form() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let cases = [
            (DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]), vec![1.0, 0.0]),
            (DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), vec![s, s]),
        ];
        for (a, psi) in cases {
            let sv = qpe_statevector(&a, &psi, 8, DEFAULT_QUBIT_CAP).unwrap();
            let e = eig_sym(&a).unwrap();
            let m = induced_measure(&e, &psi, e.default_merge_tol()).unwrap();
            let an = qpe_distribution_analytic(&m, 8).unwrap();
            assert!(tv(&sv, &an) < 1e-8);
        }
    }

    #[test]
    fn cap_enforced() {
        let a = DMatrix::zeros(4, 4);
        let err = qpe_statevector(&a, &[1.0, 0.0, 0.0, 0.0], 21, DEFAULT_QUBIT_CAP);
        assert!(matches!(err, Err(Error::QubitCapExceeded { needed: 23, cap: 22 })));
    }
}
