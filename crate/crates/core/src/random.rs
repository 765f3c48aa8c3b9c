//! Seeded random instances for tests and verification runs.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::sparse::SparseSymmetricMatrix;

/// Symmetric matrix with about `per_row` off-diagonal entries per row and
/// values uniform in `[-1, 1]`; each diagonal entry is set with probability
/// one half. The norm bound is the Gershgorin bound.
pub fn random_sparse_symmetric(n: usize, per_row: usize, seed: u64) -> Result<SparseSymmetricMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for i in 0..n {
        if rng.random_bool(0.5) {
            entries.push((i, i, rng.random_range(-1.0..1.0)));
        }
        if n == 1 {
            continue;
        }
        for _ in 0..per_row.div_ceil(2) {
            let j = rng.random_range(0..n);
            let key = (i.min(j), i.max(j));
            if j != i && seen.insert(key) {
                entries.push((key.0, key.1, rng.random_range(-1.0..1.0)));
            }
        }
    }
    if entries.is_empty() {
        entries.push((0, 0, 1.0));
    }
    SparseSymmetricMatrix::from_coordinate_list(n, &entries)
}

fn random_gate(n: usize, rng: &mut ChaCha8Rng, allow_rotation: bool) -> Gate {
    let mut kinds = vec![0, 1, 2];
    if n >= 2 {
        kinds.push(3);
    }
    if n >= 3 {
        kinds.push(4);
    }
    if allow_rotation {
        kinds.push(5);
    }
    let mut qubits: Vec<usize> = (0..n).collect();
    let picked: Vec<usize> = qubits
        .partial_shuffle(rng, n.min(3))
        .0
        .to_vec();
    match *kinds.choose(rng).expect("nonempty") {
        0 => Gate::Hadamard(picked[0]),
        1 => Gate::PauliX(picked[0]),
        2 => Gate::PauliZ(picked[0]),
        3 => Gate::Cnot {
            control: picked[0],
            target: picked[1],
        },
        4 => Gate::Toffoli {
            c1: picked[0],
            c2: picked[1],
            target: picked[2],
        },
        _ => Gate::Rotation {
            qubit: picked[0],
            angle: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        },
    }
}

/// Circuit of `len` gates drawn from the full real gate set.
pub fn random_real_circuit(n_qubits: usize, len: usize, seed: u64) -> Result<Circuit> {
    random_circuit(n_qubits, len, seed, true)
}

/// Circuit of `len` gates with no rotations, so it rewrites exactly into
/// Toffoli + Hadamard form.
pub fn random_th_circuit(n_qubits: usize, len: usize, seed: u64) -> Result<Circuit> {
    random_circuit(n_qubits, len, seed, false)
}

fn random_circuit(n: usize, len: usize, seed: u64, rotations: bool) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one qubit".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gates = (0..len).map(|_| random_gate(n, &mut rng, rotations)).collect();
    Circuit::new(n, gates)
}
