//! Toffoli + Hadamard circuits and observables with entries in `{-1, 0, 1}`.
//!
//! Every element used here is a permutation fused with one Hadamard, so all
//! its matrix entries are `0` or `+-1/sqrt 2`. The clock observable built
//! from such elements is `1/(2 sqrt 2)` times a sign matrix; the sign matrix
//! is assembled directly from the signs and never from rounded floats.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use smallvec::{smallvec, SmallVec};

use crate::circuit::{accept_probability, build_mirror_circuit, input_index, Circuit, Gate};
use crate::error::{Error, Result};
use crate::hardness::{merge_row, moment_separation, MomentSeparation};
use crate::sparse::{DeeInstance, SparseSymmetricMatrix};

/// Factor taking `(W + W^T)/2` to a sign matrix.
pub const INTEGER_SCALE: f64 = 2.0 * SQRT_2;

/// Column of a uniform-scale element: indices with signs of `+-1/sqrt 2`.
pub type SignedImage = SmallVec<[(usize, i8); 2]>;

/// Replaces `Z(q)` by `H(q) X(q) H(q)`; keeps permutations and Hadamards.
pub fn rewrite_to_th(circuit: &Circuit) -> Result<Circuit> {
    let mut gates = Vec::with_capacity(circuit.len());
    for &g in circuit.gates() {
        match g {
            Gate::PauliZ(q) => {
                gates.extend([Gate::Hadamard(q), Gate::PauliX(q), Gate::Hadamard(q)]);
            }
            Gate::Rotation { .. } => {
                return Err(Error::InvalidGate(format!(
                    "{g} has no exact Toffoli + Hadamard form"
                )));
            }
            g => gates.push(g),
        }
    }
    Circuit::new(circuit.n_qubits(), gates)
}

/// A basis permutation from the Toffoli family. Each is its own inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Permutation {
    X(usize),
    Cnot { control: usize, target: usize },
    Toffoli { c1: usize, c2: usize, target: usize },
}

impl Permutation {
    pub fn from_gate(g: &Gate) -> Option<Self> {
        match *g {
            Gate::PauliX(q) => Some(Permutation::X(q)),
            Gate::Cnot { control, target } => Some(Permutation::Cnot { control, target }),
            Gate::Toffoli { c1, c2, target } => Some(Permutation::Toffoli { c1, c2, target }),
            _ => None,
        }
    }

    pub fn to_gate(self) -> Gate {
        match self {
            Permutation::X(q) => Gate::PauliX(q),
            Permutation::Cnot { control, target } => Gate::Cnot { control, target },
            Permutation::Toffoli { c1, c2, target } => Gate::Toffoli { c1, c2, target },
        }
    }

    pub fn target(self) -> usize {
        self.to_gate().target()
    }

    pub fn apply(self, index: usize) -> usize {
        self.to_gate().apply_basis(index)[0].0
    }
}

fn hadamard_signed(q: usize, index: usize) -> SignedImage {
    let lo = index & !(1 << q);
    let sign = if (index >> q) & 1 == 1 { -1 } else { 1 };
    smallvec![(lo, 1), (lo | (1 << q), sign)]
}

/// One factor of the fused circuit, with every entry in `{0, +-1/sqrt 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniformScaleGate {
    H(usize),
    /// The permutation, then a Hadamard.
    PermThenH(Permutation, usize),
    /// A Hadamard, then the permutation.
    HThenPerm(usize, Permutation),
}

impl UniformScaleGate {
    /// Gates in application order.
    pub fn to_gates(&self) -> Vec<Gate> {
        match *self {
            UniformScaleGate::H(q) => vec![Gate::Hadamard(q)],
            UniformScaleGate::PermThenH(p, q) => vec![p.to_gate(), Gate::Hadamard(q)],
            UniformScaleGate::HThenPerm(q, p) => vec![Gate::Hadamard(q), p.to_gate()],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.to_gates().iter().try_for_each(|g| g.validate(n))
    }

    /// Column `index`: the two rows holding `+-1/sqrt 2`.
    pub fn apply_signed(&self, index: usize) -> SignedImage {
        match *self {
            UniformScaleGate::H(q) => hadamard_signed(q, index),
            UniformScaleGate::PermThenH(p, q) => hadamard_signed(q, p.apply(index)),
            UniformScaleGate::HThenPerm(q, p) => hadamard_signed(q, index)
                .into_iter()
                .map(|(r, s)| (p.apply(r), s))
                .collect(),
        }
    }

    /// The transpose. Hadamards and these permutations are symmetric, so
    /// `(H P)^T = P H`.
    pub fn transpose(&self) -> Self {
        match *self {
            UniformScaleGate::H(q) => UniformScaleGate::H(q),
            UniformScaleGate::PermThenH(p, q) => UniformScaleGate::HThenPerm(q, p),
            UniformScaleGate::HThenPerm(q, p) => UniformScaleGate::PermThenH(p, q),
        }
    }

    /// Row `index` as `(column, sign)` pairs.
    pub fn row_signed(&self, index: usize) -> SignedImage {
        self.transpose().apply_signed(index)
    }

    /// Dense matrix on `n` qubits.
    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        let d = 1usize << n;
        let mut m = DMatrix::zeros(d, d);
        for c in 0..d {
            for (r, s) in self.apply_signed(c) {
                m[(r, c)] += f64::from(s) * FRAC_1_SQRT_2;
            }
        }
        m
    }
}

impl fmt::Display for UniformScaleGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            UniformScaleGate::H(q) => write!(f, "H {q}"),
            UniformScaleGate::PermThenH(p, q) => write!(f, "[{}; H {q}]", p.to_gate()),
            UniformScaleGate::HThenPerm(q, p) => write!(f, "[H {q}; {}]", p.to_gate()),
        }
    }
}

/// Groups a permutation + Hadamard circuit into uniform-scale elements.
///
/// A permutation takes the Hadamard right after it if there is one, else a
/// lone Hadamard right before it, else an inserted `H H` pair on its target
/// (the first of which it absorbs).
pub fn fuse_uniform_scale(circuit: &Circuit) -> Result<Vec<UniformScaleGate>> {
    let gates = circuit.gates();
    let mut out: Vec<UniformScaleGate> = Vec::with_capacity(gates.len());
    let mut i = 0;
    while i < gates.len() {
        let g = gates[i];
        if let Gate::Hadamard(q) = g {
            out.push(UniformScaleGate::H(q));
            i += 1;
            continue;
        }
        let p = Permutation::from_gate(&g)
            .ok_or_else(|| Error::InvalidGate(format!("{g} is neither a permutation nor H")))?;
        if let Some(&Gate::Hadamard(q)) = gates.get(i + 1) {
            out.push(UniformScaleGate::PermThenH(p, q));
            i += 2;
            continue;
        }
        if let Some(&UniformScaleGate::H(q)) = out.last() {
            out.pop();
            out.push(UniformScaleGate::HThenPerm(q, p));
        } else {
            let t = p.target();
            out.push(UniformScaleGate::PermThenH(p, t));
            out.push(UniformScaleGate::H(t));
        }
        i += 1;
    }
    Ok(out)
}

/// Dense product of a fused sequence (first element applied first).
pub fn sequence_matrix(elements: &[UniformScaleGate], n: usize) -> DMatrix<f64> {
    elements
        .iter()
        .fold(DMatrix::identity(1 << n, 1 << n), |acc, e| e.matrix(n) * acc)
}

/// `2 sqrt 2 (W + W^T)/2` for the clock operator over uniform-scale
/// elements: a matrix with entries in `{-1, 0, 1}`.
#[derive(Debug, Clone)]
pub struct IntegerObservable {
    pub matrix: SparseSymmetricMatrix,
    pub elements: Vec<UniformScaleGate>,
    pub n_qubits: usize,
}

impl IntegerObservable {
    pub fn period(&self) -> usize {
        self.elements.len()
    }

    pub fn scale(&self) -> f64 {
        INTEGER_SCALE
    }

    /// Norm bound `2 sqrt 2`.
    pub fn b(&self) -> f64 {
        INTEGER_SCALE
    }

    pub fn flat_index(&self, l: usize, s: usize) -> usize {
        l * (1 << self.n_qubits) + s
    }
}

pub fn build_integer_observable(
    elements: &[UniformScaleGate],
    n_qubits: usize,
) -> Result<IntegerObservable> {
    let period = elements.len();
    if period < 3 {
        return Err(Error::InvalidParameter(format!(
            "integer observable needs at least 3 elements, got {period}"
        )));
    }
    for e in elements {
        e.validate(n_qubits)?;
    }
    let d = 1usize << n_qubits;
    let rows: Vec<Vec<(usize, f64)>> = (0..period * d)
        .into_par_iter()
        .map(|row| {
            let (l, r) = (row / d, row % d);
            let prev = (l + period - 1) % period;
            let next = (l + 1) % period;
            // blocks prev and next differ since period >= 3
            let entries = elements[prev]
                .row_signed(r)
                .into_iter()
                .map(|(s, sign)| (prev * d + s, f64::from(sign)))
                .chain(
                    elements[l]
                        .apply_signed(r)
                        .into_iter()
                        .map(|(s, sign)| (next * d + s, f64::from(sign))),
                )
                .collect();
            merge_row(entries)
        })
        .collect();
    let matrix = SparseSymmetricMatrix::from_rows(rows)?.with_structural_norm_bound(INTEGER_SCALE);
    Ok(IntegerObservable {
        matrix,
        elements: elements.to_vec(),
        n_qubits,
    })
}

/// Thresholds for even period `M` and even power `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvenThresholds {
    pub separation: MomentSeparation,
    /// Threshold on the scaled value.
    pub g: f64,
    pub epsilon: f64,
    /// `(2 sqrt 2)^m`.
    pub scale_pow: f64,
}

impl EvenThresholds {
    /// Unscaled moment for acceptance probability `alpha1_sq`.
    pub fn unscaled_value(&self, alpha1_sq: f64) -> f64 {
        self.separation.value_at(alpha1_sq)
    }
}

/// `g` is the midpoint of the exact values at `|alpha_1|^2 = 1/3` and `2/3`
/// (scaled by `(2 sqrt 2)^m`), and `eps b^m` is a quarter of their gap.
pub fn even_m_thresholds(period: usize, m: u32) -> Result<EvenThresholds> {
    if !period.is_multiple_of(2) || !m.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "even thresholds need even M and m, got M = {period}, m = {m}"
        )));
    }
    let separation = moment_separation(period, m)?;
    let hi = separation.value_at(1.0 / 3.0);
    let lo = separation.value_at(2.0 / 3.0);
    let gap = hi - lo;
    if gap.is_nan() || gap <= 1e-12 {
        return Err(Error::Verification(format!(
            "moment gap {gap:e} too small to separate answers (M = {period}, m = {m})"
        )));
    }
    let scale_pow = INTEGER_SCALE.powf(f64::from(m));
    if !scale_pow.is_finite() {
        return Err(Error::NumericRange(format!("(2 sqrt 2)^{m}")));
    }
    let epsilon = gap / 4.0;
    let g = scale_pow * 0.5 * (hi + lo);
    if !(hi * scale_pow >= g + epsilon * scale_pow && lo * scale_pow <= g - epsilon * scale_pow) {
        return Err(Error::Verification("thresholds do not separate the answers".into()));
    }
    Ok(EvenThresholds {
        separation,
        g,
        epsilon,
        scale_pow,
    })
}

/// Reduced instance over the integer observable.
#[derive(Debug, Clone)]
pub struct IntegerInstance {
    pub dee: DeeInstance,
    pub observable: IntegerObservable,
    pub thresholds: EvenThresholds,
    pub j_state: usize,
    pub alpha1_sq: f64,
}

impl IntegerInstance {
    pub fn period(&self) -> usize {
        self.observable.period()
    }

    /// `(2 sqrt 2)^m ((1 - a) E_0 + a E_1)`.
    pub fn predicted_value(&self) -> f64 {
        self.thresholds.scale_pow * self.thresholds.unscaled_value(self.alpha1_sq)
    }
}

/// Mirror, rewrite, fuse, and build the integer instance with `m = M^3`.
pub fn reduce_integer(y: &Circuit, x: &[bool]) -> Result<IntegerInstance> {
    if x.len() > y.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: y.n_qubits(),
            got: x.len(),
        });
    }
    let rewritten = rewrite_to_th(&build_mirror_circuit(y))?;
    let elements = fuse_uniform_scale(&rewritten)?;
    let period = elements.len();
    if period % 2 != 0 {
        return Err(Error::Verification(format!("fused sequence has odd length {period}")));
    }
    let observable = build_integer_observable(&elements, y.n_qubits())?;
    let m = u32::try_from(period.pow(3))
        .map_err(|_| Error::NumericRange(format!("M^3 for M = {period}")))?;
    let thresholds = even_m_thresholds(period, m)?;
    let j_state = observable.flat_index(0, input_index(x));
    let alpha1_sq = accept_probability(y, x, y.n_qubits() - x.len())?;
    let dee = DeeInstance::new(
        observable.matrix.clone(),
        j_state,
        m,
        thresholds.g,
        thresholds.epsilon,
        INTEGER_SCALE,
    )?;
    Ok(IntegerInstance {
        dee,
        observable,
        thresholds,
        j_state,
        alpha1_sq,
    })
}
