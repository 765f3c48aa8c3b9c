//! Real quantum circuits and their statevector semantics.
//!
//! Basis index bit `q` holds qubit `q`. Qubit 0 is the output qubit, input
//! bits occupy the lowest qubits and ancillas the highest. Bit strings are
//! written qubit 0 first, so `"110"` is index `0b011 = 3`.
//!
//! Every gate here is a real orthogonal matrix. Circuits built from them
//! therefore produce real amplitudes, and a clock operator assembled from
//! their gates has a real symmetric real part.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::DMatrix;
use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::sparse::{data_lines, parse_num};

/// Sparse column of a gate acting on a basis state: at most two nonzeros.
pub type BasisImage = SmallVec<[(usize, f64); 2]>;

/// Elementary real orthogonal gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Hadamard(usize),
    PauliX(usize),
    PauliZ(usize),
    Cnot { control: usize, target: usize },
    Toffoli { c1: usize, c2: usize, target: usize },
    /// `[[cos t, -sin t], [sin t, cos t]]`.
    Rotation { qubit: usize, angle: f64 },
}

impl Gate {
    /// Qubits the gate acts on, in local-matrix order.
    pub fn qubits(&self) -> SmallVec<[usize; 3]> {
        match *self {
            Gate::Hadamard(q) | Gate::PauliX(q) | Gate::PauliZ(q) => smallvec![q],
            Gate::Rotation { qubit, .. } => smallvec![qubit],
            Gate::Cnot { control, target } => smallvec![control, target],
            Gate::Toffoli { c1, c2, target } => smallvec![c1, c2, target],
        }
    }

    /// Target qubit (the one whose value changes).
    pub fn target(&self) -> usize {
        *self.qubits().last().expect("gate has qubits")
    }

    /// Whether the gate permutes basis states.
    pub fn is_permutation(&self) -> bool {
        matches!(self, Gate::PauliX(_) | Gate::Cnot { .. } | Gate::Toffoli { .. })
    }

    pub fn inverse(&self) -> Gate {
        match *self {
            Gate::Rotation { qubit, angle } => Gate::Rotation {
                qubit,
                angle: -angle,
            },
            g => g,
        }
    }

    /// Checks distinct qubits within `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for (k, &q) in qs.iter().enumerate() {
            if q >= n {
                return Err(Error::InvalidGate(format!("{self}: qubit {q} outside 0..{n}")));
            }
            if qs[..k].contains(&q) {
                return Err(Error::InvalidGate(format!("{self}: repeated qubit {q}")));
            }
        }
        if let Gate::Rotation { angle, .. } = self {
            if !angle.is_finite() {
                return Err(Error::InvalidGate(format!("{self}: non-finite angle")));
            }
        }
        Ok(())
    }

    /// Column `index` of the full `2^n` gate matrix.
    pub fn apply_basis(&self, index: usize) -> BasisImage {
        let bit = |q: usize| (index >> q) & 1;
        match *self {
            Gate::PauliX(q) => smallvec![(index ^ (1 << q), 1.0)],
            Gate::PauliZ(q) => smallvec![(index, if bit(q) == 1 { -1.0 } else { 1.0 })],
            Gate::Cnot { control, target } => {
                smallvec![(index ^ (bit(control) << target), 1.0)]
            }
            Gate::Toffoli { c1, c2, target } => {
                smallvec![(index ^ ((bit(c1) & bit(c2)) << target), 1.0)]
            }
            Gate::Hadamard(q) => {
                let lo = index & !(1 << q);
                let hi = lo | (1 << q);
                let s = if bit(q) == 1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
                smallvec![(lo, FRAC_1_SQRT_2), (hi, s)]
            }
            Gate::Rotation { qubit, angle } => {
                let (s, c) = angle.sin_cos();
                let lo = index & !(1 << qubit);
                let hi = lo | (1 << qubit);
                if bit(qubit) == 0 {
                    smallvec![(lo, c), (hi, s)]
                } else {
                    smallvec![(lo, -s), (hi, c)]
                }
            }
        }
    }

    /// Row `index` of the full gate matrix, as `(column, value)` pairs.
    ///
    /// For an orthogonal gate the row is the column of the inverse.
    pub fn basis_row(&self, index: usize) -> BasisImage {
        self.inverse().apply_basis(index)
    }

    /// Applies the gate to a real amplitude vector in place.
    pub fn apply_in_place(&self, state: &mut [f64]) {
        match *self {
            Gate::PauliX(q) => {
                let m = 1 << q;
                for i in 0..state.len() {
                    if i & m == 0 {
                        state.swap(i, i | m);
                    }
                }
            }
            Gate::PauliZ(q) => {
                let m = 1 << q;
                for (i, a) in state.iter_mut().enumerate() {
                    if i & m != 0 {
                        *a = -*a;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let (mc, mt) = (1 << control, 1 << target);
                for i in 0..state.len() {
                    if i & mc != 0 && i & mt == 0 {
                        state.swap(i, i | mt);
                    }
                }
            }
            Gate::Toffoli { c1, c2, target } => {
                let mc = (1 << c1) | (1 << c2);
                let mt = 1 << target;
                for i in 0..state.len() {
                    if i & mc == mc && i & mt == 0 {
                        state.swap(i, i | mt);
                    }
                }
            }
            Gate::Hadamard(q) => {
                apply_2x2(state, q, [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]])
            }
            Gate::Rotation { qubit, angle } => {
                let (s, c) = angle.sin_cos();
                apply_2x2(state, qubit, [[c, -s], [s, c]])
            }
        }
    }

    /// Local `2^k x 2^k` matrix; local bit `i` is the gate's `i`-th qubit.
    pub fn matrix(&self) -> DMatrix<f64> {
        let k = self.qubits().len();
        let local = self.relabelled_local();
        let dim = 1 << k;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            for (row, v) in local.apply_basis(col) {
                m[(row, col)] = v;
            }
        }
        m
    }

    /// The same gate with its qubits renamed to `0..k`.
    fn relabelled_local(&self) -> Gate {
        match *self {
            Gate::Hadamard(_) => Gate::Hadamard(0),
            Gate::PauliX(_) => Gate::PauliX(0),
            Gate::PauliZ(_) => Gate::PauliZ(0),
            Gate::Rotation { angle, .. } => Gate::Rotation { qubit: 0, angle },
            Gate::Cnot { .. } => Gate::Cnot {
                control: 0,
                target: 1,
            },
            Gate::Toffoli { .. } => Gate::Toffoli {
                c1: 0,
                c2: 1,
                target: 2,
            },
        }
    }
}

fn apply_2x2(state: &mut [f64], q: usize, u: [[f64; 2]; 2]) {
    let m = 1 << q;
    for i in 0..state.len() {
        if i & m == 0 {
            let (a0, a1) = (state[i], state[i | m]);
            state[i] = u[0][0] * a0 + u[0][1] * a1;
            state[i | m] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

/// Local matrix of a gate.
pub fn gate_matrix(g: &Gate) -> DMatrix<f64> {
    g.matrix()
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Hadamard(q) => write!(f, "H {q}"),
            Gate::PauliX(q) => write!(f, "X {q}"),
            Gate::PauliZ(q) => write!(f, "Z {q}"),
            Gate::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Gate::Toffoli { c1, c2, target } => write!(f, "TOFF {c1} {c2} {target}"),
            Gate::Rotation { qubit, angle } => write!(f, "ROT {qubit} {angle}"),
        }
    }
}

/// Ordered gate list on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("circuit needs at least one qubit".into()));
        }
        if n_qubits >= usize::BITS as usize - 1 {
            return Err(Error::InvalidParameter(format!("{n_qubits} qubits is too many")));
        }
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn empty(n_qubits: usize) -> Result<Self> {
        Self::new(n_qubits, Vec::new())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after validating it.
    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate(self.n_qubits)?;
        self.gates.push(g);
        Ok(())
    }

    /// Gate-wise reversed inverse.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// `U_c state`.
    pub fn apply(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: state.len(),
            });
        }
        let norm_sq = compensated_sum(state.iter().map(|a| a * a));
        if (norm_sq - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(norm_sq));
        }
        let mut out = state.to_vec();
        for g in &self.gates {
            g.apply_in_place(&mut out);
        }
        Ok(out)
    }

    /// Full `2^n x 2^n` matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for col in 0..d {
            let mut e = vec![0.0; d];
            e[col] = 1.0;
            for g in &self.gates {
                g.apply_in_place(&mut e);
            }
            m.set_column(col, &nalgebra::DVector::from_vec(e));
        }
        m
    }

    /// Parses the text circuit format (`QUBITS n` header, one gate per line).
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = data_lines(text);
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "missing QUBITS header".into(),
        })?;
        let n = match header.split_whitespace().collect::<Vec<_>>()[..] {
            ["QUBITS", n] => parse_num::<usize>(hline, n)?,
            _ => {
                return Err(Error::Parse {
                    line: hline,
                    msg: "expected `QUBITS n`".into(),
                })
            }
        };
        let mut gates = Vec::new();
        for (ln, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let q = |s: &str| parse_num::<usize>(ln, s);
            let gate = match f[..] {
                ["H", a] => Gate::Hadamard(q(a)?),
                ["X", a] => Gate::PauliX(q(a)?),
                ["Z", a] => Gate::PauliZ(q(a)?),
                ["CNOT", c, t] => Gate::Cnot {
                    control: q(c)?,
                    target: q(t)?,
                },
                ["TOFF", a, b, t] => Gate::Toffoli {
                    c1: q(a)?,
                    c2: q(b)?,
                    target: q(t)?,
                },
                ["ROT", a, angle] => Gate::Rotation {
                    qubit: q(a)?,
                    angle: parse_num(ln, angle)?,
                },
                _ => {
                    return Err(Error::Parse {
                        line: ln,
                        msg: format!("unrecognised gate line `{line}`"),
                    })
                }
            };
            gate.validate(n).map_err(|e| Error::Parse {
                line: ln,
                msg: e.to_string(),
            })?;
            gates.push(gate);
        }
        Circuit::new(n, gates).map_err(|e| Error::Parse {
            line: hline,
            msg: e.to_string(),
        })
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "QUBITS {}", self.n_qubits)?;
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}

/// Parses a bit string written qubit 0 first.
pub fn parse_bits(x: &str) -> Result<Vec<bool>> {
    x.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::InvalidParameter(format!("bit string `{x}` has non-binary character"))),
        })
        .collect()
}

/// Basis index of `|x, 0...0>`.
pub fn input_index(x: &[bool]) -> usize {
    x.iter()
        .enumerate()
        .fold(0, |acc, (q, &b)| acc | (usize::from(b) << q))
}

/// Basis state `|x, 0...0>` on the circuit's register.
pub fn input_state(circuit: &Circuit, x: &[bool], n_ancilla: usize) -> Result<Vec<f64>> {
    if x.len() + n_ancilla != circuit.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits(),
            got: x.len() + n_ancilla,
        });
    }
    let mut state = vec![0.0; circuit.dim()];
    state[input_index(x)] = 1.0;
    Ok(state)
}

/// `|alpha_{x,1}|^2`: probability that qubit 0 reads 1 after `Y|x, 0>`.
pub fn accept_probability(y: &Circuit, x: &[bool], n_ancilla: usize) -> Result<f64> {
    let out = y.apply(&input_state(y, x, n_ancilla)?)?;
    Ok(compensated_sum(
        out.iter()
            .enumerate()
            .filter(|(i, _)| i & 1 == 1)
            .map(|(_, a)| a * a),
    ))
}

/// `U = Y^dagger Z_0 Y` as a gate list: `Y`, then `Z` on qubit 0, then the
/// gate-wise inverse of `Y` in reverse order. Always `2 len(Y) + 1` gates.
pub fn build_mirror_circuit(y: &Circuit) -> Circuit {
    let mut gates = Vec::with_capacity(2 * y.len() + 1);
    gates.extend_from_slice(y.gates());
    gates.push(Gate::PauliZ(0));
    gates.extend(y.gates().iter().rev().map(Gate::inverse));
    Circuit {
        n_qubits: y.n_qubits(),
        gates,
    }
}
