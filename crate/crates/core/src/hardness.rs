//! From a circuit to an estimation instance whose sign encodes acceptance.
//!
//! For the mirror circuit `U = U_{M-1} ... U_0` of `Y` (so `U^2 = 1`), the
//! clock operator `W = sum_l |l+1><l| (x) U_l` on `C^M (x) C^(2^n)` satisfies
//! `(W^M)^2 = 1`. The state `|s_x> = |0> (x) |x, 0...0>` splits into the
//! `+1` and `-1` eigenspaces of `W^M` with weights `|alpha_0|^2` and
//! `|alpha_1|^2`, and on each the observable `A = (W + W^T)/2` has a fixed,
//! circuit-independent spectral measure. The `M^3`-th moment is therefore
//! `(1 - 2|alpha_1|^2) E_0`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::circuit::{accept_probability, build_mirror_circuit, input_index, Circuit, Gate};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::sparse::{DeeInstance, SparseSymmetricMatrix};
use crate::spectral::{eig_sym, induced_measure, SpectralMeasure};

/// Eigenvalues of the reduced observable are `cos` of distinct multiples of
/// `pi/M`; anything closer than this is one eigenvalue.
const MEASURE_TOL: f64 = 1e-8;

/// `W` for a gate list of odd length `M`.
///
/// Flat index of clock value `l` and system basis index `s` is
/// `l * 2^n + s`.
#[derive(Debug, Clone)]
pub struct ClockOperator {
    gates: Vec<Gate>,
    n_qubits: usize,
}

impl ClockOperator {
    pub fn new(u: &Circuit) -> Result<Self> {
        let m = u.len();
        if m.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "clock operator needs an odd number of gates, got {m}"
            )));
        }
        Ok(Self {
            gates: u.gates().to_vec(),
            n_qubits: u.n_qubits(),
        })
    }

    /// Clock operator of the mirror circuit of `y`.
    pub fn from_circuit(y: &Circuit) -> Result<Self> {
        Self::new(&build_mirror_circuit(y))
    }

    /// Number of gates `M`.
    pub fn period(&self) -> usize {
        self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn system_dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.period() * self.system_dim()
    }

    pub fn flat_index(&self, l: usize, s: usize) -> usize {
        l * self.system_dim() + s
    }

    /// `W v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.len(),
            });
        }
        let (m, d) = (self.period(), self.system_dim());
        let mut out = vec![0.0; v.len()];
        for (l, gate) in self.gates.iter().enumerate() {
            let mut block = v[l * d..(l + 1) * d].to_vec();
            gate.apply_in_place(&mut block);
            let dst = ((l + 1) % m) * d;
            for (o, b) in out[dst..dst + d].iter_mut().zip(&block) {
                *o += b;
            }
        }
        Ok(out)
    }

    /// `W^k v`.
    pub fn apply_power(&self, v: &[f64], k: usize) -> Result<Vec<f64>> {
        let mut cur = v.to_vec();
        for _ in 0..k {
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Dense `W`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let d = self.system_dim();
        let mut w = DMatrix::zeros(n, n);
        for (l, gate) in self.gates.iter().enumerate() {
            let next = (l + 1) % self.period();
            for s in 0..d {
                for (r, val) in gate.apply_basis(s) {
                    w[(next * d + r, l * d + s)] += val;
                }
            }
        }
        w
    }

    /// Row `row` of `(W + W^T)/2`, computed from the two gates adjacent to
    /// the row's clock value only.
    pub fn observable_row(&self, row: usize) -> Vec<(usize, f64)> {
        let (m, d) = (self.period(), self.system_dim());
        let (l, r) = (row / d, row % d);
        let prev = (l + m - 1) % m;
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(4);
        for (s, val) in self.gates[prev].basis_row(r) {
            entries.push((prev * d + s, 0.5 * val));
        }
        for (s, val) in self.gates[l].apply_basis(r) {
            entries.push(((l + 1) % m * d + s, 0.5 * val));
        }
        merge_row(entries)
    }
}

/// Sorts by column and sums repeated columns (they occur when `M = 1`).
pub(crate) fn merge_row(mut entries: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    entries.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for (c, v) in entries {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|e| e.1 != 0.0);
    out
}

/// `A = (W + W^T)/2` with norm bound 1.
pub fn build_observable(clock: &ClockOperator) -> Result<SparseSymmetricMatrix> {
    let rows: Vec<_> = (0..clock.dim())
        .into_par_iter()
        .map(|row| clock.observable_row(row))
        .collect();
    Ok(SparseSymmetricMatrix::from_rows(rows)?.with_structural_norm_bound(1.0))
}

fn start_index(clock: &ClockOperator, x: &[bool]) -> Result<usize> {
    if x.len() > clock.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: clock.n_qubits(),
            got: x.len(),
        });
    }
    Ok(clock.flat_index(0, input_index(x)))
}

/// `<s_x| (1 + W^M)/2 |s_x>`, which equals `1 - |alpha_1|^2`.
pub fn symmetric_overlap(clock: &ClockOperator, x: &[bool]) -> Result<f64> {
    let j = start_index(clock, x)?;
    let mut e = vec![0.0; clock.dim()];
    e[j] = 1.0;
    let back = clock.apply_power(&e, clock.period())?;
    Ok(0.5 * (1.0 + back[j]))
}

/// Spectral measure of the clock observable on the `+1` eigenspace of
/// `W^M` (`reflect = false`) or on the `-1` eigenspace (`reflect = true`).
///
/// Eigenphases of `W` are the `M`-th roots of `+1` or `-1`, each with mass
/// `1/M`; taking real parts pairs `e^{i phi}` with `e^{-i phi}`, so only the
/// phases `0` and `pi` keep mass `1/M`.
pub fn orbit_measure(period: usize, reflect: bool) -> Result<SpectralMeasure> {
    if period == 0 {
        return Err(Error::InvalidParameter("period must be positive".into()));
    }
    let mf = period as f64;
    let atoms = (0..=period / 2)
        .filter_map(|l| {
            // phase k pi / M with k even (+1 space) or odd (-1 space)
            let k = 2 * l + usize::from(reflect);
            if k > period {
                return None;
            }
            let unpaired = k == 0 || k == period;
            let w = if unpaired { 1.0 / mf } else { 2.0 / mf };
            Some(((std::f64::consts::PI * k as f64 / mf).cos(), w))
        })
        .collect();
    SpectralMeasure::new(atoms)
}

/// `(1 - alpha1_sq) P0 + alpha1_sq P1`.
pub fn reference_measure(period: usize, alpha1_sq: f64) -> Result<SpectralMeasure> {
    let p0 = orbit_measure(period, false)?;
    let p1 = orbit_measure(period, true)?;
    p0.mix(&p1, alpha1_sq, MEASURE_TOL)
}

/// `sign(l)^m |l|^m` through logarithms, which keeps tiny powers accurate.
fn signed_power(l: f64, m: u32) -> f64 {
    if l == 0.0 {
        return 0.0;
    }
    let mag = (f64::from(m) * l.abs().ln()).exp();
    if l < 0.0 && m % 2 == 1 {
        -mag
    } else {
        mag
    }
}

fn measure_moment(measure: &SpectralMeasure, m: u32) -> f64 {
    measure
        .atoms()
        .iter()
        .map(|&(l, w)| w * signed_power(l, m))
        .collect::<CompensatedSum>()
        .value()
}

/// `E_0`, `E_1`: `m`-th moments of the two orbit measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSeparation {
    pub period: usize,
    pub m: u32,
    pub e0: f64,
    pub e1: f64,
}

impl MomentSeparation {
    /// `3 / (4M)`, the lower bound `E_0` must beat for the thresholds
    /// `+-1/(4M)` to separate the two answers.
    pub fn required(&self) -> f64 {
        0.75 / self.period as f64
    }

    pub fn threshold_holds(&self) -> bool {
        self.e0 > self.required()
    }

    /// Exact moment for acceptance probability `alpha1_sq`.
    pub fn value_at(&self, alpha1_sq: f64) -> f64 {
        (1.0 - alpha1_sq) * self.e0 + alpha1_sq * self.e1
    }
}

/// Computes `E_0` and `E_1`; for odd `M` and odd `m` checks `E_1 = -E_0`.
pub fn moment_separation(period: usize, m: u32) -> Result<MomentSeparation> {
    let e0 = measure_moment(&orbit_measure(period, false)?, m);
    let e1 = measure_moment(&orbit_measure(period, true)?, m);
    if period % 2 == 1 && m % 2 == 1 && (e0 + e1).abs() > 1e-12 {
        return Err(Error::Verification(format!(
            "reflection identity failed: E0 = {e0}, E1 = {e1}"
        )));
    }
    Ok(MomentSeparation { period, m, e0, e1 })
}

/// One reduced instance with what is needed to check it.
#[derive(Debug, Clone)]
pub struct HardnessInstance {
    pub dee: DeeInstance,
    pub j_state: usize,
    pub alpha1_sq: f64,
    pub period: usize,
    pub clock: ClockOperator,
}

impl HardnessInstance {
    pub fn separation(&self) -> Result<MomentSeparation> {
        moment_separation(self.period, self.dee.m())
    }

    /// `(1 - 2|alpha_1|^2) E_0`.
    pub fn predicted_value(&self) -> Result<f64> {
        Ok(self.separation()?.value_at(self.alpha1_sq))
    }
}

/// `m = M^3`, `g = 0`, `eps = 1/(4M)`, `b = 1`. The value is above
/// `1/(4M)` when `Y` rejects with probability `>= 2/3` and below `-1/(4M)`
/// when it accepts with probability `>= 2/3`.
pub fn reduce(y: &Circuit, x: &[bool]) -> Result<HardnessInstance> {
    if x.len() > y.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: y.n_qubits(),
            got: x.len(),
        });
    }
    let clock = ClockOperator::from_circuit(y)?;
    let period = clock.period();
    let m = u32::try_from(period.pow(3))
        .map_err(|_| Error::NumericRange(format!("M^3 for M = {period}")))?;
    let a = build_observable(&clock)?;
    let j_state = start_index(&clock, x)?;
    let alpha1_sq = accept_probability(y, x, y.n_qubits() - x.len())?;
    let dee = DeeInstance::new(a, j_state, m, 0.0, 0.25 / period as f64, 1.0)?;
    Ok(HardnessInstance {
        dee,
        j_state,
        alpha1_sq,
        period,
        clock,
    })
}

/// Spectral measure of `A` at `|s_x>`, checked against the reference
/// mixture for `|alpha_1|^2 = 1 - <s_x|Q+|s_x>`.
pub fn verify_induced_measure(clock: &ClockOperator, x: &[bool]) -> Result<SpectralMeasure> {
    let j = start_index(clock, x)?;
    let a = build_observable(clock)?.to_dense();
    let decomp = eig_sym(&a)?;
    let mut e = vec![0.0; clock.dim()];
    e[j] = 1.0;
    let measure = induced_measure(&decomp, &e, MEASURE_TOL)?;
    let alpha1_sq = (1.0 - symmetric_overlap(clock, x)?).clamp(0.0, 1.0);
    let reference = reference_measure(clock.period(), alpha1_sq)?;
    if !measure.approx_eq(&reference, MEASURE_TOL) {
        return Err(Error::Verification(format!(
            "induced measure {:?} differs from reference {:?}",
            measure.support(MEASURE_TOL),
            reference.support(MEASURE_TOL)
        )));
    }
    Ok(measure)
}
