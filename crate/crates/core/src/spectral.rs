//! Dense symmetric eigendecomposition, induced spectral measures, and moments.
//!
//! The identity the whole crate leans on is
//! `<psi| A^m |psi> = sum_lambda lambda^m ||Q_lambda psi||^2`: a diagonal
//! entry of `A^m` is the `m`-th moment of the spectral measure that `A` and
//! the basis vector `e_j` induce. This module computes the right-hand side;
//! [`crate::sparse`] computes the left-hand side by repeated matvecs.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};

const SYMMETRY_TOL: f64 = 1e-12;
const NORMALIZATION_TOL: f64 = 1e-9;
const MAX_SWEEPS: usize = 10_000;

/// Eigenvalues (descending) with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |lambda|`.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, l| acc.max(l.abs()))
    }

    /// Default degeneracy tolerance: `1e-8 * max |lambda|`.
    pub fn default_merge_tol(&self) -> f64 {
        1e-8 * self.spectral_radius()
    }

    /// `V f(Lambda) V^T` for a real function of the eigenvalues.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let d = DVector::from_iterator(self.dim(), self.eigenvalues.iter().map(|&l| f(l)));
        let v = &self.eigenvectors;
        v * DMatrix::from_diagonal(&d) * v.transpose()
    }

    /// `V diag(e^{i t lambda}) V^T`, i.e. `exp(i t A)`.
    pub fn unitary_exp(&self, t: f64) -> DMatrix<Complex64> {
        let v = self.eigenvectors.map(|x| Complex64::new(x, 0.0));
        let mut scaled = v.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let phase = Complex64::from_polar(1.0, t * l);
            for x in scaled.column_mut(k).iter_mut() {
                *x *= phase;
            }
        }
        scaled * v.transpose()
    }
}

/// Symmetric eigendecomposition, eigenvalues sorted descending.
pub fn eig_sym(a: &DMatrix<f64>) -> Result<EigenDecomposition> {
    check_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![],
            eigenvectors: DMatrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, MAX_SWEEPS)
        .ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            got: a.ncols(),
        });
    }
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            let diff = (a[(i, j)] - a[(j, i)]).abs();
            if diff > SYMMETRY_TOL || diff.is_nan() {
                return Err(Error::NotSymmetric { row: i, col: j, diff });
            }
        }
    }
    Ok(())
}

/// Operator 2-norm of a real symmetric matrix.
pub fn spectral_norm(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eig_sym(a)?.spectral_radius())
}

/// Operator 2-norm of an arbitrary complex square matrix, via the largest
/// eigenvalue of `B^dagger B`.
pub fn complex_operator_norm(b: &DMatrix<Complex64>) -> Result<f64> {
    if b.nrows() == 0 {
        return Ok(0.0);
    }
    let gram = b.adjoint() * b;
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, MAX_SWEEPS).ok_or(Error::NoConvergence)?;
    let top = eig.eigenvalues.iter().fold(0.0f64, |acc, &l| acc.max(l));
    Ok(top.max(0.0).sqrt())
}

/// Probability distribution over the distinct eigenvalues of `A`, induced by
/// a unit vector. Atoms are sorted by eigenvalue, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    /// Builds a measure from `(eigenvalue, weight)` pairs.
    ///
    /// Weights must be nonnegative and sum to 1 within `1e-9`. Atoms are
    /// sorted; equal eigenvalues are not merged here.
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|&(l, w)| !l.is_finite() || w.is_nan() || w < 0.0) {
            return Err(Error::InvalidParameter(
                "atoms need finite eigenvalues and nonnegative weights".into(),
            ));
        }
        let total = compensated_sum(atoms.iter().map(|a| a.1));
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(total));
        }
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.1))
    }

    /// `sum lambda^m w`.
    pub fn moment(&self, m: u32) -> f64 {
        let exp = i32::try_from(m).unwrap_or(i32::MAX);
        compensated_sum(self.atoms.iter().map(|&(l, w)| l.powi(exp) * w))
    }

    /// Measure with every eigenvalue negated.
    pub fn reflected(&self) -> Self {
        let mut atoms: Vec<_> = self.atoms.iter().map(|&(l, w)| (-l, w)).collect();
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        Self { atoms }
    }

    /// Convex combination `(1 - t) self + t other`, with atoms closer than
    /// `merge_tol` combined.
    pub fn mix(&self, other: &Self, t: f64, merge_tol: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("mixing weight {t} outside [0, 1]")));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|&(l, w)| (l, (1.0 - t) * w))
            .chain(other.atoms.iter().map(|&(l, w)| (l, t * w)))
            .collect();
        Ok(merge_atoms(atoms, merge_tol))
    }

    /// Drops atoms of weight at most `min_weight`.
    pub fn support(&self, min_weight: f64) -> Vec<(f64, f64)> {
        self.atoms.iter().copied().filter(|a| a.1 > min_weight).collect()
    }

    /// Atom-wise comparison: every atom heavier than `tol` in either measure
    /// must have a partner within `tol` in eigenvalue, and weights of matched
    /// atoms must agree within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let lhs = self.support(tol);
        let rhs = other.support(tol);
        let covered = |xs: &[(f64, f64)], ys: &Self| {
            xs.iter().all(|&(l, w)| {
                let matched: f64 = ys
                    .atoms
                    .iter()
                    .filter(|(m, _)| (m - l).abs() <= tol)
                    .map(|a| a.1)
                    .sum();
                (matched - w).abs() <= tol
            })
        };
        covered(&lhs, other) && covered(&rhs, self)
    }

    /// CSV with header `eigenvalue,weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eigenvalue,weight\n");
        for &(l, w) in &self.atoms {
            let _ = writeln!(s, "{l},{w}");
        }
        s
    }
}

/// Sorts descending and merges runs of eigenvalues within `tol` of the run's
/// first element. A merged atom sits at the mean of its run.
fn merge_atoms(mut atoms: Vec<(f64, f64)>, tol: f64) -> SpectralMeasure {
    atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    let mut i = 0;
    while i < atoms.len() {
        let head = atoms[i].0;
        let mut j = i;
        while j < atoms.len() && head - atoms[j].0 <= tol {
            j += 1;
        }
        let run = &atoms[i..j];
        let lambda = compensated_sum(run.iter().map(|a| a.0)) / run.len() as f64;
        let weight = compensated_sum(run.iter().map(|a| a.1));
        out.push((lambda, weight));
        i = j;
    }
    SpectralMeasure { atoms: out }
}

/// Spectral measure of the decomposed matrix at `psi`.
///
/// Eigenvalues within `merge_tol` of each other are treated as one
/// eigenvalue; the weight of the merged atom is the summed squared
/// projection of `psi` onto the corresponding eigenvectors.
pub fn induced_measure(
    decomp: &EigenDecomposition,
    psi: &[f64],
    merge_tol: f64,
) -> Result<SpectralMeasure> {
    if psi.len() != decomp.dim() {
        return Err(Error::DimensionMismatch {
            expected: decomp.dim(),
            got: psi.len(),
        });
    }
    let norm_sq = compensated_sum(psi.iter().map(|x| x * x));
    if (norm_sq - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(norm_sq));
    }
    let atoms = decomp
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            let col = decomp.eigenvectors.column(k);
            let overlap = compensated_sum(col.iter().zip(psi).map(|(v, p)| v * p));
            (l, overlap * overlap)
        })
        .collect();
    let mut measure = merge_atoms(atoms, merge_tol);
    // Squared projections of an orthonormal basis sum to |psi|^2; remove the
    // round-off so downstream mixtures stay normalized.
    let total: CompensatedSum = measure.atoms.iter().map(|a| a.1).collect();
    let total = total.value();
    for a in &mut measure.atoms {
        a.1 /= total;
    }
    Ok(measure)
}

/// `sum lambda^m w`.
pub fn moment(measure: &SpectralMeasure, m: u32) -> f64 {
    measure.moment(m)
}
