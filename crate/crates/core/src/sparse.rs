//! Sparse real symmetric matrices with row access.
//!
//! A [`SparseSymmetricMatrix`] stores every nonzero twice (once per row), so
//! a row lookup returns the complete list of positions and values for that
//! row. That lookup is the concrete stand-in for a row oracle: everything
//! downstream only ever asks "what are the nonzeros of row `i`?".

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::spectral;

/// Dense dimension above which [`SparseSymmetricMatrix::with_norm_bound`]
/// stops trying to certify a bound by eigendecomposition.
const CERTIFY_DENSE_LIMIT: usize = 1024;

/// Real symmetric matrix stored as per-row sorted `(column, value)` lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetricMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
    max_row_nnz: usize,
    norm_bound: f64,
}

impl SparseSymmetricMatrix {
    /// Builds a matrix from upper- or lower-triangle coordinates.
    ///
    /// Each `(i, j, v)` is mirrored to `(j, i, v)`. Listing both halves of
    /// a pair is allowed when the values agree exactly; anything else is a
    /// conflicting duplicate. Explicit zeros are dropped. The norm bound
    /// defaults to [`gershgorin_bound`](Self::gershgorin_bound).
    pub fn from_coordinate_list(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        // value plus the orientation it was first listed in
        let mut map: BTreeMap<(usize, usize), (f64, bool)> = BTreeMap::new();
        for &(i, j, v) in entries {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, dim: n });
                }
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            let key = (i.min(j), i.max(j));
            let upper = i <= j;
            match map.get(&key) {
                // The mirrored half of an already listed entry.
                Some(&(prev, prev_upper)) if prev == v && i != j && prev_upper != upper => {}
                Some(_) => return Err(Error::DuplicateEntry { row: i, col: j }),
                None => {
                    map.insert(key, (v, upper));
                }
            }
        }
        let mut rows = vec![Vec::new(); n];
        for (&(i, j), &(v, _)) in &map {
            if v == 0.0 {
                continue;
            }
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        Ok(Self::from_sorted_rows(rows))
    }

    /// Builds from rows produced row-by-row (e.g. by a clock construction).
    ///
    /// Rows are sorted here; symmetry is checked exactly.
    pub fn from_rows(mut rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.retain(|&(_, v)| v != 0.0);
            row.sort_by_key(|&(c, _)| c);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::DuplicateEntry { row: i, col: w[0].0 });
                }
            }
            for &(c, v) in row.iter() {
                if c >= n {
                    return Err(Error::IndexOutOfRange { index: c, dim: n });
                }
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: c });
                }
            }
        }
        let m = Self::from_sorted_rows(rows);
        for i in 0..n {
            for &(c, v) in m.row(i) {
                if m.get(c, i) != v {
                    return Err(Error::NotSymmetric {
                        row: i,
                        col: c,
                        diff: (m.get(c, i) - v).abs(),
                    });
                }
            }
        }
        Ok(m)
    }

    fn from_sorted_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let max_row_nnz = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut m = Self {
            dim: rows.len(),
            rows,
            max_row_nnz,
            norm_bound: 1.0,
        };
        let g = m.gershgorin_bound();
        // An all-zero matrix still needs a positive scale.
        m.norm_bound = if g > 0.0 { g } else { 1.0 };
        m
    }

    /// Identity of size `n`.
    pub fn identity(n: usize) -> Result<Self> {
        let entries: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_coordinate_list(n, &entries)
    }

    /// Diagonal matrix.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let entries: Vec<_> = values.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_coordinate_list(values.len(), &entries)
    }

    /// 0/1 adjacency matrix of a simple undirected graph.
    ///
    /// The norm bound is the maximum degree (1 for an edgeless graph).
    pub fn adjacency_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        let mut entries = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            for idx in [u, v] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, dim: n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
            entries.push((u, v, 1.0));
        }
        let mut m = Self::from_coordinate_list(n, &entries)?;
        m.norm_bound = m.max_row_nnz.max(1) as f64;
        Ok(m)
    }

    /// Replaces the norm bound.
    ///
    /// The bound must be certified: either it dominates the Gershgorin bound,
    /// or (for `N <= 1024`) it dominates the spectral norm computed densely.
    pub fn with_norm_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "norm bound must be positive and finite, got {bound}"
            )));
        }
        certify_norm_bound(&self, bound)?;
        self.norm_bound = bound;
        Ok(self)
    }

    /// Sets a bound that holds by construction (for example half the sum of
    /// a unitary and its adjoint) without re-checking it.
    pub(crate) fn with_structural_norm_bound(mut self, bound: f64) -> Self {
        debug_assert!(bound > 0.0);
        self.norm_bound = bound;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_row_nnz(&self) -> usize {
        self.max_row_nnz
    }

    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Nonzeros of row `i`, sorted by column.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.rows[i];
        match row.binary_search_by_key(&j, |&(c, _)| c) {
            Ok(k) => row[k].1,
            Err(_) => 0.0,
        }
    }

    /// Upper-triangle coordinates `(i, j, v)` with `i <= j`.
    pub fn upper_triangle(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |&&(j, _)| j >= i)
                .map(move |&(j, v)| (i, j, v))
        })
    }

    /// `A v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        self.matvec_into(v, &mut out);
        Ok(out)
    }

    fn matvec_into(&self, v: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = compensated_sum(row.iter().map(|&(c, a)| a * v[c]));
        }
    }

    /// `A^m e_j` by `m` successive matvecs.
    pub fn power_apply_basis(&self, j: usize, m: u32) -> Result<Vec<f64>> {
        self.check_index(j)?;
        let mut v = vec![0.0; self.dim];
        v[j] = 1.0;
        let mut scratch = vec![0.0; self.dim];
        for _ in 0..m {
            self.matvec_into(&v, &mut scratch);
            std::mem::swap(&mut v, &mut scratch);
        }
        Ok(v)
    }

    /// `A^m v` by `m` successive matvecs.
    pub fn power_apply(&self, v: &[f64], m: u32) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let mut v = v.to_vec();
        let mut scratch = vec![0.0; self.dim];
        for _ in 0..m {
            self.matvec_into(&v, &mut scratch);
            std::mem::swap(&mut v, &mut scratch);
        }
        Ok(v)
    }

    /// Exact `(A^m)_{jj}`: `m` matvecs from `e_j`, then `<e_j, .>`.
    ///
    /// Cost is `O(m N s)`. For an adjacency matrix this is the number of
    /// closed walks of length `m` through vertex `j`.
    pub fn power_diag_exact(&self, j: usize, m: u32) -> Result<f64> {
        self.power_entry_exact(j, j, m)
    }

    /// Exact `(A^m)_{ij} = <e_i, A^m e_j>`.
    pub fn power_entry_exact(&self, i: usize, j: usize, m: u32) -> Result<f64> {
        self.check_index(i)?;
        if m == 0 {
            return Err(Error::InvalidParameter("power must be at least 1".into()));
        }
        let v = self.power_apply_basis(j, m)?;
        let mut e_i = vec![0.0; self.dim];
        e_i[i] = 1.0;
        Ok(crate::numeric::dot(&e_i, &v))
    }

    /// Maximum absolute row sum; always dominates the spectral norm.
    pub fn gershgorin_bound(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(_, v)| v.abs()).collect::<CompensatedSum>().value())
            .fold(0.0, f64::max)
    }

    /// `factor * A`, with the norm bound scaled by `|factor|`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor != 0.0) {
            return Err(Error::InvalidParameter(format!("bad scale factor {factor}")));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(c, v)| (c, v * factor)).collect())
            .collect();
        Ok(Self {
            dim: self.dim,
            rows,
            max_row_nnz: self.max_row_nnz,
            norm_bound: self.norm_bound * factor.abs(),
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                d[(i, j)] = v;
            }
        }
        d
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.dim {
            Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dim,
            })
        } else {
            Ok(())
        }
    }

    /// Parses the text matrix format: `N NNZ`, then `NNZ` lines `i j value`
    /// with 0-based `i <= j`. Lines starting with `#` and blank lines are
    /// skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = data_lines(text);
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "missing header".into(),
        })?;
        let [n, nnz] = parse_fields::<2>(hline, header)?;
        let n: usize = parse_num(hline, n)?;
        let nnz: usize = parse_num(hline, nnz)?;
        let mut entries = Vec::with_capacity(nnz);
        for _ in 0..nnz {
            let (ln, line) = lines.next().ok_or(Error::Parse {
                line: hline,
                msg: format!("expected {nnz} entries, found {}", entries.len()),
            })?;
            let [i, j, v] = parse_fields::<3>(ln, line)?;
            let i: usize = parse_num(ln, i)?;
            let j: usize = parse_num(ln, j)?;
            let v: f64 = parse_num(ln, v)?;
            if i > j {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("entry ({i}, {j}) is below the diagonal"),
                });
            }
            if i >= n || j >= n {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("index out of range for N = {n}"),
                });
            }
            entries.push((i, j, v));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln,
                msg: "trailing data after the declared entries".into(),
            });
        }
        Self::from_coordinate_list(n, &entries).map_err(|e| Error::Parse {
            line: hline,
            msg: e.to_string(),
        })
    }

    /// Renders the text matrix format (upper triangle, row-major order).
    pub fn to_file_string(&self) -> String {
        let entries: Vec<_> = self.upper_triangle().collect();
        let mut s = format!("{} {}\n", self.dim, entries.len());
        for (i, j, v) in entries {
            let _ = writeln!(s, "{i} {j} {v}");
        }
        s
    }

    /// Parses the graph format: `N M`, then `M` lines `u v`.
    pub fn parse_graph(text: &str) -> Result<Self> {
        let mut lines = data_lines(text);
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "missing header".into(),
        })?;
        let [n, m] = parse_fields::<2>(hline, header)?;
        let n: usize = parse_num(hline, n)?;
        let m: usize = parse_num(hline, m)?;
        let mut edges = Vec::with_capacity(m);
        for _ in 0..m {
            let (ln, line) = lines.next().ok_or(Error::Parse {
                line: hline,
                msg: format!("expected {m} edges, found {}", edges.len()),
            })?;
            let [u, v] = parse_fields::<2>(ln, line)?;
            edges.push((parse_num(ln, u)?, parse_num(ln, v)?));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln,
                msg: "trailing data after the declared edges".into(),
            });
        }
        Self::adjacency_from_edges(n, &edges).map_err(|e| Error::Parse {
            line: hline,
            msg: e.to_string(),
        })
    }
}

/// Checks `bound >= ||a||`, cheaply when possible.
pub(crate) fn certify_norm_bound(a: &SparseSymmetricMatrix, bound: f64) -> Result<()> {
    let g = a.gershgorin_bound();
    if bound >= g {
        return Ok(());
    }
    if a.dim() > CERTIFY_DENSE_LIMIT {
        return Err(Error::NormBoundTooSmall { bound, norm: g });
    }
    let norm = spectral::spectral_norm(&a.to_dense())?;
    if bound >= norm - 1e-9 * norm.max(1.0) {
        Ok(())
    } else {
        Err(Error::NormBoundTooSmall { bound, norm })
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_fields<const K: usize>(line_no: usize, line: &str) -> Result<[&str; K]> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    fields.try_into().map_err(|f: Vec<&str>| Error::Parse {
        line: line_no,
        msg: format!("expected {K} fields, found {}", f.len()),
    })
}

pub(crate) fn parse_num<T: std::str::FromStr>(line_no: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line: line_no,
        msg: format!("cannot parse `{s}`"),
    })
}

/// Which side of the threshold an estimate landed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    AboveG,
    BelowG,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::AboveG => "above",
            Side::BelowG => "below",
        })
    }
}

/// Answer to one estimation instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeeDecision {
    pub side: Side,
    pub estimate: f64,
}

impl DeeDecision {
    /// `AboveG` iff `estimate > g`.
    pub fn from_estimate(estimate: f64, g: f64) -> Self {
        let side = if estimate > g { Side::AboveG } else { Side::BelowG };
        Self { side, estimate }
    }
}

/// One promise instance: decide whether `(A^m)_{jj} >= g + eps b^m` or
/// `<= g - eps b^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeeInstance {
    matrix: SparseSymmetricMatrix,
    j: usize,
    m: u32,
    g: f64,
    epsilon: f64,
    b: f64,
}

impl DeeInstance {
    pub fn new(
        matrix: SparseSymmetricMatrix,
        j: usize,
        m: u32,
        g: f64,
        epsilon: f64,
        b: f64,
    ) -> Result<Self> {
        if j >= matrix.dim() {
            return Err(Error::IndexOutOfRange {
                index: j,
                dim: matrix.dim(),
            });
        }
        if m == 0 {
            return Err(Error::InvalidParameter("power m must be at least 1".into()));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!("norm bound b must be positive, got {b}")));
        }
        let scale = b.powf(f64::from(m));
        if !scale.is_finite() {
            return Err(Error::NumericRange(format!("b^m = {b}^{m}")));
        }
        if !(g.is_finite() && g.abs() <= scale) {
            return Err(Error::InvalidParameter(format!(
                "threshold g = {g} must lie in [-b^m, b^m] = [-{scale}, {scale}]"
            )));
        }
        if b != matrix.norm_bound() {
            certify_norm_bound(&matrix, b)?;
        }
        Ok(Self {
            matrix,
            j,
            m,
            g,
            epsilon,
            b,
        })
    }

    pub fn matrix(&self) -> &SparseSymmetricMatrix {
        &self.matrix
    }
    pub fn j(&self) -> usize {
        self.j
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn b(&self) -> f64 {
        self.b
    }

    /// `b^m`, the scale on which accuracy is measured.
    pub fn scale(&self) -> f64 {
        self.b.powf(f64::from(self.m))
    }

    /// Half-width of the promise gap, `eps b^m`.
    pub fn gap(&self) -> f64 {
        self.epsilon * self.scale()
    }

    /// Exact `(A^m)_{jj}` from the sparse power oracle.
    pub fn exact_value(&self) -> Result<f64> {
        self.matrix.power_diag_exact(self.j, self.m)
    }

    /// Which side the exact value satisfies the promise on, if any.
    pub fn promised_side(&self) -> Result<Option<Side>> {
        let v = self.exact_value()?;
        Ok(if v >= self.g + self.gap() {
            Some(Side::AboveG)
        } else if v <= self.g - self.gap() {
            Some(Side::BelowG)
        } else {
            None
        })
    }
}
