//! Complex sparse and dense matrices with Kronecker products and identity padding.
//!
//! [`SparseComplexMatrix`] is a coordinate list kept sorted by `(row, col)` with no
//! duplicates and no entry whose magnitude is below [`ZERO_TOL`]. It is the carrier
//! for Carleman matrices and Hamiltonians. [`DenseComplexMatrix`] is row-major and
//! used by the verification paths.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type C64 = Complex64;

/// Absolute magnitude below which matrix entries and coefficients are dropped.
pub const ZERO_TOL: f64 = 1e-12;

pub const fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("dimension overflow while computing {0}")]
    DimensionOverflow(&'static str),
    #[error("entry ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("{values} values cannot fill a {rows}x{cols} matrix")]
    ValueCount { rows: usize, cols: usize, values: usize },
    #[error("block dimension must be at least 1")]
    ZeroBlockDim,
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
}

pub(crate) fn checked_pow(base: usize, exp: usize, what: &'static str) -> Result<usize, TensorError> {
    let exp = u32::try_from(exp).map_err(|_| TensorError::DimensionOverflow(what))?;
    base.checked_pow(exp).ok_or(TensorError::DimensionOverflow(what))
}

/// Sorted coordinate-list matrix of complex entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct SparseComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl SparseComplexMatrix {
    /// Builds a matrix from triplets. Duplicate coordinates and out-of-range indices are
    /// rejected; entries below [`ZERO_TOL`] are dropped.
    pub fn new(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self, TensorError> {
        let mut entries: Vec<_> = entries.into_iter().collect();
        for &(row, col, v) in &entries {
            if row >= rows || col >= cols {
                return Err(TensorError::IndexOutOfRange { row, col, rows, cols });
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(TensorError::NonFinite { row, col });
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        if let Some(w) = entries.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(TensorError::DuplicateEntry {
                row: w[0].0,
                col: w[0].1,
            });
        }
        entries.retain(|&(_, _, v)| v.norm() >= ZERO_TOL);
        Ok(Self { rows, cols, entries })
    }

    /// Builds a matrix from triplets, summing values that share a coordinate.
    pub fn accumulate(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self, TensorError> {
        let mut raw: Vec<_> = entries.into_iter().collect();
        for &(row, col, _) in &raw {
            if row >= rows || col >= cols {
                return Err(TensorError::IndexOutOfRange { row, col, rows, cols });
            }
        }
        raw.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(raw.len());
        for (r, c, v) in raw {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        Self::new(rows, cols, merged)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            rows: dim,
            cols: dim,
            entries: (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect(),
        }
    }

    /// Column vector `v` as a `len x 1` matrix.
    pub fn column(v: &[C64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, x)| x.norm() >= ZERO_TOL)
                .map(|(i, &x)| (i, 0, x))
                .collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries
            .binary_search_by_key(&(row, col), |&(r, c, _)| (r, c))
            .map(|i| self.entries[i].2)
            .unwrap_or_default()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::new(
            self.rows,
            self.cols,
            self.entries.iter().map(|&(r, c, v)| (r, c, v * factor)),
        )
        .expect("scaling keeps indices valid")
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        if self.shape() != other.shape() {
            return Err(TensorError::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Self::accumulate(
            self.rows,
            self.cols,
            self.entries.iter().chain(other.entries.iter()).copied(),
        )
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.cols,
            self.rows,
            self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())),
        )
        .expect("adjoint keeps indices valid")
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>, TensorError> {
        if x.len() != self.cols {
            return Err(TensorError::ShapeMismatch {
                expected: (self.cols, 1),
                found: (x.len(), 1),
            });
        }
        let mut y = vec![C64::default(); self.rows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        Ok(y)
    }

    /// Zero-pads to a larger shape; existing entries keep their coordinates.
    pub fn padded(&self, rows: usize, cols: usize) -> Result<Self, TensorError> {
        if rows < self.rows || cols < self.cols {
            return Err(TensorError::ShapeMismatch {
                expected: (rows, cols),
                found: self.shape(),
            });
        }
        Ok(Self {
            rows,
            cols,
            entries: self.entries.clone(),
        })
    }

    /// Largest entry-wise magnitude of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, TensorError> {
        if self.shape() != other.shape() {
            return Err(TensorError::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        let mut diffs: Vec<(usize, usize, C64)> = self.entries.clone();
        diffs.extend(other.entries.iter().map(|&(r, c, v)| (r, c, -v)));
        diffs.sort_by_key(|&(r, c, _)| (r, c));
        let mut worst = 0.0f64;
        let mut i = 0;
        while i < diffs.len() {
            let (r, c, mut v) = diffs[i];
            i += 1;
            while i < diffs.len() && (diffs[i].0, diffs[i].1) == (r, c) {
                v += diffs[i].2;
                i += 1;
            }
            worst = worst.max(v.norm());
        }
        Ok(worst)
    }

    /// Sum of entry magnitudes.
    pub fn entrywise_l1(&self) -> f64 {
        self.entries.iter().map(|&(_, _, v)| v.norm()).sum()
    }

    pub fn to_dense(&self) -> DenseComplexMatrix {
        let mut d = DenseComplexMatrix::zeros(self.rows, self.cols);
        for &(r, c, v) in &self.entries {
            d[(r, c)] = v;
        }
        d
    }

    pub fn from_dense(d: &DenseComplexMatrix) -> Self {
        let cols = d.cols();
        Self {
            rows: d.rows(),
            cols,
            entries: d
                .values()
                .iter()
                .enumerate()
                .filter(|(_, v)| v.norm() >= ZERO_TOL)
                .map(|(i, &v)| (i / cols, i % cols, v))
                .collect(),
        }
    }
}

/// Standard Kronecker product `a ⊗ b`.
pub fn kron(a: &SparseComplexMatrix, b: &SparseComplexMatrix) -> Result<SparseComplexMatrix, TensorError> {
    let rows = a
        .rows
        .checked_mul(b.rows)
        .ok_or(TensorError::DimensionOverflow("kron rows"))?;
    let cols = a
        .cols
        .checked_mul(b.cols)
        .ok_or(TensorError::DimensionOverflow("kron cols"))?;
    let mut entries = Vec::with_capacity(a.nnz() * b.nnz());
    // Row-major order of the result follows from iterating a's rows outermost.
    for &(ra, ca, va) in &a.entries {
        for &(rb, cb, vb) in &b.entries {
            entries.push((ra * b.rows + rb, ca * b.cols + cb, va * vb));
        }
    }
    SparseComplexMatrix::new(rows, cols, entries)
}

/// `I_d^{⊗left} ⊗ m ⊗ I_d^{⊗right}`.
pub fn identity_padded_embed(
    m: &SparseComplexMatrix,
    left_copies: usize,
    right_copies: usize,
    block_dim: usize,
) -> Result<SparseComplexMatrix, TensorError> {
    if block_dim == 0 {
        return Err(TensorError::ZeroBlockDim);
    }
    let left = checked_pow(block_dim, left_copies, "left identity padding")?;
    let right = checked_pow(block_dim, right_copies, "right identity padding")?;
    let rows = left
        .checked_mul(m.rows)
        .and_then(|x| x.checked_mul(right))
        .ok_or(TensorError::DimensionOverflow("embedded rows"))?;
    let cols = left
        .checked_mul(m.cols)
        .and_then(|x| x.checked_mul(right))
        .ok_or(TensorError::DimensionOverflow("embedded cols"))?;
    let mut entries = Vec::with_capacity(left * m.nnz() * right);
    for l in 0..left {
        for &(r, c, v) in &m.entries {
            for k in 0..right {
                entries.push(((l * m.rows + r) * right + k, (l * m.cols + c) * right + k, v));
            }
        }
    }
    SparseComplexMatrix::new(rows, cols, entries)
}

/// Kronecker product of two vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// `v^{⊗power}`; the zeroth power is `[1]`.
pub fn kron_power_vec(v: &[C64], power: usize) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for _ in 0..power {
        out = kron_vec(&out, v);
    }
    out
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseComplexMatrix {
    rows: usize,
    cols: usize,
    values: Vec<C64>,
}

impl DenseComplexMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<C64>) -> Result<Self, TensorError> {
        if rows.checked_mul(cols) != Some(values.len()) {
            return Err(TensorError::ValueCount {
                rows,
                cols,
                values: values.len(),
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![C64::default(); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, col: &[C64]) {
        for (r, &v) in col.iter().enumerate() {
            self[(r, c)] = v;
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, TensorError> {
        if self.cols != other.rows {
            return Err(TensorError::ShapeMismatch {
                expected: (self.cols, other.cols),
                found: other.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::default() {
                    continue;
                }
                for j in 0..other.cols {
                    out.values[i * other.cols + j] += a * other.values[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[C64]) -> Result<Vec<C64>, TensorError> {
        if x.len() != self.cols {
            return Err(TensorError::ShapeMismatch {
                expected: (self.cols, 1),
                found: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).map(|c| self[(r, c)] * x[c]).sum())
            .collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |r, c| {
            self[(r / other.rows, c / other.cols)] * other[(r % other.rows, c % other.cols)]
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|&v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, TensorError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TensorError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self, TensorError> {
        if self.shape() != other.shape() {
            return Err(TensorError::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Largest entry-wise magnitude of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let gram = self.adjoint().matmul(self).expect("square");
        gram.max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() < tol
    }
}

impl Index<(usize, usize)> for DenseComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of range");
        &self.values[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for DenseComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of range");
        &mut self.values[r * self.cols + c]
    }
}

/// Wire form `{"rows": R, "cols": C, "entries": [[r, c, re, im], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64, f64)>,
}

impl TryFrom<MatrixJson> for SparseComplexMatrix {
    type Error = TensorError;

    fn try_from(j: MatrixJson) -> Result<Self, TensorError> {
        Self::new(
            j.rows,
            j.cols,
            j.entries.into_iter().map(|(r, c, re, im)| (r, c, C64::new(re, im))),
        )
    }
}

impl From<SparseComplexMatrix> for MatrixJson {
    fn from(m: SparseComplexMatrix) -> Self {
        Self {
            rows: m.rows,
            cols: m.cols,
            entries: m.entries.into_iter().map(|(r, c, v)| (r, c, v.re, v.im)).collect(),
        }
    }
}

/// Dense matrices cross the wire in the same sparse coordinate format.
impl Serialize for DenseComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson::from(SparseComplexMatrix::from_dense(self)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let m = SparseComplexMatrix::deserialize(d)?;
        Ok(m.to_dense())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn sigma_plus() -> SparseComplexMatrix {
        SparseComplexMatrix::new(2, 2, [(0, 1, re(1.0))]).unwrap()
    }

    /// Brute-force dense Kronecker product, independent of the sparse routine.
    fn dense_kron_oracle(a: &DenseComplexMatrix, b: &DenseComplexMatrix) -> DenseComplexMatrix {
        let mut out = DenseComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                for k in 0..b.rows() {
                    for l in 0..b.cols() {
                        out[(i * b.rows() + k, j * b.cols() + l)] = a[(i, j)] * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = SparseComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2).unwrap(), SparseComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_raising_operators_is_single_corner_entry() {
        let k = kron(&sigma_plus(), &sigma_plus()).unwrap();
        assert_eq!(k.shape(), (4, 4));
        assert_eq!(k.entries(), &[(0, 3, re(1.0))]);
    }

    #[test]
    fn kron_with_scalar_matches_dense_oracle() {
        let a = sigma_plus();
        let b = SparseComplexMatrix::new(1, 1, [(0, 0, re(2.0))]).unwrap();
        let k = kron(&a, &b).unwrap();
        assert_eq!(k.to_dense(), dense_kron_oracle(&a.to_dense(), &b.to_dense()));
        assert_eq!(k.entries(), &[(0, 1, re(2.0))]);
    }

    #[test]
    fn kron_detects_overflow() {
        let big = SparseComplexMatrix::zeros(usize::MAX / 2, 1);
        let err = kron(&big, &SparseComplexMatrix::zeros(3, 1)).unwrap_err();
        assert!(matches!(err, TensorError::DimensionOverflow(_)));
    }

    #[test]
    fn embed_examples() {
        let m = sigma_plus();
        assert_eq!(identity_padded_embed(&m, 0, 0, 5).unwrap(), m);

        let proj0 = SparseComplexMatrix::new(2, 2, [(0, 0, re(1.0))]).unwrap();
        let e = identity_padded_embed(&proj0, 1, 0, 2).unwrap();
        let expected = DenseComplexMatrix::from_fn(4, 4, |r, c| if r == c && r % 2 == 0 { re(1.0) } else { re(0.0) });
        assert_eq!(e.to_dense(), expected);

        let scalar = SparseComplexMatrix::new(1, 1, [(0, 0, re(-3.5))]).unwrap();
        assert_eq!(identity_padded_embed(&scalar, 2, 1, 1).unwrap(), scalar);
        assert_eq!(
            identity_padded_embed(&scalar, 1, 1, 0).unwrap_err(),
            TensorError::ZeroBlockDim
        );
    }

    #[test]
    fn construction_invariants() {
        let dup = SparseComplexMatrix::new(2, 2, [(0, 0, re(1.0)), (0, 0, re(2.0))]);
        assert_eq!(dup.unwrap_err(), TensorError::DuplicateEntry { row: 0, col: 0 });
        let oob = SparseComplexMatrix::new(2, 2, [(2, 0, re(1.0))]);
        assert!(matches!(oob, Err(TensorError::IndexOutOfRange { .. })));
        let tiny = SparseComplexMatrix::new(2, 2, [(1, 0, re(1e-13)), (0, 1, re(1.0))]).unwrap();
        assert_eq!(tiny.nnz(), 1);
        let unsorted = SparseComplexMatrix::new(2, 2, [(1, 1, re(1.0)), (0, 1, re(2.0))]).unwrap();
        assert_eq!(unsorted.entries()[0].0, 0);
    }

    #[test]
    fn accumulate_sums_duplicates_and_cancels() {
        let m = SparseComplexMatrix::accumulate(
            2,
            2,
            [(0, 0, re(1.0)), (0, 0, re(2.0)), (1, 1, re(1.0)), (1, 1, re(-1.0))],
        )
        .unwrap();
        assert_eq!(m.entries(), &[(0, 0, re(3.0))]);
    }

    #[test]
    fn dense_round_trip_examples() {
        assert_eq!(
            SparseComplexMatrix::zeros(2, 2).to_dense(),
            DenseComplexMatrix::zeros(2, 2)
        );
        let a1 = SparseComplexMatrix::new(4, 4, [(0, 0, re(2.0)), (3, 3, re(7.0))]).unwrap();
        let d = a1.to_dense();
        let expected = DenseComplexMatrix::from_fn(4, 4, |r, c| match (r, c) {
            (0, 0) => re(2.0),
            (3, 3) => re(7.0),
            _ => re(0.0),
        });
        assert_eq!(d, expected);
        assert_eq!(SparseComplexMatrix::from_dense(&d), a1);
    }

    #[test]
    fn matvec_and_max_abs_diff() {
        let m = SparseComplexMatrix::new(2, 2, [(0, 1, re(2.0)), (1, 0, C64::new(0.0, 1.0))]).unwrap();
        assert_eq!(
            m.matvec(&[re(1.0), re(3.0)]).unwrap(),
            vec![re(6.0), C64::new(0.0, 1.0)]
        );
        let n = SparseComplexMatrix::new(2, 2, [(0, 1, re(2.5))]).unwrap();
        assert!((m.max_abs_diff(&n).unwrap() - 1.0).abs() < 1e-15);
        assert!(m.matvec(&[re(1.0)]).is_err());
    }

    #[test]
    fn json_schema_round_trip() {
        let m = SparseComplexMatrix::new(2, 3, [(0, 2, C64::new(1.5, -0.5))]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":2,"cols":3,"entries":[[0,2,1.5,-0.5]]}"#);
        let back: SparseComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let bad: Result<SparseComplexMatrix, _> =
            serde_json::from_str(r#"{"rows":1,"cols":1,"entries":[[1,0,1.0,0.0]]}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn unitarity_defect_detects_non_unitary() {
        assert!(DenseComplexMatrix::identity(4).is_unitary(1e-14));
        assert!(!sigma_plus().to_dense().is_unitary(1e-3));
    }
}
