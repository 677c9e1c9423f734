use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense;
use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

/// Opaque identifier of a family member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub String);

impl Label {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_owned())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(s)
    }
}

impl From<i64> for Label {
    fn from(i: i64) -> Self {
        Label(i.to_string())
    }
}

impl From<usize> for Label {
    fn from(i: usize) -> Self {
        Label(i.to_string())
    }
}

/// An indexed finite family of complex vectors sharing one ambient dimension.
///
/// Vectors are stored as the columns of a dense `m x n` matrix, which is also
/// the synthesis operator of the family.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFamily {
    matrix: CMatrix,
    labels: Vec<Label>,
}

impl VectorFamily {
    pub fn from_columns(matrix: CMatrix, labels: Vec<Label>) -> Result<Self> {
        if matrix.nrows() == 0 {
            return Err(Error::ZeroDimension);
        }
        if labels.len() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.ncols(),
                found: labels.len(),
            });
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::DuplicateLabel(l.0.clone()));
            }
        }
        Ok(Self { matrix, labels })
    }

    /// Columns labelled `0..n`.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let labels = (0..matrix.ncols()).map(Label::from).collect();
        Self::from_columns(matrix, labels)
    }

    pub fn new(vectors: Vec<CVector>, labels: Vec<Label>) -> Result<Self> {
        let m = vectors.first().map(|v| v.len()).ok_or(Error::EmptyFamily)?;
        if let Some(bad) = vectors.iter().find(|v| v.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: bad.len(),
            });
        }
        let matrix = CMatrix::from_fn(m, vectors.len(), |r, c| vectors[c][r]);
        Self::from_columns(matrix, labels)
    }

    /// Family of `dimension`-vectors given as complex sample lists.
    pub fn from_vecs(vectors: &[Vec<Complex64>]) -> Result<Self> {
        let cols = vectors.iter().map(|v| CVector::from_column_slice(v)).collect::<Vec<_>>();
        let labels = (0..cols.len()).map(Label::from).collect();
        Self::new(cols, labels)
    }

    /// An empty family in ambient dimension `dimension`.
    pub fn empty(dimension: usize) -> Result<Self> {
        Self::from_columns(CMatrix::zeros(dimension, 0), Vec::new())
    }

    pub fn standard_basis(dimension: usize) -> Self {
        Self::from_matrix(CMatrix::identity(dimension, dimension)).expect("identity is a valid family")
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn len(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.ncols() == 0
    }

    /// The synthesis matrix (vectors as columns).
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &Label {
        &self.labels[i]
    }

    pub fn position(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn vector(&self, i: usize) -> CVector {
        self.matrix.column(i).into_owned()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.matrix.column_iter().map(|c| c.norm()).collect()
    }

    pub fn min_norm(&self) -> f64 {
        self.norms().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Members at the given positions, in the given order.
    pub fn subfamily(&self, positions: &[usize]) -> VectorFamily {
        let matrix = self.matrix.select_columns(positions.iter());
        let labels = positions.iter().map(|&i| self.labels[i].clone()).collect();
        VectorFamily { matrix, labels }
    }

    pub fn scaled(&self, c: Complex64) -> VectorFamily {
        VectorFamily {
            matrix: &self.matrix * c,
            labels: self.labels.clone(),
        }
    }

    /// Same labels with replaced vectors.
    pub fn with_matrix(&self, matrix: CMatrix) -> Result<VectorFamily> {
        if matrix.ncols() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: matrix.ncols(),
            });
        }
        Self::from_columns(matrix, self.labels.clone())
    }

    /// Labelled union of two families in the same ambient space.
    pub fn union(&self, other: &VectorFamily) -> Result<VectorFamily> {
        if other.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        let mut matrix = CMatrix::zeros(self.dimension(), self.len() + other.len());
        matrix.columns_mut(0, self.len()).copy_from(&self.matrix);
        matrix.columns_mut(self.len(), other.len()).copy_from(&other.matrix);
        let labels = self.labels.iter().chain(other.labels.iter()).cloned().collect();
        Self::from_columns(matrix, labels)
    }

    /// Row indices of nonzero entries for every column.
    pub(crate) fn column_supports(&self) -> Vec<Vec<usize>> {
        self.matrix
            .column_iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .filter(|(_, v)| v.re != 0.0 || v.im != 0.0)
                    .map(|(r, _)| r)
                    .collect()
            })
            .collect()
    }
}

/// Matrix of cross inner products `out[(i, k)] = <f_i, g_k>` (linear in the first slot).
///
/// Sparse columns of `f` are exploited through a row index of `g`, which keeps
/// standard-basis style fixtures cheap even in large ambient dimensions.
pub fn cross_coefficients(f: &VectorFamily, g: &VectorFamily) -> Result<CMatrix> {
    if f.dimension() != g.dimension() {
        return Err(Error::DimensionMismatch {
            expected: f.dimension(),
            found: g.dimension(),
        });
    }
    let m = f.dimension();
    let f_support = f.column_supports();
    let nnz: usize = f_support.iter().map(Vec::len).sum();
    let dense_cost = f.len().max(1) * m;
    if nnz * 4 >= dense_cost {
        return Ok(dense::cmul(&f.matrix().transpose(), &g.matrix().map(|v| v.conj())));
    }
    // row r -> [(k, conj(g_k[r]))]
    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); m];
    for (k, col) in g.matrix().column_iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            if v.re != 0.0 || v.im != 0.0 {
                rows[r].push((k, v.conj()));
            }
        }
    }
    let mut out = CMatrix::zeros(f.len(), g.len());
    for (i, support) in f_support.iter().enumerate() {
        for &r in support {
            let fv = f.matrix()[(r, i)];
            for &(k, gv) in &rows[r] {
                out[(i, k)] += fv * gv;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_duplicate_labels() {
        let err = VectorFamily::from_columns(CMatrix::identity(2, 2), vec!["a".into(), "a".into()]);
        assert!(matches!(err, Err(Error::DuplicateLabel(_))));
    }

    #[test]
    fn rejects_mixed_dimensions() {
        let err = VectorFamily::from_vecs(&[vec![c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sparse_and_dense_cross_coefficients_agree() {
        let mut sparse = CMatrix::zeros(40, 6);
        for j in 0..6 {
            sparse[(j * 3, j)] = c(1.0, -0.5 * j as f64);
            sparse[(j * 5 % 40, j)] = c(0.25, 1.0);
        }
        let f = VectorFamily::from_matrix(sparse.clone()).unwrap();
        let g = VectorFamily::from_matrix(CMatrix::from_fn(40, 9, |r, k| {
            c(((r * 7 + k) % 11) as f64 - 5.0, ((r + 2 * k) % 3) as f64)
        }))
        .unwrap();
        let fast = cross_coefficients(&f, &g).unwrap();
        for i in 0..6 {
            for k in 0..9 {
                let direct: Complex64 = (0..40).map(|r| sparse[(r, i)] * g.matrix()[(r, k)].conj()).sum();
                assert!((fast[(i, k)] - direct).norm() < 1e-12);
            }
        }
    }
}
