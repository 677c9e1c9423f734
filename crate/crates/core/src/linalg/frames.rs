use nalgebra::SVD;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::{self, clamp_psd, hermitian_eigen, EIGEN_REL_TOL, RANK_REL_TOL};
use super::family::{cross_coefficients, VectorFamily};
use crate::error::{Error, Result};
use crate::{CMatrix, CVector};

/// Hermitian PSD matrix of inner products `<f_i, f_j>`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: CMatrix,
}

impl GramMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    /// Ascending eigenvalues, without clamping.
    pub fn eigenvalues(&self) -> Vec<f64> {
        dense::hermitian_eigenvalues(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        dense::min_eigenvalue_psd(&self.entries)
    }

    /// `a^H G^T a`, which equals `||sum a_i f_i||^2` for the `<f_i, f_j>` convention.
    pub fn quadratic_form(&self, a: &CVector) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..a.len() {
            for j in 0..a.len() {
                acc += a[i] * a[j].conj() * self.entries[(i, j)];
            }
        }
        acc.re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Frame,
    Bessel,
    Riesz,
}

/// Extremal spectral pairs backing a bounds report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub lower_value: f64,
    pub lower_vector: Vec<Complex64>,
    pub upper_value: f64,
    pub upper_vector: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
    pub kind: BoundKind,
    pub certificate: Certificate,
    /// Numerical rank of the operator the bounds were read from.
    pub rank: usize,
    /// Frame bounds only: the family does not span the ambient space.
    pub rank_deficient: bool,
}

pub fn gram(f: &VectorFamily) -> Result<GramMatrix> {
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    Ok(GramMatrix {
        entries: cross_coefficients(f, f)?,
    })
}

/// Optimal Riesz bounds: extreme eigenvalues of the Gram matrix.
pub fn riesz_bounds(f: &VectorFamily) -> Result<BoundsReport> {
    let g = gram(f)?;
    // Eigenvectors of G^T are conjugates of those of G; the quadratic form is
    // a^H G^T a, so decompose G^T directly.
    let eig = hermitian_eigen(&g.entries.transpose());
    let n = eig.values.len();
    let top = eig.values[n - 1].max(0.0);
    let lower = clamp_psd(eig.values[0], top);
    let rank = eig
        .values
        .iter()
        .filter(|&&v| v > EIGEN_REL_TOL * top.max(f64::MIN_POSITIVE))
        .count();
    Ok(BoundsReport {
        lower,
        upper: top,
        kind: BoundKind::Riesz,
        certificate: Certificate {
            lower_value: lower,
            lower_vector: eig.vectors.column(0).iter().copied().collect(),
            upper_value: top,
            upper_vector: eig.vectors.column(n - 1).iter().copied().collect(),
        },
        rank,
        rank_deficient: rank < n,
    })
}

struct SpanSvd {
    sigma: Vec<f64>,
    left: CMatrix,
    rank: usize,
}

fn span_svd(f: &VectorFamily) -> Result<SpanSvd> {
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let svd = SVD::new(f.matrix().clone(), true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = CMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(Error::AllZero);
    }
    let rank = sigma.iter().filter(|&&s| s > RANK_REL_TOL * smax).count();
    Ok(SpanSvd { sigma, left, rank })
}

/// Frame bounds of `f` as a frame for its own span.
pub fn frame_bounds(f: &VectorFamily) -> Result<BoundsReport> {
    let svd = span_svd(f)?;
    let r = svd.rank;
    let upper = svd.sigma[0] * svd.sigma[0];
    let lower = svd.sigma[r - 1] * svd.sigma[r - 1];
    Ok(BoundsReport {
        lower,
        upper,
        kind: BoundKind::Frame,
        certificate: Certificate {
            lower_value: lower,
            lower_vector: svd.left.column(r - 1).iter().copied().collect(),
            upper_value: upper,
            upper_vector: svd.left.column(0).iter().copied().collect(),
        },
        rank: r,
        rank_deficient: r < f.dimension(),
    })
}

/// Optimal Bessel bound, the squared norm of the synthesis operator.
pub fn bessel_bound(f: &VectorFamily) -> Result<f64> {
    if f.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let s = dense::spectral_norm(f.matrix());
    Ok(s * s)
}

/// `S = sum f_i f_i^H`.
pub fn frame_operator(f: &VectorFamily) -> CMatrix {
    dense::cmul(f.matrix(), &f.matrix().adjoint())
}

/// Analysis coefficients `<h, f_i>`.
pub fn analysis(f: &VectorFamily, h: &CVector) -> Result<CVector> {
    if h.len() != f.dimension() {
        return Err(Error::DimensionMismatch {
            expected: f.dimension(),
            found: h.len(),
        });
    }
    Ok(f.matrix().ad_mul(h))
}

pub fn synthesis(f: &VectorFamily, coefficients: &CVector) -> Result<CVector> {
    if coefficients.len() != f.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: coefficients.len(),
        });
    }
    Ok(f.matrix() * coefficients)
}

/// Canonical dual `{S^-1 f_i}`; requires `f` to span the ambient space.
pub fn dual_family(f: &VectorFamily) -> Result<VectorFamily> {
    let svd = span_svd(f)?;
    if svd.rank < f.dimension() {
        return Err(Error::SingularFrameOperator {
            rank: svd.rank,
            dimension: f.dimension(),
        });
    }
    dual_from_svd(f, &svd)
}

/// Canonical dual computed inside `span(f)` with the pseudo-inverse of `S`.
pub fn dual_family_in_span(f: &VectorFamily) -> Result<VectorFamily> {
    let svd = span_svd(f)?;
    dual_from_svd(f, &svd)
}

fn dual_from_svd(f: &VectorFamily, svd: &SpanSvd) -> Result<VectorFamily> {
    let r = svd.rank;
    let u = svd.left.columns(0, r);
    let inv = CMatrix::from_diagonal(&CVector::from_fn(r, |i, _| {
        Complex64::new(1.0 / (svd.sigma[i] * svd.sigma[i]), 0.0)
    }));
    let u = u.into_owned();
    let s_pinv = dense::cmul(&dense::cmul(&u, &inv), &u.adjoint());
    f.with_matrix(dense::cmul(&s_pinv, f.matrix()))
}

/// Reconstruction `sum <h, f_i> d_i` against a dual family `d`.
pub fn reconstruct(f: &VectorFamily, dual: &VectorFamily, h: &CVector) -> Result<CVector> {
    let coeffs = analysis(f, h)?;
    synthesis(dual, &coeffs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionCheck {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub holds: bool,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// Evaluates both sides of the partition inequality for a Riesz sequence.
pub fn partition_inequality_check(
    f: &VectorFamily,
    partition: &[Vec<usize>],
    a: &CVector,
) -> Result<PartitionCheck> {
    if a.len() != f.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: a.len(),
        });
    }
    let mut seen = vec![false; f.len()];
    for part in partition {
        for &i in part {
            if i >= f.len() {
                return Err(Error::InvalidPartition(format!("index {i} out of range")));
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPartition(format!("index {i} appears twice")));
            }
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("index {missing} not covered")));
    }
    let bounds = riesz_bounds(f)?;
    if bounds.lower <= EIGEN_REL_TOL * bounds.upper {
        return Err(Error::ZeroLowerBound);
    }
    let (lo, hi) = (bounds.lower, bounds.upper);
    let mid = (f.matrix() * a).norm_squared();
    let parts: f64 = partition
        .iter()
        .map(|part| {
            let mut acc = CVector::zeros(f.dimension());
            for &i in part {
                acc += f.matrix().column(i) * a[i];
            }
            acc.norm_squared()
        })
        .sum();
    let lhs = lo / hi * parts;
    let rhs = hi / lo * parts;
    let tol = 1e-9 * mid.max(parts).max(1.0);
    Ok(PartitionCheck {
        lhs,
        mid,
        rhs,
        holds: lhs <= mid + tol && mid <= rhs + tol,
        lower_bound: lo,
        upper_bound: hi,
    })
}
