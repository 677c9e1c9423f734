use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::{CMatrix, CVector};

/// Largest matrix side for which norms go through a dense SVD.
pub const DENSE_NORM_CAP: usize = 600;

/// Relative eigenvalue tolerance used for PSD clamping and rank decisions on Gram spectra.
pub const EIGEN_REL_TOL: f64 = 1e-9;

/// Rank threshold on singular values, relative to the largest one.
pub const RANK_REL_TOL: f64 = 1e-12;

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    assert!(m.is_square(), "hermitian_eigen needs a square matrix");
    if m.nrows() == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    // Symmetrize to kill round-off asymmetry before the solver sees it.
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    HermitianEigen { values, vectors }
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Smallest eigenvalue of a Hermitian PSD matrix, clamped at zero.
pub fn min_eigenvalue_psd(m: &CMatrix) -> f64 {
    let values = hermitian_eigenvalues(m);
    match values.first() {
        Some(&v) => clamp_psd(v, values.last().copied().unwrap_or(0.0)),
        None => 0.0,
    }
}

/// Clamps tiny negative eigenvalues produced by round-off.
pub fn clamp_psd(value: f64, scale: f64) -> f64 {
    if value < 0.0 && value.abs() <= EIGEN_REL_TOL * scale.abs().max(f64::MIN_POSITIVE) {
        0.0
    } else {
        value.max(0.0)
    }
}

/// Singular values in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = SVD::new(m.clone(), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `a * b` through four real products, which run on the optimized real kernel.
pub fn cmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re: DMatrix<f64> = &ar * &br - &ai * &bi;
    let im: DMatrix<f64> = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// Largest singular value. Dense eigensolve below [`DENSE_NORM_CAP`], power iteration above.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows().min(m.ncols()) <= DENSE_NORM_CAP {
        // top eigenvalue of the smaller Gram side
        let g = if m.nrows() <= m.ncols() { cmul(m, &m.adjoint()) } else { cmul(&m.adjoint(), m) };
        let top = hermitian_eigenvalues(&g).last().copied().unwrap_or(0.0);
        top.max(0.0).sqrt()
    } else {
        power_iteration_norm(m, 1e-8, 10_000)
    }
}

/// Power iteration on `m^H m`, deterministic start vector.
pub fn power_iteration_norm(m: &CMatrix, rel_tol: f64, max_iter: usize) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let mut x = CVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + (i as f64 * 0.618_033_988_75).fract(), 0.0)
    });
    let nx = x.norm();
    x /= Complex64::new(nx, 0.0);
    let mut sigma = 0.0_f64;
    for _ in 0..max_iter {
        let y = m * &x;
        let z = m.ad_mul(&y);
        let nz = z.norm();
        if nz == 0.0 {
            return 0.0;
        }
        let next = y.norm();
        x = z / Complex64::new(nz, 0.0);
        if (next - sigma).abs() <= rel_tol * next {
            return next;
        }
        sigma = next;
    }
    sigma
}

/// Embeds a real matrix into complex scalars.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}
