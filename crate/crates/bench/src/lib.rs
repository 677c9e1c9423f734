//! Deterministic inputs shared by the benchmarks.

use frametk::{CMatrix, Complex64, VectorFamily};

/// Unit-norm columns with entries `cos(a r + b c) + i sin(b r - a c)` for fixed irrational `a, b`.
pub fn dense_family(m: usize, n: usize) -> VectorFamily {
    let (a, b) = (0.754_877_666, 0.569_840_291);
    let mut mat = CMatrix::from_fn(m, n, |r, c| {
        let (r, c) = (r as f64 + 1.0, c as f64 + 1.0);
        Complex64::new((a * r * r + b * c).cos(), (b * r - a * c * c).sin())
    });
    for mut col in mat.column_iter_mut() {
        let s = col.norm();
        col /= Complex64::from(s);
    }
    VectorFamily::from_matrix(mat).expect("nonempty")
}
