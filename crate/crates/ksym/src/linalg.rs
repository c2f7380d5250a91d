//! Dense linear-algebra helpers shared by the geometric modules.
//!
//! Everything here is a thin layer over `nalgebra` decompositions: ranks,
//! orthonormal column spaces, null spaces and max-norms for real and
//! complex matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Largest absolute entry of a real matrix.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest modulus of a complex matrix.
pub fn max_abs_c(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

/// Largest absolute entry of a real slice.
pub fn max_abs_slice(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Largest modulus of a complex vector.
pub fn max_abs_cvec(v: &DVector<C64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.norm()))
}

/// Embeds a real matrix into complex entries.
pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| C64::new(x, 0.0))
}

/// Embeds a real vector into complex entries.
pub fn to_complex_vec(v: &DVector<f64>) -> DVector<C64> {
    v.map(|x| C64::new(x, 0.0))
}

/// Real parts of a complex matrix.
pub fn real_part(m: &DMatrix<C64>) -> DMatrix<f64> {
    m.map(|z| z.re)
}

/// Imaginary parts of a complex matrix.
pub fn imag_part(m: &DMatrix<C64>) -> DMatrix<f64> {
    m.map(|z| z.im)
}

/// Number of singular values of `m` strictly above `threshold`.
pub fn rank(m: &DMatrix<f64>, threshold: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > threshold)
        .count()
}

/// Number of singular values of a complex matrix strictly above `threshold`.
pub fn rank_c(m: &DMatrix<C64>, threshold: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .filter(|s| **s > threshold)
        .count()
}

/// Orthonormal basis (as columns) of the column space of `m`.
///
/// Columns are left singular vectors whose singular value exceeds
/// `threshold`, in decreasing singular-value order.
pub fn column_space(m: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > threshold)
        .collect();
    DMatrix::from_fn(rows, keep.len(), |r, c| u[(r, keep[c])])
}

/// Orthonormal basis (as columns) of the column space of a complex matrix.
pub fn column_space_c(m: &DMatrix<C64>, threshold: f64) -> DMatrix<C64> {
    let rows = m.nrows();
    if rows == 0 || m.ncols() == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > threshold)
        .collect();
    DMatrix::from_fn(rows, keep.len(), |r, c| u[(r, keep[c])])
}

/// Orthonormal basis (as columns) of the null space of `m`.
///
/// Singular values at or below `threshold` count as zero.
pub fn null_space(m: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    // Pad with zero rows so the thin SVD returns a full right factor.
    let rows = m.nrows().max(cols);
    let mut padded = DMatrix::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= threshold)
        .collect();
    DMatrix::from_fn(cols, keep.len(), |r, c| vt[(keep[c], r)])
}

/// Orthonormal basis of the intersection of two column spaces, both given
/// by orthonormal columns.
pub fn intersect(a: &DMatrix<f64>, b: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let n = a.nrows();
    if a.ncols() == 0 || b.ncols() == 0 {
        return DMatrix::zeros(n, 0);
    }
    // x = A s = B t  <=>  [A | -B] (s, t) = 0.
    let mut stacked = DMatrix::zeros(n, a.ncols() + b.ncols());
    stacked.view_mut((0, 0), (n, a.ncols())).copy_from(a);
    stacked.view_mut((0, a.ncols()), (n, b.ncols())).copy_from(&(-b));
    let ker = null_space(&stacked, threshold);
    let s = ker.rows(0, a.ncols()).into_owned();
    column_space(&(a * s), threshold)
}

/// Projector onto a subspace spanned by orthonormal columns.
pub fn orthogonal_projector(basis: &DMatrix<f64>) -> DMatrix<f64> {
    basis * basis.transpose()
}

/// Orthonormalizes the columns of `basis` with respect to the inner product
/// `gram` (modified Gram-Schmidt), dropping columns that become dependent.
pub fn gram_schmidt(basis: &DMatrix<f64>, gram: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for c in 0..basis.ncols() {
        let mut v = basis.column(c).into_owned();
        for u in &out {
            let coeff = (u.transpose() * gram * &v)[(0, 0)];
            v -= u * coeff;
        }
        let norm2 = (v.transpose() * gram * &v)[(0, 0)];
        if norm2 > threshold * threshold {
            out.push(v / norm2.sqrt());
        }
    }
    if out.is_empty() {
        DMatrix::zeros(basis.nrows(), 0)
    } else {
        DMatrix::from_columns(&out)
    }
}

/// Horizontally concatenates matrices with a common row count.
pub fn hstack(blocks: &[&DMatrix<f64>], rows: usize) -> DMatrix<f64> {
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut off = 0;
    for b in blocks {
        out.view_mut((0, off), (rows, b.ncols())).copy_from(*b);
        off += b.ncols();
    }
    out
}

/// Column-major vectorization of a square matrix.
pub fn vec_of(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_of`] for an `n`×`n` matrix.
pub fn unvec(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

/// Greatest common divisor.
pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Non-negative representative of `a` modulo `m`.
pub fn modp(a: i64, m: i64) -> i64 {
    ((a % m) + m) % m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_wide_matrix() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = null_space(&m, 1e-10);
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&m * &k)) < 1e-12);
        assert!(max_abs(&(k.transpose() * &k - DMatrix::identity(2, 2))) < 1e-12);
    }

    #[test]
    fn intersection_of_planes_is_a_line() {
        let a = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let b = DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let i = intersect(&a, &b, 1e-10);
        assert_eq!(i.ncols(), 1);
        assert!((i[(1, 0)].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_drops_dependent_columns() {
        let b = DMatrix::from_column_slice(2, 3, &[1.0, 0.0, 2.0, 0.0, 1.0, 1.0]);
        let q = gram_schmidt(&b, &DMatrix::identity(2, 2), 1e-10);
        assert_eq!(q.ncols(), 2);
    }

    #[test]
    fn gcd_and_mod() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(modp(-1, 4), 3);
    }
}
