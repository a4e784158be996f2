//! Small dense linear-algebra helpers shared by the tomography solvers.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Dense complex matrix. Storage is nalgebra's (column-major); every
/// serialized form in this crate is written row-major.
pub type ComplexMatrix = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Singular values below this are discarded by every pseudo-inverse solve.
pub const PINV_CUTOFF: f64 = 1e-10;

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors.into_iter().fold(ComplexMatrix::from_element(1, 1, ONE), |acc, f| acc.kronecker(f))
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `Tr(a b†)` without forming the product.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Rank of a complex matrix counted as singular values above `tol`.
pub fn rank(m: &ComplexMatrix, tol: f64) -> usize {
    m.clone().singular_values().iter().filter(|&&s| s > tol).count()
}

/// Truncated-SVD pseudo-inverse of a real matrix with full column rank.
///
/// Returns [`Error::IllPosed`] if any singular value falls below
/// [`PINV_CUTOFF`], since the least-squares solution would not be unique.
pub fn pinv_full_column_rank(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.nrows() < a.ncols() {
        return Err(Error::IllPosed(format!(
            "{} rows cannot determine {} unknowns",
            a.nrows(),
            a.ncols()
        )));
    }
    let svd = a.clone().svd(true, true);
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if smin < PINV_CUTOFF {
        return Err(Error::IllPosed(format!("smallest singular value {smin:e} below cutoff")));
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let inv_s = DVector::from_iterator(
        svd.singular_values.len(),
        svd.singular_values.iter().map(|&s| 1.0 / s),
    );
    // V Σ⁻¹ Uᵀ
    let mut v = v_t.transpose();
    for (j, mut col) in v.column_iter_mut().enumerate() {
        col *= inv_s[j];
    }
    Ok(v * u.transpose())
}

/// Singular values of a real matrix, descending.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_recovers_least_squares_solution() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 2.0, 1.0, 1.0]);
        let x = DVector::from_vec(vec![0.5, -1.5]);
        let b = &a * &x;
        let p = pinv_full_column_rank(&a).unwrap();
        let xh = p * b;
        assert!((xh - x).amax() < 1e-12);
    }

    #[test]
    fn pinv_rejects_rank_deficiency() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(pinv_full_column_rank(&a), Err(Error::IllPosed(_))));
        let wide = DMatrix::<f64>::zeros(1, 2);
        assert!(matches!(pinv_full_column_rank(&wide), Err(Error::IllPosed(_))));
    }

    #[test]
    fn kron_dimensions_and_entries() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
        let b = identity(3);
        let k = kron(&a, &b);
        assert_eq!(k.shape(), (6, 6));
        assert_eq!(k[(4, 4)], -ONE);
        assert_eq!(kron_all([&a, &b]), k);
    }
}
