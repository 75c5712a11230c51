//! Eigen-structure of numerically rank-one matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, CMatrix, CVector, ZERO};

/// Default relative tolerance on the second singular component.
pub const RANK_TOL: f64 = 1e-10;

/// Rank-one factorization `m = right * left^H` of a matrix together with its
/// only non-zero eigenvalue `value = left^H right`.
///
/// `right` is the eigenvector of `value`; `left / conj(value)` is the matching
/// row of the inverse similarity transform, so the pair is biorthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneEigen {
    pub value: Complex64,
    pub right: CVector,
    pub left: CVector,
}

/// The eigenvalue of largest modulus of a matrix of numerical rank at most one.
///
/// The matrix is factored from its largest column; if the remainder exceeds
/// `tol` relative to the matrix norm the rank assumption is reported as
/// violated. The zero matrix yields a zero eigenvalue.
pub fn sole_nonzero_eigenvalue(m: &CMatrix, tol: f64) -> Result<RankOneEigen> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(Error::domain(format!("expected a square matrix, got {rows}x{cols}")));
    }
    let norm = frobenius(m);
    if norm == 0.0 {
        return Ok(RankOneEigen { value: ZERO, right: CVector::zeros(rows), left: CVector::zeros(rows) });
    }
    let pivot = (0..cols)
        .map(|j| (j, m.column(j).norm_squared()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(j, _)| j)
        .unwrap_or(0);
    let right: CVector = m.column(pivot).into_owned();
    let scale = right.norm_squared();
    // left^H = right^H m / |right|^2, so that m ~ right left^H
    let left: CVector = (m.adjoint() * &right) / Complex64::new(scale, 0.0);
    let residual = frobenius(&(m - &right * left.adjoint())) / norm;
    if residual > tol {
        return Err(Error::Rank { residual, tol });
    }
    let value = left.dotc(&right);
    Ok(RankOneEigen { value, right, left })
}

/// Product `v' v` of the first-row/first-column entries produced when the
/// similarity transform that diagonalizes the rank-one matrix is applied to
/// `partner`: the `(1,1)` entry of `T^-1 partner T`, divided by `conj(value)`.
///
/// `None` when the eigenvalue is zero and the transform does not exist.
pub fn similarity_coupling(eig: &RankOneEigen, partner: &CMatrix) -> Option<Complex64> {
    let mag_sq = eig.value.norm_sqr();
    if mag_sq == 0.0 {
        return None;
    }
    Some(eig.left.dotc(&(partner * &eig.right)) / mag_sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> CVector {
        CVector::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn trace_of_simple_outer_product() {
        let u = CVector::from_vec(vec![c(1.0, 0.0), ZERO]);
        let w = CVector::from_vec(vec![c(2.0, 0.0), ZERO]);
        let eig = sole_nonzero_eigenvalue(&(&u * w.adjoint()), RANK_TOL).unwrap();
        assert_relative_eq!(eig.value.re, 2.0, max_relative = 1e-15);
        assert_eq!(eig.value.im, 0.0);
    }

    #[test]
    fn zero_matrix() {
        let eig = sole_nonzero_eigenvalue(&CMatrix::zeros(3, 3), RANK_TOL).unwrap();
        assert_eq!(eig.value, ZERO);
        assert!(similarity_coupling(&eig, &CMatrix::identity(3, 3)).is_none());
    }

    #[test]
    fn random_rank_one_matches_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let m = &random_vec(&mut rng, 4) * random_vec(&mut rng, 4).adjoint();
            let eig = sole_nonzero_eigenvalue(&m, RANK_TOL).unwrap();
            assert!((eig.value - m.trace()).norm() <= 1e-10 * m.trace().norm());
            // eigenvector check
            let lhs = &m * &eig.right;
            let rhs = &eig.right * eig.value;
            assert!(frobenius(&CMatrix::from_column_slice(4, 1, (lhs - rhs).as_slice())) < 1e-12);
        }
    }

    #[test]
    fn rank_two_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = &random_vec(&mut rng, 3) * random_vec(&mut rng, 3).adjoint()
            + &random_vec(&mut rng, 3) * random_vec(&mut rng, 3).adjoint();
        assert!(matches!(sole_nonzero_eigenvalue(&m, RANK_TOL), Err(Error::Rank { .. })));
        assert!(sole_nonzero_eigenvalue(&CMatrix::zeros(2, 3), RANK_TOL).is_err());
    }

    #[test]
    fn coupling_of_self_adjoint_pair() {
        // For X = u w^H and partner X^H = w u^H the coupling is |u|^2 |w|^2 / |w^H u|^2 >= 1.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (u, w) = (random_vec(&mut rng, 4), random_vec(&mut rng, 4));
            let m = &u * w.adjoint();
            let eig = sole_nonzero_eigenvalue(&m, RANK_TOL).unwrap();
            let vv = similarity_coupling(&eig, &m.adjoint()).unwrap();
            let expect = u.norm_squared() * w.norm_squared() / w.dotc(&u).norm_sqr();
            assert_relative_eq!(vv.re, expect, max_relative = 1e-10);
            assert!(vv.im.abs() < 1e-10 * expect);
        }
    }
}
