//! Small complex linear-algebra helpers shared by the metric and optimizer code.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Symmetrize `m` in place as `(m + m^H) / 2`.
pub(crate) fn hermitize(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// `m m^H`, forced exactly Hermitian.
pub(crate) fn gram(m: &CMatrix) -> CMatrix {
    let mut g = m * m.adjoint();
    hermitize(&mut g);
    g
}

/// Adds `scale * v v^H` to `m`.
pub(crate) fn add_outer(m: &mut CMatrix, v: &CVector, scale: f64) {
    let n = v.len();
    for j in 0..n {
        let vj = v[j].conj() * scale;
        for i in 0..n {
            m[(i, j)] += v[i] * vj;
        }
    }
}

pub(crate) fn cholesky(m: &CMatrix, what: &'static str) -> Result<Cholesky<Complex64, Dyn>> {
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite(what))?;
    // The complex square root never fails, so a negative pivot shows up as an
    // imaginary diagonal entry instead of an error.
    let l = chol.l_dirty();
    let positive = (0..m.nrows()).all(|i| {
        let d = l[(i, i)];
        d.re > 0.0 && d.im.abs() <= 1e-8 * d.re
    });
    if positive {
        Ok(chol)
    } else {
        Err(Error::NotPositiveDefinite(what))
    }
}

/// Natural log-determinant of a Hermitian positive-definite matrix.
pub(crate) fn ln_det_hpd(m: &CMatrix, what: &'static str) -> Result<f64> {
    let chol = cholesky(m, what)?;
    let l = chol.l_dirty();
    Ok((0..m.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

pub(crate) fn log2_det_hpd(m: &CMatrix, what: &'static str) -> Result<f64> {
    Ok(ln_det_hpd(m, what)? / std::f64::consts::LN_2)
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Natural log of the pseudo-determinant: sum of `ln` over eigenvalues above
/// `rel_tol` times the largest one. Returns `None` for the zero matrix.
pub(crate) fn ln_pseudo_det(eigenvalues: &[f64], rel_tol: f64) -> Option<f64> {
    let max = eigenvalues.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return None;
    }
    let floor = rel_tol * max;
    Some(eigenvalues.iter().filter(|&&v| v > floor).map(|v| v.ln()).sum())
}

pub(crate) fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn column(m: &CMatrix, j: usize) -> CVector {
    m.column(j).into_owned()
}

/// The `n`-th row of `m` conjugated into a column vector, so that `row = v^H`.
pub(crate) fn conj_row(m: &CMatrix, n: usize) -> CVector {
    CVector::from_iterator(m.ncols(), m.row(n).iter().map(|z| z.conj()))
}
