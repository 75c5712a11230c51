//! Per-element decomposition of the rate upper bound.
//!
//! With every coefficient except `theta_n` held fixed,
//! `f0 = log2|A_n + |theta_n|^2 B_n + theta_n C_n + conj(theta_n) C_n^H|`
//! where, writing `b_n` for column `n` of `H_rb`, `a_n^H` for row `n` of
//! `H_ar` and `S_n = sum_{i != n} theta_i b_i a_i^H + H_ab`:
//!
//! ```text
//! A_n = I + s sum_{i in Q, i != n} |theta_i|^2 b_i b_i^H + rho S_n S_n^H
//! B_n = (rho |a_n|^2 + s [n in Q]) b_n b_n^H
//! C_n = rho b_n (S_n a_n)^H
//! ```
//!
//! and `s = sigma_r^2 / sigma_b^2` (one under equal noise powers).

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{add_outer, column, conj_row, gram, hermitize, log2_det_hpd, CMatrix, CVector};
use crate::metrics::{check_dims, effective_channel};
use crate::surface::SurfaceCoefficients;

/// `A_n`, `B_n`, `C_n` for one element; none of them depends on `theta_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementContext {
    pub index: usize,
    pub active: bool,
    pub a_mat: CMatrix,
    pub b_mat: CMatrix,
    pub c_mat: CMatrix,
}

impl ElementContext {
    /// `A_n + |theta|^2 B_n + theta C_n + conj(theta) C_n^H`, exactly Hermitian.
    pub fn objective_matrix(&self, theta: Complex64) -> CMatrix {
        let mut m = &self.a_mat + &self.b_mat * Complex64::new(theta.norm_sqr(), 0.0) + &self.c_mat * theta
            + self.c_mat.adjoint() * theta.conj();
        hermitize(&mut m);
        m
    }

    /// The rate upper bound, in bits, as a function of this element's coefficient.
    pub fn objective(&self, theta: Complex64) -> Result<f64> {
        log2_det_hpd(&self.objective_matrix(theta), "per-element objective")
    }
}

/// Running sums that let a sweep build each context without touching all `N` elements.
#[derive(Debug, Clone)]
pub(crate) struct Aggregates {
    /// `H_rb Theta H_ar + H_ab`.
    pub cascade: CMatrix,
    /// `I + s sum_{i in Q} |theta_i|^2 b_i b_i^H`.
    pub relay_noise: CMatrix,
}

impl Aggregates {
    pub fn new(coeffs: &SurfaceCoefficients, channels: &ChannelSet) -> Result<Self> {
        check_dims(coeffs, channels)?;
        let nb = channels.n_bob();
        let ratio = noise_ratio(channels);
        let mut relay_noise = CMatrix::identity(nb, nb);
        for &n in coeffs.active_set() {
            add_outer(&mut relay_noise, &column(&channels.h_rb, n), ratio * coeffs.theta()[n].norm_sqr());
        }
        Ok(Aggregates {
            cascade: effective_channel(coeffs, &channels.h_rb, &channels.h_ar, &channels.h_ab),
            relay_noise,
        })
    }
}

pub(crate) fn noise_ratio(channels: &ChannelSet) -> f64 {
    channels.sigma_r_sq / channels.sigma_b_sq
}

/// Pieces of a context that a sweep needs to fold the new coefficient back in.
pub(crate) struct Parts {
    pub ctx: ElementContext,
    pub b_n: CVector,
    pub a_n: CVector,
    pub cascade_without: CMatrix,
    pub relay_without: CMatrix,
}

pub(crate) fn context_from(
    n: usize,
    coeffs: &SurfaceCoefficients,
    channels: &ChannelSet,
    rho: f64,
    agg: &Aggregates,
) -> Parts {
    let b_n = column(&channels.h_rb, n);
    let a_n = conj_row(&channels.h_ar, n);
    let theta = coeffs.theta()[n];
    let active = coeffs.is_active(n);
    let ratio = noise_ratio(channels);

    let cascade_without = &agg.cascade - (&b_n * a_n.adjoint()) * theta;
    let mut relay_without = agg.relay_noise.clone();
    if active {
        add_outer(&mut relay_without, &b_n, -ratio * theta.norm_sqr());
    }

    let mut a_mat = &relay_without + gram(&cascade_without) * Complex64::new(rho, 0.0);
    hermitize(&mut a_mat);

    let b_weight = rho * a_n.norm_squared() + if active { ratio } else { 0.0 };
    let mut b_mat = CMatrix::zeros(b_n.len(), b_n.len());
    add_outer(&mut b_mat, &b_n, b_weight);

    let s_a = &cascade_without * &a_n;
    let c_mat = (&b_n * s_a.adjoint()) * Complex64::new(rho, 0.0);

    Parts {
        ctx: ElementContext { index: n, active, a_mat, b_mat, c_mat },
        b_n,
        a_n,
        cascade_without,
        relay_without,
    }
}

/// Builds `A_n`, `B_n`, `C_n` for element `n` from the current coefficients.
pub fn build_element_context(
    n: usize,
    coeffs: &SurfaceCoefficients,
    channels: &ChannelSet,
    rho: f64,
) -> Result<ElementContext> {
    if n >= coeffs.len() {
        return Err(Error::domain(format!("element {n} out of range for {} elements", coeffs.len())));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::domain(format!("rho must be positive, got {rho}")));
    }
    let agg = Aggregates::new(coeffs, channels)?;
    Ok(context_from(n, coeffs, channels, rho, &agg).ctx)
}
