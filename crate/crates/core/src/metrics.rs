//! Covert rate at Bob, its log-det upper bound, Willie's SINR and the KL
//! divergence used as the covertness measure.
//!
//! Rates are in bits per channel use (log base 2). The KL divergence is in
//! nats, matching the `2 eps^2` covertness threshold.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{add_outer, column, gram, hermitian_eigenvalues, ln_pseudo_det, log2_det_hpd, CMatrix};
use crate::surface::SurfaceCoefficients;

/// Eigenvalues at or below this fraction of the largest one are treated as
/// zero when forming pseudo-determinants.
pub const PDET_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    /// Covert rate `log2|I + rho U_b R^-1|`.
    pub rate_bits: f64,
    /// Upper bound `log2|R + rho U_b|`.
    pub rate_upper_bits: f64,
    /// `log2|R|`, the gap between the two.
    pub noise_cov_logdet: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionReport {
    pub gamma_w: f64,
    /// KL divergence in nats.
    pub d01: f64,
    /// Ascending eigenvalues of Willie's signal covariance `U_w`.
    pub eigenvalues_uw: Vec<f64>,
    /// Ascending eigenvalues of Willie's noise-shaping matrix `M`.
    pub eigenvalues_m: Vec<f64>,
}

pub(crate) fn check_dims(coeffs: &SurfaceCoefficients, channels: &ChannelSet) -> Result<()> {
    if coeffs.len() != channels.n_elements() {
        return Err(Error::domain(format!(
            "surface has {} coefficients but the channels describe {} elements",
            coeffs.len(),
            channels.n_elements()
        )));
    }
    Ok(())
}

fn check_power(pa: f64) -> Result<()> {
    if !(pa >= 0.0 && pa.is_finite()) {
        return Err(Error::domain(format!("transmit power must be non-negative, got {pa}")));
    }
    Ok(())
}

/// `h_r Theta h_ar + h_direct`.
pub(crate) fn effective_channel(coeffs: &SurfaceCoefficients, h_r: &CMatrix, h_ar: &CMatrix, h_direct: &CMatrix) -> CMatrix {
    let mut scaled = h_ar.clone();
    for (n, &theta) in coeffs.theta().iter().enumerate() {
        for z in scaled.row_mut(n).iter_mut() {
            *z *= theta;
        }
    }
    h_r * scaled + h_direct
}

/// `I + ratio * h_r Psi Psi^H h_r^H`.
fn relay_noise_shaping(coeffs: &SurfaceCoefficients, h_r: &CMatrix, ratio: f64) -> CMatrix {
    let dim = h_r.nrows();
    let mut m = CMatrix::identity(dim, dim);
    for &n in coeffs.active_set() {
        add_outer(&mut m, &column(h_r, n), ratio * coeffs.theta()[n].norm_sqr());
    }
    m
}

/// Bob's signal covariance `U_b = (H_rb Theta H_ar + H_ab)(.)^H`.
pub fn signal_covariance_bob(coeffs: &SurfaceCoefficients, channels: &ChannelSet) -> Result<CMatrix> {
    check_dims(coeffs, channels)?;
    Ok(gram(&effective_channel(coeffs, &channels.h_rb, &channels.h_ar, &channels.h_ab)))
}

/// Bob's normalized noise covariance `R = I + H_rb Psi Psi^H H_rb^H`
/// (relay noise scaled by `sigma_r^2 / sigma_b^2` when the two differ).
pub fn noise_covariance_bob(coeffs: &SurfaceCoefficients, channels: &ChannelSet) -> Result<CMatrix> {
    check_dims(coeffs, channels)?;
    Ok(relay_noise_shaping(coeffs, &channels.h_rb, channels.sigma_r_sq / channels.sigma_b_sq))
}

/// Both rates and their gap in one pass.
pub fn rate_report(coeffs: &SurfaceCoefficients, channels: &ChannelSet, pa: f64) -> Result<RateReport> {
    check_power(pa)?;
    let u_b = signal_covariance_bob(coeffs, channels)?;
    let r = noise_covariance_bob(coeffs, channels)?;
    let rho = pa / channels.sigma_b_sq;
    let noise_cov_logdet = log2_det_hpd(&r, "noise covariance R")?;
    let rate_upper_bits = log2_det_hpd(&(r + u_b * Complex64::new(rho, 0.0)), "R + rho U_b")?;
    // log2|I + rho U R^-1| = log2|R + rho U| - log2|R|; both terms are >= 0.
    let rate_bits = (rate_upper_bits - noise_cov_logdet).max(0.0);
    Ok(RateReport { rate_bits, rate_upper_bits, noise_cov_logdet })
}

/// Covert rate `log2|I + (P_a / sigma_b^2) U_b R^-1|` in bits per channel use.
pub fn covert_rate(coeffs: &SurfaceCoefficients, channels: &ChannelSet, pa: f64) -> Result<f64> {
    Ok(rate_report(coeffs, channels, pa)?.rate_bits)
}

/// Upper bound `f0 = log2|R + rho U_b|`, tight when no element is active.
pub fn rate_upper_bound(coeffs: &SurfaceCoefficients, channels: &ChannelSet, pa: f64) -> Result<f64> {
    check_power(pa)?;
    let u_b = signal_covariance_bob(coeffs, channels)?;
    let r = noise_covariance_bob(coeffs, channels)?;
    log2_det_hpd(&(r + u_b * Complex64::new(pa / channels.sigma_b_sq, 0.0)), "R + rho U_b")
}

/// Willie's signal covariance `U_w` and noise-shaping matrix `M`.
pub fn willie_covariances(coeffs: &SurfaceCoefficients, channels: &ChannelSet) -> Result<(CMatrix, CMatrix)> {
    check_dims(coeffs, channels)?;
    let u_w = gram(&effective_channel(coeffs, &channels.h_rw, &channels.h_ar, &channels.h_aw));
    let m = relay_noise_shaping(coeffs, &channels.h_rw, channels.sigma_r_sq / channels.sigma_w_sq);
    Ok((u_w, m))
}

/// Power-independent factor `g` of Willie's SINR, `gamma_w = g P_a`, with
/// `g = pdet(U_w) / (pdet(M) sigma_w^2)`.
pub fn willie_gain(coeffs: &SurfaceCoefficients, channels: &ChannelSet) -> Result<f64> {
    let (u_w, m) = willie_covariances(coeffs, channels)?;
    Ok(gain_from_eigenvalues(&hermitian_eigenvalues(&u_w), &hermitian_eigenvalues(&m), channels.sigma_w_sq))
}

fn gain_from_eigenvalues(eig_uw: &[f64], eig_m: &[f64], sigma_w_sq: f64) -> f64 {
    match (ln_pseudo_det(eig_uw, PDET_REL_TOL), ln_pseudo_det(eig_m, PDET_REL_TOL)) {
        (Some(ln_uw), Some(ln_m)) => (ln_uw - ln_m - sigma_w_sq.ln()).exp(),
        _ => 0.0,
    }
}

/// Willie's SINR `pdet(U_w) P_a / (pdet(M) sigma_w^2)`.
pub fn willie_sinr(coeffs: &SurfaceCoefficients, channels: &ChannelSet, pa: f64) -> Result<f64> {
    check_power(pa)?;
    Ok(willie_gain(coeffs, channels)? * pa)
}

pub fn detection_report(coeffs: &SurfaceCoefficients, channels: &ChannelSet, pa: f64, l: u32) -> Result<DetectionReport> {
    check_power(pa)?;
    let (u_w, m) = willie_covariances(coeffs, channels)?;
    let eigenvalues_uw = hermitian_eigenvalues(&u_w);
    let eigenvalues_m = hermitian_eigenvalues(&m);
    let gamma_w = gain_from_eigenvalues(&eigenvalues_uw, &eigenvalues_m, channels.sigma_w_sq) * pa;
    Ok(DetectionReport { gamma_w, d01: kl_divergence(gamma_w, l)?, eigenvalues_uw, eigenvalues_m })
}

/// Below this SINR the KL divergence is summed as a series to avoid the
/// cancellation in `ln(1+g) - g/(1+g)`.
const KL_SERIES_THRESHOLD: f64 = 0.05;

/// `L [ln(1 + g) - g / (1 + g)]` in nats.
pub fn kl_divergence(gamma_w: f64, l: u32) -> Result<f64> {
    if gamma_w.is_nan() || gamma_w < 0.0 {
        return Err(Error::domain(format!("SINR must be non-negative, got {gamma_w}")));
    }
    if l == 0 {
        return Err(Error::domain("number of channel uses must be at least 1"));
    }
    let per_use = if gamma_w < KL_SERIES_THRESHOLD {
        // sum_{k>=2} (-1)^k (k-1)/k g^k
        let mut term = gamma_w;
        let mut acc = 0.0;
        for k in 2..=24 {
            term *= -gamma_w;
            let kf = k as f64;
            acc += -term * (kf - 1.0) / kf;
        }
        acc
    } else {
        gamma_w.ln_1p() - gamma_w / (1.0 + gamma_w)
    };
    Ok(f64::from(l) * per_use)
}
