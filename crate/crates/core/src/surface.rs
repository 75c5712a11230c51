//! Coefficient state of a hybrid relay/reflecting surface and the power drawn
//! by its active (amplify-and-forward) elements.

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ZERO};

/// Slack allowed on the unit-modulus check of passive elements.
pub const PASSIVE_MODULUS_TOL: f64 = 1e-12;

/// Diagonal surface coefficients `theta_n` plus the set of active elements.
///
/// Passive elements carry a pure phase, `|theta_n| = 1`. Active elements carry
/// `|beta_n| e^{j mu_n}` with the amplitude set by the relay power budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCoefficients {
    theta: Vec<Complex64>,
    active: Vec<bool>,
    active_set: Vec<usize>,
}

impl SurfaceCoefficients {
    /// `active_set` holds zero-based element indices; it is sorted and deduplicated here.
    pub fn new(theta: Vec<Complex64>, active_set: &[usize]) -> Result<Self> {
        let coeffs = Self::new_unchecked(theta, active_set)?;
        for n in 0..coeffs.len() {
            if !coeffs.active[n] && (coeffs.theta[n].norm() - 1.0).abs() > PASSIVE_MODULUS_TOL {
                return Err(Error::domain(format!(
                    "passive element {n} has modulus {}, expected 1",
                    coeffs.theta[n].norm()
                )));
            }
        }
        Ok(coeffs)
    }

    /// Builds coefficients from phases and amplitudes; passive amplitudes are ignored.
    pub fn from_polar(phases: &[f64], amplitudes: &[f64], active_set: &[usize]) -> Result<Self> {
        if phases.len() != amplitudes.len() {
            return Err(Error::domain("phase and amplitude vectors differ in length"));
        }
        let mut coeffs = Self::new_unchecked(vec![ZERO; phases.len()], active_set)?;
        for n in 0..phases.len() {
            let amp = if coeffs.active[n] { amplitudes[n] } else { 1.0 };
            if !(amp >= 0.0 && amp.is_finite()) {
                return Err(Error::domain(format!("amplitude of element {n} must be non-negative")));
            }
            coeffs.theta[n] = Complex64::from_polar(amp, phases[n]);
        }
        Ok(coeffs)
    }

    /// All-passive surface with the given phases.
    pub fn passive(phases: &[f64]) -> Self {
        let theta = phases.iter().map(|&mu| Complex64::from_polar(1.0, mu)).collect();
        Self::new_unchecked(theta, &[]).expect("empty active set is always valid")
    }

    /// Skips the passive-modulus check. Used for limit cases such as a zero surface.
    pub(crate) fn new_unchecked(theta: Vec<Complex64>, active_set: &[usize]) -> Result<Self> {
        let n = theta.len();
        let mut active = vec![false; n];
        for &i in active_set {
            if i >= n {
                return Err(Error::domain(format!("active index {i} out of range for {n} elements")));
            }
            active[i] = true;
        }
        let active_set = (0..n).filter(|&i| active[i]).collect();
        Ok(SurfaceCoefficients { theta, active, active_set })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[Complex64] {
        &self.theta
    }

    /// Sorted zero-based indices of the active elements.
    pub fn active_set(&self) -> &[usize] {
        &self.active_set
    }

    pub fn is_active(&self, n: usize) -> bool {
        self.active[n]
    }

    pub fn amplitude(&self, n: usize) -> f64 {
        self.theta[n].norm()
    }

    pub fn phase(&self, n: usize) -> f64 {
        self.theta[n].arg()
    }

    /// `psi_n`: the active part of `theta_n`, zero for passive elements.
    pub fn psi(&self, n: usize) -> Complex64 {
        if self.active[n] {
            self.theta[n]
        } else {
            ZERO
        }
    }

    /// Passive and active splits `(phi, psi)` with `phi + psi = theta`.
    pub fn split(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        self.theta
            .iter()
            .zip(&self.active)
            .map(|(&t, &a)| if a { (ZERO, t) } else { (t, ZERO) })
            .unzip()
    }

    /// Writes `theta_n`. Passive elements must stay on the unit circle.
    pub fn set(&mut self, n: usize, value: Complex64) -> Result<()> {
        if !self.active[n] && (value.norm() - 1.0).abs() > PASSIVE_MODULUS_TOL {
            return Err(Error::domain(format!("passive element {n} would get modulus {}", value.norm())));
        }
        self.theta[n] = value;
        Ok(())
    }

    /// Largest `| |theta_n| - 1 |` over passive elements.
    pub fn passive_modulus_error(&self) -> f64 {
        (0..self.len())
            .filter(|&n| !self.active[n])
            .map(|n| (self.theta[n].norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Power limits of Alice (`pa_max`) and of all active elements together (`pr_max`), in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub pa_max: f64,
    pub pr_max: f64,
}

impl PowerBudget {
    pub fn new(pa_max: f64, pr_max: f64) -> Result<Self> {
        for (name, v) in [("pa_max", pa_max), ("pr_max", pr_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(PowerBudget { pa_max, pr_max })
    }
}

/// Which surface elements act as relays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivePlacement {
    /// The first `K` elements.
    #[default]
    First,
    /// `K` elements drawn uniformly without replacement from the given seed.
    Random,
}

pub fn select_active_set(n: usize, k: usize, placement: ActivePlacement, seed: u64) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::domain(format!("active_count {k} exceeds element count {n}")));
    }
    Ok(match placement {
        ActivePlacement::First => (0..k).collect(),
        ActivePlacement::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = sample(&mut rng, n, k).into_vec();
            idx.sort_unstable();
            idx
        }
    })
}

fn column_norm_sq(h_rb: &CMatrix, n: usize) -> f64 {
    h_rb.column(n).iter().map(|z| z.norm_sqr()).sum()
}

/// Per-element relay cost `P_a |b_n|^2 + sigma^2`, with `b_n` the `n`-th column of `h_rb`.
pub fn element_cost(h_rb: &CMatrix, n: usize, pa: f64, noise_var: f64) -> f64 {
    pa * column_norm_sq(h_rb, n) + noise_var
}

/// Total relay power `sum_{n in Q} |psi_n|^2 (P_a |b_n|^2 + sigma^2)`.
pub fn relay_power(coeffs: &SurfaceCoefficients, h_rb: &CMatrix, pa: f64, noise_var: f64) -> f64 {
    coeffs
        .active_set()
        .iter()
        .map(|&n| coeffs.theta[n].norm_sqr() * element_cost(h_rb, n, pa, noise_var))
        .sum()
}

/// Relay power committed by every active element except `excluded`.
pub fn residual_power(
    coeffs: &SurfaceCoefficients,
    h_rb: &CMatrix,
    pa: f64,
    noise_var: f64,
    excluded: usize,
) -> Result<f64> {
    if excluded >= coeffs.len() || !coeffs.is_active(excluded) {
        return Err(Error::domain(format!("element {excluded} is not active")));
    }
    Ok(coeffs
        .active_set()
        .iter()
        .filter(|&&n| n != excluded)
        .map(|&n| coeffs.theta[n].norm_sqr() * element_cost(h_rb, n, pa, noise_var))
        .sum())
}

/// Largest amplitude an active element may take given the power the others
/// already commit: `sqrt((P_r^max - residual) / (sigma^2 + P_a |b_n|^2))`.
pub fn amplitude_bound(pr_max: f64, residual: f64, pa: f64, b_n_norm_sq: f64, noise_var: f64) -> Result<f64> {
    let slack = pr_max - residual;
    if slack < 0.0 {
        // Rounding from a budget filled to the brim is not an infeasibility.
        if slack >= -1e-12 * pr_max {
            return Ok(0.0);
        }
        return Err(Error::InfeasibleBudget { budget: pr_max, committed: residual });
    }
    Ok((slack / (noise_var + pa * b_n_norm_sq)).sqrt())
}
