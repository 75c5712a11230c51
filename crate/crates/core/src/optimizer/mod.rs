//! Alternating optimization of the surface coefficients and Alice's power.
//!
//! For fixed power, each coefficient is updated in closed form in turn: the
//! phase aligns with the sole non-zero eigenvalue `lambda_n` of
//! `(A_n + |theta_n|^2 B_n)^-1 C_n`, passive elements keep unit modulus and
//! active elements take the largest amplitude the relay budget leaves them.
//! For fixed coefficients, the power is the largest one meeting the KL
//! covertness constraint. The two blocks alternate until the rate upper bound
//! settles.

mod context;
mod eigen;
mod power;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{add_outer, cholesky, log2_det_hpd, CMatrix};
use crate::metrics::{check_dims, detection_report, rate_report};
use crate::params::SystemParams;
use crate::surface::{
    amplitude_bound, element_cost, relay_power, residual_power, select_active_set, PowerBudget, SurfaceCoefficients,
};

pub use context::{build_element_context, ElementContext};
pub use eigen::{similarity_coupling, sole_nonzero_eigenvalue, RankOneEigen, RANK_TOL};
pub use power::{bisect_increasing, solve_pa, PowerSolution};

use context::{context_from, noise_ratio, Aggregates};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoSettings {
    pub max_outer_iters: usize,
    /// Element sweeps per power update.
    pub max_sweeps: usize,
    /// Stop once the relative change of the rate bound between outer iterations drops below this.
    pub rel_tol: f64,
    /// Relative residual of the KL root solve.
    pub bisection_tol: f64,
    pub init_seed: u64,
}

impl Default for AoSettings {
    fn default() -> Self {
        AoSettings { max_outer_iters: 50, max_sweeps: 1, rel_tol: 1e-6, bisection_tol: 1e-10, init_seed: 0 }
    }
}

impl AoSettings {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iters == 0 || self.max_sweeps == 0 {
            return Err(Error::Config("iteration counts must be positive".into()));
        }
        for (name, v) in [("rel_tol", self.rel_tol), ("bisection_tol", self.bisection_tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateDiagnostics {
    /// Sole non-zero eigenvalue of `A_n^-1 B_n`.
    pub iota: f64,
    /// Sole non-zero eigenvalue of `E_n^-1 C_n`, `E_n = A_n + |theta_n|^2 B_n`.
    pub lambda: Complex64,
    /// `v_n' v_n` from the transform diagonalizing `E_n^-1 C_n`; `None` when `lambda = 0`.
    pub vnp_vn: Option<Complex64>,
    pub objective_before: f64,
    pub objective_after: f64,
}

/// Closed-form phase for a given amplitude: `r exp(-j arg(lambda))`, phase 0 if `lambda = 0`.
pub fn aligned_coefficient(amplitude: f64, lambda: Complex64) -> Complex64 {
    if lambda.norm_sqr() == 0.0 {
        Complex64::new(amplitude, 0.0)
    } else {
        Complex64::from_polar(amplitude, -lambda.arg())
    }
}

/// `log2(1 + r^2 |lambda|^2 + 2 Re(theta lambda) - r^2 v'v |lambda|^2)` with `r = |theta|`.
///
/// For unit-modulus `theta` this is the familiar `1 + |lambda|^2 + 2 Re(theta lambda) - v'v |lambda|^2`.
pub fn rank_one_log_det(theta: Complex64, lambda: Complex64, vnp_vn: Complex64) -> f64 {
    let r_sq = theta.norm_sqr();
    let lam_sq = lambda.norm_sqr();
    (1.0 + r_sq * lam_sq + 2.0 * (theta * lambda).re - r_sq * vnp_vn.re * lam_sq).log2()
}

/// Closed-form update of a single coefficient against a prebuilt context.
pub(crate) fn update_with_context(
    ctx: &ElementContext,
    current: Complex64,
    amplitude: f64,
) -> Result<(Complex64, UpdateDiagnostics)> {
    let objective_before = ctx.objective(current)?;

    let a_chol = cholesky(&ctx.a_mat, "A_n")?;
    let iota = sole_nonzero_eigenvalue(&a_chol.solve(&ctx.b_mat), RANK_TOL)?.value.re;

    let e_mat = &ctx.a_mat + &ctx.b_mat * Complex64::new(amplitude * amplitude, 0.0);
    let e_chol = cholesky(&e_mat, "E_n")?;
    let eig = sole_nonzero_eigenvalue(&e_chol.solve(&ctx.c_mat), RANK_TOL)?;
    let vnp_vn = similarity_coupling(&eig, &e_chol.solve(&ctx.c_mat.adjoint()));

    let theta = aligned_coefficient(amplitude, eig.value);
    let objective_after = ctx.objective(theta)?;
    Ok((theta, UpdateDiagnostics { iota, lambda: eig.value, vnp_vn, objective_before, objective_after }))
}

fn active_amplitude(coeffs: &SurfaceCoefficients, channels: &ChannelSet, n: usize, budget: &PowerBudget, pa: f64) -> Result<f64> {
    let residual = residual_power(coeffs, &channels.h_rb, pa, channels.sigma_r_sq, n)?;
    let b_sq = channels.h_rb.column(n).norm_squared();
    amplitude_bound(budget.pr_max, residual, pa, b_sq, channels.sigma_r_sq)
}

fn check_pa(pa: f64) -> Result<f64> {
    if !(pa > 0.0 && pa.is_finite()) {
        return Err(Error::domain(format!("transmit power must be positive, got {pa}")));
    }
    Ok(pa)
}

/// Optimal coefficient for element `n` with all others held fixed.
pub fn update_element(
    n: usize,
    coeffs: &SurfaceCoefficients,
    channels: &ChannelSet,
    budget: &PowerBudget,
    pa: f64,
) -> Result<(Complex64, UpdateDiagnostics)> {
    let rho = check_pa(pa)? / channels.sigma_b_sq;
    let ctx = build_element_context(n, coeffs, channels, rho)?;
    let amplitude = if coeffs.is_active(n) { active_amplitude(coeffs, channels, n, budget, pa)? } else { 1.0 };
    update_with_context(&ctx, coeffs.theta()[n], amplitude)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Rate bound before the first update followed by its value after each element update.
    pub objectives: Vec<f64>,
    pub diagnostics: Vec<UpdateDiagnostics>,
}

impl SweepReport {
    pub fn f0_after(&self) -> f64 {
        *self.objectives.last().expect("objectives always hold the starting value")
    }
}

/// One pass of [`update_element`] over elements `0..N` in order, writing each
/// new coefficient back before moving on.
pub fn sweep_elements(
    coeffs: &mut SurfaceCoefficients,
    channels: &ChannelSet,
    budget: &PowerBudget,
    pa: f64,
) -> Result<SweepReport> {
    let rho = check_pa(pa)? / channels.sigma_b_sq;
    let mut agg = Aggregates::new(coeffs, channels)?;
    let ratio = noise_ratio(channels);
    let mut objectives = Vec::with_capacity(coeffs.len() + 1);
    let mut diagnostics = Vec::with_capacity(coeffs.len());
    objectives.push(log2_det_hpd(
        &(&agg.relay_noise + crate::linalg::gram(&agg.cascade) * Complex64::new(rho, 0.0)),
        "R + rho U_b",
    )?);

    for n in 0..coeffs.len() {
        let parts = context_from(n, coeffs, channels, rho, &agg);
        let amplitude = if coeffs.is_active(n) { active_amplitude(coeffs, channels, n, budget, pa)? } else { 1.0 };
        let (theta, diag) = update_with_context(&parts.ctx, coeffs.theta()[n], amplitude)?;
        coeffs.set(n, theta)?;

        agg.cascade = parts.cascade_without + (&parts.b_n * parts.a_n.adjoint()) * theta;
        agg.relay_noise = parts.relay_without;
        if coeffs.is_active(n) {
            add_outer(&mut agg.relay_noise, &parts.b_n, ratio * theta.norm_sqr());
        }
        objectives.push(diag.objective_after);
        diagnostics.push(diag);
    }
    Ok(SweepReport { objectives, diagnostics })
}

/// Largest power at which the current active coefficients stay within `pr_max`.
pub fn relay_power_cap(coeffs: &SurfaceCoefficients, channels: &ChannelSet, pr_max: f64) -> Result<f64> {
    let (mut weight, mut noise_part) = (0.0, 0.0);
    for &n in coeffs.active_set() {
        let amp_sq = coeffs.theta()[n].norm_sqr();
        weight += amp_sq * channels.h_rb.column(n).norm_squared();
        noise_part += amp_sq * channels.sigma_r_sq;
    }
    if noise_part > pr_max * (1.0 + 1e-12) {
        return Err(Error::InfeasibleBudget { budget: pr_max, committed: noise_part });
    }
    Ok(if weight == 0.0 { f64::INFINITY } else { ((pr_max - noise_part) / weight).max(0.0) })
}

/// Random phases; active amplitudes split the relay budget equally at power `pa`.
fn equal_split(phases: &[f64], active: &[usize], channels: &ChannelSet, budget: &PowerBudget, pa: f64) -> Result<SurfaceCoefficients> {
    let share = budget.pr_max / active.len().max(1) as f64;
    let amps: Vec<f64> = (0..phases.len())
        .map(|n| (share / element_cost(&channels.h_rb, n, pa, channels.sigma_r_sq)).sqrt())
        .collect();
    SurfaceCoefficients::from_polar(phases, &amps, active)
}

/// Multiplies every active coefficient by the common factor that makes the
/// relay power at `pa` equal to `pr_max`. Coefficients drawing no power are
/// returned unchanged.
pub fn fit_relay_budget(coeffs: &SurfaceCoefficients, channels: &ChannelSet, pr_max: f64, pa: f64) -> Result<SurfaceCoefficients> {
    let used = relay_power(coeffs, &channels.h_rb, pa, channels.sigma_r_sq);
    let mut fitted = coeffs.clone();
    if used > 0.0 {
        let factor = (pr_max / used).sqrt();
        for &n in coeffs.active_set() {
            fitted.set(n, coeffs.theta()[n] * factor)?;
        }
    }
    Ok(fitted)
}

const MAX_POWER_FIXED_POINT: usize = 100;

/// Power block of the alternation: the largest `P_a` that meets the
/// covertness constraint once the active gains are rescaled to spend the
/// whole relay budget at that same `P_a`.
///
/// Lowering `P_a` frees relay budget, which raises the active gains and with
/// them Willie's SINR, so the two are solved as a fixed point. The iteration
/// starts at `pa_max` and can only move down; every iterate is feasible for
/// both budgets and the covertness constraint.
fn power_block(
    coeffs: &SurfaceCoefficients,
    channels: &ChannelSet,
    params: &SystemParams,
    settings: &AoSettings,
) -> Result<(SurfaceCoefficients, f64)> {
    let solve = |c: &SurfaceCoefficients, limit: f64| {
        solve_pa(c, channels, params.epsilon, params.channel_uses, limit, settings.bisection_tol)
    };
    if coeffs.active_set().is_empty() {
        return Ok((coeffs.clone(), solve(coeffs, params.pa_max)?.pa));
    }
    let mut pa = params.pa_max;
    for round in 1..=MAX_POWER_FIXED_POINT {
        let fitted = fit_relay_budget(coeffs, channels, params.pr_max, pa)?;
        let limit = params.pa_max.min(relay_power_cap(&fitted, channels, params.pr_max)?);
        let next = solve(&fitted, limit)?.pa;
        if (pa - next).abs() <= 1e-12 * pa || round == MAX_POWER_FIXED_POINT {
            return Ok((fitted, next));
        }
        pa = next;
    }
    unreachable!("the last round always returns")
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    /// Power used by the element sweeps of this iteration.
    pub pa_sweep: f64,
    /// Power after the covertness solve that closes the iteration.
    pub pa_after: f64,
    pub sweeps: Vec<SweepReport>,
    /// Rate bound at the end of the iteration (new coefficients, new power).
    pub f0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub coeffs: SurfaceCoefficients,
    pub pa_star: f64,
    /// Exact covert rate at the solution, bits per channel use.
    pub rate_bits: f64,
    pub rate_upper_bits: f64,
    pub d01_nats: f64,
    pub relay_power: f64,
    pub trace: Vec<IterationTrace>,
    pub converged: bool,
}

impl OptimizationResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// Maximizes Bob's covert rate over the surface coefficients and Alice's power.
///
/// Starts from uniformly random phases with the relay budget split equally
/// among the active elements. Each outer iteration runs `max_sweeps` element
/// sweeps at the current power, then runs the power block, which re-solves the
/// covertness constraint with the active gains rescaled to the relay budget.
pub fn optimize(channels: &ChannelSet, params: &SystemParams, settings: &AoSettings) -> Result<OptimizationResult> {
    settings.validate()?;
    let budget = params.budget()?;
    let n = channels.n_elements();
    let active = select_active_set(n, params.active_count, params.active_placement, settings.init_seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.init_seed);
    rng.set_stream(1);
    let phases: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();

    let mut coeffs = equal_split(&phases, &active, channels, &budget, budget.pa_max)?;
    check_dims(&coeffs, channels)?;
    let mut pa;
    (coeffs, pa) = power_block(&coeffs, channels, params, settings)?;
    let mut previous_f0 = rate_report(&coeffs, channels, pa)?.rate_upper_bits;

    let mut trace = Vec::new();
    let mut converged = false;
    for iteration in 1..=settings.max_outer_iters {
        let mut step = || -> Result<IterationTrace> {
            let pa_sweep = pa;
            let mut sweeps = Vec::with_capacity(settings.max_sweeps);
            for _ in 0..settings.max_sweeps {
                sweeps.push(sweep_elements(&mut coeffs, channels, &budget, pa_sweep)?);
            }
            let pa_after;
            (coeffs, pa_after) = power_block(&coeffs, channels, params, settings)?;
            let f0 = rate_report(&coeffs, channels, pa_after)?.rate_upper_bits;
            Ok(IterationTrace { pa_sweep, pa_after, sweeps, f0 })
        };
        let record = step().map_err(|e| Error::Iteration { iteration, source: Box::new(e) })?;
        pa = record.pa_after;
        let f0 = record.f0;
        trace.push(record);
        if (f0 - previous_f0).abs() <= settings.rel_tol * previous_f0.abs() {
            converged = true;
            break;
        }
        previous_f0 = f0;
    }

    let rates = rate_report(&coeffs, channels, pa)?;
    let detection = detection_report(&coeffs, channels, pa, params.channel_uses)?;
    Ok(OptimizationResult {
        relay_power: relay_power(&coeffs, &channels.h_rb, pa, channels.sigma_r_sq),
        coeffs,
        pa_star: pa,
        rate_bits: rates.rate_bits,
        rate_upper_bits: rates.rate_upper_bits,
        d01_nats: detection.d01,
        trace,
        converged,
    })
}

/// `A_n` of element `n` with its log-determinant; used by identity checks.
pub fn log2_det_a(ctx: &ElementContext) -> Result<f64> {
    log2_det_hpd(&ctx.a_mat, "A_n")
}

/// `I + theta E^-1 C + conj(theta) E^-1 C^H` evaluated directly, for checking the scalar forms.
pub fn direct_coupling_matrix(ctx: &ElementContext, theta: Complex64) -> Result<CMatrix> {
    let e_mat = &ctx.a_mat + &ctx.b_mat * Complex64::new(theta.norm_sqr(), 0.0);
    let chol = cholesky(&e_mat, "E_n")?;
    let dim = ctx.a_mat.nrows();
    Ok(CMatrix::identity(dim, dim) + chol.solve(&ctx.c_mat) * theta + chol.solve(&ctx.c_mat.adjoint()) * theta.conj())
}

#[cfg(test)]
mod tests;
