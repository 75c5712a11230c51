//! Transmit power under the covertness constraint `D_01(P_a) <= 2 eps^2`.

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::metrics::{kl_divergence, willie_gain};
use crate::surface::SurfaceCoefficients;

const MAX_BISECTIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSolution {
    pub pa: f64,
    /// KL divergence at `pa`, in nats.
    pub d01: f64,
    /// Whether the covertness constraint binds (otherwise `pa` is the upper limit).
    pub constraint_active: bool,
    pub iterations: usize,
}

/// Root of an increasing `f` on `[0, hi]` with `f(0) <= target < f(hi)`.
///
/// Stops once `|f(x) - target| <= rel_tol * target`. Every probe is checked
/// against its bracket; a value that does not sit between the bracket values
/// is reported as [`Error::NonMonotone`].
pub fn bisect_increasing<F>(f: F, hi: f64, target: f64, rel_tol: f64) -> Result<(f64, f64, usize)>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut f_lo) = (0.0, f(0.0)?);
    let (mut hi, mut f_hi) = (hi, f(hi)?);
    if !(f_lo <= target && target < f_hi) {
        return Err(Error::domain(format!(
            "target {target:e} not bracketed by [{f_lo:e}, {f_hi:e}]"
        )));
    }
    for iter in 1..=MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval exhausted at machine precision; keep the feasible side.
            return Ok((lo, f_lo, iter));
        }
        let f_mid = f(mid)?;
        if f_mid < f_lo || f_mid > f_hi {
            return Err(Error::NonMonotone { pa: mid });
        }
        if (f_mid - target).abs() <= rel_tol * target {
            return Ok((mid, f_mid, iter));
        }
        if f_mid < target {
            (lo, f_lo) = (mid, f_mid);
        } else {
            (hi, f_hi) = (mid, f_mid);
        }
    }
    Ok((lo, f_lo, MAX_BISECTIONS))
}

/// Largest transmit power in `[0, pa_max]` meeting `D_01 <= 2 eps^2` for fixed coefficients.
///
/// Returns `pa_max` itself when the constraint is slack there; otherwise the
/// unique root of `D_01(P_a) = 2 eps^2`, found by bisection to relative
/// residual `tol`.
pub fn solve_pa(
    coeffs: &SurfaceCoefficients,
    channels: &ChannelSet,
    epsilon: f64,
    l: u32,
    pa_max: f64,
    tol: f64,
) -> Result<PowerSolution> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!("epsilon must be positive, got {epsilon}")));
    }
    if l == 0 {
        return Err(Error::domain("channel uses must be at least 1"));
    }
    if !(pa_max > 0.0 && pa_max.is_finite()) {
        return Err(Error::domain(format!("pa_max must be positive, got {pa_max}")));
    }
    let target = 2.0 * epsilon * epsilon;
    let gain = willie_gain(coeffs, channels)?;
    let d01 = |pa: f64| kl_divergence(gain * pa, l);

    let at_max = d01(pa_max)?;
    if at_max <= target {
        return Ok(PowerSolution { pa: pa_max, d01: at_max, constraint_active: false, iterations: 0 });
    }
    let (pa, d, iterations) = bisect_increasing(d01, pa_max, target, tol)?;
    Ok(PowerSolution { pa, d01: d, constraint_active: true, iterations })
}
