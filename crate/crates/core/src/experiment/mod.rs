//! Monte-Carlo sweeps over surface size `N`, active count `K` and trials.

mod config;
mod csv_out;

use std::path::PathBuf;

use rayon::prelude::*;

use crate::channel::{build_channel_set, FadingSpec};
use crate::error::{Error, Result};
use crate::optimizer::{optimize, AoSettings};
use crate::params::SystemParams;
use crate::units::watts_to_dbm;

pub use config::{load_config, parse_config, Config, REQUIRED_KEYS};
pub use csv_out::{emit_csv, format_sig, write_csv, CSV_HEADER};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpec {
    pub n_values: Vec<usize>,
    pub k_values: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub output: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec { n_values: vec![50, 100, 150], k_values: vec![0, 5, 20], trials: 50, base_seed: 1, output: None }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("sweep.trials must be at least 1".into()));
        }
        if self.n_values.is_empty() || self.k_values.is_empty() {
            return Err(Error::Config("sweep.n_values and sweep.k_values must not be empty".into()));
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n == 0) {
            return Err(Error::Config(format!("sweep.n_values: surface size {n} must be at least 1")));
        }
        let n_min = *self.n_values.iter().min().expect("checked non-empty");
        if let Some(&k) = self.k_values.iter().find(|&&k| k > n_min) {
            return Err(Error::Config(format!(
                "active_count {k} in sweep.k_values exceeds the smallest surface size {n_min} in sweep.n_values"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub seed: u64,
    pub rate_bits: f64,
    pub pa_star_dbm: f64,
    pub d01_nats: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub n: usize,
    pub k: usize,
    pub trial: usize,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    /// Sorted by `(n, k, trial)`.
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

impl SweepResult {
    /// Mean rate over the successful trials of one grid point.
    pub fn mean_rate(&self, n: usize, k: usize) -> Option<f64> {
        let rates: Vec<f64> = self.rows.iter().filter(|r| r.n == n && r.k == k).map(|r| r.rate_bits).collect();
        (!rates.is_empty()).then(|| rates.iter().sum::<f64>() / rates.len() as f64)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243f_6a88_85a3_08d3, |acc, &p| splitmix64(acc ^ p))
}

/// Seed of the channel draw for `(N, trial)`. It does not involve `K`, so every
/// `K` at a given `(N, trial)` sees the same channels.
pub fn channel_seed(base_seed: u64, n: usize, trial: usize) -> u64 {
    mix(&[base_seed, 1, n as u64, trial as u64])
}

/// Seed of the grid point `(N, K, trial)`; drives the initial phases and any random active placement.
pub fn row_seed(base_seed: u64, n: usize, k: usize, trial: usize) -> u64 {
    mix(&[base_seed, 2, n as u64, k as u64, trial as u64])
}

fn run_point(params: &SystemParams, settings: &AoSettings, base_seed: u64, n: usize, k: usize, trial: usize) -> Result<SweepRow> {
    let seed = row_seed(base_seed, n, k, trial);
    let arrays = params.arrays.with_elements(n)?;
    let fading = FadingSpec { seed: channel_seed(base_seed, n, trial), ..params.fading };
    let channels = build_channel_set(&params.geometry, &arrays, &fading, params.noise_dbm)?;
    let point = SystemParams { arrays, fading, active_count: k, ..params.clone() };
    let res = optimize(&channels, &point, &AoSettings { init_seed: seed, ..*settings })?;
    Ok(SweepRow {
        n,
        k,
        trial,
        seed,
        rate_bits: res.rate_bits,
        pa_star_dbm: watts_to_dbm(res.pa_star),
        d01_nats: res.d01_nats,
        iterations: res.iterations(),
        converged: res.converged,
    })
}

/// Runs every `(N, K, trial)` point in parallel.
///
/// Each point draws its randomness from seeds derived from `base_seed` and its
/// own coordinates, so results do not depend on scheduling or on which other
/// points are in the grid. A failing point is recorded and the sweep goes on.
pub fn run_sweep(params: &SystemParams, spec: &SweepSpec, settings: &AoSettings) -> Result<SweepResult> {
    spec.validate()?;
    settings.validate()?;
    let mut grid = Vec::new();
    for &n in &spec.n_values {
        for &k in &spec.k_values {
            for trial in 0..spec.trials {
                grid.push((n, k, trial));
            }
        }
    }
    grid.sort_unstable();
    grid.dedup();

    let outcomes: Vec<_> = grid
        .par_iter()
        .map(|&(n, k, trial)| (n, k, trial, run_point(params, settings, spec.base_seed, n, k, trial)))
        .collect();

    let mut result = SweepResult::default();
    for (n, k, trial, outcome) in outcomes {
        match outcome {
            Ok(row) => result.rows.push(row),
            Err(e) => result.failures.push(SweepFailure {
                n,
                k,
                trial,
                seed: row_seed(spec.base_seed, n, k, trial),
                message: e.to_string(),
            }),
        }
    }
    Ok(result)
}
