//! Fixtures shared by the benchmarks.

use hrris_core::surface::SurfaceCoefficients;
use hrris_core::{build_channel_set, ChannelSet, FadingSpec, SystemParams};

/// Reference scene with an `n`-element surface and `k` active elements.
pub fn scene(n: usize, k: usize, seed: u64) -> (ChannelSet, SystemParams) {
    let base = SystemParams::default();
    let arrays = base.arrays.with_elements(n).expect("n >= 1");
    let fading = FadingSpec { seed, ..base.fading };
    let channels = build_channel_set(&base.geometry, &arrays, &fading, base.noise_dbm).expect("valid scene");
    (channels, SystemParams { arrays, fading, active_count: k, ..base })
}

/// Evenly spread phases with the first `k` elements active at a small gain.
pub fn coefficients(n: usize, k: usize) -> SurfaceCoefficients {
    let phases: Vec<f64> = (0..n).map(|i| i as f64 * 0.37).collect();
    let amps = vec![0.5; n];
    let active: Vec<usize> = (0..k).collect();
    SurfaceCoefficients::from_polar(&phases, &amps, &active).expect("valid coefficients")
}
