use std::path::PathBuf;

use serde::Deserialize;

use crate::channel::{ArraySpec, FadingSpec, PerLink, Position, SceneGeometry};
use crate::error::{Error, Result};
use crate::optimizer::AoSettings;
use crate::params::SystemParams;
use crate::surface::ActivePlacement;
use crate::units::dbm_to_watts;

use super::SweepSpec;

/// Keys that have no default.
pub const REQUIRED_KEYS: [&str; 6] = [
    "system.epsilon",
    "system.channel_uses",
    "system.pr_max_dbm",
    "system.noise_dbm",
    "sweep.n_values",
    "sweep.k_values",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: SystemParams,
    pub sweep: SweepSpec,
    pub settings: AoSettings,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    system: RawSystem,
    #[serde(default)]
    geometry: RawGeometry,
    #[serde(default)]
    arrays: RawArrays,
    #[serde(default)]
    fading: RawFading,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    optimizer: RawOptimizer,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    epsilon: Option<f64>,
    channel_uses: Option<u32>,
    pa_max_dbm: Option<f64>,
    pr_max_dbm: Option<f64>,
    noise_dbm: Option<f64>,
    active_count: Option<usize>,
    active_placement: Option<ActivePlacement>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    alice: Option<Position>,
    ris: Option<Position>,
    bob: Option<Position>,
    willie: Option<Position>,
    pathloss_exponents: Option<PerLink<f64>>,
    chi0_db: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArrays {
    n_alice: Option<usize>,
    n_bob: Option<usize>,
    n_willie: Option<usize>,
    ris_rows: Option<usize>,
    ris_cols: Option<usize>,
    element_spacing: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFading {
    rician_k_db: Option<RawRician>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawRician {
    Uniform(f64),
    PerLink(PerLink<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    n_values: Option<Vec<usize>>,
    k_values: Option<Vec<usize>>,
    trials: Option<usize>,
    base_seed: Option<u64>,
    output: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptimizer {
    max_outer_iters: Option<usize>,
    max_sweeps: Option<usize>,
    rel_tol: Option<f64>,
    bisection_tol: Option<f64>,
}

fn invalid(field: &str, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {e}"))
}

/// Parses and validates a TOML experiment description.
///
/// Unknown keys are rejected by name; syntax errors carry the line and column.
pub fn parse_config(text: &str) -> Result<Config> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

    let present = [
        raw.system.epsilon.is_some(),
        raw.system.channel_uses.is_some(),
        raw.system.pr_max_dbm.is_some(),
        raw.system.noise_dbm.is_some(),
        raw.sweep.n_values.is_some(),
        raw.sweep.k_values.is_some(),
    ];
    let missing: Vec<&str> = REQUIRED_KEYS.iter().zip(present).filter(|(_, p)| !p).map(|(k, _)| *k).collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!("missing required keys: {}", missing.join(", "))));
    }

    let base = SystemParams::default();
    let g = SceneGeometry::default();
    let geometry = SceneGeometry {
        alice: raw.geometry.alice.unwrap_or(g.alice),
        ris: raw.geometry.ris.unwrap_or(g.ris),
        bob: raw.geometry.bob.unwrap_or(g.bob),
        willie: raw.geometry.willie.unwrap_or(g.willie),
        pathloss_exponents: raw.geometry.pathloss_exponents.unwrap_or(g.pathloss_exponents),
        chi0_db: raw.geometry.chi0_db.unwrap_or(g.chi0_db),
    };
    let a = ArraySpec::default();
    let arrays = ArraySpec {
        n_alice: raw.arrays.n_alice.unwrap_or(a.n_alice),
        n_bob: raw.arrays.n_bob.unwrap_or(a.n_bob),
        n_willie: raw.arrays.n_willie.unwrap_or(a.n_willie),
        ris_rows: raw.arrays.ris_rows.unwrap_or(a.ris_rows),
        ris_cols: raw.arrays.ris_cols.unwrap_or(a.ris_cols),
        element_spacing: raw.arrays.element_spacing.unwrap_or(a.element_spacing),
    };
    let f = FadingSpec::default();
    let fading = FadingSpec {
        rician_k_db: match raw.fading.rician_k_db {
            None => f.rician_k_db,
            Some(RawRician::Uniform(k)) => PerLink::uniform(k),
            Some(RawRician::PerLink(p)) => p,
        },
        seed: raw.fading.seed.unwrap_or(f.seed),
    };

    let s = &raw.system;
    for (name, v) in [("system.pa_max_dbm", s.pa_max_dbm), ("system.pr_max_dbm", s.pr_max_dbm)] {
        if v.is_some_and(|x| !x.is_finite()) {
            return Err(invalid(name, "must be finite"));
        }
    }
    let params = SystemParams {
        epsilon: s.epsilon.unwrap_or(base.epsilon),
        channel_uses: s.channel_uses.unwrap_or(base.channel_uses),
        pa_max: s.pa_max_dbm.map_or(base.pa_max, dbm_to_watts),
        pr_max: s.pr_max_dbm.map_or(base.pr_max, dbm_to_watts),
        noise_dbm: s.noise_dbm.unwrap_or(base.noise_dbm),
        geometry,
        arrays,
        fading,
        active_count: s.active_count.unwrap_or(base.active_count),
        active_placement: s.active_placement.unwrap_or(base.active_placement),
    };
    params.validate()?;

    let d = SweepSpec::default();
    let sweep = SweepSpec {
        n_values: raw.sweep.n_values.unwrap_or_default(),
        k_values: raw.sweep.k_values.unwrap_or_default(),
        trials: raw.sweep.trials.unwrap_or(d.trials),
        base_seed: raw.sweep.base_seed.unwrap_or(d.base_seed),
        output: raw.sweep.output.or(d.output),
    };
    sweep.validate()?;

    let o = AoSettings::default();
    let settings = AoSettings {
        max_outer_iters: raw.optimizer.max_outer_iters.unwrap_or(o.max_outer_iters),
        max_sweeps: raw.optimizer.max_sweeps.unwrap_or(o.max_sweeps),
        rel_tol: raw.optimizer.rel_tol.unwrap_or(o.rel_tol),
        bisection_tol: raw.optimizer.bisection_tol.unwrap_or(o.bisection_tol),
        init_seed: o.init_seed,
    };
    settings.validate()?;

    Ok(Config { params, sweep, settings })
}

/// Reads and parses a config file; I/O failures are reported as config errors.
pub fn load_config(path: &std::path::Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASELINE: &str = r#"
[system]
epsilon = 0.01
channel_uses = 100
pr_max_dbm = -30.0
noise_dbm = -80.0
active_count = 5

[geometry]
alice = { x = 0.0, y = 0.0 }
ris = { x = 51.0, y = 0.0 }
bob = { x = 50.0, y = 2.0 }
willie = { x = 30.0, y = 5.0 }
pathloss_exponents = { ar = 2.2, rb = 2.8, ab = 4.2, aw = 4.2, rw = 2.8 }

[sweep]
n_values = [50, 100, 150]
k_values = [0, 5, 20]
trials = 50
base_seed = 7
"#;

    #[test]
    fn baseline_document() {
        let cfg = parse_config(BASELINE).unwrap();
        assert_eq!(cfg.params.epsilon, 0.01);
        assert_eq!(cfg.params.channel_uses, 100);
        assert!((cfg.params.pr_max - 1e-6).abs() < 1e-18);
        assert_eq!(cfg.params.noise_dbm, -80.0);
        assert_eq!(cfg.params.geometry, SceneGeometry::default());
        assert_eq!(cfg.sweep.n_values, vec![50, 100, 150]);
        assert_eq!(cfg.sweep.trials, 50);
        assert_eq!(cfg.sweep.base_seed, 7);
        assert_eq!(cfg.settings, AoSettings::default());
    }

    #[test]
    fn active_count_above_n() {
        let text = BASELINE.replace("k_values = [0, 5, 20]", "k_values = [0, 60]");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("active_count"), "{err}");

        let text = BASELINE.replace("active_count = 5", "active_count = 101");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("active_count"), "{err}");
    }

    #[test]
    fn empty_document_lists_required_keys() {
        let err = parse_config("").unwrap_err().to_string();
        for key in REQUIRED_KEYS {
            assert!(err.contains(key), "{err}");
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let text = BASELINE.replace("trials = 50", "trials = 50\nmystery_knob = 3");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("mystery_knob"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_config("[system]\nepsilon = = 1\n").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
    }

    #[test]
    fn invariant_violations_name_the_field() {
        let err = parse_config(&BASELINE.replace("epsilon = 0.01", "epsilon = -1.0")).unwrap_err().to_string();
        assert!(err.contains("epsilon"), "{err}");
        let err = parse_config(&BASELINE.replace("trials = 50", "trials = 0")).unwrap_err().to_string();
        assert!(err.contains("trials"), "{err}");
        let err = parse_config(&BASELINE.replace("channel_uses = 100", "channel_uses = 0")).unwrap_err().to_string();
        assert!(err.contains("channel_uses"), "{err}");
    }

    #[test]
    fn uniform_and_per_link_rician() {
        let cfg = parse_config(&format!("{BASELINE}\n[fading]\nrician_k_db = 6.0\n")).unwrap();
        assert_eq!(cfg.params.fading.rician_k_db, PerLink::uniform(6.0));
        let cfg = parse_config(&format!(
            "{BASELINE}\n[fading]\nrician_k_db = {{ ar = 1.0, rb = 2.0, ab = 3.0, aw = 4.0, rw = 5.0 }}\n"
        ))
        .unwrap();
        assert_eq!(cfg.params.fading.rician_k_db.rw, 5.0);
    }
}
