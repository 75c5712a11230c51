use crate::channel::{ArraySpec, FadingSpec, SceneGeometry};
use crate::error::{Error, Result};
use crate::surface::{ActivePlacement, PowerBudget};
use crate::units::dbm_to_watts;

/// Everything that defines one covert-link scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Covertness level; the KL divergence must stay below `2 epsilon^2`.
    pub epsilon: f64,
    /// Number of channel uses `L` observed by Willie.
    pub channel_uses: u32,
    /// Alice's power limit, watts.
    pub pa_max: f64,
    /// Total power limit of the active elements, watts.
    pub pr_max: f64,
    pub noise_dbm: f64,
    pub geometry: SceneGeometry,
    pub arrays: ArraySpec,
    pub fading: FadingSpec,
    pub active_count: usize,
    pub active_placement: ActivePlacement,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            epsilon: 0.01,
            channel_uses: 100,
            pa_max: dbm_to_watts(30.0),
            pr_max: dbm_to_watts(-30.0),
            noise_dbm: -80.0,
            geometry: SceneGeometry::default(),
            arrays: ArraySpec::default(),
            fading: FadingSpec::default(),
            active_count: 5,
            active_placement: ActivePlacement::First,
        }
    }
}

impl SystemParams {
    pub fn budget(&self) -> Result<PowerBudget> {
        PowerBudget::new(self.pa_max, self.pr_max)
    }

    pub fn covertness_threshold(&self) -> f64 {
        2.0 * self.epsilon * self.epsilon
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.channel_uses == 0 {
            return Err(Error::Config("channel_uses must be at least 1".into()));
        }
        if !self.noise_dbm.is_finite() {
            return Err(Error::Config("noise_dbm must be finite".into()));
        }
        self.budget().map_err(|e| Error::Config(e.to_string()))?;
        self.geometry.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.arrays.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.fading.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.active_count > self.arrays.n_elements() {
            return Err(Error::Config(format!(
                "active_count {} exceeds the {} surface elements",
                self.active_count,
                self.arrays.n_elements()
            )));
        }
        Ok(())
    }
}
