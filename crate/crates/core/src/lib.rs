//! Covert communication through a hybrid relay-reflecting intelligent surface.
//!
//! Alice talks to Bob through an `N`-element surface whose `K` active elements
//! amplify and the rest only shift phase, while a warden, Willie, listens. The
//! crate designs Alice's power and the surface coefficients to maximize Bob's
//! rate while keeping Willie's KL divergence below `2 eps^2`.

pub mod channel;
pub mod error;
pub mod experiment;
mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod params;
pub mod surface;
pub mod units;

pub use channel::{build_channel_set, ArraySpec, ChannelSet, FadingSpec, SceneGeometry};
pub use error::{Error, Result};
pub use experiment::{emit_csv, load_config, parse_config, run_sweep, Config, SweepResult, SweepRow, SweepSpec};
pub use linalg::{CMatrix, CVector};
pub use optimizer::{optimize, AoSettings, OptimizationResult};
pub use params::SystemParams;
pub use surface::{ActivePlacement, PowerBudget, SurfaceCoefficients};
