//! Channel synthesis: scene geometry, log-distance path loss, ULA/UPA steering
//! vectors and Rician small-scale fading for the five links of the scene.
//!
//! All arrays are laid out along the y-axis, so broadside points along x. The
//! sine of the angle seen by an array is therefore the y-component of the unit
//! direction vector towards the far end of the link. The surface is a planar
//! array whose second (elevation) axis sees every node at elevation zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::units::{db_to_linear, dbm_to_watts};

/// One of the five propagation links of the scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    AliceRis,
    RisBob,
    AliceBob,
    AliceWillie,
    RisWillie,
}

impl Link {
    pub const ALL: [Link; 5] = [
        Link::AliceRis,
        Link::RisBob,
        Link::AliceBob,
        Link::AliceWillie,
        Link::RisWillie,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Link::AliceRis => "ar",
            Link::RisBob => "rb",
            Link::AliceBob => "ab",
            Link::AliceWillie => "aw",
            Link::RisWillie => "rw",
        }
    }

    /// RNG stream used for the scattered component of this link. Fixed per
    /// link so that adding links never shifts the draws of existing ones.
    pub fn stream_id(self) -> u64 {
        match self {
            Link::AliceRis => 0,
            Link::RisBob => 1,
            Link::AliceBob => 2,
            Link::AliceWillie => 3,
            Link::RisWillie => 4,
        }
    }
}

/// A value attached to each link, keyed by the link ids `ar, rb, ab, aw, rw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerLink<T> {
    pub ar: T,
    pub rb: T,
    pub ab: T,
    pub aw: T,
    pub rw: T,
}

impl<T: Copy> PerLink<T> {
    pub fn uniform(value: T) -> Self {
        PerLink { ar: value, rb: value, ab: value, aw: value, rw: value }
    }

    pub fn get(&self, link: Link) -> T {
        match link {
            Link::AliceRis => self.ar,
            Link::RisBob => self.rb,
            Link::AliceBob => self.ab,
            Link::AliceWillie => self.aw,
            Link::RisWillie => self.rw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneGeometry {
    pub alice: Position,
    pub ris: Position,
    pub bob: Position,
    pub willie: Position,
    pub pathloss_exponents: PerLink<f64>,
    /// Path loss at the 1 m reference distance, in dB.
    pub chi0_db: f64,
}

impl Default for SceneGeometry {
    /// Alice at the origin, the surface 51 m down the x-axis, Bob just in front
    /// of it and Willie off to the side, with exponents favouring the surface.
    fn default() -> Self {
        SceneGeometry {
            alice: Position::new(0.0, 0.0),
            ris: Position::new(51.0, 0.0),
            bob: Position::new(50.0, 2.0),
            willie: Position::new(30.0, 5.0),
            pathloss_exponents: PerLink { ar: 2.2, rb: 2.8, ab: 4.2, aw: 4.2, rw: 2.8 },
            chi0_db: -30.0,
        }
    }
}

impl SceneGeometry {
    /// (transmitter, receiver) positions of a link.
    pub fn endpoints(&self, link: Link) -> (Position, Position) {
        match link {
            Link::AliceRis => (self.alice, self.ris),
            Link::RisBob => (self.ris, self.bob),
            Link::AliceBob => (self.alice, self.bob),
            Link::AliceWillie => (self.alice, self.willie),
            Link::RisWillie => (self.ris, self.willie),
        }
    }

    pub fn distance(&self, link: Link) -> f64 {
        let (tx, rx) = self.endpoints(link);
        tx.distance(&rx)
    }

    /// Large-scale power gain of a link.
    pub fn link_gain(&self, link: Link) -> Result<f64> {
        path_loss(self.distance(link), self.pathloss_exponents.get(link), self.chi0_db)
    }

    pub fn validate(&self) -> Result<()> {
        for link in Link::ALL {
            let alpha = self.pathloss_exponents.get(link);
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::domain(format!(
                    "path-loss exponent for link {} must be positive, got {alpha}",
                    link.id()
                )));
            }
        }
        let nodes = [("alice", self.alice), ("ris", self.ris), ("bob", self.bob), ("willie", self.willie)];
        for (i, (name_a, a)) in nodes.iter().enumerate() {
            if !(a.x.is_finite() && a.y.is_finite()) {
                return Err(Error::domain(format!("position of {name_a} is not finite")));
            }
            for (name_b, b) in &nodes[i + 1..] {
                if a.distance(b) <= 0.0 {
                    return Err(Error::domain(format!("{name_a} and {name_b} are co-located")));
                }
            }
        }
        if !self.chi0_db.is_finite() {
            return Err(Error::domain("chi0_db must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArraySpec {
    pub n_alice: usize,
    pub n_bob: usize,
    pub n_willie: usize,
    pub ris_rows: usize,
    pub ris_cols: usize,
    /// Inter-element spacing in wavelengths.
    pub element_spacing: f64,
}

impl Default for ArraySpec {
    fn default() -> Self {
        ArraySpec {
            n_alice: 4,
            n_bob: 4,
            n_willie: 1,
            ris_rows: 10,
            ris_cols: 10,
            element_spacing: 0.5,
        }
    }
}

impl ArraySpec {
    pub fn n_elements(&self) -> usize {
        self.ris_rows * self.ris_cols
    }

    /// Same antennas, surface reshaped to the most nearly square
    /// `rows x cols = n` layout with `rows <= cols`.
    pub fn with_elements(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("surface needs at least one element"));
        }
        let mut rows = (n as f64).sqrt().floor() as usize;
        while !n.is_multiple_of(rows) {
            rows -= 1;
        }
        Ok(ArraySpec { ris_rows: rows, ris_cols: n / rows, ..*self })
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_alice", self.n_alice),
            ("n_bob", self.n_bob),
            ("n_willie", self.n_willie),
            ("ris_rows", self.ris_rows),
            ("ris_cols", self.ris_cols),
        ];
        for (name, count) in counts {
            if count == 0 {
                return Err(Error::domain(format!("{name} must be at least 1")));
            }
        }
        if !(self.element_spacing > 0.0 && self.element_spacing.is_finite()) {
            return Err(Error::domain("element_spacing must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingSpec {
    pub rician_k_db: PerLink<f64>,
    pub seed: u64,
}

impl FadingSpec {
    pub fn new(rician_k_db: f64, seed: u64) -> Self {
        FadingSpec { rician_k_db: PerLink::uniform(rician_k_db), seed }
    }

    pub fn validate(&self) -> Result<()> {
        for link in Link::ALL {
            if !self.rician_k_db.get(link).is_finite() {
                return Err(Error::domain(format!("rician_k_db for link {} must be finite", link.id())));
            }
        }
        Ok(())
    }
}

impl Default for FadingSpec {
    fn default() -> Self {
        FadingSpec::new(3.0, 0)
    }
}

/// Noise powers in watts at Bob, Willie and the active surface elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePowers {
    pub bob: f64,
    pub willie: f64,
    pub relay: f64,
}

impl NoisePowers {
    pub fn equal(watts: f64) -> Self {
        NoisePowers { bob: watts, willie: watts, relay: watts }
    }
}

/// The five channel matrices of the scene plus the noise powers.
///
/// Shapes: `h_ar` is `N x N_a`, `h_ab` is `N_b x N_a`, `h_rb` is `N_b x N`,
/// `h_aw` is `N_w x N_a` and `h_rw` is `N_w x N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub h_ar: CMatrix,
    pub h_ab: CMatrix,
    pub h_rb: CMatrix,
    pub h_aw: CMatrix,
    pub h_rw: CMatrix,
    pub sigma_b_sq: f64,
    pub sigma_w_sq: f64,
    pub sigma_r_sq: f64,
}

impl ChannelSet {
    /// Builds a channel set with equal noise powers at Bob, Willie and the relay.
    pub fn new(
        h_ar: CMatrix,
        h_ab: CMatrix,
        h_rb: CMatrix,
        h_aw: CMatrix,
        h_rw: CMatrix,
        noise_watts: f64,
    ) -> Result<Self> {
        Self::with_noise(h_ar, h_ab, h_rb, h_aw, h_rw, NoisePowers::equal(noise_watts), false)
    }

    /// Builds a channel set with per-node noise powers. Unless
    /// `allow_unequal_noise` is set the three powers must coincide.
    pub fn with_noise(
        h_ar: CMatrix,
        h_ab: CMatrix,
        h_rb: CMatrix,
        h_aw: CMatrix,
        h_rw: CMatrix,
        noise: NoisePowers,
        allow_unequal_noise: bool,
    ) -> Result<Self> {
        let set = ChannelSet {
            h_ar,
            h_ab,
            h_rb,
            h_aw,
            h_rw,
            sigma_b_sq: noise.bob,
            sigma_w_sq: noise.willie,
            sigma_r_sq: noise.relay,
        };
        set.validate()?;
        if !allow_unequal_noise && !(set.sigma_b_sq == set.sigma_w_sq && set.sigma_b_sq == set.sigma_r_sq) {
            return Err(Error::domain("noise powers at Bob, Willie and the relay must be equal"));
        }
        Ok(set)
    }

    pub fn n_elements(&self) -> usize {
        self.h_ar.nrows()
    }

    pub fn n_alice(&self) -> usize {
        self.h_ar.ncols()
    }

    pub fn n_bob(&self) -> usize {
        self.h_ab.nrows()
    }

    pub fn n_willie(&self) -> usize {
        self.h_aw.nrows()
    }

    /// Checks shapes, finiteness and positivity of the noise powers.
    pub fn validate(&self) -> Result<()> {
        let (n, na, nb, nw) = (self.n_elements(), self.n_alice(), self.n_bob(), self.n_willie());
        let shapes = [
            ("h_ab", &self.h_ab, nb, na),
            ("h_rb", &self.h_rb, nb, n),
            ("h_aw", &self.h_aw, nw, na),
            ("h_rw", &self.h_rw, nw, n),
        ];
        for (name, m, rows, cols) in shapes {
            if m.shape() != (rows, cols) {
                return Err(Error::domain(format!(
                    "{name} is {:?}, expected ({rows}, {cols})",
                    m.shape()
                )));
            }
        }
        for (name, m) in [
            ("h_ar", &self.h_ar),
            ("h_ab", &self.h_ab),
            ("h_rb", &self.h_rb),
            ("h_aw", &self.h_aw),
            ("h_rw", &self.h_rw),
        ] {
            if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::domain(format!("{name} has non-finite entries")));
            }
        }
        for (name, v) in [
            ("sigma_b_sq", self.sigma_b_sq),
            ("sigma_w_sq", self.sigma_w_sq),
            ("sigma_r_sq", self.sigma_r_sq),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Log-distance path loss `chi0 * d^(-alpha)` as a linear power gain.
pub fn path_loss(d: f64, alpha: f64, chi0_db: f64) -> Result<f64> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::domain(format!("link distance must be positive, got {d}")));
    }
    Ok(db_to_linear(chi0_db) * d.powf(-alpha))
}

/// Far-field ULA response `exp(j 2 pi spacing k sin_angle)`, `k = 0..count`.
pub fn ula_steering(sin_angle: f64, count: usize, spacing: f64) -> Result<CVector> {
    if count == 0 {
        return Err(Error::domain("steering vector needs at least one element"));
    }
    if sin_angle.is_nan() || sin_angle.abs() > 1.0 {
        return Err(Error::domain(format!("|sin(angle)| must be at most 1, got {sin_angle}")));
    }
    Ok(CVector::from_iterator(
        count,
        (0..count).map(|k| Complex64::from_polar(1.0, 2.0 * PI * spacing * k as f64 * sin_angle)),
    ))
}

/// UPA response, the Kronecker product of a `rows`-element ULA along the
/// azimuth axis and a `cols`-element ULA along the elevation axis.
/// Element `(r, c)` sits at index `r * cols + c`.
pub fn upa_steering(az_sin: f64, el_sin: f64, rows: usize, cols: usize, spacing: f64) -> Result<CVector> {
    let az = ula_steering(az_sin, rows, spacing)?;
    let el = ula_steering(el_sin, cols, spacing)?;
    Ok(az.kronecker(&el))
}

/// Rician channel `sqrt(gain) (sqrt(k/(1+k)) LOS + sqrt(1/(1+k)) W)` with `W`
/// unit-variance circular complex Gaussian drawn from stream `stream_id` of
/// the ChaCha generator seeded by `seed`. A K-factor of `-inf` dB gives
/// Rayleigh fading.
pub fn rician_matrix(
    rows: usize,
    cols: usize,
    rician_k_db: f64,
    los: &CMatrix,
    gain: f64,
    seed: u64,
    stream_id: u64,
) -> Result<CMatrix> {
    if los.shape() != (rows, cols) {
        return Err(Error::domain(format!(
            "LOS matrix is {:?}, expected ({rows}, {cols})",
            los.shape()
        )));
    }
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(Error::domain(format!("link gain must be positive, got {gain}")));
    }
    if rician_k_db.is_nan() || rician_k_db == f64::INFINITY {
        return Err(Error::domain("Rician factor must be finite or -inf dB"));
    }
    let kappa = db_to_linear(rician_k_db);
    let los_weight = (kappa / (1.0 + kappa)).sqrt() * gain.sqrt();
    let nlos_weight = (1.0 / (1.0 + kappa)).sqrt() * gain.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // Column-major fill so the draw order is fixed independently of nalgebra internals.
    let mut h = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            h[(i, j)] = los[(i, j)] * los_weight + Complex64::new(re, im) * (scale * nlos_weight);
        }
    }
    Ok(h)
}

fn link_los(geometry: &SceneGeometry, arrays: &ArraySpec, link: Link) -> Result<CMatrix> {
    let (tx, rx) = geometry.endpoints(link);
    let d = tx.distance(&rx);
    let sin_departure = (rx.y - tx.y) / d;
    let sin_arrival = (tx.y - rx.y) / d;
    let spacing = arrays.element_spacing;
    let ris = |sin| upa_steering(sin, 0.0, arrays.ris_rows, arrays.ris_cols, spacing);
    let (rx_vec, tx_vec) = match link {
        Link::AliceRis => (ris(sin_arrival)?, ula_steering(sin_departure, arrays.n_alice, spacing)?),
        Link::RisBob => (ula_steering(sin_arrival, arrays.n_bob, spacing)?, ris(sin_departure)?),
        Link::AliceBob => (
            ula_steering(sin_arrival, arrays.n_bob, spacing)?,
            ula_steering(sin_departure, arrays.n_alice, spacing)?,
        ),
        Link::AliceWillie => (
            ula_steering(sin_arrival, arrays.n_willie, spacing)?,
            ula_steering(sin_departure, arrays.n_alice, spacing)?,
        ),
        Link::RisWillie => (ula_steering(sin_arrival, arrays.n_willie, spacing)?, ris(sin_departure)?),
    };
    Ok(&rx_vec * tx_vec.adjoint())
}

fn link_shape(arrays: &ArraySpec, link: Link) -> (usize, usize) {
    let n = arrays.n_elements();
    match link {
        Link::AliceRis => (n, arrays.n_alice),
        Link::RisBob => (arrays.n_bob, n),
        Link::AliceBob => (arrays.n_bob, arrays.n_alice),
        Link::AliceWillie => (arrays.n_willie, arrays.n_alice),
        Link::RisWillie => (arrays.n_willie, n),
    }
}

/// Synthesizes all five links of a scene with equal noise power everywhere.
pub fn build_channel_set(
    geometry: &SceneGeometry,
    arrays: &ArraySpec,
    fading: &FadingSpec,
    noise_dbm: f64,
) -> Result<ChannelSet> {
    geometry.validate()?;
    arrays.validate()?;
    fading.validate()?;
    let mut links = Link::ALL.iter().map(|&link| {
        let (rows, cols) = link_shape(arrays, link);
        let los = link_los(geometry, arrays, link)?;
        rician_matrix(
            rows,
            cols,
            fading.rician_k_db.get(link),
            &los,
            geometry.link_gain(link)?,
            fading.seed,
            link.stream_id(),
        )
    });
    // Order matches Link::ALL: ar, rb, ab, aw, rw.
    let h_ar = links.next().unwrap()?;
    let h_rb = links.next().unwrap()?;
    let h_ab = links.next().unwrap()?;
    let h_aw = links.next().unwrap()?;
    let h_rw = links.next().unwrap()?;
    ChannelSet::new(h_ar, h_ab, h_rb, h_aw, h_rw, dbm_to_watts(noise_dbm))
}

/// Antenna and element counts for geometry-free test scenes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n_alice: usize,
    pub n_bob: usize,
    pub n_willie: usize,
    pub n_elements: usize,
}

/// Rayleigh scene with i.i.d. `CN(0, link_gain)` entries on every link and unit
/// noise power. Used for property checks and benchmarks where well-scaled
/// numbers matter more than physical geometry.
pub fn rayleigh_channel_set(dims: Dims, link_gain: f64, seed: u64) -> Result<ChannelSet> {
    let arrays = ArraySpec {
        n_alice: dims.n_alice,
        n_bob: dims.n_bob,
        n_willie: dims.n_willie,
        ris_rows: dims.n_elements,
        ris_cols: 1,
        element_spacing: 0.5,
    };
    arrays.validate()?;
    let draw = |link: Link| {
        let (rows, cols) = link_shape(&arrays, link);
        let zero = CMatrix::zeros(rows, cols);
        rician_matrix(rows, cols, f64::NEG_INFINITY, &zero, link_gain, seed, link.stream_id())
    };
    ChannelSet::new(
        draw(Link::AliceRis)?,
        draw(Link::AliceBob)?,
        draw(Link::RisBob)?,
        draw(Link::AliceWillie)?,
        draw(Link::RisWillie)?,
        1.0,
    )
}
