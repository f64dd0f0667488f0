//! 60 GHz indoor channel model: Nakagami-faded taps under a shared power
//! delay profile, with an optional geometric model for spatial correlation
//! across the transmit array.

mod generate;
pub(crate) mod io;
mod stats;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Real;

pub use generate::{
    draw_scene, generate_channel_set, substream_seed, ScattererLayout, SceneGeometry,
    UserGeometry, ROOM_DIMENSIONS_M, SUBRAYS_PER_TAP, SUBSCATTERER_RADIUS_M,
};
pub use io::{
    load_channels, read_channel_set, save_channels, sidecar_path, write_channel_set,
    ChannelSidecar, CHANNEL_MAGIC, FORMAT_VERSION,
};
pub use stats::{estimate_nakagami_m, estimate_spatial_correlation, CorrelationPoint};

/// Speed of light in metres per nanosecond.
pub const SPEED_OF_LIGHT_M_PER_NS: f64 = 0.299_792_458;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "CB")]
    Cubicle,
    #[serde(rename = "CR")]
    ConferenceRoom,
    #[serde(rename = "LR")]
    LivingRoom,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Cubicle, Scenario::ConferenceRoom, Scenario::LivingRoom];

    pub fn nakagami_m(self) -> f64 {
        match self {
            Scenario::Cubicle => 4.34,
            Scenario::ConferenceRoom => 2.56,
            Scenario::LivingRoom => 1.74,
        }
    }

    pub fn rms_delay_spread_ns(self) -> f64 {
        match self {
            Scenario::Cubicle => 3.47,
            Scenario::ConferenceRoom => 4.82,
            Scenario::LivingRoom => 7.81,
        }
    }

    pub fn code(self) -> u32 {
        match self {
            Scenario::Cubicle => 0,
            Scenario::ConferenceRoom => 1,
            Scenario::LivingRoom => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.code() == code)
    }

    pub fn label(self) -> &'static str {
        match self {
            Scenario::Cubicle => "CB",
            Scenario::ConferenceRoom => "CR",
            Scenario::LivingRoom => "LR",
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CB" => Ok(Scenario::Cubicle),
            "CR" => Ok(Scenario::ConferenceRoom),
            "LR" => Ok(Scenario::LivingRoom),
            other => Err(Error::Config(format!("unknown scenario `{other}`"))),
        }
    }
}

/// Default tap spacing. Chosen together with [`DEFAULT_DIRECT_FRACTION`] so
/// that the uncorrelated TR/ETR/INTR interference levels land on the
/// reference table; see the README.
pub const DEFAULT_SAMPLE_PERIOD_NS: f64 = 0.86;
/// Default share of Γ carried by the first tap.
pub const DEFAULT_DIRECT_FRACTION: f64 = 0.845;
pub const DEFAULT_NUM_TAPS: usize = 60;
/// 60 GHz carrier.
pub const DEFAULT_WAVELENGTH_M: f64 = SPEED_OF_LIGHT_M_PER_NS / 60.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub name: Scenario,
    pub nakagami_m: f64,
    pub rms_delay_spread_ns: f64,
    pub sample_period_ns: f64,
    pub num_taps: usize,
    /// Total average channel power Γ.
    pub gamma: f64,
    pub carrier_wavelength_m: f64,
    /// Fraction of Γ in the leading tap; the rest follows an exponential
    /// tail. Zero gives a pure exponential profile.
    #[serde(default)]
    pub direct_fraction: f64,
}

impl ScenarioParams {
    pub fn new(name: Scenario) -> Self {
        Self {
            name,
            nakagami_m: name.nakagami_m(),
            rms_delay_spread_ns: name.rms_delay_spread_ns(),
            sample_period_ns: DEFAULT_SAMPLE_PERIOD_NS,
            num_taps: DEFAULT_NUM_TAPS,
            gamma: 1.0,
            carrier_wavelength_m: DEFAULT_WAVELENGTH_M,
            direct_fraction: DEFAULT_DIRECT_FRACTION,
        }
    }

    pub fn with_taps(mut self, num_taps: usize) -> Self {
        self.num_taps = num_taps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.nakagami_m >= 0.5) {
            return bad(format!("nakagami m = {} must be at least 0.5", self.nakagami_m));
        }
        if !(self.rms_delay_spread_ns >= 0.0) || !self.rms_delay_spread_ns.is_finite() {
            return bad("RMS delay spread must be finite and non-negative".into());
        }
        if !(self.sample_period_ns > 0.0) || !self.sample_period_ns.is_finite() {
            return bad("sample period must be positive".into());
        }
        if self.num_taps == 0 {
            return bad("at least one tap is required".into());
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return bad("total channel power must be positive".into());
        }
        if !(self.carrier_wavelength_m > 0.0) {
            return bad("carrier wavelength must be positive".into());
        }
        if !(0.0..1.0).contains(&self.direct_fraction) {
            return bad("direct fraction must lie in [0, 1)".into());
        }
        let span = self.num_taps as f64 * self.sample_period_ns;
        if span < 3.0 * self.rms_delay_spread_ns {
            return bad(format!(
                "{} taps of {} ns cannot hold a {} ns delay spread",
                self.num_taps, self.sample_period_ns, self.rms_delay_spread_ns
            ));
        }
        Ok(())
    }
}

/// Uniform rectangular array in the local x-y plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub rows: usize,
    pub cols: usize,
    pub element_spacing_m: f64,
}

impl ArrayGeometry {
    pub const DEFAULT_SPACING_M: f64 = 0.02;

    pub fn new(rows: usize, cols: usize, element_spacing_m: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config("array needs at least one row and column".into()));
        }
        if !(element_spacing_m > 0.0) {
            return Err(Error::Config("element spacing must be positive".into()));
        }
        Ok(Self {
            rows,
            cols,
            element_spacing_m,
        })
    }

    /// The 8x4, 8x8 and 16x8 layouts at 20 mm; other sizes use the most
    /// square `rows x cols` factorisation with `rows >= cols`.
    pub fn for_elements(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("array needs at least one element".into()));
        }
        let cols = (1..=m)
            .filter(|c| m % c == 0 && c * c <= m)
            .max()
            .unwrap_or(1);
        let (rows, cols) = match m {
            32 => (8, 4),
            64 => (8, 8),
            128 => (16, 8),
            _ => (m / cols, cols),
        };
        Self::new(rows, cols, Self::DEFAULT_SPACING_M)
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }

    /// Grid coordinates of element `m` (row-major).
    pub fn grid_index(&self, m: usize) -> (usize, usize) {
        (m / self.cols, m % self.cols)
    }

    /// Element positions relative to the array centroid, metres.
    pub fn element_positions(&self) -> Vec<[f64; 3]> {
        let r0 = (self.rows as f64 - 1.0) / 2.0;
        let c0 = (self.cols as f64 - 1.0) / 2.0;
        (0..self.num_elements())
            .map(|m| {
                let (r, c) = self.grid_index(m);
                [
                    (r as f64 - r0) * self.element_spacing_m,
                    (c as f64 - c0) * self.element_spacing_m,
                    0.0,
                ]
            })
            .collect()
    }
}

/// Average tap powers `A_h(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerDelayProfile {
    pub taps: Vec<f64>,
}

impl PowerDelayProfile {
    pub fn total_power(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Discrete RMS delay spread in units of `sample_period`.
    pub fn rms_delay_spread(&self, sample_period: f64) -> f64 {
        rms_spread(&self.taps) * sample_period
    }
}

fn rms_spread(taps: &[f64]) -> f64 {
    let total: f64 = taps.iter().sum();
    let mean = taps.iter().enumerate().map(|(t, a)| t as f64 * a).sum::<f64>() / total;
    let second = taps
        .iter()
        .enumerate()
        .map(|(t, a)| (t as f64).powi(2) * a)
        .sum::<f64>()
        / total;
    (second - mean * mean).max(0.0).sqrt()
}

fn profile_shape(beta: f64, ratio: f64, len: usize) -> Vec<f64> {
    let mut taps = vec![0.0; len];
    if ratio <= 0.0 {
        taps[0] = 1.0;
        return taps;
    }
    let mut w = 1.0;
    let mut norm = 0.0;
    for tap in taps.iter_mut() {
        *tap = w;
        norm += w;
        w *= ratio;
    }
    for tap in taps.iter_mut() {
        *tap *= (1.0 - beta) / norm;
    }
    taps[0] += beta;
    taps
}

/// Leading tap carrying `direct_fraction` of Γ followed by an exponential
/// tail `r^t`, with `r` set by bisection so the discrete RMS delay spread
/// matches the scenario, and the whole profile scaled to sum to Γ.
pub fn build_pdp(scenario: &ScenarioParams) -> Result<PowerDelayProfile> {
    scenario.validate()?;
    let len = scenario.num_taps;
    let beta = scenario.direct_fraction;
    let target = scenario.rms_delay_spread_ns / scenario.sample_period_ns;

    let ratio = if target <= 0.0 || len == 1 {
        0.0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0 - 1e-12);
        if rms_spread(&profile_shape(beta, hi, len)) < target {
            return Err(Error::Config(format!(
                "{len} taps of {} ns cannot realize a {} ns delay spread with direct fraction {beta}",
                scenario.sample_period_ns, scenario.rms_delay_spread_ns
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if rms_spread(&profile_shape(beta, mid, len)) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    let shape = profile_shape(beta, ratio, len);
    let total: f64 = shape.iter().sum();
    let taps = shape.iter().map(|a| a * scenario.gamma / total).collect();
    Ok(PowerDelayProfile { taps })
}

/// Rician split `(a², σ²)` of a Nakagami-`m` tap with mean power `omega`,
/// using `m = (1+K)² / (1+2K)`.
pub fn split_specular_diffuse(m_target: f64, omega: f64) -> Result<(f64, f64)> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidArgument(format!("tap power {omega} must be positive")));
    }
    if !(m_target >= 0.5) {
        return Err(Error::InvalidArgument(format!("nakagami m = {m_target} below 0.5")));
    }
    if m_target < 1.0 + 1e-12 {
        return Ok((0.0, omega));
    }
    let k = (m_target - 1.0) + (m_target * m_target - m_target).sqrt();
    let diffuse = omega / (1.0 + k);
    Ok((omega - diffuse, diffuse))
}

/// One channel realization: `h_{m,n}(t)` for all antennas, users and taps.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet<T> {
    num_antennas: usize,
    num_users: usize,
    num_taps: usize,
    taps: Vec<Complex<T>>,
    pub scenario: ScenarioParams,
    pub correlated: bool,
    pub seed: u64,
}

impl<T: Real> ChannelSet<T> {
    /// Wraps a tap tensor laid out as `[(m * N + n) * L + t]`.
    pub fn from_taps(
        num_antennas: usize,
        num_users: usize,
        taps: Vec<Complex<T>>,
        scenario: ScenarioParams,
        correlated: bool,
        seed: u64,
    ) -> Result<Self> {
        let l = scenario.num_taps;
        if num_antennas == 0 || num_users == 0 {
            return Err(Error::InvalidArgument("channel needs antennas and users".into()));
        }
        if taps.len() != num_antennas * num_users * l {
            return Err(Error::InvalidArgument(format!(
                "expected {} taps for {num_antennas}x{num_users}x{l}, got {}",
                num_antennas * num_users * l,
                taps.len()
            )));
        }
        Ok(Self {
            num_antennas,
            num_users,
            num_taps: l,
            taps,
            scenario,
            correlated,
            seed,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_taps(&self) -> usize {
        self.num_taps
    }

    pub fn taps(&self) -> &[Complex<T>] {
        &self.taps
    }

    pub fn taps_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.taps
    }

    /// CIR from antenna `m` to user `n`.
    pub fn cir(&self, m: usize, n: usize) -> &[Complex<T>] {
        let start = (m * self.num_users + n) * self.num_taps;
        &self.taps[start..start + self.num_taps]
    }

    pub fn cir_mut(&mut self, m: usize, n: usize) -> &mut [Complex<T>] {
        let start = (m * self.num_users + n) * self.num_taps;
        &mut self.taps[start..start + self.num_taps]
    }

    /// `Σ_{m,n,t} |h|²`.
    pub fn total_energy(&self) -> T {
        self.taps.iter().map(|h| h.norm_sqr()).sum()
    }

    /// `Σ_{m,t} |h_{m,n}(t)|²` for one user.
    pub fn user_energy(&self, n: usize) -> T {
        (0..self.num_antennas)
            .flat_map(|m| self.cir(m, n))
            .map(|h| h.norm_sqr())
            .sum()
    }

    /// Restriction to a subset of users, keeping antenna order.
    pub fn select_users(&self, users: &[usize]) -> Result<Self> {
        if users.is_empty() || users.iter().any(|&u| u >= self.num_users) {
            return Err(Error::InvalidArgument("user selection out of range".into()));
        }
        let mut taps = Vec::with_capacity(self.num_antennas * users.len() * self.num_taps);
        for m in 0..self.num_antennas {
            for &u in users {
                taps.extend_from_slice(self.cir(m, u));
            }
        }
        Self::from_taps(
            self.num_antennas,
            users.len(),
            taps,
            self.scenario.clone(),
            self.correlated,
            self.seed,
        )
    }
}
