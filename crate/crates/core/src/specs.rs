//! Restricted-band norm specifications and their evaluation.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{band_hinf_norm, FreqBand, RationalTF, POINTS_PER_DECADE};
use crate::loops::{positive_real_check, ClosedLoopMaps, PositiveRealReport};
use crate::sea::SeaPlant;

/// Relative slack on every bound.
pub const PASS_TOL: f64 = 1e-6;
/// Disturbance-to-torque bound, full band.
pub const GAMMA3: f64 = 0.03;
/// Noise-to-torque bound above `OMEGA_N`.
pub const GAMMA5: f64 = 0.3;
/// Upper edge of the interaction band for the rendering error, 6 Hz.
pub const OMEGA_E: f64 = 12.0 * PI;
/// Upper edge of the control-effort band, 6 Hz.
pub const OMEGA_U: f64 = 12.0 * PI;
/// Lower edge of the noise band, 20 Hz.
pub const OMEGA_N: f64 = 40.0 * PI;

/// Closed-loop channel a bound applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// hand motion → weighted error
    PheW,
    /// hand motion → control
    Phu,
    /// disturbance → torque
    Dt,
    /// disturbance → control
    Du,
    /// sensor noise → torque
    Nt,
    /// sensor noise → control
    Nu,
    /// scattering map (Z̄ − 1)/(Z̄ + 1)
    Passivity,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::PheW => "phe_w",
            Channel::Phu => "phu",
            Channel::Dt => "dt",
            Channel::Du => "du",
            Channel::Nt => "nt",
            Channel::Nu => "nu",
            Channel::Passivity => "passivity",
        }
    }

    pub fn select(self, maps: &ClosedLoopMaps) -> &RationalTF {
        match self {
            Channel::PheW => &maps.t_phe_w,
            Channel::Phu => &maps.t_phu,
            Channel::Dt => &maps.t_dt,
            Channel::Du => &maps.t_du,
            Channel::Nt => &maps.t_nt,
            Channel::Nu => &maps.t_nu,
            Channel::Passivity => &maps.w_pass,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Parse(format!("unknown channel {s:?}")))
    }
}

/// One bound `|T(jω)| ≤ γ` for `ω ∈ band`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecItemWire")]
pub struct SpecItem {
    pub channel: Channel,
    pub gamma: f64,
    pub band: FreqBand,
    pub hard: bool,
}

#[derive(Deserialize)]
struct SpecItemWire {
    channel: Channel,
    gamma: f64,
    band: FreqBand,
    hard: bool,
}

impl TryFrom<SpecItemWire> for SpecItem {
    type Error = Error;
    fn try_from(w: SpecItemWire) -> Result<Self> {
        SpecItem::new(w.channel, w.gamma, w.band, w.hard)
    }
}

impl SpecItem {
    pub fn new(channel: Channel, gamma: f64, band: FreqBand, hard: bool) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::validation("gamma", format!("must be positive, got {gamma}")));
        }
        if channel == Channel::Passivity && (gamma != 1.0 || !band.is_full() || !hard) {
            return Err(Error::validation(
                "passivity",
                "the passivity item is a hard unit bound on the full band",
            ));
        }
        Ok(Self { channel, gamma, band, hard })
    }

    pub fn soft(channel: Channel, gamma: f64, band: FreqBand) -> Result<Self> {
        Self::new(channel, gamma, band, false)
    }

    pub fn passivity() -> Self {
        Self {
            channel: Channel::Passivity,
            gamma: 1.0,
            band: FreqBand::full(),
            hard: true,
        }
    }
}

/// The five bounds used for the prototype: rendering error, control effort,
/// disturbance attenuation, high-frequency noise rejection and passivity.
pub fn default_spec_set(plant: &SeaPlant, gamma1: f64) -> Result<Vec<SpecItem>> {
    Ok(vec![
        SpecItem::soft(Channel::PheW, gamma1, FreqBand::below(OMEGA_E)?)?,
        SpecItem::soft(Channel::Phu, plant.motor_sat, FreqBand::below(OMEGA_U)?)?,
        SpecItem::soft(Channel::Dt, GAMMA3, FreqBand::full())?,
        SpecItem::soft(Channel::Nt, GAMMA5, FreqBand::above(OMEGA_N)?)?,
        SpecItem::passivity(),
    ])
}

pub fn load_spec_set(path: impl AsRef<Path>) -> Result<Vec<SpecItem>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ItemReport {
    pub channel: Channel,
    pub gamma: f64,
    pub band: FreqBand,
    pub hard: bool,
    pub achieved: f64,
    pub argmax_omega: f64,
    pub margin: f64,
    pub pass: bool,
    /// Direct positive-real test, only for the passivity item.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positive_real: Option<PositiveRealReport>,
}

impl ItemReport {
    pub fn level(&self) -> f64 {
        self.achieved / self.gamma
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpecReport {
    pub items: Vec<ItemReport>,
    pub stable: bool,
    pub spectral_abscissa: f64,
    pub all_pass: bool,
    /// Worst normalized level `max achieved/γ`.
    pub level: f64,
}

impl SpecReport {
    pub fn item(&self, channel: Channel) -> Option<&ItemReport> {
        self.items.iter().find(|i| i.channel == channel)
    }
}

/// Evaluate every item on the closed loop. An unstable loop fails overall;
/// items whose norm cannot be evaluated there report `+∞`.
pub fn evaluate(maps: &ClosedLoopMaps, specs: &[SpecItem]) -> Result<SpecReport> {
    let mut items = Vec::with_capacity(specs.len());
    for spec in specs {
        let h = spec.channel.select(maps);
        let norm = match band_hinf_norm(h, spec.band) {
            Ok(r) => r,
            Err(e) if maps.stable => {
                return Err(Error::Item {
                    item: spec.channel.name().to_string(),
                    source: Box::new(e),
                })
            }
            Err(_) => crate::lti::BandNormResult {
                value: f64::INFINITY,
                argmax_omega: f64::NAN,
                grid_points: 0,
            },
        };
        let positive_real = (spec.channel == Channel::Passivity)
            .then(|| positive_real_check(&maps.zbar, FreqBand::full(), POINTS_PER_DECADE));
        items.push(ItemReport {
            channel: spec.channel,
            gamma: spec.gamma,
            band: spec.band,
            hard: spec.hard,
            achieved: norm.value,
            argmax_omega: norm.argmax_omega,
            margin: spec.gamma - norm.value,
            pass: norm.value <= spec.gamma * (1.0 + PASS_TOL),
            positive_real,
        });
    }
    let level = items.iter().map(ItemReport::level).fold(0.0, f64::max);
    let all_pass = maps.stable && items.iter().all(|i| i.pass);
    Ok(SpecReport {
        items,
        stable: maps.stable,
        spectral_abscissa: maps.spectral_abscissa(),
        all_pass,
        level,
    })
}
