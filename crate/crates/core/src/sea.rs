//! The cable-driven series elastic actuator plant and its stiffness targets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{Polynomial, RationalTF};

/// Equivalent rotational stiffness of the spring pair, N·m/rad.
pub const KS: f64 = 0.0484;
/// Motor velocity saturation, rad/s.
pub const MOTOR_SAT: f64 = 44.0;
/// Slow pole standing in for the motor-position integrator, rad/s.
pub const INTEGRATOR_POLE: f64 = 0.2394;

/// Identified `ωd → τh` map, descending coefficients.
const G1_NUM: [f64; 2] = [-0.1064, -279.4];
const G1_DEN: [f64; 4] = [1.0, 81.64, 5821.0, 1389.0];

/// The linearized actuator seen from the human handle.
#[derive(Debug, Clone, PartialEq)]
pub struct SeaPlant {
    /// N·m/rad
    pub ks: f64,
    /// Velocity loop, desired → actual motor velocity.
    pub v: RationalTF,
    /// Desired motor velocity → interaction torque, N·m per rad/s.
    pub g1: RationalTF,
    pub integrator_pole: f64,
    pub motor_sat: f64,
}

/// JSON plant description; coefficients ascend in powers of `s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlantConfig {
    #[serde(rename = "Ks")]
    pub ks: f64,
    #[serde(rename = "G1")]
    pub g1: RationalTF,
    pub motor_sat: f64,
    pub integrator_pole: f64,
}

impl PlantConfig {
    /// The identified prototype.
    pub fn table1() -> Self {
        Self {
            ks: KS,
            g1: RationalTF::from_descending(&G1_NUM, &G1_DEN).expect("constant plant"),
            motor_sat: MOTOR_SAT,
            integrator_pole: INTEGRATOR_POLE,
        }
    }

    pub fn build(&self) -> Result<SeaPlant> {
        if !(self.ks > 0.0) || !self.ks.is_finite() {
            return Err(Error::validation("Ks", format!("must be positive, got {}", self.ks)));
        }
        if !(self.motor_sat > 0.0) {
            return Err(Error::validation("motor_sat", format!("must be positive, got {}", self.motor_sat)));
        }
        if !(self.integrator_pole > 0.0) {
            return Err(Error::validation(
                "integrator_pole",
                format!("must be positive, got {}", self.integrator_pole),
            ));
        }
        let st = self.g1.stability(crate::lti::STABILITY_MARGIN);
        if !st.stable {
            return Err(Error::validation(
                "G1",
                format!("must be stable, max pole real part {}", st.max_real),
            ));
        }
        // V(s) = G1(s) (s + p) / Ks, with (s + p) divided out of the denominator
        let v = RationalTF::new(
            self.g1.num().clone(),
            self.g1.den().deflate(-self.integrator_pole).scale(self.ks),
        )?;
        Ok(SeaPlant {
            ks: self.ks,
            v,
            g1: self.g1.clone(),
            integrator_pole: self.integrator_pole,
            motor_sat: self.motor_sat,
        })
    }
}

/// The identified prototype plant.
pub fn default_plant() -> SeaPlant {
    PlantConfig::table1().build().expect("identified plant is valid")
}

/// Load and validate a plant from a JSON [`PlantConfig`] file.
pub fn load_plant(path: impl AsRef<Path>) -> Result<SeaPlant> {
    let text = std::fs::read_to_string(path)?;
    parse_plant(&text)
}

pub fn parse_plant(json: &str) -> Result<SeaPlant> {
    let cfg: PlantConfig = serde_json::from_str(json)?;
    cfg.build()
}

/// `G1` in its printed factored form: `−Ks (2.2s + 5778) / ((s² + 81.44s + 5802)(s + 0.2394))`.
pub fn factored_g1() -> RationalTF {
    let num = Polynomial::from_descending(&[2.200, 5778.0]).scale(-0.04840);
    let den = &Polynomial::from_descending(&[1.0, 81.44, 5802.0]) * &Polynomial::from_descending(&[1.0, 0.2394]);
    RationalTF::new(num, den).expect("constant plant")
}

/// Pure-stiffness target `Zd = α Ks`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredImpedance {
    pub alpha: f64,
    pub zd: RationalTF,
}

impl DesiredImpedance {
    /// N·m/rad
    pub fn stiffness(&self) -> f64 {
        self.zd.num().coeff(0)
    }
}

pub fn desired_impedance(plant: &SeaPlant, alpha: f64) -> Result<DesiredImpedance> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Range(format!("alpha = {alpha} (expected 0 <= alpha <= 1)")));
    }
    Ok(DesiredImpedance {
        alpha,
        zd: RationalTF::constant(alpha * plant.ks),
    })
}
