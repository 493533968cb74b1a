//! Reference controllers for the prototype and their verification.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::structure::{decode, StructureKind};
use crate::error::{Error, Result};
use crate::loops::{build_generalized_plant, close_loop, Controller, GeneralizedPlant};
use crate::lti::{band_hinf_norm, FreqBand, RationalTF};
use crate::sea::{default_plant, desired_impedance, SeaPlant};
use crate::specs::{default_spec_set, evaluate, SpecReport, OMEGA_E};

/// Rendering-error bounds tuned per stiffness ratio for the weighted error,
/// as `(α, γ1)`.
pub const WEIGHTED_GAMMA1: [(f64, f64); 4] = [(0.0, 0.054), (0.3, 0.029), (0.6, 0.016), (0.9, 0.004)];

/// The stiffness ratio at which the third-order controller was tuned.
pub const REFERENCE_ALPHA: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Published {
    /// Third-order two-input controller.
    Hinf3,
    /// Pure-derivative PID tuned for passivity.
    Pid,
    /// Filtered-derivative PID from structured synthesis.
    Hpid,
}

impl Published {
    pub const ALL: [Published; 3] = [Published::Hinf3, Published::Pid, Published::Hpid];

    pub fn name(self) -> &'static str {
        match self {
            Published::Hinf3 => "hinf3",
            Published::Pid => "pid",
            Published::Hpid => "hpid",
        }
    }

    pub fn kind(self) -> StructureKind {
        match self {
            Published::Hinf3 => StructureKind::FreePair { order: 3 },
            Published::Pid => StructureKind::Pid,
            Published::Hpid => StructureKind::FilteredPid,
        }
    }

    pub fn theta(self) -> Vec<f64> {
        match self {
            Published::Hinf3 => hinf3_theta(),
            Published::Pid => vec![1000.0, 10.0, 20.0],
            Published::Hpid => vec![1333.0, 0.0002, 403.0, 8.0],
        }
    }

    pub fn controller(self) -> Controller {
        decode(self.kind(), &self.theta()).expect("published parameters have the right shape")
    }
}

impl fmt::Display for Published {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Published {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Published::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown controller {s:?}")))
    }
}

pub fn hinf3_theta() -> Vec<f64> {
    vec![
        4953.0, 2.925e07, 4.346e10, -8.294e09, //
        3208.0, 8.408e06, 8.026e09, //
        -2180.0, -7.023e06, -1.984e09, -7.179e11, //
        1444.0, 2.133e06, 4.533e08,
    ]
}

pub fn hinf3() -> Controller {
    Published::Hinf3.controller()
}

/// Unit-weight plant at stiffness ratio `alpha`.
pub fn unweighted_plant(plant: &SeaPlant, alpha: f64) -> Result<GeneralizedPlant> {
    build_generalized_plant(plant, &desired_impedance(plant, alpha)?, &RationalTF::constant(1.0))
}

/// Rendering-error peak of the third-order controller at the reference ratio,
/// `sup_{ω ≤ ωe} |T_{φh e}| / Ks` with unit weight. This is the rendering
/// bound, in units of `Ks`, that replaces the weighted one.
pub fn recalibrated_gamma1(plant: &SeaPlant) -> Result<f64> {
    let g = unweighted_plant(plant, REFERENCE_ALPHA)?;
    let maps = close_loop(&g, &hinf3())?;
    Ok(band_hinf_norm(&maps.t_phe, FreqBand::below(OMEGA_E)?)?.value / plant.ks)
}

/// Unit-weight rendering bound (N·m/rad) for ratio `alpha`: the tuned
/// weighted bound, linearly interpolated in `α`, rescaled so the reference
/// ratio maps onto [`recalibrated_gamma1`].
pub fn default_gamma1(plant: &SeaPlant, alpha: f64) -> Result<f64> {
    let scale = recalibrated_gamma1(plant)? * plant.ks / weighted_gamma1(REFERENCE_ALPHA);
    Ok(weighted_gamma1(alpha) * scale)
}

fn weighted_gamma1(alpha: f64) -> f64 {
    let t = &WEIGHTED_GAMMA1;
    if alpha <= t[0].0 {
        return t[0].1;
    }
    for w in t.windows(2) {
        let ((a0, g0), (a1, g1)) = (w[0], w[1]);
        if alpha <= a1 {
            return g0 + (g1 - g0) * (alpha - a0) / (a1 - a0);
        }
    }
    // extrapolate past the last tuned ratio, floored at a tenth of it
    let ((a0, g0), (a1, g1)) = (t[2], t[3]);
    (g1 + (g1 - g0) * (alpha - a1) / (a1 - a0)).max(0.1 * g1)
}

/// Close a reference controller at `α Ks` and evaluate the default bounds.
pub fn verify_published(which: Published, alpha: f64) -> Result<SpecReport> {
    let plant = default_plant();
    let g = unweighted_plant(&plant, alpha)?;
    let specs = default_spec_set(&plant, default_gamma1(&plant, alpha)?)?;
    evaluate(&close_loop(&g, &which.controller())?, &specs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specs::Channel;

    #[test]
    fn names_parse() {
        for p in Published::ALL {
            assert_eq!(p.name().parse::<Published>().unwrap(), p);
        }
        assert!("lqr".parse::<Published>().is_err());
    }

    #[test]
    fn gamma1_interpolation() {
        assert_eq!(weighted_gamma1(0.6), 0.016);
        assert_eq!(weighted_gamma1(0.0), 0.054);
        assert!((weighted_gamma1(0.45) - 0.0225).abs() < 1e-15);
        assert!((weighted_gamma1(1.0) - 0.0004).abs() < 1e-15);
        let plant = default_plant();
        let g = default_gamma1(&plant, REFERENCE_ALPHA).unwrap();
        assert_eq!(g, recalibrated_gamma1(&plant).unwrap() * plant.ks);
    }

    #[test]
    fn reference_controller_passes_everything() {
        let r = verify_published(Published::Hinf3, 0.6).unwrap();
        assert!(r.stable);
        assert!(r.all_pass, "{r:#?}");
        assert!(r.item(Channel::Passivity).unwrap().achieved <= 1.0 + 1e-6);
    }
}
