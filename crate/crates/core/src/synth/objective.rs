//! Scalar synthesis objective.

use super::structure::{decode, StructureKind};
use crate::loops::{close_loop, GeneralizedPlant};
use crate::lti::{classify_poles, STABILITY_MARGIN};
use crate::specs::{evaluate, SpecItem, SpecReport, PASS_TOL};

/// Offset added to the spectral abscissa of an unstable loop, so that any
/// stable design scores below any unstable one.
pub const UNSTABLE_OFFSET: f64 = 1e6;
/// Weight on a hard-item violation.
pub const HARD_PENALTY: f64 = 1e3;

/// `L(θ)` for a fixed plant, structure and bound set.
pub struct Objective<'a> {
    pub plant: &'a GeneralizedPlant,
    pub kind: StructureKind,
    pub specs: &'a [SpecItem],
    /// Weight on hard-item excess; `None` applies the full hard treatment.
    pub relaxed: Option<f64>,
}

impl<'a> Objective<'a> {
    pub fn new(plant: &'a GeneralizedPlant, kind: StructureKind, specs: &'a [SpecItem]) -> Self {
        Self { plant, kind, specs, relaxed: None }
    }

    /// Largest closed-loop pole real part, `+∞` when `θ` does not decode to a
    /// well-posed loop.
    pub fn abscissa(&self, theta: &[f64]) -> f64 {
        let Ok(k) = decode(self.kind, theta) else {
            return f64::INFINITY;
        };
        let g = self.plant;
        let delta = &(k.k1.num() * k.k2.den()) - &(k.k2.num() * k.k1.den());
        let d12 = k.k1.den() * k.k2.den();
        let ch = &(g.g1.den() * &d12) - &(g.g1.num() * &delta);
        if ch.is_zero() {
            return f64::INFINITY;
        }
        match ch.roots() {
            Ok(r) => classify_poles(&r, STABILITY_MARGIN).max_real,
            Err(_) => f64::INFINITY,
        }
    }

    /// Full report, `None` when `θ` does not decode or the loop is ill-posed.
    pub fn report(&self, theta: &[f64]) -> Option<SpecReport> {
        let k = decode(self.kind, theta).ok()?;
        let maps = close_loop(self.plant, &k).ok()?;
        evaluate(&maps, self.specs).ok()
    }

    /// Worst soft level, plus `1 + 1e3·excess` for each hard item beyond its
    /// pass tolerance. Unstable loops score `UNSTABLE_OFFSET + abscissa`.
    pub fn value(&self, theta: &[f64]) -> f64 {
        if theta.iter().any(|v| !v.is_finite()) {
            return f64::INFINITY;
        }
        let Some(k) = decode(self.kind, theta).ok() else {
            return f64::INFINITY;
        };
        let Ok(maps) = close_loop(self.plant, &k) else {
            return f64::INFINITY;
        };
        if !maps.stable {
            let a = maps.spectral_abscissa();
            return UNSTABLE_OFFSET + if a.is_finite() { a.max(0.0) } else { 1e6 };
        }
        match evaluate(&maps, self.specs) {
            Ok(r) => match self.relaxed {
                None => score(&r),
                Some(w) => relaxed_score(&r, w),
            },
            Err(_) => f64::INFINITY,
        }
    }
}

/// Objective value of an evaluated report.
pub fn score(r: &SpecReport) -> f64 {
    if !r.stable {
        return UNSTABLE_OFFSET + r.spectral_abscissa.max(0.0);
    }
    let mut soft: f64 = 0.0;
    let mut penalty = 0.0;
    for item in &r.items {
        if item.hard {
            let excess = item.level() - (1.0 + PASS_TOL);
            if excess > 0.0 {
                // the unit step keeps any hard failure above every passing design
                penalty += 1.0 + HARD_PENALTY * excess;
            }
        } else {
            soft = soft.max(item.level());
        }
    }
    soft + penalty
}

/// Worst soft level plus `w·excess` on hard items, without the unit step.
pub fn relaxed_score(r: &SpecReport, w: f64) -> f64 {
    let mut soft: f64 = 0.0;
    let mut penalty = 0.0;
    for item in &r.items {
        if item.hard {
            penalty += w * (item.level() - 1.0).max(0.0);
        } else {
            soft = soft.max(item.level());
        }
    }
    soft + penalty
}
