//! Generalized plant assembly and loop closure.
//!
//! Signals (all scalar):
//!
//! ```text
//! τh      = −Ks φh + G1 (d + u)          interaction torque
//! τh_meas = τh + n                       what the spring sensor reports
//! τd      = −Zd φh                       desired torque
//! e       = τd − τh,   ẽ = We e          rendering error
//! e_meas  = τd − τh_meas
//! u       = K1 τh_meas + K2 e_meas       desired motor velocity ωd
//! ```
//!
//! With `u = 0` the measured torque reproduces the open-loop relation
//! `τh = −Ks φh + G1 d + n + G1 ωd` exactly.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{
    classify_poles, golden_max, sweep_grid, FreqBand, Polynomial, RationalTF, Stability, MINREAL_TOL,
    STABILITY_MARGIN,
};
use crate::sea::{DesiredImpedance, SeaPlant};

/// Tolerance on `Re Z̄(jω)` below zero still accepted as passive.
pub const PR_TOL: f64 = 1e-8;
/// Cancellation tolerance for the closed-loop channels. Tighter than
/// [`MINREAL_TOL`]: fast controller poles move by only `|L(p)|` when the loop
/// closes, and cancelling such a near pair would shift the low-frequency
/// response by about that relative amount.
pub const CLOSURE_CANCEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Input {
    HandMotion,
    Disturbance,
    Noise,
    Control,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Output {
    WeightedError,
    Control,
    Torque,
    Error,
    MeasuredTorque,
    MeasuredError,
}

pub const INPUTS: [Input; 4] = [Input::HandMotion, Input::Disturbance, Input::Noise, Input::Control];
pub const OUTPUTS: [Output; 6] = [
    Output::WeightedError,
    Output::Control,
    Output::Torque,
    Output::Error,
    Output::MeasuredTorque,
    Output::MeasuredError,
];

/// Open-loop interconnection of the actuator, the stiffness target and the
/// error weight.
#[derive(Debug, Clone)]
pub struct GeneralizedPlant {
    pub ks: f64,
    pub g1: RationalTF,
    pub zd: DesiredImpedance,
    pub we: RationalTF,
}

pub fn build_generalized_plant(plant: &SeaPlant, zd: &DesiredImpedance, we: &RationalTF) -> Result<GeneralizedPlant> {
    if !we.is_proper() {
        return Err(Error::validation("We", "weighting function must be proper"));
    }
    if !we.is_stable() {
        return Err(Error::validation("We", "weighting function must be stable"));
    }
    Ok(GeneralizedPlant {
        ks: plant.ks,
        g1: plant.g1.clone(),
        zd: zd.clone(),
        we: we.clone(),
    })
}

impl GeneralizedPlant {
    /// Open-loop channel from `input` to `output`.
    pub fn channel(&self, input: Input, output: Output) -> RationalTF {
        let ks = RationalTF::constant(self.ks);
        let zd = self.zd.zd.clone();
        let zero = RationalTF::zero();
        let one = RationalTF::constant(1.0);
        let torque = |i: Input| match i {
            Input::HandMotion => ks.neg(),
            Input::Disturbance | Input::Control => self.g1.clone(),
            Input::Noise => zero.clone(),
        };
        let error = |i: Input| match i {
            Input::HandMotion => zd.neg().sub(&torque(i)),
            _ => torque(i).neg(),
        };
        match output {
            Output::Torque => torque(input),
            Output::MeasuredTorque => match input {
                Input::Noise => one,
                _ => torque(input),
            },
            Output::Error => error(input),
            Output::MeasuredError => match input {
                Input::Noise => one.neg(),
                _ => error(input),
            },
            Output::WeightedError => self.we.mul(&error(input)),
            Output::Control => match input {
                Input::Control => one,
                _ => zero,
            },
        }
    }

    pub fn zd_stiffness(&self) -> f64 {
        self.zd.stiffness()
    }
}

/// Two-input output-feedback controller `u = K1 τh_meas + K2 e_meas`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Controller {
    #[serde(rename = "K1")]
    pub k1: RationalTF,
    #[serde(rename = "K2")]
    pub k2: RationalTF,
}

impl Controller {
    pub fn new(k1: RationalTF, k2: RationalTF) -> Self {
        Self { k1, k2 }
    }

    pub fn zero() -> Self {
        Self::new(RationalTF::zero(), RationalTF::zero())
    }

    /// Largest denominator degree.
    pub fn order(&self) -> usize {
        self.k1.den().degree().max(self.k2.den().degree())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// Closed-loop channels. `t_<input><output>`: ph = hand motion, d =
/// disturbance, n = sensor noise; e = error, e_w = weighted error, u =
/// control, t = interaction torque.
#[derive(Debug, Clone)]
pub struct ClosedLoopMaps {
    pub t_phe_w: RationalTF,
    pub t_phe: RationalTF,
    pub t_phu: RationalTF,
    pub t_dt: RationalTF,
    pub t_du: RationalTF,
    pub t_nt: RationalTF,
    pub t_nu: RationalTF,
    pub t_pht: RationalTF,
    /// Impedance `τh / (−φh)`.
    pub z: RationalTF,
    /// `Z / s`, torque over handle velocity.
    pub zbar: RationalTF,
    /// `(Z̄ − 1) / (Z̄ + 1)`.
    pub w_pass: RationalTF,
    pub zd_stiffness: f64,
    pub stable: bool,
    pub stability: Stability,
    /// Common closed-loop characteristic polynomial.
    pub characteristic: Polynomial,
}

impl ClosedLoopMaps {
    /// Largest real part of the closed-loop poles.
    pub fn spectral_abscissa(&self) -> f64 {
        self.stability.max_real
    }
}

/// Close the loop `u = K1 τh_meas + K2 e_meas`.
///
/// Every channel is formed directly over the common characteristic polynomial
/// `dG d1 d2 − nG (n1 d2 − n2 d1)` and then passed through minreal.
pub fn close_loop(g: &GeneralizedPlant, k: &Controller) -> Result<ClosedLoopMaps> {
    let (ng, dg) = (g.g1.num(), g.g1.den());
    let (n1, d1) = (k.k1.num(), k.k1.den());
    let (n2, d2) = (k.k2.num(), k.k2.den());
    let ks = g.ks;
    let zd = g.zd_stiffness();

    let delta = &(n1 * d2) - &(n2 * d1);
    let d12 = d1 * d2;
    let characteristic = &(dg * &d12) - &(ng * &delta);
    if characteristic.is_zero() {
        return Err(Error::IllPosedLoop);
    }
    let over = |num: Polynomial| -> Result<RationalTF> {
        Ok(RationalTF::new(num, characteristic.clone())?.minreal(CLOSURE_CANCEL_TOL))
    };

    // Ks dG d2 + Zd nG n2
    let spring_path = &(dg * d2).scale(ks) + &(ng * n2).scale(zd);
    let z_num = d1 * &spring_path;
    let t_pht = over(-&z_num)?;
    let t_dt = over(ng * &d12)?;
    let t_nt = over(ng * &delta)?;
    let t_du = t_nt.clone();
    let t_nu = over(dg * &delta)?;
    let t_phu = over(-&(dg * &(&delta.scale(ks) + &(n2 * d1).scale(zd))))?;
    let t_phe = over(d2 * &(&(dg * d1).scale(ks - zd) + &(ng * n1).scale(zd)))?;
    let t_phe_w = if g.we == RationalTF::constant(1.0) {
        t_phe.clone()
    } else {
        g.we.mul(&t_phe)
    };
    let z = over(z_num.clone())?;
    let s_char = &Polynomial::s() * &characteristic;
    let zbar = RationalTF::new(z_num.clone(), s_char.clone())?.minreal(CLOSURE_CANCEL_TOL);
    let w_den = &z_num + &s_char;
    if w_den.is_zero() {
        return Err(Error::Degenerate("Z̄ ≡ −1".into()));
    }
    let w_pass = RationalTF::new(&z_num - &s_char, w_den)?.minreal(CLOSURE_CANCEL_TOL);

    let poles = characteristic.roots()?;
    let stability = classify_poles(&poles, STABILITY_MARGIN);
    Ok(ClosedLoopMaps {
        t_phe_w,
        t_phe,
        t_phu,
        t_dt,
        t_du,
        t_nt,
        t_nu,
        t_pht,
        z,
        zbar,
        w_pass,
        zd_stiffness: zd,
        stable: stability.stable,
        stability,
        characteristic,
    })
}

/// Closed-loop response from `input` to `output` at one frequency, computed
/// by a pointwise linear-fractional closure of the open-loop channel table.
pub fn pointwise_closed_loop(g: &GeneralizedPlant, k: &Controller, input: Input, output: Output, omega: f64) -> Result<Complex64> {
    let ev = |i: Input, o: Output| g.channel(i, o).eval(omega);
    let (k1, k2) = (k.k1.eval(omega)?, k.k2.eval(omega)?);
    let loop_gain = k1 * ev(Input::Control, Output::MeasuredTorque)? + k2 * ev(Input::Control, Output::MeasuredError)?;
    let drive = k1 * ev(input, Output::MeasuredTorque)? + k2 * ev(input, Output::MeasuredError)?;
    let one = Complex64::new(1.0, 0.0);
    if (one - loop_gain).norm() == 0.0 {
        return Err(Error::IllPosedLoop);
    }
    let u = drive / (one - loop_gain);
    Ok(ev(input, output)? + ev(Input::Control, output)? * u)
}

/// `(Z̄ − 1) / (Z̄ + 1)`, the scattering form whose unit peak gain bound is
/// equivalent to positive realness.
pub fn passivity_map(maps: &ClosedLoopMaps) -> Result<RationalTF> {
    scattering(&maps.zbar)
}

pub fn scattering(zbar: &RationalTF) -> Result<RationalTF> {
    let (a, b) = (zbar.num(), zbar.den());
    let den = a + b;
    if den.is_zero() {
        return Err(Error::Degenerate("Z̄ ≡ −1".into()));
    }
    Ok(RationalTF::new(a - b, den)?.minreal(MINREAL_TOL))
}

/// Outcome of the direct positive-real test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositiveRealReport {
    pub pass: bool,
    pub no_rhp_poles: bool,
    pub axis_poles_simple: bool,
    /// Minimum of `Re Z̄(jω)` over the non-pole grid frequencies.
    pub min_real_part: f64,
    pub worst_omega: f64,
    pub grid_points: usize,
}

/// Check that `zbar` is positive real on `band`: no right-half-plane poles,
/// simple imaginary-axis poles, and `Re Z̄(jω) ≥ −PR_TOL` elsewhere.
pub fn positive_real_check(zbar: &RationalTF, band: FreqBand, per_decade: usize) -> PositiveRealReport {
    positive_real_check_tol(zbar, band, per_decade, PR_TOL)
}

pub fn positive_real_check_tol(zbar: &RationalTF, band: FreqBand, per_decade: usize, tol: f64) -> PositiveRealReport {
    let poles = zbar.poles().unwrap_or_default();
    let zeros = zbar.zeros().unwrap_or_default();
    let st = classify_poles(&poles, STABILITY_MARGIN);
    let axis: Vec<f64> = st.imaginary_axis.iter().map(|&(w, _)| w).collect();
    let near_pole = |w: f64| axis.iter().any(|&p| (w - p).abs() <= 1e-6 * p.max(1e-6));
    let grid: Vec<f64> = sweep_grid(&poles, &zeros, band, per_decade)
        .into_iter()
        .filter(|&w| !near_pole(w))
        .collect();
    let re = |w: f64| zbar.eval_unchecked(w).re;
    let values: Vec<f64> = grid.iter().map(|&w| re(w)).collect();

    let mut min_re = f64::INFINITY;
    let mut worst = band.lo();
    for (&w, &v) in grid.iter().zip(&values) {
        if v < min_re {
            min_re = v;
            worst = w;
        }
    }
    // refine the deepest local minima
    let mut dips: Vec<usize> = (1..grid.len().saturating_sub(1))
        .filter(|&i| values[i] <= values[i - 1] && values[i] <= values[i + 1])
        .collect();
    dips.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let neg_re = |w: f64| -re(w);
    for &i in dips.iter().take(8) {
        let (w, v) = golden_max(&neg_re, grid[i - 1], grid[i + 1]);
        if !near_pole(w) && -v < min_re {
            min_re = -v;
            worst = w;
        }
    }
    if band.hi().is_infinite() {
        if let Some(l) = zbar.limit_at_infinity() {
            if l.re < min_re {
                min_re = l.re;
                worst = f64::INFINITY;
            }
        }
    }
    let no_rhp = !st.rhp;
    let simple = st.imaginary_axis.iter().all(|&(_, m)| m == 1);
    PositiveRealReport {
        pass: no_rhp && simple && min_re >= -tol,
        no_rhp_poles: no_rhp,
        axis_poles_simple: simple,
        min_real_part: min_re,
        worst_omega: worst,
        grid_points: grid.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::band_hinf_norm;
    use crate::sea::{default_plant, desired_impedance};

    fn plant_at(alpha: f64) -> GeneralizedPlant {
        let p = default_plant();
        build_generalized_plant(&p, &desired_impedance(&p, alpha).unwrap(), &RationalTF::constant(1.0)).unwrap()
    }

    fn tf(num: &[f64], den: &[f64]) -> RationalTF {
        RationalTF::from_descending(num, den).unwrap()
    }

    #[test]
    fn open_loop_channels() {
        let g = plant_at(0.6);
        assert_eq!(g.channel(Input::HandMotion, Output::Torque), RationalTF::constant(-0.0484));
        assert_eq!(g.channel(Input::Disturbance, Output::Torque), g.g1);
        let e = g.channel(Input::HandMotion, Output::Error);
        assert!((e.dc_gain().unwrap() - 0.4 * 0.0484).abs() < 1e-15);
        assert_eq!(e.den().degree(), 0);
        assert_eq!(g.channel(Input::Noise, Output::MeasuredTorque), RationalTF::constant(1.0));
        assert_eq!(g.channel(Input::Noise, Output::Torque), RationalTF::zero());
    }

    #[test]
    fn improper_weight_is_rejected() {
        let p = default_plant();
        let zd = desired_impedance(&p, 0.6).unwrap();
        assert!(build_generalized_plant(&p, &zd, &tf(&[1.0, 1.0], &[1.0])).is_err());
    }

    #[test]
    fn open_controller_leaves_the_spring() {
        let g = plant_at(0.6);
        let m = close_loop(&g, &Controller::zero()).unwrap();
        assert!((m.z.dc_gain().unwrap() - 0.0484).abs() < 1e-12);
        assert_eq!(m.z.den().degree(), 0);
        assert!(m.t_nt.is_zero());
        for w in [0.0, 1.0, 50.0] {
            assert!((m.t_dt.eval(w).unwrap() - g.g1.eval(w).unwrap()).norm() < 1e-12);
        }
        assert!(m.stable);
        // the literal open-loop noise path, seen at the sensor, is unity
        let lit = pointwise_closed_loop(&g, &Controller::zero(), Input::Noise, Output::MeasuredTorque, 3.0).unwrap();
        assert!((lit - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ill_posed_loop() {
        // G1 = −1 constant and K1 − K2 = −1 make 1 − G1 (K1 − K2) ≡ 0
        let g = GeneralizedPlant {
            ks: 1.0,
            g1: RationalTF::constant(-1.0),
            zd: DesiredImpedance { alpha: 0.0, zd: RationalTF::zero() },
            we: RationalTF::constant(1.0),
        };
        let k = Controller::new(RationalTF::constant(-1.0), RationalTF::zero());
        assert!(matches!(close_loop(&g, &k), Err(Error::IllPosedLoop)));
    }

    #[test]
    fn scattering_examples() {
        assert!(scattering(&RationalTF::constant(1.0)).unwrap().is_zero());
        let spring = tf(&[0.0484], &[1.0, 0.0]);
        let w = scattering(&spring).unwrap();
        for om in [0.0, 0.01, 1.0, 100.0] {
            assert!((w.eval(om).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        let w = scattering(&tf(&[1.0], &[1.0, 1.0])).unwrap();
        let want = tf(&[-1.0, 0.0], &[1.0, 2.0]);
        for om in [0.0, 0.5, 3.0, 1e3] {
            assert!((w.eval(om).unwrap() - want.eval(om).unwrap()).norm() < 1e-12);
        }
        let peak = band_hinf_norm(&w, FreqBand::full()).unwrap();
        assert!((peak.value - 1.0).abs() < 1e-12 && peak.argmax_omega.is_infinite());
        assert!(matches!(scattering(&RationalTF::constant(-1.0)), Err(Error::Degenerate(_))));
    }

    #[test]
    fn positive_real_examples() {
        let r = positive_real_check(&tf(&[1.0], &[1.0, 1.0]), FreqBand::full(), 100);
        assert!(r.pass && r.min_real_part >= 0.0 && r.min_real_part < 1e-9);
        let r = positive_real_check(&tf(&[1.0, -10.0], &[1.0, 2.0, 1.0]), FreqBand::full(), 100);
        assert!(!r.pass);
        assert!((r.min_real_part + 10.0).abs() < 1e-9 && r.worst_omega == 0.0);
        let r = positive_real_check(&tf(&[0.0484], &[1.0, 0.0]), FreqBand::full(), 100);
        assert!(r.pass && r.axis_poles_simple);
        let r = positive_real_check(&tf(&[1.0], &[1.0, -1.0]), FreqBand::full(), 100);
        assert!(!r.pass && !r.no_rhp_poles);
        let r = positive_real_check(&tf(&[1.0], &[1.0, 0.0, 0.0]), FreqBand::full(), 100);
        assert!(!r.pass && !r.axis_poles_simple);
    }

    #[test]
    fn controller_file_format() {
        let json = r#"{"K1":{"num":[0],"den":[1]},"K2":{"num":[-10,-1000,-20],"den":[0,1]}}"#;
        let k: Controller = serde_json::from_str(json).unwrap();
        assert!(k.k1.is_zero());
        assert_eq!(k.k2, tf(&[-20.0, -1000.0, -10.0], &[1.0, 0.0]));
        assert_eq!(k.order(), 1);
    }
}
