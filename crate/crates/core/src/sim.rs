//! Time-domain simulation of a closed loop and the comparison metrics.
//!
//! Each closed-loop channel is realized, discretized exactly for a zero- or
//! first-order input hold and driven by its own input; outputs are summed. Channels
//! that are improper get a roll-off pole at [`ROLLOFF_POLE`] per excess
//! degree, for simulation only, and the result records which ones.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::loops::ClosedLoopMaps;
use crate::lti::{Polynomial, RationalTF, StateSpaceLTI};

/// Roll-off pole (rad/s) appended to improper channels.
pub const ROLLOFF_POLE: f64 = 1000.0;
/// Default sample time, 1 ms.
pub const DEFAULT_DT: f64 = 1e-3;

/// Input signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Signal {
    Zero,
    /// Linear chirp from `f0_hz` to `f1_hz` over `duration_s`, zero initial
    /// phase, zero afterwards.
    Chirp { f0_hz: f64, f1_hz: f64, duration_s: f64, amplitude: f64 },
    Sinusoid {
        freq_hz: f64,
        amplitude: f64,
        #[serde(default)]
        phase_rad: f64,
    },
    /// One value per sample of the scenario.
    Samples { values: Vec<f64> },
}

impl Default for Signal {
    fn default() -> Self {
        Signal::Zero
    }
}

impl Signal {
    fn validate(&self, field: &str, n: usize) -> Result<()> {
        let bad = |reason: String| Err(Error::validation(field, reason));
        match self {
            Signal::Zero => Ok(()),
            Signal::Chirp { f0_hz, f1_hz, duration_s, amplitude } => {
                if ![*f0_hz, *f1_hz, *duration_s, *amplitude].iter().all(|v| v.is_finite()) {
                    return bad("chirp parameters must be finite".into());
                }
                if *f0_hz < 0.0 || f0_hz > f1_hz {
                    return bad(format!("chirp needs 0 ≤ f0 ≤ f1, got {f0_hz} and {f1_hz}"));
                }
                if *duration_s <= 0.0 {
                    return bad("chirp duration must be positive".into());
                }
                Ok(())
            }
            Signal::Sinusoid { freq_hz, amplitude, phase_rad } => {
                if ![*freq_hz, *amplitude, *phase_rad].iter().all(|v| v.is_finite()) || *freq_hz < 0.0 {
                    return bad("sinusoid needs a finite, non-negative frequency".into());
                }
                Ok(())
            }
            Signal::Samples { values } => {
                if values.len() != n {
                    return bad(format!("expected {n} samples, got {}", values.len()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("samples must be finite".into());
                }
                Ok(())
            }
        }
    }

    pub fn at(&self, t: f64, k: usize) -> f64 {
        match self {
            Signal::Zero => 0.0,
            Signal::Chirp { f0_hz, f1_hz, duration_s, amplitude } => {
                if t > *duration_s {
                    return 0.0;
                }
                let rate = (f1_hz - f0_hz) / duration_s;
                amplitude * (2.0 * PI * (f0_hz * t + 0.5 * rate * t * t)).sin()
            }
            Signal::Sinusoid { freq_hz, amplitude, phase_rad } => amplitude * (2.0 * PI * freq_hz * t + phase_rad).sin(),
            Signal::Samples { values } => values[k],
        }
    }

    /// The same signal with its amplitude multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Signal {
        match self.clone() {
            Signal::Zero => Signal::Zero,
            Signal::Chirp { f0_hz, f1_hz, duration_s, amplitude } => Signal::Chirp {
                f0_hz,
                f1_hz,
                duration_s,
                amplitude: amplitude * k,
            },
            Signal::Sinusoid { freq_hz, amplitude, phase_rad } => Signal::Sinusoid {
                freq_hz,
                amplitude: amplitude * k,
                phase_rad,
            },
            Signal::Samples { values } => Signal::Samples { values: values.into_iter().map(|v| v * k).collect() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    /// Hand motion φh, rad.
    pub hand_motion: Signal,
    /// Disturbance d at the motor input, rad/s.
    #[serde(default)]
    pub disturbance: Signal,
    /// Standard deviation of white torque-sensor noise per sample, N·m.
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub noise_seed: u64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub duration: f64,
    #[serde(default)]
    pub hold: Hold,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

impl SimScenario {
    /// `0 → 6 Hz` chirp of the given amplitude over `duration` seconds.
    pub fn chirp(amplitude: f64, duration: f64) -> Self {
        Self {
            hand_motion: Signal::Chirp { f0_hz: 0.0, f1_hz: 6.0, duration_s: duration, amplitude },
            disturbance: Signal::Zero,
            noise_std: 0.0,
            noise_seed: 0,
            dt: DEFAULT_DT,
            duration,
            hold: Hold::Linear,
        }
    }

    pub fn samples(&self) -> usize {
        (self.duration / self.dt + 1e-9).floor() as usize + 1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::validation("dt", "must be positive"));
        }
        if !(self.duration >= self.dt) || !self.duration.is_finite() {
            return Err(Error::validation("duration", "must be at least dt"));
        }
        if !(self.noise_std >= 0.0) || !self.noise_std.is_finite() {
            return Err(Error::validation("noise_std", "must be non-negative"));
        }
        let n = self.samples();
        self.hand_motion.validate("hand_motion", n)?;
        self.disturbance.validate("disturbance", n)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples()).map(|k| k as f64 * self.dt).collect()
    }
}

/// How the input behaves between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hold {
    /// Piecewise constant.
    Zero,
    /// Piecewise linear between samples. High-gain channels see no staircase
    /// ripple, so smooth inputs are tracked to O(dt²).
    #[default]
    Linear,
}

/// Discretization of a single-input single-output system:
/// `x⁺ = Ad x + Bd u_k + B1 (u_{k+1} − u_k)`, `y = c·x + d u`.
#[derive(Debug, Clone)]
pub struct Discrete {
    pub ad: DMatrix<f64>,
    pub bd: DVector<f64>,
    /// Zero for the zero-order hold.
    pub b1: DVector<f64>,
    pub c: DVector<f64>,
    pub d: f64,
}

/// Exact ZOH via the exponential of `[[A, B], [0, 0]]·dt`.
pub fn discretize(ss: &StateSpaceLTI, dt: f64) -> Discrete {
    discretize_with(ss, dt, Hold::Zero)
}

/// Exact discretization for the given hold. The linear hold exponentiates
/// `[[A, B, 0], [0, 0, I], [0, 0, 0]]·dt` with the input slope as third state.
pub fn discretize_with(ss: &StateSpaceLTI, dt: f64, hold: Hold) -> Discrete {
    let n = ss.order();
    let extra = match hold {
        Hold::Zero => 1,
        Hold::Linear => 2,
    };
    let mut m = DMatrix::zeros(n + extra, n + extra);
    m.view_mut((0, 0), (n, n)).copy_from(&(&ss.a * dt));
    m.view_mut((0, n), (n, 1)).copy_from(&(&ss.b * dt));
    if hold == Hold::Linear {
        m[(n, n + 1)] = dt;
    }
    let e = m.exp();
    let b1 = match hold {
        Hold::Zero => DVector::zeros(n),
        Hold::Linear => e.view((0, n + 1), (n, 1)).column(0) / dt,
    };
    Discrete {
        ad: e.view((0, 0), (n, n)).into_owned(),
        bd: e.view((0, n), (n, 1)).column(0).into_owned(),
        b1,
        c: ss.c.row(0).transpose().into_owned(),
        d: ss.d[(0, 0)],
    }
}

impl Discrete {
    /// Response to `u`, starting from rest.
    pub fn run(&self, u: &[f64]) -> Vec<f64> {
        let mut x = DVector::zeros(self.ad.nrows());
        let mut y = Vec::with_capacity(u.len());
        for (k, &uk) in u.iter().enumerate() {
            y.push(self.c.dot(&x) + self.d * uk);
            let du = u.get(k + 1).map_or(0.0, |next| next - uk);
            x = &self.ad * &x + &self.bd * uk + &self.b1 * du;
        }
        y
    }
}

/// `h` made proper with `ROLLOFF_POLE` poles; `true` when any were added.
pub fn with_rolloff(h: &RationalTF) -> Result<(RationalTF, bool)> {
    let excess = h.num().degree().saturating_sub(h.den().degree());
    if h.is_zero() || excess == 0 {
        return Ok((h.clone(), false));
    }
    let mut den = Polynomial::one();
    for _ in 0..excess {
        den = &den * &Polynomial::new(vec![ROLLOFF_POLE, 1.0]);
    }
    let lp = RationalTF::new(Polynomial::constant(ROLLOFF_POLE.powi(excess as i32)), den)?;
    Ok((h.mul(&lp), true))
}

/// Response of `h` to `u` sampled every `dt`; zero maps produce zeros.
pub fn channel_response(h: &RationalTF, u: &[f64], dt: f64, hold: Hold) -> Result<(Vec<f64>, bool)> {
    if h.is_zero() || u.iter().all(|v| *v == 0.0) {
        return Ok((vec![0.0; u.len()], false));
    }
    let (h, rolled) = with_rolloff(h)?;
    let ss = StateSpaceLTI::from_tf(&h)?.balanced();
    Ok((discretize_with(&ss, dt, hold).run(u), rolled))
}

fn serialize_db<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    /// N·m
    pub max_abs_e: f64,
    /// (N·m)²
    pub sse: f64,
    /// rad/s
    pub max_abs_wd: f64,
    /// dB against the noise-free run; `+∞` without noise.
    #[serde(serialize_with = "serialize_db")]
    pub snr_wd: f64,
}

/// Metrics from error and motor-velocity series and the noise-free `ωd`.
pub fn metrics(e: &[f64], wd: &[f64], wd_clean: &[f64]) -> Result<Metrics> {
    if e.len() != wd.len() {
        return Err(Error::Shape { expected: e.len(), got: wd.len() });
    }
    if wd.len() != wd_clean.len() {
        return Err(Error::Shape { expected: wd.len(), got: wd_clean.len() });
    }
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let signal: f64 = wd_clean.iter().map(|s| s * s).sum();
    let noise: f64 = wd.iter().zip(wd_clean).map(|(w, s)| (w - s) * (w - s)).sum();
    let snr_wd = if noise == 0.0 { f64::INFINITY } else { 10.0 * (signal / noise).log10() };
    Ok(Metrics {
        max_abs_e: max_abs(e),
        sse: e.iter().map(|v| v * v).sum(),
        max_abs_wd: max_abs(wd),
        snr_wd,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimProvenance {
    pub dt: f64,
    pub hold: Hold,
    pub samples: usize,
    pub noise_seed: u64,
    /// Channels that received roll-off poles.
    pub rolled_off: Vec<String>,
    pub rolloff_pole: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub t: Vec<f64>,
    pub phi_h: Vec<f64>,
    pub tau_h: Vec<f64>,
    pub tau_d: Vec<f64>,
    pub e: Vec<f64>,
    pub omega_d: Vec<f64>,
    /// `ωd` of the identical run without sensor noise.
    pub omega_d_clean: Vec<f64>,
    pub metrics: Metrics,
    pub provenance: SimProvenance,
}

impl SimResult {
    /// Write the series as CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_s,phi_h_rad,tau_h_Nm,tau_d_Nm,e_Nm,omega_d_rad_s")?;
        for k in 0..self.t.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.t[k], self.phi_h[k], self.tau_h[k], self.tau_d[k], self.e[k], self.omega_d[k]
            )?;
        }
        Ok(())
    }
}

/// Seeded white noise, `n` samples of standard deviation `std`.
pub fn white_noise(std: f64, n: usize, seed: u64) -> Vec<f64> {
    if std == 0.0 {
        return vec![0.0; n];
    }
    let dist = Normal::new(0.0, std).expect("std is finite and non-negative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

/// Simulate the closed loop. Unstable loops are refused unless
/// `allow_unstable` is set.
pub fn simulate(maps: &ClosedLoopMaps, scenario: &SimScenario, allow_unstable: bool) -> Result<SimResult> {
    scenario.validate()?;
    if !maps.stable && !allow_unstable {
        return Err(Error::Unstable);
    }
    let t = scenario.times();
    let n = t.len();
    let phi: Vec<f64> = t.iter().enumerate().map(|(k, &tk)| scenario.hand_motion.at(tk, k)).collect();
    let d: Vec<f64> = t.iter().enumerate().map(|(k, &tk)| scenario.disturbance.at(tk, k)).collect();
    let noise = white_noise(scenario.noise_std, n, scenario.noise_seed);
    let (dt, hold) = (scenario.dt, scenario.hold);

    let mut rolled_off = Vec::new();
    let mut run = |name: &str, h: &RationalTF, u: &[f64]| -> Result<Vec<f64>> {
        let (y, rolled) = channel_response(h, u, dt, hold)?;
        if rolled {
            rolled_off.push(name.to_string());
        }
        Ok(y)
    };
    let tau_phi = run("pht", &maps.t_pht, &phi)?;
    let tau_d_part = run("dt", &maps.t_dt, &d)?;
    let tau_n = run("nt", &maps.t_nt, &noise)?;
    let wd_phi = run("phu", &maps.t_phu, &phi)?;
    let wd_d = run("du", &maps.t_du, &d)?;
    let wd_n = run("nu", &maps.t_nu, &noise)?;

    let tau_h: Vec<f64> = (0..n).map(|k| tau_phi[k] + tau_d_part[k] + tau_n[k]).collect();
    let omega_d_clean: Vec<f64> = (0..n).map(|k| wd_phi[k] + wd_d[k]).collect();
    let omega_d: Vec<f64> = (0..n).map(|k| omega_d_clean[k] + wd_n[k]).collect();
    let tau_d: Vec<f64> = phi.iter().map(|p| -maps.zd_stiffness * p).collect();
    let e: Vec<f64> = (0..n).map(|k| tau_d[k] - tau_h[k]).collect();
    let metrics = metrics(&e, &omega_d, &omega_d_clean)?;
    Ok(SimResult {
        t,
        phi_h: phi,
        tau_h,
        tau_d,
        e,
        omega_d,
        omega_d_clean,
        metrics,
        provenance: SimProvenance {
            dt,
            hold,
            samples: n,
            noise_seed: scenario.noise_seed,
            rolled_off,
            rolloff_pole: ROLLOFF_POLE,
            stable: maps.stable,
        },
    })
}

/// Hand-motion amplitude that makes the noise-free `max |ωd|` equal
/// `target`, by linearity from a unit-amplitude run.
pub fn calibrate_amplitude(maps: &ClosedLoopMaps, scenario: &SimScenario, target: f64) -> Result<f64> {
    let mut unit = scenario.clone();
    unit.hand_motion = match &scenario.hand_motion {
        Signal::Chirp { f0_hz, f1_hz, duration_s, .. } => Signal::Chirp {
            f0_hz: *f0_hz,
            f1_hz: *f1_hz,
            duration_s: *duration_s,
            amplitude: 1.0,
        },
        Signal::Sinusoid { freq_hz, phase_rad, .. } => Signal::Sinusoid {
            freq_hz: *freq_hz,
            amplitude: 1.0,
            phase_rad: *phase_rad,
        },
        _ => return Err(Error::validation("hand_motion", "calibration needs a chirp or sinusoid")),
    };
    unit.disturbance = Signal::Zero;
    unit.noise_std = 0.0;
    let peak = simulate(maps, &unit, false)?.metrics.max_abs_wd;
    if peak == 0.0 {
        return Err(Error::Degenerate("hand motion does not reach the motor command".into()));
    }
    Ok(target / peak)
}

/// Least-squares amplitude and phase of a `freq_hz` sinusoid in `y` over
/// samples with `t ≥ from`.
pub fn fit_sinusoid(t: &[f64], y: &[f64], freq_hz: f64, from: f64) -> (f64, f64) {
    let w = 2.0 * PI * freq_hz;
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (tk, yk) in t.iter().zip(y).filter(|(tk, _)| **tk >= from) {
        let (s, c) = (w * tk).sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        ys += yk * s;
        yc += yk * c;
    }
    let det = ss * cc - sc * sc;
    let a = (ys * cc - yc * sc) / det;
    let b = (yc * ss - ys * sc) / det;
    (a.hypot(b), b.atan2(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step_response(h: &RationalTF, dt: f64, t_end: f64) -> f64 {
        let n = (t_end / dt).round() as usize + 1;
        let y = channel_response(h, &vec![1.0; n], dt, Hold::Zero).unwrap().0;
        y[n - 1]
    }

    #[test]
    fn first_order_step() {
        let h = RationalTF::from_descending(&[1.0], &[1.0, 1.0]).unwrap();
        let y = step_response(&h, 1e-3, 1.0);
        assert!((y - (1.0 - (-1.0f64).exp())).abs() < 1e-9, "{y}");
        assert!((y - 0.63212).abs() < 1e-5);
    }

    #[test]
    fn integrator_step() {
        let y = step_response(&RationalTF::integrator(), 1e-3, 2.0);
        assert!((y - 2.0).abs() < 1e-12, "{y}");
    }

    #[test]
    fn pure_gain() {
        let u = [0.5, -1.0, 2.0, 7.25];
        let y = channel_response(&RationalTF::constant(3.0), &u, 1e-3, Hold::Linear).unwrap().0;
        for (a, b) in u.iter().zip(&y) {
            assert_eq!(3.0 * a, *b);
        }
    }

    #[test]
    fn second_order_step_matches_closed_form() {
        // ωn² / (s² + 2ζωn s + ωn²), ζ = 0.3, ωn = 10
        let (z, wn) = (0.3f64, 10.0f64);
        let h = RationalTF::from_descending(&[wn * wn], &[1.0, 2.0 * z * wn, wn * wn]).unwrap();
        let t = 0.4;
        let wd = wn * (1.0 - z * z).sqrt();
        let exact = 1.0 - (-z * wn * t).exp() * ((wd * t).cos() + z / (1.0 - z * z).sqrt() * (wd * t).sin());
        assert!((step_response(&h, 1e-3, t) - exact).abs() < 1e-9);
    }

    #[test]
    fn linear_hold_is_exact_on_ramps() {
        // 1/(s+1) driven by u = t: y = t − 1 + e^{−t}
        let h = RationalTF::from_descending(&[1.0], &[1.0, 1.0]).unwrap();
        let dt = 1e-2;
        let u: Vec<f64> = (0..=300).map(|k| k as f64 * dt).collect();
        let y = channel_response(&h, &u, dt, Hold::Linear).unwrap().0;
        for (t, y) in u.iter().zip(&y) {
            assert!((y - (t - 1.0 + (-t).exp())).abs() < 1e-12, "t={t}");
        }
        // a step is held constant after the first sample either way
        let zoh = discretize(&StateSpaceLTI::from_tf(&h).unwrap(), dt);
        assert_eq!(zoh.b1.norm(), 0.0);
    }

    #[test]
    fn rolloff_only_when_improper() {
        let (h, r) = with_rolloff(&RationalTF::from_descending(&[2.0, 1.0], &[1.0]).unwrap()).unwrap();
        assert!(r && h.is_proper());
        assert!((h.eval(1.0).unwrap() - num_complex::Complex64::new(1.0, 2.0)).norm() < 3e-3);
        let (_, r) = with_rolloff(&RationalTF::integrator()).unwrap();
        assert!(!r);
    }

    #[test]
    fn metric_examples() {
        let m = metrics(&[2.0, 2.0, 2.0], &[1.0, -3.0, 2.0], &[1.0, -3.0, 2.0]).unwrap();
        assert_eq!((m.sse, m.max_abs_e, m.max_abs_wd), (12.0, 2.0, 3.0));
        assert_eq!(m.snr_wd, f64::INFINITY);
        assert_eq!(serde_json::to_value(m).unwrap()["snr_wd"], "inf");
        // signal power 100× noise power
        let clean = [10.0, -10.0, 10.0, -10.0];
        let noisy = [11.0, -11.0, 11.0, -11.0];
        let m = metrics(&[0.0; 4], &noisy, &clean).unwrap();
        assert!((m.snr_wd - 20.0).abs() < 1e-12);
        assert!(metrics(&[0.0; 3], &[0.0; 2], &[0.0; 2]).is_err());
    }

    #[test]
    fn scenario_validation() {
        let mut s = SimScenario::chirp(1.0, 1.0);
        assert!(s.validate().is_ok());
        assert_eq!(s.samples(), 1001);
        s.dt = 0.0;
        assert!(s.validate().is_err());
        let mut s = SimScenario::chirp(1.0, 1.0);
        s.hand_motion = Signal::Chirp { f0_hz: 5.0, f1_hz: 1.0, duration_s: 1.0, amplitude: 1.0 };
        assert!(s.validate().is_err());
        let mut s = SimScenario::chirp(1.0, 1.0);
        s.duration = 1e-4;
        assert!(s.validate().is_err());
        let mut s = SimScenario::chirp(1.0, 0.01);
        s.hand_motion = Signal::Samples { values: vec![0.0; 3] };
        assert!(s.validate().is_err());
    }

    #[test]
    fn chirp_starts_at_zero_phase() {
        let c = Signal::Chirp { f0_hz: 0.0, f1_hz: 6.0, duration_s: 10.0, amplitude: 2.0 };
        assert_eq!(c.at(0.0, 0), 0.0);
        // instantaneous frequency 3 Hz at t = 5
        let phase = 2.0 * PI * (0.5 * 0.6 * 25.0);
        assert!((c.at(5.0, 0) - 2.0 * phase.sin()).abs() < 1e-12);
        assert_eq!(c.at(10.5, 0), 0.0);
    }

    #[test]
    fn sinusoid_fit_recovers_amplitude() {
        let t: Vec<f64> = (0..2000).map(|k| k as f64 * 1e-3).collect();
        let y: Vec<f64> = t.iter().map(|t| 1.5 * (2.0 * PI * 3.0 * t + 0.4).sin() + 0.2).collect();
        let (a, p) = fit_sinusoid(&t, &y, 3.0, 0.0);
        assert!((a - 1.5).abs() < 2e-3 && (p - 0.4).abs() < 2e-3, "{a} {p}");
    }

    #[test]
    fn noise_is_seeded() {
        assert_eq!(white_noise(0.1, 5, 3), white_noise(0.1, 5, 3));
        assert_ne!(white_noise(0.1, 5, 3), white_noise(0.1, 5, 4));
        assert_eq!(white_noise(0.0, 4, 3), vec![0.0; 4]);
    }
}
