//! The acceptance battery. Each criterion returns a pass flag and a short
//! numeric summary; the test target and the `repro` command both print them.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::loops::{close_loop, positive_real_check, scattering, ClosedLoopMaps, PR_TOL};
use crate::lti::{band_hinf_norm, log_grid, FreqBand, Polynomial, RationalTF, GRID_HI, GRID_LO, POINTS_PER_DECADE};
use crate::sea::{default_plant, factored_g1};
use crate::sim::{calibrate_amplitude, fit_sinusoid, simulate, Hold, SimScenario, Signal};
use crate::specs::{default_spec_set, Channel, GAMMA3, GAMMA5, OMEGA_E, OMEGA_N, OMEGA_U, PASS_TOL};
use crate::synth::{
    default_gamma1, hinf3, hinf3_theta, recalibrated_gamma1, synthesize, unweighted_plant, verify_published, Objective,
    Published, StructureKind, SynthOptions, REFERENCE_ALPHA,
};

/// Target peak motor command of the calibrated chirp, rad/s.
pub const CHIRP_PEAK_WD: f64 = 16.7;
/// Bracket on the chirp's peak torque error, N·m.
pub const CHIRP_ERROR_BRACKET: (f64, f64) = (0.004, 0.011);
pub const CHIRP_SECONDS: f64 = 10.0;
/// Probe frequencies for the steady-state gain check, Hz.
pub const PROBE_HZ: [f64; 5] = [0.1, 0.5, 1.0, 3.0, 6.0];
pub const SWEEP_ALPHAS: [f64; 4] = [0.0, 0.3, 0.6, 0.9];
/// Torque-sensor noise of the stiffness sweep, N·m per sample.
pub const SWEEP_NOISE_STD: f64 = 1e-4;
pub const SWEEP_NOISE_SEED: u64 = 2024;

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    /// Runtime limit, when the criterion has one.
    pub limit_seconds: Option<f64>,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {} ({}): {} ({:.2} s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

fn timed(id: u8, name: &'static str, limit: Option<f64>, f: impl FnOnce() -> Result<(bool, String)>) -> Outcome {
    let t0 = Instant::now();
    let (ok, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let seconds = t0.elapsed().as_secs_f64();
    let in_time = limit.is_none_or(|l| seconds < l);
    let detail = if in_time { detail } else { format!("{detail}; over the {:.0} s limit", limit.unwrap()) };
    Outcome {
        id,
        name,
        pass: ok && in_time,
        detail,
        seconds,
        limit_seconds: limit,
    }
}

/// `|G1(0)|` and agreement of the factored and monic plant forms.
pub fn plant_fidelity() -> Outcome {
    timed(1, "plant fidelity", Some(1.0), || {
        let g1 = default_plant().g1;
        let dc = g1.dc_gain()?.abs();
        let f = factored_g1();
        let mut worst: f64 = 0.0;
        for (a, b) in [(f.num(), g1.num()), (f.den(), g1.den())] {
            for k in 0..=b.degree() {
                worst = worst.max((a.coeff(k) - b.coeff(k)).abs() / b.coeff(k).abs());
            }
        }
        let ok = (dc - 0.2012).abs() <= 1e-3 && worst <= 5e-3;
        Ok((ok, format!("|G1(0)| = {dc:.5}, worst coefficient mismatch {:.3}%", 100.0 * worst)))
    })
}

/// Phase of `Z̄` over the standard grid.
#[derive(Debug, Clone, Copy)]
pub struct PhaseCheck {
    /// Largest `|arg Z̄|`, degrees.
    pub worst_deg: f64,
    /// Grid points outside ±90° whose real part is also below `−PR_TOL`.
    pub violations: usize,
}

/// Phase form of passivity on the standard grid. Where `|Z̄|` is tiny the
/// angle is ill-conditioned, so a point only counts against the ±90° band
/// when `Re Z̄` is below the positive-real slack as well.
pub fn phase_check(zbar: &RationalTF) -> PhaseCheck {
    let mut out = PhaseCheck { worst_deg: 0.0, violations: 0 };
    for z in log_grid(GRID_LO, GRID_HI, POINTS_PER_DECADE).into_iter().filter_map(|w| zbar.eval(w).ok()) {
        let deg = z.arg().to_degrees().abs();
        out.worst_deg = out.worst_deg.max(deg);
        if deg > 90.0 && z.re < -PR_TOL {
            out.violations += 1;
        }
    }
    out
}

/// The third-order controller against the frequency-domain bounds.
pub fn published_controller() -> Outcome {
    timed(2, "published controller", Some(10.0), || {
        let plant = default_plant();
        let g = unweighted_plant(&plant, REFERENCE_ALPHA)?;
        let m = close_loop(&g, &hinf3())?;
        let phu = band_hinf_norm(&m.t_phu, FreqBand::below(OMEGA_U)?)?.value;
        let dt = band_hinf_norm(&m.t_dt, FreqBand::full())?.value;
        let nt = band_hinf_norm(&m.t_nt, FreqBand::above(OMEGA_N)?)?.value;
        let wp = band_hinf_norm(&m.w_pass, FreqBand::full())?.value;
        let phase = phase_check(&m.zbar);
        let ratio = m.z.dc_gain()? / plant.ks;
        let g1a = recalibrated_gamma1(&plant)?;
        let g1b = recalibrated_gamma1(&plant)?;
        let ok = m.stable
            && phu <= plant.motor_sat
            && dt <= GAMMA3
            && nt <= GAMMA5
            && wp <= 1.0 + 1e-3
            && phase.violations == 0
            && (ratio - 0.6).abs() <= 0.06
            && g1a.to_bits() == g1b.to_bits();
        Ok((
            ok,
            format!(
                "stable {}, |T_phu| {phu:.2}, |T_dt| {dt:.5}, |T_nt| {nt:.4}, |W_pass| {wp:.9}, max |phase Zbar| {:.5} deg ({} points beyond the slack), Z(0)/Ks {ratio:.4}, gamma1' {g1a:.6} (rerun bitwise {})",
                m.stable,
                phase.worst_deg,
                phase.violations,
                g1a.to_bits() == g1b.to_bits()
            ),
        ))
    })
}

fn random_stable_poly<R: Rng>(rng: &mut R, degree: usize) -> Polynomial {
    let mut roots = Vec::new();
    while roots.len() < degree {
        let mag = 10f64.powf(rng.random_range(-1.0..2.0));
        if degree - roots.len() >= 2 && rng.random_bool(0.5) {
            let zeta: f64 = rng.random_range(0.02..1.0);
            let (re, im) = (-zeta * mag, mag * (1.0 - zeta * zeta).sqrt());
            roots.push(Complex64::new(re, im));
            roots.push(Complex64::new(re, -im));
        } else {
            roots.push(Complex64::new(-mag, 0.0));
        }
    }
    Polynomial::from_roots(&roots, 1.0)
}

/// Random stable `Z̄` of degree ≤ 4, sometimes with a pole at the origin.
/// Roughly half are positive real.
pub fn random_zbar<R: Rng>(rng: &mut R) -> RationalTF {
    let deg: usize = rng.random_range(1..=4);
    let integrating = rng.random_bool(0.25);
    let mut den = random_stable_poly(rng, deg - usize::from(integrating));
    if integrating {
        den = &den * &Polynomial::s();
    }
    let ndeg = if rng.random_bool(0.5) { deg } else { deg - 1 };
    let mut num = random_stable_poly(rng, ndeg);
    if ndeg > 0 && rng.random_bool(0.2) {
        // flip one real zero into the right half plane
        num = num.deflate(num.roots().map(|r| r[0].re).unwrap_or(-1.0));
        num = &num * &Polynomial::new(vec![-rng.random_range(0.1..10.0), 1.0]);
    }
    let gain = 10f64.powf(rng.random_range(-2.0..2.0));
    RationalTF::new(num.scale(gain), den).expect("nonzero denominator")
}

/// Bilinear-norm and positive-real tests agree on random `Z̄`; returns
/// `(disagreements, positive-real count, total)`.
pub fn passivity_agreement(cases: usize, seed: u64) -> Result<(usize, usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut bad, mut pr) = (0, 0);
    for _ in 0..cases {
        let z = random_zbar(&mut rng);
        let by_norm = band_hinf_norm(&scattering(&z)?, FreqBand::full())?.value <= 1.0 + PASS_TOL;
        let by_grid = positive_real_check(&z, FreqBand::full(), POINTS_PER_DECADE).pass;
        pr += usize::from(by_grid);
        bad += usize::from(by_norm != by_grid);
    }
    Ok((bad, pr, cases))
}

pub fn passivity_equivalence() -> Outcome {
    timed(3, "passivity equivalence", Some(30.0), || {
        let (bad, pr, n) = passivity_agreement(200, 3)?;
        Ok((bad == 0, format!("{bad} disagreements over {n} cases ({pr} positive real)")))
    })
}

/// Random stable proper system with lightly damped modes and a random band.
pub fn random_band_case<R: Rng>(rng: &mut R) -> (RationalTF, FreqBand) {
    let deg: usize = rng.random_range(1..=8);
    let den = random_stable_poly(rng, deg);
    let num = Polynomial::new((0..=rng.random_range(0..=deg)).map(|_| rng.random_range(-1.0..1.0)).collect());
    let h = RationalTF::new(num, den).expect("nonzero denominator");
    let a = 10f64.powf(rng.random_range(-1.5..1.5));
    let b = a * 10f64.powf(rng.random_range(0.3..2.0));
    let band = match rng.random_range(0..4) {
        0 => Ok(FreqBand::full()),
        1 => FreqBand::below(b),
        2 => FreqBand::above(a),
        _ => FreqBand::new(a, b),
    }
    .expect("ordered band");
    (h, band)
}

/// Brute-force band peak on `points` log-spaced frequencies; the ∞ edge adds
/// the high-frequency limit.
pub fn dense_peak(h: &RationalTF, band: FreqBand, points: usize) -> f64 {
    let lo = band.lo().max(1e-4);
    let hi = band.hi().min(1e6);
    let (l0, l1) = (lo.log10(), hi.log10());
    let mut peak: f64 = 0.0;
    for i in 0..points {
        let w = 10f64.powf(l0 + (l1 - l0) * i as f64 / (points - 1) as f64);
        peak = peak.max(h.eval_unchecked(w).norm());
    }
    if band.lo() == 0.0 {
        peak = peak.max(h.eval_unchecked(0.0).norm());
    }
    if band.hi().is_infinite() {
        if let Some(v) = h.limit_at_infinity() {
            peak = peak.max(v.norm());
        }
    }
    peak
}

pub fn band_norm_oracle() -> Outcome {
    timed(4, "band-norm oracle", Some(60.0), || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let (h, band) = random_band_case(&mut rng);
            let fast = band_hinf_norm(&h, band)?.value;
            let brute = dense_peak(&h, band, 1_000_000);
            worst = worst.max((fast - brute).abs() / brute);
        }
        Ok((worst <= 0.01, format!("worst relative deviation {:.2e} over 100 systems", worst)))
    })
}

/// Free-pair synthesis at the reference ratio, then a warm start at the
/// published third-order controller.
pub fn synthesis_feasibility(seed: u64) -> Outcome {
    timed(5, "synthesis feasibility", Some(600.0), || {
        let plant = default_plant();
        let g = unweighted_plant(&plant, REFERENCE_ALPHA)?;
        let specs = default_spec_set(&plant, default_gamma1(&plant, REFERENCE_ALPHA)?)?;
        let kind = StructureKind::FreePair { order: 3 };
        let cold = synthesize(&g, kind, &specs, &SynthOptions { seed, ..SynthOptions::default() })?;
        let l_ref = Objective::new(&g, kind, &specs).value(&hinf3_theta());
        let warm = synthesize(
            &g,
            kind,
            &specs,
            &SynthOptions {
                starts: 1,
                budget: 1000,
                seed,
                warm_start: Some(hinf3_theta()),
            },
        )?;
        let ok = cold.report.all_pass && warm.objective <= l_ref;
        Ok((
            ok,
            format!(
                "8x4000 seed {seed}: L = {:.4}, overall pass {}; warm start L {:.6} from {:.6}",
                cold.objective, cold.report.all_pass, warm.objective, l_ref
            ),
        ))
    })
}

/// Rendering-error peak `sup_{ω ≤ ωe} |T_{φh e}|`.
pub fn rendering_peak(maps: &ClosedLoopMaps) -> Result<f64> {
    Ok(band_hinf_norm(&maps.t_phe, FreqBand::below(OMEGA_E)?)?.value)
}

pub fn pid_comparison() -> Outcome {
    timed(6, "PID comparison", Some(30.0), || {
        let plant = default_plant();
        let g = unweighted_plant(&plant, REFERENCE_ALPHA)?;
        let mut parts = Vec::new();
        let mut passive = true;
        for p in [Published::Pid, Published::Hpid] {
            let r = verify_published(p, REFERENCE_ALPHA)?;
            let item = r.item(Channel::Passivity).expect("default set has passivity");
            passive &= item.pass;
            parts.push(format!("{p} |W_pass| {:.6} ({})", item.achieved, if item.pass { "pass" } else { "fail" }));
        }
        let peak = |p: Published| -> Result<f64> { rendering_peak(&close_loop(&g, &p.controller())?) };
        let (h, hp, p) = (peak(Published::Hinf3)?, peak(Published::Hpid)?, peak(Published::Pid)?);
        parts.push(format!("error peaks hinf3 {h:.5} < hpid {hp:.5} < pid {p:.5}: {}", h < hp && hp < p));
        Ok((passive && h < hp && hp < p, parts.join("; ")))
    })
}

/// Chirp scenario at the reference ratio with amplitude calibrated to the
/// target peak motor command; returns the amplitude.
pub fn calibrated_chirp(maps: &ClosedLoopMaps) -> Result<SimScenario> {
    let mut sc = SimScenario::chirp(1.0, CHIRP_SECONDS);
    let a = calibrate_amplitude(maps, &sc, CHIRP_PEAK_WD)?;
    sc.hand_motion = sc.hand_motion.scaled(a);
    Ok(sc)
}

/// Worst relative mismatch between fitted steady-state sinusoid gains of
/// `τh` and `ωd` and `|T(jω)|` at the probe frequencies.
pub fn steady_state_mismatch(maps: &ClosedLoopMaps) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in PROBE_HZ {
        let settle = 5.0;
        let duration = settle + (10.0 / f).max(2.0);
        let sc = SimScenario {
            hand_motion: Signal::Sinusoid { freq_hz: f, amplitude: 1.0, phase_rad: 0.0 },
            disturbance: Signal::Zero,
            noise_std: 0.0,
            noise_seed: 0,
            dt: 1e-3,
            duration,
            hold: Hold::Linear,
        };
        let r = simulate(maps, &sc, false)?;
        for (y, h) in [(&r.tau_h, &maps.t_pht), (&r.omega_d, &maps.t_phu)] {
            let (amp, _) = fit_sinusoid(&r.t, y, f, settle);
            let want = h.eval(2.0 * PI * f)?.norm();
            worst = worst.max((amp - want).abs() / want);
        }
    }
    Ok(worst)
}

pub fn simulation_consistency() -> Outcome {
    timed(7, "simulation consistency", Some(60.0), || {
        let g = unweighted_plant(&default_plant(), REFERENCE_ALPHA)?;
        let maps = close_loop(&g, &hinf3())?;
        let mismatch = steady_state_mismatch(&maps)?;
        let sc = calibrated_chirp(&maps)?;
        let r = simulate(&maps, &sc, false)?;
        let e = r.metrics.max_abs_e;
        let (lo, hi) = CHIRP_ERROR_BRACKET;
        let amp = match sc.hand_motion {
            Signal::Chirp { amplitude, .. } => amplitude,
            _ => unreachable!(),
        };
        Ok((
            mismatch <= 0.02 && (lo..=hi).contains(&e),
            format!(
                "worst sinusoid gain mismatch {:.3}%; chirp amplitude {amp:.4} rad gives max|wd| {:.3} rad/s, max|e| {e:.5} N m",
                100.0 * mismatch,
                r.metrics.max_abs_wd
            ),
        ))
    })
}

/// Per-ratio metrics of the stiffness sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub gamma1: f64,
    pub objective: f64,
    pub all_pass: bool,
    pub metrics: crate::sim::Metrics,
}

/// Synthesize at each ratio and run the identical noisy chirp.
pub fn stiffness_sweep(seed: u64) -> Result<Vec<SweepRow>> {
    let plant = default_plant();
    let reference = close_loop(&unweighted_plant(&plant, REFERENCE_ALPHA)?, &hinf3())?;
    let mut sc = calibrated_chirp(&reference)?;
    sc.noise_std = SWEEP_NOISE_STD;
    sc.noise_seed = SWEEP_NOISE_SEED;
    let mut rows = Vec::new();
    for alpha in SWEEP_ALPHAS {
        let g = unweighted_plant(&plant, alpha)?;
        let gamma1 = default_gamma1(&plant, alpha)?;
        let specs = default_spec_set(&plant, gamma1)?;
        let r = synthesize(&g, StructureKind::FreePair { order: 3 }, &specs, &SynthOptions { seed, ..SynthOptions::default() })?;
        let sim = simulate(&close_loop(&g, &r.controller)?, &sc, false)?;
        rows.push(SweepRow {
            alpha,
            gamma1,
            objective: r.objective,
            all_pass: r.report.all_pass,
            metrics: sim.metrics,
        });
    }
    Ok(rows)
}

pub fn trend_reproduction(seed: u64) -> Outcome {
    timed(8, "stiffness trend", None, || {
        let rows = stiffness_sweep(seed)?;
        let nonincreasing = |f: fn(&SweepRow) -> f64| rows.windows(2).all(|w| f(&w[1]) <= f(&w[0]));
        let ok = nonincreasing(|r| r.metrics.max_abs_e)
            && nonincreasing(|r| r.metrics.sse)
            && nonincreasing(|r| r.metrics.max_abs_wd);
        let table = rows
            .iter()
            .map(|r| {
                format!(
                    "a={} L={:.3} max|e|={:.5} SSE={:.4e} max|wd|={:.3} SNR={:.1}",
                    r.alpha, r.objective, r.metrics.max_abs_e, r.metrics.sse, r.metrics.max_abs_wd, r.metrics.snr_wd
                )
            })
            .collect::<Vec<_>>()
            .join("; ");
        Ok((ok, table))
    })
}

/// Every criterion in order, synthesis seeded by `seed`.
pub fn run_all(seed: u64) -> Vec<Outcome> {
    vec![
        plant_fidelity(),
        published_controller(),
        passivity_equivalence(),
        band_norm_oracle(),
        synthesis_feasibility(seed),
        pid_comparison(),
        simulation_consistency(),
        trend_reproduction(seed),
    ]
}

pub fn total_time(outcomes: &[Outcome]) -> Duration {
    Duration::from_secs_f64(outcomes.iter().map(|o| o.seconds).sum())
}
