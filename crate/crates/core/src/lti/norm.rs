//! Band-restricted peak gain of a rational transfer function.
//!
//! The sweep is a log-spaced grid (400 points per decade by default) that
//! always contains both band edges and the natural frequencies of the poles,
//! followed by golden-section refinement around the largest local maxima.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tf::RationalTF;
use crate::error::{Error, Result};

pub const POINTS_PER_DECADE: usize = 400;
pub const GRID_LO: f64 = 1e-2;
pub const GRID_HI: f64 = 1e5;
/// The grid never widens past these, whatever the pole/zero magnitudes.
pub const SPAN_FLOOR: f64 = 1e-6;
pub const SPAN_CEIL: f64 = 1e9;
const REFINE_REL: f64 = 1e-9;
const MAX_REFINED_PEAKS: usize = 8;

/// Frequency interval `[lo, hi]` in rad/s; `hi` may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BandWire", into = "BandWire")]
pub struct FreqBand {
    lo: f64,
    hi: f64,
}

impl FreqBand {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo >= 0.0) || lo.is_infinite() || !(hi > lo) {
            return Err(Error::validation("band", format!("need 0 <= lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn full() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY }
    }

    pub fn below(hi: f64) -> Result<Self> {
        Self::new(0.0, hi)
    }

    pub fn above(lo: f64) -> Result<Self> {
        Self::new(lo, f64::INFINITY)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, w: f64) -> bool {
        w >= self.lo && w <= self.hi
    }

    pub fn is_full(&self) -> bool {
        self.lo == 0.0 && self.hi.is_infinite()
    }
}

/// `[lo, hi]` with `hi` either a number or the string `"inf"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandWire(f64, BandEdge);

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BandEdge {
    Finite(f64),
    Named(String),
}

impl TryFrom<BandWire> for FreqBand {
    type Error = Error;
    fn try_from(w: BandWire) -> Result<Self> {
        let hi = match w.1 {
            BandEdge::Finite(x) => x,
            BandEdge::Named(s) if s.eq_ignore_ascii_case("inf") => f64::INFINITY,
            BandEdge::Named(s) => return Err(Error::Parse(format!("unknown band edge {s:?}"))),
        };
        FreqBand::new(w.0, hi)
    }
}

impl From<FreqBand> for BandWire {
    fn from(b: FreqBand) -> Self {
        let hi = if b.hi.is_infinite() {
            BandEdge::Named("inf".into())
        } else {
            BandEdge::Finite(b.hi)
        };
        BandWire(b.lo, hi)
    }
}

/// Peak gain over a band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandNormResult {
    pub value: f64,
    /// `+∞` when the supremum is the high-frequency limit.
    pub argmax_omega: f64,
    pub grid_points: usize,
}

/// `[lo, hi]` log grid with `per_decade` points per decade, both edges
/// included. `lo` must be positive.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let decades = (hi / lo).log10();
    let steps = ((decades * per_decade as f64) - 1e-9).ceil().max(1.0) as usize;
    let (a, b) = (lo.log10(), hi.log10());
    let mut out: Vec<f64> = (0..=steps)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / steps as f64))
        .collect();
    out[0] = lo;
    out[steps] = hi;
    out
}

/// Frequencies on which a band sweep evaluates `h`: the log grid covering the
/// default span widened to the pole/zero magnitudes (at most
/// `[SPAN_FLOOR, SPAN_CEIL]`), clipped to the band,
/// plus the band edges and the pole natural frequencies inside it.
pub(crate) fn sweep_grid(poles: &[Complex64], zeros: &[Complex64], band: FreqBand, per_decade: usize) -> Vec<f64> {
    let mut lo = GRID_LO;
    let mut hi = GRID_HI;
    for r in poles.iter().chain(zeros) {
        let m = r.norm();
        if m > 0.0 && m.is_finite() {
            lo = lo.min(0.1 * m);
            hi = hi.max(10.0 * m);
        }
    }
    let lo_c = lo.max(SPAN_FLOOR).max(band.lo());
    let hi_c = hi.min(SPAN_CEIL).min(band.hi());
    let mut grid = if lo_c < hi_c {
        log_grid(lo_c, hi_c, per_decade)
    } else {
        Vec::new()
    };
    grid.push(band.lo());
    if band.hi().is_finite() {
        grid.push(band.hi());
    }
    for p in poles {
        for w in [p.im.abs(), p.norm()] {
            if band.contains(w) && w.is_finite() {
                grid.push(w);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Supremum of `|h(jω)|` over `band`.
pub fn band_hinf_norm(h: &RationalTF, band: FreqBand) -> Result<BandNormResult> {
    band_hinf_norm_with(h, band, POINTS_PER_DECADE)
}

pub fn band_hinf_norm_with(h: &RationalTF, band: FreqBand, per_decade: usize) -> Result<BandNormResult> {
    if h.is_zero() {
        return Ok(BandNormResult { value: 0.0, argmax_omega: band.lo(), grid_points: 0 });
    }
    let poles = h.poles()?;
    for p in &poles {
        let on_axis = p.re.abs() <= 1e-9 * p.norm().max(1.0);
        if on_axis && band.contains(p.im.abs()) {
            return Err(Error::PoleInBand { re: p.re, im: p.im });
        }
    }
    let zeros = h.zeros()?;
    let grid = sweep_grid(&poles, &zeros, band, per_decade);
    let mag = |w: f64| h.eval_unchecked(w).norm();
    let values: Vec<f64> = grid.iter().map(|&w| mag(w)).collect();

    let mut best = BandNormResult { value: f64::NEG_INFINITY, argmax_omega: band.lo(), grid_points: grid.len() };
    for (&w, &v) in grid.iter().zip(&values) {
        if v > best.value {
            best.value = v;
            best.argmax_omega = w;
        }
    }

    // interior local maxima, largest first
    let mut peaks: Vec<usize> = (1..grid.len().saturating_sub(1))
        .filter(|&i| values[i] >= values[i - 1] && values[i] >= values[i + 1])
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    for &i in peaks.iter().take(MAX_REFINED_PEAKS) {
        let (w, v) = golden_max(&mag, grid[i - 1], grid[i + 1]);
        if v > best.value {
            best.value = v;
            best.argmax_omega = w;
        }
    }

    if band.hi().is_infinite() {
        match h.limit_at_infinity() {
            Some(l) if l.norm() > best.value => {
                best.value = l.norm();
                best.argmax_omega = f64::INFINITY;
            }
            Some(_) => {}
            None => {
                best.value = f64::INFINITY;
                best.argmax_omega = f64::INFINITY;
            }
        }
    }
    Ok(best)
}

/// Golden-section maximization of `f` on `[a, b]` in log-frequency (linear
/// when `a == 0`), until the bracket is relatively narrower than 1e-6.
pub(crate) fn golden_max(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let log = a > 0.0;
    let (to, from): (fn(f64) -> f64, fn(f64) -> f64) = if log { (f64::ln, f64::exp) } else { (|x| x, |x| x) };
    let (mut lo, mut hi) = (to(a), to(b));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(from(x1));
    let mut f2 = f(from(x2));
    for _ in 0..200 {
        let width = if log { hi - lo } else { (hi - lo) / hi.max(f64::MIN_POSITIVE) };
        if width < REFINE_REL {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(from(x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(from(x1));
        }
    }
    if f1 >= f2 {
        (from(x1), f1)
    } else {
        (from(x2), f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tf(num: &[f64], den: &[f64]) -> RationalTF {
        RationalTF::from_descending(num, den).unwrap()
    }

    #[test]
    fn low_pass_peaks_at_dc() {
        let r = band_hinf_norm(&tf(&[1.0], &[1.0, 1.0]), FreqBand::full()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.argmax_omega, 0.0);
    }

    #[test]
    fn monotone_magnitude_peaks_at_band_edge() {
        let r = band_hinf_norm(&tf(&[1.0], &[1.0, 1.0]), FreqBand::above(1.0).unwrap()).unwrap();
        assert!((r.value - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(r.argmax_omega, 1.0);
    }

    #[test]
    fn resonance_peak_matches_closed_form() {
        // frozen from 1/(2ζ√(1−ζ²)) with ζ = 0.1; a 10^6-point grid agrees to 1e-9
        let zeta: f64 = 0.1;
        let want = 1.0 / (2.0 * zeta * (1.0 - zeta * zeta).sqrt());
        let r = band_hinf_norm(&tf(&[1.0], &[1.0, 0.2, 1.0]), FreqBand::full()).unwrap();
        assert!((r.value - want).abs() <= 1e-3 * want, "{} vs {want}", r.value);
        assert!((r.value - 5.025_189_076_296_06).abs() < 1e-6);
        assert!((r.argmax_omega - (1.0 - 2.0 * zeta * zeta).sqrt()).abs() < 1e-4);
        let dense = log_grid(1e-3, 1e3, 1_000_000 / 6)
            .into_iter()
            .map(|w| 1.0 / ((1.0 - w * w).powi(2) + (0.2 * w).powi(2)).sqrt())
            .fold(0.0, f64::max);
        assert!((dense - want).abs() < 1e-6);
    }

    #[test]
    fn pole_on_axis_inside_band_is_an_error() {
        let osc = tf(&[1.0], &[1.0, 0.0, 4.0]);
        assert!(matches!(band_hinf_norm(&osc, FreqBand::full()), Err(Error::PoleInBand { .. })));
        assert!(band_hinf_norm(&osc, FreqBand::new(3.0, 10.0).unwrap()).is_ok());
        assert!(band_hinf_norm(&RationalTF::integrator(), FreqBand::above(1.0).unwrap()).is_ok());
    }

    #[test]
    fn improper_has_infinite_full_band_norm() {
        let r = band_hinf_norm(&tf(&[1.0, 1.0], &[1.0]), FreqBand::full()).unwrap();
        assert!(r.value.is_infinite());
        let r = band_hinf_norm(&tf(&[1.0, 1.0], &[1.0]), FreqBand::below(3.0).unwrap()).unwrap();
        assert!((r.value - 10f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grid_contract_counts_edges() {
        let g = log_grid(1.0, 10.0, 3);
        assert_eq!(g.len(), 4);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[3], 10.0);
    }

    #[test]
    fn band_wire_format() {
        let b: FreqBand = serde_json::from_str(r#"[125.66, "inf"]"#).unwrap();
        assert_eq!(b, FreqBand::above(125.66).unwrap());
        assert_eq!(serde_json::to_string(&FreqBand::full()).unwrap(), r#"[0.0,"inf"]"#);
        assert!(serde_json::from_str::<FreqBand>("[3.0, 1.0]").is_err());
    }
}
