use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use crate::error::{Error, Result};

/// Relative root distance under which a pole and a zero cancel.
pub const MINREAL_TOL: f64 = 1e-6;

/// Default stability margin, rad/s.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Real-coefficient rational transfer function `num(s) / den(s)`.
///
/// The denominator is kept monic and the zero function is stored as `0/1`. Improper functions are allowed; only the
/// state-space conversion rejects them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTf", into = "RawTf")]
pub struct RationalTF {
    num: Polynomial,
    den: Polynomial,
}

/// Wire form: `{"num": [...], "den": [...]}`, ascending powers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawTf {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl TryFrom<RawTf> for RationalTF {
    type Error = Error;
    fn try_from(raw: RawTf) -> Result<Self> {
        if raw.num.iter().chain(&raw.den).any(|c| !c.is_finite()) {
            return Err(Error::validation("coefficients", "must be finite"));
        }
        RationalTF::new(Polynomial::new(raw.num), Polynomial::new(raw.den))
    }
}

impl From<RationalTF> for RawTf {
    fn from(tf: RationalTF) -> Self {
        RawTf {
            num: tf.num.coeffs().to_vec(),
            den: tf.den.coeffs().to_vec(),
        }
    }
}

/// Pole classification returned by [`RationalTF::stability`].
#[derive(Debug, Clone, PartialEq)]
pub struct Stability {
    /// Every pole has real part below `-margin`.
    pub stable: bool,
    /// Some pole has real part above `+margin`.
    pub rhp: bool,
    /// Largest pole real part (−∞ for a polynomial denominator of degree 0).
    pub max_real: f64,
    /// Imaginary-axis poles as (frequency rad/s, multiplicity), frequencies ≥ 0.
    pub imaginary_axis: Vec<(f64, usize)>,
}

impl Stability {
    /// No right-half-plane poles and all imaginary-axis poles simple.
    pub fn marginally_ok(&self) -> bool {
        !self.rhp && self.imaginary_axis.iter().all(|&(_, m)| m == 1)
    }
}

impl RationalTF {
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Degenerate("zero denominator".into()));
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let lead = den.leading();
        Ok(Self {
            num: num.scale(1.0 / lead),
            den: den.scale(1.0 / lead),
        })
    }

    /// Convenience constructor from descending coefficient slices.
    pub fn from_descending(num: &[f64], den: &[f64]) -> Result<Self> {
        Self::new(Polynomial::from_descending(num), Polynomial::from_descending(den))
    }

    pub fn constant(k: f64) -> Self {
        Self {
            num: Polynomial::constant(k),
            den: Polynomial::one(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// The pure integrator `1/s`.
    pub fn integrator() -> Self {
        Self {
            num: Polynomial::one(),
            den: Polynomial::s(),
        }
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() <= self.den.degree()
    }

    /// Value of `num/den` at `s = jω`, without the pole-proximity check.
    pub fn eval_unchecked(&self, omega: f64) -> Complex64 {
        let s = Complex64::new(0.0, omega);
        self.num.eval_complex(s) / self.den.eval_complex(s)
    }

    /// Frequency response at `ω` (rad/s). `ω = +∞` returns the limit when it
    /// is finite.
    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        if omega.is_infinite() {
            return self.limit_at_infinity().ok_or(Error::PoleProximity { omega });
        }
        let s = Complex64::new(0.0, omega);
        let d = self.den.eval_complex(s);
        let n = self.num.eval_complex(s);
        // |den| tiny relative to the size of its terms means jω sits on a pole
        let scale: f64 = self
            .den
            .coeffs()
            .iter()
            .enumerate()
            .map(|(k, c)| c.abs() * omega.abs().powi(k as i32))
            .sum();
        if d.norm() <= 1e-13 * scale {
            return Err(Error::PoleProximity { omega });
        }
        Ok(n / d)
    }

    /// `lim_{ω→∞} H(jω)`, `None` for improper functions.
    pub fn limit_at_infinity(&self) -> Option<Complex64> {
        if self.num.is_zero() || self.num.degree() < self.den.degree() {
            Some(Complex64::new(0.0, 0.0))
        } else if self.num.degree() == self.den.degree() {
            Some(Complex64::new(self.num.leading() / self.den.leading(), 0.0))
        } else {
            None
        }
    }

    pub fn dc_gain(&self) -> Result<f64> {
        self.eval(0.0).map(|z| z.re)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        self.den.roots()
    }

    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        if self.num.is_zero() {
            return Ok(Vec::new());
        }
        self.num.roots()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Sum without cancellation of common factors.
    pub fn add_raw(&self, other: &Self) -> Self {
        if self.den == other.den {
            return Self {
                num: &self.num + &other.num,
                den: self.den.clone(),
            };
        }
        Self {
            num: &(&self.num * &other.den) + &(&other.num * &self.den),
            den: &self.den * &other.den,
        }
    }

    pub fn mul_raw(&self, other: &Self) -> Self {
        Self {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_raw(other).minreal(MINREAL_TOL)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_raw(&other.neg()).minreal(MINREAL_TOL)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_raw(other).minreal(MINREAL_TOL)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(Error::Degenerate("division by the zero transfer function".into()));
        }
        Ok(Self::new(&self.num * &other.den, &self.den * &other.num)?.minreal(MINREAL_TOL))
    }

    /// Negative feedback `H / (1 + H G)` with `self = H` in the forward path
    /// and `loop_tf = G` in the return path.
    pub fn feedback(&self, loop_tf: &Self) -> Result<Self> {
        let den = &(&self.den * &loop_tf.den) + &(&self.num * &loop_tf.num);
        if den.is_zero() {
            return Err(Error::IllPosedLoop);
        }
        Ok(Self::new(&self.num * &loop_tf.den, den)?.minreal(MINREAL_TOL))
    }

    /// Cancel pole/zero pairs whose distance is below `tol` relative to their
    /// magnitude. Coefficients are only rebuilt when something cancels.
    pub fn minreal(&self, tol: f64) -> Self {
        if self.num.is_zero() {
            return Self::zero();
        }
        if self.num.degree() == 0 || self.den.degree() == 0 {
            return self.clone();
        }
        let (Ok(zeros), Ok(poles)) = (self.num.roots(), self.den.roots()) else {
            return self.clone();
        };
        let mut pole_used = vec![false; poles.len()];
        let mut zero_kept = Vec::with_capacity(zeros.len());
        let mut cancelled = 0;
        for z in &zeros {
            let mut best: Option<(usize, f64)> = None;
            for (i, p) in poles.iter().enumerate() {
                if pole_used[i] {
                    continue;
                }
                let d = (z - p).norm();
                let scale = z.norm().max(p.norm());
                let close = if scale <= 1e-12 { true } else { d <= tol * scale };
                if close && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            match best {
                Some((i, _)) => {
                    pole_used[i] = true;
                    cancelled += 1;
                }
                None => zero_kept.push(*z),
            }
        }
        if cancelled == 0 {
            return self.clone();
        }
        let pole_kept: Vec<Complex64> = poles
            .iter()
            .zip(&pole_used)
            .filter(|(_, &u)| !u)
            .map(|(p, _)| *p)
            .collect();
        Self {
            num: Polynomial::from_roots(&zero_kept, self.num.leading()),
            den: Polynomial::from_roots(&pole_kept, 1.0),
        }
    }

    /// Classify poles against `margin` (rad/s). Poles within `margin` of the
    /// imaginary axis are reported separately instead of as unstable.
    pub fn stability(&self, margin: f64) -> Stability {
        let poles = self.poles().unwrap_or_default();
        classify_poles(&poles, margin)
    }

    pub fn is_stable(&self) -> bool {
        self.stability(STABILITY_MARGIN).stable
    }
}

/// Shared pole classification; see [`RationalTF::stability`].
pub fn classify_poles(poles: &[Complex64], margin: f64) -> Stability {
    let mut max_real = f64::NEG_INFINITY;
    let mut rhp = false;
    let mut axis: Vec<(f64, usize)> = Vec::new();
    for p in poles {
        max_real = max_real.max(p.re);
        if p.re > margin {
            rhp = true;
        } else if p.re.abs() <= margin {
            let w = p.im.abs();
            // conjugate partners share a frequency; count the pair once
            if p.im < 0.0 {
                continue;
            }
            match axis
                .iter_mut()
                .find(|(f, _)| (f - w).abs() <= 1e-6 * w.max(1e-6))
            {
                Some(slot) => slot.1 += 1,
                None => axis.push((w, 1)),
            }
        }
    }
    axis.sort_by(|a, b| a.0.total_cmp(&b.0));
    Stability {
        stable: !rhp && axis.is_empty(),
        rhp,
        max_real,
        imaginary_axis: axis,
    }
}

impl fmt::Display for RationalTF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tf(num: &[f64], den: &[f64]) -> RationalTF {
        RationalTF::from_descending(num, den).unwrap()
    }

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * (1.0 + b.norm())
    }

    #[test]
    fn first_order_corner() {
        let h = tf(&[1.0], &[1.0, 1.0]);
        let v = h.eval(1.0).unwrap();
        assert!(close(v, Complex64::new(0.5, -0.5), 1e-15));
        assert!((v.norm() - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn all_pass_has_unit_gain() {
        let h = tf(&[1.0, -1.0], &[1.0, 1.0]);
        for w in [0.0, 0.1, 1.0, 37.0, 1e4] {
            assert!((h.eval(w).unwrap().norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn eval_at_pole_reports_frequency() {
        let h = tf(&[1.0], &[1.0, 0.0, 4.0]);
        assert_eq!(h.eval(2.0), Err(Error::PoleProximity { omega: 2.0 }));
        assert!(RationalTF::integrator().eval(0.0).is_err());
    }

    #[test]
    fn unity_feedback_of_integrator() {
        let h = RationalTF::integrator().feedback(&RationalTF::constant(1.0)).unwrap();
        assert_eq!(h, tf(&[1.0], &[1.0, 1.0]));
    }

    #[test]
    fn ill_posed_feedback() {
        let h = RationalTF::constant(1.0);
        assert_eq!(h.feedback(&RationalTF::constant(-1.0)), Err(Error::IllPosedLoop));
    }

    #[test]
    fn exact_cancellation_in_product() {
        let h = tf(&[1.0], &[1.0, 1.0]).mul(&tf(&[1.0, 1.0], &[1.0, 2.0]));
        assert_eq!(h.num().degree(), 0);
        assert_eq!(h.den().degree(), 1);
        assert!(close(h.eval(3.0).unwrap(), tf(&[1.0], &[1.0, 2.0]).eval(3.0).unwrap(), 1e-12));
    }

    #[test]
    fn minreal_cases() {
        let den = &Polynomial::from_descending(&[1.0, 1.0]) * &Polynomial::from_descending(&[1.0, 2.0]);
        let exact = RationalTF::new(Polynomial::from_descending(&[1.0, 1.0]), den.clone()).unwrap();
        let r = exact.minreal(MINREAL_TOL);
        assert_eq!((r.num().degree(), r.den().degree()), (0, 1));
        assert!((r.den().coeff(0) - 2.0).abs() < 1e-9);

        let near = RationalTF::new(Polynomial::from_descending(&[1.0, 1.0000001]), den.clone()).unwrap();
        let r = near.minreal(MINREAL_TOL);
        assert_eq!((r.num().degree(), r.den().degree()), (0, 1));
        assert!((r.den().coeff(0) - 2.0).abs() < 1e-6);

        let coprime = RationalTF::new(
            Polynomial::from_descending(&[1.0, 2.0]),
            &Polynomial::from_descending(&[1.0, 1.0]) * &Polynomial::from_descending(&[1.0, 3.0]),
        )
        .unwrap();
        assert_eq!(coprime.minreal(MINREAL_TOL), coprime);
    }

    #[test]
    fn stability_classes() {
        assert!(tf(&[1.0], &[1.0, 1.0]).stability(STABILITY_MARGIN).stable);
        let s = tf(&[1.0], &[1.0, -1.0]).stability(STABILITY_MARGIN);
        assert!(!s.stable && s.rhp && (s.max_real - 1.0).abs() < 1e-12);
        let spring = tf(&[0.0484], &[1.0, 0.0]).stability(STABILITY_MARGIN);
        assert!(!spring.rhp);
        assert_eq!(spring.imaginary_axis, vec![(0.0, 1)]);
        assert!(spring.marginally_ok());
        let double = tf(&[1.0], &[1.0, 0.0, 0.0]).stability(STABILITY_MARGIN);
        assert_eq!(double.imaginary_axis, vec![(0.0, 2)]);
        assert!(!double.marginally_ok());
    }

    #[test]
    fn improper_functions_evaluate() {
        // pure-derivative PID
        let pid = tf(&[-20.0, -1000.0, -10.0], &[1.0, 0.0]);
        assert!(!pid.is_proper());
        let v = pid.eval(2.0).unwrap();
        assert!(close(v, -(Complex64::new(1000.0, 0.0) + 10.0 / Complex64::new(0.0, 2.0) + Complex64::new(0.0, 40.0)), 1e-14));
        assert!(pid.limit_at_infinity().is_none());
    }

    fn random_stable(rng: &mut ChaCha8Rng, max_deg: usize) -> RationalTF {
        let n = rng.random_range(1..=max_deg);
        let mut poles = Vec::new();
        while poles.len() < n {
            let re = -10f64.powf(rng.random_range(-1.0..2.0));
            if n - poles.len() >= 2 && rng.random_bool(0.5) {
                let im = 10f64.powf(rng.random_range(-1.0..2.0));
                poles.push(Complex64::new(re, im));
                poles.push(Complex64::new(re, -im));
            } else {
                poles.push(Complex64::new(re, 0.0));
            }
        }
        let m = rng.random_range(0..=n);
        let zeros: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.random_range(-20.0..20.0), 0.0))
            .collect();
        RationalTF::new(
            Polynomial::from_roots(&zeros, rng.random_range(0.1..5.0)),
            Polynomial::from_roots(&poles, 1.0),
        )
        .unwrap()
    }

    #[test]
    fn arithmetic_matches_pointwise_combination() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let h = random_stable(&mut rng, 6);
            let g = random_stable(&mut rng, 6);
            let prod = h.mul(&g);
            let sum = h.add(&g);
            let diff = h.sub(&g);
            let fb = h.feedback(&g).unwrap();
            // minreal at 1e-6 may cancel a near-coincident pair; the pointwise
            // contract then holds to that tolerance instead of round-off
            let tol_for = |out: &RationalTF, raw_den_degree: usize| {
                if out.den().degree() == raw_den_degree { 1e-9 } else { 1e-6 }
            };
            let dd = h.den().degree() + g.den().degree();
            for _ in 0..20 {
                let w = 10f64.powf(rng.random_range(-2.0..3.0));
                let (hv, gv) = (h.eval(w).unwrap(), g.eval(w).unwrap());
                let scale = 1.0 + hv.norm() * gv.norm();
                assert!((prod.eval(w).unwrap() - hv * gv).norm() <= tol_for(&prod, dd) * scale);
                let scale = 1.0 + hv.norm() + gv.norm();
                assert!((sum.eval(w).unwrap() - (hv + gv)).norm() <= tol_for(&sum, dd) * scale);
                assert!((diff.eval(w).unwrap() - (hv - gv)).norm() <= tol_for(&diff, dd) * scale);
                let fbv = hv / (1.0 + hv * gv);
                let got = fb.eval(w).unwrap();
                assert!((got - fbv).norm() <= tol_for(&fb, dd) * (1.0 + fbv.norm()), "{fb} at {w}: {got} vs {fbv}");
            }
        }
    }

    #[test]
    fn serde_wire_form_is_ascending() {
        let h = tf(&[2.0, 1.0], &[1.0, 3.0]);
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(json, r#"{"num":[1.0,2.0],"den":[3.0,1.0]}"#);
        let back: RationalTF = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
        assert!(serde_json::from_str::<RationalTF>(r#"{"num":[1.0],"den":[0.0]}"#).is_err());
    }
}
