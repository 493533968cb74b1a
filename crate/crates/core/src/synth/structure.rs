//! Fixed controller structures and their parameter vectors.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loops::Controller;
use crate::lti::{Polynomial, RationalTF};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructureKind {
    /// Independent `K1`, `K2` of order `order`, each with a monic denominator.
    FreePair { order: usize },
    /// `K1 = 0`, `K2 = −(Kp + Ki/s + Kd s)`.
    Pid,
    /// `K1 = 0`, `K2 = −(Kp + Ki/s + Kd s/(s + p))`.
    FilteredPid,
}

impl StructureKind {
    pub fn len(self) -> usize {
        match self {
            StructureKind::FreePair { order } => 2 * (2 * order + 1),
            StructureKind::Pid => 3,
            StructureKind::FilteredPid => 4,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }
}

/// A structure tag with its parameter vector.
///
/// `FreePair` layout, descending powers: `K1` numerator (order+1), `K1`
/// denominator without the leading 1 (order), then the same for `K2`.
/// `Pid`: `[Kp, Ki, Kd]`. `FilteredPid`: `[Kp, Ki, Kd, p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerStructure {
    pub kind: StructureKind,
    pub theta: Vec<f64>,
}

impl ControllerStructure {
    pub fn new(kind: StructureKind, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != kind.len() {
            return Err(Error::Shape { expected: kind.len(), got: theta.len() });
        }
        Ok(Self { kind, theta })
    }

    pub fn decode(&self) -> Result<Controller> {
        decode(self.kind, &self.theta)
    }
}

fn monic_desc(tail: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(tail.len() + 1);
    v.push(1.0);
    v.extend_from_slice(tail);
    v
}

pub fn decode(kind: StructureKind, theta: &[f64]) -> Result<Controller> {
    if theta.len() != kind.len() {
        return Err(Error::Shape { expected: kind.len(), got: theta.len() });
    }
    match kind {
        StructureKind::FreePair { order } => {
            let (k1, k2) = theta.split_at(2 * order + 1);
            let part = |p: &[f64]| {
                let (num, den) = p.split_at(order + 1);
                RationalTF::from_descending(num, &monic_desc(den))
            };
            Ok(Controller::new(part(k1)?, part(k2)?))
        }
        StructureKind::Pid => {
            let (kp, ki, kd) = (theta[0], theta[1], theta[2]);
            let k2 = RationalTF::from_descending(&[-kd, -kp, -ki], &[1.0, 0.0])?;
            Ok(Controller::new(RationalTF::zero(), k2))
        }
        StructureKind::FilteredPid => {
            let (kp, ki, kd, p) = (theta[0], theta[1], theta[2], theta[3]);
            // −[(Kp + Kd) s² + (Kp p + Ki) s + Ki p] / (s² + p s)
            let k2 = RationalTF::from_descending(&[-(kp + kd), -(kp * p + ki), -ki * p], &[1.0, p, 0.0])?;
            Ok(Controller::new(RationalTF::zero(), k2))
        }
    }
}

/// Inverse of [`decode`]. Fails when the controller does not have the shape
/// of `kind`.
pub fn encode(kind: StructureKind, k: &Controller) -> Result<Vec<f64>> {
    let shape_err = || Error::validation("controller", format!("does not fit structure {kind:?}"));
    match kind {
        StructureKind::FreePair { order } => {
            let mut theta = Vec::with_capacity(kind.len());
            for part in [&k.k1, &k.k2] {
                if part.den().degree() != order || part.num().degree() > order {
                    return Err(shape_err());
                }
                theta.extend((0..=order).rev().map(|i| part.num().coeff(i)));
                theta.extend((0..order).rev().map(|i| part.den().coeff(i)));
            }
            Ok(theta)
        }
        StructureKind::Pid => {
            let (n, d) = (k.k2.num(), k.k2.den());
            if !k.k1.is_zero() || d.degree() != 1 || d.coeff(0) != 0.0 || n.degree() > 2 {
                return Err(shape_err());
            }
            Ok(vec![-n.coeff(1), -n.coeff(0), -n.coeff(2)])
        }
        StructureKind::FilteredPid => {
            let (n, d) = (k.k2.num(), k.k2.den());
            if !k.k1.is_zero() || d.degree() != 2 || d.coeff(0) != 0.0 || n.degree() > 2 {
                return Err(shape_err());
            }
            let p = d.coeff(1);
            let ki = -n.coeff(0) / p;
            let kp = (-n.coeff(1) - ki) / p;
            let kd = -n.coeff(2) - kp;
            Ok(vec![kp, ki, kd, p])
        }
    }
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..hi.log10()))
}

/// Hurwitz monic polynomial of `degree` with root magnitudes log-uniform in
/// `[lo, hi]`, real or in complex pairs; returned without its leading 1,
/// descending.
fn random_hurwitz_tail<R: Rng>(rng: &mut R, degree: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut roots = Vec::with_capacity(degree);
    while roots.len() < degree {
        let mag = log_uniform(rng, lo, hi);
        if degree - roots.len() >= 2 && rng.random_bool(0.5) {
            let angle = rng.random_range(0.0..std::f64::consts::FRAC_PI_2 * 0.95);
            let (re, im) = (-mag * angle.cos(), mag * angle.sin());
            roots.push(Complex64::new(re, im));
            roots.push(Complex64::new(re, -im));
        } else {
            roots.push(Complex64::new(-mag, 0.0));
        }
    }
    let p = Polynomial::from_roots(&roots, 1.0);
    (0..degree).rev().map(|i| p.coeff(i)).collect()
}

fn random_sign<R: Rng>(rng: &mut R) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Random start. Free pairs: for each of `K1`, `K2`, a denominator with
/// left half-plane roots of magnitude log-uniform over `[1e-1, 1e4]` rad/s
/// (real or in complex pairs), and numerator coefficients `n_k = σ c_k d_k`
/// with each `c_k` log-uniform over `[1e-1, 1e4]` and one random sign `σ`
/// per controller, so `|K(jω)|` stays inside that gain range at every
/// frequency. PID
/// gains and the derivative pole are log-uniform over `[1e-1, 1e4]`.
pub fn random_theta<R: Rng>(kind: StructureKind, rng: &mut R) -> Vec<f64> {
    const LO: f64 = 1e-1;
    const HI: f64 = 1e4;
    match kind {
        StructureKind::FreePair { order } => {
            let mut theta = Vec::with_capacity(kind.len());
            for _ in 0..2 {
                let mut den = vec![1.0];
                den.extend(random_hurwitz_tail(rng, order, LO, HI));
                let sign = random_sign(rng);
                for d in &den {
                    theta.push(sign * log_uniform(rng, LO, HI) * d);
                }
                theta.extend_from_slice(&den[1..]);
            }
            theta
        }
        StructureKind::Pid => (0..3).map(|_| log_uniform(rng, LO, HI)).collect(),
        StructureKind::FilteredPid => (0..4).map(|_| log_uniform(rng, LO, HI)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::published;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pid_decodes_to_negated_sum() {
        let k = decode(StructureKind::Pid, &[1000.0, 10.0, 20.0]).unwrap();
        assert!(k.k1.is_zero());
        assert_eq!(k.k2, RationalTF::from_descending(&[-20.0, -1000.0, -10.0], &[1.0, 0.0]).unwrap());
    }

    #[test]
    fn filtered_pid_matches_pointwise_formula() {
        let k = decode(StructureKind::FilteredPid, &[1333.0, 0.0002, 403.0, 8.0]).unwrap();
        for w in [0.1, 1.0, 8.0, 100.0] {
            let s = Complex64::new(0.0, w);
            let want = -(1333.0 + 0.0002 / s + 403.0 * s / (s + 8.0));
            let got = k.k2.eval(w).unwrap();
            assert!((got - want).norm() <= 1e-12 * want.norm());
        }
    }

    #[test]
    fn free_pair_round_trips_published_coefficients() {
        let theta = published::hinf3_theta();
        let k = decode(StructureKind::FreePair { order: 3 }, &theta).unwrap();
        assert_eq!(k, published::hinf3());
        assert_eq!(k.k1.num().coeff(3), 4953.0);
        assert_eq!(k.k2.den().coeff(0), 4.533e8);
        assert_eq!(encode(StructureKind::FreePair { order: 3 }, &k).unwrap(), theta);
    }

    #[test]
    fn shape_errors() {
        assert_eq!(decode(StructureKind::Pid, &[1.0, 2.0]), Err(Error::Shape { expected: 3, got: 2 }));
        assert!(ControllerStructure::new(StructureKind::FreePair { order: 3 }, vec![0.0; 13]).is_err());
        assert_eq!(StructureKind::FreePair { order: 3 }.len(), 14);
    }

    #[test]
    fn random_denominators_are_hurwitz() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let theta = random_theta(StructureKind::FreePair { order: 3 }, &mut rng);
            let k = decode(StructureKind::FreePair { order: 3 }, &theta).unwrap();
            assert!(k.k1.is_stable() && k.k2.is_stable());
        }
    }

    fn kinds() -> impl Strategy<Value = StructureKind> {
        prop_oneof![
            (1usize..5).prop_map(|order| StructureKind::FreePair { order }),
            Just(StructureKind::Pid),
            Just(StructureKind::FilteredPid),
        ]
    }

    proptest! {
        #[test]
        fn encode_inverts_decode(kind in kinds(), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let theta = random_theta(kind, &mut rng);
            let back = encode(kind, &decode(kind, &theta).unwrap()).unwrap();
            for (a, b) in theta.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{theta:?} vs {back:?}");
            }
        }
    }
}
