//! Real-coefficient polynomials in `s`, stored with ascending powers.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial `c[0] + c[1] s + ... + c[n] s^n`.
///
/// Trailing (highest-power) coefficients that are exactly zero are dropped on
/// construction, so the zero polynomial is the empty coefficient vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Build from descending coefficients, the way they are usually printed.
    pub fn from_descending(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().rev().copied().collect())
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    /// `∏ (s - r)` scaled by `gain`. Conjugate pairs are expected to appear
    /// together; any imaginary residue in the product is discarded.
    pub fn from_roots(roots: &[Complex64], gain: f64) -> Self {
        let mut acc = vec![Complex64::new(gain, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (i, &c) in acc.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            acc = next;
        }
        Self::new(acc.into_iter().map(|c| c.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn coeff(&self, power: usize) -> f64 {
        self.coeffs.get(power).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// Divide by `(s - root)` for a real root, discarding the remainder.
    pub fn deflate(&self, root: f64) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        let mut q = vec![0.0; n - 1];
        let mut carry = 0.0;
        for k in (1..n).rev() {
            carry = self.coeffs[k] + carry * root;
            q[k - 1] = carry;
        }
        Self::new(q)
    }

    /// Roots via eigenvalues of the balanced companion matrix, polished by a
    /// few Newton steps on the original coefficients.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::Degenerate("roots of the zero polynomial".into()));
        }
        // exact roots at the origin
        let zeros_at_origin = self.coeffs.iter().take_while(|&&c| c == 0.0).count();
        let reduced = &self.coeffs[zeros_at_origin..];
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros_at_origin];
        let n = reduced.len() - 1;
        if n == 0 {
            return Ok(roots);
        }
        let lead = reduced[n];
        if n == 1 {
            roots.push(Complex64::new(-reduced[0] / lead, 0.0));
            return Ok(roots);
        }
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            companion[(i, n - 1)] = -reduced[i] / lead;
        }
        balance(&mut companion);
        // unbounded QR iteration can cycle; cap it and retry on the transpose
        let cap = 100 * n + 100;
        let eig = match Schur::try_new(companion.clone(), f64::EPSILON, cap) {
            Some(s) => s.complex_eigenvalues(),
            None => Schur::try_new(companion.transpose(), f64::EPSILON, cap)
                .ok_or_else(|| Error::Degenerate("eigenvalue iteration did not converge".into()))?
                .complex_eigenvalues(),
        };
        let reduced_poly = Polynomial::new(reduced.to_vec());
        let deriv = reduced_poly.derivative();
        for z in eig.iter() {
            roots.push(polish(&reduced_poly, &deriv, *z));
        }
        Ok(roots)
    }
}

fn polish(p: &Polynomial, dp: &Polynomial, mut z: Complex64) -> Complex64 {
    let mut best = p.eval_complex(z).norm();
    for _ in 0..3 {
        let d = dp.eval_complex(z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - p.eval_complex(z) / d;
        let r = p.eval_complex(cand).norm();
        if !(r < best) {
            break;
        }
        best = r;
        z = cand;
    }
    // keep real roots exactly real
    if z.im.abs() <= 1e-14 * z.norm() {
        z.im = 0.0;
    }
    z
}

/// Diagonal similarity balancing (Parlett–Reinsch), in place.
pub(crate) fn balance(a: &mut DMatrix<f64>) {
    balance_with_scaling(a);
}

/// Balance `a` in place and return the diagonal scaling `d` such that the
/// balanced matrix equals `D^-1 A D`.
pub(crate) fn balance_with_scaling(a: &mut DMatrix<f64>) -> Vec<f64> {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut d = vec![1.0; n];
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    d[i] *= f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
    d
}

fn combine(a: &[f64], b: &[f64], sign: f64) -> Polynomial {
    let n = a.len().max(b.len());
    let coeffs = (0..n)
        .map(|k| {
            let x = a.get(k).copied().unwrap_or(0.0);
            let y = sign * b.get(k).copied().unwrap_or(0.0);
            let s = x + y;
            // flush cancellation noise
            if s.abs() <= 4.0 * f64::EPSILON * (x.abs() + y.abs()) {
                0.0
            } else {
                s
            }
        })
        .collect();
    Polynomial::new(coeffs)
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        combine(&self.coeffs, &rhs.coeffs, 1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        combine(&self.coeffs, &rhs.coeffs, -1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match k {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}s")?,
                _ => write!(f, "{a}s^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_re(mut r: Vec<Complex64>) -> Vec<Complex64> {
        r.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        r
    }

    #[test]
    fn factorable_quadratic() {
        let r = sorted_re(Polynomial::new(vec![2.0, 3.0, 1.0]).roots().unwrap());
        assert_eq!(r.len(), 2);
        assert!((r[0] - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn oscillator_roots() {
        let r = sorted_re(Polynomial::new(vec![1.0, 0.0, 1.0]).roots().unwrap());
        assert!((r[0] - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn identified_denominator_has_slow_real_root() {
        let p = Polynomial::from_descending(&[1.0, 81.64, 5821.0, 1389.0]);
        let r = p.roots().unwrap();
        assert_eq!(r.len(), 3);
        assert!(r.iter().all(|z| z.re < 0.0));
        assert!(r.iter().any(|z| z.im == 0.0 && (z.re + 0.2394).abs() < 1e-3));
    }

    #[test]
    fn zero_polynomial_is_degenerate() {
        assert!(matches!(Polynomial::zero().roots(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn constant_has_no_roots_and_origin_roots_are_exact() {
        assert!(Polynomial::constant(3.0).roots().unwrap().is_empty());
        let r = Polynomial::new(vec![0.0, 0.0, 2.0, 1.0]).roots().unwrap();
        assert_eq!(r.iter().filter(|z| z.norm() == 0.0).count(), 2);
    }

    #[test]
    fn deflate_removes_a_known_root() {
        let p = &Polynomial::new(vec![2.0, 3.0, 1.0]) * &Polynomial::new(vec![5.0, 1.0]);
        assert_eq!(p.deflate(-5.0), Polynomial::new(vec![2.0, 3.0, 1.0]));
    }

    #[test]
    fn display_reads_naturally() {
        assert_eq!(Polynomial::new(vec![2.0, -3.0, 1.0]).to_string(), "1s^2 - 3s + 2");
    }

    proptest::proptest! {
        #[test]
        fn rebuild_from_roots(roots in proptest::collection::vec(0.5f64..40.0, 1..9), gain in 0.1f64..10.0) {
            // well-separated negative real roots
            let mut rs: Vec<f64> = roots.iter().enumerate().map(|(i, r)| -(r + 50.0 * i as f64)).collect();
            rs.dedup();
            let zs: Vec<Complex64> = rs.iter().map(|&r| Complex64::new(r, 0.0)).collect();
            let p = Polynomial::from_roots(&zs, gain);
            let q = Polynomial::from_roots(&p.roots().unwrap(), p.leading());
            for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
                proptest::prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-300));
            }
        }
    }
}
