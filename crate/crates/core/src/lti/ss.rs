use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::poly::balance_with_scaling;
use super::tf::RationalTF;
use crate::error::{Error, Result};

/// Continuous-time state-space realization `x' = Ax + Bu, y = Cx + Du`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceLTI {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
}

impl StateSpaceLTI {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::validation("state-space", "inconsistent matrix dimensions"));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Controllable-canonical realization of a proper SISO transfer function.
    pub fn from_tf(h: &RationalTF) -> Result<Self> {
        if !h.is_proper() {
            return Err(Error::Improper {
                num: h.num().degree(),
                den: h.den().degree(),
            });
        }
        let den = h.den().coeffs();
        let n = den.len() - 1;
        let lead = den[n];
        let a_coef: Vec<f64> = den.iter().map(|c| c / lead).collect();
        let num: Vec<f64> = (0..=n).map(|k| h.num().coeff(k) / lead).collect();
        let feedthrough = num[n];
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        for j in 0..n {
            a[(n - 1, j)] = -a_coef[j];
        }
        let mut b = DMatrix::zeros(n, 1);
        if n > 0 {
            b[(n - 1, 0)] = 1.0;
        }
        let c = DMatrix::from_fn(1, n, |_, j| num[j] - feedthrough * a_coef[j]);
        let d = DMatrix::from_element(1, 1, feedthrough);
        Ok(Self { a, b, c, d })
    }

    /// Similarity-transformed copy with a balanced `A`.
    pub fn balanced(&self) -> Self {
        let mut a = self.a.clone();
        let scaling = balance_with_scaling(&mut a);
        let n = self.order();
        let mut b = self.b.clone();
        let mut c = self.c.clone();
        for i in 0..n {
            for j in 0..b.ncols() {
                b[(i, j)] /= scaling[i];
            }
            for r in 0..c.nrows() {
                c[(r, i)] *= scaling[i];
            }
        }
        Self { a, b, c, d: self.d.clone() }
    }

    /// `C (jωI − A)^{-1} B + D` for the (0, 0) entry, solved on the balanced
    /// realization.
    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        let sys = self.balanced();
        sys.eval_direct(omega)
    }

    fn eval_direct(&self, omega: f64) -> Result<Complex64> {
        let n = self.order();
        let d = Complex64::new(self.d[(0, 0)], 0.0);
        if n == 0 {
            return Ok(d);
        }
        let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            let diag = if i == j { Complex64::new(0.0, omega) } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let rhs = DVector::<Complex64>::from_fn(n, |i, _| Complex64::new(self.b[(i, 0)], 0.0));
        let x = m.lu().solve(&rhs).ok_or(Error::PoleProximity { omega })?;
        let y: Complex64 = (0..n).map(|i| x[i] * self.c[(0, i)]).sum();
        Ok(y + d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::poly::Polynomial;
    use proptest::prelude::*;

    #[test]
    fn improper_is_rejected() {
        let pid = RationalTF::from_descending(&[20.0, 1000.0, 10.0], &[1.0, 0.0]).unwrap();
        assert_eq!(StateSpaceLTI::from_tf(&pid), Err(Error::Improper { num: 2, den: 1 }));
    }

    #[test]
    fn static_gain_realization() {
        let ss = StateSpaceLTI::from_tf(&RationalTF::constant(3.0)).unwrap();
        assert_eq!(ss.order(), 0);
        assert_eq!(ss.eval(5.0).unwrap(), Complex64::new(3.0, 0.0));
    }

    #[test]
    fn identified_plant_realization() {
        let g1 = RationalTF::from_descending(&[-0.1064, -279.4], &[1.0, 81.64, 5821.0, 1389.0]).unwrap();
        let ss = StateSpaceLTI::from_tf(&g1).unwrap();
        for w in [0.0, 0.3, 7.0, 76.0, 900.0] {
            let a = ss.eval(w).unwrap();
            let b = g1.eval(w).unwrap();
            assert!((a - b).norm() <= 1e-8 * b.norm());
            assert!((ss.balanced().eval(w).unwrap() - b).norm() <= 1e-8 * b.norm());
        }
    }

    proptest! {
        #[test]
        fn realization_matches_tf(
            poles in prop::collection::vec(0.1f64..100.0, 1..7),
            zeros in prop::collection::vec(-50.0f64..50.0, 0..7),
            gain in 0.1f64..10.0,
            w in 0.01f64..1000.0,
        ) {
            let n = poles.len();
            let zs: Vec<Complex64> = zeros.iter().take(n).map(|&z| Complex64::new(z, 0.0)).collect();
            let ps: Vec<Complex64> = poles.iter().map(|&p| Complex64::new(-p, 0.0)).collect();
            let h = RationalTF::new(Polynomial::from_roots(&zs, gain), Polynomial::from_roots(&ps, 1.0)).unwrap();
            let ss = StateSpaceLTI::from_tf(&h).unwrap();
            let want = h.eval(w).unwrap();
            prop_assert!((ss.eval(w).unwrap() - want).norm() <= 1e-8 * want.norm().max(1e-300));
        }
    }
}
