use crate::error::{Error, Result};
use crate::point::C64;

/// Dense complex polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq)]
pub struct UnivariatePoly {
    coeffs: Vec<C64>,
}

impl UnivariatePoly {
    /// Builds a polynomial, trimming exactly-zero leading coefficients.
    pub fn new(mut coeffs: Vec<C64>) -> Self {
        while coeffs.len() > 1 && coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(C64::new(0.0, 0.0));
        }
        UnivariatePoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut c = vec![C64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![C64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == C64::new(0.0, 0.0))
    }

    pub fn max_modulus(&self) -> f64 {
        max_modulus(&self.coeffs)
    }

    pub fn eval(&self, z: C64) -> C64 {
        horner(&self.coeffs, z)
    }

    pub fn derivative(&self) -> UnivariatePoly {
        UnivariatePoly::new(derivative(&self.coeffs))
    }

    /// Exact division by `(z - r)`; returns quotient and remainder.
    pub fn deflate(&self, r: C64) -> (UnivariatePoly, C64) {
        let (q, rem) = synthetic_division(&self.coeffs, r);
        (UnivariatePoly::new(q), rem)
    }

    pub fn normalized(&self) -> Result<UnivariatePoly> {
        let s = self.max_modulus();
        if s == 0.0 {
            return Err(Error::Degenerate);
        }
        Ok(UnivariatePoly::new(self.coeffs.iter().map(|c| c / s).collect()))
    }
}

pub(crate) fn max_modulus(c: &[C64]) -> f64 {
    c.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub(crate) fn horner(c: &[C64], z: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
}

/// `sum |c_k| |z|^k`, the scale against which rounding in `horner` is measured.
pub(crate) fn horner_abs(c: &[C64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, ck| acc * r + ck.norm())
}

pub(crate) fn derivative(c: &[C64]) -> Vec<C64> {
    if c.len() <= 1 {
        return vec![C64::new(0.0, 0.0)];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &ck)| ck * k as f64)
        .collect()
}

pub(crate) fn nth_derivative(c: &[C64], k: usize) -> Vec<C64> {
    let mut d = c.to_vec();
    for _ in 0..k {
        d = derivative(&d);
    }
    d
}

pub(crate) fn synthetic_division(c: &[C64], r: C64) -> (Vec<C64>, C64) {
    let n = c.len();
    if n <= 1 {
        return (vec![C64::new(0.0, 0.0)], c.first().copied().unwrap_or_default());
    }
    let mut q = vec![C64::new(0.0, 0.0); n - 1];
    let mut acc = C64::new(0.0, 0.0);
    for k in (1..n).rev() {
        acc = acc * r + c[k];
        q[k - 1] = acc;
    }
    let rem = acc * r + c[0];
    (q, rem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_roots_and_eval() {
        let p = UnivariatePoly::from_roots(&[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]);
        assert_eq!(p.degree(), 2);
        assert!(p.eval(C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((p.eval(C64::new(0.0, 0.0)) + 1.0).norm() < 1e-15);
    }

    #[test]
    fn deflation_is_exact_on_roots() {
        let p = UnivariatePoly::from_roots(&[C64::new(2.0, 1.0), C64::new(0.5, 0.0), C64::new(-1.0, 3.0)]);
        let (q, rem) = p.deflate(C64::new(2.0, 1.0));
        assert!(rem.norm() < 1e-12);
        assert_eq!(q.degree(), 2);
        assert!(q.eval(C64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trims_zero_leading_terms() {
        let p = UnivariatePoly::from_real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), 1);
        assert!(UnivariatePoly::from_real(&[0.0, 0.0]).is_zero());
    }
}
