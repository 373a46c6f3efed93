use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Truncated power series `Σ_{k≤m} c_k s^k` at `s = 0`, with real variable `s`
/// and complex values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Jet {
    coeffs: Vec<Complex64>,
}

impl Jet {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet carries at least the constant term");
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zeros(order: usize) -> Self {
        Self::new(vec![ZERO; order + 1])
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of `s^k`, zero beyond the stored order.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    /// Same series viewed at another order: truncated or padded with zeros.
    pub fn with_order(&self, order: usize) -> Jet {
        Jet::new((0..=order).map(|k| self.coeff(k)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet::new(self.coeffs.iter().map(|z| z * c).collect())
    }

    pub fn add(&self, other: &Jet) -> Jet {
        let order = self.order().min(other.order());
        Jet::new((0..=order).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    /// Cauchy product truncated at the smaller order.
    pub fn mul(&self, other: &Jet) -> Jet {
        let order = self.order().min(other.order());
        let mut out = vec![ZERO; order + 1];
        for (i, a) in self.coeffs.iter().take(order + 1).enumerate() {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(order + 1 - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Jet::new(out)
    }

    pub fn pow(&self, m: usize) -> Jet {
        let mut out = Jet::zeros(self.order());
        out.coeffs[0] = Complex64::new(1.0, 0.0);
        for _ in 0..m {
            out = out.mul(self);
        }
        out
    }

    /// Series quotient; the divisor must have a nonzero constant term.
    pub fn div(&self, other: &Jet) -> Result<Jet> {
        let d0 = other.coeff(0);
        if d0.norm() == 0.0 {
            return Err(Error::InvalidArgument("series division by a jet vanishing at 0".into()));
        }
        let order = self.order().min(other.order());
        let mut q = vec![ZERO; order + 1];
        for k in 0..=order {
            let mut acc = self.coeff(k);
            for j in 1..=k {
                acc -= other.coeff(j) * q[k - j];
            }
            q[k] = acc / d0;
        }
        Ok(Jet::new(q))
    }

    /// Formal logarithm, from `f · (log f)' = f'`.
    pub fn ln(&self) -> Result<Jet> {
        let f0 = self.coeff(0);
        if f0.norm() == 0.0 {
            return Err(Error::InvalidArgument("logarithm of a jet vanishing at 0".into()));
        }
        let m = self.order();
        let mut g = vec![ZERO; m + 1];
        g[0] = f0.ln();
        for k in 1..=m {
            let mut acc = self.coeff(k) * k as f64;
            for j in 1..k {
                acc -= g[j] * j as f64 * self.coeff(k - j);
            }
            g[k] = acc / (f0 * k as f64);
        }
        Ok(Jet::new(g))
    }

    /// Formal exponential, from `(e^g)' = g' e^g`.
    pub fn exp(&self) -> Jet {
        let m = self.order();
        let mut f = vec![ZERO; m + 1];
        f[0] = self.coeff(0).exp();
        for k in 1..=m {
            let mut acc = ZERO;
            for j in 1..=k {
                acc += self.coeff(j) * j as f64 * f[k - j];
            }
            f[k] = acc / k as f64;
        }
        Jet::new(f)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * s + c)
    }
}

/// Univariate polynomial with complex coefficients in ascending degree.
/// Exactly-zero top coefficients are trimmed; the zero polynomial has no
/// coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last() == Some(&ZERO) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * x + c)
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect())
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|z| z * c).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    /// Multiply by the monomial `x`.
    pub fn shift_up(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(ZERO);
        c.extend_from_slice(&self.coeffs);
        Polynomial::new(c)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.coeffs.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude at powers whose parity differs from `parity`.
    pub fn parity_residual(&self, parity: usize) -> f64 {
        self.coeffs.iter().enumerate().filter(|(k, _)| k % 2 != parity % 2).map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }

    /// Drop imaginary parts.
    pub fn real_part(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect())
    }

    pub fn real_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos_jet(order: usize) -> Jet {
        let mut c = vec![0.0; order + 1];
        let mut fact = 1.0;
        for k in 0..=order {
            if k > 0 {
                fact *= k as f64;
            }
            if k % 2 == 0 {
                c[k] = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 } / fact;
            }
        }
        Jet::from_real(&c)
    }

    #[test]
    fn log_of_exp_roundtrips() {
        let g = Jet::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.3, -0.1),
            Complex64::new(-0.5, 0.2),
            Complex64::new(0.1, 0.0),
            Complex64::new(0.0, 0.7),
        ]);
        let back = g.exp().ln().unwrap();
        for k in 0..=4 {
            assert!((back.coeff(k) - g.coeff(k)).norm() < 1e-14);
        }
    }

    #[test]
    fn log_cos_matches_known_series() {
        // log cos s = -s^2/2 - s^4/12 - s^6/45 - ...
        let l = cos_jet(6).ln().unwrap();
        assert!((l.coeff(2).re + 0.5).abs() < 1e-15);
        assert!((l.coeff(4).re + 1.0 / 12.0).abs() < 1e-15);
        assert!((l.coeff(6).re + 1.0 / 45.0).abs() < 1e-15);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = Jet::from_real(&[1.0, 2.0, -1.0, 0.5]);
        let b = Jet::from_real(&[2.0, 0.0, 1.0, 3.0]);
        let q = a.mul(&b).div(&b).unwrap();
        for k in 0..=3 {
            assert!((q.coeff(k) - a.coeff(k)).norm() < 1e-14);
        }
    }

    #[test]
    fn polynomial_trims_and_differentiates() {
        let p = Polynomial::from_real(&[1.0, 2.0, 3.0, 0.0]);
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.derivative(), Polynomial::from_real(&[2.0, 6.0]));
        assert!(Polynomial::from_real(&[0.0]).is_zero());
    }
}
