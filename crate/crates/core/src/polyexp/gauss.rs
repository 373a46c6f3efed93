use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Centered normal law `N(0, σ²)`: density `𝔫`, distribution function `𝔑`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    sigma2: f64,
}

impl GaussianParams {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidArgument(format!("variance must be positive, got {sigma2}")));
        }
        Ok(Self { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        (-0.5 * x * x / self.sigma2).exp() / (2.0 * PI * self.sigma2).sqrt()
    }

    /// `𝔑(x)` through the complementary error function of `libm` (the fdlibm
    /// rational approximations, sub-ulp accurate), which keeps full relative
    /// precision in both tails.
    pub fn cdf(&self, x: f64) -> f64 {
        0.5 * libm::erfc(-x / (2.0 * self.sigma2).sqrt())
    }

    /// `∫ x^k 𝔫(x) dx`.
    pub fn moment(&self, k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        double_factorial_odd(k) * self.sigma2.powi((k / 2) as i32)
    }

    /// `∫ u^k e^{-σ²u²/2} du = √(2π/σ²) (k-1)!! σ^{-k}` for even `k`, zero for odd.
    pub fn fourier_moment(&self, k: usize) -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        (2.0 * PI / self.sigma2).sqrt() * double_factorial_odd(k) / self.sigma2.powi((k / 2) as i32)
    }
}

/// `(k-1)!!` for even `k`, with `(-1)!! = 1`.
fn double_factorial_odd(k: usize) -> f64 {
    let mut acc = 1.0;
    let mut j = 1;
    while j < k {
        acc *= j as f64;
        j += 2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    #[test]
    fn cdf_hits_reference_values() {
        let g = GaussianParams::new(1.0).unwrap();
        // Φ(1), Φ(-3), Φ(0.5) to 17 digits
        assert!((g.cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((g.cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
        assert!((g.cdf(0.5) - 0.691_462_461_274_013_1).abs() < 1e-15);
        assert_eq!(g.cdf(0.0), 0.5);
    }

    #[test]
    fn cdf_integrates_pdf() {
        let g = GaussianParams::new(2.5).unwrap();
        for &x in &[-4.0, -1.3, 0.2, 2.7] {
            let integral = quad::adaptive(&|t| g.pdf(t), -40.0, x, 1e-15);
            assert!((integral - g.cdf(x)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn moments_match_quadrature() {
        let g = GaussianParams::new(0.7).unwrap();
        for k in 0..8 {
            let m = quad::adaptive(&|t| t.powi(k as i32) * g.pdf(t), -30.0, 30.0, 1e-14);
            assert!((m - g.moment(k)).abs() < 1e-11, "k={k}");
            let f = quad::adaptive(&|u| u.powi(k as i32) * (-0.35 * u * u).exp(), -60.0, 60.0, 1e-14);
            assert!((f - g.fourier_moment(k)).abs() < 1e-9 * f.abs().max(1.0), "k={k}");
        }
    }

    #[test]
    fn rejects_nonpositive_variance() {
        assert!(GaussianParams::new(0.0).is_err());
        assert!(GaussianParams::new(-1.0).is_err());
    }
}
