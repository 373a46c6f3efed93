use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::quad;

/// Built-in test functions `g` for the MLCLT functional `E(ψ g(S_n) ξ∘fⁿ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestFunction {
    /// `height · exp(-(x-center)²/(2 width²))`
    Gaussian { center: f64, width: f64, height: f64 },
    /// `height · (1 + cos(π(x-center)/half_width))/2` on `|x-center| < half_width`
    RaisedCosine { center: f64, half_width: f64, height: f64 },
    /// Finitely supported sequence on ℤ.
    Lattice { points: Vec<(i64, f64)> },
}

impl TestFunction {
    pub fn indicator(k: i64) -> Self {
        TestFunction::Lattice { points: vec![(k, 1.0)] }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, TestFunction::Lattice { .. })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::Gaussian { center, width, height } => {
                let z = (x - center) / width;
                height * (-0.5 * z * z).exp()
            }
            TestFunction::RaisedCosine { center, half_width, height } => {
                let z = (x - center) / half_width;
                if z.abs() >= 1.0 {
                    0.0
                } else {
                    0.5 * height * (1.0 + (PI * z).cos())
                }
            }
            TestFunction::Lattice { ref points } => points.iter().filter(|(k, _)| *k as f64 == x).map(|(_, v)| *v).sum(),
        }
    }

    /// Interval outside of which the function is negligible (or zero).
    pub fn effective_support(&self) -> (f64, f64) {
        match *self {
            TestFunction::Gaussian { center, width, .. } => (center - 40.0 * width, center + 40.0 * width),
            TestFunction::RaisedCosine { center, half_width, .. } => (center - half_width, center + half_width),
            TestFunction::Lattice { ref points } => {
                let lo = points.iter().map(|p| p.0).min().unwrap_or(0) as f64;
                let hi = points.iter().map(|p| p.0).max().unwrap_or(0) as f64;
                (lo, hi)
            }
        }
    }

    /// Points of ℤ together with the function values, for summation against
    /// the counting measure.
    pub fn integer_samples(&self) -> Vec<(i64, f64)> {
        match self {
            TestFunction::Lattice { points } => points.clone(),
            _ => {
                let (lo, hi) = self.effective_support();
                (lo.ceil() as i64..=hi.floor() as i64).map(|k| (k, self.eval(k as f64))).collect()
            }
        }
    }

    /// `∫ x^l g(x) dx` against Lebesgue measure; `None` for lattice sequences.
    pub fn lebesgue_moment(&self, l: usize) -> Option<f64> {
        match *self {
            TestFunction::Gaussian { center, width, height } => {
                // E[(c + wZ)^l] for standard normal Z, times the mass h√(2π)w
                let mut acc = 0.0;
                let mut binom = 1.0;
                for k in 0..=l {
                    if k > 0 {
                        binom = binom * (l - k + 1) as f64 / k as f64;
                    }
                    if k % 2 == 0 {
                        let mut dfact = 1.0;
                        let mut j = 1;
                        while j < k {
                            dfact *= j as f64;
                            j += 2;
                        }
                        acc += binom * center.powi((l - k) as i32) * width.powi(k as i32) * dfact;
                    }
                }
                Some(acc * height * (2.0 * PI).sqrt() * width)
            }
            TestFunction::RaisedCosine { center, half_width, .. } => {
                // smooth on its support: 64-point Gauss–Legendre on each half is exact to rounding
                let rule = quad::Rule::new(64);
                let f = |x: f64| x.powi(l as i32) * self.eval(x);
                Some(rule.integrate(center - half_width, center, f) + rule.integrate(center, center + half_width, f))
            }
            TestFunction::Lattice { .. } => None,
        }
    }

    /// `Σ_k k^l g(k)` against counting measure on ℤ.
    pub fn counting_moment(&self, l: usize) -> f64 {
        self.integer_samples().iter().map(|&(k, v)| (k as f64).powi(l as i32) * v).sum()
    }
}
