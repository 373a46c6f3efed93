//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest condition number accepted by [`LuSolver`].
pub const CONDITION_GUARD: f64 = 1e12;

pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// All eigenvalues, sorted by decreasing modulus (ties broken by argument so
/// the order is deterministic).
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    let mut ev: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    ev.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.arg().partial_cmp(&b.arg()).unwrap_or(std::cmp::Ordering::Equal))
    });
    ev
}

pub fn spectral_radius(m: &CMatrix) -> f64 {
    eigenvalues(m).first().map(|z| z.norm()).unwrap_or(0.0)
}

/// Partial-pivot LU factorization with a 1-norm condition-number guard.
pub struct LuSolver {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    pub condition: f64,
}

impl LuSolver {
    pub fn new(m: &CMatrix) -> Result<Self> {
        let lu = m.clone().lu();
        let inv = lu.try_inverse().ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
        let condition = norm1(m) * norm1(&inv);
        if !condition.is_finite() || condition > CONDITION_GUARD {
            return Err(Error::IllConditioned { condition });
        }
        Ok(Self { lu, condition })
    }

    pub fn solve(&self, b: &CVector) -> Result<CVector> {
        self.lu.solve(b).ok_or(Error::IllConditioned { condition: f64::INFINITY })
    }
}

pub fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn norm_inf(v: &CVector) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `m^n` by repeated squaring.
pub fn mat_pow(m: &CMatrix, mut n: usize) -> CMatrix {
    let mut result = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Unconjugated bilinear pairing `Σ a_i b_i`.
pub fn dot(a: &CVector, b: &CVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn real_to_complex(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)))
}

/// Eigenvector of `m` for the eigenvalue approximately `mu`, by inverse
/// iteration from a fixed start vector.
pub(crate) fn inverse_iteration(m: &CMatrix, mu: Complex64) -> Result<(Complex64, CVector)> {
    let n = m.nrows();
    let scale = norm1(m).max(1.0);
    let shift = mu + Complex64::new(1e-11 * scale, 1e-11 * scale);
    let shifted = m - CMatrix::identity(n, n) * shift;
    let lu = shifted.lu();
    // Fixed, slightly asymmetric start vector keeps the schedule deterministic
    // while avoiding accidental orthogonality to the target eigenvector.
    let mut v = CVector::from_iterator(n, (0..n).map(|i| Complex64::new(1.0 + 0.01 * i as f64, 0.0)));
    let mut lambda = mu;
    for _ in 0..60 {
        let next = match lu.solve(&v) {
            Some(x) => x,
            None => return Err(Error::NoConvergence { residual: f64::INFINITY }),
        };
        let nrm = next.norm();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::NoConvergence { residual: f64::INFINITY });
        }
        // Fix the phase by the largest component so successive iterates compare.
        let pivot = next.iter().copied().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).unwrap();
        let phase = pivot / pivot.norm();
        let next = next.map(|z| z / (phase * nrm));
        let change = (&next - &v).norm();
        v = next;
        let mv = m * &v;
        lambda = v.dotc(&mv) / v.dotc(&v);
        if change < 1e-13 {
            break;
        }
    }
    let residual = (m * &v - &v * lambda).norm() / v.norm();
    if residual > 1e-10 * scale {
        return Err(Error::NoConvergence { residual });
    }
    Ok((lambda, v))
}
