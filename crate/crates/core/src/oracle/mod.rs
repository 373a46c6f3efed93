//! Ground truth computed without the perturbative machinery: exact
//! characteristic functions and lattice laws from matrix powers, exact
//! moments, Gil–Pelaez inversion and the classical i.i.d. Edgeworth
//! polynomials built from cumulants.

mod classical;
mod gil_pelaez;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

pub use classical::{classical_iid_edgeworth, cumulants_from_distribution, cumulants_from_jet, hermite_he, CumulantVector};
pub use gil_pelaez::{cdf_gil_pelaez, cdf_gil_pelaez_with, gil_pelaez_inversion, GilPelaez, GilPelaezOptions};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::models::NormalizedModel;
use crate::polyexp::TestFunction;

/// Largest `n` accepted by the lattice inversion.
pub const MAX_LATTICE_N: usize = 1 << 16;

/// `E(ψ e^{isS̄_n} ξ∘fⁿ) = uᵀ L_{is}ⁿ v` by `n` matrix-vector products, for
/// the centered sum.
pub fn exact_charfn(model: &NormalizedModel, n: usize, s: f64, psi: &[f64], xi: &[f64]) -> Result<Complex64> {
    let (u, v) = model.functionals(psi, xi)?;
    Ok(pair_power(&model.twisted(Complex64::new(s, 0.0)), n, &u, &v))
}

/// Same as [`exact_charfn`] for the uncentered sum `S_n`.
pub fn exact_charfn_raw(model: &NormalizedModel, n: usize, s: f64, psi: &[f64], xi: &[f64]) -> Result<Complex64> {
    let (u, v) = model.functionals(psi, xi)?;
    Ok(pair_power(&model.twisted_raw(Complex64::new(s, 0.0)), n, &u, &v))
}

/// `uᵀ Lⁿ v` by repeated products with `v`.
pub(crate) fn pair_power(l: &CMatrix, n: usize, u: &CVector, v: &CVector) -> Complex64 {
    let mut w = v.clone();
    for _ in 0..n {
        w = l * &w;
    }
    linalg::dot(u, &w)
}

/// `uᵀ Lⁿ v` by repeated squaring.
pub(crate) fn pair_power_fast(l: &CMatrix, n: usize, u: &CVector, v: &CVector) -> Complex64 {
    linalg::dot(u, &(linalg::mat_pow(l, n) * v))
}

/// Law of an integer-valued `S_n` (or a signed measure when the weights are
/// not a probability).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub n: usize,
    pub support: Vec<i64>,
    pub pmf: Vec<f64>,
}

impl ExactDistribution {
    pub fn get(&self, k: i64) -> f64 {
        let lo = match self.support.first() {
            Some(&lo) => lo,
            None => return 0.0,
        };
        if k < lo {
            return 0.0;
        }
        self.pmf.get((k - lo) as usize).copied().unwrap_or(0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.pmf.iter().sum()
    }

    pub fn min_mass(&self) -> f64 {
        self.pmf.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,pmf\n");
        for (k, p) in self.support.iter().zip(&self.pmf) {
            out.push_str(&format!("{k},{p:e}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// Smallest and largest integer phase carried by a nonzero weight.
fn check_integer_phases(model: &NormalizedModel) -> Result<(i64, i64)> {
    if !model.lattice {
        return Err(Error::NotLattice);
    }
    let (mut lo, mut hi) = (i64::MAX, i64::MIN);
    for b in &model.branches {
        for (w, p) in b.weight.iter().zip(b.phase.iter()) {
            if *w != 0.0 {
                if (p - p.round()).abs() > 1e-12 {
                    return Err(Error::NotLattice);
                }
                lo = lo.min(p.round() as i64);
                hi = hi.max(p.round() as i64);
            }
        }
    }
    if lo > hi {
        return Err(Error::InvalidArgument("model carries no weight".into()));
    }
    Ok((lo, hi))
}

/// `P(S_n = k)` for an integer-valued observable, uncentered.
pub fn exact_lattice_dist(model: &NormalizedModel, n: usize) -> Result<ExactDistribution> {
    let ones = vec![1.0; model.dim()];
    let mut d = exact_lattice_measure(model, n, &ones, &ones)?;
    // squaring drifts the mass by O(n·ε); the law itself has mass one
    let mass = d.total_mass();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(Error::NoConvergence { residual: mass - 1.0 });
    }
    d.pmf.iter_mut().for_each(|p| *p /= mass);
    Ok(d)
}

/// `E(ψ 1{S_n = k} ξ)` for every reachable `k`.
pub fn exact_lattice_measure(model: &NormalizedModel, n: usize, psi: &[f64], xi: &[f64]) -> Result<ExactDistribution> {
    let (lo, hi) = check_integer_phases(model)?;
    if n == 0 || n > MAX_LATTICE_N {
        return Err(Error::InvalidArgument(format!("n must lie in 1..={MAX_LATTICE_N}")));
    }
    let (u, v) = model.functionals(psi, xi)?;
    let width = n as i64 * (hi - lo);
    let centered = (2.0 * n as f64 * centered_bound(model)).ceil() as usize + 1;
    let nodes = centered.max(width as usize + 1).next_power_of_two();
    // χ of S_n - n·lo is a trigonometric polynomial of degree `width`
    let mut values: Vec<Complex64> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let s = 2.0 * PI * j as f64 / nodes as f64;
            let t = model.twisted_raw(Complex64::new(s, 0.0)) * Complex64::new(0.0, -s * lo as f64).exp();
            pair_power_fast(&t, n, &u, &v)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(nodes).process(&mut values);
    let scale = 1.0 / nodes as f64;
    let shift = n as i64 * lo;
    let support: Vec<i64> = (0..=width).map(|k| shift + k).collect();
    let pmf = (0..=width as usize).map(|k| values[k].re * scale).collect();
    Ok(ExactDistribution { n, support, pmf })
}

/// Exact `E(S̄_n^m)` for `m = 0..=order` under the weights `(ψ, ξ)`, by the
/// recursion `V_m^{(k+1)} = Σ_j C(m,j) M_j V_{m-j}^{(k)}`.
pub fn exact_moments(model: &NormalizedModel, n: usize, order: usize, psi: &[f64], xi: &[f64]) -> Result<Vec<f64>> {
    let (u, v) = model.functionals(psi, xi)?;
    let mats: Vec<CMatrix> = (0..=order).map(|j| model.derivative_matrix(j).map(|x| Complex64::new(x, 0.0))).collect();
    let mut binom = vec![vec![0.0; order + 1]; order + 1];
    for m in 0..=order {
        binom[m][0] = 1.0;
        for j in 1..=m {
            binom[m][j] = binom[m - 1][j - 1] + if j < m { binom[m - 1][j] } else { 0.0 };
        }
    }
    let mut vs: Vec<CVector> = (0..=order).map(|m| if m == 0 { v.clone() } else { v.map(|_| Complex64::new(0.0, 0.0)) }).collect();
    for _ in 0..n {
        let next: Vec<CVector> = (0..=order)
            .map(|m| {
                let mut acc = &mats[0] * &vs[m];
                for j in 1..=m {
                    acc += (&mats[j] * &vs[m - j]) * Complex64::new(binom[m][j], 0.0);
                }
                acc
            })
            .collect();
        vs = next;
    }
    Ok(vs.iter().map(|w| linalg::dot(&u, w).re).collect())
}

/// Exact `Var(S_n)` under the stationary law.
pub fn exact_variance(model: &NormalizedModel, n: usize) -> Result<f64> {
    let ones = vec![1.0; model.dim()];
    let m = exact_moments(model, n, 2, &ones, &ones)?;
    Ok(m[2] / m[0] - (m[1] / m[0]).powi(2))
}

/// `(Var(S_{2n}) - Var(S_n)) / n`, which equals `σ²` up to terms decaying
/// like the spectral gap to the power `n`.
pub fn variance_extrapolation(model: &NormalizedModel, n: usize) -> Result<f64> {
    Ok((exact_variance(model, 2 * n)? - exact_variance(model, n)?) / n as f64)
}

/// Dominant eigenvalue of `L_{is}` by a dense eigen-solve.
pub fn dominant_eigenvalue(model: &NormalizedModel, s: f64) -> Complex64 {
    linalg::eigenvalues(&model.twisted(Complex64::new(s, 0.0)))[0]
}

/// `E(ψ e^{isS̄_n} ξ∘fⁿ) / λ(is)ⁿ`, which converges to the projection
/// constant `H(s)` exponentially fast in `n`.
pub fn normalized_charfn(model: &NormalizedModel, n: usize, s: f64, psi: &[f64], xi: &[f64]) -> Result<Complex64> {
    let (u, v) = model.functionals(psi, xi)?;
    let t = model.twisted(Complex64::new(s, 0.0));
    let lam = linalg::eigenvalues(&t)[0];
    let scaled = t.map(|z| z / lam);
    Ok(pair_power_fast(&scaled, n, &u, &v))
}

/// `E(ψ g(S̄_n) ξ∘fⁿ)` computed exactly: by summation against the exact
/// lattice measure, or by Fourier inversion for a Gaussian `g` on a
/// non-lattice model.
pub fn exact_mlclt(model: &NormalizedModel, n: usize, g: &TestFunction, psi: &[f64], xi: &[f64]) -> Result<f64> {
    if model.lattice {
        let dist = exact_lattice_measure(model, n, psi, xi)?;
        let shift = n as f64 * model.mean;
        return match g {
            TestFunction::Lattice { points } => {
                if (shift - shift.round()).abs() > 1e-9 {
                    return Err(Error::UnsupportedTestFunction("lattice sequence with a non-integer drift".into()));
                }
                let off = shift.round() as i64;
                Ok(points.iter().map(|&(k, w)| w * dist.get(k + off)).sum())
            }
            _ => Ok(dist.support.iter().zip(&dist.pmf).map(|(&k, p)| p * g.eval(k as f64 - shift)).sum()),
        };
    }
    match *g {
        TestFunction::Gaussian { center, width, height } => {
            let (u, v) = model.functionals(psi, xi)?;
            let omega = n as f64 * centered_bound(model) + center.abs() + 1.0;
            let s_max = 9.0 / width;
            let panel = (4.0 / omega).min(s_max);
            let panels = (s_max / panel).ceil() as usize;
            let rule = crate::quad::Rule::new(16);
            let total: f64 = (0..panels)
                .into_par_iter()
                .map(|p| {
                    let a = p as f64 * panel;
                    let mut acc = 0.0;
                    for (s, w) in rule.mapped(a, a + panel) {
                        let ghat = height
                            * width
                            * (2.0 * PI).sqrt()
                            * (-0.5 * width * width * s * s).exp()
                            * Complex64::new(0.0, -s * center).exp();
                        let chi = pair_power_fast(&model.twisted(Complex64::new(s, 0.0)), n, &u, &v);
                        acc += w * (ghat * chi).re;
                    }
                    acc
                })
                .collect::<Vec<_>>()
                .iter()
                .sum();
            Ok(total / PI)
        }
        TestFunction::RaisedCosine { .. } => Err(Error::UnsupportedTestFunction("raised cosine has a slowly decaying transform".into())),
        TestFunction::Lattice { .. } => Err(Error::NotLattice),
    }
}

/// `max |φ - mean|` over allowed transitions.
pub(crate) fn centered_bound(model: &NormalizedModel) -> f64 {
    model
        .branches
        .iter()
        .flat_map(|b| b.weight.iter().zip(b.phase.iter()).filter(|(w, _)| **w != 0.0).map(|(_, p)| (p - model.mean).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::catalog;

    #[test]
    fn fair_coin_small_n() {
        let m = catalog::bernoulli_fair();
        let d1 = exact_lattice_dist(&m, 1).unwrap();
        assert!((d1.get(-1) - 0.5).abs() < 1e-15 && (d1.get(1) - 0.5).abs() < 1e-15 && d1.get(0).abs() < 1e-15);
        let d2 = exact_lattice_dist(&m, 2).unwrap();
        for (k, p) in [(-2, 0.25), (0, 0.5), (2, 0.25), (1, 0.0)] {
            assert!((d2.get(k) - p).abs() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn charfn_at_zero_is_one() {
        let m = catalog::chain2_lattice();
        let one = exact_charfn(&m, 17, 0.0, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!((one - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn iid_charfn_is_power() {
        let m = catalog::bernoulli(0.3);
        let s = 0.9;
        let base = Complex64::new(0.7, 0.0) + Complex64::new(0.0, s).exp() * 0.3;
        let got = exact_charfn_raw(&m, 25, s, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!((got - base.powu(25)).norm() < 1e-12);
    }

    #[test]
    fn lattice_rejects_non_integer() {
        assert!(matches!(exact_lattice_dist(&catalog::chain3_nonlattice(), 4), Err(Error::NotLattice)));
    }

    #[test]
    fn variance_of_iid() {
        let m = catalog::bernoulli(0.3);
        assert!((exact_variance(&m, 10).unwrap() - 2.1).abs() < 1e-12);
        assert!((variance_extrapolation(&m, 10).unwrap() - 0.21).abs() < 1e-12);
    }
}
