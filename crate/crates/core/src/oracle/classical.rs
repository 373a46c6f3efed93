use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polyexp::{Jet, Polynomial};

/// Cumulants `κ_2, κ_3, …` of a single step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantVector {
    pub kappa: Vec<f64>,
}

impl CumulantVector {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        match kappa.first() {
            Some(&k2) if k2 > 0.0 => Ok(Self { kappa }),
            _ => Err(Error::InvalidArgument("kappa_2 must be positive".into())),
        }
    }

    /// `κ_k`, zero beyond the stored range.
    pub fn get(&self, k: usize) -> f64 {
        if k < 2 {
            return 0.0;
        }
        self.kappa.get(k - 2).copied().unwrap_or(0.0)
    }
}

/// Probabilists' Hermite polynomial `He_k` as coefficients in `x`.
pub fn hermite_he(k: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for j in 1..k {
        let mut next = vec![0.0; j + 2];
        for (i, c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= j as f64 * c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// All `(k_1, …, k_j)` with `Σ m·k_m = j`.
fn partitions(j: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, j: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if m > j {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..=left / m {
            cur.push(k);
            rec(m + 1, j, left - k * m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, j, j, &mut Vec::new(), &mut out);
    out
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Classical Edgeworth polynomials in the form
/// `P(S_n/√n ≤ x) ≈ 𝔑(x) + Σ_j n^{-j/2} P_j(x) 𝔫(x)` with `𝔑, 𝔫` the
/// centered Gaussian of variance `κ_2`. `P_j` is the sum over partitions
/// `k_1 + 2k_2 + … = j` of
/// `-σ Π_m (γ_{m+2}/(m+2)!)^{k_m}/k_m! · He_{j+2s-1}(x/σ)`, `s = Σ k_m`,
/// with `γ_k = κ_k/σ^k`.
pub fn classical_iid_edgeworth(c: &CumulantVector, r: usize) -> Result<Vec<Polynomial>> {
    if r + 1 > c.kappa.len() {
        return Err(Error::InsufficientJetOrder { need: r + 2, have: c.kappa.len() + 1 });
    }
    let sigma = c.get(2).sqrt();
    let gamma = |k: usize| c.get(k) / sigma.powi(k as i32);
    let mut out = Vec::with_capacity(r);
    for j in 1..=r {
        let mut coeffs = vec![0.0; 3 * j];
        for part in partitions(j) {
            let mut weight = 1.0;
            let mut s = 0;
            for (idx, &k) in part.iter().enumerate() {
                let m = idx + 1;
                weight *= (gamma(m + 2) / factorial(m + 2)).powi(k as i32) / factorial(k);
                s += k;
            }
            if weight == 0.0 {
                continue;
            }
            let he = hermite_he(j + 2 * s - 1);
            for (i, h) in he.iter().enumerate() {
                coeffs[i] -= sigma * weight * h / sigma.powi(i as i32);
            }
        }
        out.push(Polynomial::from_real(&coeffs));
    }
    Ok(out)
}

/// `κ_k = k!·[s^k] log λ(is) / i^k` for `k = 2..=order`, using a direct
/// power-series logarithm.
pub fn cumulants_from_jet(lambda_jet: &Jet) -> Result<CumulantVector> {
    let order = lambda_jet.order();
    if order < 3 {
        return Err(Error::InsufficientJetOrder { need: 3, have: order });
    }
    let c = lambda_jet.coeffs();
    let c0 = c[0];
    if (c0 - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::NonUnitEigenvalueAtZero { value: c0.norm() });
    }
    // log(1 + w) = Σ (-1)^{k+1} w^k / k with w = λ/λ(0) - 1
    let w: Vec<Complex64> = (0..=order).map(|k| if k == 0 { Complex64::new(0.0, 0.0) } else { c[k] / c0 }).collect();
    let mut log = vec![Complex64::new(0.0, 0.0); order + 1];
    let mut power = w.clone();
    for k in 1..=order {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        for i in 0..=order {
            log[i] += power[i] * (sign / k as f64);
        }
        let mut next = vec![Complex64::new(0.0, 0.0); order + 1];
        for i in 0..=order {
            for j in 0..=order - i {
                next[i + j] += power[i] * w[j];
            }
        }
        power = next;
    }
    let mut kappa = Vec::with_capacity(order - 1);
    let mut ipow = Complex64::new(1.0, 0.0);
    for k in 1..=order {
        ipow *= Complex64::new(0.0, 1.0);
        if k < 2 {
            continue;
        }
        let val = log[k] * factorial(k) / ipow;
        if val.im.abs() > 1e-9 * val.re.abs().max(1.0) {
            return Err(Error::ResidualImaginary { residue: val.im });
        }
        kappa.push(val.re);
    }
    CumulantVector::new(kappa)
}

/// Cumulants `κ_2..=κ_order` of a finite distribution, through raw moments of
/// the centered variable and `κ_n = μ_n - Σ_{m<n} C(n-1, m-1) κ_m μ_{n-m}`.
pub fn cumulants_from_distribution(values: &[f64], probabilities: &[f64], order: usize) -> Result<CumulantVector> {
    if values.len() != probabilities.len() || values.is_empty() {
        return Err(Error::InvalidArgument("values and probabilities must have equal nonzero length".into()));
    }
    let total: f64 = probabilities.iter().sum();
    let mean: f64 = values.iter().zip(probabilities).map(|(v, p)| v * p).sum::<f64>() / total;
    let mu: Vec<f64> =
        (0..=order).map(|k| values.iter().zip(probabilities).map(|(v, p)| p * (v - mean).powi(k as i32)).sum::<f64>() / total).collect();
    let mut binom = vec![vec![0.0; order + 1]; order + 1];
    for n in 0..=order {
        binom[n][0] = 1.0;
        for k in 1..=n {
            binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0.0 };
        }
    }
    let mut kappa = vec![0.0; order + 1];
    for n in 1..=order {
        let mut k = mu[n];
        for m in 1..n {
            k -= binom[n - 1][m - 1] * kappa[m] * mu[n - m];
        }
        kappa[n] = k;
    }
    CumulantVector::new(kappa[2..].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_low_orders() {
        assert_eq!(hermite_he(2), vec![-1.0, 0.0, 1.0]);
        assert_eq!(hermite_he(3), vec![0.0, -3.0, 0.0, 1.0]);
        assert_eq!(hermite_he(4), vec![3.0, 0.0, -6.0, 0.0, 1.0]);
    }

    #[test]
    fn partition_counts() {
        let counts: Vec<usize> = (1..=6).map(|j| partitions(j).len()).collect();
        assert_eq!(counts, vec![1, 2, 3, 5, 7, 11]);
    }

    #[test]
    fn symmetric_first_term_vanishes() {
        let p = classical_iid_edgeworth(&CumulantVector::new(vec![1.0, 0.0]).unwrap(), 1).unwrap();
        assert!(p[0].is_zero() || p[0].max_abs_coeff() < 1e-15);
    }

    #[test]
    fn skewed_first_term() {
        let g = 0.7;
        let p = classical_iid_edgeworth(&CumulantVector::new(vec![1.0, g]).unwrap(), 1).unwrap();
        let expect = [g / 6.0, 0.0, -g / 6.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((p[0].coeff(k).re - e).abs() < 1e-15);
        }
    }

    #[test]
    fn cos_cumulants() {
        let jet = Jet::from_real(&[1.0, 0.0, -0.5, 0.0, 1.0 / 24.0]);
        let k = cumulants_from_jet(&jet).unwrap();
        assert!((k.get(2) - 1.0).abs() < 1e-15);
        assert!(k.get(3).abs() < 1e-15);
        assert!((k.get(4) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_cumulants() {
        let k = cumulants_from_distribution(&[0.0, 1.0], &[0.7, 0.3], 4).unwrap();
        assert!((k.get(2) - 0.21).abs() < 1e-15);
        assert!((k.get(3) - 0.084).abs() < 1e-15);
        let p: f64 = 0.3;
        assert!((k.get(4) - p * (1.0 - p) * (1.0 - 6.0 * p * (1.0 - p))).abs() < 1e-15);
    }
}
