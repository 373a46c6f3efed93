//! Expansion polynomials from the eigenvalue jet.
//!
//! Starting from the Taylor jet of the leading eigenvalue `λ(is)` and the
//! constants `B_N`, this module builds
//!
//! * `ψ₀(is) = log λ(is) + σ²s²/2`,
//! * the characteristic-function corrections `A_j` with
//!   `E(ψ e^{isS_n/√n} ξ) ≈ e^{-σ²s²/2} Σ_j A_j(s) n^{-j/2}`,
//! * the density corrections `R_j`, defined by
//!   `∫ e^{isx} R_j(x)𝔫(x) dx = A_j(s) e^{-σ²s²/2}`,
//! * the distribution corrections `P_j` with `(𝔫P_j)' = 𝔫R_j`,
//! * the local-expansion polynomials `Q_m`,
//!
//! and evaluates the resulting expansions. Everything here is pure and
//! operates on plain data.

mod gauss;
mod series;
mod testfn;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use gauss::GaussianParams;
pub use series::{Jet, Polynomial};
pub use testfn::TestFunction;

use crate::error::{Error, Result};
use crate::quad;

/// Highest supported expansion order.
pub const MAX_ORDER: usize = 6;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Magnitude below which a coefficient counts as zero.
    pub coeff: f64,
    /// Residual allowed on numerically produced input (jets, `B_N`).
    pub residual: f64,
    /// Imaginary part tolerated on quantities that must be real.
    pub realness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { coeff: 1e-10, residual: 1e-8, realness: 1e-9 }
    }
}

/// Jet of `ψ₀(is) = log λ(is) + σ²s²/2`; its coefficients of order 0, 1, 2
/// are set to zero after checking they are negligible.
pub fn psi0_jet(lambda_jet: &Jet, g: GaussianParams) -> Result<Jet> {
    psi0_jet_with(lambda_jet, g, &Tolerances::default())
}

pub fn psi0_jet_with(lambda_jet: &Jet, g: GaussianParams, tol: &Tolerances) -> Result<Jet> {
    if lambda_jet.order() < 2 {
        return Err(Error::InsufficientJetOrder { need: 2, have: lambda_jet.order() });
    }
    let c0 = lambda_jet.coeff(0);
    if (c0 - 1.0).norm() > tol.residual {
        return Err(Error::NonUnitEigenvalueAtZero { value: c0.norm() });
    }
    let mut log = lambda_jet.ln()?;
    let r1 = log.coeff(1).norm();
    if r1 > tol.residual {
        return Err(Error::ResidualCumulant { order: 1, residual: r1 });
    }
    let r2 = (log.coeff(2) + 0.5 * g.sigma2()).norm();
    if r2 > tol.residual * g.sigma2().max(1.0) {
        return Err(Error::ResidualCumulant { order: 2, residual: r2 });
    }
    for c in log.coeffs_mut().iter_mut().take(3) {
        *c = ZERO;
    }
    Ok(log)
}

/// `A_0..A_r`, with `A_j(s) = Σ_{m≤j} a_{m,j} s^{2m+j}` and
/// `a_{m,j} = (1/m!) Σ_{N≤j-m} (B_N/N!) [s^{2m+j-N}] ψ₀(is)^m`.
pub fn build_a(psi0: &Jet, b: &[Complex64], r: usize) -> Result<Vec<Polynomial>> {
    if psi0.order() < r + 2 {
        return Err(Error::InsufficientJetOrder { need: r + 2, have: psi0.order() });
    }
    if b.len() < r + 1 {
        return Err(Error::InvalidArgument(format!("{} constants B_N given, {} required", b.len(), r + 1)));
    }
    // Coefficients of ψ₀ above order r+2 never reach a_{m,j} with j ≤ r (each
    // factor of ψ₀^m starts at s³), so zero padding is exact.
    let top = 3 * r.max(1);
    let psi = psi0.with_order(top);
    let powers: Vec<Jet> = (0..=r).map(|m| psi.pow(m)).collect();
    let mut out = Vec::with_capacity(r + 1);
    for j in 0..=r {
        let mut coeffs = vec![ZERO; 3 * j + 1];
        let mut m_fact = 1.0;
        for m in 0..=j {
            if m > 0 {
                m_fact *= m as f64;
            }
            let mut a = ZERO;
            let mut n_fact = 1.0;
            for (n, bn) in b.iter().enumerate().take(j - m + 1) {
                if n > 0 {
                    n_fact *= n as f64;
                }
                a += bn / n_fact * powers[m].coeff(2 * m + j - n);
            }
            coeffs[2 * m + j] = a / m_fact;
        }
        out.push(Polynomial::new(coeffs));
    }
    Ok(out)
}

/// Polynomials `H_k` with `𝔫^{(k)} = H_k 𝔫`.
fn gaussian_derivative_polys(max_k: usize, g: GaussianParams) -> Vec<Polynomial> {
    let mut out = vec![Polynomial::from_real(&[1.0])];
    let x_over = Polynomial::from_real(&[0.0, -1.0 / g.sigma2()]);
    for k in 0..max_k {
        let h = &out[k];
        let next = h.derivative().add(&h.mul(&x_over));
        out.push(next);
    }
    out
}

/// `R` with `∫ e^{isx} R(x)𝔫(x) dx = A(s) e^{-σ²s²/2}`, using
/// `s^k e^{-σ²s²/2} = i^k ∫ e^{isx} 𝔫^{(k)}(x) dx`.
pub fn r_from_a(a: &Polynomial, g: GaussianParams) -> Polynomial {
    let Some(deg) = a.degree() else {
        return Polynomial::zero();
    };
    let h = gaussian_derivative_polys(deg, g);
    let mut acc = Polynomial::zero();
    let mut ipow = Complex64::new(1.0, 0.0);
    for k in 0..=deg {
        let c = a.coeff(k) * ipow;
        if c != ZERO {
            acc = acc.add(&h[k].scale(c));
        }
        ipow *= I;
    }
    acc
}

/// `∫ R(x)𝔫(x) dx` from exact Gaussian moments.
pub fn gaussian_mean(r: &Polynomial, g: GaussianParams) -> Complex64 {
    r.coeffs().iter().enumerate().map(|(k, c)| c * g.moment(k)).sum()
}

/// `P` with `(𝔫P)' = 𝔫R`, by the descending recursion
/// `p_{k-1} = σ²((k+1)p_{k+1} - r_k)`.
pub fn p_from_r(r: &Polynomial, g: GaussianParams) -> Result<Polynomial> {
    p_from_r_with(r, g, &Tolerances::default())
}

pub fn p_from_r_with(r: &Polynomial, g: GaussianParams, tol: &Tolerances) -> Result<Polynomial> {
    let Some(deg) = r.degree() else {
        return Ok(Polynomial::zero());
    };
    let scale: f64 = r.coeffs().iter().enumerate().map(|(k, c)| c.norm() * g.moment(k + k % 2)).sum::<f64>().max(1.0);
    let mean = gaussian_mean(r, g);
    if mean.norm() > tol.residual * scale {
        return Err(Error::NotSolvable { mean: mean.norm() });
    }
    if deg == 0 {
        // nonzero constant would have failed the mean test
        return Ok(Polynomial::zero());
    }
    let s2 = g.sigma2();
    let mut p = vec![ZERO; deg + 2];
    for k in (1..=deg).rev() {
        p[k - 1] = s2 * ((k + 1) as f64 * p[k + 1] - r.coeff(k));
    }
    let check = (r.coeff(0) - p[1]).norm();
    if check > tol.residual * scale {
        return Err(Error::NotSolvable { mean: check });
    }
    p.truncate(deg);
    Ok(Polynomial::new(p))
}

/// `Q_m(x) = (1/2π) Σ_{l+j=2m} (∫ u^l A_j(u) e^{-σ²u²/2} du) (-ix)^l / l!`,
/// returned with its (negligible) imaginary part removed.
pub fn q_from_a(a: &[Polynomial], g: GaussianParams, m: usize) -> Result<Polynomial> {
    q_from_a_with(a, g, m, &Tolerances::default())
}

pub fn q_from_a_with(a: &[Polynomial], g: GaussianParams, m: usize, tol: &Tolerances) -> Result<Polynomial> {
    if a.len() < 2 * m + 1 {
        return Err(Error::InvalidArgument(format!("Q_{m} needs A_0..A_{}, got {} polynomials", 2 * m, a.len())));
    }
    let mut coeffs = vec![ZERO; 2 * m + 1];
    let mut l_fact = 1.0;
    let mut mi_pow = Complex64::new(1.0, 0.0);
    for l in 0..=2 * m {
        if l > 0 {
            l_fact *= l as f64;
            mi_pow *= -I;
        }
        let aj = &a[2 * m - l];
        let integral: Complex64 = aj.coeffs().iter().enumerate().map(|(k, c)| c * g.fourier_moment(l + k)).sum();
        coeffs[l] = integral * mi_pow / (2.0 * PI * l_fact);
    }
    let q = Polynomial::new(coeffs);
    let scale = q.max_abs_coeff().max(1.0);
    if q.max_imag() > tol.realness * scale {
        return Err(Error::ImaginaryResidue { residue: q.max_imag() });
    }
    Ok(q.real_part())
}

/// Assembled expansion data of order `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionSet {
    pub order: usize,
    pub sigma2: f64,
    pub lattice: bool,
    #[serde(rename = "B")]
    pub b: Vec<Complex64>,
    #[serde(rename = "A")]
    pub a: Vec<Polynomial>,
    #[serde(rename = "R")]
    pub r: Vec<Polynomial>,
    /// `P_1..P_r` (index 0 holds `P_1`).
    #[serde(rename = "P")]
    pub p: Vec<Polynomial>,
    /// `Q_0..Q_{⌊r/2⌋}`.
    #[serde(rename = "Q")]
    pub q: Vec<Polynomial>,
}

impl ExpansionSet {
    /// Build every polynomial family of order `r` from a λ-jet of order at
    /// least `r + 2` and the constants `B_0..B_r`. `σ² = -2 Re c_2`.
    pub fn build(lambda_jet: &Jet, b: &[Complex64], r: usize, lattice: bool) -> Result<Self> {
        Self::build_with(lambda_jet, b, r, lattice, &Tolerances::default())
    }

    pub fn build_with(lambda_jet: &Jet, b: &[Complex64], r: usize, lattice: bool, tol: &Tolerances) -> Result<Self> {
        if r > MAX_ORDER {
            return Err(Error::InvalidArgument(format!("expansion order {r} exceeds {MAX_ORDER}")));
        }
        if lambda_jet.order() < r + 2 {
            return Err(Error::InsufficientJetOrder { need: r + 2, have: lambda_jet.order() });
        }
        let sigma2 = -2.0 * lambda_jet.coeff(2).re;
        let g = GaussianParams::new(sigma2).map_err(|_| Error::ZeroVariance { sigma2 })?;
        let psi0 = psi0_jet_with(lambda_jet, g, tol)?;
        let a = build_a(&psi0, b, r)?;
        let rs: Vec<Polynomial> = a.iter().map(|aj| r_from_a(aj, g)).collect();
        let mut p = Vec::with_capacity(r);
        for rj in rs.iter().skip(1) {
            let pj = p_from_r_with(rj, g, tol)?;
            let scale = pj.max_abs_coeff().max(1.0);
            if pj.max_imag() > tol.realness * scale {
                return Err(Error::ImaginaryResidue { residue: pj.max_imag() });
            }
            p.push(pj.real_part());
        }
        let q = (0..=r / 2).map(|m| q_from_a_with(&a, g, m, tol)).collect::<Result<Vec<_>>>()?;
        Ok(Self { order: r, sigma2, lattice, b: b[..=r].to_vec(), a, r: rs, p, q })
    }

    pub fn gaussian(&self) -> GaussianParams {
        GaussianParams::new(self.sigma2).expect("validated at construction")
    }

    /// Same expansion restricted to order `r' ≤ r`.
    pub fn truncated(&self, order: usize) -> ExpansionSet {
        let order = order.min(self.order);
        ExpansionSet {
            order,
            sigma2: self.sigma2,
            lattice: self.lattice,
            b: self.b[..=order].to_vec(),
            a: self.a[..=order].to_vec(),
            r: self.r[..=order].to_vec(),
            p: self.p[..order].to_vec(),
            q: self.q[..=order / 2].to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("expansion set serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// `𝔑(x) + Σ_{j=1}^{r} n^{-j/2} P_j(x) 𝔫(x)`, approximating `P(S_n/√n ≤ x)`.
pub fn edgeworth_cdf(set: &ExpansionSet, n: usize, x: f64) -> f64 {
    let g = set.gaussian();
    let nf = n as f64;
    let correction: f64 = set.p.iter().enumerate().map(|(idx, pj)| pj.eval_real(x).re * nf.powf(-((idx + 1) as f64) / 2.0)).sum();
    g.cdf(x) + correction * g.pdf(x)
}

/// `Σ_{j=0}^{r} n^{-(j+1)/2} (R_j𝔫)(y/√n)`: expansion of the point mass of
/// the centered sum at the (possibly non-integer) position `y`.
pub fn global_density(set: &ExpansionSet, n: usize, y: f64) -> f64 {
    let g = set.gaussian();
    let nf = n as f64;
    let x = y / nf.sqrt();
    let dens = g.pdf(x);
    set.r.iter().enumerate().map(|(j, rj)| rj.eval_real(x).re * dens * nf.powf(-((j + 1) as f64) / 2.0)).sum()
}

/// Expansion of `P(S_n = k)` for a lattice (span 1, zero drift) model.
pub fn lattice_point_mass(set: &ExpansionSet, n: usize, k: i64) -> Result<f64> {
    if !set.lattice {
        return Err(Error::NotLattice);
    }
    Ok(global_density(set, n, k as f64))
}

/// `e^{-σ²s²/2} Σ_j A_j(s) n^{-j/2}`.
pub fn charfn_expansion(set: &ExpansionSet, n: usize, s: f64) -> Complex64 {
    let nf = n as f64;
    let sum: Complex64 = set.a.iter().enumerate().map(|(j, aj)| aj.eval_real(s) * nf.powf(-(j as f64) / 2.0)).sum();
    sum * (-0.5 * set.sigma2 * s * s).exp()
}

/// Global MLCLT expansion `Σ_j n^{-(j+1)/2} ∫ (R_j𝔫)(x/√n) g(x) dλ(x)`, with
/// `λ` Lebesgue measure (non-lattice) or counting measure (lattice).
pub fn mlclt_global(set: &ExpansionSet, g: &TestFunction, n: usize) -> Result<f64> {
    if set.lattice {
        return Ok(g.integer_samples().iter().map(|&(k, v)| v * global_density(set, n, k as f64)).sum());
    }
    if g.is_lattice() {
        return Err(Error::UnsupportedTestFunction("lattice sequence against a non-lattice expansion".into()));
    }
    let (lo, hi) = g.effective_support();
    let scale = g.lebesgue_moment(0).map(f64::abs).unwrap_or(1.0).max(1e-300);
    let f = |x: f64| g.eval(x) * global_density(set, n, x);
    Ok(quad::adaptive(&f, lo, hi, 1e-14 * scale))
}

/// Local MLCLT expansion `n^{-1/2} Σ_{m≤⌊r/2⌋} n^{-m} ∫ g Q_m dλ`.
pub fn mlclt_local(set: &ExpansionSet, g: &TestFunction, n: usize) -> Result<f64> {
    if !set.lattice && g.is_lattice() {
        return Err(Error::UnsupportedTestFunction("lattice sequence against a non-lattice expansion".into()));
    }
    let nf = n as f64;
    let mut total = 0.0;
    for (m, qm) in set.q.iter().enumerate() {
        let mut integral = 0.0;
        for (l, c) in qm.coeffs().iter().enumerate() {
            let moment = if set.lattice { g.counting_moment(l) } else { g.lebesgue_moment(l).expect("continuous test function") };
            integral += c.re * moment;
        }
        total += integral * nf.powi(-(m as i32));
    }
    Ok(total / nf.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cos_jet(order: usize) -> Jet {
        let mut v = vec![0.0; order + 1];
        let mut fact = 1.0;
        for (k, slot) in v.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            if k % 2 == 0 {
                *slot = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 } / fact;
            }
        }
        Jet::from_real(&v)
    }

    /// λ-jet `exp(Σ κ_k (is)^k / k!)` for given cumulants `κ_2..`.
    fn cumulant_jet(kappa: &[f64], order: usize) -> Jet {
        let mut log = vec![ZERO; order + 1];
        let mut fact = 1.0;
        let mut ipow = c(1.0, 0.0);
        for k in 1..=order {
            fact *= k as f64;
            ipow *= I;
            if k >= 2 && k - 2 < kappa.len() {
                log[k] = ipow * kappa[k - 2] / fact;
            }
        }
        Jet::new(log).exp()
    }

    #[test]
    fn psi0_of_cos_is_minus_s4_over_12() {
        let g = GaussianParams::new(1.0).unwrap();
        let psi = psi0_jet(&cos_jet(4), g).unwrap();
        let expected = [0.0, 0.0, 0.0, 0.0, -1.0 / 12.0];
        for (k, e) in expected.iter().enumerate() {
            assert!((psi.coeff(k) - c(*e, 0.0)).norm() < 1e-15, "k={k}");
        }
    }

    #[test]
    fn psi0_of_gaussian_vanishes() {
        let s2 = 1.7;
        let g = GaussianParams::new(s2).unwrap();
        let jet = Jet::from_real(&[0.0, 0.0, -s2 / 2.0, 0.0, 0.0, 0.0, 0.0]).exp();
        let psi = psi0_jet(&jet, g).unwrap();
        assert!(psi.coeffs().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn psi0_third_coefficient_is_skewness_term() {
        let (k2, k3) = (0.21, 0.084);
        let g = GaussianParams::new(k2).unwrap();
        let psi = psi0_jet(&cumulant_jet(&[k2, k3], 5), g).unwrap();
        assert!((psi.coeff(3) - c(0.0, -k3 / 6.0)).norm() < 1e-15);
    }

    #[test]
    fn psi0_rejects_bad_input() {
        let g = GaussianParams::new(1.0).unwrap();
        let shifted = Jet::from_real(&[1.1, 0.0, -0.5]);
        assert!(matches!(psi0_jet(&shifted, g), Err(Error::NonUnitEigenvalueAtZero { .. })));
        let wrong_var = Jet::from_real(&[1.0, 0.0, -0.25]);
        assert!(matches!(psi0_jet(&wrong_var, g), Err(Error::ResidualCumulant { order: 2, .. })));
        let drift = Jet::new(vec![c(1.0, 0.0), c(0.0, 0.3), c(-0.5, 0.0)]);
        assert!(matches!(psi0_jet(&drift, g), Err(Error::ResidualCumulant { order: 1, .. })));
    }

    #[test]
    fn gaussian_input_gives_no_corrections() {
        let psi = Jet::zeros(6);
        let a = build_a(&psi, &[c(1.0, 0.0), ZERO, ZERO, ZERO, ZERO], 4).unwrap();
        assert_eq!(a[0], Polynomial::constant(c(1.0, 0.0)));
        assert!(a[1..].iter().all(|p| p.max_abs_coeff() == 0.0));
    }

    #[test]
    fn a0_is_b0() {
        let psi = Jet::new(vec![ZERO, ZERO, ZERO, c(0.0, -0.2), c(0.05, 0.0), c(0.0, 0.01)]);
        let b = [c(0.8, 0.0), c(0.0, 0.3), c(-0.1, 0.0), c(0.0, 0.02)];
        let a = build_a(&psi, &b, 3).unwrap();
        assert_eq!(a[0], Polynomial::constant(c(0.8, 0.0)));
        assert!(matches!(build_a(&psi, &b, 4), Err(Error::InsufficientJetOrder { .. })));
    }

    #[test]
    fn bernoulli_first_correction() {
        let p = 0.3;
        let k2 = p * (1.0 - p);
        let k3 = p * (1.0 - p) * (1.0 - 2.0 * p);
        let g = GaussianParams::new(k2).unwrap();
        let psi = psi0_jet(&cumulant_jet(&[k2, k3], 3), g).unwrap();
        let a = build_a(&psi, &[c(1.0, 0.0), ZERO], 1).unwrap();
        // A_1(s) = κ₃ (is)³ / 6
        assert_eq!(a[1].degree(), Some(3));
        assert!((a[1].coeff(3) - c(0.0, -k3 / 6.0)).norm() < 1e-15);
        assert!(a[1].coeff(1).norm() < 1e-15);
        let r1 = r_from_a(&a[1], g);
        assert!(gaussian_mean(&r1, g).norm() < 1e-15);
    }

    #[test]
    fn r_of_s_squared() {
        let g = GaussianParams::new(1.0).unwrap();
        let r = r_from_a(&Polynomial::from_real(&[0.0, 0.0, 1.0]), g);
        assert_eq!(r.real_coeffs(), vec![1.0, 0.0, -1.0]);
        assert_eq!(r_from_a(&Polynomial::from_real(&[1.0]), g), Polynomial::from_real(&[1.0]));
    }

    #[test]
    fn p_of_one_minus_x_squared_is_x() {
        // (𝔫·x)' = (1 - x²)𝔫 for σ² = 1
        let g = GaussianParams::new(1.0).unwrap();
        let p = p_from_r(&Polynomial::from_real(&[1.0, 0.0, -1.0]), g).unwrap();
        assert_eq!(p.real_coeffs(), vec![0.0, 1.0]);
        assert!(p_from_r(&Polynomial::zero(), g).unwrap().is_zero());
    }

    #[test]
    fn p_rejects_nonzero_mean() {
        let g = GaussianParams::new(1.0).unwrap();
        assert!(matches!(p_from_r(&Polynomial::from_real(&[1.0, 0.0, 1.0]), g), Err(Error::NotSolvable { .. })));
    }

    #[test]
    fn q0_is_density_at_zero() {
        let g = GaussianParams::new(2.0).unwrap();
        let q = q_from_a(&[Polynomial::from_real(&[1.0])], g, 0).unwrap();
        assert!((q.coeff(0).re - 1.0 / (2.0 * PI * 2.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn q1_gaussian_case_closed_form() {
        let s2 = 1.5;
        let g = GaussianParams::new(s2).unwrap();
        let a = vec![Polynomial::from_real(&[1.0]), Polynomial::zero(), Polynomial::zero()];
        let q = q_from_a(&a, g, 1).unwrap();
        // only l=2, j=0: (1/2π) ∫u²e^{-σ²u²/2}du · (-x²/2)
        let m2 = (2.0 * PI / s2).sqrt() / s2;
        assert!(q.coeff(0).norm() < 1e-16 && q.coeff(1).norm() < 1e-16);
        assert!((q.coeff(2).re + m2 / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn symmetric_order_one_cdf_is_half_at_zero() {
        let set = ExpansionSet::build(&cos_jet(6), &[c(1.0, 0.0), ZERO, ZERO, ZERO, ZERO], 1, true).unwrap();
        assert!(set.p[0].max_abs_coeff() < 1e-12);
        assert_eq!(edgeworth_cdf(&set, 100, 0.0), 0.5);
        assert!((edgeworth_cdf(&set, 100, 50.0) - 1.0).abs() < 1e-9);
        assert!((lattice_point_mass(&set, 16, 0).unwrap() - 1.0 / (2.0 * PI * 16.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn charfn_expansion_at_zero_is_b0() {
        let jet = cumulant_jet(&[0.5, 0.2, 0.1, -0.05], 6);
        let b = [c(0.9, 0.0), c(0.0, 0.1), c(-0.02, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let set = ExpansionSet::build(&jet, &b, 3, false).unwrap();
        assert!((charfn_expansion(&set, 50, 0.0) - c(0.9, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mlclt_global_of_gaussian_density_is_convolution() {
        let s2 = 0.8;
        let jet = Jet::from_real(&[0.0, 0.0, -s2 / 2.0, 0.0, 0.0]).exp();
        let set = ExpansionSet::build(&jet, &[c(1.0, 0.0), ZERO, ZERO], 0, false).unwrap();
        let g = TestFunction::Gaussian { center: 0.0, width: s2.sqrt(), height: 1.0 / (2.0 * PI * s2).sqrt() };
        for &n in &[1usize, 10, 400] {
            let v = mlclt_global(&set, &g, n).unwrap();
            let exact = 1.0 / (2.0 * PI * (n as f64 + 1.0) * s2).sqrt();
            assert!((v - exact).abs() < 1e-13, "n={n}: {v} vs {exact}");
        }
    }

    #[test]
    fn mlclt_local_leading_term() {
        let s2 = 1.3;
        let jet = cumulant_jet(&[s2, 0.4, 0.2, 0.1, 0.05], 6);
        let b = [c(1.0, 0.0), ZERO, ZERO, ZERO, ZERO];
        let set = ExpansionSet::build(&jet, &b, 0, false).unwrap();
        let g = TestFunction::RaisedCosine { center: 0.5, half_width: 2.0, height: 3.0 };
        let v = mlclt_local(&set, &g, 100).unwrap();
        let lead = g.lebesgue_moment(0).unwrap() / (2.0 * PI * s2).sqrt() / 10.0;
        assert!((v - lead).abs() < 1e-14);
        let lattice = ExpansionSet::build(&jet, &b, 2, true).unwrap();
        let ind = TestFunction::indicator(2);
        let full = mlclt_global(&lattice, &ind, 64).unwrap();
        assert!((full - lattice_point_mass(&lattice, 64, 2).unwrap()).abs() < 1e-16);
        assert!(matches!(mlclt_local(&set, &ind, 10), Err(Error::UnsupportedTestFunction(_))));
    }

    #[test]
    fn order_above_six_is_rejected() {
        let jet = cos_jet(9);
        assert!(ExpansionSet::build(&jet, &[c(1.0, 0.0); 8], 7, true).is_err());
    }

    #[test]
    fn json_has_stable_field_order() {
        let set = ExpansionSet::build(&cos_jet(4), &[c(1.0, 0.0), ZERO, ZERO], 2, true).unwrap();
        let json = set.to_json();
        let keys = ["\"order\"", "\"sigma2\"", "\"lattice\"", "\"B\"", "\"A\"", "\"R\"", "\"P\"", "\"Q\""];
        let positions: Vec<usize> = keys.iter().map(|k| json.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ExpansionSet::from_json(&json).unwrap(), set);
    }
}
