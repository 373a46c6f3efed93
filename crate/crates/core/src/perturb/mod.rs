//! Spectral engine: leading eigen-triples, the jet of `λ(is)` by two
//! independent methods, eigenprojection jets and the constants `B_N`,
//! variance, Lyapunov exponent and spectral scans.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, LuSolver, ONE};
use crate::models::{ModelKind, NormalizedModel};
use crate::polyexp::Jet;

/// Below this relative gap between the two largest moduli the dominant
/// eigenvalue is reported as not simple.
pub const SIMPLE_TOL: f64 = 1e-9;
/// Gap required along `[0, δ]` by [`select_delta`].
pub const DELTA_GAP: f64 = 1e-3;
/// Default relative tolerance of [`cross_check`].
pub const JET_AGREEMENT: f64 = 1e-6;
/// Absolute floor added to the relative agreement test, for coefficients
/// that vanish exactly.
pub const JET_FLOOR: f64 = 1e-11;
/// Nodes on each contour of [`lambda_jet_fd`].
pub const CONTOUR_NODES: usize = 64;
pub const ZERO_VARIANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EigenTriple {
    pub value: Complex64,
    pub right: CVector,
    /// Normalized so that `leftᵀ right = 1`.
    pub left: CVector,
}

/// Dominant eigenvalue with right and left eigenvectors. The right vector is
/// scaled to unit mean, so the untwisted operator gives `right = 1` and
/// `left = π`.
pub fn leading_triple(t: &CMatrix) -> Result<EigenTriple> {
    let n = t.nrows();
    if n == 1 {
        return Ok(EigenTriple { value: t[(0, 0)], right: CVector::from_element(1, ONE), left: CVector::from_element(1, ONE) });
    }
    let ev = linalg::eigenvalues(t);
    if ev[0].norm() - ev[1].norm() < SIMPLE_TOL * ev[0].norm().max(1e-300) {
        return Err(Error::NonSimpleDominant { first: ev[0].norm(), second: ev[1].norm() });
    }
    let (value, right) = linalg::inverse_iteration(t, ev[0])?;
    let (_, left) = linalg::inverse_iteration(&t.transpose(), ev[0])?;
    let mean: Complex64 = right.iter().sum::<Complex64>() / n as f64;
    let scale = if mean.norm() > 1e-8 * right.norm() {
        mean
    } else {
        right.iter().copied().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap()).unwrap()
    };
    let right = right.map(|z| z / scale);
    let pairing = linalg::dot(&left, &right);
    let left = left.map(|z| z / pairing);
    let residual = (t * &right - &right * value).norm();
    if residual > 1e-10 * linalg::norm1(t).max(1.0) * right.norm() {
        return Err(Error::NoConvergence { residual });
    }
    Ok(EigenTriple { value, right, left })
}

/// Rayleigh–Schrödinger jets of the leading eigenvalue and of the right and
/// left eigenvectors of `s ↦ L_{is}` at `s = 0`, normalized by
/// `πᵀ r_k = 0` and `1ᵀ l_k = 0` for `k ≥ 1`.
#[derive(Debug, Clone)]
pub struct PerturbationJets {
    pub lambda: Jet,
    pub right: Vec<CVector>,
    pub left: Vec<CVector>,
}

pub fn rs_jets(model: &NormalizedModel, order: usize) -> Result<PerturbationJets> {
    let n = model.dim();
    let l = model.operator_jet(order);
    let pi = linalg::real_to_complex(&model.pi);
    let one = CVector::from_element(n, ONE);

    let bordered = |m: &CMatrix, col: &CVector, row: &CVector| -> Result<LuSolver> {
        let mut b = CMatrix::zeros(n + 1, n + 1);
        b.view_mut((0, 0), (n, n)).copy_from(&(m - CMatrix::identity(n, n)));
        for i in 0..n {
            b[(i, n)] = col[i];
            b[(n, i)] = row[i];
        }
        LuSolver::new(&b)
    };
    let right_solver = bordered(&l[0], &one, &pi)?;
    let l0t = l[0].transpose();
    let left_solver = bordered(&l0t, &pi, &one)?;
    let solve = |solver: &LuSolver, rhs: &CVector| -> Result<CVector> {
        let mut ext = CVector::zeros(n + 1);
        ext.rows_mut(0, n).copy_from(rhs);
        let x = solver.solve(&ext)?;
        Ok(x.rows(0, n).into_owned())
    };

    let mut lam = vec![ONE];
    let mut right = vec![one.clone()];
    let mut left = vec![pi.clone()];
    for k in 1..=order {
        let lk: Complex64 = (1..=k).map(|j| linalg::dot(&pi, &(&l[j] * &right[k - j]))).sum();
        lam.push(lk);
        let mut rhs_r = CVector::zeros(n);
        let mut rhs_l = CVector::zeros(n);
        for j in 1..=k {
            rhs_r += &right[k - j] * lam[j] - &l[j] * &right[k - j];
            rhs_l += &left[k - j] * lam[j] - l[j].transpose() * &left[k - j];
        }
        right.push(solve(&right_solver, &rhs_r)?);
        left.push(solve(&left_solver, &rhs_l)?);
    }
    Ok(PerturbationJets { lambda: Jet::new(lam), right, left })
}

/// Jet of `λ(is)` of order `order` by Rayleigh–Schrödinger recursion.
pub fn lambda_jet_rs(model: &NormalizedModel, order: usize) -> Result<Jet> {
    Ok(rs_jets(model, order)?.lambda)
}

/// Largest dyadic `δ ≤ 1/2` such that the dominant eigenvalue of `L_{is}`
/// stays simple with relative gap at least [`DELTA_GAP`] on `[0, δ]`.
pub fn select_delta(model: &NormalizedModel) -> Result<f64> {
    if model.dim() == 1 {
        return Ok(0.5);
    }
    let mut delta = 0.5;
    for _ in 0..12 {
        let ok = (0..=32).all(|i| {
            let s = delta * i as f64 / 32.0;
            let ev = linalg::eigenvalues(&model.twisted(Complex64::new(s, 0.0)));
            ev[1].norm() <= (1.0 - DELTA_GAP) * ev[0].norm()
        });
        if ok {
            return Ok(delta);
        }
        delta *= 0.5;
    }
    let ev = linalg::eigenvalues(&model.untwisted().map(|x| Complex64::new(x, 0.0)));
    Err(Error::NonSimpleDominant { first: ev[0].norm(), second: ev[1].norm() })
}

fn closest(ev: &[Complex64], target: Complex64) -> Complex64 {
    *ev.iter().min_by(|a, b| (*a - target).norm().partial_cmp(&(*b - target).norm()).unwrap()).unwrap()
}

/// Taylor coefficients of the leading eigenvalue from its values on the
/// circle `|s| = radius` in the complex plane, reached by continuation from
/// `λ(0) = 1`: `c_m = (1/K) Σ_k λ(s_k) s_k^{-m}`.
fn contour_coefficients(model: &NormalizedModel, order: usize, radius: f64) -> Result<Vec<Complex64>> {
    let eig = |s: Complex64| -> Vec<Complex64> {
        let t = model.twisted(s);
        if t.nrows() == 1 {
            vec![t[(0, 0)]]
        } else {
            linalg::eigenvalues(&t)
        }
    };
    let mut prev = ONE;
    let mut prev2 = ONE;
    let mut step = |s: Complex64, first: bool| -> Complex64 {
        let guess = if first { prev } else { prev * 2.0 - prev2 };
        let v = closest(&eig(s), guess);
        prev2 = prev;
        prev = v;
        v
    };
    let radial = 16;
    let mut start = ONE;
    for i in 1..=radial {
        start = step(Complex64::new(radius * i as f64 / radial as f64, 0.0), i == 1);
    }
    let k = CONTOUR_NODES;
    let mut values = Vec::with_capacity(k);
    values.push(start);
    for j in 1..=k {
        let s = Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / k as f64);
        let v = step(s, false);
        if j < k {
            values.push(v);
        } else if (v - start).norm() > 1e-9 {
            return Err(Error::NoConvergence { residual: (v - start).norm() });
        }
    }
    Ok((0..=order)
        .map(|m| {
            let sum: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::from_polar(radius.powi(-(m as i32)), -std::f64::consts::TAU * (j * m) as f64 / k as f64))
                .sum();
            sum / k as f64
        })
        .collect())
}

/// Jet of `λ(is)` from eigenvalues alone: a trapezoidal Cauchy integral on a
/// circle of radius `δ/2` (see [`select_delta`]), together with the
/// difference to the same rule on radius `δ/4` as an error estimate.
pub fn lambda_jet_fd_with_error(model: &NormalizedModel, order: usize) -> Result<(Jet, Vec<f64>)> {
    let delta = select_delta(model)?;
    let a = contour_coefficients(model, order, 0.5 * delta)?;
    let b = contour_coefficients(model, order, 0.25 * delta)?;
    let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).collect();
    let mut coeffs = a;
    coeffs[0] = ONE;
    Ok((Jet::new(coeffs), err))
}

pub fn lambda_jet_fd(model: &NormalizedModel, order: usize) -> Result<Jet> {
    Ok(lambda_jet_fd_with_error(model, order)?.0)
}

/// Worst coefficient disagreement `|a-b| / (max(|a|,|b|) + floor/tol)`,
/// scaled so that values at most 1 pass at relative tolerance `tol`.
pub fn jet_agreement(fd: &Jet, rs: &Jet, tol: f64) -> (usize, f64) {
    let order = fd.order().min(rs.order());
    (0..=order)
        .map(|k| {
            let (a, b) = (fd.coeff(k), rs.coeff(k));
            (k, (a - b).norm() / (tol * a.norm().max(b.norm()) + JET_FLOOR))
        })
        .fold((0, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc })
}

/// Compare the two jets coefficientwise at relative tolerance `tol`.
pub fn cross_check(fd: &Jet, rs: &Jet, tol: f64) -> Result<f64> {
    let (index, ratio) = jet_agreement(fd, rs, tol);
    if ratio > 1.0 {
        return Err(Error::JetDisagreement { index, fd: format!("{}", fd.coeff(index)), rs: format!("{}", rs.coeff(index)) });
    }
    Ok(ratio)
}

fn check_variance(sigma2: f64) -> Result<f64> {
    if !(sigma2 >= ZERO_VARIANCE) {
        return Err(Error::ZeroVariance { sigma2 });
    }
    Ok(sigma2)
}

/// `σ² = -2 Re c_2` from the Rayleigh–Schrödinger jet.
pub fn sigma2(model: &NormalizedModel) -> Result<f64> {
    let jet = lambda_jet_rs(model, 2)?;
    check_variance(-2.0 * jet.coeff(2).re)
}

/// Modulus ratio of the second to the first eigenvalue of the untwisted
/// operator.
pub fn spectral_gap(model: &NormalizedModel) -> f64 {
    if model.dim() == 1 {
        return 0.0;
    }
    let ev = linalg::eigenvalues(&model.untwisted().map(|x| Complex64::new(x, 0.0)));
    ev[1].norm() / ev[0].norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenKubo {
    /// `E(φ̄²) + 2 Σ_{k≥1} E(φ̄ · φ̄∘fᵏ)`.
    pub standard: f64,
    /// `Σ_{k≥0} E(φ̄ ℒᵏ φ̄)`, each correlation counted once.
    pub one_sided: f64,
    pub terms: usize,
}

/// Correlation series of the centered observable, summed until the
/// geometric tail estimate drops below `tol`.
pub fn green_kubo(model: &NormalizedModel, tol: f64) -> Result<GreenKubo> {
    let n = model.dim();
    let l0 = model.untwisted();
    let m1 = model.derivative_matrix(1);
    let m2 = model.derivative_matrix(2);
    let pi = nalgebra::DVector::from_column_slice(&model.pi);
    let ones = nalgebra::DVector::from_element(n, 1.0);
    let e0 = pi.dot(&(&m2 * &ones));
    let pm1 = m1.transpose() * &pi;
    let gap = spectral_gap(model);
    let max_terms = if gap <= 0.0 { 1 } else { (10.0 * (1.0 / tol).ln() / (1.0 / gap).ln()).ceil() as usize + 10 };
    let mut y = &m1 * &ones;
    let mut sum = 0.0;
    let mut terms = 0;
    loop {
        terms += 1;
        let c = pm1.dot(&y);
        sum += c;
        let tail = if gap <= 0.0 { 0.0 } else { c.abs() * gap / (1.0 - gap) };
        if (terms >= 2 || gap <= 0.0) && tail < tol && c.abs() < tol {
            break;
        }
        if terms >= max_terms {
            return Err(Error::SlowDecay { terms });
        }
        y = &l0 * &y;
    }
    Ok(GreenKubo { standard: e0 + 2.0 * sum, one_sided: e0 + sum, terms })
}

/// `B_0..B_r` with `H(s) = Σ_N B_N s^N / N!`, `H(s) = (uᵀr(s))(l(s)ᵀv) /
/// (l(s)ᵀr(s))` the eigenprojection term of `E(ψ e^{isS_n} ξ∘fⁿ)`.
pub fn b_constants(model: &NormalizedModel, psi: &[f64], xi: &[f64], r: usize) -> Result<Vec<Complex64>> {
    let (u, v) = model.functionals(psi, xi)?;
    b_constants_for(model, &u, &v, r)
}

pub fn b_constants_for(model: &NormalizedModel, u: &CVector, v: &CVector, r: usize) -> Result<Vec<Complex64>> {
    let jets = rs_jets(model, r).map_err(|e| Error::ProjectionJetFailure(e.to_string()))?;
    let ur = Jet::new(jets.right.iter().map(|rk| linalg::dot(u, rk)).collect());
    let lv = Jet::new(jets.left.iter().map(|lk| linalg::dot(lk, v)).collect());
    let lr = Jet::new((0..=r).map(|k| (0..=k).map(|j| linalg::dot(&jets.left[j], &jets.right[k - j])).sum()).collect());
    let h = ur.mul(&lv).div(&lr).map_err(|e| Error::ProjectionJetFailure(e.to_string()))?;
    let mut fact = 1.0;
    Ok(h.coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if k > 0 {
                fact *= k as f64;
            }
            c * fact
        })
        .collect())
}

/// Top Lyapunov exponent `∫ log‖g u‖ dμ(g) dν(u)` of a random matrix
/// product, `-i λ'(0)` of the uncentered twisted operator.
pub fn lyapunov(model: &NormalizedModel) -> Result<f64> {
    if model.kind != ModelKind::Rmp {
        return Err(Error::InvalidArgument("Lyapunov exponent needs a random matrix product model".into()));
    }
    if model.dim() > 1 {
        let ratio = spectral_gap(model);
        if ratio > 1.0 - crate::models::PROJECTIVE_GAP_MIN {
            return Err(Error::NoSpectralGap { ratio });
        }
    }
    let m1 = model.derivative_matrix_raw(1);
    Ok((0..model.dim()).map(|i| model.pi[i] * m1.row(i).sum()).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusPoint {
    pub s: f64,
    pub radius: f64,
    /// Dominant eigenvalue not simple at this `s`.
    pub flagged: bool,
}

/// Spectral radius of `L_{is}` along a grid, evaluated in parallel.
pub fn radius_scan(model: &NormalizedModel, s_grid: &[f64]) -> Vec<RadiusPoint> {
    s_grid
        .par_iter()
        .map(|&s| {
            let t = model.twisted(Complex64::new(s, 0.0));
            if t.nrows() == 1 {
                return RadiusPoint { s, radius: t[(0, 0)].norm(), flagged: false };
            }
            let ev = linalg::eigenvalues(&t);
            RadiusPoint { s, radius: ev[0].norm(), flagged: ev[0].norm() - ev[1].norm() < SIMPLE_TOL }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub n: usize,
    /// `log ‖L_{is}ⁿ 1‖_∞`.
    pub log_norm: f64,
    pub norm: f64,
}

/// `‖L_{is}ⁿ 1‖_∞` for `n = 1..n_max`, renormalizing at every step.
pub fn decay_scan(model: &NormalizedModel, s: f64, n_max: usize) -> Vec<DecayPoint> {
    let t = model.twisted(Complex64::new(s, 0.0));
    let mut v = CVector::from_element(model.dim(), ONE);
    let mut log_acc = 0.0;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        v = &t * &v;
        let nrm = linalg::norm_inf(&v);
        if nrm == 0.0 {
            log_acc = f64::NEG_INFINITY;
            out.push(DecayPoint { n, log_norm: log_acc, norm: 0.0 });
            continue;
        }
        log_acc += nrm.ln();
        v /= Complex64::new(nrm, 0.0);
        out.push(DecayPoint { n, log_norm: log_acc, norm: log_acc.exp() });
    }
    out
}

/// Spectral summary consumed by the expansion engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub lambda_jet: Jet,
    #[serde(rename = "B")]
    pub b: Vec<Complex64>,
    pub sigma2: f64,
    pub gap: f64,
    pub delta: f64,
}

/// λ-jet of order `r+2`, `B_0..B_{r+2}` for the functionals `(u, v)`,
/// variance, spectral gap and small-`s` radius.
pub fn spectral_data(model: &NormalizedModel, r: usize, u: &CVector, v: &CVector) -> Result<SpectralData> {
    let lambda_jet = lambda_jet_rs(model, r + 2)?;
    let sigma2 = check_variance(-2.0 * lambda_jet.coeff(2).re)?;
    let b = b_constants_for(model, u, v, r + 2)?;
    let gap = spectral_gap(model);
    if gap >= 1.0 - crate::models::PROJECTIVE_GAP_MIN {
        return Err(Error::NoSpectralGap { ratio: gap });
    }
    let delta = select_delta(model)?;
    Ok(SpectralData { lambda_jet, b, sigma2, gap, delta })
}
