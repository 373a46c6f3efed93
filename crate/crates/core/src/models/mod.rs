//! Concrete dynamical systems and their twisted transfer operators as finite
//! matrices.
//!
//! Every model is stored as a list of branches `(W_b, Φ_b)` of real matrices
//! so that the twisted operator is `L_{is} = Σ_b W_b ∘ e^{is(Φ_b - mean)}`
//! (entrywise). The untwisted operator `Σ_b W_b` fixes the constant vector
//! and `π` is its normalized left Perron vector.

pub mod catalog;
mod recode;
mod spec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

pub use recode::{two_sided_recode, Recoding};
pub use spec::{CircleMapSpec, IidSpec, MarkovSftSpec, ModelSpec, RmpSpec};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Perron gap below which a finite Ruelle matrix is rejected.
pub const PERRON_GAP_MIN: f64 = 1e-8;
/// Relative spectral gap required of the projective operator.
pub const PROJECTIVE_GAP_MIN: f64 = 1e-6;
/// Largest refinement change tolerated by the circle-map guard.
pub const GRID_TOLERANCE: f64 = 1e-8;
/// Jet order compared by the circle-map guard.
const GRID_GUARD_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Sft,
    Circle,
    Rmp,
    Iid,
}

/// How `E(ψ e^{isS_n} ξ∘fⁿ)` is read off the matrix power.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Duality {
    /// `Σ_x π_x ξ_x (L_{is}ⁿ ψ)_x`: the operator is the transfer operator.
    Transfer,
    /// `Σ_x ψ_x (L_{is}ⁿ ξ)_x`: the operator is a Markov operator and `ψ`
    /// holds the weights of the initial distribution.
    Markov,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub weight: DMatrix<f64>,
    /// Uncentered observable on each transition.
    pub phase: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub struct NormalizedModel {
    pub kind: ModelKind,
    pub spec: ModelSpec,
    /// State labels (SFT) or grid coordinates (circle, projective line).
    pub nodes: Vec<f64>,
    pub branches: Vec<Branch>,
    pub pi: Vec<f64>,
    /// Per-step mean of the observable; the twist uses `φ - mean`.
    pub mean: f64,
    pub lattice: bool,
}

impl NormalizedModel {
    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn duality(&self) -> Duality {
        match self.kind {
            ModelKind::Rmp => Duality::Markov,
            _ => Duality::Transfer,
        }
    }

    pub fn untwisted(&self) -> DMatrix<f64> {
        let n = self.dim();
        self.branches.iter().fold(DMatrix::zeros(n, n), |acc, b| acc + &b.weight)
    }

    fn twist_with(&self, s: Complex64, shift: f64) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        let i = Complex64::new(0.0, 1.0);
        for b in &self.branches {
            for (idx, (w, p)) in b.weight.iter().zip(b.phase.iter()).enumerate() {
                if *w != 0.0 {
                    out[idx] += *w * (i * s * (p - shift)).exp();
                }
            }
        }
        out
    }

    /// `L_{is}` for the centered observable; `s` may be complex.
    pub fn twisted(&self, s: Complex64) -> CMatrix {
        self.twist_with(s, self.mean)
    }

    /// `L(e^{isφ} ·)` with the uncentered observable.
    pub fn twisted_raw(&self, s: Complex64) -> CMatrix {
        self.twist_with(s, 0.0)
    }

    /// `M_j = Σ_b W_b ∘ (Φ_b - shift)^j`.
    fn moment_with(&self, j: usize, shift: f64) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for b in &self.branches {
            for (idx, (w, p)) in b.weight.iter().zip(b.phase.iter()).enumerate() {
                if *w != 0.0 {
                    out[idx] += w * (p - shift).powi(j as i32);
                }
            }
        }
        out
    }

    /// `M_j = L(φ̄^j ·)` for the centered observable.
    pub fn derivative_matrix(&self, j: usize) -> DMatrix<f64> {
        self.moment_with(j, self.mean)
    }

    pub fn derivative_matrix_raw(&self, j: usize) -> DMatrix<f64> {
        self.moment_with(j, 0.0)
    }

    /// Taylor coefficients `L_k = i^k M_k / k!` of `s ↦ L_{is}`.
    pub fn operator_jet(&self, order: usize) -> Vec<CMatrix> {
        let mut out = Vec::with_capacity(order + 1);
        let mut coef = Complex64::new(1.0, 0.0);
        for k in 0..=order {
            if k > 0 {
                coef *= Complex64::new(0.0, 1.0) / k as f64;
            }
            out.push(self.derivative_matrix(k).map(|x| coef * x));
        }
        out
    }

    /// Largest `|φ|` over allowed transitions (uncentered).
    pub fn max_abs_phase(&self) -> f64 {
        self.branches
            .iter()
            .flat_map(|b| b.weight.iter().zip(b.phase.iter()).filter(|(w, _)| **w != 0.0).map(|(_, p)| p.abs()))
            .fold(0.0, f64::max)
    }

    /// `(u, v)` with `E(ψ e^{isS_n} ξ∘fⁿ) = uᵀ L_{is}ⁿ v`.
    pub fn functionals(&self, psi: &[f64], xi: &[f64]) -> Result<(CVector, CVector)> {
        let n = self.dim();
        if psi.len() != n || xi.len() != n {
            return Err(Error::InvalidArgument(format!("weight vectors must have length {n}")));
        }
        Ok(match self.duality() {
            Duality::Transfer => {
                let u: Vec<f64> = self.pi.iter().zip(xi).map(|(p, x)| p * x).collect();
                (linalg::real_to_complex(&u), linalg::real_to_complex(psi))
            }
            Duality::Markov => (linalg::real_to_complex(psi), linalg::real_to_complex(xi)),
        })
    }

    /// Functionals for `ψ = ξ = 1`, or for the point mass at `x0` on a
    /// projective grid when the model is a random matrix product.
    pub fn default_functionals(&self) -> (CVector, CVector) {
        let ones = vec![1.0; self.dim()];
        self.functionals(&ones, &ones).expect("lengths match")
    }

    /// `max_x |(L1)(x) - 1|` and `max_y |(πᵀL)_y - π_y|`.
    pub fn normalization_residuals(&self) -> (f64, f64) {
        let l = self.untwisted();
        let n = self.dim();
        let row = (0..n).map(|i| (l.row(i).sum() - 1.0).abs()).fold(0.0, f64::max);
        let col = (0..n).map(|j| ((0..n).map(|i| self.pi[i] * l[(i, j)]).sum::<f64>() - self.pi[j]).abs()).fold(0.0, f64::max);
        (row, col)
    }

    /// `|Σ π_x (M_1 1)_x|` for the centered observable.
    pub fn centering_residual(&self) -> f64 {
        let m1 = self.derivative_matrix(1);
        (0..self.dim()).map(|i| self.pi[i] * m1.row(i).sum()).sum::<f64>().abs()
    }

    /// Interpolation weights reproducing point evaluation at `x` on the grid
    /// of a circle map or a projective operator.
    pub fn point_weights(&self, x: f64) -> Result<Vec<f64>> {
        match &self.spec {
            ModelSpec::Circle(c) => Ok((0..self.dim()).map(|j| cardinal(1.0, c.grid, c.fourier, false, x - self.nodes[j])).collect()),
            ModelSpec::Rmp(r) if self.dim() > 1 => {
                let (k, nyq) = full_band(r.grid);
                Ok((0..self.dim()).map(|j| cardinal(std::f64::consts::PI, r.grid, k, nyq, x - self.nodes[j])).collect())
            }
            ModelSpec::Rmp(_) => Ok(vec![1.0]),
            _ => Err(Error::InvalidArgument("point weights exist only for grid models".into())),
        }
    }
}

/// `L_{is}` of a model at a real frequency.
pub fn twisted_matrix(model: &NormalizedModel, s: f64) -> CMatrix {
    model.twisted(Complex64::new(s, 0.0))
}

pub fn build(spec: &ModelSpec) -> Result<NormalizedModel> {
    match spec {
        ModelSpec::Sft(s) => build_markov_sft(s),
        ModelSpec::Iid(s) => build_iid(s),
        ModelSpec::Circle(s) => build_circle_map(s),
        ModelSpec::Rmp(s) => build_rmp(s),
    }
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let k = a.len();
    (0..k).map(|i| (0..k).map(|j| (0..k).any(|l| a[i][l] && b[l][j])).collect()).collect()
}

fn all_true(a: &[Vec<bool>]) -> bool {
    a.iter().all(|r| r.iter().all(|&x| x))
}

/// `Ok(())` when the 0/1 matrix is irreducible and aperiodic.
pub fn check_primitive(incidence: &[Vec<u8>]) -> Result<()> {
    let k = incidence.len();
    let a: Vec<Vec<bool>> = incidence.iter().map(|r| r.iter().map(|&x| x != 0).collect()).collect();
    // (I + A)^{k-1} > 0 iff irreducible
    let mut reach: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| i == j || a[i][j]).collect()).collect();
    let step = reach.clone();
    for _ in 1..k.max(1) {
        reach = bool_mul(&reach, &step);
    }
    if !all_true(&reach) {
        return Err(Error::Reducible);
    }
    // Wielandt: a primitive matrix has A^{(k-1)^2+1} > 0
    let mut p = a.clone();
    for _ in 1..((k - 1) * (k - 1) + 1) {
        if all_true(&p) {
            return Ok(());
        }
        p = bool_mul(&p, &a);
    }
    if all_true(&p) {
        Ok(())
    } else {
        Err(Error::Periodic)
    }
}

fn validate_table(name: &str, t: &[Vec<f64>], k: usize) -> Result<()> {
    if t.len() != k || t.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidSpec(format!("{name} must be {k}x{k}")));
    }
    Ok(())
}

pub fn build_markov_sft(spec: &MarkovSftSpec) -> Result<NormalizedModel> {
    let k = spec.states();
    if k == 0 {
        return Err(Error::InvalidSpec("empty alphabet".into()));
    }
    if spec.incidence.iter().any(|r| r.len() != k || r.iter().any(|&v| v > 1)) {
        return Err(Error::InvalidSpec(format!("incidence must be a {k}x{k} 0/1 matrix")));
    }
    validate_table("potential", &spec.potential, k)?;
    validate_table("observable", &spec.observable, k)?;
    for y in 0..k {
        for x in 0..k {
            if spec.incidence[y][x] == 1 {
                if !spec.potential[y][x].is_finite() || !spec.observable[y][x].is_finite() {
                    return Err(Error::InvalidSpec(format!("non-finite entry on allowed transition ({y},{x})")));
                }
                if spec.lattice && spec.observable[y][x].fract() != 0.0 {
                    return Err(Error::InvalidSpec(format!("lattice observable takes the value {} on ({y},{x})", spec.observable[y][x])));
                }
            }
        }
    }
    check_primitive(&spec.incidence)?;

    // Ruelle matrix (L₀h)(x) = Σ_{y→x} e^{g(y,x)} h(y), stored row x, column y.
    let raw = DMatrix::from_fn(k, k, |x, y| if spec.incidence[y][x] == 1 { spec.potential[y][x].exp() } else { 0.0 });
    let craw = raw.map(|v| Complex64::new(v, 0.0));
    let ev = linalg::eigenvalues(&craw);
    let rho = ev[0].re;
    if k > 1 {
        let gap = 1.0 - ev[1].norm() / ev[0].norm();
        if gap < PERRON_GAP_MIN {
            return Err(Error::DegeneratePerron { gap });
        }
    }
    let h = perron_vector(&craw, rho)?;
    let mut weight = DMatrix::from_fn(k, k, |x, y| raw[(x, y)] * h[y] / (rho * h[x]));
    for x in 0..k {
        let total: f64 = weight.row(x).sum();
        weight.row_mut(x).unscale_mut(total);
    }
    let pi = perron_vector(&craw.transpose(), rho).map(|l| {
        // left vector of the normalized matrix is l∘h
        let v: Vec<f64> = l.iter().zip(&h).map(|(a, b)| a * b).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect::<Vec<f64>>()
    })?;
    let phase = DMatrix::from_fn(k, k, |x, y| if spec.incidence[y][x] == 1 { spec.observable[y][x] } else { 0.0 });
    let mut model = NormalizedModel {
        kind: ModelKind::Sft,
        spec: ModelSpec::Sft(spec.clone()),
        nodes: (0..k).map(|i| i as f64).collect(),
        branches: vec![Branch { weight, phase }],
        pi,
        mean: 0.0,
        lattice: spec.lattice,
    };
    model.mean = raw_mean(&model);
    Ok(model)
}

pub fn build_iid(spec: &IidSpec) -> Result<NormalizedModel> {
    if spec.probabilities.len() != spec.values.len() || spec.values.is_empty() {
        return Err(Error::InvalidSpec("probabilities and values must have equal, nonzero length".into()));
    }
    check_probabilities(&spec.probabilities)?;
    let mut model = build_markov_sft(&spec.to_sft())?;
    model.kind = ModelKind::Iid;
    model.spec = ModelSpec::Iid(spec.clone());
    Ok(model)
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    if p.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidSpec("probabilities must be positive".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidSpec(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// Positive Perron vector of a nonnegative matrix, scaled to unit sum.
fn perron_vector(m: &CMatrix, rho: f64) -> Result<Vec<f64>> {
    if m.nrows() == 1 {
        return Ok(vec![1.0]);
    }
    let (_, v) = linalg::inverse_iteration(m, Complex64::new(rho, 0.0))?;
    let s: Complex64 = v.iter().sum();
    let out: Vec<f64> = v.iter().map(|z| (z / s).re).collect();
    if out.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::DegeneratePerron { gap: 0.0 });
    }
    Ok(out)
}

fn raw_mean(model: &NormalizedModel) -> f64 {
    let m1 = model.derivative_matrix_raw(1);
    (0..model.dim()).map(|i| model.pi[i] * m1.row(i).sum()).sum()
}

/// Trigonometric cardinal function of node 0 on `n` equispaced nodes of a
/// circle of length `period`, band-limited to `|k| ≤ kmax` (plus the
/// symmetric Nyquist term when requested).
fn cardinal(period: f64, n: usize, kmax: usize, nyquist: bool, dx: f64) -> f64 {
    let t = std::f64::consts::TAU * dx / period;
    let mut acc = 1.0;
    for k in 1..=kmax {
        acc += 2.0 * (k as f64 * t).cos();
    }
    if nyquist {
        acc += (n as f64 / 2.0 * t).cos();
    }
    acc / n as f64
}

/// Band giving exact interpolation at the nodes.
fn full_band(n: usize) -> (usize, bool) {
    if n % 2 == 0 {
        (n / 2 - 1, true)
    } else {
        ((n - 1) / 2, false)
    }
}

fn build_circle_unchecked(spec: &CircleMapSpec) -> Result<NormalizedModel> {
    let (d, n, kmax) = (spec.degree, spec.grid, spec.fourier);
    if d < 2 {
        return Err(Error::InvalidSpec("degree must be at least 2".into()));
    }
    if n == 0 || n % d != 0 {
        return Err(Error::InvalidSpec(format!("grid size {n} must be a positive multiple of the degree {d}")));
    }
    if 2 * kmax >= n {
        return Err(Error::InvalidSpec(format!("Fourier truncation {kmax} must be below grid/2")));
    }
    if spec.harmonics() * 2 >= d * n {
        return Err(Error::InvalidSpec("observable has too many harmonics for the grid".into()));
    }
    let nodes: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
    let mut branches = Vec::with_capacity(d);
    for b in 0..d {
        let pre: Vec<f64> = nodes.iter().map(|x| (x + b as f64) / d as f64).collect();
        let weight = DMatrix::from_fn(n, n, |i, j| cardinal(1.0, n, kmax, false, pre[i] - nodes[j]) / d as f64);
        let phase = DMatrix::from_fn(n, n, |i, _| spec.observable(pre[i]));
        branches.push(Branch { weight, phase });
    }
    let mut model = NormalizedModel {
        kind: ModelKind::Circle,
        spec: ModelSpec::Circle(spec.clone()),
        nodes,
        branches,
        pi: vec![1.0 / n as f64; n],
        mean: 0.0,
        lattice: false,
    };
    model.mean = raw_mean(&model);
    Ok(model)
}

/// Uniformly expanding circle map on a uniform grid. The build re-runs the
/// eigenvalue jet on the grid `(2N, 2K)` and fails if any coefficient moves
/// by more than [`GRID_TOLERANCE`].
pub fn build_circle_map(spec: &CircleMapSpec) -> Result<NormalizedModel> {
    let model = build_circle_unchecked(spec)?;
    let fine = build_circle_unchecked(&CircleMapSpec { grid: 2 * spec.grid, fourier: 2 * spec.fourier, ..spec.clone() })?;
    let a = crate::perturb::lambda_jet_rs(&model, GRID_GUARD_ORDER)?;
    let b = crate::perturb::lambda_jet_rs(&fine, GRID_GUARD_ORDER)?;
    let change = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    if change > GRID_TOLERANCE {
        return Err(Error::GridTooCoarse { change });
    }
    Ok(model)
}

fn is_scalar(g: &[[f64; 2]; 2]) -> bool {
    g[0][1] == 0.0 && g[1][0] == 0.0 && g[0][0] == g[1][1]
}

/// Random matrix product on the projective line `[0, π)`. An ensemble of
/// scalar matrices acts trivially and is reduced to a single node.
pub fn build_rmp(spec: &RmpSpec) -> Result<NormalizedModel> {
    if spec.matrices.len() != spec.probabilities.len() || spec.matrices.is_empty() {
        return Err(Error::InvalidSpec("matrices and probabilities must have equal, nonzero length".into()));
    }
    check_probabilities(&spec.probabilities)?;
    for g in &spec.matrices {
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::InvalidSpec("matrices must be invertible".into()));
        }
    }
    let (nodes, branches) = if spec.matrices.iter().all(is_scalar) {
        let branches = spec
            .matrices
            .iter()
            .zip(&spec.probabilities)
            .map(|(g, p)| Branch { weight: DMatrix::from_element(1, 1, *p), phase: DMatrix::from_element(1, 1, g[0][0].abs().ln()) })
            .collect();
        (vec![0.0], branches)
    } else {
        let m = spec.grid;
        if m < 3 {
            return Err(Error::InvalidSpec("projective grid needs at least 3 nodes".into()));
        }
        let (kmax, nyq) = full_band(m);
        let nodes: Vec<f64> = (0..m).map(|j| std::f64::consts::PI * j as f64 / m as f64).collect();
        let branches = spec
            .matrices
            .iter()
            .zip(&spec.probabilities)
            .map(|(g, p)| {
                let acts: Vec<(f64, f64)> = nodes.iter().map(|&t| RmpSpec::act(g, t)).collect();
                let weight = DMatrix::from_fn(m, m, |j, k| p * cardinal(std::f64::consts::PI, m, kmax, nyq, acts[j].1 - nodes[k]));
                let phase = DMatrix::from_fn(m, m, |j, _| acts[j].0);
                Branch { weight, phase }
            })
            .collect();
        (nodes, branches)
    };
    let n = nodes.len();
    let mut model = NormalizedModel {
        kind: ModelKind::Rmp,
        spec: ModelSpec::Rmp(spec.clone()),
        nodes,
        branches,
        pi: vec![1.0],
        mean: 0.0,
        lattice: false,
    };
    if n > 1 {
        let l0 = model.untwisted().map(|v| Complex64::new(v, 0.0));
        let ev = linalg::eigenvalues(&l0);
        let ratio = ev[1].norm() / ev[0].norm();
        if ratio > 1.0 - PROJECTIVE_GAP_MIN || (ev[0] - 1.0).norm() > 1e-9 {
            return Err(Error::NoSpectralGap { ratio });
        }
        let (_, left) = linalg::inverse_iteration(&l0.transpose(), Complex64::new(1.0, 0.0))?;
        let s: Complex64 = left.iter().sum();
        model.pi = left.iter().map(|z| (z / s).re).collect();
    }
    model.mean = raw_mean(&model);
    Ok(model)
}
