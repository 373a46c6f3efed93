use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{centered_bound, pair_power_fast};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::models::NormalizedModel;
use crate::quad::Rule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GilPelaezOptions {
    /// Frequencies beyond this are not integrated; `None` picks
    /// `16π / max|φ̄|`.
    pub s_scan: Option<f64>,
    /// Largest acceptable reported error.
    pub target: f64,
    /// Envelope level below which a scan cell is skipped and bounded.
    pub skip_level: f64,
    /// Block length `m` in `‖L^n‖ ≤ ‖L^m‖^{⌊n/m⌋}·max_{r<m}‖L^r‖`.
    pub block: usize,
}

impl Default for GilPelaezOptions {
    fn default() -> Self {
        Self { s_scan: None, target: 1e-7, skip_level: 1e-12, block: 16 }
    }
}

/// `P(S̄_n/√n ≤ x)` on a grid, with the two parts of its error budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GilPelaez {
    pub n: usize,
    pub x: Vec<f64>,
    pub cdf: Vec<f64>,
    /// Largest GL16-vs-GL10 discrepancy over the grid.
    pub quadrature_error: f64,
    /// Bound on the skipped part of `[0, s_scan]`.
    pub tail_bound: f64,
    pub error: f64,
    pub s_scan: f64,
    /// Total length of the integrated frequency set.
    pub integrated_length: f64,
}

/// `1/2 - (1/π) ∫ Im[e^{-isy} χ(s)]/s ds` over a union of intervals of
/// `[0, ∞)`, for each position `y`. Panels have width `≤ 4/ω` where `ω`
/// bounds the oscillation rate of the integrand. `rel` is the relative
/// accuracy of the supplied `χ` values. Returns the values and an error
/// estimate: the GL16-vs-GL10 discrepancy plus propagated rounding.
pub fn gil_pelaez_inversion(
    chi: &(dyn Fn(f64) -> Complex64 + Sync),
    intervals: &[(f64, f64)],
    omega: f64,
    ys: &[f64],
    rel: f64,
) -> (Vec<f64>, f64) {
    let hi_rule = Rule::new(16);
    let lo_rule = Rule::new(10);
    let width = 4.0 / omega.max(1e-12);
    let mut panels = Vec::new();
    for &(a, b) in intervals {
        let count = ((b - a) / width).ceil().max(1.0) as usize;
        let h = (b - a) / count as f64;
        panels.extend((0..count).map(|k| (a + k as f64 * h, a + (k + 1) as f64 * h)));
    }
    let eps = rel.max(f64::EPSILON);
    let sums: Vec<(Vec<f64>, Vec<f64>, f64)> = panels
        .par_iter()
        .map(|&(a, b)| {
            let nodes: Vec<(f64, f64, Complex64)> = hi_rule.mapped(a, b).map(|(s, w)| (s, w, chi(s))).collect();
            let eval = |nodes: &[(f64, f64, Complex64)]| {
                ys.iter()
                    .map(|&y| nodes.iter().map(|&(s, w, c)| w * (Complex64::new(0.0, -s * y).exp() * c).im / s).sum())
                    .collect::<Vec<f64>>()
            };
            let lo_nodes: Vec<(f64, f64, Complex64)> = lo_rule.mapped(a, b).map(|(s, w)| (s, w, chi(s))).collect();
            let rounding = nodes.iter().map(|&(s, w, c)| w * eps * c.norm() / s).sum::<f64>();
            (eval(&nodes), eval(&lo_nodes), rounding)
        })
        .collect();
    let mut hi = vec![0.0; ys.len()];
    let mut lo = vec![0.0; ys.len()];
    let mut rounding = 0.0;
    for (h, l, r) in &sums {
        rounding += r;
        for i in 0..ys.len() {
            hi[i] += h[i];
            lo[i] += l[i];
        }
    }
    let values = hi.iter().map(|v| 0.5 - v / PI).collect();
    let err = hi.iter().zip(&lo).map(|(h, l)| (h - l).abs() / PI).fold(0.0, f64::max) + rounding / PI;
    (values, err)
}

fn row_norm(m: &CMatrix) -> f64 {
    (0..m.nrows()).map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Upper bound on `max_{s ∈ cell} |χ_n(s)|` from the block norms at the
/// cell center and a Lipschitz allowance for the half-width.
fn envelope(model: &NormalizedModel, n: usize, block: usize, s: f64, half: f64, deriv: f64, scale: f64) -> f64 {
    let t = model.twisted(Complex64::new(s, 0.0));
    let mut p = t.clone();
    let mut k: f64 = 1.0;
    for _ in 1..block {
        k = k.max(row_norm(&p));
        p = &p * &t;
    }
    let a = row_norm(&p) + block as f64 * deriv * k.powi(block as i32 - 1) * half;
    let q = (n / block) as i32;
    (scale * k * a.min(k.powi(block as i32)).powi(q)).min(scale * k.powi(n as i32))
}

/// Gil–Pelaez CDF of `S̄_n/√n` under the stationary law, with default
/// options.
pub fn cdf_gil_pelaez(model: &NormalizedModel, n: usize, x_grid: &[f64]) -> Result<GilPelaez> {
    cdf_gil_pelaez_with(model, n, x_grid, &GilPelaezOptions::default())
}

/// The frequency axis `[0, s_scan]` is cut into cells on which a bound for
/// `|χ_n|` is computed; cells whose bound is below `skip_level` are not
/// integrated and their contribution `(1/π)∫ bound/s` is reported as the
/// tail bound. Structure of the law on scales finer than `1/s_scan` (its
/// atoms) is not resolved.
pub fn cdf_gil_pelaez_with(model: &NormalizedModel, n: usize, x_grid: &[f64], opts: &GilPelaezOptions) -> Result<GilPelaez> {
    if model.lattice {
        return Err(Error::NotLattice);
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let ones = vec![1.0; model.dim()];
    let (u, v): (CVector, CVector) = model.functionals(&ones, &ones)?;
    let scale = u.iter().map(|z| z.norm()).sum::<f64>() * v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let bound = centered_bound(model).max(1e-12);
    let s_scan = opts.s_scan.unwrap_or(16.0 * PI / bound);
    let block = opts.block.clamp(1, n);
    let deriv = model
        .branches
        .iter()
        .fold(nalgebra::DMatrix::<f64>::zeros(model.dim(), model.dim()), |acc, b| {
            acc + b.weight.zip_map(&b.phase, |w, p| (w * (p - model.mean)).abs())
        })
        .row_iter()
        .map(|r| r.sum())
        .fold(0.0, f64::max);
    let h = (0.04 / (block as f64 * deriv.max(1e-12))).min(s_scan / 64.0);
    let cells = (s_scan / h).ceil() as usize;
    let h = s_scan / cells as f64;
    let env: Vec<f64> =
        (0..cells).into_par_iter().map(|c| envelope(model, n, block, (c as f64 + 0.5) * h, 0.5 * h, deriv, scale)).collect();

    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut tail_bound = 0.0;
    for (c, &e) in env.iter().enumerate() {
        let (a, b) = (c as f64 * h, (c + 1) as f64 * h);
        if c > 0 && e < opts.skip_level {
            tail_bound += e * (b / a).ln() / PI;
            continue;
        }
        match intervals.last_mut() {
            Some(last) if (last.1 - a).abs() < 1e-12 * h => last.1 = b,
            _ => intervals.push((a, b)),
        }
    }
    let nf = n as f64;
    let ys: Vec<f64> = x_grid.iter().map(|x| x * nf.sqrt()).collect();
    let omega = nf * bound + ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let t_of = |s: f64| model.twisted(Complex64::new(s, 0.0));
    let chi = |s: f64| pair_power_fast(&t_of(s), n, &u, &v);
    let rel = (n as f64 + 16.0 * model.dim() as f64) * f64::EPSILON;
    let (cdf, quadrature_error) = gil_pelaez_inversion(&chi, &intervals, omega, &ys, rel);
    let error = quadrature_error + tail_bound;
    if error > opts.target {
        return Err(Error::TailBoundExceeded { bound: error });
    }
    Ok(GilPelaez {
        n,
        x: x_grid.to_vec(),
        cdf,
        quadrature_error,
        tail_bound,
        error,
        s_scan,
        integrated_length: intervals.iter().map(|(a, b)| b - a).sum(),
    })
}
