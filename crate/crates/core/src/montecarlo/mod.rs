//! Seeded samplers of Birkhoff sums and empirical estimators.
//!
//! Every trial draws from its own ChaCha8 stream: the 256-bit key is the
//! SplitMix64 expansion of the master seed and the stream id is the trial
//! index, so results do not depend on scheduling or thread count.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelSpec, NormalizedModel, RmpSpec};
use crate::polyexp::TestFunction;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(GOLDEN_GAMMA);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 key derived from the master seed.
pub fn derive_key(master_seed: u64) -> [u8; 32] {
    let mut state = master_seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Generator for one trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(derive_key(master_seed));
    rng.set_stream(trial);
    rng
}

/// SHA-256 of the canonical JSON of a model specification.
pub fn model_hash(spec: &ModelSpec) -> String {
    let json = serde_json::to_string(spec).expect("serializable");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub n: usize,
    pub trials: usize,
    /// Uncentered sums `S_n`.
    pub sums: Vec<f64>,
    /// Node index of the initial point of each trial.
    pub start_state: Vec<u32>,
    /// Node index of the point reached after `n` steps.
    pub end_state: Vec<u32>,
    pub master_seed: u64,
    pub model_hash: String,
    /// Per-step mean subtracted by [`SampleBatch::centered`].
    pub mean: f64,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    n: usize,
    trials: usize,
    seed: u64,
    model_hash: &'a str,
}

impl SampleBatch {
    fn assemble(n: usize, seed: u64, hash: String, mean: f64, rows: Vec<(f64, u32, u32)>) -> Self {
        let trials = rows.len();
        let mut sums = Vec::with_capacity(trials);
        let mut start_state = Vec::with_capacity(trials);
        let mut end_state = Vec::with_capacity(trials);
        for (s, a, b) in rows {
            sums.push(s);
            start_state.push(a);
            end_state.push(b);
        }
        Self { n, trials, sums, start_state, end_state, master_seed: seed, model_hash: hash, mean }
    }

    /// `S_n - n·mean`.
    pub fn centered(&self) -> Vec<f64> {
        let shift = self.n as f64 * self.mean;
        self.sums.iter().map(|s| s - shift).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.trials * 32);
        out.push_str("trial,S_n,start,end\n");
        for i in 0..self.trials {
            out.push_str(&format!("{},{:e},{},{}\n", i, self.sums[i], self.start_state[i], self.end_state[i]));
        }
        out
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string(&Sidecar { n: self.n, trials: self.trials, seed: self.master_seed, model_hash: &self.model_hash })
            .expect("serializable")
    }

    /// Fraction of centered, `√n`-scaled sums `≤ x` for each `x`.
    pub fn empirical_cdf(&self, xs: &[f64]) -> Vec<f64> {
        let scale = (self.n as f64).sqrt();
        let mut z: Vec<f64> = self.centered().iter().map(|s| s / scale).collect();
        z.sort_by(f64::total_cmp);
        xs.iter().map(|&x| z.partition_point(|v| *v <= x) as f64 / self.trials as f64).collect()
    }

    /// Empirical law of integer sums.
    pub fn empirical_pmf(&self) -> std::collections::BTreeMap<i64, f64> {
        let mut out = std::collections::BTreeMap::new();
        for s in &self.sums {
            *out.entry(s.round() as i64).or_insert(0.0) += 1.0 / self.trials as f64;
        }
        out
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn pick(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|c| *c <= u).min(cdf.len() - 1)
}

fn cumulative(weights: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = weights
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = f64::INFINITY;
    }
    out
}

/// Stationary chain sampled backwards: `z_n ~ π`, then `z_k` given `z_{k+1}`
/// from row `z_{k+1}` of the normalized weights, adding `φ(z_k, z_{k+1})`.
pub fn sample_markov(model: &NormalizedModel, n: usize, trials: usize, seed: u64) -> Result<SampleBatch> {
    if !matches!(model.kind, ModelKind::Sft | ModelKind::Iid) || model.branches.len() != 1 {
        return Err(Error::InvalidArgument("sample_markov needs a finite-state model".into()));
    }
    let k = model.dim();
    let w = &model.branches[0].weight;
    let phase = &model.branches[0].phase;
    let rows: Vec<Vec<f64>> = (0..k).map(|x| cumulative((0..k).map(|y| w[(x, y)]))).collect();
    let pi = cumulative(model.pi.iter().copied());
    let out = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let end = pick(&pi, uniform(&mut rng));
            let mut z = end;
            let mut s = 0.0;
            for _ in 0..n {
                let y = pick(&rows[z], uniform(&mut rng));
                s += phase[(z, y)];
                z = y;
            }
            (s, z as u32, end as u32)
        })
        .collect();
    Ok(SampleBatch::assemble(n, seed, model_hash(&model.spec), model.mean, out))
}

/// Doubling-type circle map sampled by a backward orbit: `x_{n+b}` uniform,
/// `x_k = (x_{k+1} + j)/d` with `j` uniform, summing `φ(x_k)` for
/// `k = b..b+n-1` where `b = burn_in`. The law is that of a forward orbit
/// from a Lebesgue-distributed point, without the loss of binary digits a
/// forward iteration of `x ↦ dx mod 1` suffers.
pub fn sample_circle(model: &NormalizedModel, n: usize, trials: usize, seed: u64, burn_in: usize) -> Result<SampleBatch> {
    let spec = match &model.spec {
        ModelSpec::Circle(c) => c.clone(),
        _ => return Err(Error::InvalidArgument("sample_circle needs a circle-map model".into())),
    };
    let d = spec.degree as u64;
    let grid = model.dim();
    let tag = |x: f64| ((x * grid as f64).round() as usize % grid) as u32;
    let out = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mut x = uniform(&mut rng);
            let end = tag(x);
            let mut s = 0.0;
            for step in (0..n + burn_in).rev() {
                x = (x + rng.gen_range(0..d) as f64) / d as f64;
                if step >= burn_in {
                    s += spec.observable(x);
                }
            }
            // x is now x_0; the counted block starts at x_b
            (s, tag(x), end)
        })
        .collect();
    Ok(SampleBatch::assemble(n, seed, model_hash(&model.spec), model.mean, out))
}

/// Steps between exact power-of-two renormalizations of the vector.
const RENORM_EVERY: usize = 16;

/// Products `g_n ⋯ g_1` applied to `(cos x0, sin x0)`, with `burn_in`
/// uncounted steps first. Sums are `log‖g_{b+n} ⋯ g_{b+1} v_b‖` with `v_b`
/// the unit vector reached after burn-in, uncentered. Tags are the nearest
/// grid nodes of the start and end directions.
pub fn sample_rmp(spec: &RmpSpec, x0_angle: f64, n: usize, trials: usize, seed: u64, burn_in: usize) -> Result<SampleBatch> {
    let k = spec.matrices.len();
    if k == 0 || spec.probabilities.len() != k {
        return Err(Error::InvalidSpec("matrices and probabilities must have equal, nonzero length".into()));
    }
    let total: f64 = spec.probabilities.iter().sum();
    let bits = if k.is_power_of_two() && spec.probabilities.iter().all(|p| (p / total - 1.0 / k as f64).abs() < 1e-15) {
        Some(k.trailing_zeros())
    } else {
        None
    };
    let thresholds = cumulative(spec.probabilities.iter().map(|p| p / total));
    let mats = spec.matrices.clone();
    let grid = spec.grid.max(1);
    let tag = |x: f64, y: f64| {
        let a = y.atan2(x).rem_euclid(PI);
        ((a / PI * grid as f64).round() as usize % grid) as u32
    };
    let out = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let mut pool = 0u64;
            let mut left = 0u32;
            let mut next = |rng: &mut ChaCha8Rng| -> usize {
                match bits {
                    Some(0) => 0,
                    Some(b) => {
                        if left < b {
                            pool = rng.next_u64();
                            left = 64;
                        }
                        let i = (pool & ((1 << b) - 1)) as usize;
                        pool >>= b;
                        left -= b;
                        i
                    }
                    None => pick(&thresholds, uniform(rng)),
                }
            };
            let (mut x, mut y) = (x0_angle.cos(), x0_angle.sin());
            for _ in 0..burn_in {
                let g = &mats[next(&mut rng)];
                let nx = g[0][0] * x + g[0][1] * y;
                y = g[1][0] * x + g[1][1] * y;
                x = nx;
                let r = x.hypot(y);
                x /= r;
                y /= r;
            }
            let start = tag(x, y);
            let mut exponent: i64 = 0;
            for step in 0..n {
                let g = &mats[next(&mut rng)];
                let nx = g[0][0] * x + g[0][1] * y;
                y = g[1][0] * x + g[1][1] * y;
                x = nx;
                if step % RENORM_EVERY == RENORM_EVERY - 1 {
                    let e = libm::ilogb(x.abs().max(y.abs())) as i64;
                    x = libm::scalbn(x, -e as i32);
                    y = libm::scalbn(y, -e as i32);
                    exponent += e;
                }
            }
            (exponent as f64 * LN_2 + x.hypot(y).ln(), start, tag(x, y))
        })
        .collect();
    let mean = crate::models::build(&ModelSpec::Rmp(spec.clone())).ok().map(|m| m.mean).unwrap_or(0.0);
    Ok(SampleBatch::assemble(n, seed, model_hash(&ModelSpec::Rmp(spec.clone())), mean, out))
}

/// Estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Mean of `values` with the jackknife standard error, which for the mean
/// reduces to `s/√N`.
pub fn jackknife_mean(values: &[f64]) -> Estimate {
    let n = values.len();
    if n == 0 {
        return Estimate { value: f64::NAN, stderr: f64::NAN };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Estimate { value: mean, stderr: 0.0 };
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Estimate { value: mean, stderr: (ss / ((n - 1) * n) as f64).sqrt() }
}

/// Trial average of `ψ(start)·g(S̄_n)·ξ(end)`.
pub fn mlclt_estimator(batch: &SampleBatch, psi: &[f64], xi: &[f64], g: &TestFunction) -> Result<Estimate> {
    let lookup = |v: &[f64], i: u32| -> Result<f64> {
        v.get(i as usize).copied().ok_or_else(|| Error::InvalidArgument(format!("tag {i} outside the weight vector")))
    };
    let centered = if g.is_lattice() {
        let shift = batch.n as f64 * batch.mean;
        if (shift - shift.round()).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("lattice test function needs an integer n·mean, got {shift}")));
        }
        batch.sums.iter().map(|s| s - shift.round()).collect()
    } else {
        batch.centered()
    };
    let mut vals = Vec::with_capacity(batch.trials);
    for i in 0..batch.trials {
        vals.push(lookup(psi, batch.start_state[i])? * g.eval(centered[i]) * lookup(xi, batch.end_state[i])?);
    }
    Ok(jackknife_mean(&vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::catalog;

    #[test]
    fn streams_are_distinct_and_repeatable() {
        let a = trial_rng(7, 0).next_u64();
        assert_eq!(a, trial_rng(7, 0).next_u64());
        assert_ne!(a, trial_rng(7, 1).next_u64());
        assert_ne!(a, trial_rng(8, 0).next_u64());
    }

    #[test]
    fn zero_observable_gives_zero_sums() {
        let m = crate::models::build(&ModelSpec::Iid(crate::models::IidSpec {
            probabilities: vec![0.4, 0.6],
            values: vec![0.0, 0.0],
            lattice: true,
        }))
        .unwrap();
        assert!(sample_markov(&m, 50, 100, 1).unwrap().sums.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn diagonal_product_is_exact() {
        let spec = RmpSpec { matrices: vec![[[2.0, 0.0], [0.0, 0.5]]], probabilities: vec![1.0], grid: 16 };
        let b = sample_rmp(&spec, 0.0, 100, 4, 3, 0).unwrap();
        assert!(b.sums.iter().all(|s| (s - 100.0 * LN_2).abs() < 1e-12));
    }

    #[test]
    fn constant_estimator() {
        let b = sample_markov(&catalog::chain2_lattice(), 10, 50, 2).unwrap();
        let g = TestFunction::Gaussian { center: 0.0, width: 1e9, height: 1.0 };
        let e = mlclt_estimator(&b, &[1.0, 1.0], &[1.0, 1.0], &g).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12 && e.stderr < 1e-12);
    }
}
