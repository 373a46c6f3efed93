//! Bundled models used by the examples, the command line and the test suites.

use super::{build, CircleMapSpec, IidSpec, MarkovSftSpec, ModelSpec, NormalizedModel, RmpSpec};

fn built(spec: ModelSpec) -> NormalizedModel {
    build(&spec).expect("bundled model builds")
}

/// Fair ±1 coin flips.
pub fn bernoulli_fair_spec() -> ModelSpec {
    ModelSpec::Iid(IidSpec { probabilities: vec![0.5, 0.5], values: vec![-1.0, 1.0], lattice: true })
}

pub fn bernoulli_fair() -> NormalizedModel {
    built(bernoulli_fair_spec())
}

/// Bernoulli(p) on {0, 1}.
pub fn bernoulli_spec(p: f64) -> ModelSpec {
    ModelSpec::Iid(IidSpec { probabilities: vec![1.0 - p, p], values: vec![0.0, 1.0], lattice: true })
}

pub fn bernoulli(p: f64) -> NormalizedModel {
    built(bernoulli_spec(p))
}

/// Aperiodic two-state chain `P = [[1/2, 1/2], [1/3, 2/3]]` with the
/// skewed observable `φ(0,0)=1, φ(0,1)=0, φ(1,0)=1, φ(1,1)=-1`. Its mean
/// is exactly zero.
pub fn chain2_lattice_spec() -> ModelSpec {
    let p = vec![vec![0.5, 0.5], vec![1.0 / 3.0, 2.0 / 3.0]];
    ModelSpec::Sft(MarkovSftSpec::from_transition_matrix(&p, vec![vec![1.0, 0.0], vec![1.0, -1.0]], true))
}

pub fn chain2_lattice() -> NormalizedModel {
    built(chain2_lattice_spec())
}

/// Three-state chain with a pair observable taking nine rationally
/// independent values, so the sums are non-arithmetic and their atoms are
/// tiny: `φ(y,x) = frac(√p_{3y+x}) - 1/2 + 1.2·[x = 0]` over the first nine
/// primes.
pub fn chain3_nonlattice_spec() -> ModelSpec {
    let p = vec![vec![0.6, 0.3, 0.1], vec![0.2, 0.5, 0.3], vec![0.3, 0.3, 0.4]];
    let primes = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0];
    let obs = (0..3).map(|y| (0..3).map(|x| primes[3 * y + x].sqrt().fract() - 0.5 + if x == 0 { 1.2 } else { 0.0 }).collect()).collect();
    ModelSpec::Sft(MarkovSftSpec::from_transition_matrix(&p, obs, false))
}

pub fn chain3_nonlattice() -> NormalizedModel {
    built(chain3_nonlattice_spec())
}

/// Two-state chain with `φ ≡ 1`: arithmetic, `|λ(is)| = 1` for every `s`.
pub fn constant_observable_spec() -> ModelSpec {
    let p = vec![vec![0.5, 0.5], vec![1.0 / 3.0, 2.0 / 3.0]];
    ModelSpec::Sft(MarkovSftSpec::from_transition_matrix(&p, vec![vec![1.0; 2]; 2], true))
}

/// Three-state chain with the coboundary `φ(y,x) = u(x) - u(y)`.
pub fn coboundary_spec() -> ModelSpec {
    let p = vec![vec![0.2, 0.5, 0.3], vec![0.4, 0.4, 0.2], vec![0.1, 0.6, 0.3]];
    let u = [0.0, 1.5, -0.7];
    let obs = (0..3).map(|y| (0..3).map(|x| u[x] - u[y]).collect()).collect();
    ModelSpec::Sft(MarkovSftSpec::from_transition_matrix(&p, obs, false))
}

/// Doubling map with `φ(x) = cos 2πx`.
pub fn doubling_cos_spec() -> ModelSpec {
    ModelSpec::Circle(CircleMapSpec { degree: 2, cos: vec![1.0], sin: vec![], grid: 64, fourier: 24 })
}

pub fn doubling_cos() -> NormalizedModel {
    built(doubling_cos_spec())
}

/// `{diag(2, 1/2), [[1,1],[0,1]]}` with equal weights.
pub fn rmp_shear_diag_spec() -> ModelSpec {
    ModelSpec::Rmp(RmpSpec { matrices: vec![[[2.0, 0.0], [0.0, 0.5]], [[1.0, 1.0], [0.0, 1.0]]], probabilities: vec![0.5, 0.5], grid: 64 })
}

pub fn rmp_shear_diag() -> NormalizedModel {
    built(rmp_shear_diag_spec())
}

/// Names accepted by [`by_name`].
pub const NAMES: &[&str] = &[
    "bernoulli_fair",
    "bernoulli_0.3",
    "chain2_lattice",
    "chain3_nonlattice",
    "constant_observable",
    "coboundary",
    "doubling_cos",
    "rmp_shear_diag",
];

pub fn by_name(name: &str) -> Option<ModelSpec> {
    Some(match name {
        "bernoulli_fair" => bernoulli_fair_spec(),
        "bernoulli_0.3" => bernoulli_spec(0.3),
        "chain2_lattice" => chain2_lattice_spec(),
        "chain3_nonlattice" => chain3_nonlattice_spec(),
        "constant_observable" => constant_observable_spec(),
        "coboundary" => coboundary_spec(),
        "doubling_cos" => doubling_cos_spec(),
        "rmp_shear_diag" => rmp_shear_diag_spec(),
        _ => return None,
    })
}
