use serde::{Deserialize, Serialize};

/// Finite-memory subshift with a pair potential `g(y,x)` and a pair
/// observable `φ(y,x)`, both indexed by a transition `y → x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovSftSpec {
    pub incidence: Vec<Vec<u8>>,
    pub potential: Vec<Vec<f64>>,
    pub observable: Vec<Vec<f64>>,
    #[serde(default)]
    pub lattice: bool,
}

impl MarkovSftSpec {
    pub fn states(&self) -> usize {
        self.incidence.len()
    }

    /// Stationary Markov chain with forward transition matrix `p`, encoded as
    /// the potential `g(y,x) = log p(y,x)`.
    pub fn from_transition_matrix(p: &[Vec<f64>], observable: Vec<Vec<f64>>, lattice: bool) -> Self {
        let incidence = p.iter().map(|row| row.iter().map(|&v| u8::from(v > 0.0)).collect()).collect();
        let potential = p.iter().map(|row| row.iter().map(|&v| if v > 0.0 { v.ln() } else { 0.0 }).collect()).collect();
        Self { incidence, potential, observable, lattice }
    }
}

/// Independent draws of `values[i]` with probability `probabilities[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IidSpec {
    pub probabilities: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default)]
    pub lattice: bool,
}

impl IidSpec {
    /// Full shift with `g(y,x) = log p_y` and `φ(y,x) = f(y)`.
    pub fn to_sft(&self) -> MarkovSftSpec {
        let k = self.probabilities.len();
        MarkovSftSpec {
            incidence: vec![vec![1; k]; k],
            potential: (0..k).map(|y| vec![self.probabilities[y].ln(); k]).collect(),
            observable: (0..k).map(|y| vec![self.values[y]; k]).collect(),
            lattice: self.lattice,
        }
    }
}

/// `x ↦ d·x mod 1` with observable
/// `φ(x) = Σ_k cos[k-1]·cos(2πkx) + sin[k-1]·sin(2πkx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleMapSpec {
    pub degree: usize,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
    /// Number of uniform grid nodes `N`.
    pub grid: usize,
    /// Fourier truncation `K < N/2`.
    pub fourier: usize,
}

impl CircleMapSpec {
    pub fn observable(&self, x: f64) -> f64 {
        let tau = std::f64::consts::TAU;
        let c: f64 = self.cos.iter().enumerate().map(|(k, a)| a * (tau * (k + 1) as f64 * x).cos()).sum();
        let s: f64 = self.sin.iter().enumerate().map(|(k, b)| b * (tau * (k + 1) as f64 * x).sin()).sum();
        c + s
    }

    pub fn observable_bound(&self) -> f64 {
        self.cos.iter().chain(&self.sin).map(|a| a.abs()).sum()
    }

    pub fn harmonics(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }
}

/// I.i.d. products of 2×2 matrices acting on the projective line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmpSpec {
    pub matrices: Vec<[[f64; 2]; 2]>,
    pub probabilities: Vec<f64>,
    /// Number of nodes `M` on `[0, π)`.
    pub grid: usize,
}

impl RmpSpec {
    /// Cocycle `log‖g u(θ)‖` and the image angle of `θ` in `[0, π)`.
    pub fn act(g: &[[f64; 2]; 2], theta: f64) -> (f64, f64) {
        let (c, s) = (theta.cos(), theta.sin());
        let x = g[0][0] * c + g[0][1] * s;
        let y = g[1][0] * c + g[1][1] * s;
        let norm = x.hypot(y);
        (norm.ln(), y.atan2(x).rem_euclid(std::f64::consts::PI) % std::f64::consts::PI)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Sft(MarkovSftSpec),
    Circle(CircleMapSpec),
    Rmp(RmpSpec),
    Iid(IidSpec),
}
