//! Error measurements between expansions and reference values, power-law
//! rate fits and the machine-readable report.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, NormalizedModel};
use crate::montecarlo;
use crate::oracle;
use crate::polyexp::{self, ExpansionSet, TestFunction};

pub const REPORT_SCHEMA: &str = "birkhoff.validation-report/1";

/// Least-squares fit of `log error = intercept + slope·log n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub n_list: Vec<usize>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

impl RateFit {
    pub fn fit(n_list: &[usize], errors: &[f64]) -> Result<Self> {
        if n_list.len() != errors.len() {
            return Err(Error::InvalidArgument("n_list and errors differ in length".into()));
        }
        if n_list.len() < 4 {
            return Err(Error::InvalidArgument("a rate fit needs at least 4 points".into()));
        }
        if n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("n_list must be strictly increasing".into()));
        }
        if errors.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::InvalidArgument("errors must be positive and finite".into()));
        }
        let xs: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let slope_stderr = (rss / (k - 2.0) / sxx).sqrt();
        Ok(Self { n_list: n_list.to_vec(), errors: errors.to_vec(), slope, intercept, slope_stderr })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,error\n");
        for (n, e) in self.n_list.iter().zip(&self.errors) {
            out.push_str(&format!("{n},{e:e}\n"));
        }
        out
    }
}

/// 201 points over `[-5σ, 5σ]`.
pub fn default_x_grid(sigma2: f64) -> Vec<f64> {
    let s = sigma2.sqrt();
    (0..201).map(|i| -5.0 * s + 0.05 * s * i as f64).collect()
}

/// `sup_x |F_n(x) - 𝔈_{r,n}(x)|` for a single `n`, with the oracle CDF.
pub fn sup_error_cdf_at(model: &NormalizedModel, set: &ExpansionSet, n: usize, x_grid: &[f64]) -> Result<f64> {
    let gp = oracle::cdf_gil_pelaez(model, n, x_grid)?;
    Ok(x_grid.iter().zip(&gp.cdf).map(|(x, f)| (f - polyexp::edgeworth_cdf(set, n, *x)).abs()).fold(0.0, f64::max))
}

pub fn sup_error_cdf(model: &NormalizedModel, set: &ExpansionSet, n_list: &[usize], x_grid: &[f64]) -> Result<RateFit> {
    let errors = n_list.iter().map(|&n| sup_error_cdf_at(model, set, n, x_grid)).collect::<Result<Vec<_>>>()?;
    RateFit::fit(n_list, &errors)
}

/// `max_k |P(S_n = k) - expansion at k - n·mean|` for a single `n`.
pub fn sup_error_pmf_at(model: &NormalizedModel, set: &ExpansionSet, n: usize) -> Result<f64> {
    if !set.lattice || !model.lattice {
        return Err(Error::NotLattice);
    }
    let dist = oracle::exact_lattice_dist(model, n)?;
    let shift = n as f64 * model.mean;
    Ok(dist.support.iter().zip(&dist.pmf).map(|(&k, p)| (p - polyexp::global_density(set, n, k as f64 - shift)).abs()).fold(0.0, f64::max))
}

pub fn sup_error_pmf(model: &NormalizedModel, set: &ExpansionSet, n_list: &[usize]) -> Result<RateFit> {
    let errors = n_list.iter().map(|&n| sup_error_pmf_at(model, set, n)).collect::<Result<Vec<_>>>()?;
    RateFit::fit(n_list, &errors)
}

/// Reference value for the MLCLT functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    Exact,
    MonteCarlo { trials: usize, seed: u64 },
}

/// Which MLCLT expansion is compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MlcltForm {
    Global,
    Local,
}

/// `|reference - prediction|` at one `n`. With a Monte Carlo reference the
/// standard error is removed in quadrature, floored at 1% of it.
pub fn mlclt_error_at(
    model: &NormalizedModel,
    set: &ExpansionSet,
    g: &TestFunction,
    psi: &[f64],
    xi: &[f64],
    n: usize,
    form: MlcltForm,
    reference: Reference,
) -> Result<f64> {
    let prediction = match form {
        MlcltForm::Global => polyexp::mlclt_global(set, g, n)?,
        MlcltForm::Local => polyexp::mlclt_local(set, g, n)?,
    };
    match reference {
        Reference::Exact => Ok((oracle::exact_mlclt(model, n, g, psi, xi)? - prediction).abs()),
        Reference::MonteCarlo { trials, seed } => {
            let batch = match model.kind {
                ModelKind::Sft | ModelKind::Iid => montecarlo::sample_markov(model, n, trials, seed)?,
                ModelKind::Circle => montecarlo::sample_circle(model, n, trials, seed, 0)?,
                ModelKind::Rmp => return Err(Error::InvalidArgument("use sample_rmp with a start direction".into())),
            };
            let est = montecarlo::mlclt_estimator(&batch, psi, xi, g)?;
            let d = est.value - prediction;
            Ok((d * d - est.stderr * est.stderr).max((0.01 * est.stderr).powi(2)).sqrt())
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn mlclt_error(
    model: &NormalizedModel,
    set: &ExpansionSet,
    g: &TestFunction,
    psi: &[f64],
    xi: &[f64],
    n_list: &[usize],
    form: MlcltForm,
    reference: Reference,
) -> Result<RateFit> {
    let errors = n_list.iter().map(|&n| mlclt_error_at(model, set, g, psi, xi, n, form, reference)).collect::<Result<Vec<_>>>()?;
    RateFit::fit(n_list, &errors)
}

/// Largest residuals of the identities every expansion set must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantResiduals {
    /// `|∫e^{isx}R_j𝔫 dx - A_j(s)e^{-σ²s²/2}|` over 20 points of `[-4, 4]`,
    /// integrals by adaptive quadrature.
    pub fourier: f64,
    /// `|(𝔫P_j)' - 𝔫R_j|` on `x = -5, -4.5, …, 5`.
    pub ode: f64,
    /// `|∫R_j𝔫|` for `j ≥ 1`, from exact Gaussian moments.
    pub mean_zero: f64,
    /// Largest coefficient of `A_j` or `R_j` at a power of the wrong parity.
    pub parity: f64,
    /// Largest imaginary part in `P_j` and `Q_m`.
    pub realness: f64,
}

pub const FOURIER_TOL: f64 = 1e-8;
pub const ODE_TOL: f64 = 1e-10;
pub const MEAN_ZERO_TOL: f64 = 1e-10;
pub const PARITY_TOL: f64 = 1e-10;
pub const REALNESS_TOL: f64 = 1e-9;

impl InvariantResiduals {
    pub fn passed(&self) -> bool {
        self.fourier < FOURIER_TOL
            && self.ode < ODE_TOL
            && self.mean_zero < MEAN_ZERO_TOL
            && self.parity < PARITY_TOL
            && self.realness < REALNESS_TOL
    }
}

pub fn expansion_invariants(set: &ExpansionSet) -> InvariantResiduals {
    let g = set.gaussian();
    let sigma = g.sigma();
    let (lo, hi) = (-14.0 * sigma, 14.0 * sigma);
    let mut fourier: f64 = 0.0;
    for (j, rj) in set.r.iter().enumerate() {
        let scale = 1.0 + rj.max_abs_coeff();
        for k in 0..20 {
            let s = -4.0 + 8.0 * k as f64 / 19.0;
            let f = |x: f64, im: bool| {
                let v = rj.eval_real(x).re * g.pdf(x);
                if im {
                    v * (s * x).sin()
                } else {
                    v * (s * x).cos()
                }
            };
            let re = crate::quad::adaptive(&|x| f(x, false), lo, hi, 1e-13 * scale);
            let im = crate::quad::adaptive(&|x| f(x, true), lo, hi, 1e-13 * scale);
            let target = set.a[j].eval_real(s) * (-0.5 * set.sigma2 * s * s).exp();
            fourier = fourier.max((num_complex::Complex64::new(re, im) - target).norm());
        }
    }
    let mut ode: f64 = 0.0;
    for (idx, pj) in set.p.iter().enumerate() {
        let rj = &set.r[idx + 1];
        for k in 0..=20 {
            let x = -5.0 + 0.5 * k as f64;
            let lhs = (pj.derivative().eval_real(x).re - x / set.sigma2 * pj.eval_real(x).re) * g.pdf(x);
            ode = ode.max((lhs - rj.eval_real(x).re * g.pdf(x)).abs());
        }
    }
    let mean_zero = set
        .r
        .iter()
        .skip(1)
        .map(|rj| rj.coeffs().iter().enumerate().map(|(k, c)| c * g.moment(k)).sum::<num_complex::Complex64>().norm())
        .fold(0.0, f64::max);
    let parity = set.a.iter().chain(&set.r).enumerate().map(|(i, poly)| poly.parity_residual(i % set.a.len() % 2)).fold(0.0, f64::max);
    let realness = set.p.iter().chain(&set.q).map(|p| p.max_imag()).fold(0.0, f64::max);
    InvariantResiduals { fourier, ode, mean_zero, parity, realness }
}

/// One checked claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub required: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<RateFit>,
}

impl ReportEntry {
    pub fn new(id: &str, description: &str, required: &str) -> Self {
        Self {
            id: id.into(),
            description: description.into(),
            passed: true,
            measured: BTreeMap::new(),
            required: required.into(),
            fit: None,
        }
    }

    pub fn measure(mut self, key: &str, value: f64) -> Self {
        self.measured.insert(key.into(), value);
        self
    }

    pub fn with_fit(mut self, fit: RateFit) -> Self {
        self.fit = Some(fit);
        self
    }

    pub fn check(mut self, ok: bool) -> Self {
        self.passed &= ok;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub passed: bool,
    pub entries: Vec<ReportEntry>,
}

/// Aggregate entries; `timestamp` is seconds since the Unix epoch.
pub fn report(entries: Vec<ReportEntry>, timestamp: Option<u64>) -> ValidationReport {
    ValidationReport { schema: REPORT_SCHEMA.into(), timestamp, passed: entries.iter().all(|e| e.passed), entries }
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| !e.passed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let n = [16, 32, 64, 128, 256];
        let e: Vec<f64> = n.iter().map(|&k| 3.0 * (k as f64).powf(-1.5)).collect();
        let f = RateFit::fit(&n, &e).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-12);
        assert!(f.slope_stderr < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(RateFit::fit(&[1, 2, 3], &[1.0, 1.0, 1.0]).is_err());
        assert!(RateFit::fit(&[1, 2, 2, 3], &[1.0; 4]).is_err());
        assert!(RateFit::fit(&[1, 2, 3, 4], &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn empty_report() {
        let r = report(vec![], None);
        assert!(r.passed && r.entries.is_empty());
        assert!(!r.to_json().contains("timestamp"));
    }

    #[test]
    fn failing_entry_is_flagged() {
        let e = ReportEntry::new("slope", "synthetic", "slope <= -0.65").measure("slope", -0.2).check(false);
        let r = report(vec![e], Some(0));
        assert!(!r.passed);
        assert_eq!(r.failures().count(), 1);
    }
}
