use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use birkhoff::models::{build, ModelKind, ModelSpec, NormalizedModel};
use birkhoff::montecarlo::{self, SampleBatch};
use birkhoff::oracle;
use birkhoff::perturb;
use birkhoff::polyexp::{self, ExpansionSet, Jet, TestFunction};
use birkhoff::validate::{self, MlcltForm, RateFit, Reference, ReportEntry};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{Format, RunConfig, MAX_ORDER};
use crate::{CliError, ScanKind, Suite};

/// Relative tolerance of the jet cross-check.
pub const JET_TOL: f64 = 1e-7;
/// Allowed deviation of fitted error slopes from their nominal value.
pub const SLOPE_TOL: f64 = 0.35;

fn prepare(cfg: &RunConfig) -> Result<NormalizedModel, CliError> {
    Ok(build(&cfg.model.spec()?)?)
}

/// `(ψ, ξ)` from the config; a random matrix product defaults `ψ` to the
/// point mass at its start direction.
pub fn weights(cfg: &RunConfig, model: &NormalizedModel) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let d = model.dim();
    let psi = match &cfg.expansion.psi {
        Some(p) => p.clone(),
        None if model.kind == ModelKind::Rmp => model.point_weights(cfg.model.x0())?,
        None => vec![1.0; d],
    };
    let xi = cfg.expansion.xi.clone().unwrap_or_else(|| vec![1.0; d]);
    if psi.len() != d || xi.len() != d {
        return Err(CliError::new("CONFIG_INVALID", format!("expansion.psi and expansion.xi must have length {d}")));
    }
    Ok((psi, xi))
}

/// Expansion set of order `r` for the configured weights.
pub fn expansion_set(model: &NormalizedModel, psi: &[f64], xi: &[f64], r: usize) -> Result<ExpansionSet, CliError> {
    let (u, v) = model.functionals(psi, xi)?;
    let sd = perturb::spectral_data(model, r, &u, &v)?;
    Ok(ExpansionSet::build(&sd.lambda_jet, &sd.b, r, model.lattice)?)
}

fn write_artifact(cfg: &RunConfig, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    let path = cfg.output.dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn kind_name(kind: ModelKind) -> &'static str {
    match kind {
        ModelKind::Sft => "sft",
        ModelKind::Iid => "iid",
        ModelKind::Circle => "circle",
        ModelKind::Rmp => "rmp",
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Values the observable takes on allowed transitions.
fn observable_values(spec: &ModelSpec) -> Vec<f64> {
    match spec {
        ModelSpec::Iid(s) => s.values.clone(),
        ModelSpec::Sft(s) => s
            .observable
            .iter()
            .zip(&s.incidence)
            .flat_map(|(obs, inc)| obs.iter().zip(inc).filter(|(_, a)| **a != 0).map(|(v, _)| *v))
            .collect(),
        ModelSpec::Circle(_) | ModelSpec::Rmp(_) => Vec::new(),
    }
}

/// `(a, d)` with every value in `a + dℤ` and `d` largest; `d = 0` for a
/// constant observable.
pub fn lattice_span(spec: &ModelSpec) -> Option<(i64, i64)> {
    let lattice = match spec {
        ModelSpec::Iid(s) => s.lattice,
        ModelSpec::Sft(s) => s.lattice,
        _ => false,
    };
    let values = observable_values(spec);
    if !lattice || values.iter().any(|v| v.fract() != 0.0) {
        return None;
    }
    let first = *values.first()? as i64;
    Some((first, values.iter().fold(0, |g, v| gcd(g, *v as i64 - first))))
}

/// Replace `φ` by `(φ - a)/d` when the span `d` exceeds one. Returns the
/// shift and span used.
pub fn rescale_lattice(spec: ModelSpec) -> (ModelSpec, Option<(i64, i64)>) {
    let Some((a, d)) = lattice_span(&spec).filter(|&(_, d)| d > 1) else {
        return (spec, None);
    };
    let map = |v: f64| (v - a as f64) / d as f64;
    let spec = match spec {
        ModelSpec::Iid(mut s) => {
            s.values.iter_mut().for_each(|v| *v = map(*v));
            ModelSpec::Iid(s)
        }
        ModelSpec::Sft(mut s) => {
            s.observable.iter_mut().flatten().for_each(|v| *v = map(*v));
            ModelSpec::Sft(s)
        }
        other => other,
    };
    (spec, Some((a, d)))
}

#[derive(Serialize)]
struct ModelSummary {
    kind: &'static str,
    dim: usize,
    lattice: bool,
    lattice_span: Option<i64>,
    mean: f64,
    pi: Vec<f64>,
    sigma2: f64,
    zero_variance: bool,
    gap: f64,
    centering_residual: f64,
    normalization_residual: [f64; 2],
}

pub fn model_validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let model = prepare(cfg)?;
    let (sigma2, zero_variance) = match perturb::sigma2(&model) {
        Ok(v) => (v, false),
        Err(birkhoff::Error::ZeroVariance { sigma2 }) => (sigma2, true),
        Err(e) => return Err(e.into()),
    };
    let (row, col) = model.normalization_residuals();
    let summary = ModelSummary {
        kind: kind_name(model.kind),
        dim: model.dim(),
        lattice: model.lattice,
        lattice_span: lattice_span(&cfg.model.spec()?).map(|(_, d)| d),
        mean: model.mean,
        pi: model.pi.clone(),
        sigma2,
        zero_variance,
        gap: perturb::spectral_gap(&model),
        centering_residual: model.centering_residual(),
        normalization_residual: [row, col],
    };
    let json = serde_json::to_string_pretty(&summary).expect("serializable");
    if cfg.wants(Format::Json) {
        write_artifact(cfg, "model.json", &json)?;
    }
    writeln!(out, "{json}")?;
    Ok(true)
}

#[derive(Serialize)]
struct Agreement {
    tolerance: f64,
    worst_ratio: f64,
    worst_index: usize,
    passed: bool,
}

#[derive(Serialize)]
struct JetReport {
    order: usize,
    lambda_jet: Jet,
    lambda_jet_fd: Jet,
    fd_error: Vec<f64>,
    agreement: Agreement,
    #[serde(rename = "B")]
    b: Vec<Complex64>,
    sigma2: f64,
    gap: f64,
    delta: f64,
}

pub fn jet(cfg: &RunConfig, order: Option<usize>, out: &mut dyn Write) -> Result<bool, CliError> {
    let model = prepare(cfg)?;
    let r = order.unwrap_or(cfg.expansion.order + 2);
    let (psi, xi) = weights(cfg, &model)?;
    let rs = perturb::lambda_jet_rs(&model, r)?;
    let (fd, fd_error) = perturb::lambda_jet_fd_with_error(&model, r)?;
    let (worst_index, worst_ratio) = perturb::jet_agreement(&fd, &rs, JET_TOL);
    let report = JetReport {
        order: r,
        sigma2: -2.0 * rs.coeff(2).re,
        lambda_jet: rs,
        lambda_jet_fd: fd,
        fd_error,
        agreement: Agreement { tolerance: JET_TOL, worst_ratio, worst_index, passed: worst_ratio <= 1.0 },
        b: perturb::b_constants(&model, &psi, &xi, r)?,
        gap: perturb::spectral_gap(&model),
        delta: perturb::select_delta(&model)?,
    };
    let json = serde_json::to_string_pretty(&report).expect("serializable");
    if cfg.wants(Format::Json) {
        write_artifact(cfg, "jet.json", &json)?;
    }
    writeln!(out, "{json}")?;
    Ok(report.agreement.passed)
}

pub fn expand(cfg: &RunConfig, order: Option<usize>, out: &mut dyn Write) -> Result<bool, CliError> {
    let r = order.unwrap_or(cfg.expansion.order);
    if r > MAX_ORDER {
        return Err(CliError::new("CONFIG_INVALID", format!("order must be at most {MAX_ORDER}")));
    }
    let model = prepare(cfg)?;
    let (psi, xi) = weights(cfg, &model)?;
    let json = expansion_set(&model, &psi, &xi, r)?.to_json();
    if cfg.wants(Format::Json) {
        write_artifact(cfg, "expansion.json", &json)?;
    }
    writeln!(out, "{json}")?;
    Ok(true)
}

/// Sample `n`-step sums with the sampler matching the model kind.
pub fn draw(cfg: &RunConfig, model: &NormalizedModel, n: usize, trials: usize, seed: u64) -> Result<SampleBatch, CliError> {
    Ok(match cfg.model.spec()? {
        ModelSpec::Sft(_) | ModelSpec::Iid(_) => montecarlo::sample_markov(model, n, trials, seed)?,
        ModelSpec::Circle(_) => montecarlo::sample_circle(model, n, trials, seed, cfg.model.burn_in())?,
        ModelSpec::Rmp(spec) => montecarlo::sample_rmp(&spec, cfg.model.x0(), n, trials, seed, cfg.model.burn_in())?,
    })
}

pub fn sample(cfg: &RunConfig, n: Option<usize>, trials: Option<usize>, seed: Option<u64>, out: &mut dyn Write) -> Result<bool, CliError> {
    let n = n
        .or_else(|| cfg.experiment.n_list.first().copied())
        .ok_or_else(|| CliError::new("CONFIG_INVALID", "give --n or experiment.n_list"))?;
    let trials = trials.unwrap_or(cfg.experiment.trials);
    if trials == 0 || n == 0 {
        return Err(CliError::new("CONFIG_INVALID", "n and trials must be positive"));
    }
    let seed = seed
        .or(cfg.experiment.seed)
        .ok_or_else(|| CliError::new("CONFIG_MISSING_SEED", "a seed is required to sample (--seed or experiment.seed)"))?;
    let model = prepare(cfg)?;
    let batch = draw(cfg, &model, n, trials, seed)?;
    let csv = batch.to_csv();
    if cfg.wants(Format::Csv) {
        write_artifact(cfg, &format!("sample_n{n}.csv"), &csv)?;
    }
    if cfg.wants(Format::Json) {
        write_artifact(cfg, &format!("sample_n{n}.json"), &batch.sidecar_json())?;
    }
    out.write_all(csv.as_bytes())?;
    Ok(true)
}

fn parse_number(text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    let bad = || CliError::new("INVALID_RANGE", format!("cannot read {t:?} as a number"));
    if let Some(head) = t.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let factor = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| bad())? };
        return Ok(factor * PI);
    }
    t.parse::<f64>().map_err(|_| bad())
}

/// Grid `a, a+step, … ≤ b` from `a:b:step`; numbers may carry a `pi`
/// factor (`0.1pi`, `pi`).
pub fn parse_range(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::new("INVALID_RANGE", format!("expected a:b:step, got {text:?}")));
    }
    let (a, b, step) = (parse_number(parts[0])?, parse_number(parts[1])?, parse_number(parts[2])?);
    if !(step > 0.0) || b < a {
        return Err(CliError::new("INVALID_RANGE", "need step > 0 and b ≥ a"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| a + k as f64 * step).collect())
}

pub fn scan(cfg: &RunConfig, what: ScanKind, s_range: &str, out: &mut dyn Write) -> Result<bool, CliError> {
    let grid = parse_range(s_range)?;
    let model = prepare(cfg)?;
    let (name, csv) = match what {
        ScanKind::Radius => {
            let mut csv = String::from("s,radius,flagged\n");
            for p in perturb::radius_scan(&model, &grid) {
                csv.push_str(&format!("{:e},{:e},{}\n", p.s, p.radius, p.flagged));
            }
            ("scan_radius.csv", csv)
        }
        ScanKind::Decay => {
            let n_max = cfg.experiment.n_list.iter().copied().max().unwrap_or(200);
            let mut csv = String::from("s,n,log_norm\n");
            for &s in &grid {
                for p in perturb::decay_scan(&model, s, n_max) {
                    csv.push_str(&format!("{:e},{},{:e}\n", s, p.n, p.log_norm));
                }
            }
            ("scan_decay.csv", csv)
        }
    };
    if cfg.wants(Format::Csv) {
        write_artifact(cfg, name, &csv)?;
    }
    out.write_all(csv.as_bytes())?;
    Ok(true)
}

fn powers_of_two(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

fn n_list_or(cfg: &RunConfig, default: Vec<usize>) -> Vec<usize> {
    if cfg.experiment.n_list.is_empty() {
        default
    } else {
        cfg.experiment.n_list.clone()
    }
}

fn error_table(n_list: &[usize], errors: &[f64]) -> String {
    let mut out = String::from("n,error\n");
    for (n, e) in n_list.iter().zip(errors) {
        out.push_str(&format!("{n},{e:e}\n"));
    }
    out
}

/// Report entries plus the CSV tables behind them.
#[derive(Default)]
pub struct SuiteOutput {
    pub entries: Vec<ReportEntry>,
    pub tables: Vec<(String, String)>,
}

impl SuiteOutput {
    fn push(&mut self, entry: ReportEntry, table: (String, String)) {
        self.entries.push(entry);
        self.tables.push(table);
    }
}

fn fitted(id: &str, description: &str, required: String, fit: RateFit, ok: bool) -> ReportEntry {
    ReportEntry::new(id, description, &required)
        .measure("slope", fit.slope)
        .measure("slope_stderr", fit.slope_stderr)
        .with_fit(fit)
        .check(ok)
}

/// Sup-norm CDF errors of every truncation order against Gil–Pelaez, or
/// against the empirical CDF for random matrix products and for circle
/// maps with `experiment.trials > 0`.
pub fn edgeworth_suite(cfg: &RunConfig, model: &NormalizedModel, set: &ExpansionSet, next: &[usize]) -> Result<SuiteOutput, CliError> {
    let r = set.order;
    let grid = validate::default_x_grid(set.sigma2);
    let sets: Vec<ExpansionSet> = (0..=r).map(|j| set.truncated(j)).collect();
    let mc = model.kind == ModelKind::Rmp || (model.kind == ModelKind::Circle && cfg.experiment.trials > 0);
    let n_list = n_list_or(cfg, if mc { vec![10_000] } else { powers_of_two(6, 12) });
    let mut errs = vec![Vec::with_capacity(n_list.len()); r + 1];
    let mut reference_error: f64 = 0.0;
    for &n in &n_list {
        let reference = if mc {
            let trials = cfg.experiment.trials;
            let seed = cfg.experiment.seed.ok_or_else(|| CliError::new("CONFIG_MISSING_SEED", "Monte Carlo reference needs a seed"))?;
            if trials == 0 {
                return Err(CliError::new("CONFIG_INVALID", "the edgeworth suite on a random matrix product needs experiment.trials > 0"));
            }
            reference_error = reference_error.max(1.0 / (trials as f64).sqrt());
            draw(cfg, model, n, trials, seed)?.empirical_cdf(&grid)
        } else {
            let gp = oracle::cdf_gil_pelaez(model, n, &grid)?;
            reference_error = reference_error.max(gp.error);
            gp.cdf
        };
        for (j, s) in sets.iter().enumerate() {
            let e = grid.iter().zip(&reference).map(|(&x, f)| (f - polyexp::edgeworth_cdf(s, n, x)).abs()).fold(0.0, f64::max);
            errs[j].push(e);
        }
    }
    let mut out = SuiteOutput::default();
    for j in 0..=r {
        let id = format!("edgeworth/order{j}");
        let beats = j == 0 || n_list.iter().enumerate().all(|(i, &n)| n < 256 || errs[j][i] < errs[0][i]);
        let table = (format!("edgeworth_order{j}.csv"), error_table(&n_list, &errs[j]));
        if mc {
            let mut e = ReportEntry::new(
                &id,
                "sup_x |ECDF - Edgeworth CDF| (Monte Carlo reference)",
                "order ≥ 1 error below the Gaussian error at every n ≥ 256",
            )
            .measure("reference_scale", reference_error);
            for (i, &n) in n_list.iter().enumerate() {
                e = e.measure(&format!("error_n{n}"), errs[j][i]);
            }
            out.push(e.check(beats), table);
        } else {
            let target = -(next[j] as f64) / 2.0;
            let fit = RateFit::fit(&n_list, &errs[j])?;
            let ok = fit.slope <= target + SLOPE_TOL && beats;
            let required = format!("slope ≤ {:.2}; order ≥ 1 below the Gaussian error for n ≥ 256", target + SLOPE_TOL);
            let e = fitted(&id, "sup_x |F_n - Edgeworth CDF| against Gil–Pelaez", required, fit, ok)
                .measure("reference_error", reference_error);
            out.push(e, table);
        }
    }
    Ok(out)
}

/// Sup-norm point-mass errors against the exact lattice law.
pub fn pmf_suite(cfg: &RunConfig, model: &NormalizedModel, set: &ExpansionSet, next: &[usize]) -> Result<SuiteOutput, CliError> {
    let n_list = n_list_or(cfg, powers_of_two(7, 13));
    let mut out = SuiteOutput::default();
    for j in 0..=set.order {
        let fit = validate::sup_error_pmf(model, &set.truncated(j), &n_list)?;
        let target = -(next[j] as f64) / 2.0;
        let scaled = fit.slope + 0.5;
        let ok = (scaled - target).abs() <= SLOPE_TOL;
        let table = (format!("pmf_order{j}.csv"), fit.to_csv());
        let e = fitted(
            &format!("pmf/order{j}"),
            "sup_k |P(S_n = k) - expansion|, slope of the √n-scaled error",
            format!("scaled slope in {target:.2} ± {SLOPE_TOL}"),
            fit,
            ok,
        )
        .measure("scaled_slope", scaled);
        out.push(e, table);
    }
    Ok(out)
}

/// Default test function: `1_{0}` on lattices, a unit Gaussian bump
/// otherwise.
pub fn default_g(model: &NormalizedModel) -> TestFunction {
    if model.lattice {
        TestFunction::indicator(0)
    } else {
        TestFunction::Gaussian { center: 0.0, width: 1.0, height: 1.0 }
    }
}

/// `E(ψ g(S̄_n) ξ)` errors of every truncation order.
pub fn mlclt_suite(
    cfg: &RunConfig,
    model: &NormalizedModel,
    set: &ExpansionSet,
    next: &[usize],
    psi: &[f64],
    xi: &[f64],
) -> Result<SuiteOutput, CliError> {
    let g = cfg.experiment.g.clone().unwrap_or_else(|| default_g(model));
    let form = cfg.experiment.form.unwrap_or(MlcltForm::Global);
    let reference = match (cfg.experiment.trials, cfg.experiment.seed) {
        (0, _) => Reference::Exact,
        (trials, Some(seed)) => Reference::MonteCarlo { trials, seed },
        (_, None) => return Err(CliError::new("CONFIG_MISSING_SEED", "experiment.seed is required when experiment.trials > 0")),
    };
    let n_list = n_list_or(cfg, powers_of_two(6, 11));
    let mut errs = Vec::with_capacity(set.order + 1);
    for j in 0..=set.order {
        let sj = set.truncated(j);
        let e = n_list
            .iter()
            .map(|&n| validate::mlclt_error_at(model, &sj, &g, psi, xi, n, form, reference))
            .collect::<birkhoff::Result<Vec<f64>>>()?;
        errs.push(e);
    }
    let mut out = SuiteOutput::default();
    let last = n_list.len() - 1;
    for j in 0..=set.order {
        let id = format!("mlclt/order{j}");
        let table = (format!("mlclt_order{j}.csv"), error_table(&n_list, &errs[j]));
        match reference {
            Reference::Exact => {
                let target = match form {
                    MlcltForm::Global => -((next[j] + 1) as f64) / 2.0,
                    MlcltForm::Local => -((2 * (j / 2) + 3) as f64) / 2.0,
                };
                let fit = RateFit::fit(&n_list, &errs[j])?;
                let ok = fit.slope <= target + SLOPE_TOL;
                out.push(
                    fitted(
                        &id,
                        "|E(ψ g(S̄_n) ξ) - expansion| against the exact value",
                        format!("slope ≤ {:.2}", target + SLOPE_TOL),
                        fit,
                        ok,
                    ),
                    table,
                );
            }
            Reference::MonteCarlo { .. } => {
                let mut e = ReportEntry::new(
                    &id,
                    "|E(ψ g(S̄_n) ξ) - expansion| against Monte Carlo, noise removed",
                    "order ≥ 1 not worse than order 0 at the largest n",
                );
                for (i, &n) in n_list.iter().enumerate() {
                    e = e.measure(&format!("error_n{n}"), errs[j][i]);
                }
                out.push(e.check(errs[j][last] <= errs[0][last]), table);
            }
        }
    }
    Ok(out)
}

/// For each truncation order `j ≤ r`, the index of the first omitted
/// term whose `A_m` does not vanish; `j + 1` unless symmetry kills terms.
pub fn next_terms(aux: &ExpansionSet, r: usize) -> Vec<usize> {
    (0..=r).map(|j| (j + 1..=aux.order).find(|&m| aux.a[m].max_abs_coeff() > 1e-10).unwrap_or(j + 1)).collect()
}

fn invariants_entry(set: &ExpansionSet) -> ReportEntry {
    let res = validate::expansion_invariants(set);
    ReportEntry::new(
        &format!("invariants/order{}", set.order),
        "Fourier identity of R_j, ODE of P_j, mean zero, parity and realness",
        &format!(
            "fourier < {:e}, ode < {:e}, mean_zero < {:e}, parity < {:e}, realness < {:e}",
            validate::FOURIER_TOL,
            validate::ODE_TOL,
            validate::MEAN_ZERO_TOL,
            validate::PARITY_TOL,
            validate::REALNESS_TOL
        ),
    )
    .measure("fourier", res.fourier)
    .measure("ode", res.ode)
    .measure("mean_zero", res.mean_zero)
    .measure("parity", res.parity)
    .measure("realness", res.realness)
    .check(res.passed())
}

/// Every requested suite as report entries and tables.
pub fn run_suites(cfg: &RunConfig, suite: Suite) -> Result<SuiteOutput, CliError> {
    let (spec, rescaled) = rescale_lattice(cfg.model.spec()?);
    let model = build(&spec)?;
    let (psi, xi) = weights(cfg, &model)?;
    let r = cfg.expansion.order;
    let set = expansion_set(&model, &psi, &xi, r)?;
    let next = next_terms(&expansion_set(&model, &psi, &xi, r + 2)?, r);
    let mut out = SuiteOutput::default();
    out.entries.push(invariants_entry(&set));
    if let Some((a, d)) = rescaled {
        let e = ReportEntry::new("lattice/rescale", "observable replaced by (φ - a)/d to reach span 1", "span 1 after rescaling")
            .measure("a", a as f64)
            .measure("d", d as f64);
        out.entries.push(e.check(true));
    }
    let mut merge = |part: SuiteOutput| {
        out.entries.extend(part.entries);
        out.tables.extend(part.tables);
    };
    if matches!(suite, Suite::Edgeworth | Suite::All) {
        if !model.lattice {
            merge(edgeworth_suite(cfg, &model, &set, &next)?);
        } else if suite == Suite::Edgeworth {
            return Err(CliError::new("INVALID_ARGUMENT", "the edgeworth suite needs a non-lattice model; use --suite pmf"));
        }
    }
    if matches!(suite, Suite::Pmf | Suite::All) {
        if model.lattice {
            merge(pmf_suite(cfg, &model, &set, &next)?);
        } else if suite == Suite::Pmf {
            return Err(birkhoff::Error::NotLattice.into());
        }
    }
    if matches!(suite, Suite::Mlclt | Suite::All) {
        if model.kind != ModelKind::Rmp {
            merge(mlclt_suite(cfg, &model, &set, &next, &psi, &xi)?);
        } else if suite == Suite::Mlclt {
            return Err(CliError::new("INVALID_ARGUMENT", "the mlclt suite does not support random matrix products"));
        }
    }
    Ok(out)
}

pub fn validate(cfg: &RunConfig, suite: Suite, deterministic: bool, out: &mut dyn Write) -> Result<bool, CliError> {
    let results = run_suites(cfg, suite)?;
    let timestamp =
        if deterministic { None } else { std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).ok().map(|d| d.as_secs()) };
    let report = validate::report(results.entries, timestamp);
    let json = report.to_json();
    if cfg.wants(Format::Csv) {
        for (name, table) in &results.tables {
            write_artifact(cfg, name, table)?;
        }
    }
    if cfg.wants(Format::Json) {
        write_artifact(cfg, "report.json", &json)?;
    }
    writeln!(out, "{json}")?;
    Ok(report.passed)
}
