use birkhoff::models::{build, catalog, IidSpec, ModelSpec};
use birkhoff::oracle::*;
use birkhoff::perturb;
use num_complex::Complex64;

/// Forward description of the two-state chain: `P`, `π`, `φ(y,x)`.
const P: [[f64; 2]; 2] = [[0.5, 0.5], [1.0 / 3.0, 2.0 / 3.0]];
const PI0: [f64; 2] = [0.4, 0.6];
const PHI: [[f64; 2]; 2] = [[1.0, 0.0], [1.0, -1.0]];

/// `E(ψ(z_0) e^{isS_n} ξ(z_n))` over every forward path of length `n`.
fn enumerate(n: usize, s: f64, psi: [f64; 2], xi: [f64; 2]) -> Complex64 {
    let mut total = Complex64::new(0.0, 0.0);
    for z0 in 0..2 {
        for bits in 0..(1u32 << n) {
            let mut prob = PI0[z0];
            let mut sum = 0.0;
            let mut z = z0;
            for k in 0..n {
                let next = ((bits >> k) & 1) as usize;
                prob *= P[z][next];
                sum += PHI[z][next];
                z = next;
            }
            total += Complex64::new(0.0, s * sum).exp() * (prob * psi[z0] * xi[z]);
        }
    }
    total
}

/// Forward dynamic program over `(state, sum)`.
fn forward_law(n: usize) -> std::collections::BTreeMap<i64, f64> {
    let mut layer: Vec<std::collections::BTreeMap<i64, f64>> = vec![Default::default(); 2];
    layer[0].insert(0, PI0[0]);
    layer[1].insert(0, PI0[1]);
    for _ in 0..n {
        let mut next: Vec<std::collections::BTreeMap<i64, f64>> = vec![Default::default(); 2];
        for z in 0..2 {
            for (&k, &p) in &layer[z] {
                for x in 0..2 {
                    *next[x].entry(k + PHI[z][x] as i64).or_insert(0.0) += p * P[z][x];
                }
            }
        }
        layer = next;
    }
    let mut out = std::collections::BTreeMap::new();
    for l in layer {
        for (k, p) in l {
            *out.entry(k).or_insert(0.0) += p;
        }
    }
    out
}

#[test]
fn charfn_matches_path_enumeration() {
    let m = catalog::chain2_lattice();
    for &(psi, xi) in &[([1.0, 1.0], [1.0, 1.0]), ([1.25, 5.0 / 6.0], [2.0, 0.5])] {
        let got = exact_charfn_raw(&m, 12, 0.7, &psi, &xi).unwrap();
        let want = enumerate(12, 0.7, psi, xi);
        assert!((got - want).norm() < 1e-13, "{got} vs {want}");
    }
}

#[test]
fn charfn_matches_dynamic_program_at_n30() {
    let m = catalog::chain2_lattice();
    let law = forward_law(30);
    let want: Complex64 = law.iter().map(|(&k, &p)| Complex64::new(0.0, 0.7 * k as f64).exp() * p).sum();
    let got = exact_charfn_raw(&m, 30, 0.7, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
    assert!((got - want).norm() < 1e-13);
}

#[test]
fn lattice_law_matches_enumeration() {
    let m = catalog::chain2_lattice();
    let d = exact_lattice_dist(&m, 10).unwrap();
    let law = forward_law(10);
    for k in -12..=12 {
        let want = law.get(&k).copied().unwrap_or(0.0);
        assert!((d.get(k) - want).abs() < 1e-15, "k={k}");
    }
}

#[test]
fn lattice_laws_are_normalized() {
    for name in ["bernoulli_fair", "bernoulli_0.3", "chain2_lattice", "constant_observable"] {
        let m = build(&catalog::by_name(name).unwrap()).unwrap();
        for n in [1, 7, 256, 1 << 14] {
            let d = exact_lattice_dist(&m, n).unwrap();
            assert!((d.total_mass() - 1.0).abs() < 1e-12, "{name} n={n}");
            assert!(d.min_mass() >= -1e-14, "{name} n={n}: {}", d.min_mass());
        }
    }
}

#[test]
fn lattice_dist_serializes() {
    let d = exact_lattice_dist(&catalog::bernoulli_fair(), 2).unwrap();
    assert!(d.to_csv().starts_with("k,pmf\n-2,"));
    let back: ExactDistribution = serde_json::from_str(&d.to_json()).unwrap();
    assert_eq!(back, d);
}

#[test]
fn iid_charfn_is_a_power() {
    let m = catalog::bernoulli(0.3);
    for &s in &[0.1, 1.3, 2.9] {
        let base = Complex64::new(0.7, 0.0) + Complex64::new(0.0, s).exp() * 0.3;
        for n in [1, 10, 40] {
            let got = exact_charfn_raw(&m, n, s, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
            assert!((got - base.powu(n as u32)).norm() < 1e-12);
        }
    }
}

#[test]
fn consecutive_ratio_tends_to_eigenvalue() {
    for m in [catalog::chain2_lattice(), catalog::chain3_nonlattice()] {
        let ones = vec![1.0; m.dim()];
        for &s in &[0.05, 0.2] {
            let a = exact_charfn(&m, 200, s, &ones, &ones).unwrap();
            let b = exact_charfn(&m, 201, s, &ones, &ones).unwrap();
            let lam = perturb::lambda_jet_rs(&m, 12).unwrap().eval(Complex64::new(s, 0.0));
            assert!((b / a - lam).norm() < 1e-6, "s={s}");
        }
    }
}

#[test]
fn gil_pelaez_limits_and_monotonicity() {
    let m = catalog::chain3_nonlattice();
    let xs: Vec<f64> = (-60..=60).map(|k| k as f64 * 0.1).chain([-40.0]).collect();
    let gp = cdf_gil_pelaez(&m, 64, &xs).unwrap();
    assert!(gp.error < 1e-7);
    assert!(gp.cdf[121].abs() < 1e-7 + gp.error);
    assert!(gp.cdf[..121].windows(2).all(|w| w[1] >= w[0] - 2.0 * gp.error));
}

#[test]
fn symmetric_law_has_median_zero() {
    let spec = IidSpec { probabilities: vec![0.25; 4], values: vec![-2f64.sqrt(), -1.0, 1.0, 2f64.sqrt()], lattice: false };
    let m = build(&ModelSpec::Iid(spec)).unwrap();
    // atoms at 0 exist for even n, so compare the mid-value with n odd
    let gp = cdf_gil_pelaez(&m, 33, &[0.0]).unwrap();
    assert!((gp.cdf[0] - 0.5).abs() < gp.error + 1e-12);
}

#[test]
fn gil_pelaez_matches_a_gaussian_charfn() {
    let s2: f64 = 0.8;
    let chi = move |s: f64| Complex64::new((-0.5 * s2 * s * s).exp(), 0.0);
    let xs: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.2).collect();
    let (vals, err) = gil_pelaez_inversion(&chi, &[(0.0, 50.0)], 5.0, &xs, 0.0);
    assert!(err < 1e-10);
    for (x, v) in xs.iter().zip(&vals) {
        assert!((v - 0.5 * libm::erfc(-x / (2.0 * s2).sqrt())).abs() < 1e-8);
    }
}

/// Binomial CDF of a sum of `n` Bernoulli(p).
fn binomial_cdf(n: usize, p: f64, k: i64) -> f64 {
    let mut pmf = vec![0.0; n + 1];
    pmf[0] = (1.0 - p).powi(n as i32);
    for j in 1..=n {
        pmf[j] = pmf[j - 1] * (n - j + 1) as f64 / j as f64 * p / (1.0 - p);
    }
    pmf.iter().take((k.max(-1) + 1) as usize).sum()
}

#[test]
fn classical_first_term_sign_is_pinned_by_binomial() {
    // continuity-corrected comparison at half-integers: the first-order
    // expansion must beat the Gaussian, which fixes the sign of P_1
    let (n, p) = (1usize << 10, 0.1);
    let kappa = cumulants_from_distribution(&[0.0, 1.0], &[1.0 - p, p], 3).unwrap();
    let p1 = &classical_iid_edgeworth(&kappa, 1).unwrap()[0];
    let s2 = kappa.get(2);
    let (mut e0, mut e1): (f64, f64) = (0.0, 0.0);
    let nf = n as f64;
    for k in 80..125 {
        let x = (k as f64 + 0.5 - nf * p) / nf.sqrt();
        let exact = binomial_cdf(n, p, k);
        let g = 0.5 * libm::erfc(-x / (2.0 * s2).sqrt());
        let dens = (-x * x / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt();
        e0 = e0.max((exact - g).abs());
        e1 = e1.max((exact - g - p1.eval_real(x).re * dens / nf.sqrt()).abs());
    }
    assert!(e1 < 0.2 * e0, "{e1} vs {e0}");
}

#[test]
fn cumulant_extraction_from_jets() {
    let k = cumulants_from_jet(&perturb::lambda_jet_rs(&catalog::bernoulli(0.3), 5).unwrap()).unwrap();
    assert!((k.get(2) - 0.21).abs() < 1e-14);
    assert!((k.get(3) - 0.084).abs() < 1e-14);
    let gauss = birkhoff::polyexp::Jet::from_real(&[0.0, 0.0, -0.65, 0.0, 0.0, 0.0]).exp();
    let k = cumulants_from_jet(&gauss).unwrap();
    assert!((k.get(2) - 1.3).abs() < 1e-15 && (3..=5).all(|j| k.get(j).abs() < 1e-15));
}

#[test]
fn cumulant_extraction_rejects_imaginary_parts() {
    let jet = birkhoff::polyexp::Jet::new(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(-0.5, 0.0),
        Complex64::new(0.3, 0.0),
    ]);
    assert!(matches!(cumulants_from_jet(&jet), Err(birkhoff::Error::ResidualImaginary { .. })));
}

#[test]
fn variance_extrapolation_is_exact_for_chain2() {
    let m = catalog::chain2_lattice();
    let v = variance_extrapolation(&m, 40).unwrap();
    assert!((v - 1.6).abs() < 1e-10, "{v}");
}
