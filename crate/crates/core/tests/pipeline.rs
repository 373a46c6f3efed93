use birkhoff::models::{build, catalog, two_sided_recode, IidSpec, ModelSpec};
use birkhoff::oracle::{self, classical_iid_edgeworth, cumulants_from_distribution};
use birkhoff::perturb::{self, b_constants, lambda_jet_rs, radius_scan, sigma2};
use birkhoff::polyexp::{ExpansionSet, Jet};
use birkhoff::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn expansion(model: &birkhoff::models::NormalizedModel, r: usize) -> ExpansionSet {
    let ones = vec![1.0; model.dim()];
    let jet = lambda_jet_rs(model, r + 2).unwrap();
    let b = b_constants(model, &ones, &ones, r + 2).unwrap();
    ExpansionSet::build(&jet, &b, r, model.lattice).unwrap()
}

#[test]
fn iid_models_reduce_to_the_classical_expansion() {
    let cases: Vec<(Vec<f64>, Vec<f64>)> = vec![
        (vec![-1.0, 1.0], vec![0.5, 0.5]),
        (vec![0.0, 1.0], vec![0.7, 0.3]),
        (vec![0.0, 1.0, 3.0], vec![0.2, 0.5, 0.3]),
        (vec![-2.0, 0.5, 1.0, 4.0], vec![0.1, 0.4, 0.3, 0.2]),
    ];
    for (values, probabilities) in cases {
        let spec = IidSpec { probabilities: probabilities.clone(), values: values.clone(), lattice: false };
        let model = build(&ModelSpec::Iid(spec)).unwrap();
        let set = expansion(&model, 3);
        let kappa = cumulants_from_distribution(&values, &probabilities, 5).unwrap();
        let classical = classical_iid_edgeworth(&kappa, 3).unwrap();
        for (j, (a, b)) in set.p.iter().zip(&classical).enumerate() {
            let d = a.sub(b).max_abs_coeff();
            assert!(d < 1e-8, "{values:?} P_{}: {d:e}", j + 1);
        }
    }
}

/// Five-point derivative stencils of `H(s) = lim χ_n(s)/λ(is)ⁿ`.
fn h_derivatives(model: &birkhoff::models::NormalizedModel, psi: &[f64], xi: &[f64]) -> (Complex64, Complex64) {
    let h = 1e-2;
    let f = |s: f64| oracle::normalized_charfn(model, 400, s, psi, xi).unwrap();
    let (p1, m1, p2, m2, z) = (f(h), f(-h), f(2.0 * h), f(-2.0 * h), f(0.0));
    let d1 = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * h);
    let d2 = (16.0 * (p1 + m1) - (p2 + m2) - 30.0 * z) / (12.0 * h * h);
    (d1, d2)
}

#[test]
fn projection_constants_match_finite_n_oracle() {
    let model = catalog::chain2_lattice();
    let (psi, xi) = ([1.25, 5.0 / 6.0], [2.0, 0.5]);
    let b = b_constants(&model, &psi, &xi, 4).unwrap();
    let (d1, d2) = h_derivatives(&model, &psi, &xi);
    assert!((b[1] - d1).norm() < 1e-6, "{} vs {d1}", b[1]);
    assert!((b[2] - d2).norm() < 1e-5, "{} vs {d2}", b[2]);
    let b0 = oracle::normalized_charfn(&model, 400, 0.0, &psi, &xi).unwrap();
    assert!((b[0] - b0).norm() < 1e-12);
}

#[test]
fn variance_routes_agree() {
    for model in [catalog::chain2_lattice(), catalog::chain3_nonlattice(), catalog::bernoulli(0.3)] {
        let s2 = sigma2(&model).unwrap();
        let gk = perturb::green_kubo(&model, 1e-14).unwrap().standard;
        let ex = oracle::variance_extrapolation(&model, 60).unwrap();
        assert!((s2 - gk).abs() < 1e-10, "{s2} vs {gk}");
        assert!((s2 - ex).abs() < 1e-8, "{s2} vs {ex}");
    }
}

#[test]
fn coboundary_has_no_expansion() {
    let model = build(&catalog::coboundary_spec()).unwrap();
    assert!(matches!(sigma2(&model), Err(Error::ZeroVariance { .. })));
    let jet = lambda_jet_rs(&model, 4).unwrap();
    let b = b_constants(&model, &[1.0; 3], &[1.0; 3], 4).unwrap();
    assert!(matches!(ExpansionSet::build(&jet, &b, 2, false), Err(Error::ZeroVariance { .. })));
}

#[test]
fn golden_mean_recoding_has_five_blocks() {
    let inc = vec![vec![1, 1], vec![1, 0]];
    let pot = vec![vec![0.0; 2]; 2];
    let r = two_sided_recode(&inc, &pot, 1, &|w| w[1] as f64, true, 64).unwrap();
    let mut blocks = r.blocks.clone();
    blocks.sort();
    assert_eq!(blocks, vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0], vec![1, 0, 1]]);
    assert!(build(&ModelSpec::Sft(r.spec)).is_ok());
}

#[test]
fn recoded_sums_stay_within_the_boundary_bound() {
    let inc = vec![vec![1, 1], vec![1, 1]];
    let pot = vec![vec![0.0; 2]; 2];
    // φ(x) = x_{-1} x_0 on the window x_{-1} x_0 x_1
    let r = two_sided_recode(&inc, &pot, 1, &|w| (w[0] * w[1]) as f64, true, 64).unwrap();
    assert_eq!(r.boundary_bound, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        // coordinates x_{-1} .. x_{14}
        let x: Vec<usize> = (0..16).map(|_| rng.gen_range(0..2)).collect();
        let n = 12;
        let two_sided: f64 = (0..n).map(|k| (x[k] * x[k + 1]) as f64).sum();
        let blocks: Vec<usize> = (0..=n).map(|k| r.block_index(&x[k + 1..k + 4]).unwrap()).collect();
        let one_sided: f64 = (0..n).map(|k| r.spec.observable[blocks[k]][blocks[k + 1]]).sum();
        assert!((two_sided - one_sided).abs() <= r.boundary_bound);
    }
}

#[test]
fn recoded_law_matches_word_enumeration() {
    let inc = vec![vec![1, 1], vec![1, 1]];
    let pot = vec![vec![0.0; 2]; 2];
    let r = two_sided_recode(&inc, &pot, 1, &|w| (w[0] * w[1]) as f64, true, 64).unwrap();
    let model = build(&ModelSpec::Sft(r.spec)).unwrap();
    let n = 8;
    let d = oracle::exact_lattice_dist(&model, n).unwrap();
    let mut counts = vec![0.0; n + 1];
    for word in 0..(1u32 << (n + 1)) {
        let s: u32 = (0..n).map(|k| ((word >> k) & 1) * ((word >> (k + 1)) & 1)).sum();
        counts[s as usize] += 1.0 / (1u32 << (n + 1)) as f64;
    }
    for (k, c) in counts.iter().enumerate() {
        assert!((d.get(k as i64) - c).abs() < 1e-14, "k={k}");
    }
}

#[test]
fn twisted_radius_never_exceeds_one() {
    let grid: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
    for name in ["bernoulli_fair", "chain2_lattice", "chain3_nonlattice", "doubling_cos"] {
        let model = build(&catalog::by_name(name).unwrap()).unwrap();
        let scan = radius_scan(&model, &grid);
        assert!((scan[0].radius - 1.0).abs() < 1e-12);
        assert!(scan.iter().all(|p| p.radius <= 1.0 + 1e-10), "{name}");
    }
}

#[test]
fn lattice_radius_is_periodic() {
    let model = catalog::chain2_lattice();
    let tau = 2.0 * std::f64::consts::PI;
    let scan = radius_scan(&model, &[0.4, 0.4 + tau, 1.7, 1.7 + tau, tau]);
    assert!((scan[0].radius - scan[1].radius).abs() < 1e-12);
    assert!((scan[2].radius - scan[3].radius).abs() < 1e-12);
    assert!((scan[4].radius - 1.0).abs() < 1e-12);
}

#[test]
fn decay_rate_matches_radius() {
    let model = catalog::chain3_nonlattice();
    for &s in &[0.5, 1.5, 3.0] {
        let rho = radius_scan(&model, &[s])[0].radius;
        let d = perturb::decay_scan(&model, s, 200);
        let rate = ((d[199].log_norm - d[49].log_norm) / 150.0).exp();
        assert!((rate - rho).abs() < 0.05 * rho, "s={s}: {rate} vs {rho}");
    }
}

#[test]
fn scans_do_not_depend_on_grid_order() {
    let model = catalog::chain3_nonlattice();
    let grid: Vec<f64> = (0..64).map(|k| 0.1 * k as f64).collect();
    let mut shuffled = grid.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in (1..shuffled.len()).rev() {
        shuffled.swap(i, rng.gen_range(0..=i));
    }
    let a = radius_scan(&model, &grid);
    let b = radius_scan(&model, &shuffled);
    for p in &b {
        let q = a.iter().find(|q| q.s == p.s).unwrap();
        assert_eq!(p.radius.to_bits(), q.radius.to_bits());
    }
}

#[test]
fn circle_grid_refinement_is_stable() {
    let coarse = catalog::doubling_cos();
    let spec = match catalog::doubling_cos_spec() {
        ModelSpec::Circle(mut c) => {
            c.grid = 96;
            c.fourier = 32;
            ModelSpec::Circle(c)
        }
        _ => unreachable!(),
    };
    let fine = build(&spec).unwrap();
    let (a, b) = (lambda_jet_rs(&coarse, 5).unwrap(), lambda_jet_rs(&fine, 5).unwrap());
    for k in 0..=5 {
        assert!((a.coeff(k) - b.coeff(k)).norm() < 1e-9, "k={k}");
    }
    assert!((sigma2(&coarse).unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn fair_coin_lambda_is_cosine() {
    let jet = lambda_jet_rs(&catalog::bernoulli_fair(), 6).unwrap();
    let cos = Jet::from_real(&[1.0, 0.0, -0.5, 0.0, 1.0 / 24.0, 0.0, -1.0 / 720.0]);
    for k in 0..=6 {
        assert!((jet.coeff(k) - cos.coeff(k)).norm() < 1e-13);
    }
}

#[test]
fn expansion_sets_roundtrip_through_json() {
    let set = expansion(&catalog::chain3_nonlattice(), 3);
    let back = ExpansionSet::from_json(&set.to_json()).unwrap();
    assert_eq!(back, set);
    assert_eq!(back.to_json(), set.to_json());
}

#[test]
fn bundled_sets_pass_invariant_checks() {
    for name in ["bernoulli_0.3", "chain2_lattice", "chain3_nonlattice", "doubling_cos"] {
        let model = build(&catalog::by_name(name).unwrap()).unwrap();
        let res = birkhoff::validate::expansion_invariants(&expansion(&model, 3));
        assert!(res.passed(), "{name}: {res:?}");
    }
}
