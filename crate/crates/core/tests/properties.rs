use birkhoff::models::{build, IidSpec, MarkovSftSpec, ModelSpec};
use birkhoff::oracle;
use birkhoff::perturb::{lambda_jet_rs, radius_scan};
use birkhoff::polyexp::{Jet, Polynomial};
use birkhoff::validate::RateFit;
use proptest::prelude::*;

fn chain(p: f64, q: f64, obs: [i8; 4]) -> ModelSpec {
    let t = vec![vec![1.0 - p, p], vec![q, 1.0 - q]];
    let o = vec![vec![obs[0] as f64, obs[1] as f64], vec![obs[2] as f64, obs[3] as f64]];
    ModelSpec::Sft(MarkovSftSpec::from_transition_matrix(&t, o, true))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rate_fit_ignores_error_scale(c in 1e-6f64..1e3, slope in -3.0f64..-0.2) {
        let ns = [64usize, 128, 256, 512, 1024];
        let errs: Vec<f64> = ns.iter().map(|&n| (n as f64).powf(slope)).collect();
        let scaled: Vec<f64> = errs.iter().map(|e| c * e).collect();
        let a = RateFit::fit(&ns, &errs).unwrap();
        let b = RateFit::fit(&ns, &scaled).unwrap();
        prop_assert!((a.slope - slope).abs() < 1e-10);
        prop_assert!((a.slope - b.slope).abs() < 1e-10);
        prop_assert!((b.intercept - a.intercept - c.ln()).abs() < 1e-9);
    }

    #[test]
    fn random_chains_have_contracting_twists(p in 0.05f64..0.95, q in 0.05f64..0.95, obs in prop::array::uniform4(-2i8..=2), s in 0.0f64..6.3) {
        prop_assume!(obs.iter().any(|&v| v != obs[0]));
        let model = build(&chain(p, q, obs)).unwrap();
        let r = radius_scan(&model, &[s])[0].radius;
        prop_assert!(r <= 1.0 + 1e-10);
        let ones = [1.0, 1.0];
        let chi = oracle::exact_charfn(&model, 20, s, &ones, &ones).unwrap();
        prop_assert!(chi.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn random_chain_laws_are_probabilities(p in 0.05f64..0.95, q in 0.05f64..0.95, obs in prop::array::uniform4(-2i8..=2), n in 1usize..200) {
        let model = build(&chain(p, q, obs)).unwrap();
        let d = oracle::exact_lattice_dist(&model, n).unwrap();
        prop_assert!((d.total_mass() - 1.0).abs() < 1e-12);
        prop_assert!(d.min_mass() >= -1e-14);
        let mean: f64 = d.support.iter().zip(&d.pmf).map(|(&k, &w)| k as f64 * w).sum();
        prop_assert!((mean - n as f64 * model.mean).abs() < 1e-9 * (1.0 + n as f64));
    }

    #[test]
    fn iid_jets_are_log_charfn(probs in prop::collection::vec(0.05f64..1.0, 2..5), shift in -1.0f64..1.0) {
        let total: f64 = probs.iter().sum();
        let probabilities: Vec<f64> = probs.iter().map(|p| p / total).collect();
        let values: Vec<f64> = (0..probabilities.len()).map(|k| k as f64 * 0.7 + shift).collect();
        let model = build(&ModelSpec::Iid(IidSpec { probabilities: probabilities.clone(), values: values.clone(), lattice: false })).unwrap();
        let kappa = oracle::cumulants_from_distribution(&values, &probabilities, 4).unwrap();
        let from_jet = oracle::cumulants_from_jet(&lambda_jet_rs(&model, 4).unwrap()).unwrap();
        for k in 2..=4 {
            prop_assert!((kappa.get(k) - from_jet.get(k)).abs() < 1e-10);
        }
    }

    #[test]
    fn jet_exp_and_ln_are_inverse(c in prop::collection::vec(-1.0f64..1.0, 1..7)) {
        let mut coeffs = vec![0.0];
        coeffs.extend(c);
        let j = Jet::from_real(&coeffs);
        let back = j.exp().ln().unwrap();
        for k in 0..=j.order() {
            prop_assert!((back.coeff(k) - j.coeff(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn polynomial_product_evaluates_pointwise(a in prop::collection::vec(-2.0f64..2.0, 1..6), b in prop::collection::vec(-2.0f64..2.0, 1..6), x in -3.0f64..3.0) {
        let (pa, pb) = (Polynomial::from_real(&a), Polynomial::from_real(&b));
        let lhs = pa.mul(&pb).eval_real(x);
        let rhs = pa.eval_real(x) * pb.eval_real(x);
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }
}
