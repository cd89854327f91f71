use hoa_core::firstorder::{first_order_significance, pivots_profile, pivots_scalar, FirstOrderPivots};
use hoa_core::models::{catalog, ExpPair, GammaRatio, Model, ModelSpec};
use hoa_core::numcore::normal;
use hoa_core::optim::{fit_constrained, fit_default, nuisance_of};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn scalar_pivots_for_the_gamma_ratio() {
    let m = GammaRatio::<f64>::from_sa(1.6, 3.0).unwrap();
    let f = fit_default(&m).unwrap();
    let p = pivots_scalar(&m, &f, 1.0).unwrap();
    assert!((p.root - 1.16189500386222507).abs() < 1e-9);
    assert!((p.wald - 0.6 * 2.34375f64.sqrt()).abs() < 1e-6);
    let (_, _, phi_r) = first_order_significance(&p);
    assert!((phi_r - 0.87736094159661371).abs() < 1e-9);
    let z = pivots_scalar(&m, &f, 1.6).unwrap();
    assert!(z.score.abs() < 1e-8 && z.wald.abs() < 1e-12 && z.root.abs() < 1e-12);
}

#[test]
fn profile_pivots_for_the_exponential_pair() {
    let m = ExpPair::<f64>::new(vec![1.0, 2.0]).unwrap();
    let f = fit_default(&m).unwrap();
    let c = fit_constrained(&m, 1.0, &[0.5]).unwrap();
    let p = pivots_profile(&m, &f, &c).unwrap();
    assert!((p.root - 0.48535149254202043).abs() < 1e-9);
    let (_, _, phi_r) = first_order_significance(&p);
    assert!((phi_r - normal::cdf(0.48535149254202043)).abs() < 1e-12);
    assert!((phi_r - 0.68628648252760666).abs() < 1e-9);
    let c = fit_constrained(&m, 2.0, &[0.5]).unwrap();
    let p = pivots_profile(&m, &f, &c).unwrap();
    assert!(p.root.abs() < 1e-8 && p.wald.abs() < 1e-12);
    let c = fit_constrained(&m, 3.0, &[0.5]).unwrap();
    let p = pivots_profile(&m, &f, &c).unwrap();
    assert!(p.root < 0.0 && p.wald < 0.0);
}

#[test]
fn zero_pivots_give_one_half() {
    let p = FirstOrderPivots {
        score: 0.0,
        wald: 0.0,
        root: 0.0,
        profile_info: 1.0,
    };
    assert_eq!(first_order_significance(&p), (0.5, 0.5, 0.5));
}

fn fixtures() -> Vec<(Box<dyn Model<f64>>, f64)> {
    let specs = [
        (ModelSpec::new("gamma_ratio").with_hyper("s", 1.6).with_hyper("a", 3.0), 0.8),
        (ModelSpec::new("exp_pair").with_data(&[1.0, 2.0]), 1.5),
        (ModelSpec::new("exp_mean").with_data(&[0.4, 1.3, 2.2, 0.7, 1.1]), 0.6),
        (ModelSpec::new("linexp_2par").with_data(&[1.2, 0.4, 2.1, 1.7, 0.9, 1.3]), 1.0),
        (ModelSpec::new("regression_scale").with_data(&[1.0, 3.0, 2.2, 0.4, 1.9]), 0.8),
        (ModelSpec::new("bvn_corr").with_data(&[0.3, 0.1, 1.2, 0.8, -0.5, -0.9, 0.4, 0.9, -1.1, -0.2]), 0.3),
        (ModelSpec::new("poisson_glm").with_data(&[3.0, 5.0, 4.0]), 0.5),
    ];
    specs.into_iter().map(|(s, w)| (catalog::<f64>(&s).unwrap(), w)).collect()
}

fn pivots(m: &dyn Model<f64>, f: &hoa_core::Fit64, psi: f64) -> FirstOrderPivots<f64> {
    if m.dim() == 1 {
        pivots_scalar(m, f, psi).unwrap()
    } else {
        let c = fit_constrained(m, psi, &nuisance_of(m, f.theta_hat.as_slice())).unwrap();
        pivots_profile(m, f, &c).unwrap()
    }
}

#[test]
fn root_squares_to_twice_the_drop_and_signs_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let models = fixtures();
    for i in 0..100 {
        let (m, width) = &models[i % models.len()];
        let f = fit_default(m.as_ref()).unwrap();
        let k = m.interest_index();
        let psi_hat = f.theta_hat[k];
        let psi = psi_hat + width * rng.random_range(-1.0..1.0);
        if !m.domain().contains_coord(k, psi) || (psi - psi_hat).abs() < 1e-3 {
            continue;
        }
        let p = pivots(m.as_ref(), &f, psi);
        let lp = if m.dim() == 1 {
            m.loglik(&[psi])
        } else {
            fit_constrained(m.as_ref(), psi, &nuisance_of(m.as_ref(), f.theta_hat.as_slice())).unwrap().loglik
        };
        let drop = 2.0 * (f.loglik_max - lp);
        assert!((p.root * p.root - drop).abs() <= 1e-10 * drop, "{} psi {psi}", m.id());
        assert_eq!(p.root.signum(), (psi_hat - psi).signum());
        assert_eq!(p.root.signum(), p.wald.signum());
    }
}

#[test]
fn first_order_significance_is_non_increasing() {
    for (m, width) in fixtures() {
        let f = fit_default(m.as_ref()).unwrap();
        let k = m.interest_index();
        let psi_hat = f.theta_hat[k];
        let grid: Vec<f64> = (0..25)
            .map(|i| psi_hat - width + 2.0 * width * i as f64 / 24.0)
            .filter(|&v| m.domain().contains_coord(k, v))
            .collect();
        let p: Vec<f64> = grid.iter().map(|&psi| normal::cdf(pivots(m.as_ref(), &f, psi).root)).collect();
        assert!(p.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{}", m.id());
    }
}
