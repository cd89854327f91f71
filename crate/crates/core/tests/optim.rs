use hoa_core::models::{ExpPair, GammaRatio, LinExp2, Model, ParamBox, RegressionScale, ErrorLaw, Structure};
use hoa_core::optim::{fit_constrained, fit_default, fit_mle, nuisance_of, profile_curve, score};
use hoa_core::{HoaError, Result};

struct NormalMean {
    y: Vec<f64>,
}

impl Model<f64> for NormalMean {
    fn id(&self) -> &str {
        "normal_mean"
    }
    fn dim(&self) -> usize {
        1
    }
    fn param_names(&self) -> Vec<String> {
        vec!["mu".into()]
    }
    fn observations(&self) -> &[f64] {
        &self.y
    }
    fn domain(&self) -> ParamBox<f64> {
        ParamBox::unbounded(1)
    }
    fn start(&self) -> Vec<f64> {
        vec![1.0]
    }
    fn structure(&self) -> Structure {
        Structure::StructuralEquation
    }
    fn loglik_at(&self, theta: &[f64], y: &[f64]) -> f64 {
        y.iter().map(|v| -(v - theta[0]).powi(2) / 2.0).sum()
    }
    fn with_observations(&self, y: Vec<f64>) -> Result<Box<dyn Model<f64>>> {
        Ok(Box::new(NormalMean { y }))
    }
}

fn exp_pair_fixture() -> ExpPair<f64> {
    ExpPair::new(vec![1.0, 2.0]).unwrap()
}

#[test]
fn full_fits() {
    let g = GammaRatio::<f64>::from_sa(1.6, 3.0).unwrap();
    let f = fit_default(&g).unwrap();
    assert!((f.theta_hat[0] - 1.6).abs() < 1e-10);
    assert!((f.obs_info[(0, 0)] - 2.34375).abs() < 1e-5);
    assert!(f.converged);

    let f = fit_default(&exp_pair_fixture()).unwrap();
    assert!((f.theta_hat[0] - 2.0).abs() < 1e-10 && (f.theta_hat[1] - 0.5).abs() < 1e-10);
    assert!((f.obs_info.det().unwrap() - 1.0).abs() < 1e-6);

    let n = NormalMean { y: vec![0.0, 0.0] };
    let f = fit_mle(&n, &[1.0]).unwrap();
    assert!(f.theta_hat[0].abs() < 1e-10);
    assert!((f.obs_info[(0, 0)] - 2.0).abs() < 1e-5);
}

#[test]
fn fits_are_stationary_and_positive_definite() {
    let models: Vec<Box<dyn Model<f64>>> = vec![
        Box::new(exp_pair_fixture()),
        Box::new(LinExp2::new(vec![1.2, 0.4, 2.1, 1.7, 0.9, 1.3], 0).unwrap()),
        Box::new(RegressionScale::location_scale(vec![1.0, 3.0, 2.2, 0.4, 1.9], ErrorLaw::Student { df: 4.0 }).unwrap()),
    ];
    for m in models {
        let f = fit_default(m.as_ref()).unwrap();
        let (g, _) = score(m.as_ref(), f.theta_hat.as_slice()).unwrap();
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(norm <= 1e-8 * (1.0 + f.loglik_max.abs()), "{} gradient {norm}", m.id());
        assert!(f.obs_info.is_symmetric() && f.obs_info.is_positive_definite());
    }
}

#[test]
fn start_outside_the_domain_is_rejected() {
    let err = fit_mle(&exp_pair_fixture(), &[-1.0, 0.5]).unwrap_err();
    assert!(matches!(err, HoaError::Inadmissible { .. }), "{err:?}");
}

#[test]
fn constrained_fits() {
    let m = exp_pair_fixture();
    let f = fit_default(&m).unwrap();
    let c = fit_constrained(&m, 1.0, &[0.5]).unwrap();
    assert!((c.lambda_hat_psi[0] - 2.0 / 3.0).abs() < 1e-10);
    assert!((c.info_lambda_block[(0, 0)] - 4.5).abs() < 1e-6);
    let c = fit_constrained(&m, 2.0, &[1.0]).unwrap();
    assert!((c.lambda_hat_psi[0] - 0.5).abs() < 1e-8);
    assert!((c.loglik - f.loglik_max).abs() <= 1e-9 * f.loglik_max.abs());
    let g = GammaRatio::<f64>::from_sa(1.6, 3.0).unwrap();
    assert!(matches!(fit_constrained(&g, 1.0, &[]), Err(HoaError::Unsupported(_))));
}

#[test]
fn profile_examples() {
    let m = exp_pair_fixture();
    let f = fit_default(&m).unwrap();
    let fits = profile_curve(&m, &f, &[1.0, 2.0]).unwrap();
    assert!((fits[1].loglik - fits[0].loglik - (9.0f64 / 8.0).ln()).abs() < 1e-10);
    let grid: Vec<f64> = (0..50).map(|i| 0.3 + 0.15 * i as f64).collect();
    let fits = profile_curve(&m, &f, &grid).unwrap();
    for (c, &psi) in fits.iter().zip(&grid) {
        assert_eq!(c.psi, psi);
        assert!((c.lambda_hat_psi[0] - 2.0 / (psi + 2.0)).abs() < 1e-8);
        assert!(c.loglik <= f.loglik_max + 1e-12);
    }
    let ll: Vec<f64> = fits.iter().map(|c| c.loglik).collect();
    assert!(ll.windows(3).all(|w| !(w[1] < w[0] && w[1] < w[2])));
    let best = grid[ll.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0];
    assert!((best - 2.0).abs() < 0.15 + 1e-12);
    let g = GammaRatio::<f64>::from_sa(1.6, 3.0).unwrap();
    let gf = fit_default(&g).unwrap();
    assert!(matches!(profile_curve(&g, &gf, &[1.0, 2.0]), Err(HoaError::Unsupported(_))));
}

#[test]
fn profile_is_independent_of_scheduling() {
    let m = LinExp2::new(vec![1.2, 0.4, 2.1, 1.7, 0.9, 1.3], 0).unwrap();
    let f = fit_default(&m).unwrap();
    let grid: Vec<f64> = (0..40).map(|i| 0.5 + 0.2 * i as f64).collect();
    let a = profile_curve(&m, &f, &grid).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| profile_curve(&m, &f, &grid).unwrap());
    assert_eq!(a, b);
    let start = nuisance_of(&m, f.theta_hat.as_slice());
    assert_eq!(start.len(), 1);
}
