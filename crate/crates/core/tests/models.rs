use std::sync::Arc;

use hoa_core::models::{catalog, catalog_ids, BvnCorr, Model, ModelSpec};
use hoa_core::optim::fit_default;
use hoa_core::tem::{canonical_phi, directions};
use hoa_core::HoaError;

fn build(spec: &ModelSpec) -> Arc<dyn Model<f64>> {
    Arc::from(catalog::<f64>(spec).unwrap())
}

#[test]
fn gamma_ratio_from_hyperparameters() {
    let m = build(&ModelSpec::new("gamma_ratio").with_hyper("s", 1.6).with_hyper("a", 3.0));
    assert_eq!(m.dim(), 1);
    let f = fit_default(m.as_ref()).unwrap();
    assert!((f.theta_hat[0] - 1.6).abs() < 1e-10);
}

#[test]
fn gamma_ratio_inverse_parametrisation() {
    let (s, a) = (1.6, 3.0);
    let m = build(&ModelSpec::new("gamma_ratio").with_hyper("s", s).with_hyper("a", a));
    let f = fit_default(m.as_ref()).unwrap();
    let cp = canonical_phi(m.clone(), &directions(m.as_ref(), &f).unwrap()).unwrap();
    let b = s * s / (2.0 * a);
    for theta in [0.3, 0.9, 1.6, 2.5, 7.0] {
        let phi = cp.phi(&[theta]).unwrap()[0];
        let back = phi * b + (phi * phi * b * b + s * s).sqrt();
        assert!((back - theta).abs() < 1e-8, "{theta}: {back}");
    }
}

#[test]
fn exponential_pair_canonical_parameter() {
    let m = build(&ModelSpec::new("exp_pair").with_data(&[1.0, 2.0]));
    assert_eq!(m.dim(), 2);
    let f = fit_default(m.as_ref()).unwrap();
    let cp = canonical_phi(m.clone(), &directions(m.as_ref(), &f).unwrap()).unwrap();
    for (psi, lam) in [(1.0, 2.0 / 3.0), (2.0, 0.5), (3.5, 1.7)] {
        let phi = cp.phi(&[psi, lam]).unwrap();
        assert!((phi[0] + lam * psi).abs() < 1e-10 && (phi[1] + lam).abs() < 1e-10);
    }
}

#[test]
fn bivariate_normal_sufficient_pair() {
    let y = [0.3, 0.1, 1.2, 0.8, -0.5, -0.9];
    let m = build(&ModelSpec::new("bvn_corr").with_rows(&[vec![0.3, 0.1], vec![1.2, 0.8], vec![-0.5, -0.9]]));
    assert_eq!((m.dim(), m.n_obs(), m.obs_dim()), (1, 3, 2));
    let (s, t) = BvnCorr::<f64>::sufficient(&y);
    let want_s: f64 = y.chunks(2).map(|p| p[0] * p[1]).sum();
    let want_t: f64 = y.chunks(2).map(|p| (p[0] * p[0] + p[1] * p[1]) / 2.0).sum();
    assert!((s - want_s).abs() < 1e-14 && (t - want_t).abs() < 1e-14);
    let rho: f64 = 0.4;
    let n = 3.0;
    let ll = -n / 2.0 * (1.0 - rho * rho).ln() - (t - rho * s) / (1.0 - rho * rho);
    assert!((m.loglik(&[rho]) - ll).abs() < 1e-12);
}

#[test]
fn catalog_errors() {
    assert_eq!(catalog_ids().len(), 8);
    let err = catalog::<f64>(&ModelSpec::new("weibull")).err().unwrap();
    assert!(matches!(err, HoaError::UnknownModel(_)));
    assert!(!err.is_numerical());
    let bad = ModelSpec::new("gamma_ratio").with_hyper("s", 1.6).with_hyper("a", -1.0);
    assert!(matches!(catalog::<f64>(&bad), Err(HoaError::InvalidInput(_))));
    assert!(catalog::<f64>(&ModelSpec::new("exp_pair").with_data(&[1.0, -2.0])).is_err());
}

#[test]
fn json_documents_load() {
    let doc = r#"{"id": "regression_scale", "hyper": {"errors": "student", "df": 4}, "data": [1.0, 3.0, 2.2, 0.4, 1.9]}"#;
    let spec: ModelSpec = serde_json::from_str(doc).unwrap();
    let m = spec.build::<f64>().unwrap();
    assert_eq!(m.id(), "regression_scale");
    assert_eq!(m.dim(), 2);
    let f32_model = spec.build::<f32>().unwrap();
    assert_eq!(f32_model.dim(), 2);
}

#[test]
fn models_refit_on_new_observations() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for spec in [
        ModelSpec::new("exp_mean").with_data(&[1.0, 2.0, 3.0]),
        ModelSpec::new("exp_pair").with_data(&[1.0, 2.0]),
        ModelSpec::new("bvn_corr").with_data(&[0.3, 0.1, 1.2, 0.8, -0.5, -0.9]),
        ModelSpec::new("poisson_glm").with_data(&[3.0, 4.0]),
    ] {
        let m = build(&spec);
        let f = fit_default(m.as_ref()).unwrap();
        let y = m.simulate(f.theta_hat.as_slice(), &mut rng).unwrap();
        assert_eq!(y.len(), m.observations().len());
        let m2 = m.with_observations(y.clone()).unwrap();
        assert_eq!(m2.observations(), y.as_slice());
        assert_eq!(m2.id(), m.id());
    }
}
