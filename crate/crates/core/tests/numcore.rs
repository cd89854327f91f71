use hoa_core::models::{catalog, Model, ModelSpec};
use hoa_core::numcore::{gradient, gram_det_sqrt, hessian, RealMatrix, RealVector};
use hoa_core::optim::fit_default;
use hoa_core::HoaError;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gamma_ll(theta: &[f64]) -> f64 {
    -3.0 * (1.6 / theta[0] + theta[0] / 1.6)
}

fn exp_pair_ll(theta: &[f64]) -> f64 {
    let (psi, lam) = (theta[0], theta[1]);
    2.0 * lam.ln() + psi.ln() - lam * (psi * 1.0 + 2.0)
}

#[test]
fn gradient_examples() {
    let g = gradient(|x: &[f64]| x[0] * x[0], &[3.0]).unwrap();
    assert!((g[0] - 6.0).abs() < 1e-6);
    assert!(gradient(gamma_ll, &[1.6]).unwrap()[0].abs() < 1e-6);
    let g = gradient(exp_pair_ll, &[2.0, 0.5]).unwrap();
    assert!(g.iter().all(|v| v.abs() < 1e-6));
}

#[test]
fn hessian_examples() {
    let h = hessian(gamma_ll, &[1.6]).unwrap();
    assert!((-h[(0, 0)] - 2.0 * 3.0 / (1.6 * 1.6)).abs() < 1e-5);
    let h = hessian(|x: &[f64]| -x[0] * x[0] / 2.0, &[0.7]).unwrap();
    assert!((h[(0, 0)] + 1.0).abs() < 1e-6);
    let h = hessian(exp_pair_ll, &[2.0, 0.5]).unwrap();
    assert!((h.neg().det().unwrap() - 1.0).abs() < 1e-5);
    assert!(h.is_symmetric());
}

#[test]
fn non_finite_probe_is_reported() {
    let err = gradient(|x: &[f64]| x[0].ln(), &[0.0]).unwrap_err();
    assert!(matches!(err, HoaError::Differentiation { .. }), "{err:?}");
}

#[test]
fn gram_determinant_examples() {
    let a = RealMatrix::from_rows(&[vec![-1.0], vec![-1.0]]).unwrap();
    assert!((gram_det_sqrt(&a).unwrap() - 2f64.sqrt()).abs() < 1e-14);
    assert!((gram_det_sqrt(&RealMatrix::<f64>::identity(3)).unwrap() - 1.0).abs() < 1e-14);
    let a = RealMatrix::<f64>::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
    assert!((gram_det_sqrt(&a).unwrap() - 5.0).abs() < 1e-14);
    let rank_one = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
    assert!(matches!(gram_det_sqrt(&rank_one), Err(HoaError::Singular { .. })));
}

#[test]
fn vectors_reject_non_finite_entries() {
    assert!(RealVector::new(vec![1.0, f64::NAN]).is_err());
    assert!(RealMatrix::from_rows(&[vec![f64::INFINITY]]).is_err());
}

fn catalog_fixtures() -> Vec<Box<dyn Model<f64>>> {
    let specs = [
        ModelSpec::new("gamma_ratio").with_hyper("s", 1.6).with_hyper("a", 3.0),
        ModelSpec::new("exp_pair").with_data(&[1.0, 2.0]),
        ModelSpec::new("bvn_corr").with_data(&[0.3, 0.1, 1.2, 0.8, -0.5, -0.9, 0.4, 0.9, -1.1, -0.2]),
        ModelSpec::new("regression_scale").with_rows(&[
            vec![1.1, 1.0, 0.0],
            vec![2.3, 1.0, 1.0],
            vec![2.9, 1.0, 2.0],
            vec![4.4, 1.0, 3.0],
            vec![4.8, 1.0, 4.0],
        ]),
        ModelSpec::new("regression_scale")
            .with_hyper("errors", "student")
            .with_hyper("df", 4)
            .with_data(&[1.0, 3.0, 2.2, 0.4, 1.9]),
        ModelSpec::new("exp_mean").with_data(&[0.4, 1.3, 2.2, 0.7, 1.1]),
        ModelSpec::new("linexp_2par").with_data(&[1.2, 0.4, 2.1, 1.7, 0.9, 1.3]),
        ModelSpec::new("poisson_glm").with_rows(&[
            vec![2.0, 1.0, 0.0],
            vec![3.0, 1.0, 1.0],
            vec![7.0, 1.0, 2.0],
            vec![9.0, 1.0, 3.0],
        ]),
        ModelSpec::new("binomial_glm").with_rows(&[
            vec![1.0, 6.0, 1.0, -1.0],
            vec![3.0, 6.0, 1.0, 0.0],
            vec![4.0, 6.0, 1.0, 1.0],
            vec![5.0, 6.0, 1.0, 2.0],
        ]),
    ];
    specs.iter().map(|s| catalog::<f64>(s).unwrap()).collect()
}

fn rel_close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-5 * b.abs().max(scale)
}

#[test]
fn closed_forms_match_differences_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for model in catalog_fixtures() {
        let fit = fit_default(model.as_ref()).unwrap();
        let dom = model.domain();
        let mut checked = 0;
        while checked < 20 {
            let th: Vec<f64> = fit
                .theta_hat
                .iter()
                .map(|&t| t + 0.3 * (1.0 + t.abs()) * rng.random_range(-1.0..1.0))
                .collect();
            let interior = th
                .iter()
                .enumerate()
                .all(|(i, &t)| t - dom.lower[i] > 0.1 && dom.upper[i] - t > 0.1);
            if !interior {
                continue;
            }
            checked += 1;
            let ll = |t: &[f64]| model.loglik(t);
            let num_g = gradient(ll, &th).unwrap();
            let num_h = hessian(ll, &th).unwrap();
            let g_scale = num_g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            if let Some(g) = model.score(&th) {
                for (a, b) in g.iter().zip(&num_g) {
                    assert!(rel_close(*a, *b, g_scale), "{} score {a} vs {b} at {th:?}", model.id());
                }
            }
            if let Some(j) = model.obs_info(&th) {
                let h_scale = num_h.as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()));
                for (a, b) in j.as_slice().iter().zip(num_h.as_slice()) {
                    assert!(rel_close(*a, -b, h_scale), "{} info {a} vs {} at {th:?}", model.id(), -b);
                }
            }
            if let Some(dy) = model.dloglik_dy(&th) {
                let y0 = model.observations().to_vec();
                let num = gradient(|y: &[f64]| model.loglik_at(&th, y), &y0).unwrap();
                let scale = num.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                for (a, b) in dy.iter().zip(&num) {
                    assert!(rel_close(*a, *b, scale), "{} dl/dy {a} vs {b}", model.id());
                }
            }
        }
    }
}

fn matrix(rows: usize, cols: usize, entries: &[f64]) -> RealMatrix<f64> {
    RealMatrix::from_row_major(rows, cols, entries[..rows * cols].to_vec()).unwrap()
}

proptest! {
    #[test]
    fn hessian_is_exactly_symmetric(a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.1f64..3.0) {
        let f = |x: &[f64]| (a * x[0] * x[1]).sin() + b * x[0].powi(3) * x[2] + (c + x[1] * x[1]).ln();
        let h = hessian(f, &[0.3, -0.7, 1.1]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(h[(i, j)].to_bits(), h[(j, i)].to_bits());
            }
        }
    }

    #[test]
    fn gram_determinant_scales_with_det(
        a in prop::collection::vec(-3.0f64..3.0, 12),
        m in prop::collection::vec(-2.0f64..2.0, 9),
    ) {
        let a = matrix(4, 3, &a);
        let mut mm = matrix(3, 3, &m);
        for i in 0..3 {
            mm[(i, i)] += 4.0;
        }
        let base = gram_det_sqrt(&a);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        prop_assume!(base > 1e-3);
        let scaled = gram_det_sqrt(&a.matmul(&mm).unwrap()).unwrap();
        let want = base * mm.det().unwrap().abs();
        prop_assert!((scaled - want).abs() <= 1e-10 * want, "{} vs {}", scaled, want);
    }
}
