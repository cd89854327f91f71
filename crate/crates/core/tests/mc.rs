use hoa_core::mc::{run_coverage, CoverageConfig};
use hoa_core::models::ModelSpec;
use hoa_core::tem::Method;

fn exp_mean_config(replicates: usize, seed: u64) -> CoverageConfig {
    CoverageConfig::new(
        ModelSpec::new("exp_mean").with_hyper("n", 5),
        vec![1.0],
        replicates,
        vec![0.90, 0.95],
        seed,
    )
}

#[test]
fn exponential_mean_rstar_coverage() {
    let rep = run_coverage(&exp_mean_config(10_000, 42)).unwrap();
    assert!(!rep.unreliable);
    let rstar = rep.method(Method::RStar).unwrap();
    let wald = rep.method(Method::Wald).unwrap();
    assert!((0.940..=0.960).contains(&rstar.coverage[1]), "r* coverage {}", rstar.coverage[1]);
    assert!(wald.coverage[1] < rstar.coverage[1], "wald {} r* {}", wald.coverage[1], rstar.coverage[1]);
    for m in &rep.methods {
        assert_eq!(m.successes + m.failures, 10_000);
    }
}

#[test]
fn exponential_mean_rstar_pvalues_uniform() {
    let rep = run_coverage(&exp_mean_config(2000, 7)).unwrap();
    let ks = rep.method(Method::RStar).unwrap().ks;
    assert!(ks < 1.63 / 2000f64.sqrt(), "ks {ks}");
}

#[test]
fn results_independent_of_worker_count() {
    let mut a = exp_mean_config(300, 11);
    a.workers = Some(1);
    let mut b = a.clone();
    b.workers = Some(4);
    let ra = run_coverage(&a).unwrap();
    let rb = run_coverage(&b).unwrap();
    assert_eq!(ra.to_json().unwrap(), rb.to_json().unwrap());
    for (x, y) in ra.pvalues.iter().zip(&rb.pvalues) {
        for m in Method::ALL {
            assert_eq!(x.get(m).map(f64::to_bits), y.get(m).map(f64::to_bits));
        }
    }
}

#[test]
fn location_scale_coverage_runs() {
    let spec = ModelSpec::new("regression_scale").with_hyper("n", 8);
    let cfg = CoverageConfig::new(spec, vec![0.0, 1.0], 200, vec![0.95], 3);
    match run_coverage(&cfg) {
        Ok(rep) => assert_eq!(rep.methods.len(), 4),
        Err(e) => panic!("{e}"),
    }
}
