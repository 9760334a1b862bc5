use padic_sea::ensembles::EnsembleSpec;
use padic_sea::harness::stats::{compare_pmf, histogram, normalize, Pmf};
use padic_sea::harness::{run_bulk_convergence, run_edge_convergence, ExperimentConfig, ReferenceKind};
use padic_sea::qcalc::{c_n, qpow, rat, to_f64, CnMode, Cutoff, Q};
use padic_sea::rng::RngHandle;
use padic_sea::signatures::ExtInt::{self, Fin};
use num_traits::One;
use rand::Rng;

fn cfg(ensemble: EnsembleSpec, r_n: u64, times: Vec<f64>, samples: u64, init: Option<Vec<u32>>) -> ExperimentConfig {
    ExperimentConfig {
        experiment: "test".into(),
        ensemble,
        r_n,
        times,
        samples,
        init,
        window: (-2, 2),
        depth: 6,
        reference_samples: None,
        seed: 5,
    }
}

fn edge_cfg(samples: u64) -> ExperimentConfig {
    cfg(EnsembleSpec::fixed_sn(vec![1, 0, 0, 0, 0, 0], 2, 2), 6, vec![0.25, 1.0], samples, Some(vec![2, 2, 1, 1, 0, 0]))
}

#[test]
fn compare_trivial_cases() {
    let a: Pmf<u8> = [(0, 0.5), (1, 0.5)].into_iter().collect();
    assert_eq!(compare_pmf(&a, &a, 100, None).unwrap().total_variation, 0.0);
    let x: Pmf<u8> = [(0, 1.0)].into_iter().collect();
    let y: Pmf<u8> = [(1, 1.0)].into_iter().collect();
    assert_eq!(compare_pmf(&x, &y, 100, None).unwrap().total_variation, 1.0);
    assert!(compare_pmf(&Pmf::<u8>::new(), &a, 100, None).is_err());
}

#[test]
fn binomial_calibration() {
    let (n, p) = (20u64, 0.3f64);
    let mut reference: Pmf<u64> = Pmf::new();
    let mut w = (1.0 - p).powi(n as i32);
    for k in 0..=n {
        reference.insert(k, w);
        w *= (n - k) as f64 / (k + 1) as f64 * p / (1.0 - p);
    }
    let mut rng = RngHandle::new(77, 0).rng();
    let draws: Vec<u64> = (0..10_000).map(|_| (0..n).filter(|_| rng.random_bool(p)).count() as u64).collect();
    let r = compare_pmf(&normalize(&histogram(draws)), &reference, 10_000, None).unwrap();
    assert!(r.max_abs_z < 4.0, "max z {}", r.max_abs_z);
    assert!(r.p_value > 1e-3);
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    let c = edge_cfg(400);
    let a = serde_json::to_string(&run_edge_convergence(&c).unwrap()).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| serde_json::to_string(&run_edge_convergence(&c).unwrap()).unwrap());
    assert_eq!(a, b);
    let bulk = cfg(EnsembleSpec::iid_haar(8, 2, 1), 3, vec![0.5, 1.0], 300, None);
    let x = serde_json::to_string(&run_bulk_convergence(&bulk).unwrap()).unwrap();
    let y = pool.install(|| serde_json::to_string(&run_bulk_convergence(&bulk).unwrap()).unwrap());
    assert_eq!(x, y);
}

#[test]
fn report_embeds_config_and_hash() {
    let c = edge_cfg(200);
    let r = run_edge_convergence(&c).unwrap();
    assert_eq!(r.config, c);
    assert_eq!(r.input_hash, c.content_hash());
    assert_eq!(r.input_hash.len(), 64);
    let mut other = c.clone();
    other.seed += 1;
    assert_ne!(other.content_hash(), c.content_hash());
}

#[test]
fn zero_time_is_point_mass_at_initial_window() {
    let c = cfg(EnsembleSpec::iid_haar(8, 2, 2), 3, vec![0.0], 200, Some(vec![2, 2, 2, 1, 1, 0, 0, 0]));
    let r = run_bulk_convergence(&c).unwrap();
    assert_eq!(r.steps, vec![0]);
    let emp = &r.single_time[0].empirical;
    assert_eq!(emp.len(), 1);
    assert_eq!(emp[0].1, 1.0);
    // Window -2..=2 around r_N = 3 reads SN indices 1..=5.
    let expect: Vec<ExtInt> = [2, 2, 2, 1, 1].into_iter().map(Fin).collect();
    assert_eq!(emp[0].0, expect);
    assert_eq!(r.single_time[0].total_variation, 0.0);

    let e = run_edge_convergence(&cfg(EnsembleSpec::fixed_sn(vec![1, 0, 0], 2, 2), 3, vec![0.0], 50, Some(vec![2, 1, 0])))
        .unwrap();
    assert_eq!(e.single_time[0].empirical.len(), 1);
    assert_eq!(e.single_time[0].total_variation, 0.0);
}

#[test]
fn small_edge_run_uses_generator() {
    let r = run_edge_convergence(&edge_cfg(3000)).unwrap();
    assert_eq!(r.reference, ReferenceKind::Generator);
    assert_eq!(r.c_n, 64.0);
    assert_eq!(r.steps, vec![16, 64]);
    assert!(r.reference_escape.unwrap() < 1e-6);
    for s in &r.single_time {
        let mass: f64 = s.reference.iter().map(|x| x.1).sum();
        assert!((mass - 1.0).abs() < 1e-9);
        // Finite N: only a loose diagnostic bound.
        assert!(s.total_variation < 0.1, "TV {}", s.total_variation);
    }
    assert!(r.warnings.is_empty(), "{:?}", r.warnings);
}

#[test]
fn flat_bulk_run_reports_depth_gap() {
    let r = run_bulk_convergence(&cfg(EnsembleSpec::iid_haar(10, 2, 1), 4, vec![1.0], 1000, None)).unwrap();
    assert_eq!(r.reference, ReferenceKind::DepthApproximation);
    assert!(r.depth_gap.is_some());
    assert!(r.joint.is_none());
}

#[test]
fn invalid_configs_are_rejected() {
    let mut c = edge_cfg(10);
    c.times = vec![1.0, 0.5];
    assert!(c.validate().is_err());
    let mut c = edge_cfg(10);
    c.samples = 0;
    assert!(c.validate().is_err());
    let c = cfg(EnsembleSpec::iid_haar(4, 2, 1), 5, vec![1.0], 10, None);
    assert!(run_bulk_convergence(&c).is_err());
}

#[test]
fn time_constants() {
    // Enumeration of the 16 matrices over F_2: E[1(X <= 1)(2^X - 1)] = 9/16.
    let v = c_n(&EnsembleSpec::iid_haar(2, 2, 1), 1, CnMode::Exact(Cutoff::Indicator)).unwrap();
    assert_eq!(v.exact.unwrap(), rat(32, 9));
    let t = rat(1, 2);
    let a = c_n(&EnsembleSpec::corner(6, 3, 2, 1), 4, CnMode::Asymptotic).unwrap();
    assert!((a.value - to_f64(&(qpow(&t, -4) / (Q::one() - qpow(&t, 3))))).abs() < 1e-12);
    let e = c_n(&EnsembleSpec::iid_haar(30, 2, 1), 5, CnMode::Exact(Cutoff::Indicator)).unwrap();
    let s = c_n(&EnsembleSpec::iid_haar(30, 2, 1), 5, CnMode::Asymptotic).unwrap();
    assert!((e.value / s.value - 1.0).abs() < 0.01);
    assert!(c_n(&EnsembleSpec::fixed_sn(vec![0, 0], 2, 1), 1, CnMode::Asymptotic).is_err());
}
