use std::fs;
use std::path::Path;

use bcm_core::harness::{read_report_body, run_experiment, run_into, CoefficientSpec, ExperimentConfig, Preset, Profile, REPORT_FILE};
use bcm_core::Error;
use num_complex::Complex64;

fn small() -> ExperimentConfig {
    ExperimentConfig {
        n_x: 31,
        lambdas: vec![Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.5)],
        alphas: vec![1e-3, 1e-4],
        noise: vec![0.0, 0.02],
        seed: Some(3),
        snapshot: true,
        ..ExperimentConfig::default()
    }
}

fn data_lines(dir: &Path, name: &str) -> Vec<String> {
    fs::read_to_string(dir.join(name)).unwrap().lines().map(str::to_string).collect()
}

#[test]
fn writes_report_controls_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_into(&small(), dir.path()).unwrap();
    assert_eq!(report.rows.len(), 8);
    let ids: Vec<usize> = report.rows.iter().map(|r| r.id).collect();
    assert_eq!(ids, (0..8).collect::<Vec<_>>());
    let lines = data_lines(dir.path(), REPORT_FILE);
    assert!(lines[0].starts_with('#'));
    assert!(lines[1].starts_with("preset,lambda_re,lambda_im,alpha,noise,seed,replicate,L00_re,L00_im"));
    assert!(lines[1].contains("truth_11_im,rel_frob_err"));
    assert_eq!(lines.len(), 2 + 8);
    let n_t = report.grid.n_t;
    for id in 0..8 {
        assert_eq!(data_lines(dir.path(), &format!("control_{id:05}.csv")).len(), 1 + n_t);
        assert_eq!(data_lines(dir.path(), &format!("snapshot_{id:05}.csv")).len(), 1 + 31);
    }
    for r in &report.rows {
        assert!(r.metrics.rel_frobenius.is_finite() && r.metrics.rel_frobenius >= 0.0);
        assert!(r.snapshot_rel_err.unwrap().is_finite());
        assert_eq!(r.seed, if r.noise > 0.0 { Some(3) } else { None });
    }
    assert_eq!(data_lines(dir.path(), "timings.csv").len(), 9);
}

#[test]
fn empty_lambda_list_is_no_work_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let cfg = ExperimentConfig { lambdas: vec![], out_dir: Some(out.clone()), ..small() };
    assert!(matches!(run_experiment(&cfg), Err(Error::NoWork(_))));
    assert!(!out.exists());
}

#[test]
fn missing_seed_is_rejected() {
    let cfg = ExperimentConfig { seed: None, ..small() };
    assert!(matches!(run_experiment(&cfg), Err(Error::MissingSeed(_))));
}

#[test]
fn identical_configs_give_identical_bodies() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_into(&small(), a.path()).unwrap();
    run_into(&ExperimentConfig { workers: 3, ..small() }, b.path()).unwrap();
    assert_eq!(read_report_body(a.path()).unwrap(), read_report_body(b.path()).unwrap());
    for id in 0..8 {
        let name = format!("control_{id:05}.csv");
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn cache_is_transparent() {
    let cache = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    run_into(&small(), dirs[0].path()).unwrap();
    let cached = ExperimentConfig { cache_dir: Some(cache.path().to_path_buf()), ..small() };
    run_into(&cached, dirs[1].path()).unwrap();
    assert!(fs::read_dir(cache.path()).unwrap().count() > 0);
    run_into(&cached, dirs[2].path()).unwrap();
    let bodies: Vec<String> = dirs.iter().map(|d| read_report_body(d.path()).unwrap()).collect();
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(bodies[1], bodies[2]);
}

#[test]
fn rows_before_a_failure_are_flushed() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("coef.csv");
    // q ≡ 0 makes λ = 0 a Neumann eigenvalue of the ground truth.
    fs::write(&table, "x,c,q\n-1,1,0\n1,1,0\n").unwrap();
    let cfg = ExperimentConfig {
        n_x: 21,
        coefficients: CoefficientSpec::parse(&format!("table:{}", table.display())).unwrap(),
        lambdas: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)],
        noise: vec![0.0],
        alphas: vec![1e-4],
        ..ExperimentConfig::default()
    };
    let out = dir.path().join("out");
    let err = run_into(&cfg, &out).unwrap_err();
    assert!(err.is_numerical(), "{err}");
    assert_eq!(data_lines(&out, REPORT_FILE).len(), 2 + 1);
}

#[test]
fn replicates_use_consecutive_seeds() {
    let cfg = ExperimentConfig { noise: vec![0.01], replicates: 2, lambdas: vec![Complex64::new(0.0, 0.0)], alphas: vec![1e-4], snapshot: false, ..small() };
    let r = run_experiment(&cfg).unwrap();
    let seeds: Vec<_> = r.rows.iter().map(|r| (r.replicate, r.seed)).collect();
    assert_eq!(seeds, vec![(0, Some(3)), (1, Some(4))]);
    assert_ne!(r.rows[0].l, r.rows[1].l);
}

#[test]
fn slow_media_are_rejected_before_any_work() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { horizon: 1.5, n_x: 21, ..small() };
    assert!(matches!(run_into(&cfg, dir.path()), Err(Error::NotControllable { .. })));
}

#[test]
fn experiment_one_ci_profile() {
    let cfg = ExperimentConfig::preset(Preset::Exp1, Profile::Ci);
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.rows.len(), 4);
    assert_eq!(r.grid.n_x, 101);
    let clean = &r.rows[0];
    assert_eq!(clean.noise, 0.0);
    assert!(clean.metrics.rel_frobenius <= 0.06, "{}", clean.metrics.rel_frobenius);
    assert!(clean.snapshot_rel_err.unwrap() <= 0.15);
}

#[test]
fn alpha_sweep_is_monotone_on_the_ci_grid() {
    // Below α = 1e-5 the ci grid sits on its discretization floor.
    let r = run_experiment(&ExperimentConfig::preset(Preset::Exp2, Profile::Ci)).unwrap();
    let e: Vec<f64> = r.rows.iter().map(|r| r.metrics.rel_frobenius).collect();
    assert!(e[..5].windows(2).all(|w| w[1] <= w[0]), "{e:?}");
    assert!(e[4] <= e[0] / 10.0, "{e:?}");
}
