mod common;

use moment_asymptotics::fit::{fit_exponent, fit_leading_term, FitError, RegimeCheck};
use moment_asymptotics::pipeline::*;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::path::PathBuf;

fn config(name: &str) -> RunConfig {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"));
    RunConfig::load(&p).unwrap()
}

fn small_reference() -> RunConfig {
    let mut c = config("so2_reference");
    c.mu_grid = MuGrid {
        min: 0.05,
        max: 0.1,
        count: 4,
    };
    c.fit_points = 4;
    c
}

fn geometric(hi: f64, lo: f64, k: usize) -> Vec<f64> {
    (0..k).map(|i| hi * (lo / hi).powf(i as f64 / (k - 1) as f64)).collect()
}

#[test]
fn synthetic_leading_term_is_recovered() {
    let mu = geometric(0.1, 0.02, 8);
    let vals: Vec<Complex64> = mu.iter().map(|m| Complex64::new(2.0 * PI * m * 3.0 + 5.0 * m * m, 0.0)).collect();
    let fit = fit_leading_term(&mu, &vals, &vec![0.0; 8], 1, RegimeCheck::default()).unwrap();
    assert!((fit.l0 - 3.0).abs() <= 1e-10);
    assert!((fit.c1 - 5.0 / (2.0 * PI)).abs() <= 1e-9);
}

#[test]
fn unconstrained_exponent_is_recovered() {
    let mu = geometric(0.1, 0.02, 8);
    let vals: Vec<Complex64> = mu.iter().map(|m| Complex64::new(m.powf(1.5), 0.0)).collect();
    let e = fit_exponent(&mu, &vals).unwrap();
    assert!((e - 1.5).abs() < 1e-12);
    assert!((e - 1.0).abs() > Tolerances::default().fit_exponent_tol);
}

#[test]
fn three_points_are_too_few() {
    let mu = [0.1, 0.05, 0.02];
    let vals = vec![Complex64::new(1.0, 0.0); 3];
    assert!(matches!(
        fit_leading_term(&mu, &vals, &[0.0; 3], 1, RegimeCheck::default()),
        Err(FitError::TooFewPoints { needed: 4, got: 3 })
    ));
}

#[test]
fn mu_grid_is_strictly_decreasing() {
    let g = MuGrid::default().values().unwrap();
    assert_eq!(g.len(), 12);
    assert_eq!((g[0], g[11]), (0.3, 0.02));
    assert!(g.windows(2).all(|w| w[0] > w[1] && w[1] > 0.0));
    let bad = MuGrid {
        min: 0.0,
        max: 0.1,
        count: 4,
    };
    assert!(bad.values().is_err());
}

#[test]
fn coarse_grid_is_not_asymptotic() {
    let mut c = config("so2_reference");
    c.mu_grid = MuGrid {
        min: 0.5,
        max: 2.0,
        count: 6,
    };
    c.fit_points = 6;
    let err = verify_pipeline(&c).unwrap_err();
    assert!(matches!(err, PipelineError::Fit(FitError::NotAsymptotic { .. })), "{err}");
    assert!(err.to_string().contains("shrink"));
}

#[test]
fn wide_algebra_configuration_passes() {
    let r = verify_pipeline(&config("so2_wide")).unwrap();
    for name in ["PASS_EXPONENT", "PASS_L0", "PASS_COAREA"] {
        assert!(r.verdict(name).unwrap().pass, "{name}: {}", r.verdict(name).unwrap().detail);
    }
    assert!(r.passed());
}

#[test]
fn null_configuration_passes() {
    let r = verify_pipeline(&config("so2_null")).unwrap();
    assert_eq!(r.l0_reference, 0.0);
    assert!(r.verdict("PASS_NULL").unwrap().pass);
    assert!(r.fit.is_none());
}

fn without_timestamp(r: &AsymptoticsReport) -> String {
    let mut v = serde_json::to_value(r).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    serde_json::to_string_pretty(&v).unwrap()
}

#[test]
fn reports_are_reproducible_and_round_trip() {
    let c = small_reference();
    let a = verify_pipeline(&c).unwrap();
    let b = verify_pipeline(&c).unwrap();
    assert_eq!(without_timestamp(&a), without_timestamp(&b));
    assert_eq!(a.table.len(), c.mu_grid.count);
    assert_eq!(a.config_hash, c.hash());

    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&a, dir.path()).unwrap();
    assert!(files.iter().all(|f| f.exists()));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "mu,re_I,im_I,err_estimate,method");
    assert_eq!(lines.count(), c.mu_grid.count);
    let back = RunConfig::load(&dir.path().join("report.json")).unwrap();
    assert_eq!(back, c);
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let again: AsymptoticsReport = serde_json::from_str(&text).unwrap();
    assert_eq!(without_timestamp(&again), without_timestamp(&a));
}

#[test]
fn unwritable_path_is_io_error() {
    let c = small_reference();
    let r = verify_pipeline(&c).unwrap();
    let f = tempfile::NamedTempFile::new().unwrap();
    let err = emit_report(&r, &f.path().join("sub")).unwrap_err();
    assert!(matches!(err, PipelineError::Io(_)));
}

#[test]
fn thread_count_does_not_change_results() {
    let c = small_reference();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| verify_pipeline(&c).unwrap())
    };
    assert_eq!(without_timestamp(&run(1)), without_timestamp(&run(4)));
}

#[test]
fn analysis_of_shipped_configs() {
    let a = analyze(&config("t2")).unwrap();
    assert_eq!((a.n, a.d, a.kappa), (4, 2, 2));
    assert_eq!(a.branches.len(), 1);
    assert!(a.validation.is_valid());
    let a = analyze(&config("so3")).unwrap();
    assert_eq!(a.kappa, 2);
    assert_eq!(a.branches[0].jacobian_exponents, vec![2]);
}
