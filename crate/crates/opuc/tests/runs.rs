use std::path::Path;

use opuc::config::ExperimentConfig;
use opuc::experiments::{self, RunOptions};
use opuc::formats::{self, MartingaleRow, SupnormRow};
use opuc_core::szego::CoeffPair;
use opuc_core::verblunsky::sample_parameters;

fn config(text: &str, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::parse(text).unwrap();
    c.outputs = out.to_path_buf();
    c
}

fn one_thread() -> RunOptions {
    RunOptions { threads: Some(1) }
}

#[test]
fn zero_envelope_sups_are_one() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        "max_degree = 512\ntrajectories = 3\nsuites = supnorm",
        dir.path(),
    );
    let s = experiments::run_with(&c, one_thread()).unwrap();
    assert!(s.failures.is_empty());
    assert_eq!(s.exit_code(), 0);
    let rows: Vec<SupnormRow> = formats::read_csv(&dir.path().join("supnorm.csv")).unwrap();
    assert_eq!(rows.len(), 3 * 10);
    let cap = 1.0 / (1.0 - std::f64::consts::PI / 32.0);
    for r in &rows {
        assert!((r.grid_max - 1.0).abs() <= 1e-10);
        assert!(r.upper_bound <= cap);
    }
    assert_eq!(s.manifest.plateau_ratio, Some(1.0));
    let totals: Vec<_> = s
        .manifest
        .totals
        .iter()
        .map(|t| (t.file.as_str(), t.rows))
        .collect();
    assert_eq!(
        totals,
        [("oracle.csv", 4), ("supnorm.csv", 30), ("plateau.csv", 10)]
    );
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn compare_identical_regimes() {
    let text = "envelope.kind = power-decay\nenvelope.exponent = 1\nenvelope.scale = 0.5\n\
                randomizer.seed = 4\ntrajectories = 6\nmax_degree = 256";
    let a = ExperimentConfig::parse(text).unwrap();
    let rows = experiments::compare_regimes_with(&a, &a, one_thread()).unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.ratio == 1.0 && r.a_p90 >= r.a_median));
}

#[test]
fn compare_against_closed_form() {
    let a = ExperimentConfig::parse("max_degree = 64").unwrap();
    let b = ExperimentConfig::parse(
        "envelope.kind = explicit\nenvelope.values = 0.5\nrandomizer.kind = rademacher\nmax_degree = 64",
    )
    .unwrap();
    for r in experiments::compare_regimes_with(&a, &b, one_thread()).unwrap() {
        assert_eq!(r.a_grid_median, 1.0);
        assert_eq!(
            r.b_grid_median,
            1.5 * r.a_grid_median,
            "degree {}",
            r.degree
        );
        assert!(r.ratio >= 1.5);
    }

    let c = ExperimentConfig::parse("max_degree = 32").unwrap();
    let err = experiments::compare_regimes_with(&a, &c, one_thread()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn coefficient_files_match_the_recursion() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        "envelope.kind = power-decay\nenvelope.exponent = 1\nenvelope.scale = 0.5\n\
         trajectories = 2\nmax_degree = 40\ncheckpoints = 10,40\ncoefficients = true\nsuites = supnorm",
        dir.path(),
    );
    experiments::run_with(&c, one_thread()).unwrap();
    for t in 0..2 {
        let path = dir
            .path()
            .join(format!("coefficients/trajectory_{t:06}.bin"));
        let mut f = std::fs::File::open(path).unwrap();
        let read = formats::read_coeff_pair(&mut f, 1e-12).unwrap();
        let alphas = sample_parameters(&c.envelope, &c.randomizer, t, 40);
        assert_eq!(read, CoeffPair::from_alphas(&alphas).unwrap());
    }
}

#[test]
fn statistical_suites_on_a_small_budget() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        "envelope.kind = power-decay\nenvelope.exponent = 1\nenvelope.scale = 0.5\n\
         randomizer.seed = 11\nmax_degree = 16\n\
         suites = martingale,moments,lattice\n\
         martingale.prefixes = 2\nmartingale.targets = 12\nmartingale.trials = 2000\nmartingale.repetitions = 3\n\
         moments.blocks = 0,1\nmoments.trials = 2000\nlattice.repeats = 20",
        dir.path(),
    );
    let s = experiments::run_with(&c, RunOptions { threads: Some(2) }).unwrap();
    assert!(s.failures.is_empty(), "{:?}", s.manifest.failures);
    assert_eq!(s.manifest.repetition_seeds, vec![11, 12, 13]);
    assert_eq!(s.manifest.ks_statistics.len(), 2);
    let rows: Vec<MartingaleRow> = formats::read_csv(&dir.path().join("martingale.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows
        .iter()
        .all(|r| r.trials == 2000 && r.residual.is_finite()));
    for file in ["moments.csv", "lattice.csv", "oracle.csv"] {
        assert!(dir.path().join(file).exists(), "{file}");
    }
}

#[test]
fn asymmetric_multipliers_are_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        "envelope.kind = power-decay\nenvelope.exponent = 1\nenvelope.scale = 0.5\n\
         randomizer.kind = rademacher\nmax_degree = 16\nsuites = moments\nmoments.trials = 500",
        dir.path(),
    );
    let s = experiments::run_with(&c, one_thread()).unwrap();
    assert!(s
        .manifest
        .notes
        .iter()
        .any(|n| n.contains("not rotationally symmetric")));
}

#[test]
fn growing_regime_falsifies_a_tight_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(
        "envelope.kind = sparse-geometric\nenvelope.T = 2\nenvelope.epsilon = 0.9\n\
         trajectories = 4\nmax_degree = 2048\nsuites = supnorm\nplateau_threshold = 1.0",
        dir.path(),
    );
    let s = experiments::run_with(&c, one_thread()).unwrap();
    assert_eq!(s.exit_code(), 1);
    let f = &s.failures[0];
    assert_eq!((f.suite, f.degree), ("supnorm", 2048));
    assert!(f.invariant.contains("plateau ratio"));
    assert_eq!(s.manifest.failures.len(), s.failures.len());
    assert!(dir.path().join("supnorm.csv").exists());
    assert_eq!(s.into_result().unwrap_err().exit_code(), 1);
}

#[test]
fn sharpness_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let c = config("suites = sharpness", dir.path());
    let err = experiments::run_with(&c, one_thread()).unwrap_err();
    assert_eq!(err.exit_code(), 2);

    let mut c = config(
        "envelope.kind = sparse-geometric\nenvelope.T = 12\nenvelope.epsilon = 0.01\nsuites = sharpness",
        dir.path(),
    );
    c.sharpness.levels = 5;
    let err = experiments::run_with(&c, one_thread()).unwrap_err();
    assert_eq!(err.exit_code(), 3);

    c.sharpness.levels = 3;
    c.sharpness.grid = 1 << 12;
    let err = experiments::run_with(&c, one_thread()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn small_sparse_base_reports_growth_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config(
        "envelope.kind = sparse-geometric\nenvelope.T = 2\nenvelope.epsilon = 0.5\nsuites = sharpness",
        dir.path(),
    );
    c.sharpness.levels = 8;
    c.sharpness.grid = 1 << 15;
    let s = experiments::run_with(&c, one_thread()).unwrap();
    assert!(s.failures.is_empty());
    assert!(dir.path().join("growth.csv").exists());
    assert!(!dir.path().join("sharpness.csv").exists());
    assert_eq!(s.manifest.notes.len(), 1);
}

#[test]
fn worker_count_does_not_change_tables() {
    let text = "envelope.kind = power-decay\nenvelope.exponent = 0.75\nenvelope.scale = 0.5\n\
                trajectories = 9\nmax_degree = 512\nsuites = supnorm,moments\nmoments.trials = 300";
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    experiments::run_with(&config(text, a.path()), one_thread()).unwrap();
    experiments::run_with(&config(text, b.path()), RunOptions { threads: Some(4) }).unwrap();
    for file in ["supnorm.csv", "plateau.csv", "moments.csv", "oracle.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        assert_eq!(x, std::fs::read(b.path().join(file)).unwrap(), "{file}");
    }
}
