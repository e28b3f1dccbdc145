//! Experiment orchestration: runs the configured suites, writes one CSV per
//! suite plus `manifest.json`, and checks every invariant a suite can
//! falsify.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use opuc_core::rng::StreamRng;
use opuc_core::sharpness::{self, BlowupWitness};
use opuc_core::stats::{self, MartingaleResidual, MartingaleSetup, MomentReport};
use opuc_core::supnorm::{self, CertifiedSup};
use opuc_core::szego::{self, CoeffPair};
use opuc_core::verblunsky::{sample_parameters, EnvelopeKind, MultiplierKind};
use opuc_core::{Complex64, Error as CoreError, TAU};

use crate::config::{ExperimentConfig, Suite};
use crate::error::{Falsification, Result, RunError};
use crate::formats::{self, *};
use crate::parallel;

/// Largest `‖Gram − I‖_max` the oracle canary accepts.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

/// Modulus cap of the random oracle ensembles.
pub const ORACLE_MAX_MODULUS: f64 = 0.9;

/// Martingale residuals count as consistent within this many standard
/// errors.
pub const MARTINGALE_Z: f64 = 4.0;

/// Minimum fraction of consistent martingale repetitions per `(n, j)` cell.
pub const MARTINGALE_COVERAGE: f64 = 0.95;

/// Moment and lattice checks fail only beyond this many standard errors.
pub const FALSIFICATION_Z: f64 = 6.0;

/// KS p-values below this falsify equality in law of `|A_k|` and `|B_k|`.
pub const KS_FALSIFICATION_LEVEL: f64 = 1e-6;

/// Absolute slack for comparisons that are exact up to rounding.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// Stream id of the fixed martingale prefix, disjoint from tail streams.
pub const PREFIX_STREAM: u64 = u64::MAX;

const ORACLE_STREAM: u64 = 1 << 48;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker count; `None` defers to `OPUC_THREADS`, then to rayon.
    pub threads: Option<usize>,
}

impl RunOptions {
    pub fn from_env() -> Result<Self> {
        Ok(Self {
            threads: parallel::threads_from_env()?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: Manifest,
    pub failures: Vec<Falsification>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }

    /// `Err` naming the first falsified invariant, if any.
    pub fn into_result(self) -> Result<Self> {
        match self.failures.first() {
            Some(f) => Err(RunError::Falsified(f.clone())),
            None => Ok(self),
        }
    }
}

#[derive(Default)]
struct Collector {
    files: Vec<PathBuf>,
    totals: Vec<SuiteTotal>,
    failures: Vec<Falsification>,
    notes: Vec<String>,
    plateau_ratio: Option<f64>,
    ks: Vec<KsSummary>,
    repetition_seeds: Vec<u64>,
}

impl Collector {
    fn table<T: serde::Serialize>(
        &mut self,
        dir: &Path,
        suite: Suite,
        file: &str,
        rows: &[T],
    ) -> Result<()> {
        let path = dir.join(file);
        formats::write_csv(&path, rows)?;
        self.totals.push(SuiteTotal {
            suite: suite.name().into(),
            file: file.into(),
            rows: rows.len(),
        });
        self.files.push(path);
        Ok(())
    }

    fn fail(&mut self, suite: Suite, invariant: String, seed: u64, trajectory: u64, degree: u64) {
        self.failures.push(Falsification {
            suite: suite.name(),
            invariant,
            seed,
            trajectory,
            degree,
        });
    }
}

/// Runs `config` with the worker count taken from the environment.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    run_with(config, RunOptions::from_env()?)
}

pub fn run_with(config: &ExperimentConfig, options: RunOptions) -> Result<RunSummary> {
    config.validate()?;
    let started = Instant::now();
    let started_unix_secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let dir = config.outputs.clone();
    fs::create_dir_all(&dir)?;
    let pool = parallel::build_pool(options.threads)?;
    let mut out = Collector::default();

    pool.install(|| -> Result<()> {
        oracle_suite(config, &dir, &mut out)?;
        for suite in &config.suites {
            match suite {
                Suite::Supnorm => supnorm_suite(config, &dir, &mut out)?,
                Suite::Martingale => martingale_suite(config, &dir, &mut out)?,
                Suite::Moments => moments_suite(config, &dir, &mut out)?,
                Suite::Lattice => lattice_suite(config, &dir, &mut out)?,
                Suite::Sharpness => sharpness_suite(config, &dir, &mut out)?,
                Suite::Oracle => {}
            }
        }
        Ok(())
    })?;

    let manifest = Manifest {
        name: config.name.clone(),
        library_version: env!("CARGO_PKG_VERSION").into(),
        config: config.to_text(),
        seed: config.seed(),
        repetition_seeds: out.repetition_seeds,
        threads: pool.current_num_threads(),
        totals: out.totals,
        plateau_ratio: out.plateau_ratio,
        ks_statistics: out.ks,
        failures: out.failures.iter().map(ToString::to_string).collect(),
        notes: out.notes,
        started_unix_secs,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    let manifest_path = dir.join("manifest.json");
    formats::write_manifest(&manifest_path, &manifest)?;
    out.files.push(manifest_path);
    Ok(RunSummary {
        output_dir: dir,
        files: out.files,
        manifest,
        failures: out.failures,
    })
}

/// Random parameters `α_j = v·0.9·e^{2πiu}` with `u, v` uniform, used by
/// the oracle canary.
pub fn oracle_ensemble(seed: u64, n: usize) -> Vec<Complex64> {
    let mut r = StreamRng::new(seed, ORACLE_STREAM + n as u64);
    (0..n)
        .map(|_| {
            let phase = TAU * r.next_f64();
            Complex64::from_polar(ORACLE_MAX_MODULUS * r.next_f64(), phase)
        })
        .collect()
}

pub fn oracle_rows(seed: u64, degrees: &[usize]) -> Result<Vec<OracleRow>> {
    degrees
        .iter()
        .map(|&n| {
            let alphas = oracle_ensemble(seed, n);
            let defect = szego::orthogonality_oracle(&alphas)?.identity_defect();
            let m = 8 * (n + 1).next_power_of_two();
            let trapezoid_defect = szego::trapezoid_gram(&alphas, m)?.identity_defect();
            Ok(OracleRow {
                n,
                defect,
                trapezoid_m: m,
                trapezoid_defect,
            })
        })
        .collect()
}

fn oracle_suite(config: &ExperimentConfig, dir: &Path, out: &mut Collector) -> Result<()> {
    let rows = oracle_rows(config.seed(), &config.oracle_degrees)?;
    for row in &rows {
        if row.defect.is_nan() || row.defect > ORACLE_TOLERANCE {
            out.fail(
                Suite::Oracle,
                format!("‖Gram − I‖ = {:e} exceeds {ORACLE_TOLERANCE:e}", row.defect),
                config.seed(),
                ORACLE_STREAM + row.n as u64,
                row.n as u64,
            );
        }
    }
    out.table(dir, Suite::Oracle, "oracle.csv", &rows)
}

/// Certified sups of every trajectory at every checkpoint.
pub fn supnorm_records(config: &ExperimentConfig) -> Result<Vec<Vec<CertifiedSup>>> {
    let env = &config.envelope;
    let rng = &config.randomizer;
    parallel::try_ordered_map(0..config.trajectories as u64, |t| {
        let alphas = sample_parameters(env, rng, t, config.max_degree);
        supnorm::sup_trajectory_with_budget(
            &alphas,
            &config.checkpoints,
            config.oversample,
            config.degree_budget,
        )
        .map_err(|p| RunError::from(p.error))
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => values[n / 2],
        _ => 0.5 * (values[n / 2 - 1] + values[n / 2]),
    }
}

/// Nearest-rank 90th percentile.
fn p90(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    if values.is_empty() {
        return f64::NAN;
    }
    let rank = (0.9 * values.len() as f64).ceil() as usize;
    values[rank.clamp(1, values.len()) - 1]
}

pub fn plateau_rows(checkpoints: &[usize], records: &[Vec<CertifiedSup>]) -> Vec<PlateauRow> {
    checkpoints
        .iter()
        .enumerate()
        .map(|(i, &degree)| {
            let mut upper: Vec<f64> = records.iter().map(|r| r[i].upper_bound).collect();
            let mut grid: Vec<f64> = records.iter().map(|r| r[i].grid_max).collect();
            PlateauRow {
                degree,
                median_upper_bound: median(&mut upper),
                p90_upper_bound: p90(&mut upper),
                median_grid_max: median(&mut grid),
            }
        })
        .collect()
}

/// Median certified sup at the final checkpoint over that at half the
/// final degree, when both are checkpoints.
pub fn plateau_ratio(rows: &[PlateauRow]) -> Option<f64> {
    let last = rows.last()?;
    let half = rows.iter().find(|r| 2 * r.degree == last.degree)?;
    Some(last.median_upper_bound / half.median_upper_bound)
}

fn supnorm_suite(config: &ExperimentConfig, dir: &Path, out: &mut Collector) -> Result<()> {
    let records = supnorm_records(config)?;
    let mut rows = Vec::new();
    for (t, sups) in records.iter().enumerate() {
        for s in sups {
            if s.upper_bound.is_nan() || s.upper_bound < s.grid_max {
                out.fail(
                    Suite::Supnorm,
                    "certified bound below grid maximum".into(),
                    config.seed(),
                    t as u64,
                    s.degree as u64,
                );
            }
            // the grid mean of Φ*_n is its constant coefficient 1
            if s.grid_max.is_nan() || s.grid_max < 1.0 - 1e-9 {
                out.fail(
                    Suite::Supnorm,
                    format!("grid maximum {} below 1", s.grid_max),
                    config.seed(),
                    t as u64,
                    s.degree as u64,
                );
            }
            rows.push(SupnormRow {
                trajectory_id: t as u64,
                degree: s.degree,
                m: s.m,
                grid_max: s.grid_max,
                upper_bound: s.upper_bound,
            });
        }
    }
    out.table(dir, Suite::Supnorm, "supnorm.csv", &rows)?;

    let plateau = plateau_rows(&config.checkpoints, &records);
    out.plateau_ratio = plateau_ratio(&plateau);
    if let (Some(threshold), Some(ratio)) = (config.plateau_threshold, out.plateau_ratio) {
        if ratio > threshold {
            out.fail(
                Suite::Supnorm,
                format!("plateau ratio {ratio} exceeds {threshold}"),
                config.seed(),
                0,
                config.checkpoints.last().copied().unwrap_or(0) as u64,
            );
        }
    }
    out.table(dir, Suite::Supnorm, "plateau.csv", &plateau)?;

    if config.coefficients {
        let sub = dir.join("coefficients");
        fs::create_dir_all(&sub)?;
        let last = *config.checkpoints.last().expect("validated");
        for t in 0..config.trajectories as u64 {
            let alphas = sample_parameters(&config.envelope, &config.randomizer, t, last);
            let pair = CoeffPair::from_alphas(&alphas)?;
            let path = sub.join(format!("trajectory_{t:06}.bin"));
            formats::write_coeff_file(&path, &pair)?;
            out.files.push(path);
        }
    }
    Ok(())
}

/// One martingale repetition: fixed prefix of length `n` from
/// `PREFIX_STREAM`, `trials` independent tails up to degree `j`.
pub fn martingale_repetition(
    config: &ExperimentConfig,
    seed: u64,
    n: usize,
    j: usize,
) -> Result<MartingaleResidual> {
    let rng = config.randomizer.with_seed(seed);
    let prefix = sample_parameters(&config.envelope, &rng, PREFIX_STREAM, n);
    let z = Complex64::from_polar(1.0, config.martingale.theta);
    let setup = MartingaleSetup::new(&prefix, z, j, &config.envelope, &rng)?;
    let samples = parallel::ordered_map(0..config.martingale.trials as u64, |t| setup.sample(t));
    Ok(MartingaleResidual::from_samples(
        setup.reference(),
        &samples,
    ))
}

/// Residual consistent with zero mean drift, allowing for rounding when
/// the standard error vanishes.
pub fn martingale_consistent(r: &MartingaleResidual) -> bool {
    r.residual <= MARTINGALE_Z * r.stderr + ROUNDING_SLACK
}

fn martingale_suite(config: &ExperimentConfig, dir: &Path, out: &mut Collector) -> Result<()> {
    let m = &config.martingale;
    let z = Complex64::from_polar(1.0, m.theta);
    let seeds: Vec<u64> = (0..m.repetitions as u64)
        .map(|r| config.seed().wrapping_add(r))
        .collect();
    let mut rows = Vec::new();
    for &n in &m.prefixes {
        for &j in &m.targets {
            let mut consistent = 0;
            let mut first_bad = None;
            for &seed in &seeds {
                let r = martingale_repetition(config, seed, n, j)?;
                if martingale_consistent(&r) {
                    consistent += 1;
                } else if first_bad.is_none() {
                    first_bad = Some(seed);
                }
                rows.push(MartingaleRow {
                    n,
                    j,
                    z_re: z.re,
                    z_im: z.im,
                    residual: r.residual,
                    stderr: r.stderr,
                    trials: r.trials,
                });
            }
            let coverage = consistent as f64 / seeds.len() as f64;
            if coverage < MARTINGALE_COVERAGE {
                out.fail(
                    Suite::Martingale,
                    format!(
                        "only {consistent} of {} repetitions within {MARTINGALE_Z} standard errors at n = {n}",
                        seeds.len()
                    ),
                    first_bad.unwrap_or(config.seed()),
                    PREFIX_STREAM,
                    j as u64,
                );
            }
        }
    }
    out.repetition_seeds = seeds;
    out.table(dir, Suite::Martingale, "martingale.csv", &rows)
}

/// `|A_k(θ)|` from trajectories `0..trials` and `|B_k|` from the disjoint
/// trajectories offset by `B_STREAM_OFFSET`.
pub fn moment_samples(config: &ExperimentConfig, k: u32) -> Result<(Vec<f64>, Vec<f64>)> {
    let b = stats::g_lattice(k)?;
    let (env, rng, theta) = (&config.envelope, &config.randomizer, config.moments.theta);
    let pairs = parallel::try_ordered_map(0..config.moments.trials as u64, |t| {
        let a = stats::block_sample(env, rng, b, theta, t)?.a.norm();
        let bb = stats::block_sample(env, rng, b, theta, stats::B_STREAM_OFFSET + t)?
            .b
            .norm();
        Ok::<_, CoreError>((a, bb))
    })?;
    Ok(pairs.into_iter().unzip())
}

/// `E|ω|²` for the configured multiplier law.
fn second_moment_of_multiplier(kind: MultiplierKind) -> f64 {
    match kind {
        MultiplierKind::ScaledUniformPhase { radius } => radius * radius,
        MultiplierKind::UniformPhase | MultiplierKind::Rademacher => 1.0,
    }
}

fn moments_suite(config: &ExperimentConfig, dir: &Path, out: &mut Collector) -> Result<()> {
    let symmetric = config.randomizer.is_rotationally_symmetric();
    if !symmetric {
        out.notes.push(format!(
            "{} multipliers are not rotationally symmetric; law and fourth-moment checks skipped",
            config.randomizer.kind().name()
        ));
    }
    let mut rows = Vec::new();
    for &k in &config.moments.blocks {
        let b = stats::g_lattice(k)?;
        let (a, bs) = moment_samples(config, k)?;
        let ks = stats::ks_two_sample(&a, &bs);
        out.ks.push(KsSummary {
            k,
            statistic: ks.statistic,
            p_value: ks.p_value(),
        });
        if symmetric && ks.rejects(KS_FALSIFICATION_LEVEL) {
            out.fail(
                Suite::Moments,
                format!(
                    "|A_{k}| and |B_{k}| differ in law (KS p = {:e})",
                    ks.p_value()
                ),
                config.seed(),
                0,
                b.hi,
            );
        }
        let energy = stats::block_energy(&config.envelope, b)
            * second_moment_of_multiplier(config.randomizer.kind());
        for &p in &config.moments.orders {
            let r = MomentReport::from_samples(k, p, &a, &bs);
            let bad = match p {
                2 => {
                    (r.a_moment - energy).abs() > FALSIFICATION_Z * r.a_stderr + ROUNDING_SLACK
                        || (r.b_moment - energy).abs()
                            > FALSIFICATION_Z * r.b_stderr + ROUNDING_SLACK
                }
                _ => {
                    symmetric
                        && r.a_moment
                            > r.b_moment + FALSIFICATION_Z * r.combined_stderr() + ROUNDING_SLACK
                }
            };
            if bad {
                out.fail(
                    Suite::Moments,
                    format!(
                        "moment of order {p} on block {k} inconsistent: {r:?} vs energy {energy}"
                    ),
                    config.seed(),
                    0,
                    b.hi,
                );
            }
            rows.push(MomentRow {
                k,
                p,
                a_moment: r.a_moment,
                a_stderr: r.a_stderr,
                b_moment: r.b_moment,
                b_stderr: r.b_stderr,
                trials: r.trials,
            });
        }
    }
    out.table(dir, Suite::Moments, "moments.csv", &rows)
}

pub fn lattice_report(config: &ExperimentConfig, k: u32) -> Result<stats::LatticeReport> {
    let b = stats::g_lattice(k)?;
    let theta_count = config.lattice.theta_count.unwrap_or(b.hi as usize);
    stats::check_lattice_args(b, theta_count)?;
    let lambda = stats::lambda_threshold(&config.envelope, k)?;
    let (env, rng) = (&config.envelope, &config.randomizer);
    let events = parallel::try_ordered_map(0..config.lattice.repeats as u64, |t| {
        stats::lattice_event(env, rng, b, lambda, theta_count, t)
    })?;
    Ok(stats::lattice_report(k, lambda, &events))
}

fn lattice_suite(config: &ExperimentConfig, dir: &Path, out: &mut Collector) -> Result<()> {
    let mut rows = Vec::new();
    for &k in &config.lattice.blocks {
        let r = lattice_report(config, k)?;
        if !r.within_bound(FALSIFICATION_Z) {
            out.fail(
                Suite::Lattice,
                format!(
                    "event frequency {} exceeds bound {} by more than {FALSIFICATION_Z} standard errors",
                    r.exceed_fraction, r.bound
                ),
                config.seed(),
                0,
                stats::g(k + 1)?,
            );
        }
        rows.push(LatticeRow {
            k,
            lambda: r.lambda,
            exceed_fraction: r.exceed_fraction,
            bound: r.bound,
            repeats: r.repeats,
        });
    }
    out.table(dir, Suite::Lattice, "lattice.csv", &rows)
}

/// Parameters of trajectory 0 through index `T^levels`, and `T`.
pub fn sharpness_parameters(config: &ExperimentConfig) -> Result<(Vec<Complex64>, u64)> {
    let EnvelopeKind::SparseGeometric { base, .. } = config.envelope.kind() else {
        return Err(RunError::Config(
            "the sharpness suite needs a sparse-geometric envelope".into(),
        ));
    };
    let deepest = sharpness::level_index(*base, config.sharpness.levels)?;
    if deepest > config.degree_budget as u64 {
        return Err(RunError::Budget(format!(
            "index T^{} = {deepest} exceeds the degree budget {}",
            config.sharpness.levels, config.degree_budget
        )));
    }
    let alphas = sample_parameters(
        &config.envelope,
        &config.randomizer,
        0,
        deepest as usize + 1,
    );
    Ok((alphas, *base))
}

/// The alignment induction is guaranteed only for `T ≥ 12`.
pub const WITNESS_MIN_BASE: u64 = 12;

/// Deviation bound under which the induction estimate is asserted.
pub const DEVIATION_BOUND: f64 = PI / 12.0;

fn sharpness_suite(config: &ExperimentConfig, dir: &Path, out: &mut Collector) -> Result<()> {
    let (alphas, t) = sharpness_parameters(config)?;
    let (levels, grid) = (config.sharpness.levels, config.sharpness.grid);
    let seed = config.seed();

    let growth = sharpness::growth_trajectory(&alphas, t, levels, grid)?;
    let mut half_sum = 0.0;
    let growth_rows: Vec<GrowthRow> = growth
        .iter()
        .map(|g| {
            half_sum += 0.5 * alphas[g.index as usize].norm();
            GrowthRow {
                level: g.level,
                index: g.index,
                max_modulus: g.max_modulus,
                half_abs_sum: half_sum,
            }
        })
        .collect();
    out.table(dir, Suite::Sharpness, "growth.csv", &growth_rows)?;

    if t < WITNESS_MIN_BASE {
        out.notes.push(format!(
            "T = {t} is below {WITNESS_MIN_BASE}; alignment witness not attempted"
        ));
        return Ok(());
    }

    let deviation = sharpness::max_alignment_deviation(&alphas, t, levels, grid)?;
    let deviation_rows: Vec<AlignmentRow> = deviation
        .iter()
        .enumerate()
        .map(|(j, d)| AlignmentRow {
            level: j as u32,
            index: t.pow(j as u32),
            max_deviation: *d,
        })
        .collect();
    out.table(dir, Suite::Sharpness, "alignment.csv", &deviation_rows)?;
    let deviation_ok = deviation.iter().all(|d| *d <= DEVIATION_BOUND);
    if !deviation_ok {
        out.notes.push(
            "alignment deviation exceeds π/12; the induction bound is reported but not asserted"
                .into(),
        );
    }

    let witness = match sharpness::intersection_witness(&alphas, t, levels, grid) {
        Ok(w) => w,
        Err(CoreError::EmptyIntersection { level }) => {
            out.fail(
                Suite::Sharpness,
                format!("alignment sets have empty intersection at level {level}"),
                seed,
                0,
                t.pow(level),
            );
            return out.table::<SharpnessRow>(dir, Suite::Sharpness, "sharpness.csv", &[]);
        }
        Err(e) => return Err(e.into()),
    };
    check_witness(&witness, t, seed, deviation_ok, out);
    let rows: Vec<SharpnessRow> = witness
        .levels
        .iter()
        .map(|l| SharpnessRow {
            level: l.level,
            measure: l.measure,
            bound: l.bound,
            theta_star: l.theta_star,
            achieved: l.achieved,
            lower: l.lower,
        })
        .collect();
    out.table(dir, Suite::Sharpness, "sharpness.csv", &rows)
}

fn check_witness(w: &BlowupWitness, t: u64, seed: u64, assert_measure: bool, out: &mut Collector) {
    for l in &w.levels {
        let degree = t.pow(l.level);
        if !l.pointwise_verified {
            out.fail(
                Suite::Sharpness,
                format!(
                    "θ* = {} fails an alignment inequality when rechecked",
                    l.theta_star
                ),
                seed,
                0,
                degree,
            );
        }
        if l.achieved < l.lower - ROUNDING_SLACK {
            out.fail(
                Suite::Sharpness,
                format!(
                    "achieved {} below aligned lower bound {}",
                    l.achieved, l.lower
                ),
                seed,
                0,
                degree,
            );
        }
        if assert_measure && l.measure < l.bound - 2.0 * w.resolution {
            out.fail(
                Suite::Sharpness,
                format!(
                    "intersection interval {} below induction bound {}",
                    l.measure, l.bound
                ),
                seed,
                0,
                degree,
            );
        }
    }
}

/// Per-checkpoint medians and 90th percentiles of both regimes' certified
/// sups, with the ratio of medians `B/A`.
pub fn compare_regimes(a: &ExperimentConfig, b: &ExperimentConfig) -> Result<Vec<CompareRow>> {
    compare_regimes_with(a, b, RunOptions::from_env()?)
}

pub fn compare_regimes_with(
    a: &ExperimentConfig,
    b: &ExperimentConfig,
    options: RunOptions,
) -> Result<Vec<CompareRow>> {
    if a.checkpoints != b.checkpoints {
        return Err(RunError::Config(
            "compared configurations must share checkpoints".into(),
        ));
    }
    a.validate()?;
    b.validate()?;
    let pool = parallel::build_pool(options.threads)?;
    let (ra, rb) =
        pool.install(|| Ok::<_, RunError>((supnorm_records(a)?, supnorm_records(b)?)))?;
    let pa = plateau_rows(&a.checkpoints, &ra);
    let pb = plateau_rows(&b.checkpoints, &rb);
    Ok(pa
        .iter()
        .zip(&pb)
        .map(|(x, y)| CompareRow {
            degree: x.degree,
            a_median: x.median_upper_bound,
            a_p90: x.p90_upper_bound,
            a_grid_median: x.median_grid_max,
            b_median: y.median_upper_bound,
            b_p90: y.p90_upper_bound,
            b_grid_median: y.median_grid_max,
            ratio: y.median_upper_bound / x.median_upper_bound,
        })
        .collect())
}
