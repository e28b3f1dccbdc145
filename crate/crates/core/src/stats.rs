//! Monte Carlo checks of the probabilistic structure behind the boundedness
//! result: the martingale identity `E[Φ*_j(z) | F_n] = Φ*_n(z)`, the block
//! sums `A_k(θ) = Σ α_j e^{iγ_j(θ)}` versus `B_k = Σ α_j` over the doubly
//! exponential blocks `[G(k), G(k+1)]`, `G(k) = 2^{2^k}`, and the frequency
//! of the threshold events used to apply Borel–Cantelli.
//!
//! Every sampler takes an explicit trajectory (stream) index so that callers
//! may evaluate trials in parallel and reduce them in index order; the
//! sequential drivers here do exactly that on one thread.

use alloc::format;
use alloc::vec::Vec;

use crate::float;
use crate::prufer::{self, PhaseTrack};
use crate::szego;
use crate::verblunsky::{Envelope, Randomizer};
use crate::{Complex64, Error, Result, TAU};

/// Blocks with `G(k+1)` above this are rejected by default.
pub const DEFAULT_BLOCK_BUDGET: u64 = 1 << 16;

/// Angle used by block-sum comparisons unless a caller picks one.
pub const DEFAULT_THETA: f64 = 1.0;

/// Stream ids at or above this offset are reserved for `B_k` samples, so
/// that `A_k` and `B_k` estimates come from disjoint trajectories.
pub const B_STREAM_OFFSET: u64 = 1 << 40;

/// `[G(k), G(k+1)]`, both ends included.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    pub k: u32,
    pub lo: u64,
    pub hi: u64,
}

impl BlockSpec {
    /// Number of parameters a trajectory needs to cover the block.
    pub fn required_len(&self) -> usize {
        self.hi as usize + 1
    }
}

/// `G(k) = 2^{2^k}`.
pub fn g(k: u32) -> Result<u64> {
    1u32.checked_shl(k)
        .filter(|e| *e < 64)
        .map(|e| 1u64 << e)
        .ok_or(Error::Overflow("G(k) = 2^(2^k)"))
}

/// `(G(k), G(k+1))` subject to [`DEFAULT_BLOCK_BUDGET`].
pub fn g_lattice(k: u32) -> Result<BlockSpec> {
    g_lattice_within(k, DEFAULT_BLOCK_BUDGET)
}

pub fn g_lattice_within(k: u32, budget: u64) -> Result<BlockSpec> {
    let lo = g(k)?;
    let hi = g(k + 1)?;
    if hi > budget {
        return Err(Error::BudgetExceeded {
            degree: hi as usize,
            budget: budget as usize,
        });
    }
    Ok(BlockSpec { k, lo, hi })
}

/// `λ_k = 3·√(log G(k+1) · R_{G(k)})`, natural logarithm.
pub fn lambda_threshold(env: &Envelope, k: u32) -> Result<f64> {
    let b = g_lattice(k)?;
    let r = env.tail(b.lo).value;
    Ok(3.0 * float::sqrt(float::ln(b.hi as f64) * r))
}

/// `exp(−2^k·log 2)`, the per-block bound on the threshold event.
pub fn lattice_bound(k: u32) -> f64 {
    float::exp(-float::powf(2.0, f64::from(k)) * core::f64::consts::LN_2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockSums {
    pub a: Complex64,
    pub b: Complex64,
    /// `max_{G(k) ≤ s ≤ G(k+1)} |Σ_{m=G(k)}^{s} α_m e^{iγ_m(θ)}|`
    pub running_max_a: f64,
}

pub fn block_sum_pair(alphas: &[Complex64], theta: f64, b: BlockSpec) -> Result<BlockSums> {
    let end = b.required_len();
    if alphas.len() < end {
        return Err(Error::TooShort {
            len: alphas.len(),
            required: end,
        });
    }
    let lo = b.lo as usize;
    let weighted = prufer::weighted_phase_sum(alphas, theta, lo, end)?;
    Ok(BlockSums {
        a: weighted.sum,
        b: alphas[lo..end].iter().sum(),
        running_max_a: weighted.running_max,
    })
}

/// Mergeable mean/variance accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanAccumulator {
    count: u64,
    sum: f64,
    sum_sq: f64,
}

impl MeanAccumulator {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0)
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            float::sqrt(self.variance() / self.count as f64)
        }
    }
}

impl FromIterator<f64> for MeanAccumulator {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::default();
        iter.into_iter().for_each(|x| acc.push(x));
        acc
    }
}

/// Two-sample Kolmogorov–Smirnov statistic with the asymptotic p-value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub n: usize,
    pub m: usize,
}

impl KsTest {
    pub fn p_value(&self) -> f64 {
        let ne = (self.n * self.m) as f64 / (self.n + self.m) as f64;
        let root = float::sqrt(ne);
        kolmogorov_survival((root + 0.12 + 0.11 / root) * self.statistic)
    }

    pub fn rejects(&self, level: f64) -> bool {
        self.p_value() < level
    }
}

/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2j²λ²}`.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let j = f64::from(j);
        let term = float::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsTest {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    KsTest { statistic: d, n, m }
}

/// Block sums for one trajectory of the ensemble.
pub fn block_sample(
    env: &Envelope,
    rng: &Randomizer,
    b: BlockSpec,
    theta: f64,
    trajectory: u64,
) -> Result<BlockSums> {
    let alphas = crate::verblunsky::sample_parameters(env, rng, trajectory, b.required_len());
    block_sum_pair(&alphas, theta, b)
}

/// `|A_k(θ)|` samples from trajectories `0..trials` and `|B_k|` samples from
/// the disjoint trajectories `B_STREAM_OFFSET + (0..trials)`.
pub fn block_modulus_samples(
    env: &Envelope,
    rng: &Randomizer,
    b: BlockSpec,
    theta: f64,
    trials: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut a = Vec::with_capacity(trials);
    let mut bs = Vec::with_capacity(trials);
    for t in 0..trials as u64 {
        a.push(block_sample(env, rng, b, theta, t)?.a.norm());
        bs.push(
            block_sample(env, rng, b, theta, B_STREAM_OFFSET + t)?
                .b
                .norm(),
        );
    }
    Ok((a, bs))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub k: u32,
    pub p: u32,
    pub a_moment: f64,
    pub a_stderr: f64,
    pub b_moment: f64,
    pub b_stderr: f64,
    pub trials: usize,
}

impl MomentReport {
    pub fn from_samples(k: u32, p: u32, a_abs: &[f64], b_abs: &[f64]) -> Self {
        let power = |x: &f64| (0..p).fold(1.0, |acc, _| acc * x);
        let a: MeanAccumulator = a_abs.iter().map(power).collect();
        let b: MeanAccumulator = b_abs.iter().map(power).collect();
        Self {
            k,
            p,
            a_moment: a.mean(),
            a_stderr: a.stderr(),
            b_moment: b.mean(),
            b_stderr: b.stderr(),
            trials: a_abs.len().min(b_abs.len()),
        }
    }

    pub fn combined_stderr(&self) -> f64 {
        float::sqrt(self.a_stderr * self.a_stderr + self.b_stderr * self.b_stderr)
    }

    /// `|E|A|^p − E|B|^p| ≤ z·(combined stderr)`.
    pub fn moments_agree(&self, z: f64) -> bool {
        (self.a_moment - self.b_moment).abs() <= z * self.combined_stderr()
    }
}

pub const MIN_MOMENT_TRIALS: usize = 1000;

/// Estimates `E|A_k(θ)|^p` and `E|B_k|^p` from independent trials.
pub fn moment_compare(
    env: &Envelope,
    rng: &Randomizer,
    b: BlockSpec,
    theta: f64,
    p: u32,
    trials: usize,
) -> Result<MomentReport> {
    check_moment_args(p, trials)?;
    let (a, bs) = block_modulus_samples(env, rng, b, theta, trials)?;
    Ok(MomentReport::from_samples(b.k, p, &a, &bs))
}

pub fn check_moment_args(p: u32, trials: usize) -> Result<()> {
    if p != 2 && p != 4 {
        return Err(Error::InvalidArgument(format!(
            "moment order {p} must be 2 or 4"
        )));
    }
    if trials < MIN_MOMENT_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "{trials} trials is below the minimum of {MIN_MOMENT_TRIALS}"
        )));
    }
    Ok(())
}

/// `Σ_{j=G(k)}^{G(k+1)} a_j²`, the exact value of `E|B_k|²` when the
/// multipliers have unit modulus and mean zero.
pub fn block_energy(env: &Envelope, b: BlockSpec) -> f64 {
    (b.lo..=b.hi)
        .rev()
        .map(|n| {
            let a = env.value(n);
            a * a
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MartingaleResidual {
    /// `|mean of Φ*_j(z) − Φ*_n(z)|`
    pub residual: f64,
    /// Componentwise standard errors of the mean, combined in quadrature.
    pub stderr: f64,
    pub trials: usize,
}

impl MartingaleResidual {
    pub fn from_samples(reference: Complex64, samples: &[Complex64]) -> Self {
        let re: MeanAccumulator = samples.iter().map(|s| s.re).collect();
        let im: MeanAccumulator = samples.iter().map(|s| s.im).collect();
        let mean = Complex64::new(re.mean(), im.mean());
        Self {
            residual: (mean - reference).norm(),
            stderr: float::sqrt(re.stderr() * re.stderr() + im.stderr() * im.stderr()),
            trials: samples.len(),
        }
    }

    pub fn within(&self, z: f64) -> bool {
        self.residual <= z * self.stderr
    }
}

pub const MIN_MARTINGALE_TRIALS: usize = 10_000;

/// The fixed prefix state and the tail law for martingale sampling.
#[derive(Clone, Debug)]
pub struct MartingaleSetup<'a> {
    state: szego::PointState,
    end: usize,
    env: &'a Envelope,
    rng: &'a Randomizer,
}

impl<'a> MartingaleSetup<'a> {
    pub fn new(
        prefix: &[Complex64],
        z: Complex64,
        end: usize,
        env: &'a Envelope,
        rng: &'a Randomizer,
    ) -> Result<Self> {
        let n = prefix.len();
        if end <= n {
            return Err(Error::InvalidArgument(format!(
                "target degree {end} must exceed the prefix length {n}"
            )));
        }
        let state = szego::run_point(z, prefix, &[n])?[0];
        Ok(Self {
            state,
            end,
            env,
            rng,
        })
    }

    /// `Φ*_n(z)` from the fixed prefix.
    pub fn reference(&self) -> Complex64 {
        self.state.phi_star
    }

    /// `Φ*_j(z)` for one independently sampled tail `α_n, …, α_{j−1}`.
    pub fn sample(&self, trial: u64) -> Complex64 {
        let n = self.state.n as u64;
        let tail = self.rng.stream(trial).alphas(self.env, n..self.end as u64);
        tail.iter()
            .fold(self.state, |s, a| s.step_unchecked(*a))
            .phi_star
    }
}

pub fn martingale_residual(
    prefix: &[Complex64],
    z: Complex64,
    end: usize,
    env: &Envelope,
    rng: &Randomizer,
    trials: usize,
) -> Result<MartingaleResidual> {
    if trials < MIN_MARTINGALE_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "{trials} trials is below the minimum of {MIN_MARTINGALE_TRIALS}"
        )));
    }
    let setup = MartingaleSetup::new(prefix, z, end, env, rng)?;
    let samples: Vec<Complex64> = (0..trials as u64).map(|t| setup.sample(t)).collect();
    Ok(MartingaleResidual::from_samples(
        setup.reference(),
        &samples,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeReport {
    pub k: u32,
    pub lambda: f64,
    pub exceed_fraction: f64,
    pub bound: f64,
    /// Binomial standard error at the bound, `√(b(1−b)/repeats)`.
    pub stderr: f64,
    pub repeats: usize,
}

impl LatticeReport {
    pub fn within_bound(&self, z: f64) -> bool {
        self.exceed_fraction <= self.bound + z * self.stderr
    }
}

pub const DEFAULT_LATTICE_REPEATS: usize = 200;

/// Whether, on this trajectory, some `θ_j = 2πj/theta_count` has a block
/// partial sum exceeding `lambda`.
pub fn lattice_event(
    env: &Envelope,
    rng: &Randomizer,
    b: BlockSpec,
    lambda: f64,
    theta_count: usize,
    trajectory: u64,
) -> Result<bool> {
    let alphas = crate::verblunsky::sample_parameters(env, rng, trajectory, b.required_len());
    szego::check_alphas(&alphas)?;
    let lo = b.lo as usize;
    for j in 0..theta_count {
        let mut t = PhaseTrack::new(TAU * j as f64 / theta_count as f64);
        t.advance_to(&alphas, lo)?;
        let mut sum = Complex64::new(0.0, 0.0);
        for alpha in &alphas[lo..] {
            sum += alpha * t.phase();
            if sum.norm() > lambda {
                return Ok(true);
            }
            t.step(*alpha)?;
        }
    }
    Ok(false)
}

pub fn check_lattice_args(b: BlockSpec, theta_count: usize) -> Result<()> {
    if theta_count == 0 || theta_count as u64 > b.hi {
        return Err(Error::InvalidArgument(format!(
            "theta count {theta_count} must lie in 1..={}",
            b.hi
        )));
    }
    Ok(())
}

pub fn lattice_report(k: u32, lambda: f64, events: &[bool]) -> LatticeReport {
    let repeats = events.len();
    let hits = events.iter().filter(|e| **e).count();
    let bound = lattice_bound(k);
    LatticeReport {
        k,
        lambda,
        exceed_fraction: if repeats == 0 {
            0.0
        } else {
            hits as f64 / repeats as f64
        },
        bound,
        stderr: float::sqrt(bound * (1.0 - bound) / repeats.max(1) as f64),
        repeats,
    }
}

/// Fraction of trajectories on which the block-`k` threshold event occurs
/// on the `theta_count`-point grid.
pub fn lattice_diagnostic(
    env: &Envelope,
    rng: &Randomizer,
    k: u32,
    theta_count: usize,
    repeats: usize,
) -> Result<LatticeReport> {
    let b = g_lattice(k)?;
    check_lattice_args(b, theta_count)?;
    let lambda = lambda_threshold(env, k)?;
    let events = (0..repeats as u64)
        .map(|t| lattice_event(env, rng, b, lambda, theta_count, t))
        .collect::<Result<Vec<bool>>>()?;
    Ok(lattice_report(k, lambda, &events))
}
