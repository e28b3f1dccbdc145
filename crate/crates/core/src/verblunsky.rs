//! Coefficient envelopes, tail energies and random multipliers.
//!
//! The random Verblunsky parameters are `α_n = a_n·ω_n` where `{a_n}` is a
//! deterministic [`Envelope`] and `{ω_n}` are independent multipliers drawn by
//! a [`Randomizer`].

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::float;
use crate::rng::StreamRng;
use crate::{Complex64, Error, Result, TAU};

/// Number of terms summed explicitly before an integral estimate takes over
/// in [`Envelope::tail`].
pub const DEFAULT_TAIL_TERMS: u64 = 1 << 16;

/// Slowly growing normalizers for the sparse construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlowFunction {
    /// `ψ(k) = 1`
    One,
    /// `ψ(k) = log(k + 2)`
    Log,
    /// `ψ(k) = log log(k + 16)`
    LogLog,
}

impl SlowFunction {
    pub fn eval(self, k: u32) -> f64 {
        let k = f64::from(k);
        match self {
            SlowFunction::One => 1.0,
            SlowFunction::Log => float::ln(k + 2.0),
            SlowFunction::LogLog => float::ln(float::ln(k + 16.0)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SlowFunction::One => "one",
            SlowFunction::Log => "log",
            SlowFunction::LogLog => "loglog",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "one" | "1" => Some(SlowFunction::One),
            "log" => Some(SlowFunction::Log),
            "loglog" => Some(SlowFunction::LogLog),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnvelopeKind {
    Zero,
    /// `a_n = scale / (n + 2)^exponent`
    PowerDecay {
        exponent: f64,
        scale: f64,
    },
    /// `a_{T^k} = epsilon / (k·ψ(k))` for `k ≥ 2`, zero elsewhere.
    SparseGeometric {
        base: u64,
        epsilon: f64,
        psi: SlowFunction,
    },
    /// Finite list; indices past the end are zero.
    Explicit(Vec<f64>),
}

/// A validated deterministic envelope `{a_n}` with `|a_n| < 1` and
/// `Σ a_n² < ∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    kind: EnvelopeKind,
}

impl Envelope {
    pub fn new(kind: EnvelopeKind) -> Result<Self> {
        match &kind {
            EnvelopeKind::Zero => {}
            EnvelopeKind::PowerDecay { exponent, scale } => {
                if !exponent.is_finite() || *exponent <= 0.5 {
                    return Err(Error::InvalidEnvelope(format!(
                        "power decay exponent {exponent} must exceed 1/2 for square summability"
                    )));
                }
                if !(*scale > 0.0 && *scale < 1.0) {
                    return Err(Error::InvalidEnvelope(format!(
                        "power decay scale {scale} must lie in (0, 1)"
                    )));
                }
            }
            EnvelopeKind::SparseGeometric { base, epsilon, .. } => {
                if *base < 2 {
                    return Err(Error::InvalidEnvelope(format!(
                        "sparse base T = {base} must be at least 2"
                    )));
                }
                if !(*epsilon > 0.0 && *epsilon < 1.0) {
                    return Err(Error::InvalidEnvelope(format!(
                        "sparse epsilon {epsilon} must lie in (0, 1)"
                    )));
                }
            }
            EnvelopeKind::Explicit(values) => {
                if let Some((i, v)) = values
                    .iter()
                    .enumerate()
                    .find(|(_, v)| !v.is_finite() || v.abs() >= 1.0)
                {
                    return Err(Error::InvalidEnvelope(format!(
                        "explicit value a_{i} = {v} must satisfy |a| < 1"
                    )));
                }
            }
        }
        Ok(Self { kind })
    }

    pub fn zero() -> Self {
        Self {
            kind: EnvelopeKind::Zero,
        }
    }

    pub fn power_decay(exponent: f64, scale: f64) -> Result<Self> {
        Self::new(EnvelopeKind::PowerDecay { exponent, scale })
    }

    pub fn sparse_geometric(base: u64, epsilon: f64, psi: SlowFunction) -> Result<Self> {
        Self::new(EnvelopeKind::SparseGeometric { base, epsilon, psi })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        Self::new(EnvelopeKind::Explicit(values))
    }

    pub fn kind(&self) -> &EnvelopeKind {
        &self.kind
    }

    /// `a_n`.
    pub fn value(&self, n: u64) -> f64 {
        match &self.kind {
            EnvelopeKind::Zero => 0.0,
            EnvelopeKind::PowerDecay { exponent, scale } => {
                scale / float::powf(n as f64 + 2.0, *exponent)
            }
            EnvelopeKind::SparseGeometric { base, epsilon, psi } => match sparse_level(*base, n) {
                Some(k) => sparse_value(*epsilon, *psi, k),
                None => 0.0,
            },
            EnvelopeKind::Explicit(values) => usize::try_from(n)
                .ok()
                .and_then(|i| values.get(i))
                .copied()
                .unwrap_or(0.0),
        }
    }

    pub fn values(&self, len: usize) -> Vec<f64> {
        (0..len as u64).map(|n| self.value(n)).collect()
    }

    /// Level `k ≥ 2` with `n = T^k`, for sparse envelopes.
    pub fn sparse_level(&self, n: u64) -> Option<u32> {
        match &self.kind {
            EnvelopeKind::SparseGeometric { base, .. } => sparse_level(*base, n),
            _ => None,
        }
    }

    /// Tail energy with the default summation horizon.
    pub fn tail(&self, k: u64) -> TailEnergy {
        tail_energy(self, k, k.saturating_add(DEFAULT_TAIL_TERMS))
    }
}

/// Validating constructor; see [`Envelope::new`].
pub fn make_envelope(kind: EnvelopeKind) -> Result<Envelope> {
    Envelope::new(kind)
}

fn sparse_value(epsilon: f64, psi: SlowFunction, k: u32) -> f64 {
    epsilon / (f64::from(k) * psi.eval(k))
}

fn sparse_level(base: u64, n: u64) -> Option<u32> {
    if n < base.saturating_mul(base) {
        return None;
    }
    let mut rest = n;
    let mut k = 0;
    while rest > 1 {
        if !rest.is_multiple_of(base) {
            return None;
        }
        rest /= base;
        k += 1;
    }
    Some(k)
}

/// How a [`TailEnergy`] value was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailMethod {
    ClosedForm,
    /// Terms `k..=horizon` summed, then the convex-tail integral estimate
    /// `∫_{horizon+1/2}^∞` added. The true tail lies in
    /// `[value − remainder_bound, value]`.
    PartialSum {
        horizon: u64,
        remainder_bound: f64,
    },
    /// Sparse support: levels up to `last_level` summed; the true tail lies in
    /// `[value, value + remainder_bound]`.
    LevelSum {
        last_level: u32,
        remainder_bound: f64,
    },
}

/// `R_k = Σ_{n ≥ k} a_n²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailEnergy {
    pub k: u64,
    pub value: f64,
    pub method: TailMethod,
}

impl TailEnergy {
    pub fn remainder_bound(&self) -> f64 {
        match self.method {
            TailMethod::ClosedForm => 0.0,
            TailMethod::PartialSum {
                remainder_bound, ..
            }
            | TailMethod::LevelSum {
                remainder_bound, ..
            } => remainder_bound,
        }
    }
}

pub fn tail_energy(env: &Envelope, k: u64, horizon: u64) -> TailEnergy {
    let horizon = horizon.max(k);
    match &env.kind {
        EnvelopeKind::Zero => TailEnergy {
            k,
            value: 0.0,
            method: TailMethod::ClosedForm,
        },
        EnvelopeKind::Explicit(values) => {
            let start = usize::try_from(k).unwrap_or(usize::MAX).min(values.len());
            // smallest terms first
            let value = values[start..].iter().rev().map(|a| a * a).sum();
            TailEnergy {
                k,
                value,
                method: TailMethod::ClosedForm,
            }
        }
        EnvelopeKind::PowerDecay { exponent, scale } => {
            let s2 = scale * scale;
            let q = 2.0 * exponent;
            let term = |n: u64| s2 / float::powf(n as f64 + 2.0, q);
            // ∫_x^∞ s²/(t+2)^q dt
            let integral = |x: f64| s2 * float::powf(x + 2.0, 1.0 - q) / (q - 1.0);
            let partial: f64 = (k..=horizon).rev().map(term).sum();
            let upper_tail = integral(horizon as f64 + 0.5);
            let lower_tail = integral(horizon as f64 + 1.0);
            TailEnergy {
                k,
                value: partial + upper_tail,
                method: TailMethod::PartialSum {
                    horizon,
                    remainder_bound: upper_tail - lower_tail,
                },
            }
        }
        EnvelopeKind::SparseGeometric { base, epsilon, psi } => {
            let first = first_level_at_or_above(*base, k);
            let e2 = epsilon * epsilon;
            match psi {
                SlowFunction::One => {
                    // Σ_{m ≥ first} 1/m² = π²/6 − Σ_{m < first} 1/m²
                    let head: f64 = (1..first)
                        .rev()
                        .map(|m| 1.0 / (f64::from(m) * f64::from(m)))
                        .sum();
                    let zeta2 = core::f64::consts::PI * core::f64::consts::PI / 6.0;
                    TailEnergy {
                        k,
                        value: e2 * (zeta2 - head).max(0.0),
                        method: TailMethod::ClosedForm,
                    }
                }
                _ => {
                    let last = first.saturating_add(DEFAULT_TAIL_TERMS as u32);
                    let value = (first..=last)
                        .rev()
                        .map(|m| {
                            let a = sparse_value(*epsilon, *psi, m);
                            a * a
                        })
                        .sum();
                    // Σ_{m > M} 1/(m ψ(m))² ≤ 1/(M ψ(M+1)²) for nondecreasing ψ
                    let psi_next = psi.eval(last + 1);
                    TailEnergy {
                        k,
                        value,
                        method: TailMethod::LevelSum {
                            last_level: last,
                            remainder_bound: e2 / (f64::from(last) * psi_next * psi_next),
                        },
                    }
                }
            }
        }
    }
}

/// Smallest `m ≥ 2` with `T^m ≥ k`.
fn first_level_at_or_above(base: u64, k: u64) -> u32 {
    let mut m = 2u32;
    let mut power = base.saturating_mul(base);
    while power < k {
        match power.checked_mul(base) {
            Some(p) => power = p,
            None => return m + 1,
        }
        m += 1;
    }
    m
}

/// `Σ_{n=2}^{N} √R_n / (n·√log n)`.
pub fn steklov_series_partial(env: &Envelope, last: u64) -> Result<f64> {
    if last < 2 {
        return Err(Error::InvalidArgument(format!(
            "series end {last} must be at least 2"
        )));
    }
    let mut tails = Vec::with_capacity((last - 1) as usize);
    let mut r = env.tail(last + 1).value;
    for n in (2..=last).rev() {
        let a = env.value(n);
        r += a * a;
        tails.push(r);
    }
    let sum = (2..=last)
        .zip(tails.iter().rev())
        .map(|(n, r)| {
            let n = n as f64;
            float::sqrt(*r) / (n * float::sqrt(float::ln(n)))
        })
        .sum();
    Ok(sum)
}

/// `Σ_{j=0}^{K} √(2^j · R_{2^{2^j}})`.
pub fn condensed_series_partial(env: &Envelope, last: u32) -> Result<f64> {
    let mut sum = 0.0;
    for j in 0..=last {
        let exponent = 1u32
            .checked_shl(j)
            .filter(|e| *e < 64)
            .ok_or(Error::Overflow("2^(2^j)"))?;
        let index = 1u64 << exponent;
        let r = env.tail(index).value;
        sum += float::sqrt(f64::from(exponent) * r);
    }
    Ok(sum)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MultiplierKind {
    /// `ω = e^{iu}`, `u` uniform on `[0, 2π)`.
    UniformPhase,
    /// `ω = ±1` with equal probability. Only real-sign symmetric.
    Rademacher,
    /// `ω = r·e^{iu}`.
    ScaledUniformPhase { radius: f64 },
}

impl MultiplierKind {
    pub fn name(&self) -> &'static str {
        match self {
            MultiplierKind::UniformPhase => "uniform-phase",
            MultiplierKind::Rademacher => "rademacher",
            MultiplierKind::ScaledUniformPhase { .. } => "scaled-uniform-phase",
        }
    }
}

/// Law of the multipliers plus the seed keying every trajectory stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Randomizer {
    kind: MultiplierKind,
    seed: u64,
}

impl Randomizer {
    pub fn new(kind: MultiplierKind, seed: u64) -> Result<Self> {
        if let MultiplierKind::ScaledUniformPhase { radius } = kind {
            if !(radius > 0.0 && radius <= 1.0) {
                return Err(Error::InvalidRandomizer(format!(
                    "radius {radius} must lie in (0, 1]"
                )));
            }
        }
        Ok(Self { kind, seed })
    }

    pub fn uniform_phase(seed: u64) -> Self {
        Self {
            kind: MultiplierKind::UniformPhase,
            seed,
        }
    }

    pub fn kind(&self) -> MultiplierKind {
        self.kind
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// Whether the law is invariant under rotation by any unit constant, as
    /// the boundedness theorem assumes. Rademacher multipliers are not.
    pub fn is_rotationally_symmetric(&self) -> bool {
        !matches!(self.kind, MultiplierKind::Rademacher)
    }

    pub fn stream(&self, trajectory: u64) -> MultiplierStream {
        MultiplierStream {
            kind: self.kind,
            rng: StreamRng::new(self.seed, trajectory),
        }
    }
}

/// The multipliers `ω_0, ω_1, …` of one trajectory.
#[derive(Clone, Debug)]
pub struct MultiplierStream {
    kind: MultiplierKind,
    rng: StreamRng,
}

impl MultiplierStream {
    pub fn next_multiplier(&mut self) -> Complex64 {
        match self.kind {
            MultiplierKind::UniformPhase => float::cis(TAU * self.rng.next_f64()),
            MultiplierKind::Rademacher => {
                Complex64::new(if self.rng.next_bool() { 1.0 } else { -1.0 }, 0.0)
            }
            MultiplierKind::ScaledUniformPhase { radius } => {
                float::cis(TAU * self.rng.next_f64()) * radius
            }
        }
    }

    /// `α_n = a_n·ω_n` for `n` in `indices`, drawing one multiplier per index.
    pub fn alphas(&mut self, env: &Envelope, indices: Range<u64>) -> Vec<Complex64> {
        indices
            .map(|n| self.next_multiplier() * env.value(n))
            .collect()
    }
}

impl Iterator for MultiplierStream {
    type Item = Complex64;

    fn next(&mut self) -> Option<Complex64> {
        Some(self.next_multiplier())
    }
}

/// `α_j = a_j·ω_j` for `j < n` on the given trajectory.
pub fn sample_parameters(
    env: &Envelope,
    randomizer: &Randomizer,
    trajectory: u64,
    n: usize,
) -> Vec<Complex64> {
    randomizer.stream(trajectory).alphas(env, 0..n as u64)
}
