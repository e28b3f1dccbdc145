//! Prüfer phases `γ_n(θ)`, defined by `e^{iγ_n} = zΦ_n(z)/Φ*_n(z)` at
//! `z = e^{iθ}`, and the accumulated logarithm of `Φ*_n`.
//!
//! With `w = 1 − α_n·e^{iγ_n}` the recursion is
//!
//! ```text
//! γ_{n+1} = γ_n + θ − 2·Im Log w
//! log Φ*_{n+1} = log Φ*_n + Log w
//! ```
//!
//! `Re w > 0` because `|α_n| < 1`, so the principal logarithm is continuous
//! along the whole track and only `γ` carries winding.

use alloc::vec::Vec;

use crate::float;
use crate::szego::{self, check_alpha};
use crate::{Complex64, Error, Result};

/// Phase track at one angle.
///
/// The phase is stored as `γ_n = (n + 1)·θ + drift`, so free steps
/// (`α = 0`) only bump the counter and `γ_n = (n + 1)θ` holds exactly when
/// every parameter vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseTrack {
    theta: f64,
    n: usize,
    drift: f64,
    log_phi_star: Complex64,
}

impl PhaseTrack {
    pub fn new(theta: f64) -> Self {
        Self {
            theta,
            n: 0,
            drift: 0.0,
            log_phi_star: Complex64::new(0.0, 0.0),
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unwrapped `γ_n(θ)`; never reduced mod 2π.
    pub fn gamma(&self) -> f64 {
        (self.n as f64 + 1.0) * self.theta + self.drift
    }

    /// `γ_n(θ) − (n + 1)θ`, the accumulated `−2 Σ Im Log w`.
    pub fn drift(&self) -> f64 {
        self.drift
    }

    /// `Σ_{j<n} Log(1 − α_j e^{iγ_j})`.
    pub fn log_phi_star(&self) -> Complex64 {
        self.log_phi_star
    }

    /// `e^{iγ_n}`.
    pub fn phase(&self) -> Complex64 {
        float::cis(self.gamma())
    }

    pub fn step(&mut self, alpha: Complex64) -> Result<()> {
        check_alpha(self.n, alpha)?;
        self.step_unchecked(alpha);
        Ok(())
    }

    #[inline]
    fn step_unchecked(&mut self, alpha: Complex64) {
        if alpha.re != 0.0 || alpha.im != 0.0 {
            let w = Complex64::new(1.0, 0.0) - alpha * self.phase();
            let log_w = w.ln();
            self.drift -= 2.0 * log_w.im;
            self.log_phi_star += log_w;
        }
        self.n += 1;
    }

    /// `count` steps with `α = 0`.
    pub fn advance_free(&mut self, count: usize) {
        self.n += count;
    }

    /// Steps through `alphas[self.n()..to]`.
    pub fn advance_to(&mut self, alphas: &[Complex64], to: usize) -> Result<()> {
        if to > alphas.len() {
            return Err(Error::TooShort {
                len: alphas.len(),
                required: to,
            });
        }
        while self.n < to {
            self.step(alphas[self.n])?;
        }
        Ok(())
    }

    /// Steps through a sparse sequence up to degree `to`, skipping zero runs
    /// in O(1).
    pub fn advance_sparse(&mut self, alphas: &SparseAlphas, to: usize) {
        let start = alphas.entries.partition_point(|(i, _)| *i < self.n);
        for &(index, alpha) in &alphas.entries[start..] {
            if index >= to {
                break;
            }
            self.advance_free(index - self.n);
            self.step_unchecked(alpha);
        }
        if self.n < to {
            self.advance_free(to - self.n);
        }
    }
}

/// Nonzero entries of a parameter sequence, validated to lie in the disk.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseAlphas {
    len: usize,
    entries: Vec<(usize, Complex64)>,
}

impl SparseAlphas {
    pub fn new(alphas: &[Complex64]) -> Result<Self> {
        szego::check_alphas(alphas)?;
        Ok(Self {
            len: alphas.len(),
            entries: alphas
                .iter()
                .enumerate()
                .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
                .map(|(i, a)| (i, *a))
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, index: usize) -> Complex64 {
        match self.entries.binary_search_by_key(&index, |(i, _)| *i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn nonzero(&self) -> &[(usize, Complex64)] {
        &self.entries
    }
}

pub fn phase_step(t: &PhaseTrack, alpha: Complex64) -> Result<PhaseTrack> {
    let mut next = *t;
    next.step(alpha)?;
    Ok(next)
}

/// Track at `theta` after the first `n` parameters.
pub fn track(alphas: &[Complex64], theta: f64, n: usize) -> Result<PhaseTrack> {
    let mut t = PhaseTrack::new(theta);
    t.advance_to(alphas, n)?;
    Ok(t)
}

/// `|exp(log Φ*_n) − Φ*_n(e^{iθ})| / |Φ*_n(e^{iθ})|` with the right side
/// from the Szegő recursion.
pub fn log_consistency_residual(alphas: &[Complex64], theta: f64, n: usize) -> Result<f64> {
    let t = track(alphas, theta, n)?;
    let direct = szego::run_point(float::cis(theta), alphas, &[n])?[0].phi_star;
    Ok((t.log_phi_star().exp() - direct).norm() / direct.norm())
}

/// `|γ_j(θ) − γ_j(0) − (j + 1)θ|`.
pub fn alignment_deviation(alphas: &[Complex64], theta: f64, j: usize) -> Result<f64> {
    let at_theta = track(alphas, theta, j)?;
    let at_zero = track(alphas, 0.0, j)?;
    Ok((at_theta.drift() - at_zero.drift()).abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSum {
    /// `Σ_{m=from}^{to−1} α_m e^{iγ_m(θ)}`
    pub sum: Complex64,
    /// Largest modulus of the partial sums ending at `s ∈ [from, to)`.
    pub running_max: f64,
}

pub fn weighted_phase_sum(
    alphas: &[Complex64],
    theta: f64,
    from: usize,
    to: usize,
) -> Result<PhaseSum> {
    if from > to {
        return Err(Error::InvalidArgument(alloc::format!(
            "empty range {from}..{to}"
        )));
    }
    let mut t = track(alphas, theta, from)?;
    if to > alphas.len() {
        return Err(Error::TooShort {
            len: alphas.len(),
            required: to,
        });
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut running_max = 0.0f64;
    for alpha in &alphas[from..to] {
        sum += alpha * t.phase();
        running_max = running_max.max(sum.norm());
        t.step(*alpha)?;
    }
    Ok(PhaseSum { sum, running_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;
    use crate::TAU;
    use alloc::vec;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_alphas(seed: u64, n: usize, max_modulus: f64) -> Vec<Complex64> {
        let mut r = StreamRng::new(seed, 0);
        (0..n)
            .map(|_| float::cis(TAU * r.next_f64()) * (max_modulus * r.next_f64()))
            .collect()
    }

    fn wrap(x: f64) -> f64 {
        let y = x.rem_euclid(TAU);
        if y > PI {
            y - TAU
        } else {
            y
        }
    }

    #[test]
    fn initial_track() {
        let t = PhaseTrack::new(1.3);
        assert_eq!((t.gamma(), t.log_phi_star(), t.n()), (1.3, c(0.0, 0.0), 0));
    }

    #[test]
    fn free_steps_rotate_exactly() {
        for theta in [0.0, 0.1, 1.0, 3.0, 6.2] {
            let mut t = PhaseTrack::new(theta);
            for n in 1..=500usize {
                t = phase_step(&t, c(0.0, 0.0)).unwrap();
                assert_eq!(t.gamma(), (n as f64 + 1.0) * theta);
                assert_eq!(t.log_phi_star(), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn single_step_hand_value() {
        let t = phase_step(&PhaseTrack::new(0.0), c(0.5, 0.0)).unwrap();
        assert_eq!(t.gamma(), 0.0);
        assert!((t.log_phi_star() - c(0.5f64.ln(), 0.0)).norm() < 1e-16);
        let direct = szego::run_point(c(1.0, 0.0), &[c(0.5, 0.0)], &[1]).unwrap()[0];
        assert!((t.log_phi_star().exp() - direct.phi_star).norm() < 1e-16);
        assert!(phase_step(&t, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn log_increment_stays_in_right_half_plane() {
        let alphas = random_alphas(3, 2000, 0.999);
        let mut t = PhaseTrack::new(2.0);
        for a in &alphas {
            let before = t;
            t.step(*a).unwrap();
            let im_log = (t.log_phi_star() - before.log_phi_star()).im;
            assert!(im_log.abs() < PI / 2.0);
        }
    }

    #[test]
    fn residual_cases() {
        let zeros = vec![c(0.0, 0.0); 50];
        assert_eq!(log_consistency_residual(&zeros, 1.0, 50).unwrap(), 0.0);
        assert!(log_consistency_residual(&[c(0.5, 0.0)], PI, 1).unwrap() <= 1e-12);
        let alphas = random_alphas(4, 10_000, 0.3);
        assert!(log_consistency_residual(&alphas, 0.77, 10_000).unwrap() <= 1e-6);
    }

    #[test]
    fn deviation_cases() {
        let zeros = vec![c(0.0, 0.0); 20];
        for theta in [0.0, 0.5, 4.0] {
            assert_eq!(alignment_deviation(&zeros, theta, 20).unwrap(), 0.0);
        }
        for theta in [0.3, 1.0, 2.5, 5.0] {
            let got = alignment_deviation(&[c(0.5, 0.0)], theta, 1).unwrap();
            let expected = (2.0 * (c(1.0, 0.0) - float::cis(theta) * 0.5).ln().im).abs();
            assert!((got - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn weighted_sum_cases() {
        let zeros = vec![c(0.0, 0.0); 10];
        assert_eq!(
            weighted_phase_sum(&zeros, 1.0, 0, 10).unwrap().sum,
            c(0.0, 0.0)
        );

        let mut alphas = vec![c(0.0, 0.0); 10];
        alphas[0] = c(0.5, 0.0);
        let s = weighted_phase_sum(&alphas, 0.0, 0, 1).unwrap();
        assert_eq!((s.sum, s.running_max), (c(0.5, 0.0), 0.5));
        assert_eq!(
            weighted_phase_sum(&alphas, 2.0, 1, 10).unwrap().sum,
            c(0.0, 0.0)
        );
        assert!(weighted_phase_sum(&alphas, 2.0, 1, 11).is_err());
    }

    #[test]
    fn sparse_advance_matches_dense() {
        let mut alphas = vec![c(0.0, 0.0); 3000];
        for (i, a) in [
            (144, c(0.05, 0.01)),
            (1728, c(-0.02, 0.03)),
            (2999, c(0.0, 0.4)),
        ] {
            alphas[i] = a;
        }
        let sparse = SparseAlphas::new(&alphas).unwrap();
        assert_eq!(sparse.get(144), c(0.05, 0.01));
        assert_eq!(sparse.get(145), c(0.0, 0.0));
        for theta in [0.0, 0.01, 2.0] {
            for to in [0, 144, 145, 1728, 2000, 3000] {
                let dense = track(&alphas, theta, to).unwrap();
                let mut fast = PhaseTrack::new(theta);
                fast.advance_sparse(&sparse, to);
                assert_eq!(dense, fast);
            }
        }
    }

    #[test]
    fn winding_is_monotone_in_theta() {
        let alphas = random_alphas(21, 300, 0.5);
        let grid = 20_000;
        let mut prev = f64::NEG_INFINITY;
        for k in 0..grid {
            let g = track(&alphas, TAU * k as f64 / grid as f64, 300)
                .unwrap()
                .gamma();
            assert!(g > prev, "k = {k}");
            prev = g;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn phase_matches_argument(seed in any::<u64>(), n in 1usize..4096, theta in 0.0f64..TAU) {
            let alphas = random_alphas(seed, n, 0.9);
            let t = track(&alphas, theta, n).unwrap();
            let z = float::cis(theta);
            let s = szego::run_point(z, &alphas, &[n]).unwrap()[0];
            let arg = (z * s.phi / s.phi_star).arg();
            prop_assert!(wrap(t.gamma() - arg).abs() <= 1e-9 * n as f64);
            let rel = (t.log_phi_star().exp() - s.phi_star).norm() / s.phi_star.norm();
            prop_assert!(rel <= 1e-9 * n as f64);
        }
    }
}
