//! The Szegő recursion
//!
//! ```text
//! Φ_{n+1}(z)  = z·Φ_n(z) − conj(α_n)·Φ*_n(z)
//! Φ*_{n+1}(z) = Φ*_n(z) − α_n·z·Φ_n(z)
//! ```
//!
//! in pointwise form ([`PointState`]) and coefficient form ([`CoeffPair`]),
//! with monic normalization throughout.

use alloc::vec;
use alloc::vec::Vec;

use crate::ddouble::{Cdd, Dd};
use crate::float;
use crate::{Complex64, Error, Result, TAU};

/// Allowed deviation of `|z|` from 1.
pub const CIRCLE_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_alpha(index: usize, alpha: Complex64) -> Result<()> {
    let modulus = alpha.norm();
    if modulus < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisk { index, modulus })
    }
}

/// Rejects any `|α_j| ≥ 1` (or NaN).
pub fn check_alphas(alphas: &[Complex64]) -> Result<()> {
    alphas
        .iter()
        .enumerate()
        .try_for_each(|(i, a)| check_alpha(i, *a))
}

fn check_on_circle(z: Complex64) -> Result<()> {
    if (z.norm() - 1.0).abs() <= CIRCLE_TOLERANCE {
        Ok(())
    } else {
        Err(Error::OffCircle { re: z.re, im: z.im })
    }
}

/// `(Φ_n(z), Φ*_n(z))` at one point of the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointState {
    pub z: Complex64,
    pub n: usize,
    pub phi: Complex64,
    pub phi_star: Complex64,
}

impl PointState {
    pub fn new(z: Complex64) -> Result<Self> {
        check_on_circle(z)?;
        Ok(Self {
            z,
            n: 0,
            phi: Complex64::new(1.0, 0.0),
            phi_star: Complex64::new(1.0, 0.0),
        })
    }

    pub fn at_angle(theta: f64) -> Self {
        Self {
            z: float::cis(theta),
            n: 0,
            phi: Complex64::new(1.0, 0.0),
            phi_star: Complex64::new(1.0, 0.0),
        }
    }

    pub fn step(&self, alpha: Complex64) -> Result<Self> {
        check_alpha(self.n, alpha)?;
        Ok(self.step_unchecked(alpha))
    }

    #[inline]
    pub(crate) fn step_unchecked(&self, alpha: Complex64) -> Self {
        let z_phi = self.z * self.phi;
        Self {
            z: self.z,
            n: self.n + 1,
            phi: z_phi - alpha.conj() * self.phi_star,
            phi_star: self.phi_star - alpha * z_phi,
        }
    }
}

pub fn init_state(z: Complex64) -> Result<PointState> {
    PointState::new(z)
}

/// Runs the recursion at `z` over `alphas`, returning the states at the
/// requested degrees. `snapshots` must be sorted and at most `alphas.len()`.
pub fn run_point(
    z: Complex64,
    alphas: &[Complex64],
    snapshots: &[usize],
) -> Result<Vec<PointState>> {
    check_alphas(alphas)?;
    if snapshots.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument(
            "snapshot degrees must be sorted".into(),
        ));
    }
    if let Some(&last) = snapshots.last() {
        if last > alphas.len() {
            return Err(Error::TooShort {
                len: alphas.len(),
                required: last,
            });
        }
    }
    let mut state = PointState::new(z)?;
    let mut out = Vec::with_capacity(snapshots.len());
    let mut pending = snapshots.iter().peekable();
    for alpha in alphas
        .iter()
        .copied()
        .chain(core::iter::once(Complex64::new(0.0, 0.0)))
    {
        while pending.next_if(|&&d| d == state.n).is_some() {
            out.push(state);
        }
        if pending.peek().is_none() {
            break;
        }
        state = state.step_unchecked(alpha);
    }
    Ok(out)
}

/// Applies the same `α` to every state. States may sit at different points
/// but must share the degree.
pub fn step_batch(states: &mut [PointState], alpha: Complex64) -> Result<()> {
    if let Some(first) = states.first() {
        check_alpha(first.n, alpha)?;
    }
    for s in states.iter_mut() {
        *s = s.step_unchecked(alpha);
    }
    Ok(())
}

/// States at the `m`-th roots of unity `e^{2πik/m}`.
pub fn grid_states(m: usize) -> Vec<PointState> {
    (0..m)
        .map(|k| PointState::at_angle(TAU * k as f64 / m as f64))
        .collect()
}

/// Coefficients of `Φ_n` and `Φ*_n` in ascending powers of `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffPair {
    phi: Vec<Complex64>,
    phi_star: Vec<Complex64>,
}

impl Default for CoeffPair {
    fn default() -> Self {
        Self::one()
    }
}

impl CoeffPair {
    /// `Φ_0 = Φ*_0 = 1`.
    pub fn one() -> Self {
        Self {
            phi: vec![Complex64::new(1.0, 0.0)],
            phi_star: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Rebuilds a pair from stored coefficients, checking the monic and
    /// star-reversal invariants up to `tolerance`.
    pub fn from_parts(
        phi: Vec<Complex64>,
        phi_star: Vec<Complex64>,
        tolerance: f64,
    ) -> Result<Self> {
        let pair = Self { phi, phi_star };
        if pair.phi.is_empty() || pair.phi.len() != pair.phi_star.len() {
            return Err(Error::InvalidArgument(
                "coefficient vectors must be nonempty and of equal length".into(),
            ));
        }
        let one = Complex64::new(1.0, 0.0);
        if pair.phi[pair.degree()] != one || pair.phi_star[0] != one {
            return Err(Error::InvalidArgument(
                "Φ must be monic and Φ* must have constant term 1".into(),
            ));
        }
        if pair.star_defect() > tolerance {
            return Err(Error::InvalidArgument(
                "coefficients violate Φ*_n(z) = z^n·conj(Φ_n(1/conj z))".into(),
            ));
        }
        Ok(pair)
    }

    pub fn from_alphas(alphas: &[Complex64]) -> Result<Self> {
        let mut pair = Self::one();
        pair.phi.reserve(alphas.len());
        pair.phi_star.reserve(alphas.len());
        for a in alphas {
            pair.step(*a)?;
        }
        Ok(pair)
    }

    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn phi(&self) -> &[Complex64] {
        &self.phi
    }

    pub fn phi_star(&self) -> &[Complex64] {
        &self.phi_star
    }

    /// In-place coefficient step. Runs top-down so every read sees the
    /// previous degree's values.
    pub fn step(&mut self, alpha: Complex64) -> Result<()> {
        check_alpha(self.degree(), alpha)?;
        let zero = Complex64::new(0.0, 0.0);
        let ac = alpha.conj();
        self.phi.push(zero);
        self.phi_star.push(zero);
        let n = self.phi.len() - 1;
        for i in (1..=n).rev() {
            let shifted = self.phi[i - 1];
            let star = self.phi_star[i];
            self.phi[i] = shifted - ac * star;
            self.phi_star[i] = star - alpha * shifted;
        }
        self.phi[0] = -ac * self.phi_star[0];
        Ok(())
    }

    pub fn eval_phi(&self, z: Complex64) -> Complex64 {
        horner(&self.phi, z)
    }

    pub fn eval_phi_star(&self, z: Complex64) -> Complex64 {
        horner(&self.phi_star, z)
    }

    /// `max_j |Φ*[j] − conj(Φ[n−j])|`.
    pub fn star_defect(&self) -> f64 {
        let n = self.degree();
        (0..=n)
            .map(|j| (self.phi_star[j] - self.phi[n - j].conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// Returns the pair advanced by one step.
pub fn coeff_step(c: &CoeffPair, alpha: Complex64) -> Result<CoeffPair> {
    let mut next = c.clone();
    next.step(alpha)?;
    Ok(next)
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// `‖Φ_n‖_{L²(μ)} = ∏_{j<n} (1 − |α_j|²)^{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormConstant {
    pub n: usize,
    pub kappa: f64,
}

pub fn norm_constant(alphas: &[Complex64], n: usize) -> Result<NormConstant> {
    if n > alphas.len() {
        return Err(Error::TooShort {
            len: alphas.len(),
            required: n,
        });
    }
    check_alphas(&alphas[..n])?;
    let log_kappa: f64 = alphas[..n]
        .iter()
        .map(|a| 0.5 * libm::log1p(-a.norm_sqr()))
        .sum();
    Ok(NormConstant {
        n,
        kappa: float::exp(log_kappa),
    })
}

/// Dense square matrix of complex inner products.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    quad_points: usize,
    entries: Vec<Complex64>,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Trapezoid nodes, or 0 for the exact moment construction.
    pub fn quad_points(&self) -> usize {
        self.quad_points
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    /// `‖G − I‖_max`.
    pub fn identity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((self.get(r, c) - target).norm());
            }
        }
        worst
    }

    /// `‖self − other‖_max`.
    pub fn max_difference(&self, other: &Self) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Coefficient rows of `Φ_0, …, Φ_n` and the coefficients of `Φ*_n` in
/// double-double precision.
fn coefficient_rows_dd(alphas: &[Complex64]) -> (Vec<Vec<Cdd>>, Vec<Cdd>) {
    let mut phi = vec![Cdd::ONE];
    let mut star = vec![Cdd::ONE];
    let mut rows = vec![phi.clone()];
    for a in alphas {
        let a = Cdd::from_c64(*a);
        let d = phi.len();
        let mut next_phi = vec![Cdd::ZERO; d + 1];
        let mut next_star = vec![Cdd::ZERO; d + 1];
        for k in 0..=d {
            let shifted = if k > 0 { phi[k - 1] } else { Cdd::ZERO };
            let same = if k < d { star[k] } else { Cdd::ZERO };
            next_phi[k] = shifted - a.conj() * same;
            next_star[k] = same - a * shifted;
        }
        phi = next_phi;
        star = next_star;
        rows.push(phi.clone());
    }
    (rows, star)
}

fn moments_dd(alphas: &[Complex64]) -> Vec<Cdd> {
    let n = alphas.len();
    let (_, den) = coefficient_rows_dd(alphas);
    let negated: Vec<Complex64> = alphas.iter().map(|a| -a).collect();
    let (_, num) = coefficient_rows_dd(&negated);
    let half = Dd::from_f64(0.5);
    let mut f: Vec<Cdd> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let mut v = num[m];
        for i in 1..=m {
            v = v - den[i] * f[m - i];
        }
        f.push(v);
    }
    let mut c: Vec<Cdd> = f.iter().map(|x| x.scale(half)).collect();
    c[0] = Cdd::ONE;
    c
}

/// Moments `c_m = ∫ e^{−imθ} dμ_n`, `0 ≤ m ≤ n`, of the Bernstein–Szegő
/// measure built from `alphas` (length `n`).
///
/// The Carathéodory function of that measure is `Ψ*_n/Φ*_n`, where `Ψ_n`
/// is the monic polynomial for the parameters `−α_j`, so the moments are
/// half the Taylor coefficients of that quotient. The division runs in
/// double-double precision.
pub fn bernstein_szego_moments(alphas: &[Complex64]) -> Result<Vec<Complex64>> {
    check_alphas(alphas)?;
    Ok(moments_dd(alphas).into_iter().map(Cdd::to_c64).collect())
}

/// Gram matrix of the orthonormal `φ_0, …, φ_n` under the Bernstein–Szegő
/// measure `dθ / (2π|φ_n(e^{iθ})|²)` built from `alphas` (length `n`),
/// from the exact moments of [`bernstein_szego_moments`].
///
/// In the monomial basis the sums cancel by a factor up to
/// `‖Φ_n‖_1² / κ_n²`, which exceeds `10^10` for degree 32 with moduli near
/// 0.9, so coefficients, moments and sums are all carried in double-double
/// precision.
pub fn orthogonality_oracle(alphas: &[Complex64]) -> Result<GramMatrix> {
    check_alphas(alphas)?;
    let n = alphas.len();
    let dim = n + 1;
    let c = moments_dd(alphas);
    // ∫ e^{idθ} dμ
    let moment = |d: isize| {
        if d >= 0 {
            c[d as usize].conj()
        } else {
            c[(-d) as usize]
        }
    };
    let (rows, _) = coefficient_rows_dd(alphas);
    let mut kappa_sq = Vec::with_capacity(dim);
    let mut k2 = Dd::ONE;
    kappa_sq.push(1.0);
    for a in alphas {
        k2 = k2 * (Dd::ONE - Cdd::from_c64(*a).norm_sqr());
        kappa_sq.push(k2.to_f64());
    }
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    for (r, left) in rows.iter().enumerate() {
        // ∫ Φ_r e^{−ibθ} dμ
        let against: Vec<Cdd> = (0..dim)
            .map(|b| {
                left.iter().enumerate().fold(Cdd::ZERO, |acc, (a, x)| {
                    acc + *x * moment(a as isize - b as isize)
                })
            })
            .collect();
        for (col, right) in rows.iter().enumerate() {
            let sum = right
                .iter()
                .zip(&against)
                .fold(Cdd::ZERO, |acc, (y, l)| acc + y.conj() * *l);
            entries[r * dim + col] = sum.to_c64() / float::sqrt(kappa_sq[r] * kappa_sq[col]);
        }
    }
    Ok(GramMatrix {
        dim,
        quad_points: 0,
        entries,
    })
}

/// The same Gram matrix by the `m`-point trapezoid rule on the roots of
/// unity. The integrand is rational with poles near the circle, so this
/// converges only geometrically in `m`.
pub fn trapezoid_gram(alphas: &[Complex64], m: usize) -> Result<GramMatrix> {
    check_alphas(alphas)?;
    let n = alphas.len();
    if !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    let required = 8 * (n + 1);
    if m < required {
        return Err(Error::GridTooSmall {
            size: m,
            degree: n,
            required,
        });
    }
    let kappas = (0..=n)
        .map(|j| norm_constant(alphas, j).map(|k| k.kappa))
        .collect::<Result<Vec<f64>>>()?;
    let dim = n + 1;
    let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
    let mut orthonormal = vec![Complex64::new(0.0, 0.0); dim];
    for k in 0..m {
        let mut state = PointState::at_angle(TAU * k as f64 / m as f64);
        for j in 0..dim {
            orthonormal[j] = state.phi / kappas[j];
            if j < n {
                state = state.step_unchecked(alphas[j]);
            }
        }
        let weight = 1.0 / (orthonormal[n].norm_sqr() * m as f64);
        for r in 0..dim {
            let left = orthonormal[r] * weight;
            for c in 0..dim {
                entries[r * dim + c] += left * orthonormal[c].conj();
            }
        }
    }
    Ok(GramMatrix {
        dim,
        quad_points: m,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;
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

    #[test]
    fn init_state_cases() {
        let s = PointState::new(c(1.0, 0.0)).unwrap();
        assert_eq!((s.phi, s.phi_star, s.n), (c(1.0, 0.0), c(1.0, 0.0), 0));
        let s = PointState::new(float::cis(core::f64::consts::FRAC_PI_3)).unwrap();
        assert_eq!((s.phi, s.phi_star), (c(1.0, 0.0), c(1.0, 0.0)));
        assert!(matches!(
            PointState::new(c(2.0, 0.0)),
            Err(Error::OffCircle { .. })
        ));
    }

    #[test]
    fn step_cases() {
        let z = float::cis(0.3);
        let s = PointState::new(z).unwrap().step(c(0.0, 0.0)).unwrap();
        assert_eq!((s.phi, s.phi_star), (z, c(1.0, 0.0)));

        let s = PointState::new(c(1.0, 0.0))
            .unwrap()
            .step(c(0.5, 0.0))
            .unwrap();
        assert_eq!((s.phi, s.phi_star), (c(0.5, 0.0), c(0.5, 0.0)));

        let s = PointState::new(c(-1.0, 0.0))
            .unwrap()
            .step(c(0.5, 0.0))
            .unwrap();
        assert_eq!((s.phi, s.phi_star), (c(-1.5, 0.0), c(1.5, 0.0)));

        assert!(matches!(
            PointState::new(z).unwrap().step(c(0.6, 0.8)),
            Err(Error::OutsideDisk { .. })
        ));
    }

    #[test]
    fn run_point_free_and_single() {
        let z = float::cis(0.7);
        let zeros = vec![c(0.0, 0.0); 10];
        let snaps = run_point(z, &zeros, &[0, 3, 10]).unwrap();
        assert_eq!(snaps.len(), 3);
        for s in &snaps {
            assert!((s.phi - z.powi(s.n as i32)).norm() < 1e-14);
            assert_eq!(s.phi_star, c(1.0, 0.0));
        }

        let mut alphas = vec![c(0.0, 0.0); 6];
        alphas[0] = c(0.5, 0.0);
        let snaps = run_point(c(-1.0, 0.0), &alphas, &[1, 2, 3, 6]).unwrap();
        for s in &snaps {
            assert_eq!(s.phi_star, c(1.5, 0.0));
            assert_eq!(s.phi.norm(), 1.5);
        }
        assert!(run_point(z, &alphas, &[7]).is_err());
        assert!(run_point(z, &alphas, &[3, 2]).is_err());
    }

    #[test]
    fn coeff_step_cases() {
        let free = coeff_step(&CoeffPair::one(), c(0.0, 0.0)).unwrap();
        assert_eq!(free.phi(), &[c(-0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(free.phi_star(), &[c(1.0, 0.0), c(0.0, 0.0)]);

        let one = coeff_step(&CoeffPair::one(), c(0.5, 0.0)).unwrap();
        assert_eq!(one.phi(), &[c(-0.5, 0.0), c(1.0, 0.0)]);
        assert_eq!(one.phi_star(), &[c(1.0, 0.0), c(-0.5, 0.0)]);
        for k in 0..16 {
            let z = float::cis(TAU * k as f64 / 16.0);
            let s = PointState::new(z).unwrap().step(c(0.5, 0.0)).unwrap();
            assert!((one.eval_phi(z) - s.phi).norm() < 1e-15);
            assert!((one.eval_phi_star(z) - s.phi_star).norm() < 1e-15);
        }
    }

    #[test]
    fn norm_constant_cases() {
        assert_eq!(norm_constant(&[c(0.0, 0.0); 5], 5).unwrap().kappa, 1.0);
        assert!((norm_constant(&[c(0.6, 0.0)], 1).unwrap().kappa - 0.8).abs() < 1e-15);
        assert!(norm_constant(&[c(0.6, 0.0)], 2).is_err());
    }

    /// `∫ |p|² dμ_n` for a coefficient vector `p` from the exact moments.
    fn moment_norm_sqr(p: &[Complex64], c: &[Complex64]) -> f64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for (a, x) in p.iter().enumerate() {
            for (b, y) in p.iter().enumerate() {
                let m = if a >= b { c[a - b].conj() } else { c[b - a] };
                sum += x * y.conj() * m;
            }
        }
        sum.re
    }

    #[test]
    fn norm_constant_matches_quadrature() {
        // ∫ dθ / (2π|Φ*_n|²) = 1/κ_n² for the Bernstein–Szegő measure.
        let alphas = random_alphas(64, 64, 0.2);
        let kappa = norm_constant(&alphas, 64).unwrap().kappa;
        let m = 1 << 14;
        let mean_inv: f64 = grid_states(m)
            .into_iter()
            .map(|mut s| {
                for a in &alphas {
                    s = s.step_unchecked(*a);
                }
                1.0 / s.phi_star.norm_sqr()
            })
            .sum::<f64>()
            / m as f64;
        let quad = 1.0 / mean_inv.sqrt();
        assert!((quad - kappa).abs() <= 1e-8 * kappa, "{quad} vs {kappa}");
    }

    #[test]
    fn norm_constant_matches_moments() {
        let alphas = random_alphas(64, 64, 0.5);
        let kappa = norm_constant(&alphas, 64).unwrap().kappa;
        let c = bernstein_szego_moments(&alphas).unwrap();
        let pair = CoeffPair::from_alphas(&alphas).unwrap();
        let norm = moment_norm_sqr(pair.phi(), &c);
        assert!(
            (norm - kappa * kappa).abs() <= 1e-8 * kappa * kappa,
            "{norm} vs {}",
            kappa * kappa
        );
    }

    #[test]
    fn moments_of_poisson_measure() {
        assert_eq!(bernstein_szego_moments(&[]).unwrap(), vec![c(1.0, 0.0)]);
        // 0.75/|1 − z/2|² has moments 2^{−m}
        let m = bernstein_szego_moments(&[c(0.5, 0.0)]).unwrap();
        assert_eq!(m, vec![c(1.0, 0.0), c(0.5, 0.0)]);
        let rotated = bernstein_szego_moments(&[float::cis(0.3) * 0.5]).unwrap();
        assert!((rotated[1] - float::cis(0.3) * 0.5).norm() < 1e-15);
    }

    #[test]
    fn moments_match_converged_trapezoid() {
        let alphas = random_alphas(17, 12, 0.4);
        let c = bernstein_szego_moments(&alphas).unwrap();
        let kappa = norm_constant(&alphas, 12).unwrap().kappa;
        let m = 1 << 14;
        let weights: Vec<(Complex64, f64)> = grid_states(m)
            .into_iter()
            .map(|mut s| {
                for a in &alphas {
                    s = s.step_unchecked(*a);
                }
                (s.z, kappa * kappa / (s.phi_star.norm_sqr() * m as f64))
            })
            .collect();
        for (k, ck) in c.iter().enumerate() {
            let quad: Complex64 = weights
                .iter()
                .map(|(z, w)| z.conj().powu(k as u32) * w)
                .sum();
            assert!((quad - ck).norm() < 1e-12, "m = {k}: {quad} vs {ck}");
        }
    }

    #[test]
    fn oracle_small_cases() {
        let g = orthogonality_oracle(&[]).unwrap();
        assert_eq!(g.dim(), 1);
        assert!((g.get(0, 0) - 1.0).norm() < 1e-15);

        let g = orthogonality_oracle(&[c(0.5, 0.0)]).unwrap();
        assert!(g.identity_defect() < 1e-14);

        let alphas = random_alphas(42, 8, 0.9);
        assert!(orthogonality_oracle(&alphas).unwrap().identity_defect() <= 1e-8);
    }

    #[test]
    fn oracle_up_to_degree_32() {
        for (seed, n) in [(1, 4), (2, 8), (3, 16), (4, 32), (5, 32)] {
            let alphas = random_alphas(seed, n, 0.9);
            let defect = orthogonality_oracle(&alphas).unwrap().identity_defect();
            assert!(defect <= 1e-8, "n = {n}: {defect}");
        }
    }

    #[test]
    fn oracle_survives_zeros_near_the_circle() {
        for seed in 0..40 {
            let alphas = random_alphas(1000 + seed, 32, 0.9);
            let defect = orthogonality_oracle(&alphas).unwrap().identity_defect();
            assert!(defect <= 1e-12, "seed {seed}: {defect}");
        }
    }

    #[test]
    fn oracle_detects_a_wrong_measure() {
        let alphas = random_alphas(3, 8, 0.5);
        let c = moments_dd(&alphas);
        // ∫ Φ_8 dμ = Σ_a Φ_8[a]·conj(c_a)
        let integral = |phi: &[Cdd]| {
            phi.iter()
                .zip(&c)
                .fold(Cdd::ZERO, |acc, (x, m)| acc + *x * m.conj())
                .to_c64()
                .norm()
        };
        let right = coefficient_rows_dd(&alphas).0;
        let wrong = coefficient_rows_dd(&random_alphas(4, 8, 0.5)).0;
        assert!(integral(&right[8]) < 1e-20);
        assert!(integral(&wrong[8]) > 1e-3);
    }

    #[test]
    fn f64_coefficients_match_extended_precision() {
        let alphas = random_alphas(11, 32, 0.9);
        let (rows, star) = coefficient_rows_dd(&alphas);
        let pair = CoeffPair::from_alphas(&alphas).unwrap();
        let scale: f64 = pair.phi().iter().map(|c| c.norm()).sum();
        for (x, y) in pair.phi().iter().zip(&rows[32]) {
            assert!((x - y.to_c64()).norm() <= 1e-13 * scale);
        }
        for (x, y) in pair.phi_star().iter().zip(&star) {
            assert!((x - y.to_c64()).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn trapezoid_agrees_for_small_parameters() {
        let alphas = random_alphas(9, 8, 0.3);
        let exact = orthogonality_oracle(&alphas).unwrap();
        let quad = trapezoid_gram(&alphas, 1024).unwrap();
        assert_eq!(quad.quad_points(), 1024);
        assert!(quad.max_difference(&exact) < 1e-12);
        assert!(
            trapezoid_gram(&[c(0.5, 0.0)], 64)
                .unwrap()
                .identity_defect()
                < 1e-14
        );

        assert!(matches!(
            trapezoid_gram(&alphas, 64),
            Err(Error::GridTooSmall { .. })
        ));
        assert!(matches!(
            trapezoid_gram(&alphas, 100),
            Err(Error::NotPowerOfTwo(100))
        ));
    }

    #[test]
    fn nonvanishing_lower_bound() {
        let alphas = random_alphas(8, 200, 0.5);
        let floor: f64 = alphas.iter().map(|a| 1.0 - a.norm()).product();
        for mut s in grid_states(512) {
            for a in &alphas {
                s = s.step_unchecked(*a);
            }
            assert!(s.phi_star.norm() >= floor);
        }
    }

    #[test]
    fn batch_matches_pointwise() {
        let alphas = random_alphas(11, 40, 0.7);
        let mut batch = grid_states(32);
        for a in &alphas {
            step_batch(&mut batch, *a).unwrap();
        }
        for s in &batch {
            let single = run_point(s.z, &alphas, &[40]).unwrap()[0];
            assert_eq!(single.phi_star, s.phi_star);
        }
    }

    #[test]
    fn from_parts_validates() {
        let pair = CoeffPair::from_alphas(&random_alphas(3, 12, 0.8)).unwrap();
        let back =
            CoeffPair::from_parts(pair.phi().to_vec(), pair.phi_star().to_vec(), 1e-12).unwrap();
        assert_eq!(back, pair);
        let mut bad = pair.phi_star().to_vec();
        bad[3] += 1e-6;
        assert!(CoeffPair::from_parts(pair.phi().to_vec(), bad, 1e-12).is_err());
    }

    proptest! {
        #[test]
        fn circle_identity(seed in any::<u64>(), n in 1usize..400, theta in 0.0f64..TAU) {
            let alphas = random_alphas(seed, n, 0.95);
            let s = run_point(float::cis(theta), &alphas, &[n]).unwrap()[0];
            let rel = (s.phi.norm() - s.phi_star.norm()).abs() / s.phi_star.norm();
            prop_assert!(rel <= 1e-10 * n as f64);
        }

        #[test]
        fn coefficient_form_invariants(seed in any::<u64>(), n in 1usize..120) {
            let alphas = random_alphas(seed, n, 0.9);
            let mut pair = CoeffPair::one();
            for a in &alphas {
                pair.step(*a).unwrap();
                prop_assert_eq!(pair.phi()[pair.degree()], c(1.0, 0.0));
                prop_assert_eq!(pair.phi_star()[0], c(1.0, 0.0));
                prop_assert!(pair.star_defect() <= 1e-12);
            }
            // both evaluations lose accuracy relative to the ℓ¹ coefficient mass
            let mass: f64 = pair.phi_star().iter().map(|x| x.norm()).sum();
            let growth: f64 = alphas.iter().map(|a| 1.0 + a.norm()).product();
            let tol = 1e-13 * n as f64 * mass.max(growth);
            let mut r = StreamRng::new(seed, 1);
            for _ in 0..4 {
                let z = float::cis(TAU * r.next_f64());
                let s = run_point(z, &alphas, &[n]).unwrap()[0];
                prop_assert!((pair.eval_phi_star(z) - s.phi_star).norm() <= tol);
                prop_assert!((pair.eval_phi(z) - s.phi).norm() <= tol);
            }
        }

        #[test]
        fn kappa_is_nonincreasing(seed in any::<u64>(), n in 1usize..100) {
            let alphas = random_alphas(seed, n, 0.99);
            let ks: Vec<f64> = (0..=n).map(|j| norm_constant(&alphas, j).unwrap().kappa).collect();
            prop_assert!(ks.iter().all(|k| *k > 0.0 && *k <= 1.0));
            prop_assert!(ks.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
