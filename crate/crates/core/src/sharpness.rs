//! Alignment sets and blow-up witnesses for sparse parameter sequences.
//!
//! Level `j` looks at the single parameter `α_{T^j}` and the set
//! `Λ_j = {θ : |α_{T^j}| ≤ 2 Re(α_{T^j} e^{iγ_{T^j}(θ)})}`. Sets are resolved
//! on the uniform grid `θ_i = 2πi/G`; an interval is a maximal circular run
//! of `r` grid points and has length `(r − 1)·2π/G`, except that the full
//! grid is the whole circle of length `2π`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::float;
use crate::prufer::{PhaseTrack, SparseAlphas};
use crate::{Complex64, Error, Result, TAU};

/// Grid points required per unit of `T^j + 1`.
pub const GRID_FACTOR: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub length: f64,
    start_index: usize,
    points: usize,
}

impl Interval {
    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    /// Grid index of the middle point of the run.
    fn middle_index(&self, grid: usize) -> usize {
        (self.start_index + (self.points - 1) / 2) % grid
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentSet {
    pub level: u32,
    /// `T^level`
    pub index: u64,
    pub intervals: Vec<Interval>,
    pub total_measure: f64,
    /// Grid spacing `2π/G`.
    pub resolution: f64,
}

impl AlignmentSet {
    pub fn largest(&self) -> Option<&Interval> {
        self.intervals
            .iter()
            .max_by(|a, b| a.length.total_cmp(&b.length))
    }

    pub fn is_full_circle(&self) -> bool {
        self.intervals.len() == 1 && self.intervals[0].length == TAU
    }
}

/// `T^j`, checked.
pub fn level_index(t: u64, j: u32) -> Result<u64> {
    t.checked_pow(j).ok_or(Error::Overflow("T^j"))
}

/// `(T^{N+1} + 1)/(T^N + 1)`.
pub fn t_condition_ratio(t: u64, n: u32) -> f64 {
    let t = t as f64;
    let tn = float::powf(t, f64::from(n));
    (tn * t + 1.0) / (tn + 1.0)
}

/// `(2π + π/6)/(T^{N+1} + 1)`, the interval length promised inside
/// `∩_{j≤N} Λ_j`.
pub fn induction_bound(t: u64, n: u32) -> f64 {
    (TAU + PI / 6.0) / (float::powf(t as f64, f64::from(n) + 1.0) + 1.0)
}

fn aligned(alpha: Complex64, phase: Complex64) -> bool {
    alpha.norm() <= 2.0 * (alpha * phase).re
}

fn check_levels(alphas: &[Complex64], t: u64, last: u32, grid: usize) -> Result<Vec<u64>> {
    if t < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "T = {t} must be at least 2"
        )));
    }
    let indices = (0..=last)
        .map(|j| level_index(t, j))
        .collect::<Result<Vec<u64>>>()?;
    let deepest = indices[last as usize];
    let required = deepest
        .checked_add(1)
        .and_then(|x| x.checked_mul(GRID_FACTOR))
        .ok_or(Error::Overflow("grid requirement"))?;
    if (grid as u64) < required {
        return Err(Error::GridTooSmall {
            size: grid,
            degree: deepest as usize,
            required: required as usize,
        });
    }
    if (alphas.len() as u64) <= deepest {
        return Err(Error::TooShort {
            len: alphas.len(),
            required: deepest as usize + 1,
        });
    }
    Ok(indices)
}

/// Membership of every grid angle in `Λ_j` for each requested index.
fn memberships(sparse: &SparseAlphas, indices: &[u64], grid: usize) -> Vec<Vec<bool>> {
    let mut out = vec![vec![false; grid]; indices.len()];
    for i in 0..grid {
        let mut track = PhaseTrack::new(TAU * i as f64 / grid as f64);
        for (row, &index) in out.iter_mut().zip(indices) {
            let index = index as usize;
            track.advance_sparse(sparse, index);
            row[i] = aligned(sparse.get(index), track.phase());
        }
    }
    out
}

fn intervals(members: &[bool]) -> Vec<Interval> {
    let grid = members.len();
    let h = TAU / grid as f64;
    let Some(gap) = members.iter().position(|m| !m) else {
        return vec![Interval {
            start: 0.0,
            length: TAU,
            start_index: 0,
            points: grid,
        }];
    };
    let mut out = Vec::new();
    let mut run: Option<(usize, usize)> = None;
    for step in 1..=grid {
        let i = (gap + step) % grid;
        match (members[i], run.as_mut()) {
            (true, Some((_, points))) => *points += 1,
            (true, None) => run = Some((i, 1)),
            (false, Some(_)) => {
                let (start_index, points) = run.take().unwrap();
                out.push(Interval {
                    start: start_index as f64 * h,
                    length: (points - 1) as f64 * h,
                    start_index,
                    points,
                });
            }
            (false, None) => {}
        }
    }
    out
}

fn build_set(level: u32, index: u64, members: &[bool]) -> AlignmentSet {
    let intervals = intervals(members);
    AlignmentSet {
        level,
        index,
        total_measure: intervals.iter().map(|i| i.length).sum(),
        intervals,
        resolution: TAU / members.len() as f64,
    }
}

fn check_resolved(set: &AlignmentSet, alpha: Complex64) -> Result<()> {
    let unresolved = alpha != Complex64::new(0.0, 0.0)
        && set
            .intervals
            .iter()
            .any(|i| i.length < 2.0 * set.resolution);
    if unresolved {
        return Err(Error::UnresolvedGrid { level: set.level });
    }
    Ok(())
}

/// `Λ_j` on a grid of `grid` angles.
pub fn alignment_set(alphas: &[Complex64], t: u64, j: u32, grid: usize) -> Result<AlignmentSet> {
    let indices = check_levels(alphas, t, j, grid)?;
    let sparse = SparseAlphas::new(alphas)?;
    let index = indices[j as usize];
    let members = memberships(&sparse, &[index], grid);
    let set = build_set(j, index, &members[0]);
    check_resolved(&set, sparse.get(index as usize))?;
    Ok(set)
}

/// Witness data for `∩_{j≤N} Λ_j` at one depth `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessLevel {
    pub level: u32,
    /// Length of the largest interval of the intersection.
    pub measure: f64,
    pub total_measure: f64,
    pub bound: f64,
    pub theta_star: f64,
    /// `Σ_{j≤N} Re(α_{T^j} e^{iγ_{T^j}(θ*)})`
    pub achieved: f64,
    /// `½ Σ_{j≤N} |α_{T^j}|`
    pub lower: f64,
    /// Every `Λ_j` inequality holds at `θ*` when recomputed directly.
    pub pointwise_verified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupWitness {
    pub theta_star: f64,
    /// Deepest level included.
    pub depth: u32,
    pub aligned_sum_lower: f64,
    pub achieved: f64,
    pub measure: f64,
    pub bound: f64,
    pub resolution: f64,
    pub levels: Vec<WitnessLevel>,
    pub sets: Vec<AlignmentSet>,
}

fn verify_at(sparse: &SparseAlphas, indices: &[u64], theta: f64) -> (f64, f64, bool) {
    let mut track = PhaseTrack::new(theta);
    let mut achieved = 0.0;
    let mut lower = 0.0;
    let mut ok = true;
    for &index in indices {
        let index = index as usize;
        track.advance_sparse(sparse, index);
        let alpha = sparse.get(index);
        let phase = track.phase();
        achieved += (alpha * phase).re;
        lower += 0.5 * alpha.norm();
        ok &= aligned(alpha, phase);
    }
    (achieved, lower, ok)
}

/// Intersects `Λ_0, …, Λ_J` and picks `θ*` at the middle grid point of the
/// largest interval of each partial intersection.
pub fn intersection_witness(
    alphas: &[Complex64],
    t: u64,
    depth: u32,
    grid: usize,
) -> Result<BlowupWitness> {
    let indices = check_levels(alphas, t, depth, grid)?;
    let sparse = SparseAlphas::new(alphas)?;
    let members = memberships(&sparse, &indices, grid);
    let sets = members
        .iter()
        .zip(&indices)
        .enumerate()
        .map(|(j, (m, &index))| {
            let set = build_set(j as u32, index, m);
            check_resolved(&set, sparse.get(index as usize)).map(|_| set)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut running = vec![true; grid];
    let mut levels = Vec::with_capacity(indices.len());
    for (n, m) in members.iter().enumerate() {
        running.iter_mut().zip(m).for_each(|(r, m)| *r &= *m);
        let set = build_set(n as u32, indices[n], &running);
        let Some(largest) = set.largest().copied() else {
            return Err(Error::EmptyIntersection { level: n as u32 });
        };
        let theta_star = TAU * largest.middle_index(grid) as f64 / grid as f64;
        let (achieved, lower, pointwise_verified) = verify_at(&sparse, &indices[..=n], theta_star);
        levels.push(WitnessLevel {
            level: n as u32,
            measure: largest.length,
            total_measure: set.total_measure,
            bound: induction_bound(t, n as u32),
            theta_star,
            achieved,
            lower,
            pointwise_verified,
        });
    }
    let last = *levels.last().unwrap();
    Ok(BlowupWitness {
        theta_star: last.theta_star,
        depth,
        aligned_sum_lower: last.lower,
        achieved: last.achieved,
        measure: last.measure,
        bound: last.bound,
        resolution: TAU / grid as f64,
        levels,
        sets,
    })
}

/// `max_θ |γ_{T^j}(θ) − γ_{T^j}(0) − (T^j + 1)θ|` over `grid` angles, for
/// each `j ≤ depth`.
pub fn max_alignment_deviation(
    alphas: &[Complex64],
    t: u64,
    depth: u32,
    grid: usize,
) -> Result<Vec<f64>> {
    let indices = check_levels(alphas, t, depth, grid)?;
    let sparse = SparseAlphas::new(alphas)?;
    let drifts = |theta: f64| {
        let mut track = PhaseTrack::new(theta);
        indices
            .iter()
            .map(|&index| {
                track.advance_sparse(&sparse, index as usize);
                track.drift()
            })
            .collect::<Vec<f64>>()
    };
    let base = drifts(0.0);
    let mut worst = vec![0.0f64; indices.len()];
    for i in 1..grid {
        for ((w, d), b) in worst
            .iter_mut()
            .zip(drifts(TAU * i as f64 / grid as f64))
            .zip(&base)
        {
            *w = w.max((d - b).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthPoint {
    pub level: u32,
    pub index: u64,
    /// `max_θ |Σ_{n≤T^level} α_n e^{iγ_n(θ)}|` over the grid.
    pub max_modulus: f64,
}

/// Grid maxima of the weighted phase sums up to each `T^j`, `j ≤ levels`.
pub fn growth_trajectory(
    alphas: &[Complex64],
    t: u64,
    levels: u32,
    grid: usize,
) -> Result<Vec<GrowthPoint>> {
    if t < 2 || grid == 0 {
        return Err(Error::InvalidArgument(alloc::format!(
            "T = {t} must be at least 2 and the grid nonempty"
        )));
    }
    let indices = (0..=levels)
        .map(|j| level_index(t, j))
        .collect::<Result<Vec<u64>>>()?;
    let deepest = indices[levels as usize];
    if (alphas.len() as u64) <= deepest {
        return Err(Error::TooShort {
            len: alphas.len(),
            required: deepest as usize + 1,
        });
    }
    let sparse = SparseAlphas::new(alphas)?;
    let mut maxima = vec![0.0f64; indices.len()];
    for i in 0..grid {
        let mut track = PhaseTrack::new(TAU * i as f64 / grid as f64);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut level = 0;
        for &(index, alpha) in sparse.nonzero() {
            while level < indices.len() && (index as u64) > indices[level] {
                maxima[level] = maxima[level].max(sum.norm());
                level += 1;
            }
            if level == indices.len() {
                break;
            }
            track.advance_sparse(&sparse, index);
            sum += alpha * track.phase();
        }
        for m in &mut maxima[level..] {
            *m = m.max(sum.norm());
        }
    }
    Ok(indices
        .iter()
        .zip(maxima)
        .enumerate()
        .map(|(j, (&index, max_modulus))| GrowthPoint {
            level: j as u32,
            index,
            max_modulus,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verblunsky::{sample_parameters, Envelope, Randomizer, SlowFunction};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn construction(epsilon: f64, levels: u32) -> (Envelope, usize) {
        let env = Envelope::sparse_geometric(12, epsilon, SlowFunction::One).unwrap();
        (env, 12usize.pow(levels) + 1)
    }

    #[test]
    fn t_condition_holds_for_twelve() {
        for n in 0..=6 {
            assert!(t_condition_ratio(12, n) >= 6.5, "N = {n}");
        }
        assert!(t_condition_ratio(11, 0) < 6.5);
        assert!((induction_bound(12, 0) - (TAU + PI / 6.0) / 13.0).abs() < 1e-15);
    }

    #[test]
    fn zero_parameter_gives_full_circle() {
        let alphas = vec![c(0.0, 0.0); 200];
        let set = alignment_set(&alphas, 12, 2, 1 << 14).unwrap();
        assert!(set.is_full_circle());
        assert_eq!(set.total_measure, TAU);

        let w = intersection_witness(&alphas, 12, 2, 1 << 14).unwrap();
        assert_eq!((w.achieved, w.aligned_sum_lower), (0.0, 0.0));
        assert_eq!(w.measure, TAU);
        assert!(w.levels.iter().all(|l| l.pointwise_verified));
    }

    #[test]
    fn base_level_third_of_circle() {
        let h = TAU / 4096.0;
        for phase in [0.0, 0.7, 2.0, -1.3] {
            let mut alphas = vec![c(0.0, 0.0); 2];
            alphas[1] = crate::float::cis(phase) * 0.3;
            let set = alignment_set(&alphas, 12, 0, 4096).unwrap();
            let largest = set.largest().unwrap().length;
            assert!(largest >= PI / 3.0 - 2.0 * h, "{largest}");
            assert!((set.total_measure - TAU / 3.0).abs() < 4.0 * h);

            let w = intersection_witness(&alphas, 12, 0, 4096).unwrap();
            assert!(w.measure >= PI / 3.0 - 2.0 * h);
            assert!(w.achieved >= w.aligned_sum_lower);
        }
    }

    #[test]
    fn positive_real_level_two() {
        let (env, len) = construction(0.01, 2);
        let alphas: Vec<Complex64> = env.values(len).into_iter().map(|a| c(a, 0.0)).collect();
        let set = alignment_set(&alphas, 12, 2, 1 << 16).unwrap();
        assert!(
            set.total_measure >= induction_bound(12, 2),
            "{}",
            set.total_measure
        );
        // γ_144 = 145θ here, so Λ_2 = {cos 145θ ≥ ½}
        assert_eq!(set.intervals.len(), 145);
        assert!((set.total_measure - TAU / 3.0).abs() < 145.0 * 2.0 * set.resolution);
    }

    #[test]
    fn random_phase_witness_to_level_three() {
        let grid = 1 << 18;
        let (env, len) = construction(0.01, 3);
        for seed in 0..3 {
            let alphas = sample_parameters(&env, &Randomizer::uniform_phase(seed), 0, len);
            let w = intersection_witness(&alphas, 12, 3, grid).unwrap();
            for l in &w.levels {
                assert!(l.measure >= l.bound - 2.0 * w.resolution, "{l:?}");
                assert!(l.pointwise_verified);
                assert!(l.achieved >= l.lower);
            }
            assert!(w.aligned_sum_lower > 0.0);
        }
    }

    #[test]
    fn deviation_matches_pointwise_and_stays_small() {
        let (env, len) = construction(0.01, 3);
        let alphas = sample_parameters(&env, &Randomizer::uniform_phase(4), 0, len);
        let grid = 64 * 1729;
        let dev = max_alignment_deviation(&alphas, 12, 3, grid).unwrap();
        assert_eq!(dev[..2], [0.0, 0.0]);
        assert!(dev.iter().all(|d| *d <= PI / 12.0));
        let theta = TAU * 777.0 / grid as f64;
        let direct = crate::prufer::alignment_deviation(&alphas, theta, 1728).unwrap();
        assert!(direct <= dev[3] + 1e-15);
        assert!(dev[3] > 0.0);
    }

    #[test]
    fn grid_and_length_checks() {
        let alphas = vec![c(0.0, 0.0); 200];
        assert!(matches!(
            alignment_set(&alphas, 12, 2, 64 * 145 - 1),
            Err(Error::GridTooSmall { .. })
        ));
        assert!(matches!(
            alignment_set(&alphas[..144], 12, 2, 1 << 14),
            Err(Error::TooShort { .. })
        ));
        assert!(alignment_set(&alphas, 1, 0, 1 << 14).is_err());
        assert!(matches!(level_index(12, 40), Err(Error::Overflow(_))));
    }

    #[test]
    fn growth_cases() {
        let zeros = vec![c(0.0, 0.0); 145];
        for p in growth_trajectory(&zeros, 12, 2, 256).unwrap() {
            assert_eq!(p.max_modulus, 0.0);
        }

        let mut single = zeros.clone();
        single[144] = c(0.05, 0.0);
        let g = growth_trajectory(&single, 12, 2, 4096).unwrap();
        assert_eq!(g[1].max_modulus, 0.0);
        assert!(g[2].max_modulus >= 0.025 && g[2].max_modulus <= 0.05 + 1e-15);
    }

    #[test]
    fn growth_dominates_aligned_lower_bound() {
        let (env, len) = construction(0.01, 3);
        let alphas = sample_parameters(&env, &Randomizer::uniform_phase(9), 0, len);
        let w = intersection_witness(&alphas, 12, 3, 1 << 17).unwrap();
        let g = growth_trajectory(&alphas, 12, 3, 1 << 17).unwrap();
        assert!(g[3].max_modulus >= w.aligned_sum_lower);
        assert!(g.windows(2).all(|p| p[0].index < p[1].index));
    }

    #[test]
    fn interval_runs_wrap_around() {
        let mut m = vec![false; 16];
        for i in [14, 15, 0, 1, 5, 6, 7] {
            m[i] = true;
        }
        let iv = intervals(&m);
        assert_eq!(iv.len(), 2);
        let h = TAU / 16.0;
        let lengths: Vec<f64> = iv.iter().map(|i| i.length).collect();
        assert!(lengths.contains(&(3.0 * h)) && lengths.contains(&(2.0 * h)));
        let wrap = iv.iter().find(|i| i.points == 4).unwrap();
        assert_eq!(wrap.start_index, 14);
        assert_eq!(wrap.middle_index(16), 15);
        assert!(intervals(&[false; 8]).is_empty());
    }
}
