//! Grid evaluation of `Φ*_n` and certified upper bounds on `‖Φ*_n‖_∞`.
//!
//! For a degree-`n` polynomial `p`, Bernstein's inequality `‖p′‖_∞ ≤ n‖p‖_∞`
//! bounds how far `|p|` can rise between neighbouring points of an `M`-point
//! grid on the circle (spacing `2π/M`), which gives
//! `‖p‖_∞ ≤ max_grid |p| / (1 − πn/M)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::fft;
use crate::szego::{self, CoeffPair, PointState};
use crate::{Complex64, Error, Result};

/// Default degree budget for coefficient-form trajectories.
pub const DEFAULT_DEGREE_BUDGET: usize = 20_000;

/// Default grid oversampling factor.
pub const DEFAULT_OVERSAMPLE: usize = 32;

/// Values of `Φ*_n` at `e^{2πik/M}`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridEvaluation {
    pub m: usize,
    pub degree: usize,
    pub values: Vec<Complex64>,
}

impl GridEvaluation {
    pub fn grid_max(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedSup {
    pub degree: usize,
    pub m: usize,
    pub grid_max: f64,
    pub upper_bound: f64,
}

pub fn eval_grid(c: &CoeffPair, m: usize) -> Result<GridEvaluation> {
    if !m.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(m));
    }
    let degree = c.degree();
    let required = 2 * (degree + 1);
    if m < required {
        return Err(Error::GridTooSmall {
            size: m,
            degree,
            required,
        });
    }
    Ok(GridEvaluation {
        m,
        degree,
        values: fft::evaluate_on_roots(c.phi_star(), m)?,
    })
}

pub fn certify_sup(g: &GridEvaluation) -> Result<CertifiedSup> {
    let ratio = PI * g.degree as f64 / g.m as f64;
    if ratio >= 1.0 {
        return Err(Error::GridTooSmall {
            size: g.m,
            degree: g.degree,
            required: (PI * g.degree as f64) as usize + 1,
        });
    }
    let grid_max = g.grid_max();
    Ok(CertifiedSup {
        degree: g.degree,
        m: g.m,
        grid_max,
        upper_bound: grid_max / (1.0 - ratio),
    })
}

/// Smallest power of two `≥ oversample·max(n, 1)`.
pub fn grid_size(degree: usize, oversample: usize) -> usize {
    (oversample * degree.max(1)).next_power_of_two()
}

/// Certified sups collected before a trajectory hit an error.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialTrajectory {
    pub completed: Vec<CertifiedSup>,
    pub error: Error,
}

/// Runs the coefficient recursion over `alphas` and certifies `‖Φ*_n‖_∞` at
/// every checkpoint degree.
pub fn sup_trajectory(
    alphas: &[Complex64],
    checkpoints: &[usize],
    oversample: usize,
) -> core::result::Result<Vec<CertifiedSup>, PartialTrajectory> {
    sup_trajectory_with_budget(alphas, checkpoints, oversample, DEFAULT_DEGREE_BUDGET)
}

pub fn sup_trajectory_with_budget(
    alphas: &[Complex64],
    checkpoints: &[usize],
    oversample: usize,
    budget: usize,
) -> core::result::Result<Vec<CertifiedSup>, PartialTrajectory> {
    let mut completed = Vec::with_capacity(checkpoints.len());
    let fail = |completed: Vec<CertifiedSup>, error| Err(PartialTrajectory { completed, error });
    if oversample < 8 {
        return fail(
            completed,
            Error::InvalidArgument("oversample factor must be at least 8".into()),
        );
    }
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return fail(
            completed,
            Error::InvalidArgument("checkpoints must be sorted".into()),
        );
    }
    let mut pair = CoeffPair::one();
    for &degree in checkpoints {
        if degree > budget {
            return fail(completed, Error::BudgetExceeded { degree, budget });
        }
        if degree > alphas.len() {
            return fail(
                completed,
                Error::TooShort {
                    len: alphas.len(),
                    required: degree,
                },
            );
        }
        while pair.degree() < degree {
            if let Err(e) = pair.step(alphas[pair.degree()]) {
                return fail(completed, e);
            }
        }
        match eval_grid(&pair, grid_size(degree, oversample)).and_then(|g| certify_sup(&g)) {
            Ok(sup) => completed.push(sup),
            Err(e) => return fail(completed, e),
        }
    }
    Ok(completed)
}

/// Uncertified pointwise mode: grid maxima of `|Φ*_n|` on a fixed `m`-point
/// grid at each checkpoint, `O(n·m)` work, for degrees past the coefficient
/// budget.
pub fn pointwise_grid_max(
    alphas: &[Complex64],
    checkpoints: &[usize],
    m: usize,
) -> Result<Vec<f64>> {
    szego::check_alphas(alphas)?;
    if checkpoints.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("checkpoints must be sorted".into()));
    }
    if let Some(&last) = checkpoints.last() {
        if last > alphas.len() {
            return Err(Error::TooShort {
                len: alphas.len(),
                required: last,
            });
        }
    }
    let mut states: Vec<PointState> = szego::grid_states(m);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut degree = 0;
    for &target in checkpoints {
        while degree < target {
            szego::step_batch(&mut states, alphas[degree])?;
            degree += 1;
        }
        out.push(states.iter().map(|s| s.phi_star.norm()).fold(0.0, f64::max));
    }
    Ok(out)
}
