//! A-priori variation bounds and the refinement convergence study.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{compute_tau, Modulus, MovingFamily};
use crate::grid::TimeGrid;
use crate::schedule::RefinementSchedule;
use crate::solver::{solve_level, variation, DiscreteTrajectory};
use crate::vector::Vector;

/// Interior evaluation points per finer-grid interval in sup-norm differences.
pub const OVERSAMPLE: usize = 10;

/// Relative distance to the pole `α² = 2rρ` below which a ball bound is flagged.
const NEAR_POLE: f64 = 1e-9;

/// Inputs of the fixed-inner-ball bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BallBoundParams {
    pub r: f64,
    pub w: Vector,
    pub rho: f64,
    pub alpha: f64,
    pub y0: Vector,
}

impl BallBoundParams {
    /// `α = ‖y0 - w‖ + ρ + eps_sup`, where `eps_sup` bounds every step's
    /// excess (and the initial distance, which is 0 for feasible `y0`).
    pub fn with_eps(r: f64, w: Vector, rho: f64, y0: Vector, eps_sup: f64) -> Self {
        let alpha = y0.dist(&w) + rho + eps_sup;
        BallBoundParams { r, w, rho, alpha, y0 }
    }

    /// `(‖y0 - w‖ + ρ)² < 2rρ`.
    pub fn compatible(&self) -> bool {
        if self.r.is_infinite() {
            return true;
        }
        let s = self.y0.dist(&self.w) + self.rho;
        s * s < 2.0 * self.r * self.rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallBound {
    pub value: f64,
    /// `2rρ - α²` is within a relative `1e-9` of zero.
    pub near_pole: bool,
}

/// `max{ r(‖y0 - w‖² - ρ²) / (2rρ - α²), 0 }`; for `r = ∞` the limit
/// `max{ (‖y0 - w‖² - ρ²) / (2ρ), 0 }`.
pub fn ball_variation_bound(p: &BallBoundParams) -> Result<BallBound> {
    if !(p.rho > 0.0 && p.r > 0.0 && p.alpha >= 0.0) {
        return Err(Error::InapplicableBound(format!(
            "ball bound needs r > 0, rho > 0, alpha >= 0 (r = {}, rho = {}, alpha = {})",
            p.r, p.rho, p.alpha
        )));
    }
    p.y0.check_dim(p.w.dim())?;
    let num = p.y0.dist(&p.w).powi(2) - p.rho * p.rho;
    if p.r.is_infinite() {
        return Ok(BallBound {
            value: (num / (2.0 * p.rho)).max(0.0),
            near_pole: false,
        });
    }
    let two_r_rho = 2.0 * p.r * p.rho;
    let den = two_r_rho - p.alpha * p.alpha;
    if den <= 0.0 {
        return Err(Error::InapplicableBound(format!(
            "alpha^2 = {} is not below 2 r rho = {two_r_rho}",
            p.alpha * p.alpha
        )));
    }
    Ok(BallBound {
        value: (p.r * num / den).max(0.0),
        near_pole: den <= NEAR_POLE * two_r_rho,
    })
}

/// Inputs of the uniform-interior-cone bound.
#[derive(Debug, Clone, PartialEq)]
#[allow(non_snake_case)]
pub struct ConeBoundParams {
    pub r: f64,
    pub R: f64,
    pub d: f64,
    pub lambda: f64,
    pub tau: f64,
    pub eps_bar: f64,
    /// First schedule level the bound applies to.
    pub n_bar: usize,
}

impl ConeBoundParams {
    pub fn alpha(&self) -> f64 {
        self.lambda * self.d + self.lambda * self.R / 2.0 + self.eps_bar
    }
}

/// `⌈2T/τ⌉ · ( r(d² - (λR/2)²) / (λrR - α²) + ε̄ )`, `α = λd + λR/2 + ε̄`;
/// for `r = ∞` the window term is `(d² - (λR/2)²) / (λR)`.
pub fn cone_variation_bound(p: &ConeBoundParams, horizon: f64) -> Result<f64> {
    let bad = |m: String| Err(Error::InapplicableBound(m));
    if !(p.R > 0.0 && p.d > 0.0 && p.r > 0.0) {
        return bad(format!("cone bound needs r, R, d > 0 (r = {}, R = {}, d = {})", p.r, p.R, p.d));
    }
    if !(p.lambda > 0.0 && p.lambda < 1.0) {
        return bad(format!("lambda = {} is not in (0, 1)", p.lambda));
    }
    if !(p.tau > 0.0) {
        return bad(format!("tau = {} is not positive", p.tau));
    }
    if !(p.eps_bar >= 0.0) {
        return bad(format!("eps_bar = {} is negative", p.eps_bar));
    }
    let half = p.lambda * p.R / 2.0;
    if p.d < half {
        return bad(format!("d = {} is below lambda R / 2 = {half}", p.d));
    }
    if !(horizon > 0.0) {
        return Ok(0.0);
    }
    let num = p.d * p.d - half * half;
    let window = if p.r.is_infinite() {
        num / (p.lambda * p.R)
    } else {
        let alpha = p.alpha();
        let den = p.lambda * p.r * p.R - alpha * alpha;
        if den <= 0.0 {
            return bad(format!(
                "lambda r R = {} does not exceed alpha^2 = {}",
                p.lambda * p.r * p.R,
                alpha * alpha
            ));
        }
        p.r * num / den
    };
    Ok((2.0 * horizon / p.tau).ceil() * (window + p.eps_bar))
}

/// `λ = min(0.9 rR / (d + R/2)², 0.99)`.
#[allow(non_snake_case)]
pub fn cone_lambda(r: f64, R: f64, d: f64) -> f64 {
    (0.9 * r * R / (d + R / 2.0).powi(2)).min(0.99)
}

/// Picks λ, τ and the first schedule level `n̄` with `ε < r/2`, mesh
/// `< τ/2` and `(λd + λR/2 + ε)² < λrR`.
#[allow(non_snake_case)]
pub fn choose_cone_params(
    r: f64,
    R: f64,
    d: f64,
    omega: &Modulus,
    horizon: f64,
    schedule: &RefinementSchedule,
) -> Result<ConeBoundParams> {
    if !(r > 0.0 && R > 0.0 && d > 0.0) {
        return Err(Error::InapplicableBound(format!(
            "cone parameters need r, R, d > 0 (r = {r}, R = {R}, d = {d})"
        )));
    }
    let lambda = cone_lambda(r, R, d);
    let tau = compute_tau(omega, r, lambda * R, lambda * R / 2.0, horizon)?;
    let feasible = |n: usize| {
        let eps = schedule.eps()[n];
        let alpha = lambda * d + lambda * R / 2.0 + eps;
        eps < r / 2.0 && schedule.grids()[n].mesh() < tau / 2.0 && (r.is_infinite() || alpha * alpha < lambda * r * R)
    };
    let n_bar = (0..schedule.levels()).find(|&n| feasible(n)).ok_or(Error::NoFeasibleEps)?;
    Ok(ConeBoundParams {
        r,
        R,
        d,
        lambda,
        tau,
        eps_bar: schedule.eps()[n_bar],
        n_bar,
    })
}

/// `sup_t ‖a(t) - b(t)‖` over the nodes of the finer grid plus
/// [`OVERSAMPLE`] interior points per interval. The grids must be nested.
pub fn sup_diff(a: &DiscreteTrajectory, b: &DiscreteTrajectory) -> Result<f64> {
    let (coarse, fine) = if a.times().len() <= b.times().len() { (a, b) } else { (b, a) };
    if !coarse.grid().is_nested_in(fine.grid()) {
        return Err(Error::InvalidGrid("sup difference needs nested grids".into()));
    }
    let (xc, xf) = (coarse.affine_interpolant(), fine.affine_interpolant());
    let times = fine.times();
    let mut worst = 0.0_f64;
    for w in times.windows(2) {
        for k in 0..OVERSAMPLE + 1 {
            let t = w[0] + (w[1] - w[0]) * (k as f64 / (OVERSAMPLE + 1) as f64);
            worst = worst.max(xc.eval(t)?.dist(&xf.eval(t)?));
        }
    }
    let last = *times.last().expect("nonempty grid");
    Ok(worst.max(xc.eval(last)?.dist(&xf.eval(last)?)))
}

/// Sup-norm distance of two affine interpolants over `samples + 1`
/// equispaced times, for grids that need not be nested.
pub fn sampled_sup_distance(a: &DiscreteTrajectory, b: &DiscreteTrajectory, samples: usize) -> Result<f64> {
    let (xa, xb) = (a.affine_interpolant(), b.affine_interpolant());
    let (t0, t1) = (a.grid().t_first(), a.grid().t_last().min(b.grid().t_last()));
    let mut worst = 0.0_f64;
    for k in 0..=samples {
        let t = t0 + (t1 - t0) * (k as f64 / samples.max(1) as f64);
        worst = worst.max(xa.eval(t)?.dist(&xb.eval(t)?));
    }
    Ok(worst)
}

/// Variation of the affine interpolant read off at the nodes of `grid`.
pub fn sampled_variation(traj: &DiscreteTrajectory, grid: &TimeGrid) -> Result<f64> {
    let x = traj.affine_interpolant();
    let pts: Vec<Vector> = grid.times().iter().map(|&t| x.eval(t)).collect::<Result<_>>()?;
    Ok(pts.windows(2).map(|w| w[0].dist(&w[1])).sum())
}

/// `sup_t ‖x_n(t) - y_n(t)‖`, attained at the right ends of the intervals.
pub fn interpolant_gap(traj: &DiscreteTrajectory) -> f64 {
    traj.max_jump()
}

/// Row `k` compares level `levels[k]` with the next level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub levels: Vec<usize>,
    pub eps: Vec<f64>,
    pub sup_diffs: Vec<f64>,
    pub variations: Vec<f64>,
    pub cauchy_ratios: Vec<f64>,
    pub constraint_residuals: Vec<f64>,
    pub finest_level: usize,
    pub finest_variation: f64,
    pub finest_constraint_residual: f64,
}

impl ConvergenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Max of the last three Cauchy ratios is at most twice the max of the
    /// first three.
    pub fn cauchy_no_growth(&self) -> bool {
        let c = &self.cauchy_ratios;
        if c.len() < 2 {
            return true;
        }
        let k = c.len().min(3);
        let head = c[..k].iter().copied().fold(0.0, f64::max);
        let tail = c[c.len() - k..].iter().copied().fold(0.0, f64::max);
        tail <= 2.0 * head
    }

    pub fn sup_diffs_strictly_decreasing(&self) -> bool {
        self.sup_diffs.windows(2).all(|w| w[1] < w[0])
    }
}

/// Solves every level (in parallel) and compares consecutive levels.
pub fn converge_study(
    family: &MovingFamily,
    y0: &Vector,
    schedule: &RefinementSchedule,
) -> Result<(ConvergenceReport, Vec<DiscreteTrajectory>)> {
    schedule.validate()?;
    let trajs: Vec<DiscreteTrajectory> = (0..schedule.levels())
        .into_par_iter()
        .map(|n| {
            solve_level(family, y0, schedule, n).map_err(|e| e.context(format!("level {n}")))
        })
        .collect::<Result<_>>()?;
    let report = report_from(&trajs, family.horizon())?;
    Ok((report, trajs))
}

/// Assembles a report from trajectories on consecutive nested levels.
pub fn report_from(trajs: &[DiscreteTrajectory], horizon: f64) -> Result<ConvergenceReport> {
    let finest = trajs.last().ok_or_else(|| Error::InvalidSchedule("no levels".into()))?;
    let rows = trajs.len() - 1;
    let sup_diffs: Vec<f64> = (0..rows)
        .into_par_iter()
        .map(|k| sup_diff(&trajs[k], &trajs[k + 1]))
        .collect::<Result<_>>()?;
    let mut report = ConvergenceReport {
        levels: Vec::with_capacity(rows),
        eps: Vec::with_capacity(rows),
        sup_diffs,
        variations: Vec::with_capacity(rows),
        cauchy_ratios: Vec::with_capacity(rows),
        constraint_residuals: Vec::with_capacity(rows),
        finest_level: finest.level(),
        finest_variation: variation(finest, 0.0, horizon)?,
        finest_constraint_residual: finest.max_residual(),
    };
    for (k, t) in trajs[..rows].iter().enumerate() {
        report.levels.push(t.level());
        report.eps.push(t.eps_level());
        report.variations.push(variation(t, 0.0, horizon)?);
        report.cauchy_ratios.push(report.sup_diffs[k].powi(2) / t.eps_level());
        report.constraint_residuals.push(t.max_residual());
    }
    Ok(report)
}
