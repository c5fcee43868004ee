//! The catching-up scheme `y_j = P_{C(t_j)}(y_{j-1})` and its interpolants.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::{analytic_excess, excess_with_hints, MovingFamily, SamplingParams};
use crate::grid::TimeGrid;
use crate::prox::{sample_points, NormalResidualReport, Region};
use crate::schedule::RefinementSchedule;
use crate::vector::Vector;

/// Relative slack on `‖jump‖ < ε` absorbing rounding at the boundary.
pub const STEP_SLACK: f64 = 1e-12;

/// Largest acceptable hypo-monotonicity defect of a step.
pub const CERT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTrajectory {
    grid: TimeGrid,
    points: Vec<Vector>,
    /// `jumps[j] = points[j] - points[j-1]`, `jumps[0] = 0`.
    jumps: Vec<Vector>,
    /// `d(points[j], C(t_j))` after the step.
    residuals: Vec<f64>,
    level: usize,
    eps_level: f64,
}

impl DiscreteTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn jumps(&self) -> &[Vector] {
        &self.jumps
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn eps_level(&self) -> f64 {
        self.eps_level
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn final_point(&self) -> &Vector {
        self.points.last().expect("nonempty trajectory")
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_jump(&self) -> f64 {
        self.jumps.iter().map(Vector::norm).fold(0.0, f64::max)
    }

    pub fn with_level(mut self, level: usize) -> Self {
        self.level = level;
        self
    }

    pub fn step_interpolant(&self) -> StepInterpolant<'_> {
        StepInterpolant { traj: self }
    }

    pub fn affine_interpolant(&self) -> AffineInterpolant<'_> {
        AffineInterpolant { traj: self }
    }

    /// One row per node: `t, x_0..x_{n-1}, jump_norm, dist_to_set`, 17
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 0..self.dim() {
            let _ = write!(out, ",x_{i}");
        }
        out.push_str(",jump_norm,dist_to_set\n");
        for (j, &t) in self.times().iter().enumerate() {
            out.push_str(&fmt_num(t));
            for c in self.points[j].coords() {
                out.push(',');
                out.push_str(&fmt_num(*c));
            }
            out.push(',');
            out.push_str(&fmt_num(self.jumps[j].norm()));
            out.push(',');
            out.push_str(&fmt_num(self.residuals[j]));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits, round-trips every f64.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Trajectory columns read back from [`DiscreteTrajectory::to_csv`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub jump_norms: Vec<f64>,
    pub dist_to_set: Vec<f64>,
}

impl CsvTrajectory {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::Io("empty trajectory csv".into()))?
            .split(',')
            .collect();
        if header.len() < 4 || header[0] != "t" || header[header.len() - 2..] != ["jump_norm", "dist_to_set"] {
            return Err(Error::Io(format!("unexpected csv header {header:?}")));
        }
        let dim = header.len() - 3;
        let mut out = CsvTrajectory {
            times: vec![],
            points: vec![],
            jump_norms: vec![],
            dist_to_set: vec![],
        };
        for (k, line) in lines.enumerate() {
            let row: Vec<f64> = line
                .split(',')
                .map(str::parse::<f64>)
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Io(format!("csv row {}: {e}", k + 1)))?;
            if row.len() != dim + 3 {
                return Err(Error::Io(format!("csv row {} has {} fields", k + 1, row.len())));
            }
            out.times.push(row[0]);
            out.points.push(row[1..=dim].to_vec());
            out.jump_norms.push(row[dim + 1]);
            out.dist_to_set.push(row[dim + 2]);
        }
        Ok(out)
    }

    /// Sum of the jump norms over `(from, to]`.
    pub fn variation(&self, from: f64, to: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.jump_norms)
            .filter(|(t, _)| **t > from && **t <= to)
            .map(|(_, j)| j)
            .sum()
    }
}

/// Runs the catching-up scheme on `grid`. `eps_level` is the step bound
/// `‖y_j - y_{j-1}‖ < ε` to enforce; pass `f64::INFINITY` on a bare grid.
pub fn solve(family: &MovingFamily, y0: &Vector, grid: &TimeGrid, eps_level: f64) -> Result<DiscreteTrajectory> {
    y0.check_dim(family.dim())?;
    let horizon = family.horizon();
    if grid.t_first() != 0.0 || (grid.t_last() - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "grid spans [{}, {}] but the horizon is [0, {horizon}]",
            grid.t_first(),
            grid.t_last()
        )));
    }
    let c0 = family.slice(0.0)?;
    let defect = c0.defect(y0)?;
    if !c0.contains(y0)? {
        return Err(Error::InitialInfeasible { defect });
    }
    let r = family.r();
    let times = grid.times();
    let mut points = Vec::with_capacity(times.len());
    let mut jumps = Vec::with_capacity(times.len());
    let mut residuals = Vec::with_capacity(times.len());
    points.push(y0.clone());
    jumps.push(Vector::zeros(y0.dim()));
    residuals.push(0.0);
    for (j, &t) in times.iter().enumerate().skip(1) {
        let t = t.min(horizon);
        let set = family.slice(t)?;
        let prev = &points[j - 1];
        let d = set.distance(prev)?;
        if d >= r {
            return Err(Error::TubeViolation { j, distance: d, r });
        }
        let y = if d == 0.0 { prev.clone() } else { set.project(prev)? };
        let jump = &y - prev;
        let jn = jump.norm();
        if jn >= eps_level * (1.0 + STEP_SLACK) {
            return Err(Error::StepTooLarge {
                j,
                jump: jn,
                eps: eps_level,
            });
        }
        residuals.push(set.distance(&y)?);
        points.push(y);
        jumps.push(jump);
    }
    Ok(DiscreteTrajectory {
        grid: grid.clone(),
        points,
        jumps,
        residuals,
        level: 0,
        eps_level,
    })
}

/// Level `n` of a schedule.
pub fn solve_level(
    family: &MovingFamily,
    y0: &Vector,
    schedule: &RefinementSchedule,
    n: usize,
) -> Result<DiscreteTrajectory> {
    let grid = schedule.grids().get(n).ok_or_else(|| {
        Error::InvalidSchedule(format!("level {n} requested, schedule has {}", schedule.levels()))
    })?;
    Ok(solve(family, y0, grid, schedule.eps()[n])?.with_level(n))
}

/// `y_n(t) = y_{j-1}` on `[t_{j-1}, t_j)`, `y_J` at `T`.
#[derive(Debug, Clone, Copy)]
pub struct StepInterpolant<'a> {
    traj: &'a DiscreteTrajectory,
}

impl StepInterpolant<'_> {
    pub fn eval(&self, t: f64) -> Result<Vector> {
        let j = self.traj.grid.interval_index(t)?;
        Ok(self.traj.points[j].clone())
    }
}

/// Piecewise-affine interpolation of the nodes.
#[derive(Debug, Clone, Copy)]
pub struct AffineInterpolant<'a> {
    traj: &'a DiscreteTrajectory,
}

impl AffineInterpolant<'_> {
    pub fn eval(&self, t: f64) -> Result<Vector> {
        let j = self.traj.grid.interval_index(t)?;
        let times = self.traj.grid.times();
        if j + 1 >= times.len() {
            return Ok(self.traj.points[j].clone());
        }
        let s = (t - times[j]) / (times[j + 1] - times[j]);
        Ok(self.traj.points[j].axpy(s, &self.traj.jumps[j + 1]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepCertificate {
    pub j: usize,
    pub distance_moved: f64,
    /// An upper estimate of `e(C(t_{j-1}), C(t_j))`.
    pub excess_bound_used: f64,
    pub normal_report: NormalResidualReport,
}

/// Checks `-jumps[j] ∈ N_{C(t_j)}(y_j)` for every nonzero jump against
/// `samples_per_step` sampled points of `C(t_j)` near `y_j`.
pub fn certify_steps(
    family: &MovingFamily,
    traj: &DiscreteTrajectory,
    samples_per_step: usize,
    seed: u64,
) -> Result<Vec<StepCertificate>> {
    let times = traj.times();
    let steps: Vec<usize> = (1..times.len()).filter(|&j| !traj.jumps[j].is_zero()).collect();
    steps
        .par_iter()
        .map(|&j| certify_step(family, traj, j, samples_per_step, seed))
        .collect()
}

fn certify_step(
    family: &MovingFamily,
    traj: &DiscreteTrajectory,
    j: usize,
    samples: usize,
    seed: u64,
) -> Result<StepCertificate> {
    let fail = |reason: String| Error::CertificationFailed { j, reason };
    let times = traj.times();
    let prev_set = family.slice(times[j - 1])?;
    let set = family.slice(times[j])?;
    let x = &traj.points[j];
    let jump = &traj.jumps[j];
    let moved = jump.norm();

    let excess_bound = match analytic_excess(&prev_set, &set) {
        Some((e, _)) => e,
        None => match family.analytic_modulus() {
            Some(m) => m.eval(times[j] - times[j - 1]),
            None => {
                excess_with_hints(&prev_set, &set, &SamplingParams::default(), &[traj.points[j - 1].clone()])?.lower
            }
        },
    };
    if moved > excess_bound * (1.0 + 1e-9) + 1e-12 {
        return Err(fail(format!("moved {moved} but the excess bound is {excess_bound}")));
    }

    let region = Region::around(x, 2.0 + 2.0 * moved);
    let z = sample_points(&set, &region, samples.max(1), seed.wrapping_add(j as u64))?;
    let report = set
        .normal_residual(x, &-jump, &z)
        .map_err(|e| fail(format!("normal residual: {e}")))?;
    if report.worst_residual > CERT_TOL {
        return Err(fail(format!("worst residual {:e}", report.worst_residual)));
    }
    Ok(StepCertificate {
        j,
        distance_moved: moved,
        excess_bound_used: excess_bound,
        normal_report: report,
    })
}

/// `Σ_{t_j ∈ (from, to]} ‖jumps[j]‖`.
pub fn variation(traj: &DiscreteTrajectory, from: f64, to: f64) -> Result<f64> {
    traj.grid.contains_range(from)?;
    traj.grid.contains_range(to)?;
    Ok(traj
        .times()
        .iter()
        .zip(&traj.jumps)
        .filter(|(t, _)| **t > from && **t <= to)
        .map(|(_, j)| j.norm())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{FamilyKind, LinearPath};
    use crate::prox::ProxSet;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c)
    }

    fn sweep() -> MovingFamily {
        MovingFamily::new(
            FamilyKind::Translate {
                base: ProxSet::half_space(v(&[1.0, 0.0]), 1.0).unwrap(),
                path: LinearPath::new(v(&[0.0, 0.0]), v(&[-1.0, 0.0])).unwrap(),
            },
            2.0,
        )
        .unwrap()
    }

    fn obstacle() -> MovingFamily {
        MovingFamily::new(
            FamilyKind::Translate {
                base: ProxSet::ball_complement(v(&[0.0, 0.0]), 0.5).unwrap(),
                path: LinearPath::new(v(&[-1.0, 0.0]), v(&[1.0, 0.0])).unwrap(),
            },
            2.0,
        )
        .unwrap()
    }

    #[test]
    fn static_family_stays_put() {
        let fam = MovingFamily::fixed(ProxSet::ball(v(&[0.0, 0.0]), 1.0).unwrap(), 1.0).unwrap();
        let grid = TimeGrid::uniform(0.0, 1.0, 7).unwrap();
        let traj = solve(&fam, &v(&[0.5, 0.0]), &grid, 0.1).unwrap();
        assert!(traj.points().iter().all(|p| *p == v(&[0.5, 0.0])));
        assert_eq!(variation(&traj, 0.0, 1.0).unwrap(), 0.0);
        assert!(certify_steps(&fam, &traj, 50, 1).unwrap().is_empty());
    }

    #[test]
    fn sweep_matches_play_operator() {
        let grid = TimeGrid::uniform(0.0, 2.0, 200).unwrap();
        let traj = solve(&sweep(), &v(&[0.0, 0.0]), &grid, f64::INFINITY).unwrap();
        for (t, p) in traj.times().iter().zip(traj.points()) {
            assert!((p[0] - (1.0 - t).min(0.0)).abs() <= 1e-12, "{t}");
            assert_eq!(p[1], 0.0);
        }
        assert!((traj.final_point()[0] + 1.0).abs() < 1e-12);
        assert!((variation(&traj, 0.0, 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_size_law() {
        let fam = obstacle();
        let grid = TimeGrid::uniform(0.0, 2.0, 400).unwrap();
        let traj = solve(&fam, &v(&[0.0, 0.25]), &grid, f64::INFINITY).unwrap();
        for j in 1..traj.times().len() {
            let d = fam.slice(traj.times()[j]).unwrap().distance(&traj.points()[j - 1]).unwrap();
            assert!((traj.jumps()[j].norm() - d).abs() <= 1e-10);
        }
        assert!(traj.max_residual() <= 1e-10);
    }

    #[test]
    fn obstacle_pushes_and_converges() {
        let fam = obstacle();
        let y0 = v(&[0.0, 0.0]);
        let coarse = solve(&fam, &y0, &TimeGrid::uniform(0.0, 2.0, 2000).unwrap(), f64::INFINITY);
        // the start point sits on the excluded center's path: at t = 1 the
        // center reaches it, but the point has been pushed aside by then
        let coarse = coarse.unwrap();
        let fine = solve(&fam, &y0, &TimeGrid::uniform(0.0, 2.0, 200_000).unwrap(), f64::INFINITY).unwrap();
        let end = coarse.final_point();
        assert!(end.dist(&v(&[1.0, 0.0])) >= 0.5 - 1e-6);
        let (a, b) = (coarse.affine_interpolant(), fine.affine_interpolant());
        let mut worst: f64 = 0.0;
        for k in 0..=4000 {
            let t = 2.0 * k as f64 / 4000.0;
            worst = worst.max(a.eval(t).unwrap().dist(&b.eval(t).unwrap()));
        }
        assert!(worst <= 0.05, "{worst}");
    }

    #[test]
    fn tube_violation_on_coarse_grid() {
        let fam = obstacle();
        // a single step lands the excluded center exactly on the point
        let grid = TimeGrid::new(vec![0.0, 1.0, 2.0]).unwrap();
        let err = solve(&fam, &v(&[0.0, 0.0]), &grid, f64::INFINITY).unwrap_err();
        assert!(matches!(err, Error::TubeViolation { j: 1, .. }), "{err}");
    }

    #[test]
    fn infeasible_start() {
        let err = solve(&sweep(), &v(&[2.0, 0.0]), &TimeGrid::uniform(0.0, 2.0, 4).unwrap(), 1.0).unwrap_err();
        assert!(matches!(err, Error::InitialInfeasible { .. }));
    }

    #[test]
    fn interpolants() {
        let grid = TimeGrid::uniform(0.0, 2.0, 4).unwrap();
        let traj = solve(&sweep(), &v(&[0.0, 0.0]), &grid, f64::INFINITY).unwrap();
        let (y, x) = (traj.step_interpolant(), traj.affine_interpolant());
        assert_eq!(y.eval(0.0).unwrap(), v(&[0.0, 0.0]));
        assert_eq!(y.eval(1.9).unwrap(), traj.points()[3]);
        assert_eq!(y.eval(2.0).unwrap(), *traj.final_point());
        assert!((x.eval(1.75).unwrap()[0] + 0.75).abs() < 1e-15);
        for (t, p) in traj.times().iter().zip(traj.points()) {
            assert_eq!(x.eval(*t).unwrap(), *p);
        }
    }

    #[test]
    fn certificates_on_sweep_and_obstacle() {
        let grid = TimeGrid::uniform(0.0, 2.0, 100).unwrap();
        let traj = solve(&sweep(), &v(&[0.0, 0.0]), &grid, f64::INFINITY).unwrap();
        let certs = certify_steps(&sweep(), &traj, 200, 3).unwrap();
        assert_eq!(certs.len(), 50);
        assert!(certs.iter().all(|c| c.normal_report.worst_residual <= 1e-9));

        let fam = obstacle();
        let grid = TimeGrid::uniform(0.0, 2.0, 2000).unwrap();
        let traj = solve(&fam, &v(&[0.0, 0.25]), &grid, f64::INFINITY).unwrap();
        let certs = certify_steps(&fam, &traj, 500, 3).unwrap();
        assert!(!certs.is_empty());
        for c in &certs {
            assert!(c.normal_report.worst_residual <= 1e-8);
            assert!(c.distance_moved <= c.excess_bound_used * (1.0 + 1e-9) + 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let grid = TimeGrid::uniform(0.0, 2.0, 10).unwrap();
        let traj = solve(&sweep(), &v(&[0.0, 0.0]), &grid, f64::INFINITY).unwrap();
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,x_0,x_1,jump_norm,dist_to_set\n"));
        let back = CsvTrajectory::parse(&csv).unwrap();
        assert_eq!(back.times, traj.times());
        assert_eq!(back.points[7], traj.points()[7].coords());
        assert_eq!(back.variation(0.0, 2.0), variation(&traj, 0.0, 2.0).unwrap());
    }
}
