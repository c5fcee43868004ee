//! End-to-end scenario runs: solve every level, evaluate the enabled
//! checks, and write CSV / JSON / SVG artifacts.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{certify_inner_ball, estimate_modulus, Modulus, MovingFamily, SamplingParams};
use crate::scenario::{Check, Scenario};
use crate::schedule::{build_schedule_with, RefinementSchedule};
use crate::solver::{certify_steps, solve_level, DiscreteTrajectory, CERT_TOL};
use crate::svg;
use crate::variation::{
    ball_variation_bound, choose_cone_params, cone_variation_bound, report_from, BallBoundParams, ConvergenceReport,
};

/// Env var overriding every sampling seed.
pub const SEED_ENV: &str = "SWEEP_SEED";

/// Largest accepted `d(y_j, C(t_j))`.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// Sphere points and instants used to certify a declared inner ball.
const INNER_BALL_POINTS: usize = 100;
const INNER_BALL_TIMES: usize = 50;

/// Dyadic δ's tabulated for families without an analytic modulus.
const TABLE_HALVINGS: i32 = 20;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub levels: Option<usize>,
    pub seed: Option<u64>,
    pub svg: bool,
}

/// `SWEEP_SEED` as a seed, if set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| Error::schema(SEED_ENV, format!("expected a nonnegative integer, got `{s}`"))),
        Err(_) => Ok(None),
    }
}

/// Explicit option, then `SWEEP_SEED`, then the scenario's own seed.
pub fn effective_seed(scenario: &Scenario, explicit: Option<u64>) -> Result<u64> {
    Ok(match explicit {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(scenario.seed),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub level: usize,
    pub eps: f64,
    pub delta: f64,
    pub intervals: usize,
    pub mesh: f64,
    pub variation: f64,
    pub max_jump: f64,
    pub constraint_residual: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BoundStatus {
    NotDeclared,
    Inapplicable {
        reason: String,
    },
    Applied {
        value: f64,
        /// First level the bound covers.
        from_level: usize,
        details: serde_json::Value,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub passed: bool,
    /// Distance to the threshold; nonnegative exactly when the check passed
    /// on its numeric criterion.
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BreakpointNote {
    pub time: f64,
    pub jump_excess: f64,
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub seed: u64,
    pub levels: Vec<LevelSummary>,
    pub convergence: ConvergenceReport,
    pub ball_bound: BoundStatus,
    pub cone_bound: BoundStatus,
    pub breakpoints: Vec<BreakpointNote>,
    pub notes: Vec<String>,
    pub checks: Vec<Verdict>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn verdict(&self, check: Check) -> Option<&Verdict> {
        self.checks.iter().find(|v| v.check == check.name())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Everything a run produced.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub schedule: RefinementSchedule,
    pub trajectories: Vec<DiscreteTrajectory>,
    pub written: Vec<PathBuf>,
}

pub fn schedule_for(scenario: &Scenario, levels: Option<usize>) -> Result<RefinementSchedule> {
    let cfg = &scenario.schedule;
    build_schedule_with(
        &scenario.family,
        scenario.horizon,
        &cfg.template(),
        levels.unwrap_or(cfg.levels),
        cfg.grid_spec(),
        &SamplingParams::default(),
    )
}

/// Solves every level of the scenario's schedule in parallel.
pub fn solve_all(
    scenario: &Scenario,
    schedule: &RefinementSchedule,
) -> Result<(Vec<DiscreteTrajectory>, Vec<f64>)> {
    let solved: Vec<(DiscreteTrajectory, f64)> = (0..schedule.levels())
        .into_par_iter()
        .map(|n| {
            let start = Instant::now();
            let t = solve_level(&scenario.family, &scenario.y0, schedule, n)
                .map_err(|e| e.context(format!("{}: level {n}", scenario.name)))?;
            Ok((t, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect::<Result<_>>()?;
    Ok(solved.into_iter().unzip())
}

/// Runs the scenario and, when `out_dir` is given, writes
/// `<name>_level<n>.csv`, `report.json`, `convergence.json` and optionally
/// `<name>_trajectory.svg` / `<name>_convergence.svg`.
pub fn run(scenario: &Scenario, out_dir: Option<&Path>, opts: &RunOptions) -> Result<RunOutput> {
    let seed = effective_seed(scenario, opts.seed)?;
    let schedule = schedule_for(scenario, opts.levels).map_err(|e| e.context(scenario.name.clone()))?;
    let (trajs, wall) = solve_all(scenario, &schedule)?;
    let convergence = report_from(&trajs, scenario.horizon)?;

    let levels: Vec<LevelSummary> = trajs
        .iter()
        .zip(&wall)
        .map(|(t, ms)| LevelSummary {
            level: t.level(),
            eps: t.eps_level(),
            delta: schedule.delta()[t.level()],
            intervals: t.grid().intervals(),
            mesh: t.grid().mesh(),
            variation: crate::solver::variation(t, 0.0, scenario.horizon).expect("full window"),
            max_jump: t.max_jump(),
            constraint_residual: t.max_residual(),
            wall_ms: *ms,
        })
        .collect();

    let ball_bound = ball_status(scenario, &schedule, seed);
    let cone_bound = cone_status(scenario, &schedule)?;

    let mut checks = Vec::new();
    for &c in &scenario.checks {
        checks.push(match c {
            Check::Constraint => constraint_verdict(&levels),
            Check::Normal => normal_verdict(scenario, trajs.last().expect("at least one level"), seed)?,
            Check::BallBound => bound_verdict(Check::BallBound, &ball_bound, &levels),
            Check::ConeBound => bound_verdict(Check::ConeBound, &cone_bound, &levels),
            Check::Cauchy => cauchy_verdict(&convergence),
        });
    }

    let breakpoints: Vec<BreakpointNote> = scenario
        .family
        .breakpoints()
        .iter()
        .map(|b| BreakpointNote {
            time: b.time,
            jump_excess: b.jump_excess,
            admissible: b.admissible,
        })
        .collect();
    let mut notes = Vec::new();
    for b in &breakpoints {
        notes.push(if b.admissible {
            format!(
                "breakpoint t = {}: the set only expands (jump excess {:e}); the excess modulus is unaffected by the jump",
                b.time, b.jump_excess
            )
        } else {
            format!(
                "breakpoint t = {}: the set shrinks by excess {}; this jump enters the modulus",
                b.time, b.jump_excess
            )
        });
    }

    let report = RunReport {
        scenario: scenario.name.clone(),
        seed,
        levels,
        convergence,
        ball_bound,
        cone_bound,
        breakpoints,
        notes,
        checks,
    };

    let mut written = Vec::new();
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        for t in &trajs {
            written.push(write(dir, &format!("{}_level{}.csv", scenario.name, t.level()), &t.to_csv())?);
        }
        written.push(write(dir, "report.json", &report.to_json())?);
        written.push(write(
            dir,
            "convergence.json",
            &(report.convergence.to_json() + "\n"),
        )?);
        if opts.svg {
            written.push(write(
                dir,
                &format!("{}_trajectory.svg", scenario.name),
                &svg::trajectory_svg(&scenario.name, &trajs),
            )?);
            written.push(write(
                dir,
                &format!("{}_convergence.svg", scenario.name),
                &svg::convergence_svg(&scenario.name, &report.convergence),
            )?);
        }
    }

    Ok(RunOutput {
        report,
        schedule,
        trajectories: trajs,
        written,
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn constraint_verdict(levels: &[LevelSummary]) -> Verdict {
    let worst = levels.iter().map(|l| l.constraint_residual).fold(0.0, f64::max);
    Verdict {
        check: Check::Constraint.name().into(),
        passed: worst < CONSTRAINT_TOL,
        margin: CONSTRAINT_TOL - worst,
        detail: format!("max over levels of d(y_j, C(t_j)) = {worst:e}"),
    }
}

fn normal_verdict(scenario: &Scenario, finest: &DiscreteTrajectory, seed: u64) -> Result<Verdict> {
    let name = Check::Normal.name().to_string();
    Ok(match certify_steps(&scenario.family, finest, scenario.certify_samples, seed) {
        Ok(certs) => {
            let worst = certs
                .iter()
                .map(|c| c.normal_report.worst_residual)
                .fold(f64::NEG_INFINITY, f64::max);
            let worst = if certs.is_empty() { 0.0 } else { worst };
            Verdict {
                check: name,
                passed: true,
                margin: CERT_TOL - worst,
                detail: format!(
                    "level {}: {} nonzero steps certified, worst residual {worst:e}",
                    finest.level(),
                    certs.len()
                ),
            }
        }
        Err(e @ (Error::CertificationFailed { .. } | Error::EmptyIntersection { .. })) => Verdict {
            check: name,
            passed: false,
            margin: -1.0,
            detail: e.to_string(),
        },
        Err(e) => return Err(e),
    })
}

fn bound_verdict(check: Check, status: &BoundStatus, levels: &[LevelSummary]) -> Verdict {
    match status {
        BoundStatus::Applied {
            value, from_level, ..
        } => {
            let covered: Vec<&LevelSummary> = levels.iter().filter(|l| l.level >= *from_level).collect();
            if covered.is_empty() {
                return Verdict {
                    check: check.name().into(),
                    passed: false,
                    margin: 0.0,
                    detail: format!("no computed level reaches n_bar = {from_level}"),
                };
            }
            let margin = covered.iter().map(|l| value - l.variation).fold(f64::INFINITY, f64::min);
            let worst = covered.iter().map(|l| l.variation).fold(0.0, f64::max);
            Verdict {
                check: check.name().into(),
                passed: margin >= 0.0,
                margin,
                detail: format!("max variation {worst} over levels >= {from_level} vs bound {value}"),
            }
        }
        BoundStatus::Inapplicable { reason } => Verdict {
            check: check.name().into(),
            passed: false,
            margin: 0.0,
            detail: format!("inapplicable: {reason}"),
        },
        BoundStatus::NotDeclared => Verdict {
            check: check.name().into(),
            passed: false,
            margin: 0.0,
            detail: "no bound parameters declared".into(),
        },
    }
}

/// Passes when the ratios show no growth and the sup differences strictly
/// decrease, or have reached exactly 0 (the levels already agree).
fn cauchy_verdict(rep: &ConvergenceReport) -> Verdict {
    let name = Check::Cauchy.name().to_string();
    if rep.sup_diffs.len() < 2 {
        return Verdict {
            check: name,
            passed: false,
            margin: 0.0,
            detail: "needs at least three levels".into(),
        };
    }
    let c = &rep.cauchy_ratios;
    let k = c.len().min(3);
    let head = c[..k].iter().copied().fold(0.0, f64::max);
    let tail = c[c.len() - k..].iter().copied().fold(0.0, f64::max);
    let decreasing = rep.sup_diffs.windows(2).all(|w| w[1] < w[0] || (w[0] == 0.0 && w[1] == 0.0));
    Verdict {
        check: name,
        passed: rep.cauchy_no_growth() && decreasing,
        margin: 2.0 * head - tail,
        detail: format!(
            "cauchy ratios {:?}; sup diffs {}",
            c,
            if decreasing { "decreasing" } else { "not strictly decreasing" }
        ),
    }
}

fn ball_status(scenario: &Scenario, schedule: &RefinementSchedule, seed: u64) -> BoundStatus {
    let Some(cfg) = &scenario.ball_bound else {
        return BoundStatus::NotDeclared;
    };
    let r = scenario.ball_r().expect("declared");
    let inapplicable = |reason: String| BoundStatus::Inapplicable { reason };
    if let Err(e) = certify_inner_ball(
        &scenario.family,
        &cfg.w,
        cfg.rho,
        0.0,
        scenario.horizon,
        INNER_BALL_POINTS,
        INNER_BALL_TIMES,
        seed,
    ) {
        return inapplicable(format!("inner ball not contained in C(t) on [0, T]: {e}"));
    }
    let eps_sup = schedule.eps()[0];
    let params = BallBoundParams::with_eps(r, cfg.w.clone(), cfg.rho, scenario.y0.clone(), eps_sup);
    if !params.compatible() {
        let s = scenario.y0.dist(&cfg.w) + cfg.rho;
        return inapplicable(format!(
            "compatibility (|y0 - w| + rho)^2 = {} is not below 2 r rho = {}",
            s * s,
            2.0 * r * cfg.rho
        ));
    }
    if !(eps_sup < r / 2.0) {
        return inapplicable(format!("eps_0 = {eps_sup} is not below r/2 = {}", r / 2.0));
    }
    match ball_variation_bound(&params) {
        Ok(b) => BoundStatus::Applied {
            value: b.value,
            from_level: 0,
            details: serde_json::json!({
                "r": if r.is_finite() { serde_json::json!(r) } else { serde_json::json!("inf") },
                "rho": cfg.rho,
                "alpha": params.alpha,
                "y0_minus_w": scenario.y0.dist(&cfg.w),
                "near_pole": b.near_pole,
            }),
        },
        Err(e) => inapplicable(e.to_string()),
    }
}

/// The family's certified modulus, or a sampled table on dyadic δ's.
pub fn modulus_for(family: &MovingFamily) -> Result<Modulus> {
    if let Some(m) = family.analytic_modulus() {
        return Ok(m.clone());
    }
    let deltas: Vec<f64> = (0..=TABLE_HALVINGS)
        .rev()
        .map(|k| family.horizon() * 0.5f64.powi(k))
        .collect();
    Ok(Modulus::Table(estimate_modulus(family, &deltas, &SamplingParams::default())?))
}

#[allow(non_snake_case)]
fn cone_status(scenario: &Scenario, schedule: &RefinementSchedule) -> Result<BoundStatus> {
    let Some(cfg) = &scenario.cone_bound else {
        return Ok(BoundStatus::NotDeclared);
    };
    let r = scenario.cone_r().expect("declared");
    let omega = modulus_for(&scenario.family)?;
    let params = match choose_cone_params(r, cfg.R, cfg.d, &omega, scenario.horizon, schedule) {
        Ok(p) => p,
        Err(e @ (Error::NoPositiveTau { .. } | Error::NoFeasibleEps | Error::InapplicableBound(_))) => {
            return Ok(BoundStatus::Inapplicable { reason: e.to_string() })
        }
        Err(e) => return Err(e),
    };
    Ok(match cone_variation_bound(&params, scenario.horizon) {
        Ok(value) => BoundStatus::Applied {
            value,
            from_level: params.n_bar,
            details: serde_json::json!({
                "r": if r.is_finite() { serde_json::json!(r) } else { serde_json::json!("inf") },
                "R": params.R,
                "d": params.d,
                "lambda": params.lambda,
                "tau": params.tau,
                "eps_bar": params.eps_bar,
                "n_bar": params.n_bar,
                "windows": (2.0 * scenario.horizon / params.tau).ceil(),
            }),
        },
        Err(e) => BoundStatus::Inapplicable { reason: e.to_string() },
    })
}

/// Single-level verification: constraint residual and normal certificates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub scenario: String,
    pub level: usize,
    pub eps: f64,
    pub intervals: usize,
    pub constraint_residual: f64,
    pub certified_steps: usize,
    pub worst_normal_residual: f64,
    pub max_jump: f64,
    pub checks: Vec<Verdict>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn verify(scenario: &Scenario, level: usize, seed: Option<u64>) -> Result<VerifyReport> {
    let seed = effective_seed(scenario, seed)?;
    let schedule = schedule_for(scenario, Some(level + 1))?;
    let traj = solve_level(&scenario.family, &scenario.y0, &schedule, level)?;
    let constraint = traj.max_residual();
    let mut checks = vec![Verdict {
        check: Check::Constraint.name().into(),
        passed: constraint < CONSTRAINT_TOL,
        margin: CONSTRAINT_TOL - constraint,
        detail: format!("max d(y_j, C(t_j)) = {constraint:e}"),
    }];
    let (steps, worst) = match certify_steps(&scenario.family, &traj, scenario.certify_samples, seed) {
        Ok(certs) => {
            let worst = certs.iter().map(|c| c.normal_report.worst_residual).fold(0.0, f64::max);
            checks.push(Verdict {
                check: Check::Normal.name().into(),
                passed: true,
                margin: CERT_TOL - worst,
                detail: format!("{} nonzero steps certified", certs.len()),
            });
            (certs.len(), worst)
        }
        Err(e @ Error::CertificationFailed { .. }) => {
            checks.push(Verdict {
                check: Check::Normal.name().into(),
                passed: false,
                margin: -1.0,
                detail: e.to_string(),
            });
            (0, f64::NAN)
        }
        Err(e) => return Err(e),
    };
    Ok(VerifyReport {
        scenario: scenario.name.clone(),
        level,
        eps: traj.eps_level(),
        intervals: traj.grid().intervals(),
        constraint_residual: constraint,
        certified_steps: steps,
        worst_normal_residual: worst,
        max_jump: traj.max_jump(),
        checks,
    })
}
