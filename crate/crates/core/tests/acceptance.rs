//! Acceptance criteria. Runs as a plain binary (no libtest harness) so every
//! criterion prints exactly one PASS/FAIL line; exits nonzero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // ensure! treats NaN as failure

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sweepkit::prox::HalfSpace;
use sweepkit::run::{modulus_for, RunOutput};
use sweepkit::scenario::builtin_document;
use sweepkit::schedule::build_schedule_with;
use sweepkit::variation::sampled_sup_distance;
use sweepkit::{
    ball_variation_bound, builtin, certify_steps, compute_tau, converge_study, estimate_modulus, list_builtins,
    parse_scenario, run, solve, BallBoundParams, BoundStatus, Check, EpsTemplate, Error, GridSpec, ProxSet,
    RunOptions, SamplingParams, Scenario, TimeGrid, Vector,
};

fn v(a: &[f64]) -> Vector {
    Vector::from_slice(a)
}

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

// ---------------------------------------------------------------------------
// Independent membership oracles for the 2D primitives.

struct Primitive {
    name: &'static str,
    set: ProxSet,
    /// Defining inequalities evaluated directly, with slack `tol`.
    member: fn(f64, f64, f64) -> bool,
    /// Query points closer than this to the ball-complement center are
    /// skipped (outside the tube where projections are single-valued).
    min_center_dist: f64,
}

fn primitives() -> Vec<Primitive> {
    let s = 1.0 / 2f64.sqrt();
    let hn = v(&[1.0, 0.5]).scale(1.0 / 1.25f64.sqrt());
    vec![
        Primitive {
            name: "half-space",
            set: ProxSet::half_space(hn, 0.3).unwrap(),
            member: |x, y, tol| (x + 0.5 * y) / 1.25f64.sqrt() <= 0.3 + tol,
            min_center_dist: 0.0,
        },
        Primitive {
            name: "ball",
            set: ProxSet::ball(v(&[0.2, -0.1]), 0.8).unwrap(),
            member: |x, y, tol| ((x - 0.2).powi(2) + (y + 0.1).powi(2)).sqrt() <= 0.8 + tol,
            min_center_dist: 0.0,
        },
        Primitive {
            name: "box",
            set: ProxSet::axis_box(v(&[-0.5, -0.3]), v(&[0.7, 0.4])).unwrap(),
            member: |x, y, tol| (-0.5 - tol..=0.7 + tol).contains(&x) && (-0.3 - tol..=0.4 + tol).contains(&y),
            min_center_dist: 0.0,
        },
        Primitive {
            name: "triangle",
            set: ProxSet::polytope(vec![
                HalfSpace::new(v(&[-1.0, 0.0]), 0.0).unwrap(),
                HalfSpace::new(v(&[0.0, -1.0]), 0.0).unwrap(),
                HalfSpace::new(v(&[s, s]), s).unwrap(),
            ])
            .unwrap(),
            member: |x, y, tol| x >= -tol && y >= -tol && x + y <= 1.0 + tol,
            min_center_dist: 0.0,
        },
        Primitive {
            name: "ball-complement",
            set: ProxSet::ball_complement(v(&[0.0, 0.0]), 0.5).unwrap(),
            member: |x, y, tol| (x * x + y * y).sqrt() >= 0.5 - tol,
            min_center_dist: 0.25,
        },
    ]
}

const GRID_N: usize = 2001;
const GRID_LO: f64 = -2.5;
const GRID_HI: f64 = 2.5;

/// Nearest member grid point by expanding square rings around `y`.
fn grid_min_distance(member: fn(f64, f64, f64) -> bool, y: [f64; 2]) -> f64 {
    let h = (GRID_HI - GRID_LO) / (GRID_N - 1) as f64;
    let idx = |c: f64| (((c - GRID_LO) / h).round() as i64).clamp(0, GRID_N as i64 - 1);
    let (cx, cy) = (idx(y[0]), idx(y[1]));
    let mut best = f64::INFINITY;
    let visit = |i: i64, j: i64, best: &mut f64| {
        if i < 0 || j < 0 || i >= GRID_N as i64 || j >= GRID_N as i64 {
            return;
        }
        let (gx, gy) = (GRID_LO + i as f64 * h, GRID_LO + j as f64 * h);
        if member(gx, gy, 0.0) {
            *best = best.min(((gx - y[0]).powi(2) + (gy - y[1]).powi(2)).sqrt());
        }
    };
    for k in 0..GRID_N as i64 {
        if k as f64 * h - h > best {
            break;
        }
        if k == 0 {
            visit(cx, cy, &mut best);
            continue;
        }
        for d in -k..=k {
            visit(cx + d, cy - k, &mut best);
            visit(cx + d, cy + k, &mut best);
        }
        for d in -k + 1..k {
            visit(cx - k, cy + d, &mut best);
            visit(cx + k, cy + d, &mut best);
        }
    }
    best
}

fn sample_members(p: &Primitive, around: [f64; 2], half: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = around[0] + rng.gen_range(-half..=half);
        let y = around[1] + rng.gen_range(-half..=half);
        if (p.member)(x, y, 0.0) {
            out.push(v(&[x, y]));
        }
    }
    out
}

fn query_point(p: &Primitive, rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let y = [rng.gen_range(-1.5..=1.5), rng.gen_range(-1.5..=1.5)];
        if f64::hypot(y[0], y[1]) >= p.min_center_dist {
            return y;
        }
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let h = (GRID_HI - GRID_LO) / (GRID_N - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_gap: f64 = 0.0;
    let mut worst_vi: f64 = f64::NEG_INFINITY;
    for p in primitives() {
        for _ in 0..50 {
            let y = query_point(&p, &mut rng);
            let yv = v(&y);
            let x = p.set.project(&yv).map_err(|e| format!("{}: {e}", p.name))?;
            let (px, py) = (x.coords()[0], x.coords()[1]);
            ensure!((p.member)(px, py, 1e-9), "{}: projection {x:?} of {y:?} is not a member", p.name);
            let lib = yv.dist(&x);
            let grid = grid_min_distance(p.member, y);
            ensure!(lib <= grid + 1e-12, "{}: grid point beats the projection at {y:?}: {grid} < {lib}", p.name);
            ensure!(grid - lib <= 2.0 * h, "{}: {y:?}: grid minimum {grid} vs projection {lib}", p.name);
            worst_gap = worst_gap.max(grid - lib);

            let mut zs = sample_members(&p, [px, py], 0.5, 250, &mut rng);
            zs.extend(sample_members(&p, [0.0, 0.0], 2.0, 250, &mut rng));
            let n = yv.axpy(-1.0, &x);
            for z in &zs {
                let d = z.axpy(-1.0, &x);
                let defect = n.dot(&d) - 0.5 * d.norm_squared();
                worst_vi = worst_vi.max(defect);
            }
            ensure!(worst_vi <= 1e-9, "{}: projection inequality defect {worst_vi:e} at {y:?}", p.name);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "runtime {secs:.1}s");
    Ok(format!(
        "250 points, worst grid gap {worst_gap:.2e} (2h = {:.1e}), worst VI defect {worst_vi:.1e}, {secs:.1}s",
        2.0 * h
    ))
}

fn criterion_2() -> Outcome {
    let prims = primitives();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    while pairs < 100 {
        let p = &prims[pairs % prims.len()];
        let y = query_point(p, &mut rng);
        if (p.member)(y[0], y[1], 0.0) {
            continue;
        }
        let yv = v(&y);
        let x = p.set.project(&yv).map_err(|e| e.to_string())?;
        for t in [0.1, 0.5, 0.9] {
            let u = x.axpy(t, &yv.axpy(-1.0, &x));
            let again = p.set.project(&u).map_err(|e| e.to_string())?;
            worst = worst.max(again.dist(&x));
        }
        pairs += 1;
    }
    ensure!(worst <= 1e-9, "re-projection moved by {worst:e}");
    Ok(format!("100 pairs x 3 t, worst re-projection shift {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    let s = builtin("sweep_halfspace").map_err(|e| e.to_string())?;
    let mut lines = Vec::new();
    for h in [1e-2, 1e-3, 1e-4] {
        let n = (s.horizon / h).round() as usize;
        let grid = TimeGrid::uniform(0.0, s.horizon, n).unwrap();
        let traj = solve(&s.family, &s.y0, &grid, 2.0 * h).map_err(|e| e.to_string())?;
        let exact = |t: f64| [f64::min(0.0, 1.0 - t), 0.0];
        let step = traj.step_interpolant();
        let mut err: f64 = 0.0;
        let probes = 10 * n;
        for i in 0..=probes {
            let t = s.horizon * i as f64 / probes as f64;
            let y = step.eval(t).unwrap();
            let e = exact(t);
            err = err.max(((y.coords()[0] - e[0]).powi(2) + (y.coords()[1] - e[1]).powi(2)).sqrt());
        }
        let var = sweepkit::variation(&traj, 0.0, s.horizon).unwrap();
        ensure!(err <= 2.0 * h, "h = {h}: sup error {err}");
        ensure!((var - 1.0).abs() <= 2.0 * h, "h = {h}: variation {var}");
        lines.push(format!("h={h:e}: err {err:.2e}, |V-1| {:.1e}", (var - 1.0).abs()));
    }
    Ok(lines.join("; "))
}

fn criterion_4(runs: &BTreeMap<String, (Scenario, RunOutput)>) -> Outcome {
    let mut parts = Vec::new();
    for (name, (s, out)) in runs {
        let finest = out.trajectories.last().unwrap();
        let certs = certify_steps(&s.family, finest, s.certify_samples, s.seed).map_err(|e| format!("{name}: {e}"))?;
        let worst = certs
            .iter()
            .map(|c| c.normal_report.worst_residual)
            .fold(f64::NEG_INFINITY, f64::max);
        ensure!(certs.is_empty() || worst <= 1e-6, "{name}: worst residual {worst:e}");
        parts.push(format!("{name} {worst:.0e}"));
    }
    Ok(format!("worst residual per builtin: {}", parts.join(", ")))
}

fn criterion_5(runs: &BTreeMap<String, (Scenario, RunOutput)>) -> Outcome {
    let (s, out) = &runs["shrinking_ball_inner_cert"];
    let rep = &out.report;
    let BoundStatus::Applied { value, .. } = &rep.ball_bound else {
        return Err(format!("ball bound not applied: {:?}", rep.ball_bound));
    };
    let cfg = s.ball_bound.as_ref().unwrap();
    let r = s.ball_r().unwrap();
    let alpha = s.y0.dist(&cfg.w) + cfg.rho + s.schedule.eps0;
    let expected = (r * (s.y0.dist(&cfg.w).powi(2) - cfg.rho.powi(2)) / (2.0 * r * cfg.rho - alpha * alpha)).max(0.0);
    ensure!((value - expected).abs() <= 1e-9 * expected, "bound {value} vs recomputed {expected}");
    let margin = rep.levels.iter().map(|l| value - l.variation).fold(f64::INFINITY, f64::min);
    ensure!(margin > 0.0, "margin {margin}");
    let verdict = rep.verdict(Check::BallBound).unwrap();
    ensure!(verdict.passed && verdict.margin > 0.0, "verdict {verdict:?}");

    // r = 1 breaks (|y0 - w| + rho)^2 < 2 r rho.
    let mut doc: serde_json::Value = serde_json::from_str(builtin_document("shrinking_ball_inner_cert").unwrap()).unwrap();
    doc["bounds"]["ball"]["r"] = serde_json::json!(1.0);
    let bad = parse_scenario(&doc.to_string()).map_err(|e| e.to_string())?;
    let bad_out = run(&bad, None, &RunOptions::default()).map_err(|e| e.to_string())?;
    ensure!(
        matches!(bad_out.report.ball_bound, BoundStatus::Inapplicable { .. }),
        "violating config gave {:?}",
        bad_out.report.ball_bound
    );
    ensure!(!bad_out.report.verdict(Check::BallBound).unwrap().passed, "violating config passed");
    let direct = ball_variation_bound(&BallBoundParams::with_eps(1.0, cfg.w.clone(), cfg.rho, s.y0.clone(), 0.1));
    ensure!(matches!(direct, Err(Error::InapplicableBound(_))), "direct call gave {direct:?}");
    Ok(format!(
        "bound {value:.6} vs max variation {:.6}, margin {margin:.4}; r=1 config -> InapplicableBound",
        value - margin
    ))
}

fn criterion_6(runs: &BTreeMap<String, (Scenario, RunOutput)>) -> Outcome {
    let mut parts = Vec::new();
    for name in ["polytope_rotation", "moving_obstacle"] {
        let (s, out) = &runs[name];
        let BoundStatus::Applied { value, from_level, details } = &out.report.cone_bound else {
            return Err(format!("{name}: cone bound not applied: {:?}", out.report.cone_bound));
        };
        let cfg = s.cone_bound.as_ref().unwrap();
        let r = s.cone_r().unwrap();
        let (big_r, d) = (cfg.R, cfg.d);
        let lambda = details["lambda"].as_f64().unwrap();
        let tau = details["tau"].as_f64().unwrap();
        let eps_bar = details["eps_bar"].as_f64().unwrap();

        let lam_expected = if r.is_finite() {
            (0.9 * r * big_r / (d + big_r / 2.0).powi(2)).min(0.99)
        } else {
            0.99
        };
        ensure!((lambda - lam_expected).abs() <= 1e-15, "{name}: lambda {lambda} vs {lam_expected}");

        // tau: largest omega(tau) < min{min(rho0 - rho, r), rho} - 1e-9 with
        // rho0 = lambda R, rho = lambda R / 2, by bisection on [0, T].
        let omega = modulus_for(&s.family).map_err(|e| e.to_string())?;
        let (rho0, rho) = (lambda * big_r, lambda * big_r / 2.0);
        let target = (rho0 - rho).min(r).min(rho) - 1e-9;
        let mut tau_expected = s.horizon;
        if omega.eval(s.horizon) >= target {
            let (mut lo, mut hi) = (0.0, s.horizon);
            for _ in 0..64 {
                let mid = 0.5 * (lo + hi);
                if omega.eval(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            tau_expected = lo;
        }
        ensure!((tau - tau_expected).abs() <= 1e-12, "{name}: tau {tau} vs recipe {tau_expected}");
        let lib_tau = compute_tau(&omega, r, rho0, rho, s.horizon).unwrap();
        ensure!(lib_tau == tau, "{name}: compute_tau {lib_tau} vs report {tau}");

        let alpha = lambda * d + lambda * big_r / 2.0 + eps_bar;
        let per_window = if r.is_finite() {
            r * (d * d - (lambda * big_r / 2.0).powi(2)) / (lambda * r * big_r - alpha * alpha)
        } else {
            (d * d - (lambda * big_r / 2.0).powi(2)) / (lambda * big_r)
        };
        let expected = (2.0 * s.horizon / tau).ceil() * (per_window + eps_bar);
        ensure!((value - expected).abs() <= 1e-9 * expected, "{name}: bound {value} vs {expected}");

        let covered: Vec<_> = out.report.levels.iter().filter(|l| l.level >= *from_level).collect();
        ensure!(!covered.is_empty(), "{name}: no level reaches n_bar = {from_level}");
        let worst = covered.iter().map(|l| l.variation).fold(0.0, f64::max);
        ensure!(worst <= *value, "{name}: variation {worst} exceeds bound {value}");
        parts.push(format!("{name}: V {worst:.4} <= {value:.3} (tau {tau:.4}, n_bar {from_level})"));
    }
    Ok(parts.join("; "))
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    for name in ["sweep_halfspace", "moving_obstacle", "jump_expansion"] {
        let s = builtin(name).map_err(|e| e.to_string())?;
        let sched = sweepkit::run::schedule_for(&s, Some(6)).map_err(|e| e.to_string())?;
        let (rep, _) = converge_study(&s.family, &s.y0, &sched).map_err(|e| e.to_string())?;
        ensure!(rep.levels.len() == 5, "{name}: {} rows", rep.levels.len());
        let c = &rep.cauchy_ratios;
        let head = c[..3].iter().copied().fold(0.0, f64::max);
        let tail = c[c.len() - 3..].iter().copied().fold(0.0, f64::max);
        ensure!(tail <= 2.0 * head, "{name}: ratios grow: {c:?}");
        ensure!(
            rep.sup_diffs.windows(2).all(|w| w[1] < w[0]),
            "{name}: sup diffs not strictly decreasing: {:?}",
            rep.sup_diffs
        );
        parts.push(format!("{name} tail/head {:.2}", tail / head));
    }
    Ok(parts.join(", "))
}

fn criterion_8(runs: &BTreeMap<String, (Scenario, RunOutput)>) -> Outcome {
    let (s, out) = &runs["jump_expansion"];
    ensure!(out.trajectories.len() == s.schedule.levels, "only {} levels", out.trajectories.len());
    let finest = out.trajectories.last().unwrap();
    // Residuals are recorded on the nodes; the step interpolant holds each
    // node value until the next node, where it is re-projected.
    let mut worst: f64 = finest.max_residual();
    for (j, t) in finest.times().iter().enumerate() {
        let slice = s.family.slice(*t).unwrap();
        worst = worst.max(slice.distance(&finest.points()[j]).unwrap());
    }
    ensure!(worst <= 1e-9, "finest residual {worst:e}");

    let mut doc: serde_json::Value = serde_json::from_str(builtin_document("jump_expansion").unwrap()).unwrap();
    // Same second-piece rate, started from the radius the first piece ends at.
    doc["family"]["pieces"][1]["family"]["radius"]["value"] = serde_json::json!(1.1);
    let smooth = parse_scenario(&doc.to_string()).map_err(|e| e.to_string())?;
    let deltas: Vec<f64> = (0..=12).rev().map(|k| 2.0 * 0.5f64.powi(k)).collect();
    let budget = SamplingParams::default();
    let jumpy = estimate_modulus(&s.family, &deltas, &budget).map_err(|e| e.to_string())?;
    let plain = estimate_modulus(&smooth.family, &deltas, &budget).map_err(|e| e.to_string())?;
    let mut worst_diff: f64 = 0.0;
    for ((d, a), (_, b)) in jumpy.iter().zip(&plain) {
        if *d <= 1.0 {
            worst_diff = worst_diff.max((a - b).abs());
        } else {
            // longer windows straddle the jump; it can only help
            ensure!(*a <= b + 1e-9, "delta {d}: {a} > {b}");
        }
    }
    ensure!(worst_diff <= 1e-9, "omega differs by {worst_diff:e}");
    let used = out.schedule.delta()[0];
    ensure!(used <= 1.0, "schedule uses delta {used} > 1");
    Ok(format!(
        "{} levels, finest residual {worst:.0e}, |omega_jump - omega_nojump| <= {worst_diff:.0e} for delta <= 1",
        out.trajectories.len()
    ))
}

fn criterion_9() -> Outcome {
    let mut parts = Vec::new();
    for name in ["sweep_halfspace", "moving_obstacle", "jump_expansion", "polytope_rotation"] {
        let s = builtin(name).map_err(|e| e.to_string())?;
        let levels = 5;
        let a = sweepkit::run::schedule_for(&s, Some(levels)).map_err(|e| e.to_string())?;
        let b = build_schedule_with(
            &s.family,
            s.horizon,
            &EpsTemplate::new(0.07, 0.45).unwrap(),
            levels,
            GridSpec::new(3, 2).unwrap(),
            &SamplingParams::default(),
        )
        .map_err(|e| e.to_string())?;
        let fa = sweepkit::solve_level(&s.family, &s.y0, &a, levels - 1).map_err(|e| e.to_string())?;
        let fb = sweepkit::solve_level(&s.family, &s.y0, &b, levels - 1).map_err(|e| e.to_string())?;
        let gap = sampled_sup_distance(&fa, &fb, 20_000).map_err(|e| e.to_string())?;
        let eps = fa.eps_level().min(fb.eps_level());
        ensure!(gap <= 3.0 * eps, "{name}: sup gap {gap} vs 3 eps = {}", 3.0 * eps);
        parts.push(format!("{name} {:.2}", gap / (3.0 * eps)));
    }
    Ok(format!("gap / (3 eps): {}", parts.join(", ")))
}

fn criterion_10() -> Outcome {
    std::env::set_var("SWEEP_SEED", "1234");
    let mut checked = 0;
    for name in ["moving_obstacle", "polytope_rotation"] {
        let s = builtin(name).map_err(|e| e.to_string())?;
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let o1 = run(&s, Some(d1.path()), &RunOptions::default()).map_err(|e| e.to_string())?;
        let o2 = run(&s, Some(d2.path()), &RunOptions::default()).map_err(|e| e.to_string())?;
        ensure!(o1.report.seed == 1234, "SWEEP_SEED ignored");
        for p in o1.written.iter().filter(|p| p.extension().is_some_and(|e| e == "csv")) {
            let other = d2.path().join(p.file_name().unwrap());
            ensure!(std::fs::read(p).unwrap() == std::fs::read(&other).unwrap(), "{} differs", p.display());
            checked += 1;
        }
        ensure!(o1.report.checks == o2.report.checks, "{name}: verdicts differ between runs");
    }
    std::env::remove_var("SWEEP_SEED");

    let names = list_builtins();
    for (name, _) in &names {
        let s = builtin(name).map_err(|e| e.to_string())?;
        let text = s.to_json_string();
        let back = parse_scenario(&text).map_err(|e| format!("{name}: {e}"))?;
        ensure!(back == s, "{name}: parse(serialize) changed the scenario");
        ensure!(back.to_json_string() == text, "{name}: serialization not stable");
    }
    Ok(format!("{checked} CSV files byte-identical; {} builtins round-trip", names.len()))
}

fn main() {
    let t0 = Instant::now();
    let runs: BTreeMap<String, (Scenario, RunOutput)> = list_builtins()
        .into_iter()
        .map(|(name, _)| {
            let s = builtin(&name).expect("builtin parses");
            let out = run(&s, None, &RunOptions::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, (s, out))
        })
        .collect();

    let criteria: Vec<Criterion> = vec![
        ("projection oracle equivalence", Box::new(criterion_1)),
        ("segment re-projection", Box::new(criterion_2)),
        ("closed-form sweep", Box::new(criterion_3)),
        ("discrete inclusion certificates", Box::new(|| criterion_4(&runs))),
        ("ball variation bound", Box::new(|| criterion_5(&runs))),
        ("cone variation bound", Box::new(|| criterion_6(&runs))),
        ("empirical Cauchy law", Box::new(criterion_7)),
        ("excess-continuous jump", Box::new(|| criterion_8(&runs))),
        ("schedule independence", Box::new(criterion_9)),
        ("determinism and round-trip", Box::new(criterion_10)),
    ];

    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {title} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {title} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.1}s)",
        criteria.len() - failed,
        t0.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
