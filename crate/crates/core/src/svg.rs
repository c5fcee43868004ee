//! Minimal standalone SVG plots.

use std::fmt::Write;

use crate::solver::DiscreteTrajectory;
use crate::variation::ConvergenceReport;

const W: f64 = 720.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    }
}

/// Each coordinate of the step trajectories against `t`, one line per
/// (level, coordinate); coarser levels are drawn fainter.
pub fn trajectory_svg(name: &str, trajs: &[DiscreteTrajectory]) -> String {
    let mut out = String::new();
    header(&mut out, &format!("{name}: trajectory components"));
    let Some(finest) = trajs.last() else {
        out.push_str("</svg>\n");
        return out;
    };
    let (t0, t1) = (finest.grid().t_first(), finest.grid().t_last());
    let (t0, t1) = if t1 > t0 { (t0, t1) } else { (t0 - 0.5, t0 + 0.5) };
    let (y0, y1) = range(trajs.iter().flat_map(|t| t.points().iter().flat_map(|p| p.coords().iter().copied())));
    let sx = |t: f64| PAD + (t - t0) / (t1 - t0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    for (li, traj) in trajs.iter().enumerate() {
        let opacity = 0.25 + 0.75 * (li + 1) as f64 / trajs.len() as f64;
        for i in 0..traj.dim() {
            // Step plot: hold y_{j-1} until t_j, then jump.
            let mut pts = String::new();
            let times = traj.times();
            let points = traj.points();
            for j in 0..times.len() {
                if j > 0 {
                    let _ = write!(pts, "{:.2},{:.2} ", sx(times[j]), sy(points[j - 1].coords()[i]));
                }
                let _ = write!(pts, "{:.2},{:.2} ", sx(times[j]), sy(points[j].coords()[i]));
            }
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-opacity="{opacity:.2}" stroke-width="1.5" points="{}"/>"#,
                PALETTE[i % PALETTE.len()],
                pts.trim_end()
            );
        }
    }
    for i in 0..finest.dim() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{}">x_{i}</text>"#,
            W - PAD + 6.0,
            PAD + 14.0 * (i as f64 + 1.0),
            PALETTE[i % PALETTE.len()]
        );
    }
    axis_labels(&mut out, &format!("{t0:.3}"), &format!("{t1:.3}"), &format!("{y0:.3}"), &format!("{y1:.3}"));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#, W / 2.0, H - 18.0);
    out.push_str("</svg>\n");
    out
}

fn axis_labels(out: &mut String, x0: &str, x1: &str, y0: &str, y1: &str) {
    let _ = writeln!(out, r#"<text x="{PAD}" y="{}" text-anchor="middle">{x0}</text>"#, H - PAD + 16.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{x1}</text>"#, W - PAD, H - PAD + 16.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{y0}</text>"#, PAD - 4.0, H - PAD);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{y1}</text>"#, PAD - 4.0, PAD + 10.0);
}

/// Paired log-scale bars of `eps_n` and `sup_diff_n^2` per row of the report.
/// Zero sup differences are drawn as a marker at the floor.
pub fn convergence_svg(name: &str, rep: &ConvergenceReport) -> String {
    let mut out = String::new();
    header(&mut out, &format!("{name}: eps_n vs sup_diff_n^2 (log10)"));
    let rows = rep.sup_diffs.len();
    if rows == 0 {
        out.push_str("</svg>\n");
        return out;
    }
    let values: Vec<(f64, f64)> = (0..rows).map(|i| (rep.eps[i], rep.sup_diffs[i].powi(2))).collect();
    let logs = values
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .filter(|v| *v > 0.0)
        .map(f64::log10);
    let (lo, hi) = logs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo.floor() - 1.0, hi.ceil()) } else { (-1.0, 0.0) };
    let hi = if hi > lo { hi } else { lo + 1.0 };
    let sy = |l: f64| H - PAD - (l - lo) / (hi - lo) * (H - 2.0 * PAD);
    let slot = (W - 2.0 * PAD) / rows as f64;
    let bar = slot * 0.35;
    for (i, &(e, s2)) in values.iter().enumerate() {
        let x = PAD + slot * i as f64 + slot * 0.12;
        for (k, (v, color)) in [(e, PALETTE[0]), (s2, PALETTE[1])].into_iter().enumerate() {
            let bx = x + k as f64 * bar;
            if v > 0.0 {
                let top = sy(v.log10());
                let _ = writeln!(
                    out,
                    r#"<rect x="{bx:.2}" y="{top:.2}" width="{bar:.2}" height="{:.2}" fill="{color}"/>"#,
                    H - PAD - top
                );
            } else {
                let _ = writeln!(
                    out,
                    r#"<rect x="{bx:.2}" y="{:.2}" width="{bar:.2}" height="3" fill="{color}" fill-opacity="0.4"/>"#,
                    H - PAD - 3.0
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">n={}</text>"#,
            x + bar,
            H - PAD + 16.0,
            rep.levels[i]
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">1e{lo}</text>"#, PAD - 4.0, H - PAD);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">1e{hi}</text>"#, PAD - 4.0, PAD + 10.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" fill="{}">eps_n</text>"#, W - PAD - 120.0, PAD - 8.0, PALETTE[0]);
    let _ = writeln!(out, r#"<text x="{}" y="{}" fill="{}">sup_diff^2</text>"#, W - PAD - 60.0, PAD - 8.0, PALETTE[1]);
    out.push_str("</svg>\n");
    out
}
