//! Excess-continuity modulus `ω(δ) = sup { e(C(s), C(t)) : 0 <= t - s <= δ }`
//! and the inner-ball persistence horizon τ.

use rayon::prelude::*;

use super::excess::{excess, SamplingParams};
use super::MovingFamily;
use crate::error::{Error, Result};

/// Strict-inequality margin used when searching for τ.
pub const TAU_MARGIN: f64 = 1e-9;

/// Base points per δ for the sampled modulus.
const MODULUS_BASE_POINTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum Modulus {
    /// `ω(δ) <= offset + rate * δ` for `δ > 0`, `ω(0) = 0`.
    Lipschitz { rate: f64, offset: f64 },
    /// Sampled `(δ, ω̂(δ))` pairs, nondecreasing in both coordinates. Read
    /// as a step function from above; infinite past the last entry.
    Table(Vec<(f64, f64)>),
}

impl Modulus {
    pub fn lipschitz(rate: f64, offset: f64) -> Self {
        Modulus::Lipschitz { rate, offset }
    }

    pub fn zero() -> Self {
        Modulus::lipschitz(0.0, 0.0)
    }

    pub fn eval(&self, delta: f64) -> f64 {
        if delta <= 0.0 {
            return 0.0;
        }
        match self {
            Modulus::Lipschitz { rate, offset } => offset + rate * delta,
            Modulus::Table(rows) => {
                let k = rows.partition_point(|(d, _)| *d < delta);
                rows.get(k).map_or(f64::INFINITY, |(_, w)| *w)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Modulus::Lipschitz { rate, offset } => *rate == 0.0 && *offset == 0.0,
            Modulus::Table(rows) => rows.iter().all(|(_, w)| *w == 0.0),
        }
    }
}

/// `(δ, ω̂(δ))` for each requested δ.
///
/// Uses the family's certified modulus when it has one. Otherwise samples
/// pairs `(s, s + δ')`, `δ' ∈ {δ, δ/2, δ/4}`, over 64 base points `s`, plus
/// pairs straddling each breakpoint, and takes running maxima so the
/// estimate is nondecreasing in δ.
pub fn estimate_modulus(
    family: &MovingFamily,
    deltas: &[f64],
    budget: &SamplingParams,
) -> Result<Vec<(f64, f64)>> {
    let horizon = family.horizon();
    for &d in deltas {
        if !(d > 0.0 && d <= horizon) {
            return Err(Error::InvalidSchedule(format!(
                "modulus delta {d} outside (0, {horizon}]"
            )));
        }
    }
    if let Some(m) = family.analytic_modulus() {
        return Ok(deltas.iter().map(|&d| (d, m.eval(d))).collect());
    }
    let mut order: Vec<usize> = (0..deltas.len()).collect();
    order.sort_by(|&a, &b| deltas[a].total_cmp(&deltas[b]));
    let raw: Vec<f64> = deltas
        .par_iter()
        .map(|&d| sampled_omega(family, d, budget))
        .collect::<Result<_>>()?;
    let mut out = vec![(0.0, 0.0); deltas.len()];
    let mut running = 0.0_f64;
    for &k in &order {
        running = running.max(raw[k]);
        out[k] = (deltas[k], running);
    }
    Ok(out)
}

fn sampled_omega(family: &MovingFamily, delta: f64, budget: &SamplingParams) -> Result<f64> {
    let horizon = family.horizon();
    let mut pairs = Vec::new();
    for frac in [1.0, 0.5, 0.25] {
        let step = delta * frac;
        let last_start = horizon - step;
        for i in 0..MODULUS_BASE_POINTS {
            let s = last_start * i as f64 / (MODULUS_BASE_POINTS - 1) as f64;
            pairs.push((s, (s + step).min(horizon)));
        }
    }
    for b in family.breakpoints() {
        for frac in [1.0, 0.5, 1e-3] {
            let s = (b.time - frac * delta).max(0.0);
            pairs.push((s, (s + delta).min(horizon)));
            pairs.push((s, b.time));
        }
    }
    let worst = pairs
        .par_iter()
        .map(|&(s, t)| -> Result<f64> {
            let a = family.slice(s)?;
            let b = family.slice(t)?;
            Ok(excess(&a, &b, budget)?.lower)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst)
}

/// Horizon over which an inner ball of radius `rho0` keeps radius `rho`.
///
/// Bisects (64 iterations on `[0, horizon]`) for the largest δ with
/// `ω(δ) < min{η, ρ} - TAU_MARGIN`, `η = min{ρ₀ - ρ, r}`.
pub fn compute_tau(omega: &Modulus, r: f64, rho0: f64, rho: f64, horizon: f64) -> Result<f64> {
    if !(rho > 0.0 && rho < rho0) {
        return Err(Error::InapplicableBound(format!(
            "tau needs 0 < rho < rho0, got rho = {rho}, rho0 = {rho0}"
        )));
    }
    if !(r > 0.0) {
        return Err(Error::InapplicableBound(format!("tau needs r > 0, got {r}")));
    }
    if !(horizon > 0.0) {
        return Err(Error::InapplicableBound(format!("tau needs a positive horizon, got {horizon}")));
    }
    let eta = (rho0 - rho).min(r);
    let threshold = eta.min(rho);
    let target = threshold - TAU_MARGIN;
    let admissible = |d: f64| omega.eval(d) < target;
    if admissible(horizon) {
        return Ok(horizon);
    }
    let mut lo = 0.0;
    let mut hi = horizon;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > 0.0 {
        Ok(lo)
    } else {
        Err(Error::NoPositiveTau { threshold })
    }
}
