//! Nested refinement schedules `(ε_n, δ_n, grid_n)` for the catching-up scheme.

use crate::error::{Error, Result};
use crate::family::{estimate_modulus, Modulus, MovingFamily, SamplingParams};
use crate::grid::TimeGrid;

/// Stand-in for `r = ∞` when validating `ε_0 < r`; never used as a curvature.
pub const CONVEX_R_CAP: f64 = 1e9;

/// Finest resolution searched for δ, relative to the horizon.
const MAX_DELTA_HALVINGS: u32 = 40;

/// `ε_n = eps0 * ratio^n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsTemplate {
    pub eps0: f64,
    pub ratio: f64,
}

impl EpsTemplate {
    pub fn new(eps0: f64, ratio: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0.is_finite()) {
            return Err(Error::InvalidSchedule(format!("eps0 must be positive, got {eps0}")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidSchedule(format!("ratio must lie in (0, 1), got {ratio}")));
        }
        Ok(EpsTemplate { eps0, ratio })
    }

    pub fn eps(&self, n: usize) -> f64 {
        self.eps0 * self.ratio.powi(n as i32)
    }

    /// Sum of the whole geometric series, an upper bound for any prefix.
    pub fn total(&self) -> f64 {
        self.eps0 / (1.0 - self.ratio)
    }
}

/// Level-`n` grids are uniform with `base_intervals * factor^k_n` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub factor: usize,
    pub base_intervals: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            factor: 2,
            base_intervals: 1,
        }
    }
}

impl GridSpec {
    pub fn new(factor: usize, base_intervals: usize) -> Result<Self> {
        if factor < 2 {
            return Err(Error::InvalidSchedule(format!("refinement factor must be >= 2, got {factor}")));
        }
        if base_intervals < 1 {
            return Err(Error::InvalidSchedule("base_intervals must be >= 1".into()));
        }
        Ok(GridSpec { factor, base_intervals })
    }

    pub fn intervals(&self, k: u32) -> usize {
        self.base_intervals * self.factor.pow(k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementSchedule {
    eps: Vec<f64>,
    delta: Vec<f64>,
    grids: Vec<TimeGrid>,
    r: f64,
    template: EpsTemplate,
    spec: GridSpec,
}

impl RefinementSchedule {
    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn grids(&self) -> &[TimeGrid] {
        &self.grids
    }

    pub fn levels(&self) -> usize {
        self.eps.len()
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn template(&self) -> EpsTemplate {
        self.template
    }

    pub fn grid_spec(&self) -> GridSpec {
        self.spec
    }

    /// Re-checks every schedule invariant.
    pub fn validate(&self) -> Result<()> {
        for n in 0..self.levels() {
            let e = self.eps[n];
            if !(e > 0.0 && e < self.r.min(CONVEX_R_CAP)) {
                return Err(Error::InvalidSchedule(format!("eps[{n}] = {e} not in (0, r)")));
            }
            if self.grids[n].mesh() > self.delta[n] {
                return Err(Error::InvalidSchedule(format!(
                    "mesh of grid {n} exceeds delta = {}",
                    self.delta[n]
                )));
            }
            if n > 0 {
                if !(e < self.eps[n - 1]) || !(self.delta[n] <= self.delta[n - 1]) {
                    return Err(Error::InvalidSchedule(format!("level {n} is not a refinement")));
                }
                if !self.grids[n - 1].is_nested_in(&self.grids[n]) {
                    return Err(Error::InvalidSchedule(format!("grid {} is not nested in grid {n}", n - 1)));
                }
            }
        }
        Ok(())
    }
}

/// Dyadic schedule; see [`build_schedule_with`].
pub fn build_schedule(
    family: &MovingFamily,
    horizon: f64,
    template: &EpsTemplate,
    levels: usize,
) -> Result<RefinementSchedule> {
    build_schedule_with(family, horizon, template, levels, GridSpec::default(), &SamplingParams::default())
}

/// Picks, for each `ε_n`, the largest δ with `ω(δ) < ε_n` (bisection on an
/// analytic modulus, dyadic scan on a sampled one), halves it, and takes
/// the coarsest grid of mesh `<= δ_n` that is strictly finer than the
/// previous level's.
pub fn build_schedule_with(
    family: &MovingFamily,
    horizon: f64,
    template: &EpsTemplate,
    levels: usize,
    spec: GridSpec,
    budget: &SamplingParams,
) -> Result<RefinementSchedule> {
    let template = EpsTemplate::new(template.eps0, template.ratio)?;
    let spec = GridSpec::new(spec.factor, spec.base_intervals)?;
    if levels < 1 {
        return Err(Error::InvalidSchedule("at least one level is required".into()));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidSchedule(format!("horizon must be positive, got {horizon}")));
    }
    if (horizon - family.horizon()).abs() > 1e-12 * family.horizon().max(1.0) {
        return Err(Error::InvalidSchedule(format!(
            "horizon {horizon} differs from the family horizon {}",
            family.horizon()
        )));
    }
    let r = family.r();
    if template.eps0 >= r.min(CONVEX_R_CAP) {
        return Err(Error::InvalidSchedule(format!(
            "eps0 = {} must be below r = {r}",
            template.eps0
        )));
    }

    let mut eps = Vec::with_capacity(levels);
    let mut delta = Vec::with_capacity(levels);
    let mut grids = Vec::with_capacity(levels);
    let mut prev_k: Option<u32> = None;
    for n in 0..levels {
        let e = template.eps(n);
        if !(e > 0.0) {
            return Err(Error::InvalidSchedule(format!("eps[{n}] underflows")));
        }
        let admissible = largest_admissible_delta(family, horizon, e, budget)?;
        let d = if admissible >= horizon { horizon } else { 0.5 * admissible };
        let mut k = prev_k.map_or(0, |p| p + 1);
        while horizon / spec.intervals(k) as f64 > d {
            k += 1;
        }
        grids.push(TimeGrid::uniform(0.0, horizon, spec.intervals(k))?);
        prev_k = Some(k);
        eps.push(e);
        // keep δ nonincreasing even when a coarse level was forced finer
        delta.push(match delta.last() {
            Some(&p) if d > p => p,
            _ => d,
        });
    }
    let schedule = RefinementSchedule {
        eps,
        delta,
        grids,
        r,
        template,
        spec,
    };
    schedule.validate()?;
    Ok(schedule)
}

fn largest_admissible_delta(family: &MovingFamily, horizon: f64, eps: f64, budget: &SamplingParams) -> Result<f64> {
    let smallest = horizon * 0.5f64.powi(MAX_DELTA_HALVINGS as i32);
    let unavailable = || Error::ModulusUnavailable {
        eps,
        smallest_delta: smallest,
    };
    if let Some(m) = family.analytic_modulus() {
        return bisect(m, horizon, eps, smallest).ok_or_else(unavailable);
    }
    for k in 0..=MAX_DELTA_HALVINGS {
        let d = horizon * 0.5f64.powi(k as i32);
        let w = estimate_modulus(family, &[d], budget)?[0].1;
        if w < eps {
            return Ok(d);
        }
    }
    Err(unavailable())
}

fn bisect(m: &Modulus, horizon: f64, eps: f64, smallest: f64) -> Option<f64> {
    if m.eval(horizon) < eps {
        return Some(horizon);
    }
    if m.eval(smallest) >= eps {
        return None;
    }
    let (mut lo, mut hi) = (smallest, horizon);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if m.eval(mid) < eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}
