//! Time subdivisions of a horizon and the anticipating map onto them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A strictly increasing list of time nodes `t_0 < t_1 < ... < t_J`, `J >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::InvalidGrid("a grid needs at least two nodes".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidGrid("non-finite node".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(format!(
                "nodes not strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }
        Ok(TimeGrid { times })
    }

    /// `intervals` equal steps on `[from, to]`.
    ///
    /// Node `j` is `from + (to - from) * (j / intervals)` with the ratio rounded
    /// once, so a grid with `k * intervals` steps reproduces every node of this
    /// one bit for bit.
    pub fn uniform(from: f64, to: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(Error::InvalidGrid("at least one interval required".into()));
        }
        if !(to > from) {
            return Err(Error::InvalidGrid(format!("empty horizon [{from}, {to}]")));
        }
        let span = to - from;
        let n = intervals as f64;
        let mut times: Vec<f64> = (0..=intervals)
            .map(|j| from + span * (j as f64 / n))
            .collect();
        times[intervals] = to;
        Self::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t_first(&self) -> f64 {
        self.times[0]
    }

    pub fn t_last(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Number of intervals `J`.
    pub fn intervals(&self) -> usize {
        self.times.len() - 1
    }

    pub fn mesh(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn contains_range(&self, t: f64) -> Result<()> {
        if t >= self.t_first() && t <= self.t_last() {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                t,
                from: self.t_first(),
                to: self.t_last(),
            })
        }
    }

    /// Index `j >= 1` of the interval `(t_{j-1}, t_j]` holding `t`; `0` at `t_first`.
    pub fn anticipating_index(&self, t: f64) -> Result<usize> {
        self.contains_range(t)?;
        if t == self.t_first() {
            return Ok(0);
        }
        Ok(self.times.partition_point(|&s| s < t))
    }

    /// Index `j` with `t ∈ [t_j, t_{j+1})`, or `J` at the last node.
    pub fn interval_index(&self, t: f64) -> Result<usize> {
        self.contains_range(t)?;
        let j = self.times.partition_point(|&s| s <= t);
        Ok(j.saturating_sub(1).min(self.intervals()))
    }

    /// Whether every node of `self` is also a node of `finer`.
    pub fn is_nested_in(&self, finer: &TimeGrid) -> bool {
        let mut k = 0;
        for &t in &self.times {
            while k < finer.times.len() && finer.times[k] < t {
                k += 1;
            }
            if k == finer.times.len() || finer.times[k] != t {
                return false;
            }
        }
        true
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(times: Vec<f64>) -> Result<Self> {
        TimeGrid::new(times)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(grid: TimeGrid) -> Self {
        grid.times
    }
}

/// The anticipating map: the smallest node `>= t`, and `t_first` at `t_first`.
pub fn anticipate(grid: &TimeGrid, t: f64) -> Result<f64> {
    Ok(grid.times[grid.anticipating_index(t)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half_grid() -> TimeGrid {
        TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap()
    }

    #[test]
    fn anticipate_examples() {
        let g = half_grid();
        assert_eq!(anticipate(&g, 0.3).unwrap(), 0.5);
        assert_eq!(anticipate(&g, 0.5).unwrap(), 0.5);
        assert_eq!(anticipate(&g, 0.0).unwrap(), 0.0);
        assert_eq!(anticipate(&g, 1.0).unwrap(), 1.0);
        assert!(matches!(
            anticipate(&g, 1.5),
            Err(Error::OutOfRange { .. })
        ));
        assert!(anticipate(&g, -0.1).is_err());
    }

    #[test]
    fn rejects_non_increasing() {
        assert!(TimeGrid::new(vec![0.0, 0.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::uniform(1.0, 1.0, 4).is_err());
    }

    #[test]
    fn uniform_refinements_are_bitwise_nested() {
        for &horizon in &[2.0, 0.3, 2.1, 1.0 / 3.0] {
            for base in 1..6 {
                for factor in 2..4 {
                    let coarse = TimeGrid::uniform(0.0, horizon, base).unwrap();
                    let fine = TimeGrid::uniform(0.0, horizon, base * factor).unwrap();
                    let finer = TimeGrid::uniform(0.0, horizon, base * factor * factor).unwrap();
                    assert!(coarse.is_nested_in(&fine), "T={horizon} base={base} f={factor}");
                    assert!(fine.is_nested_in(&finer));
                }
            }
        }
    }

    #[test]
    fn interval_index_is_left_closed() {
        let g = half_grid();
        assert_eq!(g.interval_index(0.0).unwrap(), 0);
        assert_eq!(g.interval_index(0.49).unwrap(), 0);
        assert_eq!(g.interval_index(0.5).unwrap(), 1);
        assert_eq!(g.interval_index(1.0).unwrap(), 2);
    }

    proptest! {
        #[test]
        fn anticipation_gap_is_within_mesh(n in 1usize..200, horizon in 0.1f64..10.0, u in 0.0f64..=1.0) {
            let g = TimeGrid::uniform(0.0, horizon, n).unwrap();
            let t = horizon * u;
            let theta = anticipate(&g, t).unwrap();
            prop_assert!(theta >= t);
            prop_assert!(theta - t <= g.mesh());
        }
    }
}
