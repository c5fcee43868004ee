use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ProxSet;
use crate::error::{Error, Result};
use crate::vector::Vector;

/// Rejection-sampling budget before giving up on a region.
const MAX_ATTEMPTS: usize = 1_000_000;

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    lo: Vector,
    hi: Vector,
}

impl Region {
    pub fn new(lo: Vector, hi: Vector) -> Result<Self> {
        hi.check_dim(lo.dim())?;
        if lo.coords().iter().zip(hi.coords()).any(|(l, h)| l > h) {
            return Err(Error::InvalidSet("region needs lo <= hi".into()));
        }
        Ok(Region { lo, hi })
    }

    /// The cube of half-width `half` around `center`.
    pub fn around(center: &Vector, half: f64) -> Self {
        let h = Vector::from_slice(&vec![half.abs(); center.dim()]);
        Region {
            lo: center - &h,
            hi: center + &h,
        }
    }

    pub fn lo(&self) -> &Vector {
        &self.lo
    }

    pub fn hi(&self) -> &Vector {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn contains(&self, y: &Vector) -> bool {
        y.coords()
            .iter()
            .zip(self.lo.coords().iter().zip(self.hi.coords()))
            .all(|(v, (l, h))| *v >= *l && *v <= *h)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vector {
        let coords = self
            .lo
            .coords()
            .iter()
            .zip(self.hi.coords())
            .map(|(l, h)| if l < h { rng.gen_range(*l..=*h) } else { *l })
            .collect();
        Vector::new(coords).expect("finite region")
    }
}

/// Seeded points of `set` inside `region`.
///
/// About a quarter of the points are projections of rejected samples, so the
/// boundary is represented; the rest are accepted interior samples. Falls
/// back to whichever kind is available once the other dries up.
pub fn sample_points(set: &ProxSet, region: &Region, count: usize, seed: u64) -> Result<Vec<Vector>> {
    region.lo.check_dim(set.dim())?;
    if count == 0 {
        return Err(Error::InvalidSet("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boundary_quota = count / 4;
    let interior_quota = count - boundary_quota;
    let mut interior = Vec::with_capacity(interior_quota);
    let mut boundary = Vec::with_capacity(boundary_quota);
    let mut attempts = 0;
    while interior.len() + boundary.len() < count && attempts < MAX_ATTEMPTS {
        attempts += 1;
        let y = region.sample(&mut rng);
        if set.contains(&y)? {
            if interior.len() < interior_quota || boundary.len() >= boundary_quota {
                interior.push(y);
            } else if boundary.len() < boundary_quota {
                boundary.push(y);
            }
            continue;
        }
        if boundary.len() >= boundary_quota && interior.len() < interior_quota && !interior.is_empty() {
            continue;
        }
        let Ok(p) = set.project(&y) else { continue };
        if region.contains(&p) && set.contains(&p)? {
            if boundary.len() < boundary_quota {
                boundary.push(p);
            } else {
                interior.push(p);
            }
        }
    }
    if interior.is_empty() && boundary.is_empty() {
        return Err(Error::EmptyIntersection { attempts });
    }
    interior.extend(boundary);
    // Exhausted attempts with a partial sample: recycle deterministically.
    let have = interior.len();
    let mut k = 0;
    while interior.len() < count {
        interior.push(interior[k % have].clone());
        k += 1;
    }
    Ok(interior)
}
