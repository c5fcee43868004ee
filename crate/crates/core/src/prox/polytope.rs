//! Convex polytopes given as finite intersections of half-spaces.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Iterate displacement below which the cyclic projection scheme stops.
pub const DYKSTRA_TOL: f64 = 1e-12;
/// Sweep budget of the cyclic projection scheme.
pub const DYKSTRA_MAX_SWEEPS: usize = 100_000;

/// The closed half-space `{x : <normal, x> <= offset}` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    normal: Vector,
    offset: f64,
}

impl HalfSpace {
    /// Normalizes `(normal, offset)` unless the normal already has unit norm
    /// within `1e-12`, which keeps construction idempotent.
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::InvalidSet("half-space offset must be finite".into()));
        }
        let len = normal.norm();
        if len == 0.0 {
            return Err(Error::InvalidSet("half-space normal is zero".into()));
        }
        if (len - 1.0).abs() <= 1e-12 {
            return Ok(HalfSpace { normal, offset });
        }
        Ok(HalfSpace {
            normal: normal.scale(1.0 / len),
            offset: offset / len,
        })
    }

    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.dim()
    }

    /// Signed violation `<a, y> - b`.
    pub fn defect(&self, y: &Vector) -> f64 {
        self.normal.dot(y) - self.offset
    }

    pub fn project(&self, y: &Vector) -> Vector {
        let excess = self.defect(y);
        if excess <= 0.0 {
            y.clone()
        } else {
            y.axpy(-excess, &self.normal)
        }
    }

    pub fn translated(&self, u: &Vector) -> HalfSpace {
        HalfSpace {
            normal: self.normal.clone(),
            offset: self.offset + self.normal.dot(u),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    faces: Vec<HalfSpace>,
    interior: Vector,
}

impl Polytope {
    pub fn new(faces: Vec<HalfSpace>) -> Result<Self> {
        let first = faces
            .first()
            .ok_or_else(|| Error::InvalidSet("polytope needs at least one face".into()))?;
        let dim = first.dim();
        for f in &faces {
            f.normal.check_dim(dim)?;
        }
        let scale = 1.0 + faces.iter().map(|f| f.offset.abs()).fold(0.0, f64::max);
        let shrink = 1e-6 * scale;
        let shrunk: Vec<HalfSpace> = faces
            .iter()
            .map(|f| HalfSpace {
                normal: f.normal.clone(),
                offset: f.offset - shrink,
            })
            .collect();
        let interior = dykstra(&shrunk, &Vector::zeros(dim), DYKSTRA_MAX_SWEEPS)
            .map_err(|_| Error::InvalidSet("polytope is empty or has empty interior".into()))?;
        let polytope = Polytope { faces, interior };
        if polytope.defect(&polytope.interior) >= 0.0 {
            return Err(Error::InvalidSet(
                "polytope is empty or has empty interior".into(),
            ));
        }
        Ok(polytope)
    }

    pub fn faces(&self) -> &[HalfSpace] {
        &self.faces
    }

    pub fn interior_point(&self) -> &Vector {
        &self.interior
    }

    pub fn dim(&self) -> usize {
        self.faces[0].dim()
    }

    pub fn defect(&self, y: &Vector) -> f64 {
        self.faces
            .iter()
            .map(|f| f.defect(y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn translated(&self, u: &Vector) -> Polytope {
        Polytope {
            faces: self.faces.iter().map(|f| f.translated(u)).collect(),
            interior: &self.interior + u,
        }
    }

    /// Euclidean projection: cyclic projections with Dykstra corrections,
    /// then an exact solve on the detected active faces when it is consistent.
    pub fn project(&self, y: &Vector) -> Result<Vector> {
        if self.defect(y) <= 0.0 {
            return Ok(y.clone());
        }
        let x = dykstra(&self.faces, y, DYKSTRA_MAX_SWEEPS)?;
        Ok(polish(&self.faces, y, &x).unwrap_or(x))
    }

    /// Vertices when the polytope is bounded; `None` when unbounded or when
    /// the enumeration would be too large.
    pub fn vertices(&self) -> Option<Vec<Vector>> {
        let dim = self.dim();
        const FRAME: f64 = 1e6;
        let mut rows: Vec<(DVector<f64>, f64, bool)> = self
            .faces
            .iter()
            .map(|f| (f.normal.as_dvector().clone(), f.offset, false))
            .collect();
        for i in 0..dim {
            let mut e = DVector::zeros(dim);
            e[i] = 1.0;
            rows.push((e.clone(), FRAME, true));
            rows.push((-e, FRAME, true));
        }
        if dim > 6 || binomial(rows.len(), dim) > 200_000 {
            return None;
        }
        let mut out: Vec<Vector> = Vec::new();
        let mut bounded = true;
        for_each_combination(rows.len(), dim, &mut |idx| {
            let a = DMatrix::from_fn(dim, dim, |r, c| rows[idx[r]].0[c]);
            let b = DVector::from_fn(dim, |r, _| rows[idx[r]].1);
            let Some(sol) = a.lu().solve(&b) else {
                return;
            };
            if sol.iter().any(|v| !v.is_finite()) {
                return;
            }
            let v = Vector::from_dvector(sol);
            let tol = 1e-9 * (1.0 + v.max_abs());
            if rows.iter().any(|(n, o, _)| n.dot(v.as_dvector()) - o > tol) {
                return;
            }
            if idx.iter().any(|&k| rows[k].2) {
                bounded = false;
                return;
            }
            if !out.iter().any(|w| w.dist(&v) <= 1e-9 * (1.0 + v.norm())) {
                out.push(v);
            }
        });
        if bounded && !out.is_empty() {
            Some(out)
        } else {
            None
        }
    }
}

/// Cyclic projections onto `faces` with Dykstra correction vectors.
pub fn dykstra(faces: &[HalfSpace], y: &Vector, max_sweeps: usize) -> Result<Vector> {
    let mut x = y.clone();
    let mut corrections: Vec<Vector> = vec![Vector::zeros(y.dim()); faces.len()];
    for _ in 0..max_sweeps {
        let start = x.clone();
        for (face, corr) in faces.iter().zip(corrections.iter_mut()) {
            let shifted = &x + corr;
            let next = face.project(&shifted);
            *corr = &shifted - &next;
            x = next;
        }
        let feasible = faces.iter().all(|f| f.defect(&x) <= 1e-10);
        if feasible && x.dist(&start) <= DYKSTRA_TOL * (1.0 + x.max_abs()) {
            return Ok(x);
        }
    }
    Err(Error::DidNotConverge {
        sweeps: max_sweeps,
    })
}

/// Exact projection onto the affine hull of the faces active at `approx`,
/// accepted only if it satisfies the KKT conditions.
fn polish(faces: &[HalfSpace], y: &Vector, approx: &Vector) -> Option<Vector> {
    let scale = 1.0 + approx.max_abs();
    let active: Vec<&HalfSpace> = faces
        .iter()
        .filter(|f| f.defect(approx) > -1e-9 * scale)
        .collect();
    if active.is_empty() || active.len() > y.dim() {
        return None;
    }
    let m = active.len();
    let dim = y.dim();
    let a = DMatrix::from_fn(m, dim, |r, c| active[r].normal[c]);
    let rhs = DVector::from_fn(m, |r, _| active[r].defect(y));
    let gram = &a * a.transpose();
    let lambda = gram.lu().solve(&rhs)?;
    if lambda.iter().any(|l| !l.is_finite() || *l < -1e-12) {
        return None;
    }
    let p = Vector::from_dvector(y.as_dvector() - a.transpose() * lambda);
    let feasible = faces.iter().all(|f| f.defect(&p) <= 1e-12 * scale);
    if feasible && p.dist(approx) <= 1e-6 * scale {
        Some(p)
    } else {
        None
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn for_each_combination(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, buf: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if buf.len() == k {
            f(buf);
            return;
        }
        for i in start..n {
            if n - i < k - buf.len() {
                break;
            }
            buf.push(i);
            rec(i + 1, n, k, buf, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(k);
    rec(0, n, k, &mut buf, f);
}
