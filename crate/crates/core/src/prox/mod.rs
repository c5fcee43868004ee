//! Static prox-regular set primitives.
//!
//! Every set is closed and nonempty and carries its prox-regularity radius
//! `r` (`f64::INFINITY` for convex shapes). Projections are single-valued on
//! the open tube `{y : d(y, K) < r}`.

mod polytope;
mod sample;

pub use polytope::{dykstra, HalfSpace, Polytope, DYKSTRA_MAX_SWEEPS, DYKSTRA_TOL};
pub use sample::{sample_points, Region};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::vector::Vector;

/// Absolute tolerance on the defining inequalities of every shape.
pub const CONTAINMENT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    HalfSpace(HalfSpace),
    Ball { center: Vector, radius: f64 },
    AxisBox { lo: Vector, hi: Vector },
    Polytope(Polytope),
    /// Closure of the complement of an open ball.
    BallComplement { center: Vector, radius: f64 },
    /// `rotation * base + translation`, `rotation` orthogonal.
    RigidImage {
        base: Box<ProxSet>,
        rotation: DMatrix<f64>,
        translation: Vector,
    },
}

/// A closed, nonempty, prox-regular subset of ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct ProxSet {
    shape: Shape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalResidualReport {
    /// Max over samples of `<n, z - x> - |n| / (2r) |z - x|^2`.
    pub worst_residual: f64,
    pub worst_witness: Vector,
    pub samples: usize,
}

impl ProxSet {
    pub fn half_space(normal: Vector, offset: f64) -> Result<Self> {
        Ok(ProxSet {
            shape: Shape::HalfSpace(HalfSpace::new(normal, offset)?),
        })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        Self::from_shape(Shape::Ball { center, radius })
    }

    pub fn axis_box(lo: Vector, hi: Vector) -> Result<Self> {
        Self::from_shape(Shape::AxisBox { lo, hi })
    }

    pub fn polytope(faces: Vec<HalfSpace>) -> Result<Self> {
        Ok(ProxSet {
            shape: Shape::Polytope(Polytope::new(faces)?),
        })
    }

    pub fn ball_complement(center: Vector, radius: f64) -> Result<Self> {
        Self::from_shape(Shape::BallComplement { center, radius })
    }

    pub fn rigid_image(base: ProxSet, rotation: DMatrix<f64>, translation: Vector) -> Result<Self> {
        Self::from_shape(Shape::RigidImage {
            base: Box::new(base),
            rotation,
            translation,
        })
    }

    /// Validates a raw shape.
    pub fn from_shape(shape: Shape) -> Result<Self> {
        match &shape {
            Shape::HalfSpace(h) => {
                if (h.normal().norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidSet("half-space normal must be a unit vector".into()));
                }
            }
            Shape::Ball { radius, .. } | Shape::BallComplement { radius, .. } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidSet(format!("radius must be positive, got {radius}")));
                }
            }
            Shape::AxisBox { lo, hi } => {
                hi.check_dim(lo.dim())?;
                if lo.coords().iter().zip(hi.coords()).any(|(l, h)| l > h) {
                    return Err(Error::InvalidSet("box needs lo <= hi in every coordinate".into()));
                }
            }
            Shape::Polytope(_) => {}
            Shape::RigidImage {
                base,
                rotation,
                translation,
            } => {
                let n = base.dim();
                translation.check_dim(n)?;
                if rotation.nrows() != n || rotation.ncols() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        actual: rotation.nrows(),
                    });
                }
                let gram = rotation.tr_mul(rotation) - DMatrix::<f64>::identity(n, n);
                if gram.iter().any(|v| !v.is_finite()) || gram.amax() > 1e-10 {
                    return Err(Error::InvalidSet("rotation is not orthogonal".into()));
                }
            }
        }
        Ok(ProxSet { shape })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            Shape::HalfSpace(h) => h.dim(),
            Shape::Ball { center, .. } | Shape::BallComplement { center, .. } => center.dim(),
            Shape::AxisBox { lo, .. } => lo.dim(),
            Shape::Polytope(p) => p.dim(),
            Shape::RigidImage { base, .. } => base.dim(),
        }
    }

    /// Prox-regularity radius; infinite for convex shapes.
    pub fn r(&self) -> f64 {
        match &self.shape {
            Shape::BallComplement { radius, .. } => *radius,
            Shape::RigidImage { base, .. } => base.r(),
            _ => f64::INFINITY,
        }
    }

    pub fn is_convex(&self) -> bool {
        self.r().is_infinite()
    }

    pub fn is_bounded(&self) -> bool {
        match &self.shape {
            Shape::Ball { .. } | Shape::AxisBox { .. } => true,
            Shape::Polytope(p) => p.vertices().is_some(),
            Shape::HalfSpace(_) | Shape::BallComplement { .. } => false,
            Shape::RigidImage { base, .. } => base.is_bounded(),
        }
    }

    /// `sup { |x| : x in K }` for bounded sets.
    pub fn bounding_radius(&self) -> Option<f64> {
        match &self.shape {
            Shape::Ball { center, radius } => Some(center.norm() + radius),
            Shape::AxisBox { lo, hi } => {
                let sq: f64 = lo
                    .coords()
                    .iter()
                    .zip(hi.coords())
                    .map(|(l, h)| l.abs().max(h.abs()).powi(2))
                    .sum();
                Some(sq.sqrt())
            }
            Shape::Polytope(p) => p
                .vertices()
                .map(|vs| vs.iter().map(Vector::norm).fold(0.0, f64::max)),
            Shape::HalfSpace(_) | Shape::BallComplement { .. } => None,
            Shape::RigidImage {
                base, translation, ..
            } => base.bounding_radius().map(|b| b + translation.norm()),
        }
    }

    /// Some point of the set.
    pub fn reference_point(&self) -> Vector {
        match &self.shape {
            Shape::HalfSpace(h) => h.normal().scale(h.offset()),
            Shape::Ball { center, .. } => center.clone(),
            Shape::AxisBox { lo, hi } => (lo + hi).scale(0.5),
            Shape::Polytope(p) => p.interior_point().clone(),
            Shape::BallComplement { center, radius } => {
                center.axpy(*radius, &Vector::unit(center.dim(), 0))
            }
            Shape::RigidImage {
                base,
                rotation,
                translation,
            } => &base.reference_point().transform(rotation) + translation,
        }
    }

    /// Violation of the defining inequalities; nonpositive exactly on the set.
    pub fn defect(&self, y: &Vector) -> Result<f64> {
        y.check_dim(self.dim())?;
        Ok(self.raw_defect(y))
    }

    fn raw_defect(&self, y: &Vector) -> f64 {
        match &self.shape {
            Shape::HalfSpace(h) => h.defect(y),
            Shape::Ball { center, radius } => y.dist(center) - radius,
            Shape::AxisBox { lo, hi } => y
                .coords()
                .iter()
                .zip(lo.coords().iter().zip(hi.coords()))
                .map(|(v, (l, h))| (l - v).max(v - h))
                .fold(f64::NEG_INFINITY, f64::max),
            Shape::Polytope(p) => p.defect(y),
            Shape::BallComplement { center, radius } => radius - y.dist(center),
            Shape::RigidImage {
                base,
                rotation,
                translation,
            } => base.raw_defect(&(y - translation).transform_transposed(rotation)),
        }
    }

    /// Membership up to `CONTAINMENT_TOL`.
    pub fn contains(&self, y: &Vector) -> Result<bool> {
        Ok(self.defect(y)? <= CONTAINMENT_TOL)
    }

    /// `d_K(y)`, snapped to zero on members.
    pub fn distance(&self, y: &Vector) -> Result<f64> {
        y.check_dim(self.dim())?;
        self.raw_distance(y)
    }

    fn raw_distance(&self, y: &Vector) -> Result<f64> {
        if self.raw_defect(y) <= CONTAINMENT_TOL {
            return Ok(0.0);
        }
        let d = match &self.shape {
            Shape::HalfSpace(h) => h.defect(y).max(0.0),
            Shape::Ball { center, radius } => (y.dist(center) - radius).max(0.0),
            Shape::AxisBox { lo, hi } => y
                .coords()
                .iter()
                .zip(lo.coords().iter().zip(hi.coords()))
                .map(|(v, (l, h))| (l - v).max(v - h).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt(),
            Shape::Polytope(p) => p.project(y)?.dist(y),
            Shape::BallComplement { center, radius } => (radius - y.dist(center)).max(0.0),
            Shape::RigidImage {
                base,
                rotation,
                translation,
            } => base.raw_distance(&(y - translation).transform_transposed(rotation))?,
        };
        Ok(d)
    }

    /// The unique nearest point of the set to `y`, defined when `d_K(y) < r`.
    pub fn project(&self, y: &Vector) -> Result<Vector> {
        y.check_dim(self.dim())?;
        if self.raw_defect(y) <= CONTAINMENT_TOL {
            return Ok(y.clone());
        }
        self.raw_project(y)
    }

    fn raw_project(&self, y: &Vector) -> Result<Vector> {
        match &self.shape {
            Shape::HalfSpace(h) => Ok(h.project(y)),
            Shape::Ball { center, radius } => {
                let offset = y - center;
                let len = offset.norm();
                if len <= *radius {
                    Ok(y.clone())
                } else {
                    Ok(center.axpy(radius / len, &offset))
                }
            }
            Shape::AxisBox { lo, hi } => {
                let coords = y
                    .coords()
                    .iter()
                    .zip(lo.coords().iter().zip(hi.coords()))
                    .map(|(v, (l, h))| v.clamp(*l, *h))
                    .collect();
                Vector::new(coords)
            }
            Shape::Polytope(p) => p.project(y),
            Shape::BallComplement { center, radius } => {
                let offset = y - center;
                let len = offset.norm();
                if len == 0.0 {
                    return Err(Error::AtSingularity);
                }
                if len >= *radius {
                    return Ok(y.clone());
                }
                let d = radius - len;
                if d >= *radius {
                    return Err(Error::OutsideTube { distance: d, r: *radius });
                }
                Ok(center.axpy(radius / len, &offset))
            }
            Shape::RigidImage {
                base,
                rotation,
                translation,
            } => {
                let local = (y - translation).transform_transposed(rotation);
                if base.raw_defect(&local) <= CONTAINMENT_TOL {
                    return Ok(y.clone());
                }
                Ok(&base.raw_project(&local)?.transform(rotation) + translation)
            }
        }
    }

    /// `K + u`.
    pub fn translated(&self, u: &Vector) -> Result<ProxSet> {
        u.check_dim(self.dim())?;
        let shape = match &self.shape {
            Shape::HalfSpace(h) => Shape::HalfSpace(h.translated(u)),
            Shape::Ball { center, radius } => Shape::Ball {
                center: center + u,
                radius: *radius,
            },
            Shape::AxisBox { lo, hi } => Shape::AxisBox {
                lo: lo + u,
                hi: hi + u,
            },
            Shape::Polytope(p) => Shape::Polytope(p.translated(u)),
            Shape::BallComplement { center, radius } => Shape::BallComplement {
                center: center + u,
                radius: *radius,
            },
            Shape::RigidImage {
                base,
                rotation,
                translation,
            } => Shape::RigidImage {
                base: base.clone(),
                rotation: rotation.clone(),
                translation: translation + u,
            },
        };
        Ok(ProxSet { shape })
    }

    /// Hypo-monotonicity defect of `n` at `x` against the sample points.
    ///
    /// Convex shapes use `<n, z - x>` without the curvature term. A
    /// nonpositive result is consistent with `n` being a proximal normal.
    pub fn normal_residual(
        &self,
        x: &Vector,
        n: &Vector,
        z_samples: &[Vector],
    ) -> Result<NormalResidualReport> {
        let defect = self.defect(x)?;
        if defect > CONTAINMENT_TOL {
            return Err(Error::NotAMember { defect });
        }
        n.check_dim(self.dim())?;
        let r = self.r();
        let n_norm = n.norm();
        let mut report = NormalResidualReport {
            worst_residual: 0.0,
            worst_witness: x.clone(),
            samples: z_samples.len(),
        };
        let mut first = true;
        for z in z_samples {
            z.check_dim(self.dim())?;
            let dz = z - x;
            let mut residual = n.dot(&dz);
            if r.is_finite() {
                residual -= n_norm / (2.0 * r) * dz.norm_squared();
            }
            if first || residual > report.worst_residual {
                report.worst_residual = residual;
                report.worst_witness = z.clone();
                first = false;
            }
        }
        Ok(report)
    }
}

/// Planar rotation by `angle` radians.
pub fn rotation_2d(angle: f64) -> DMatrix<f64> {
    let (s, c) = angle.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}
