//! Moving sets `t ↦ C(t)` on a horizon `[0, T]`.

mod excess;
mod inner_ball;
mod modulus;

pub use excess::{analytic_excess, excess, excess_with_hints, ExcessEstimate, ExcessMethod, SamplingParams};
pub use inner_ball::{certify_inner_ball, InnerBallCert};
pub use modulus::{compute_tau, estimate_modulus, Modulus, TAU_MARGIN};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::prox::{rotation_2d, ProxSet};
use crate::vector::Vector;

/// Excess tolerance under which a breakpoint counts as a pure expansion.
pub const JUMP_TOL: f64 = 1e-9;

/// `t ↦ origin + t * velocity`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPath {
    pub origin: Vector,
    pub velocity: Vector,
}

impl LinearPath {
    pub fn new(origin: Vector, velocity: Vector) -> Result<Self> {
        velocity.check_dim(origin.dim())?;
        Ok(LinearPath { origin, velocity })
    }

    pub fn constant(origin: Vector) -> Self {
        let dim = origin.dim();
        LinearPath {
            origin,
            velocity: Vector::zeros(dim),
        }
    }

    pub fn at(&self, t: f64) -> Vector {
        self.origin.axpy(t, &self.velocity)
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }
}

/// `t ↦ value + t * rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarPath {
    pub value: f64,
    pub rate: f64,
}

impl ScalarPath {
    pub fn at(&self, t: f64) -> f64 {
        self.value + t * self.rate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RotationPath {
    /// Planar rotation by `angle(t)` radians; dimension 2 only.
    Planar { angle: ScalarPath },
    /// A constant orthogonal matrix.
    Fixed(DMatrix<f64>),
}

impl RotationPath {
    fn at(&self, t: f64) -> DMatrix<f64> {
        match self {
            RotationPath::Planar { angle } => rotation_2d(angle.at(t)),
            RotationPath::Fixed(m) => m.clone(),
        }
    }

    fn angular_rate(&self) -> f64 {
        match self {
            RotationPath::Planar { angle } => angle.rate.abs(),
            RotationPath::Fixed(_) => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub family: MovingFamily,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    Translate {
        base: ProxSet,
        path: LinearPath,
    },
    Rigid {
        base: ProxSet,
        rotation: RotationPath,
        translation: LinearPath,
    },
    /// Balls (or ball complements) with moving center and linear radius.
    RadiusSchedule {
        center: LinearPath,
        radius: ScalarPath,
        complement: bool,
    },
    /// Consecutive pieces; at an interior breakpoint the later piece applies.
    Piecewise { pieces: Vec<Piece> },
}

/// One interior breakpoint of a piecewise family.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoint {
    pub time: f64,
    /// `e(C(t*-), C(t*))`.
    pub jump_excess: f64,
    /// The jump excess is exact rather than a sampled lower bound.
    pub certified: bool,
    /// The jump only expands the set: `jump_excess <= JUMP_TOL`.
    pub admissible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovingFamily {
    kind: FamilyKind,
    horizon: f64,
    dim: usize,
    r: f64,
    breakpoints: Vec<Breakpoint>,
    modulus: Option<Modulus>,
}

impl MovingFamily {
    pub fn new(kind: FamilyKind, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::InvalidFamily(format!("horizon must be >= 0, got {horizon}")));
        }
        let (dim, r) = match &kind {
            FamilyKind::Translate { base, path } => {
                path.origin.check_dim(base.dim())?;
                (base.dim(), base.r())
            }
            FamilyKind::Rigid {
                base,
                rotation,
                translation,
            } => {
                translation.origin.check_dim(base.dim())?;
                match rotation {
                    RotationPath::Planar { .. } if base.dim() != 2 => {
                        return Err(Error::InvalidFamily(
                            "angle rotation paths need dimension 2".into(),
                        ))
                    }
                    // otherwise validated through a probe slice below
                    RotationPath::Fixed(m) if m.nrows() != base.dim() => {
                        return Err(Error::DimensionMismatch {
                            expected: base.dim(),
                            actual: m.nrows(),
                        });
                    }
                    _ => {}
                }
                (base.dim(), base.r())
            }
            FamilyKind::RadiusSchedule {
                center,
                radius,
                complement,
            } => {
                let smallest = radius.at(0.0).min(radius.at(horizon));
                if !(smallest > 0.0) || !smallest.is_finite() {
                    return Err(Error::InvalidFamily(format!(
                        "radius must stay positive on [0, {horizon}], reaches {smallest}"
                    )));
                }
                let r = if *complement { smallest } else { f64::INFINITY };
                (center.origin.dim(), r)
            }
            FamilyKind::Piecewise { pieces } => {
                let first = pieces
                    .first()
                    .ok_or_else(|| Error::InvalidFamily("piecewise family without pieces".into()))?;
                if first.start != 0.0 {
                    return Err(Error::InvalidFamily("first piece must start at 0".into()));
                }
                let last = &pieces[pieces.len() - 1];
                if last.end != horizon {
                    return Err(Error::InvalidFamily(format!(
                        "last piece must end at the horizon {horizon}"
                    )));
                }
                for w in pieces.windows(2) {
                    if w[0].end != w[1].start {
                        return Err(Error::InvalidFamily(format!(
                            "pieces must be contiguous: {} then {}",
                            w[0].end, w[1].start
                        )));
                    }
                }
                let dim = first.family.dim();
                let mut r = f64::INFINITY;
                for p in pieces {
                    if !(p.end > p.start) {
                        return Err(Error::InvalidFamily(format!(
                            "empty piece [{}, {}]",
                            p.start, p.end
                        )));
                    }
                    if p.family.horizon < p.end {
                        return Err(Error::InvalidFamily(format!(
                            "piece family horizon {} ends before {}",
                            p.family.horizon, p.end
                        )));
                    }
                    if p.family.dim() != dim {
                        return Err(Error::DimensionMismatch {
                            expected: dim,
                            actual: p.family.dim(),
                        });
                    }
                    r = r.min(p.family.r);
                }
                (dim, r)
            }
        };
        let mut family = MovingFamily {
            kind,
            horizon,
            dim,
            r,
            breakpoints: Vec::new(),
            modulus: None,
        };
        // Probe slices validate every shape the family can produce.
        family.slice(0.0)?;
        family.slice(horizon)?;
        family.breakpoints = family.compute_breakpoints()?;
        family.modulus = family.compute_modulus();
        Ok(family)
    }

    /// `C(t) ≡ set` on `[0, horizon]`.
    pub fn fixed(set: ProxSet, horizon: f64) -> Result<Self> {
        let path = LinearPath::constant(Vector::zeros(set.dim()));
        Self::new(FamilyKind::Translate { base: set, path }, horizon)
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Uniform prox-regularity radius over `[0, T]`.
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    /// Whether every breakpoint only expands the set.
    pub fn jumps_admissible(&self) -> bool {
        self.breakpoints.iter().all(|b| b.admissible)
    }

    /// Certified upper bound on `ω(δ)` when the family's form provides one.
    pub fn analytic_modulus(&self) -> Option<&Modulus> {
        self.modulus.as_ref()
    }

    /// The set `C(t)`.
    pub fn slice(&self, t: f64) -> Result<ProxSet> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutOfRange {
                t,
                from: 0.0,
                to: self.horizon,
            });
        }
        match &self.kind {
            FamilyKind::Translate { base, path } => base.translated(&path.at(t)),
            FamilyKind::Rigid {
                base,
                rotation,
                translation,
            } => ProxSet::rigid_image(base.clone(), rotation.at(t), translation.at(t)),
            FamilyKind::RadiusSchedule {
                center,
                radius,
                complement,
            } => {
                if *complement {
                    ProxSet::ball_complement(center.at(t), radius.at(t))
                } else {
                    ProxSet::ball(center.at(t), radius.at(t))
                }
            }
            FamilyKind::Piecewise { pieces } => {
                let k = pieces.partition_point(|p| p.start <= t).saturating_sub(1);
                pieces[k].family.slice(t)
            }
        }
    }

    /// The pieces' left limit at a breakpoint: the earlier piece evaluated there.
    fn left_slice(&self, k: usize) -> Result<ProxSet> {
        let FamilyKind::Piecewise { pieces } = &self.kind else {
            unreachable!("breakpoints exist only for piecewise families");
        };
        pieces[k - 1].family.slice(pieces[k].start)
    }

    fn compute_breakpoints(&self) -> Result<Vec<Breakpoint>> {
        let FamilyKind::Piecewise { pieces } = &self.kind else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (k, piece) in pieces.iter().enumerate().skip(1) {
            let time = piece.start;
            let left = self.left_slice(k)?;
            let right = piece.family.slice(time)?;
            let est = excess(&left, &right, &SamplingParams::default())?;
            out.push(Breakpoint {
                time,
                jump_excess: est.lower,
                certified: est.method == ExcessMethod::Analytic,
                admissible: est.lower <= JUMP_TOL,
            });
        }
        // Breakpoints of nested piecewise families.
        for p in pieces {
            for b in &p.family.breakpoints {
                if b.time > p.start && b.time < p.end {
                    out.push(b.clone());
                }
            }
        }
        out.sort_by(|a, b| a.time.total_cmp(&b.time));
        Ok(out)
    }

    fn compute_modulus(&self) -> Option<Modulus> {
        match &self.kind {
            FamilyKind::Translate { path, .. } => Some(Modulus::lipschitz(path.speed(), 0.0)),
            FamilyKind::Rigid {
                base,
                rotation,
                translation,
            } => {
                let spin = rotation.angular_rate();
                if spin == 0.0 {
                    return Some(Modulus::lipschitz(translation.speed(), 0.0));
                }
                // |(Q(s) - Q(t)) k| <= |angle(s) - angle(t)| |k|
                let extent = base.bounding_radius()?;
                Some(Modulus::lipschitz(spin * extent + translation.speed(), 0.0))
            }
            FamilyKind::RadiusSchedule {
                center,
                radius,
                complement,
            } => {
                let growth = if *complement {
                    radius.rate.max(0.0)
                } else {
                    (-radius.rate).max(0.0)
                };
                Some(Modulus::lipschitz(center.speed() + growth, 0.0))
            }
            FamilyKind::Piecewise { pieces } => {
                let mut rate = 0.0_f64;
                let mut offset = 0.0_f64;
                for p in pieces {
                    let Some(Modulus::Lipschitz { rate: r, offset: o }) = p.family.analytic_modulus() else {
                        return None;
                    };
                    rate = rate.max(*r);
                    offset = offset.max(*o);
                }
                for b in &self.breakpoints {
                    if !b.certified {
                        return None;
                    }
                    offset += b.jump_excess;
                }
                Some(Modulus::lipschitz(rate, offset))
            }
        }
    }
}
