use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MovingFamily;
use crate::error::{Error, Result};
use crate::vector::Vector;

/// `B_ρ(w) ⊆ C(t)` checked for `t ∈ [valid_from, valid_to]`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerBallCert {
    pub w: Vector,
    pub rho: f64,
    pub valid_from: f64,
    pub valid_to: f64,
}

/// Seeded points on the sphere of radius `rho` about `w`, always including
/// the `2n` axis poles.
pub fn sphere_points(w: &Vector, rho: f64, count: usize, seed: u64) -> Vec<Vector> {
    let n = w.dim();
    let mut out = Vec::with_capacity(count.max(2 * n));
    for i in 0..n {
        for s in [1.0, -1.0] {
            out.push(w.axpy(s * rho, &Vector::unit(n, i)));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let d = Vector::new(c).expect("finite");
        let len = d.norm();
        if len > 1e-3 && len <= 1.0 {
            out.push(w.axpy(rho / len, &d));
        }
    }
    out
}

/// Checks `B_ρ(w) ⊆ C(t)` on `times` evenly spaced instants of
/// `[from, to]` using `points` sphere samples (plus the center) per instant.
/// The containment tolerance is that of the slices.
pub fn certify_inner_ball(
    family: &MovingFamily,
    w: &Vector,
    rho: f64,
    from: f64,
    to: f64,
    points: usize,
    times: usize,
    seed: u64,
) -> Result<InnerBallCert> {
    w.check_dim(family.dim())?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InapplicableBound(format!("inner ball radius must be positive, got {rho}")));
    }
    if !(0.0 <= from && from <= to && to <= family.horizon()) {
        return Err(Error::OutOfRange {
            t: to,
            from: 0.0,
            to: family.horizon(),
        });
    }
    let mut probe = sphere_points(w, rho, points, seed);
    probe.push(w.clone());
    let times = times.max(2);
    for k in 0..times {
        let t = if k + 1 == times {
            to
        } else {
            from + (to - from) * (k as f64 / (times - 1) as f64)
        };
        let set = family.slice(t)?;
        for p in &probe {
            if !set.contains(p)? {
                return Err(Error::InnerBallViolated {
                    t,
                    distance: set.distance(p)?,
                });
            }
        }
    }
    Ok(InnerBallCert {
        w: w.clone(),
        rho,
        valid_from: from,
        valid_to: to,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{compute_tau, FamilyKind, LinearPath, ScalarPath};

    fn shrinking() -> MovingFamily {
        MovingFamily::new(
            FamilyKind::RadiusSchedule {
                center: LinearPath::constant(Vector::zeros(2)),
                radius: ScalarPath { value: 1.0, rate: -0.4 },
                complement: false,
            },
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn sphere_points_lie_on_the_sphere() {
        let w = Vector::from_slice(&[1.0, -2.0, 0.5]);
        let pts = sphere_points(&w, 0.3, 40, 9);
        assert_eq!(pts.len(), 40);
        assert!(pts.iter().all(|p| (p.dist(&w) - 0.3).abs() < 1e-12));
    }

    #[test]
    fn persistence_over_tau() {
        let fam = shrinking();
        let omega = fam.analytic_modulus().unwrap();
        let (rho0, rho) = (1.0, 0.5);
        let tau = compute_tau(omega, fam.r().min(1e9), rho0, rho, fam.horizon()).unwrap();
        assert!(tau > 0.0);
        let cert = certify_inner_ball(&fam, &Vector::zeros(2), rho, 0.0, tau.min(1.0), 100, 50, 1).unwrap();
        assert_eq!(cert.valid_to, tau.min(1.0));
    }

    #[test]
    fn too_large_ball_is_rejected() {
        let fam = shrinking();
        let err = certify_inner_ball(&fam, &Vector::zeros(2), 0.7, 0.0, 1.0, 20, 10, 1).unwrap_err();
        assert!(matches!(err, Error::InnerBallViolated { t, .. } if t > 0.7));
    }
}
