//! The excess `e(A, B) = sup_{a in A} d(a, B)`.
//!
//! Exact for the pairs with a closed form; otherwise a sampled lower bound
//! refined by projected ascent on `d(., B)`.

use crate::error::Result;
use crate::prox::{sample_points, ProxSet, Region, Shape};
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExcessMethod {
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcessEstimate {
    /// Exact when `method` is analytic, otherwise a lower bound.
    pub lower: f64,
    pub witness: Vector,
    pub method: ExcessMethod,
    pub sample_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingParams {
    pub samples: usize,
    pub seed: u64,
    /// Where to draw points of `A`; derived from the sets when absent.
    pub region: Option<Region>,
    /// Projected ascent iterations per refined start point.
    pub ascent_steps: usize,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            samples: 2000,
            seed: 0x5eed,
            region: None,
            ascent_steps: 60,
        }
    }
}

pub fn excess(a: &ProxSet, b: &ProxSet, budget: &SamplingParams) -> Result<ExcessEstimate> {
    excess_with_hints(a, b, budget, &[])
}

/// Like [`excess`], with extra known members of `a` added to the sample.
pub fn excess_with_hints(
    a: &ProxSet,
    b: &ProxSet,
    budget: &SamplingParams,
    hints: &[Vector],
) -> Result<ExcessEstimate> {
    b.reference_point().check_dim(a.dim())?;
    if let Some((lower, witness)) = analytic_excess(a, b) {
        return Ok(ExcessEstimate {
            lower,
            witness,
            method: ExcessMethod::Analytic,
            sample_count: 0,
        });
    }
    sampled_excess(a, b, budget, hints)
}

/// Closed-form excess with a witness point of `a`, when one is available.
pub fn analytic_excess(a: &ProxSet, b: &ProxSet) -> Option<(f64, Vector)> {
    let dim = a.dim();
    if let (
        Shape::RigidImage {
            base: base_a,
            rotation: qa,
            translation: ua,
        },
        Shape::RigidImage {
            base: base_b,
            rotation: qb,
            translation: ub,
        },
    ) = (a.shape(), b.shape())
    {
        if qa == qb {
            // Pull both sets back through x ↦ Qᵀ(x - u_a).
            let shift = (ub - ua).transform_transposed(qa);
            let moved = base_b.translated(&shift).ok()?;
            let (value, w) = analytic_excess(base_a, &moved)?;
            return Some((value, &w.transform(qa) + ua));
        }
    }

    match (a.shape(), b.shape()) {
        (Shape::Ball { center: ca, radius: ra }, Shape::Ball { center: cb, radius: rb }) => {
            let dir = direction(&(ca - cb), dim);
            let value = (ca.dist(cb) + ra - rb).max(0.0);
            return Some((value, ca.axpy(*ra, &dir)));
        }
        (Shape::HalfSpace(ha), Shape::HalfSpace(hb)) => {
            let witness = ha.normal().scale(ha.offset());
            let cos = ha.normal().dot(hb.normal());
            if (cos - 1.0).abs() <= 1e-12 {
                return Some(((ha.offset() - hb.offset()).max(0.0), witness));
            }
            return Some((f64::INFINITY, witness));
        }
        (
            Shape::BallComplement { center: ca, radius: ra },
            Shape::BallComplement { center: cb, radius: rb },
        ) => {
            // Closest point of A to the center of B's hole.
            let gap = ca.dist(cb);
            let witness = if gap >= *ra {
                cb.clone()
            } else {
                ca.axpy(*ra, &direction(&(cb - ca), dim))
            };
            let value = (rb - (ra - gap).max(0.0)).max(0.0);
            return Some((value, witness));
        }
        (Shape::Ball { center: ca, radius: ra }, Shape::BallComplement { center: cb, radius: rb }) => {
            let gap = ca.dist(cb);
            let witness = if gap <= *ra {
                cb.clone()
            } else {
                ca.axpy(*ra, &direction(&(cb - ca), dim))
            };
            let value = (rb - (gap - ra).max(0.0)).max(0.0);
            return Some((value, witness));
        }
        (Shape::AxisBox { lo: la, hi: ha }, Shape::AxisBox { lo: lb, hi: hb }) => {
            // d(., B)^2 separates by coordinate and is convex in each one.
            let mut sq = 0.0;
            let mut w = Vec::with_capacity(dim);
            for i in 0..dim {
                let gap = |x: f64| (lb[i] - x).max(x - hb[i]).max(0.0);
                let (g_lo, g_hi) = (gap(la[i]), gap(ha[i]));
                if g_lo >= g_hi {
                    sq += g_lo * g_lo;
                    w.push(la[i]);
                } else {
                    sq += g_hi * g_hi;
                    w.push(ha[i]);
                }
            }
            return Some((sq.sqrt(), Vector::new(w).ok()?));
        }
        _ => {}
    }

    // A bounded, B a half-space: support function of A.
    if let Shape::HalfSpace(h) = b.shape() {
        if let Some((support, w)) = support(a, h.normal()) {
            return Some(((support - h.offset()).max(0.0), w));
        }
    }

    // Unbounded A against bounded B.
    if !a.is_bounded() && b.is_bounded() {
        return Some((f64::INFINITY, a.reference_point()));
    }

    // d(., B) is convex for convex B, so its max over a polytope or box sits
    // at a vertex.
    if b.is_convex() {
        if let Some(vertices) = vertex_list(a) {
            let mut best = (f64::NEG_INFINITY, vertices[0].clone());
            for v in vertices {
                let d = b.distance(&v).ok()?;
                if d > best.0 {
                    best = (d, v);
                }
            }
            return Some(best);
        }
    }
    None
}

fn direction(offset: &Vector, dim: usize) -> Vector {
    let len = offset.norm();
    if len > 0.0 {
        offset.scale(1.0 / len)
    } else {
        Vector::unit(dim, 0)
    }
}

/// `max_{x in A} <a, x>` with a maximizer, for bounded convex shapes.
fn support(set: &ProxSet, a: &Vector) -> Option<(f64, Vector)> {
    match set.shape() {
        Shape::Ball { center, radius } => {
            Some((a.dot(center) + radius * a.norm(), center.axpy(*radius, &direction(a, a.dim()))))
        }
        _ => {
            let vs = vertex_list(set)?;
            vs.into_iter()
                .map(|v| (a.dot(&v), v))
                .max_by(|x, y| x.0.total_cmp(&y.0))
        }
    }
}

fn vertex_list(set: &ProxSet) -> Option<Vec<Vector>> {
    match set.shape() {
        Shape::AxisBox { lo, hi } => {
            let dim = lo.dim();
            if dim > 16 {
                return None;
            }
            let out = (0..1usize << dim)
                .map(|mask| {
                    let c = (0..dim)
                        .map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] })
                        .collect();
                    Vector::new(c).expect("finite corners")
                })
                .collect();
            Some(out)
        }
        Shape::Polytope(p) => p.vertices(),
        Shape::RigidImage {
            base,
            rotation,
            translation,
        } => {
            let vs = vertex_list(base)?;
            Some(vs.iter().map(|v| &v.transform(rotation) + translation).collect())
        }
        _ => None,
    }
}

/// Bounding region of a bounded set.
fn bounding_region(set: &ProxSet) -> Option<Region> {
    match set.shape() {
        Shape::Ball { center, radius } => Some(Region::around(center, *radius)),
        Shape::AxisBox { lo, hi } => Region::new(lo.clone(), hi.clone()).ok(),
        Shape::Polytope(_) | Shape::RigidImage { .. } => {
            let vs = vertex_list(set)?;
            let dim = set.dim();
            let lo = (0..dim)
                .map(|i| vs.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min))
                .collect();
            let hi = (0..dim)
                .map(|i| vs.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max))
                .collect();
            Region::new(Vector::new(lo).ok()?, Vector::new(hi).ok()?).ok()
        }
        _ => None,
    }
}

fn default_region(a: &ProxSet, b: &ProxSet) -> Region {
    if let Some(r) = bounding_region(a) {
        return r;
    }
    if let Some(r) = bounding_region(b) {
        let center = (r.lo() + r.hi()).scale(0.5);
        let half = 2.0 * (r.hi() - r.lo()).max_abs().max(1.0);
        return Region::around(&center, half);
    }
    Region::around(&a.reference_point(), 10.0)
}

fn sampled_excess(a: &ProxSet, b: &ProxSet, budget: &SamplingParams, hints: &[Vector]) -> Result<ExcessEstimate> {
    let region = budget.region.clone().unwrap_or_else(|| default_region(a, b));
    let mut points = sample_points(a, &region, budget.samples.max(1), budget.seed)?;
    for h in hints {
        if a.contains(h)? {
            points.push(h.clone());
        }
    }
    let sample_count = points.len();
    let mut scored: Vec<(f64, Vector)> = Vec::with_capacity(points.len());
    for p in points {
        let d = b.distance(&p)?;
        scored.push((d, p));
    }
    scored.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut best = scored[0].clone();

    let step0 = 0.1 * (region.hi() - region.lo()).max_abs().max(1e-6);
    for (d0, start) in scored.iter().take(5) {
        let mut x = start.clone();
        let mut d = *d0;
        let mut step = step0;
        for _ in 0..budget.ascent_steps {
            if d <= 0.0 {
                break;
            }
            let Ok(p) = b.project(&x) else { break };
            let grad = direction(&(&x - &p), x.dim());
            let Ok(candidate) = a.project(&x.axpy(step, &grad)) else {
                step *= 0.5;
                continue;
            };
            let dc = b.distance(&candidate)?;
            if dc > d {
                x = candidate;
                d = dc;
            } else {
                step *= 0.5;
            }
        }
        if d > best.0 {
            best = (d, x);
        }
    }
    Ok(ExcessEstimate {
        lower: best.0,
        witness: best.1,
        method: ExcessMethod::Sampled,
        sample_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::HalfSpace;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c)
    }

    fn ball(c: &[f64], r: f64) -> ProxSet {
        ProxSet::ball(v(c), r).unwrap()
    }

    /// Boundary-sampling oracle for ball pairs, independent of the closed form.
    fn ball_oracle(a: (&[f64], f64), b: (&[f64], f64)) -> f64 {
        let n = 10_000;
        (0..n)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                let p = [a.0[0] + a.1 * th.cos(), a.0[1] + a.1 * th.sin()];
                let dc = ((p[0] - b.0[0]).powi(2) + (p[1] - b.0[1]).powi(2)).sqrt();
                (dc - b.1).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn ball_examples_match_sampling_oracle() {
        let e = excess(&ball(&[0.0, 0.0], 2.0), &ball(&[0.0, 0.0], 1.0), &SamplingParams::default()).unwrap();
        assert_eq!(e.method, ExcessMethod::Analytic);
        assert_eq!(e.lower, 1.0);
        assert!((ball_oracle((&[0.0, 0.0], 2.0), (&[0.0, 0.0], 1.0)) - 1.0).abs() < 1e-12);

        let e = excess(&ball(&[0.0, 0.0], 1.0), &ball(&[0.0, 0.0], 2.0), &SamplingParams::default()).unwrap();
        assert_eq!(e.lower, 0.0);

        for (ca, ra, cb, rb) in [([0.3, -0.2], 0.7, [1.0, 0.5], 0.4), ([2.0, 0.0], 0.5, [0.0, 0.0], 1.0)] {
            let e = excess(&ball(&ca, ra), &ball(&cb, rb), &SamplingParams::default()).unwrap();
            let o = ball_oracle((&ca, ra), (&cb, rb));
            assert!((e.lower - o).abs() < 1e-6, "{} vs {o}", e.lower);
            assert!((ball(&cb, rb).distance(&e.witness).unwrap() - e.lower).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_half_spaces() {
        let a = ProxSet::half_space(v(&[1.0, 0.0]), 0.0).unwrap();
        let b = ProxSet::half_space(v(&[1.0, 0.0]), -0.5).unwrap();
        let e = excess(&a, &b, &SamplingParams::default()).unwrap();
        assert_eq!(e.lower, 0.5);
        assert_eq!(excess(&b, &a, &SamplingParams::default()).unwrap().lower, 0.0);
        // sampling oracle: points of A near x1 = 0 sit 0.5 away from B
        let region = Region::new(v(&[-2.0, -2.0]), v(&[2.0, 2.0])).unwrap();
        let pts = sample_points(&a, &region, 400, 3).unwrap();
        let best = pts.iter().map(|p| b.distance(p).unwrap()).fold(0.0, f64::max);
        assert!((best - 0.5).abs() < 1e-9, "{best}");
    }

    #[test]
    fn complement_pairs_match_sampling() {
        let a = ProxSet::ball_complement(v(&[0.0, 0.0]), 0.5).unwrap();
        let b = ProxSet::ball_complement(v(&[0.1, 0.0]), 0.5).unwrap();
        let exact = excess(&a, &b, &SamplingParams::default()).unwrap();
        assert!((exact.lower - 0.1).abs() < 1e-12);
        let sampled = sampled_excess(
            &a,
            &b,
            &SamplingParams {
                region: Some(Region::around(&v(&[0.0, 0.0]), 1.5)),
                ..SamplingParams::default()
            },
            &[],
        )
        .unwrap();
        assert!(sampled.lower <= exact.lower + 1e-12);
        assert!(sampled.lower >= exact.lower - 1e-3, "{}", sampled.lower);
    }

    #[test]
    fn vertex_rule_for_polytope_against_ball() {
        let tri = ProxSet::polytope(vec![
            HalfSpace::new(v(&[-1.0, 0.0]), 0.0).unwrap(),
            HalfSpace::new(v(&[0.0, -1.0]), 0.0).unwrap(),
            HalfSpace::new(v(&[1.0, 1.0]), 1.0).unwrap(),
        ])
        .unwrap();
        let b = ball(&[0.0, 0.0], 0.5);
        let e = excess(&tri, &b, &SamplingParams::default()).unwrap();
        assert_eq!(e.method, ExcessMethod::Analytic);
        assert!((e.lower - 0.5).abs() < 1e-12);
        let s = sampled_excess(&tri, &b, &SamplingParams::default(), &[]).unwrap();
        // witnesses are members up to the containment tolerance
        assert!(s.lower <= e.lower + 2e-10 && s.lower >= e.lower - 1e-4, "{}", s.lower);
    }

    #[test]
    fn unbounded_over_bounded_is_infinite() {
        let h = ProxSet::half_space(v(&[1.0, 0.0]), 0.0).unwrap();
        let e = excess(&h, &ball(&[0.0, 0.0], 1.0), &SamplingParams::default()).unwrap();
        assert!(e.lower.is_infinite());
    }

    #[test]
    fn rotated_copies_pull_back() {
        let q = crate::prox::rotation_2d(0.3);
        let base = ball(&[1.0, 0.0], 0.5);
        let a = ProxSet::rigid_image(base.clone(), q.clone(), v(&[0.0, 0.0])).unwrap();
        let b = ProxSet::rigid_image(base, q, v(&[0.2, 0.0])).unwrap();
        let e = excess(&a, &b, &SamplingParams::default()).unwrap();
        assert!((e.lower - 0.2).abs() < 1e-12);
    }

    #[test]
    fn triangle_inequality_on_analytic_triples() {
        let sets = [
            ball(&[0.0, 0.0], 1.0),
            ball(&[0.5, 0.2], 0.6),
            ball(&[-0.3, 0.4], 1.4),
            ball(&[1.0, 1.0], 0.2),
        ];
        let p = SamplingParams::default();
        for a in &sets {
            for b in &sets {
                for c in &sets {
                    let ac = excess(a, c, &p).unwrap().lower;
                    let ab = excess(a, b, &p).unwrap().lower;
                    let bc = excess(b, c, &p).unwrap().lower;
                    assert!(ac <= ab + bc + 1e-12);
                }
            }
        }
    }
}
