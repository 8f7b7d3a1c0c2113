//! Local improvement of a placement: the plane-constrained 1-center and
//! per-sensor moves on a finer candidate lattice.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{assign_nearest, coverage_radius, ApproxError, PlaneDeployment};
use crate::geom::{dist, Point3};
use crate::ilp::ratio_rhs;
use crate::mesh::{CandidateRegion, SampleSet};
use crate::model::phi_lambert;
use crate::visibility::{visibility_column, Bvh, EndpointShrink};

#[derive(Debug, Error)]
pub enum RefineError {
    #[error("point set is empty")]
    Empty,
    #[error("fine pitch must be positive, got {0}")]
    Pitch(f64),
    #[error(transparent)]
    Approx(#[from] ApproxError),
}

/// Smallest sphere containing a point set with its center on `z = height`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedSphere {
    pub center: Point3,
    pub radius: f64,
    /// Indices of the input points that pin the sphere (at most 3).
    pub support: Vec<usize>,
}

/// Candidate center on the plane and its squared radius.
#[derive(Debug, Clone, Copy)]
struct Disc {
    q: [f64; 2],
    val: f64,
}

struct Lifted {
    xy: [f64; 2],
    /// Squared vertical offset to the plane.
    w: f64,
}

impl Lifted {
    fn cost(&self, q: [f64; 2]) -> f64 {
        let dx = q[0] - self.xy[0];
        let dy = q[1] - self.xy[1];
        dx * dx + dy * dy + self.w
    }
}

fn covers(d: &Disc, p: &Lifted) -> bool {
    p.cost(d.q) <= d.val + 1e-12 * d.val.max(1.0)
}

fn disc1(a: &Lifted) -> Disc {
    Disc { q: a.xy, val: a.w }
}

/// Best center with `a` and `b` equally far: the foot of the radical line.
fn disc2(a: &Lifted, b: &Lifted) -> Disc {
    let d = [b.xy[0] - a.xy[0], b.xy[1] - a.xy[1]];
    let dd = d[0] * d[0] + d[1] * d[1];
    if dd <= 1e-24 * (a.w + b.w).max(1.0) {
        return Disc {
            q: a.xy,
            val: a.w.max(b.w),
        };
    }
    let t = (dd + b.w - a.w) / (2.0 * dd);
    Disc {
        q: [a.xy[0] + t * d[0], a.xy[1] + t * d[1]],
        val: t * t * dd + a.w,
    }
}

/// Center equally far from all three, or the best smaller basis when the
/// projections are collinear.
fn disc3(a: &Lifted, b: &Lifted, c: &Lifted) -> Disc {
    let u = [b.xy[0] - a.xy[0], b.xy[1] - a.xy[1]];
    let v = [c.xy[0] - a.xy[0], c.xy[1] - a.xy[1]];
    let det = u[0] * v[1] - u[1] * v[0];
    let scale = (u[0].hypot(u[1]) * v[0].hypot(v[1])).max(1e-300);
    if det.abs() > 1e-12 * scale {
        // 2 q·u = |b|² − |a|² + w_b − w_a, likewise for c, relative to a.
        let ru = (u[0] * u[0] + u[1] * u[1] + b.w - a.w) / 2.0;
        let rv = (v[0] * v[0] + v[1] * v[1] + c.w - a.w) / 2.0;
        let x = (ru * v[1] - rv * u[1]) / det;
        let y = (u[0] * rv - v[0] * ru) / det;
        let q = [a.xy[0] + x, a.xy[1] + y];
        return Disc { q, val: a.cost(q) };
    }
    let pts = [a, b, c];
    [disc1(a), disc1(b), disc1(c), disc2(a, b), disc2(a, c), disc2(b, c)]
        .into_iter()
        .filter(|d| pts.iter().all(|p| covers(d, p)))
        .min_by(|x, y| x.val.total_cmp(&y.val))
        .unwrap_or_else(|| disc2(a, b))
}

/// Minimum enclosing sphere with its center on the plane `z = height`.
///
/// Randomized incremental construction over a fixed-seed shuffle, so the
/// result is deterministic.
pub fn min_sphere_fixed_plane(
    points: &[Point3],
    height: f64,
) -> Result<ConstrainedSphere, RefineError> {
    if points.is_empty() {
        return Err(RefineError::Empty);
    }
    let lifted: Vec<Lifted> = points
        .iter()
        .map(|p| Lifted {
            xy: [p.x, p.y],
            w: (height - p.z) * (height - p.z),
        })
        .collect();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));

    let mut disc = disc1(&lifted[order[0]]);
    let mut basis = vec![order[0]];
    for i in 1..order.len() {
        let pi = order[i];
        if covers(&disc, &lifted[pi]) {
            continue;
        }
        disc = disc1(&lifted[pi]);
        basis = vec![pi];
        for j in 0..i {
            let pj = order[j];
            if covers(&disc, &lifted[pj]) {
                continue;
            }
            disc = disc2(&lifted[pi], &lifted[pj]);
            basis = vec![pi, pj];
            for l in 0..j {
                let pl = order[l];
                if covers(&disc, &lifted[pl]) {
                    continue;
                }
                disc = disc3(&lifted[pi], &lifted[pj], &lifted[pl]);
                basis = vec![pi, pj, pl];
            }
        }
    }
    let center = Point3::new(disc.q[0], disc.q[1], height);
    let radius = points
        .iter()
        .map(|p| dist(p, &center))
        .fold(0.0, f64::max);
    let mut support: Vec<usize> = basis
        .into_iter()
        .filter(|&i| (dist(&points[i], &center) - radius).abs() <= 1e-9)
        .collect();
    support.sort_unstable();
    Ok(ConstrainedSphere {
        center,
        radius,
        support,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityImprovement {
    pub positions: Vec<Point3>,
    pub r_initial: f64,
    pub r_new: f64,
    pub iterations: usize,
}

/// Alternate nearest-sensor assignment with re-centering each sensor on
/// the constrained 1-center of its samples until the coverage radius stops
/// decreasing by more than 1e-9.
pub fn improve_quality_max(
    samples: &SampleSet,
    centers: &[Point3],
    plane: &PlaneDeployment,
) -> Result<QualityImprovement, RefineError> {
    let r_initial = coverage_radius(centers, samples)?;
    let pts: Vec<Point3> = samples.positions().copied().collect();
    let mut current = centers.to_vec();
    let mut r = r_initial;
    let mut iterations = 0;
    loop {
        let owner = assign_nearest(&current, samples);
        let mut next = current.clone();
        for (j, c) in next.iter_mut().enumerate() {
            let mine: Vec<Point3> = pts
                .iter()
                .zip(&owner)
                .filter(|(_, &o)| o == j)
                .map(|(p, _)| *p)
                .collect();
            if !mine.is_empty() {
                *c = min_sphere_fixed_plane(&mine, plane.height)?.center;
            }
        }
        let r_next = coverage_radius(&next, samples)?;
        if r_next > r {
            break;
        }
        iterations += 1;
        let gained = r - r_next;
        current = next;
        r = r_next;
        if gained <= 1e-9 || iterations >= 1000 {
            break;
        }
    }
    Ok(QualityImprovement {
        positions: current,
        r_initial,
        r_new: r,
        iterations,
    })
}

/// What `refine_grid` tries to improve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "objective", rename_all = "kebab-case")]
pub enum RefineObjective {
    /// Number of samples seen by at least one sensor.
    Visibility,
    /// Number of samples whose summed Lambert quality reaches `phi`.
    Threshold { phi: f64 },
    /// Radius within which a `rho` fraction of samples sees a sensor.
    Radius { rho: f64 },
}

impl RefineObjective {
    pub fn higher_is_better(self) -> bool {
        !matches!(self, RefineObjective::Radius { .. })
    }
}

/// Scene data the fine-grid search needs.
pub struct RefineContext<'a> {
    pub bvh: &'a Bvh,
    pub samples: &'a SampleSet,
    /// Sensors never leave this region.
    pub region: CandidateRegion,
    pub objective: RefineObjective,
    pub shrink: EndpointShrink,
}

impl RefineContext<'_> {
    /// Per-sample contribution of a sensor at `p`, or `None` when `p`
    /// coincides with a visible sample.
    fn column(&self, p: &Point3) -> Option<Vec<f64>> {
        let vis = visibility_column(self.bvh, self.samples, p, self.shrink);
        let mut col = Vec::with_capacity(vis.len());
        for (s, v) in self.samples.samples().iter().zip(vis) {
            col.push(match self.objective {
                RefineObjective::Visibility => f64::from(u8::from(v)),
                RefineObjective::Threshold { .. } if !v => 0.0,
                RefineObjective::Threshold { .. } => {
                    phi_lambert(&s.position, &s.normal, p).ok()?
                }
                RefineObjective::Radius { .. } if !v => f64::INFINITY,
                RefineObjective::Radius { .. } => dist(&s.position, p),
            });
        }
        Some(col)
    }

    /// Objective in natural units (count or radius).
    fn value(&self, cols: &[&[f64]]) -> f64 {
        let n = self.samples.len();
        match self.objective {
            RefineObjective::Visibility => (0..n)
                .filter(|&i| cols.iter().any(|c| c[i] > 0.0))
                .count() as f64,
            RefineObjective::Threshold { phi } => (0..n)
                .filter(|&i| {
                    let f: f64 = cols.iter().map(|c| c[i]).sum();
                    f >= phi && f > 0.0
                })
                .count() as f64,
            RefineObjective::Radius { rho } => {
                let need = ratio_rhs(n, rho) as usize;
                if need == 0 {
                    return 0.0;
                }
                let mut d: Vec<f64> = (0..n)
                    .map(|i| cols.iter().map(|c| c[i]).fold(f64::INFINITY, f64::min))
                    .collect();
                d.sort_by(f64::total_cmp);
                d[need - 1]
            }
        }
    }

    fn score(&self, cols: &[&[f64]]) -> f64 {
        let v = self.value(cols);
        if self.objective.higher_is_better() {
            v
        } else {
            -v
        }
    }

    /// Objective of sensors at `positions`.
    pub fn objective_at(&self, positions: &[Point3]) -> Option<f64> {
        let cols: Option<Vec<Vec<f64>>> = positions.iter().map(|p| self.column(p)).collect();
        let cols = cols?;
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        Some(self.value(&refs))
    }

    /// Per sample, the index in `positions` of its best sensor (highest
    /// quality or nearest, lowest index on ties) when the sample counts as
    /// covered.
    pub fn assignment(&self, positions: &[Point3]) -> Vec<Option<usize>> {
        let n = self.samples.len();
        let cols: Vec<Vec<f64>> = positions
            .iter()
            .map(|p| self.column(p).unwrap_or_else(|| vec![self.empty_fill(); n]))
            .collect();
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let radius = self.value(&refs);
        (0..n)
            .map(|i| {
                let mut best: Option<usize> = None;
                for (j, c) in cols.iter().enumerate() {
                    let better = match best {
                        None => true,
                        Some(b) if self.objective.higher_is_better() => c[i] > cols[b][i],
                        Some(b) => c[i] < cols[b][i],
                    };
                    if better {
                        best = Some(j);
                    }
                }
                let covered = match self.objective {
                    RefineObjective::Visibility => refs.iter().any(|c| c[i] > 0.0),
                    RefineObjective::Threshold { phi } => {
                        let f: f64 = refs.iter().map(|c| c[i]).sum();
                        f >= phi && f > 0.0
                    }
                    RefineObjective::Radius { .. } => best.is_some_and(|b| cols[b][i] <= radius),
                };
                best.filter(|_| covered)
            })
            .collect()
    }

    fn empty_fill(&self) -> f64 {
        if self.objective.higher_is_better() {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Lattice points at `pitch`, aligned to the region corner, within
    /// `half_width` of `c` on every axis.
    fn neighborhood(&self, c: &Point3, pitch: f64, half_width: f64) -> Vec<Point3> {
        let b = self.region.bounds();
        let axis = |a: usize| -> Vec<f64> {
            let span = b.max[a] - b.min[a];
            if span <= 0.0 {
                return vec![b.min[a]];
            }
            let top = (span / pitch + 1e-9).floor() as i64;
            let lo = (((c[a] - half_width - b.min[a]) / pitch) - 1e-9).ceil() as i64;
            let hi = (((c[a] + half_width - b.min[a]) / pitch) + 1e-9).floor() as i64;
            (lo.max(0)..=hi.min(top))
                .map(|i| b.min[a] + i as f64 * pitch)
                .collect()
        };
        let zs = match self.region {
            CandidateRegion::Plane { z, .. } => vec![z],
            CandidateRegion::Box { .. } => axis(2),
        };
        let (xs, ys) = (axis(0), axis(1));
        let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
        for &z in &zs {
            for &y in &ys {
                for &x in &xs {
                    out.push(Point3::new(x, y, z));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRefinement {
    pub positions: Vec<Point3>,
    pub objective_before: f64,
    pub objective_after: f64,
    pub moves: usize,
    pub rounds: usize,
}

/// Move sensors one at a time, in index order, to the best point of the
/// fine lattice within `half_width` of their current position. A move is
/// taken only when it strictly improves the whole placement. Stops after
/// `rounds` passes or a pass without moves.
pub fn refine_grid(
    ctx: &RefineContext<'_>,
    start: &[Point3],
    pitch_fine: f64,
    half_width: f64,
    rounds: usize,
) -> Result<GridRefinement, RefineError> {
    if !(pitch_fine > 0.0) {
        return Err(RefineError::Pitch(pitch_fine));
    }
    let mut positions = start.to_vec();
    let mut cols: Vec<Vec<f64>> = positions
        .iter()
        .map(|p| {
            // A sensor sitting on a sample scores as seeing nothing, so it
            // is free to move away.
            ctx.column(p)
                .unwrap_or_else(|| vec![ctx.empty_fill(); ctx.samples.len()])
        })
        .collect();
    let before = {
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        ctx.score(&refs)
    };
    let mut best_score = before;
    let mut moves = 0;
    let mut passes = 0;
    for _ in 0..rounds {
        passes += 1;
        let mut moved = false;
        for j in 0..positions.len() {
            let mut best: Option<(Point3, Vec<f64>)> = None;
            for p in ctx.neighborhood(&positions[j], pitch_fine, half_width) {
                if p == positions[j] {
                    continue;
                }
                let Some(col) = ctx.column(&p) else { continue };
                let refs: Vec<&[f64]> = cols
                    .iter()
                    .enumerate()
                    .map(|(t, c)| if t == j { col.as_slice() } else { c.as_slice() })
                    .collect();
                let s = ctx.score(&refs);
                if s > best_score {
                    best_score = s;
                    best = Some((p, col));
                }
            }
            if let Some((p, col)) = best {
                positions[j] = p;
                cols[j] = col;
                moves += 1;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    let sign = if ctx.objective.higher_is_better() { 1.0 } else { -1.0 };
    Ok(GridRefinement {
        positions,
        objective_before: sign * before,
        objective_after: sign * best_score,
        moves,
        rounds: passes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriangleMesh;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    #[test]
    fn single_point_projects() {
        let s = min_sphere_fixed_plane(&[p(0.0, 0.0, 0.0)], 3.0).unwrap();
        assert_eq!(s.center, p(0.0, 0.0, 3.0));
        assert_eq!(s.radius, 3.0);
        assert_eq!(s.support, vec![0]);
    }

    #[test]
    fn two_points_symmetric() {
        let s = min_sphere_fixed_plane(&[p(-4.0, 0.0, 0.0), p(4.0, 0.0, 0.0)], 3.0).unwrap();
        assert!((s.center - p(0.0, 0.0, 3.0)).norm() < 1e-12);
        assert!((s.radius - 5.0).abs() < 1e-12);
        assert_eq!(s.support, vec![0, 1]);
    }

    #[test]
    fn four_fold_symmetry() {
        let pts = [
            p(1.0, 0.0, 0.0),
            p(0.0, 1.0, 0.0),
            p(-1.0, 0.0, 0.0),
            p(0.0, -1.0, 0.0),
        ];
        let s = min_sphere_fixed_plane(&pts, 1.0).unwrap();
        assert!((s.center - p(0.0, 0.0, 1.0)).norm() < 1e-12);
        assert!((s.radius - 2f64.sqrt()).abs() < 1e-12);
        assert!(s.support.len() >= 2 && s.support.len() <= 3);
    }

    #[test]
    fn heavy_point_dominates() {
        // The low point is far from the plane; the other fits inside.
        let s = min_sphere_fixed_plane(&[p(0.0, 0.0, -10.0), p(1.0, 0.0, 0.0)], 0.0).unwrap();
        assert!((s.center - p(0.0, 0.0, 0.0)).norm() < 1e-12);
        assert_eq!(s.radius, 10.0);
        assert_eq!(s.support, vec![0]);
    }

    #[test]
    fn collinear_projections() {
        let pts = [p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0), p(2.0, 0.0, 0.0), p(1.0, 0.0, -0.5)];
        let s = min_sphere_fixed_plane(&pts, 1.0).unwrap();
        for q in &pts {
            assert!(dist(q, &s.center) <= s.radius + 1e-9);
        }
        assert!((s.center.y).abs() < 1e-12);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(min_sphere_fixed_plane(&[], 1.0), Err(RefineError::Empty)));
    }

    #[test]
    fn improvement_fixed_point() {
        let pts = [p(-4.0, 0.0, 0.0), p(4.0, 0.0, 0.0)];
        let s = SampleSet::from_points(&pts).unwrap();
        let plane = PlaneDeployment::for_samples(3.0, &s);
        let out = improve_quality_max(&s, &[p(0.0, 0.0, 3.0)], &plane).unwrap();
        assert_eq!(out.r_new, out.r_initial);
        assert_eq!(out.positions, vec![p(0.0, 0.0, 3.0)]);
    }

    #[test]
    fn improvement_recenters() {
        let pts = [p(0.0, 0.0, 0.0), p(2.0, 0.0, 0.0)];
        let s = SampleSet::from_points(&pts).unwrap();
        let plane = PlaneDeployment::for_samples(1.0, &s);
        let out = improve_quality_max(&s, &[p(0.0, 0.0, 1.0)], &plane).unwrap();
        assert!((out.r_initial - 5f64.sqrt()).abs() < 1e-12);
        assert!((out.r_new - 2f64.sqrt()).abs() < 1e-12);
    }

    fn open_floor() -> (Bvh, SampleSet) {
        let mesh = TriangleMesh::empty("open");
        let pts: Vec<Point3> = (0..5).map(|i| p(i as f64, 0.0, 0.0)).collect();
        (Bvh::build(&mesh), SampleSet::from_points(&pts).unwrap())
    }

    #[test]
    fn zero_rounds_is_noop() {
        let (bvh, samples) = open_floor();
        let ctx = RefineContext {
            bvh: &bvh,
            samples: &samples,
            region: CandidateRegion::Plane { z: 1.0, x0: 0.0, y0: 0.0, x1: 4.0, y1: 0.0 },
            objective: RefineObjective::Radius { rho: 1.0 },
            shrink: EndpointShrink::default(),
        };
        let start = [p(0.0, 0.0, 1.0)];
        let out = refine_grid(&ctx, &start, 0.5, 2.0, 0).unwrap();
        assert_eq!(out.positions, start);
        assert_eq!(out.objective_after, out.objective_before);
    }

    #[test]
    fn radius_moves_toward_middle() {
        let (bvh, samples) = open_floor();
        let ctx = RefineContext {
            bvh: &bvh,
            samples: &samples,
            region: CandidateRegion::Plane { z: 1.0, x0: 0.0, y0: 0.0, x1: 4.0, y1: 0.0 },
            objective: RefineObjective::Radius { rho: 1.0 },
            shrink: EndpointShrink::default(),
        };
        let out = refine_grid(&ctx, &[p(0.0, 0.0, 1.0)], 0.5, 1.0, 10).unwrap();
        assert_eq!(out.positions, vec![p(2.0, 0.0, 1.0)]);
        assert!((out.objective_after - 5f64.sqrt()).abs() < 1e-12);
        assert!((out.objective_before - 17f64.sqrt()).abs() < 1e-12);
        let a = ctx.assignment(&[p(0.0, 0.0, 1.0), p(4.0, 0.0, 1.0)]);
        assert_eq!(a, vec![Some(0), Some(0), Some(0), Some(1), Some(1)]);
    }
}
