#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sensorcover::geom::{Aabb, Point3, Vec3};
use sensorcover::mesh::{
    CandidateRegion, CandidateSet, RegionKind, SampleSet, SurfaceSample,
};
use sensorcover::model::{build_instance, CoverageInstance, QualityKind};
use sensorcover::scene::{gen_room, RoomScene};
use sensorcover::visibility::VisibilityMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Samples on `[0, 10]² × [0, 1]` with normals in the upper hemisphere.
pub fn random_samples(rng: &mut ChaCha8Rng, n: usize) -> SampleSet {
    let samples = (0..n)
        .map(|id| {
            let normal = loop {
                let v = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(0.1..1.0),
                );
                if v.norm() <= 1.0 {
                    break v.normalize();
                }
            };
            SurfaceSample {
                id,
                position: Point3::new(
                    rng.random_range(0.0..10.0),
                    rng.random_range(0.0..10.0),
                    rng.random_range(0.0..1.0),
                ),
                normal,
                weight: 1.0,
            }
        })
        .collect();
    SampleSet::new(samples, 1.0).unwrap()
}

/// Candidates on `[0, 10]² × [2, 4]`.
pub fn random_candidates(rng: &mut ChaCha8Rng, m: usize) -> CandidateSet {
    CandidateSet::from_positions(
        (0..m).map(|_| {
            Point3::new(
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
                rng.random_range(2.0..4.0),
            )
        }),
        RegionKind::ExplicitList,
    )
    .unwrap()
}

/// Instance with a random visibility pattern of random density.
pub fn random_instance(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    kind: QualityKind,
) -> CoverageInstance {
    let samples = random_samples(rng, n);
    let candidates = random_candidates(rng, m);
    let density = rng.random_range(0.2..0.9);
    let rows: Vec<Vec<bool>> = (0..n)
        .map(|_| (0..m).map(|_| rng.random_bool(density)).collect())
        .collect();
    let vis = VisibilityMatrix::from_rows(&rows, &samples, &candidates);
    build_instance(samples, candidates, vis, kind).unwrap()
}

/// Threshold around the typical single-sensor exposure, so that both
/// single and combined coverage matter.
pub fn random_phi(rng: &mut ChaCha8Rng, instance: &CoverageInstance) -> f64 {
    let mut q: Vec<f64> = (0..instance.n_samples())
        .flat_map(|i| instance.phi_row(i).to_vec())
        .filter(|&q| q > 0.0)
        .collect();
    if q.is_empty() {
        return 1.0;
    }
    q.sort_by(f64::total_cmp);
    q[q.len() / 2] * rng.random_range(0.5..2.5)
}

pub fn random_points_below(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> Vec<Point3> {
    (0..n)
        .map(|_| {
            Point3::new(
                rng.random_range(0.0..spread),
                rng.random_range(0.0..spread),
                rng.random_range(-0.5..0.5),
            )
        })
        .collect()
}

/// A 6 × 4 × 3 room with up to three random non-overlapping floor boxes
/// and the reference sensor plane.
pub fn random_room(seed: u64) -> RoomScene {
    let mut rng = rng(seed);
    let extent = [6.0, 4.0, 3.0];
    let mut obstacles: Vec<Aabb> = Vec::new();
    let count = rng.random_range(1..=3);
    let mut attempts = 0;
    while obstacles.len() < count && attempts < 100 {
        attempts += 1;
        let w = rng.random_range(0.5..2.0);
        let d = rng.random_range(0.5..1.5);
        let h = rng.random_range(0.3..1.5);
        let x = rng.random_range(0.0..extent[0] - w);
        let y = rng.random_range(0.0..extent[1] - d);
        let b = Aabb::new(Point3::new(x, y, 0.0), Point3::new(x + w, y + d, h));
        if obstacles.iter().all(|o| !o.interiors_overlap(&b)) {
            obstacles.push(b);
        }
    }
    let mesh = gen_room(extent, &obstacles).unwrap();
    RoomScene {
        extent,
        obstacles,
        sensor_region: CandidateRegion::Plane {
            z: 2.7,
            x0: 0.3,
            y0: 0.5,
            x1: 5.7,
            y1: 3.5,
        },
        mesh,
    }
}
