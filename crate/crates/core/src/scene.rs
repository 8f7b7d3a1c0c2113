//! Deterministic synthetic scenes: a smooth terrain and a furnished room.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{Aabb, Point3, Vec3};
use crate::mesh::{CandidateRegion, MeshError, TriangleMesh};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid scene: {0}")]
    Invalid(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Height field `z = amplitude · Σ sin(fx·x + fy·y + phase)` over four
/// seeded waves, triangulated on a `(cells+1)²` vertex grid covering
/// `[0, extent[0]] × [0, extent[1]]`.
pub fn gen_terrain(
    seed: u64,
    extent: [f64; 2],
    cells: usize,
    amplitude: f64,
) -> Result<TriangleMesh, SceneError> {
    if cells == 0 {
        return Err(SceneError::Invalid("terrain needs at least one cell".into()));
    }
    if !(extent[0] > 0.0 && extent[1] > 0.0) || !amplitude.is_finite() {
        return Err(SceneError::Invalid(format!(
            "extent {extent:?}, amplitude {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = extent[0].max(extent[1]);
    // Wavelengths between half and twice the terrain size keep curvature low.
    let waves: Vec<[f64; 3]> = (0..4)
        .map(|_| {
            let wavelength = size * rng.random_range(0.5..2.0);
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let k = std::f64::consts::TAU / wavelength;
            [k * angle.cos(), k * angle.sin(), rng.random_range(0.0..std::f64::consts::TAU)]
        })
        .collect();
    let height = |x: f64, y: f64| -> f64 {
        amplitude * waves.iter().map(|w| (w[0] * x + w[1] * y + w[2]).sin()).sum::<f64>()
    };

    let side = cells + 1;
    let mut vertices = Vec::with_capacity(side * side);
    for r in 0..side {
        for c in 0..side {
            let x = extent[0] * c as f64 / cells as f64;
            let y = extent[1] * r as f64 / cells as f64;
            vertices.push(Point3::new(x, y, height(x, y)));
        }
    }
    let mut triangles = Vec::with_capacity(2 * cells * cells);
    for r in 0..cells {
        for c in 0..cells {
            let v = |rr: usize, cc: usize| (rr * side + cc) as u32;
            triangles.push([v(r, c), v(r, c + 1), v(r + 1, c + 1)]);
            triangles.push([v(r, c), v(r + 1, c + 1), v(r + 1, c)]);
        }
    }
    Ok(TriangleMesh::new(format!("terrain-{seed}"), vertices, triangles)?)
}

/// Two triangles per box face. With `outward` the normals point out of the
/// box, otherwise into it.
fn box_triangles(b: &Aabb, outward: bool, vertices: &mut Vec<Point3>, triangles: &mut Vec<[u32; 3]>) {
    let corner = |i: usize| {
        Point3::new(
            if i & 1 == 0 { b.min.x } else { b.max.x },
            if i & 2 == 0 { b.min.y } else { b.max.y },
            if i & 4 == 0 { b.min.z } else { b.max.z },
        )
    };
    let base = vertices.len() as u32;
    vertices.extend((0..8).map(corner));
    for axis in 0..3 {
        let bit = 1 << axis;
        let (u, v) = (1 << ((axis + 1) % 3), 1 << ((axis + 2) % 3));
        for side in [0, bit] {
            let quad = [side, side | u, side | u | v, side | v];
            let mut dir = Vec3::zeros();
            dir[axis] = if side == 0 { -1.0 } else { 1.0 };
            if !outward {
                dir = -dir;
            }
            let (a, b2, c) = (corner(quad[0]), corner(quad[1]), corner(quad[2]));
            let flip = (b2 - a).cross(&(c - a)).dot(&dir) < 0.0;
            let q: Vec<u32> = quad.iter().map(|&i| base + i as u32).collect();
            if flip {
                triangles.push([q[0], q[2], q[1]]);
                triangles.push([q[0], q[3], q[2]]);
            } else {
                triangles.push([q[0], q[1], q[2]]);
                triangles.push([q[0], q[2], q[3]]);
            }
        }
    }
}

/// Closed room `[0, extent]` with inward-facing walls, floor and ceiling,
/// plus outward-facing box obstacles.
pub fn gen_room(extent: [f64; 3], obstacles: &[Aabb]) -> Result<TriangleMesh, SceneError> {
    if extent.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(SceneError::Invalid(format!("room extent {extent:?}")));
    }
    let shell = Aabb::new(Point3::origin(), Point3::new(extent[0], extent[1], extent[2]));
    for (i, o) in obstacles.iter().enumerate() {
        if (0..3).any(|a| !(o.min[a] < o.max[a])) {
            return Err(SceneError::Invalid(format!("obstacle {i} is degenerate")));
        }
        if !shell.contains_box(o) {
            return Err(SceneError::Invalid(format!("obstacle {i} lies outside the room")));
        }
        if let Some(j) = (0..i).find(|&j| obstacles[j].interiors_overlap(o)) {
            return Err(SceneError::Invalid(format!("obstacles {j} and {i} overlap")));
        }
    }
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    box_triangles(&shell, false, &mut vertices, &mut triangles);
    for o in obstacles {
        box_triangles(o, true, &mut vertices, &mut triangles);
    }
    Ok(TriangleMesh::new("room", vertices, triangles)?)
}

/// A generated room with its obstacles and sensor plane.
#[derive(Debug, Clone)]
pub struct RoomScene {
    pub extent: [f64; 3],
    pub obstacles: Vec<Aabb>,
    /// Ceiling-mounted sensor plane.
    pub sensor_region: CandidateRegion,
    pub mesh: TriangleMesh,
}

/// The reference room: 6 × 4 × 3 m with a bed and a counter, sensors on a
/// 10 × 6 grid at pitch 0.6 m just below the ceiling.
pub fn reference_room() -> RoomScene {
    let extent = [6.0, 4.0, 3.0];
    let obstacles = vec![
        Aabb::new(Point3::new(1.0, 0.8, 0.0), Point3::new(3.0, 2.2, 0.6)),
        Aabb::new(Point3::new(4.5, 0.0, 0.0), Point3::new(6.0, 0.6, 1.0)),
    ];
    let mesh = gen_room(extent, &obstacles).expect("reference room is valid");
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

/// Coarse candidate pitch of [`reference_room`]'s sensor plane.
pub const REFERENCE_ROOM_PITCH: f64 = 0.6;
/// Sample pitch giving roughly a thousand samples in [`reference_room`].
pub const REFERENCE_ROOM_SAMPLE_PITCH: f64 = 0.7;
/// Exposure threshold for the reference room: most samples can reach it
/// from a single well-placed sensor.
pub const REFERENCE_ROOM_PHI: f64 = 0.05;
