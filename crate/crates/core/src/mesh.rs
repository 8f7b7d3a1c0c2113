//! Triangle meshes, surface sampling and candidate sensor grids.
//!
//! Surface sampling rasterizes each triangle on its own barycentric lattice:
//! a face whose longest edge is `L` is split into `n = ceil(L / pitch)`
//! subdivisions per edge, giving `n²` congruent sub-triangles whose centroids
//! become samples. Every face therefore contributes at least one sample and
//! all samples on a face carry the same exact share of its area.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{triangle_area, Aabb, Fnv64, Point3, Vec3};

/// Faces below this area are rejected as degenerate.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("face {face} references vertex {index} but the mesh has {n_vertices} vertices")]
    IndexOutOfRange {
        face: usize,
        index: i64,
        n_vertices: usize,
    },
    #[error("degenerate faces (area <= {MIN_TRIANGLE_AREA:e}): {faces:?}")]
    Degenerate { faces: Vec<usize> },
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("surface sampling produced no samples (every face was filtered out)")]
    EmptySampleSet,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Indexed triangle mesh. Construction validates indices, finiteness and face area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleMesh {
    pub name: String,
    vertices: Vec<Point3>,
    triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Point3>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self, MeshError> {
        if let Some(i) = vertices
            .iter()
            .position(|v| !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()))
        {
            return Err(MeshError::NonFinite(i));
        }
        for (f, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i as usize >= vertices.len()) {
                return Err(MeshError::IndexOutOfRange {
                    face: f,
                    index: i64::from(bad),
                    n_vertices: vertices.len(),
                });
            }
        }
        let degenerate: Vec<usize> = triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                let [a, b, c] = t.map(|i| vertices[i as usize]);
                !(triangle_area(&a, &b, &c) > MIN_TRIANGLE_AREA)
            })
            .map(|(f, _)| f)
            .collect();
        if !degenerate.is_empty() {
            return Err(MeshError::Degenerate { faces: degenerate });
        }
        Ok(Self {
            name: name.into(),
            vertices,
            triangles,
        })
    }

    /// A mesh with no faces (an unobstructed scene).
    pub fn empty(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            vertices: Vec::new(),
            triangles: Vec::new(),
        }
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, f: usize) -> [Point3; 3] {
        self.triangles[f].map(|i| self.vertices[i as usize])
    }

    /// Unit normal following the face winding (counter-clockwise = front).
    pub fn face_normal(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.triangle(f);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.triangle(f);
        triangle_area(&a, &b, &c)
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    /// FNV-1a over vertex coordinates and face indices.
    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv64::default();
        h.write_u64(self.vertices.len() as u64);
        for v in &self.vertices {
            h.write_point(v);
        }
        h.write_u64(self.triangles.len() as u64);
        for t in &self.triangles {
            for &i in t {
                h.write_u64(u64::from(i));
            }
        }
        h.finish()
    }

    /// Concatenate two meshes, keeping `self`'s name.
    pub fn merged(&self, other: &TriangleMesh) -> TriangleMesh {
        let offset = self.vertices.len() as u32;
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices);
        let mut triangles = self.triangles.clone();
        triangles.extend(other.triangles.iter().map(|t| t.map(|i| i + offset)));
        TriangleMesh {
            name: self.name.clone(),
            vertices,
            triangles,
        }
    }

    pub fn to_obj_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.name);
        let _ = writeln!(out, "o {}", self.name);
        for v in &self.vertices {
            // `{:?}` on f64 is the shortest round-trip representation.
            let _ = writeln!(out, "v {:?} {:?} {:?}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }

    pub fn write_obj(&self, path: &Path) -> Result<(), MeshError> {
        std::fs::write(path, self.to_obj_string()).map_err(|source| MeshError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// Load a Wavefront OBJ file. Only `v` and `f` records are interpreted.
pub fn load_obj(path: &Path) -> Result<TriangleMesh, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_obj(&text, name)
}

/// Parse OBJ text. Polygons are fan-triangulated; negative indices count
/// back from the most recent vertex.
pub fn parse_obj(text: &str, name: impl Into<String>) -> Result<TriangleMesh, MeshError> {
    let mut name = name.into();
    let mut vertices = Vec::new();
    // (source face, raw index, resolved zero-based index) per corner; forward
    // references are legal OBJ, so bounds are checked after the last vertex.
    let mut corners: Vec<(usize, i64, i64)> = Vec::new();
    let mut n_faces = 0;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tok = line.split_whitespace();
        let Some(head) = tok.next() else { continue };
        let parse_err = |msg: String| MeshError::Parse {
            line: lineno + 1,
            msg,
        };
        match head {
            "v" => {
                let coords: Vec<f64> = tok
                    .take(3)
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| parse_err(format!("bad vertex coordinate: {e}")))?;
                if coords.len() != 3 {
                    return Err(parse_err("vertex needs three coordinates".into()));
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            "f" => {
                let mut idx = Vec::new();
                for t in tok {
                    let first = t.split('/').next().unwrap_or("");
                    let raw_idx: i64 = first
                        .parse()
                        .map_err(|_| parse_err(format!("bad face index `{t}`")))?;
                    let resolved = match raw_idx {
                        i if i > 0 => i - 1,
                        i if i < 0 => vertices.len() as i64 + i,
                        _ => return Err(parse_err("face index 0 is invalid in OBJ".into())),
                    };
                    idx.push((raw_idx, resolved));
                }
                if idx.len() < 3 {
                    return Err(parse_err("face needs at least three vertices".into()));
                }
                let source_face = n_faces;
                n_faces += 1;
                for i in 1..idx.len() - 1 {
                    for &(r, v) in &[idx[0], idx[i], idx[i + 1]] {
                        corners.push((source_face, r, v));
                    }
                }
            }
            "o" | "g" => {
                if let (true, Some(n)) = (name.is_empty(), tok.next()) {
                    name = n.to_string();
                }
            }
            _ => {}
        }
    }
    if let Some(&(face, index, _)) = corners
        .iter()
        .find(|&&(_, _, v)| v < 0 || v as usize >= vertices.len())
    {
        return Err(MeshError::IndexOutOfRange {
            face,
            index,
            n_vertices: vertices.len(),
        });
    }
    let triangles = corners
        .chunks_exact(3)
        .map(|c| [c[0].2 as u32, c[1].2 as u32, c[2].2 as u32])
        .collect();
    TriangleMesh::new(name, vertices, triangles)
}

/// One point of the discretized target surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSample {
    pub id: usize,
    pub position: Point3,
    pub normal: Vec3,
    /// Surface area (m²) this sample stands for.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub grid_pitch: f64,
    samples: Vec<SurfaceSample>,
}

impl SampleSet {
    /// Validates consecutive ids, unit normals and positive weights.
    pub fn new(samples: Vec<SurfaceSample>, grid_pitch: f64) -> Result<Self, MeshError> {
        if samples.is_empty() {
            return Err(MeshError::EmptySampleSet);
        }
        for (i, s) in samples.iter().enumerate() {
            if s.id != i {
                return Err(MeshError::InvalidArgument(format!(
                    "sample at position {i} has id {}",
                    s.id
                )));
            }
            if (s.normal.norm() - 1.0).abs() > 1e-9 {
                return Err(MeshError::InvalidArgument(format!(
                    "sample {i} normal is not unit length"
                )));
            }
            if !(s.weight > 0.0) {
                return Err(MeshError::InvalidArgument(format!(
                    "sample {i} has non-positive weight"
                )));
            }
        }
        Ok(Self {
            grid_pitch,
            samples,
        })
    }

    /// Samples at the given points, all with normal +z and unit weight.
    pub fn from_points(points: &[Point3]) -> Result<Self, MeshError> {
        let samples = points
            .iter()
            .enumerate()
            .map(|(id, &position)| SurfaceSample {
                id,
                position,
                normal: Vec3::z(),
                weight: 1.0,
            })
            .collect();
        Self::new(samples, 0.0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[SurfaceSample] {
        &self.samples
    }

    pub fn get(&self, i: usize) -> &SurfaceSample {
        &self.samples[i]
    }

    pub fn positions(&self) -> impl Iterator<Item = &Point3> + '_ {
        self.samples.iter().map(|s| &s.position)
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv64::default();
        h.write_u64(self.samples.len() as u64);
        for s in &self.samples {
            h.write_point(&s.position);
            for a in 0..3 {
                h.write_f64(s.normal[a]);
            }
            h.write_f64(s.weight);
        }
        h.finish()
    }
}

/// Rasterize every retained face of `mesh` at `pitch`.
///
/// Faces whose normal has `z < -tau` are dropped, so `tau = 0` keeps
/// everything except strictly downward-facing surfaces.
pub fn sample_surface(mesh: &TriangleMesh, pitch: f64, tau: f64) -> Result<SampleSet, MeshError> {
    if !(pitch > 0.0) {
        return Err(MeshError::InvalidArgument(format!(
            "pitch must be positive, got {pitch}"
        )));
    }
    if !(-1.0..=1.0).contains(&tau) {
        return Err(MeshError::InvalidArgument(format!(
            "downward threshold must lie in [-1, 1], got {tau}"
        )));
    }
    let mut samples = Vec::new();
    for f in 0..mesh.triangles().len() {
        let normal = mesh.face_normal(f);
        if normal.z < -tau {
            continue;
        }
        let [a, b, c] = mesh.triangle(f);
        let longest = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        let n = ((longest / pitch).ceil() as usize).max(1);
        let weight = mesh.face_area(f) / (n * n) as f64;
        let (ab, ac) = (b - a, c - a);
        let inv = 1.0 / n as f64;
        let mut push = |u: f64, v: f64| {
            samples.push(SurfaceSample {
                id: samples.len(),
                position: a + ab * (u * inv) + ac * (v * inv),
                normal,
                weight,
            });
        };
        for i in 0..n {
            for j in 0..n - i {
                push(i as f64 + 1.0 / 3.0, j as f64 + 1.0 / 3.0);
                if i + j + 1 < n {
                    push(i as f64 + 2.0 / 3.0, j as f64 + 2.0 / 3.0);
                }
            }
        }
    }
    if samples.is_empty() {
        return Err(MeshError::EmptySampleSet);
    }
    Ok(SampleSet {
        grid_pitch: pitch,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    PlaneAtHeight,
    Box,
    ExplicitList,
}

/// Where sensors may be deployed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CandidateRegion {
    /// Horizontal rectangle `[x0, x1] × [y0, y1]` at height `z`.
    Plane {
        z: f64,
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
    },
    Box { bounds: Aabb },
}

impl CandidateRegion {
    pub fn kind(&self) -> RegionKind {
        match self {
            CandidateRegion::Plane { .. } => RegionKind::PlaneAtHeight,
            CandidateRegion::Box { .. } => RegionKind::Box,
        }
    }

    pub fn bounds(&self) -> Aabb {
        match *self {
            CandidateRegion::Plane { z, x0, y0, x1, y1 } => {
                Aabb::new(Point3::new(x0, y0, z), Point3::new(x1, y1, z))
            }
            CandidateRegion::Box { bounds } => bounds,
        }
    }

    pub fn plane_height(&self) -> Option<f64> {
        match *self {
            CandidateRegion::Plane { z, .. } => Some(z),
            CandidateRegion::Box { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub region_kind: RegionKind,
    positions: Vec<Point3>,
}

impl CandidateSet {
    /// Builds a set from explicit positions; exact duplicates are merged,
    /// keeping first-occurrence order.
    pub fn from_positions(
        positions: impl IntoIterator<Item = Point3>,
        region_kind: RegionKind,
    ) -> Result<Self, MeshError> {
        let mut seen = std::collections::HashSet::new();
        let mut kept = Vec::new();
        for p in positions {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(MeshError::InvalidArgument(
                    "candidate position is not finite".into(),
                ));
            }
            // +0.0 and -0.0 are the same position.
            let key = [p.x + 0.0, p.y + 0.0, p.z + 0.0].map(f64::to_bits);
            if seen.insert(key) {
                kept.push(p);
            }
        }
        if kept.is_empty() {
            return Err(MeshError::InvalidArgument(
                "candidate set must not be empty".into(),
            ));
        }
        Ok(Self {
            region_kind,
            positions: kept,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point3] {
        &self.positions
    }

    pub fn get(&self, j: usize) -> &Point3 {
        &self.positions[j]
    }

    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv64::default();
        h.write_u64(self.positions.len() as u64);
        for p in &self.positions {
            h.write_point(p);
        }
        h.finish()
    }
}

/// Lattice coordinates `lo, lo + pitch, ...` not exceeding `hi`.
pub(crate) fn axis_steps(lo: f64, hi: f64, pitch: f64) -> Vec<f64> {
    let count = ((hi - lo) / pitch + 1e-9).floor() as usize + 1;
    (0..count).map(|i| lo + i as f64 * pitch).collect()
}

/// Regular grid of candidate positions covering `region` at `pitch`.
pub fn generate_candidates(region: &CandidateRegion, pitch: f64) -> Result<CandidateSet, MeshError> {
    if !(pitch > 0.0) {
        return Err(MeshError::InvalidArgument(format!(
            "pitch must be positive, got {pitch}"
        )));
    }
    let b = region.bounds();
    if (0..3).any(|a| !(b.min[a] <= b.max[a])) {
        return Err(MeshError::InvalidArgument(
            "candidate region is empty".into(),
        ));
    }
    let xs = axis_steps(b.min.x, b.max.x, pitch);
    let ys = axis_steps(b.min.y, b.max.y, pitch);
    let zs = match region {
        CandidateRegion::Plane { z, .. } => vec![*z],
        CandidateRegion::Box { .. } => axis_steps(b.min.z, b.max.z, pitch),
    };
    let mut positions = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    for &z in &zs {
        for &y in &ys {
            for &x in &xs {
                positions.push(Point3::new(x, y, z));
            }
        }
    }
    CandidateSet::from_positions(positions, region.kind())
}
