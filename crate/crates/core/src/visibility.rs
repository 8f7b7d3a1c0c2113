//! Segment occlusion against a triangle mesh and the pairwise
//! sample × candidate visibility matrix.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::geom::{Aabb, Point3, Vec3};
use crate::mesh::{CandidateSet, SampleSet, TriangleMesh};

pub const LEAF_SIZE: usize = 4;
pub const SPVM_MAGIC: [u8; 4] = *b"SPVM";
pub const SPVM_VERSION: u32 = 1;
const SPVM_HEADER_LEN: usize = 4 + 4 + 8 * 4;

#[derive(Debug, Error)]
pub enum VisibilityError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a visibility matrix file (bad magic)")]
    BadMagic,
    #[error("unsupported visibility matrix version {0}")]
    Version(u32),
    #[error("visibility matrix file is truncated")]
    Truncated,
    #[error(
        "visibility matrix is stale: {what} hash {found:#018x} does not match current {expected:#018x}; \
         re-run the `visibility` step with the current inputs"
    )]
    Stale {
        what: &'static str,
        expected: u64,
        found: u64,
    },
}

/// How far each segment endpoint is pulled inward before testing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointShrink {
    /// Fraction of the segment length.
    Relative(f64),
    /// Fixed distance in meters.
    Absolute(f64),
}

impl Default for EndpointShrink {
    fn default() -> Self {
        EndpointShrink::Relative(1e-6)
    }
}

impl EndpointShrink {
    fn amount(self, length: f64) -> f64 {
        match self {
            EndpointShrink::Relative(f) => f * length,
            EndpointShrink::Absolute(e) => e,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: u32, count: u32 },
    Inner { bounds: Aabb, left: u32, right: u32 },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Bounding-volume hierarchy over the triangles of a mesh.
///
/// Built top-down by median split on the longest axis of each node box,
/// ordering triangles by centroid coordinate and then by index, so the
/// tree is a pure function of the mesh.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    triangles: Vec<[Point3; 3]>,
    pad: f64,
}

impl Bvh {
    pub fn build(mesh: &TriangleMesh) -> Self {
        let triangles: Vec<[Point3; 3]> =
            (0..mesh.triangles().len()).map(|f| mesh.triangle(f)).collect();
        let scale = mesh
            .vertices()
            .iter()
            .map(|v| v.coords.amax())
            .fold(1.0_f64, f64::max);
        let mut bvh = Bvh {
            nodes: Vec::new(),
            order: (0..triangles.len() as u32).collect(),
            triangles,
            pad: 1e-9 * scale,
        };
        if !bvh.triangles.is_empty() {
            let centroids: Vec<Point3> = bvh
                .triangles
                .iter()
                .map(|[a, b, c]| Point3::from((a.coords + b.coords + c.coords) / 3.0))
                .collect();
            let n = bvh.order.len();
            bvh.build_node(&centroids, 0, n);
        }
        bvh
    }

    fn tri_bounds(&self, t: u32) -> Aabb {
        Aabb::from_points(self.triangles[t as usize].iter())
    }

    fn build_node(&mut self, centroids: &[Point3], start: usize, end: usize) -> u32 {
        let mut bounds = Aabb::empty();
        for &t in &self.order[start..end] {
            bounds = bounds.union(&self.tri_bounds(t));
        }
        let id = self.nodes.len() as u32;
        let count = end - start;
        if count <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                bounds,
                start: start as u32,
                count: count as u32,
            });
            return id;
        }
        // Placeholder, patched once the children exist.
        self.nodes.push(Node::Leaf {
            bounds,
            start: 0,
            count: 0,
        });
        let axis = bounds.longest_axis();
        self.order[start..end].sort_by(|&a, &b| {
            centroids[a as usize][axis]
                .total_cmp(&centroids[b as usize][axis])
                .then(a.cmp(&b))
        });
        let mid = start + count / 2;
        let left = self.build_node(centroids, start, mid);
        let right = self.build_node(centroids, mid, end);
        self.nodes[id as usize] = Node::Inner {
            bounds,
            left,
            right,
        };
        id
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Root box, or `None` for an empty mesh.
    pub fn root_bounds(&self) -> Option<Aabb> {
        self.nodes.first().map(|n| *n.bounds())
    }

    /// Triangle indices grouped by leaf, in depth-first order.
    pub fn leaves(&self) -> Vec<Vec<u32>> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { start, count, .. } => {
                    Some(self.order[start as usize..(start + count) as usize].to_vec())
                }
                Node::Inner { .. } => None,
            })
            .collect()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: u32) -> usize {
            match nodes[i as usize] {
                Node::Leaf { .. } => 0,
                Node::Inner { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        if self.nodes.is_empty() {
            0
        } else {
            go(&self.nodes, 0)
        }
    }

    /// Checks that every inner box contains its children's boxes.
    pub fn boxes_nested(&self) -> bool {
        self.nodes.iter().all(|n| match n {
            Node::Leaf { .. } => true,
            Node::Inner {
                bounds,
                left,
                right,
            } => {
                bounds.contains_box(self.nodes[*left as usize].bounds())
                    && bounds.contains_box(self.nodes[*right as usize].bounds())
            }
        })
    }

    /// True iff the open segment between `a` and `b`, shrunk by `shrink` at
    /// both ends, crosses a mesh triangle.
    pub fn segment_occluded(&self, a: &Point3, b: &Point3, shrink: EndpointShrink) -> bool {
        match ShrunkSegment::new(a, b, shrink) {
            Some(seg) => self.any_hit(&seg),
            None => false,
        }
    }

    /// Same contract as [`Bvh::segment_occluded`] but tests every triangle.
    pub fn segment_occluded_linear(&self, a: &Point3, b: &Point3, shrink: EndpointShrink) -> bool {
        match ShrunkSegment::new(a, b, shrink) {
            Some(seg) => self.triangles.iter().any(|t| seg.hits(t)),
            None => false,
        }
    }

    fn any_hit(&self, seg: &ShrunkSegment) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut stack = Vec::with_capacity(64);
        stack.push(0u32);
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i as usize];
            if !seg.overlaps_box(node.bounds(), self.pad) {
                continue;
            }
            match *node {
                Node::Leaf { start, count, .. } => {
                    let tris = &self.order[start as usize..(start + count) as usize];
                    if tris.iter().any(|&t| seg.hits(&self.triangles[t as usize])) {
                        return true;
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        false
    }
}

/// Segment in canonical (lexicographically ordered) direction with the
/// endpoint shrink applied. Canonical order makes the test symmetric.
struct ShrunkSegment {
    origin: Point3,
    dir: Vec3,
    inv_dir: Vec3,
    // Watertight shear constants.
    kx: usize,
    ky: usize,
    kz: usize,
    sx: f64,
    sy: f64,
    sz: f64,
}

fn lex_le(a: &Point3, b: &Point3) -> bool {
    (a.x, a.y, a.z) <= (b.x, b.y, b.z)
}

impl ShrunkSegment {
    fn new(a: &Point3, b: &Point3, shrink: EndpointShrink) -> Option<Self> {
        let (p, q) = if lex_le(a, b) { (a, b) } else { (b, a) };
        let d = q - p;
        let len = d.norm();
        let eps = shrink.amount(len).max(0.0);
        if !(len > 2.0 * eps) {
            return None;
        }
        let u = d / len;
        let origin = p + u * eps;
        let dir = (q - u * eps) - origin;

        let mut kz = 0;
        for axis in 1..3 {
            if dir[axis].abs() > dir[kz].abs() {
                kz = axis;
            }
        }
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if dir[kz] < 0.0 {
            std::mem::swap(&mut kx, &mut ky);
        }
        Some(Self {
            origin,
            dir,
            inv_dir: dir.map(|c| 1.0 / c),
            kx,
            ky,
            kz,
            sx: dir[kx] / dir[kz],
            sy: dir[ky] / dir[kz],
            sz: 1.0 / dir[kz],
        })
    }

    /// Conservative slab test against a box padded by `pad`.
    fn overlaps_box(&self, b: &Aabb, pad: f64) -> bool {
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for a in 0..3 {
            let lo = b.min[a] - pad;
            let hi = b.max[a] + pad;
            if self.dir[a] == 0.0 {
                if self.origin[a] < lo || self.origin[a] > hi {
                    return false;
                }
                continue;
            }
            let ta = (lo - self.origin[a]) * self.inv_dir[a];
            let tb = (hi - self.origin[a]) * self.inv_dir[a];
            let (near, far) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 * (1.0 + 1e-12) + 1e-15 {
                return false;
            }
        }
        true
    }

    /// Watertight segment/triangle test; a hit needs parameter `t` strictly
    /// inside `(0, 1)`. Points on a shared edge report a hit for both faces,
    /// which is harmless for a boolean occlusion query.
    fn hits(&self, tri: &[Point3; 3]) -> bool {
        let (kx, ky, kz) = (self.kx, self.ky, self.kz);
        let a = tri[0] - self.origin;
        let b = tri[1] - self.origin;
        let c = tri[2] - self.origin;
        let ax = a[kx] - self.sx * a[kz];
        let ay = a[ky] - self.sy * a[kz];
        let bx = b[kx] - self.sx * b[kz];
        let by = b[ky] - self.sy * b[kz];
        let cx = c[kx] - self.sx * c[kz];
        let cy = c[ky] - self.sy * c[kz];
        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;
        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return false;
        }
        let det = u + v + w;
        if det == 0.0 {
            return false;
        }
        let t_scaled = u * (self.sz * a[kz]) + v * (self.sz * b[kz]) + w * (self.sz * c[kz]);
        let t = t_scaled / det;
        t > 0.0 && t < 1.0
    }
}

/// Free-function form of [`Bvh::build`].
pub fn build_bvh(mesh: &TriangleMesh) -> Bvh {
    Bvh::build(mesh)
}

/// Free-function form of [`Bvh::segment_occluded`].
pub fn segment_occluded(bvh: &Bvh, a: &Point3, b: &Point3, shrink: EndpointShrink) -> bool {
    bvh.segment_occluded(a, b, shrink)
}

/// N × M bit matrix, bit `(i, j)` set iff sample `i` sees candidate `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibilityMatrix {
    n_samples: usize,
    n_candidates: usize,
    pub sample_hash: u64,
    pub candidate_hash: u64,
    words_per_row: usize,
    words: Vec<u64>,
}

impl VisibilityMatrix {
    pub fn new_filled(
        n_samples: usize,
        n_candidates: usize,
        value: bool,
        sample_hash: u64,
        candidate_hash: u64,
    ) -> Self {
        let words_per_row = n_candidates.div_ceil(64);
        let mut m = Self {
            n_samples,
            n_candidates,
            sample_hash,
            candidate_hash,
            words_per_row,
            words: vec![0; words_per_row * n_samples],
        };
        if value {
            for i in 0..n_samples {
                for j in 0..n_candidates {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// All-visible matrix bound to the given sets.
    pub fn all_visible(samples: &SampleSet, candidates: &CandidateSet) -> Self {
        Self::new_filled(
            samples.len(),
            candidates.len(),
            true,
            samples.content_hash(),
            candidates.content_hash(),
        )
    }

    /// Build from rows of booleans, bound to the given sets.
    pub fn from_rows(
        rows: &[Vec<bool>],
        samples: &SampleSet,
        candidates: &CandidateSet,
    ) -> Self {
        let mut m = Self::new_filled(
            samples.len(),
            candidates.len(),
            false,
            samples.content_hash(),
            candidates.content_hash(),
        );
        assert_eq!(rows.len(), samples.len(), "row count mismatch");
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), candidates.len(), "column count mismatch");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n_samples && j < self.n_candidates);
        self.words[i * self.words_per_row + j / 64] >> (j % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let w = &mut self.words[i * self.words_per_row + j / 64];
        let mask = 1u64 << (j % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Candidates visible from sample `i`, ascending.
    pub fn visible_from(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_candidates).filter(move |&j| self.get(i, j))
    }

    /// Samples that see candidate `j`, ascending.
    pub fn column(&self, j: usize) -> Vec<usize> {
        (0..self.n_samples).filter(|&i| self.get(i, j)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Fails with [`VisibilityError::Stale`] unless the stored hashes match.
    pub fn check_matches(
        &self,
        samples: &SampleSet,
        candidates: &CandidateSet,
    ) -> Result<(), VisibilityError> {
        let s = samples.content_hash();
        if s != self.sample_hash {
            return Err(VisibilityError::Stale {
                what: "sample set",
                expected: s,
                found: self.sample_hash,
            });
        }
        let c = candidates.content_hash();
        if c != self.candidate_hash {
            return Err(VisibilityError::Stale {
                what: "candidate set",
                expected: c,
                found: self.candidate_hash,
            });
        }
        Ok(())
    }

    /// SPVM encoding: little-endian header followed by the row-major bit
    /// stream (bit `i * M + j`, least significant bit first in each byte).
    pub fn to_bytes(&self) -> Vec<u8> {
        let total = self.n_samples * self.n_candidates;
        let mut out = Vec::with_capacity(SPVM_HEADER_LEN + total.div_ceil(8));
        out.extend_from_slice(&SPVM_MAGIC);
        out.extend_from_slice(&SPVM_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n_samples as u64).to_le_bytes());
        out.extend_from_slice(&(self.n_candidates as u64).to_le_bytes());
        out.extend_from_slice(&self.sample_hash.to_le_bytes());
        out.extend_from_slice(&self.candidate_hash.to_le_bytes());
        let mut bits = vec![0u8; total.div_ceil(8)];
        for i in 0..self.n_samples {
            for j in 0..self.n_candidates {
                if self.get(i, j) {
                    let k = i * self.n_candidates + j;
                    bits[k / 8] |= 1 << (k % 8);
                }
            }
        }
        out.extend_from_slice(&bits);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, VisibilityError> {
        if bytes.len() < 4 {
            return Err(VisibilityError::Truncated);
        }
        if bytes[..4] != SPVM_MAGIC {
            return Err(VisibilityError::BadMagic);
        }
        if bytes.len() < SPVM_HEADER_LEN {
            return Err(VisibilityError::Truncated);
        }
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != SPVM_VERSION {
            return Err(VisibilityError::Version(version));
        }
        let n = u64_at(8) as usize;
        let m = u64_at(16) as usize;
        let total = n.checked_mul(m).ok_or(VisibilityError::Truncated)?;
        let body = &bytes[SPVM_HEADER_LEN..];
        if body.len() < total.div_ceil(8) {
            return Err(VisibilityError::Truncated);
        }
        let mut vm = Self::new_filled(n, m, false, u64_at(24), u64_at(32));
        for i in 0..n {
            for j in 0..m {
                let k = i * m + j;
                if body[k / 8] >> (k % 8) & 1 == 1 {
                    vm.set(i, j, true);
                }
            }
        }
        Ok(vm)
    }

    pub fn write(&self, path: &Path) -> Result<(), VisibilityError> {
        let io = |source| VisibilityError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut f = std::fs::File::create(path).map_err(io)?;
        f.write_all(&self.to_bytes()).map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self, VisibilityError> {
        let io = |source| VisibilityError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut buf = Vec::new();
        std::fs::File::open(path)
            .map_err(io)?
            .read_to_end(&mut buf)
            .map_err(io)?;
        Self::from_bytes(&buf)
    }
}

/// Visibility of every candidate from every sample. Rows are computed in
/// parallel; the result does not depend on the schedule.
pub fn visibility_matrix(
    bvh: &Bvh,
    samples: &SampleSet,
    candidates: &CandidateSet,
    shrink: EndpointShrink,
) -> VisibilityMatrix {
    let rows: Vec<Vec<bool>> = samples
        .samples()
        .par_iter()
        .map(|s| {
            candidates
                .positions()
                .iter()
                .map(|c| !bvh.segment_occluded(&s.position, c, shrink))
                .collect()
        })
        .collect();
    VisibilityMatrix::from_rows(&rows, samples, candidates)
}

/// Visibility of a single position from every sample (one matrix column).
pub fn visibility_column(
    bvh: &Bvh,
    samples: &SampleSet,
    position: &Point3,
    shrink: EndpointShrink,
) -> Vec<bool> {
    samples
        .samples()
        .iter()
        .map(|s| !bvh.segment_occluded(&s.position, position, shrink))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::RegionKind;

    fn p(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z)
    }

    fn single_triangle() -> TriangleMesh {
        TriangleMesh::new(
            "tri",
            vec![p(-1.0, -1.0, 1.0), p(1.0, -1.0, 1.0), p(0.0, 1.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn single_triangle_is_one_leaf() {
        let bvh = Bvh::build(&single_triangle());
        assert_eq!(bvh.leaves(), vec![vec![0]]);
        assert_eq!(bvh.depth(), 0);
    }

    #[test]
    fn disjoint_triangles_partitioned() {
        let mut v = Vec::new();
        let mut t = Vec::new();
        for k in 0..8 {
            let x = 3.0 * k as f64;
            let base = v.len() as u32;
            v.extend([p(x, 0.0, 0.0), p(x + 1.0, 0.0, 0.0), p(x, 1.0, 0.0)]);
            t.push([base, base + 1, base + 2]);
        }
        let mesh = TriangleMesh::new("eight", v, t).unwrap();
        let bvh = Bvh::build(&mesh);
        assert!(bvh.depth() >= 1);
        let mut all: Vec<u32> = bvh.leaves().concat();
        all.sort();
        assert_eq!(all, (0..8).collect::<Vec<_>>());
        assert_eq!(bvh.root_bounds().unwrap(), mesh.bounds());
        assert!(bvh.boxes_nested());
    }

    #[test]
    fn crossing_and_disjoint_segments() {
        let bvh = Bvh::build(&single_triangle());
        let e = EndpointShrink::default();
        assert!(bvh.segment_occluded(&p(0.0, 0.0, 0.0), &p(0.0, 0.0, 2.0), e));
        assert!(!bvh.segment_occluded(&p(5.0, 5.0, 0.0), &p(5.0, 5.0, 2.0), e));
    }

    #[test]
    fn endpoint_on_vertex_is_not_contact() {
        let bvh = Bvh::build(&single_triangle());
        let e = EndpointShrink::default();
        assert!(!bvh.segment_occluded(&p(1.0, -1.0, 1.0), &p(1.0, -1.0, 3.0), e));
        // Also when the segment starts inside the face.
        assert!(!bvh.segment_occluded(&p(0.0, 0.0, 1.0), &p(0.3, 0.2, 3.0), e));
    }

    #[test]
    fn zero_shrink_still_excludes_endpoints() {
        let bvh = Bvh::build(&single_triangle());
        assert!(!bvh.segment_occluded(
            &p(0.0, 0.0, 1.0),
            &p(0.0, 0.0, 3.0),
            EndpointShrink::Absolute(0.0)
        ));
    }

    #[test]
    fn empty_mesh_sees_everything() {
        let bvh = Bvh::build(&TriangleMesh::empty("void"));
        let samples = SampleSet::from_points(&[p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0)]).unwrap();
        let cands =
            CandidateSet::from_positions([p(0.0, 0.0, 2.0), p(3.0, 3.0, 3.0)], RegionKind::ExplicitList)
                .unwrap();
        let vm = visibility_matrix(&bvh, &samples, &cands, EndpointShrink::default());
        assert_eq!(vm.count_ones(), 4);
    }

    #[test]
    fn wall_blocks_everything() {
        let wall = TriangleMesh::new(
            "wall",
            vec![p(-10.0, -10.0, 1.0), p(10.0, -10.0, 1.0), p(10.0, 10.0, 1.0), p(-10.0, 10.0, 1.0)],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let bvh = Bvh::build(&wall);
        let samples =
            SampleSet::from_points(&[p(0.0, 0.0, 0.0), p(1.0, 2.0, 0.0), p(-3.0, 1.0, 0.5)]).unwrap();
        let cands = CandidateSet::from_positions(
            [p(0.0, 0.0, 2.0), p(5.0, -2.0, 3.0)],
            RegionKind::ExplicitList,
        )
        .unwrap();
        let vm = visibility_matrix(&bvh, &samples, &cands, EndpointShrink::default());
        assert_eq!(vm.count_ones(), 0);
    }

    #[test]
    fn spvm_layout_is_row_major_lsb_first() {
        let samples = SampleSet::from_points(&[p(0.0, 0.0, 0.0), p(1.0, 0.0, 0.0)]).unwrap();
        let cands = CandidateSet::from_positions(
            [p(0.0, 0.0, 1.0), p(0.0, 1.0, 1.0), p(1.0, 1.0, 1.0)],
            RegionKind::ExplicitList,
        )
        .unwrap();
        let vm = VisibilityMatrix::from_rows(
            &[vec![true, false, true], vec![false, true, true]],
            &samples,
            &cands,
        );
        let bytes = vm.to_bytes();
        assert_eq!(&bytes[..4], b"SPVM");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[16..24].try_into().unwrap()), 3);
        // bits 0, 2, 4, 5 -> 0b0011_0101
        assert_eq!(&bytes[40..], &[0b0011_0101]);
        let back = VisibilityMatrix::from_bytes(&bytes).unwrap();
        assert_eq!(back, vm);
        back.check_matches(&samples, &cands).unwrap();
    }

    #[test]
    fn spvm_rejects_garbage() {
        assert!(matches!(
            VisibilityMatrix::from_bytes(b"NOPE0000"),
            Err(VisibilityError::BadMagic)
        ));
        let samples = SampleSet::from_points(&[p(0.0, 0.0, 0.0)]).unwrap();
        let cands = CandidateSet::from_positions([p(0.0, 0.0, 1.0)], RegionKind::ExplicitList).unwrap();
        let mut bytes = VisibilityMatrix::all_visible(&samples, &cands).to_bytes();
        bytes.pop();
        assert!(matches!(
            VisibilityMatrix::from_bytes(&bytes),
            Err(VisibilityError::Truncated)
        ));
    }

    #[test]
    fn stale_hash_detected() {
        let samples = SampleSet::from_points(&[p(0.0, 0.0, 0.0)]).unwrap();
        let cands = CandidateSet::from_positions([p(0.0, 0.0, 1.0)], RegionKind::ExplicitList).unwrap();
        let vm = VisibilityMatrix::all_visible(&samples, &cands);
        let moved = SampleSet::from_points(&[p(0.0, 0.0, 0.1)]).unwrap();
        assert!(matches!(
            vm.check_matches(&moved, &cands),
            Err(VisibilityError::Stale { what: "sample set", .. })
        ));
    }
}
