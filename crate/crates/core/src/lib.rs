//! Sensor placement for covering a sampled surface in a 3D scene.
//!
//! The pipeline runs in stages:
//!
//! 1. **mesh** – load or generate a triangle mesh, sample the target surface,
//!    lay out candidate sensor positions.
//! 2. **visibility** – BVH-accelerated occlusion tests and the pairwise
//!    sample × candidate visibility matrix.
//! 3. **model** – quality functions and the three coverage models
//!    (visibility, best single sensor, cumulative exposure).
//! 4. **ilp** – 0/1 models of the three problems, an exact branch-and-bound
//!    solver and CPLEX-LP export.
//! 5. **approx** – farthest-point clustering for the visibility-relaxed
//!    radius problem and its provable radius bound.
//! 6. **refine** – local improvement: plane-constrained minimum enclosing
//!    sphere and fine-grid sensor moves.
//! 7. **driver** – end-to-end solvers and the two-phase pipeline.

pub mod approx;
pub mod cli;
pub mod driver;
pub mod export;
pub mod geom;
pub mod ilp;
pub mod mesh;
pub mod model;
pub mod refine;
pub mod scene;
pub mod visibility;

pub use geom::{Aabb, Point3, Vec3};
pub use mesh::{
    generate_candidates, load_obj, parse_obj, sample_surface, CandidateRegion, CandidateSet,
    SampleSet, SurfaceSample, TriangleMesh,
};
pub use model::{build_instance, evaluate, CoverageInstance, CoverageReport, Placement, QualityKind};
pub use visibility::{visibility_matrix, Bvh, EndpointShrink, VisibilityMatrix};
