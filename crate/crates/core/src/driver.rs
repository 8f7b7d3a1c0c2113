//! End-to-end solvers for the three problems and the two-phase pipeline.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{
    coverage_radius, farthest_point_clustering, optimum_lower_bound, ApproxError, PlaneDeployment,
};
use crate::geom::Point3;
use crate::ilp::{
    build_cumulative_model, build_feasibility_model, build_visibility_model, solve, IlpError,
    SolveLimits, SolveResult, SolveStatus,
};
use crate::mesh::{generate_candidates, CandidateRegion, MeshError, SampleSet};
use crate::model::{
    build_instance, evaluate, CoverageInstance, CoverageReport, ModelError, Placement,
    QualityKind, Weighting,
};
use crate::refine::{
    improve_quality_max, refine_grid, RefineContext, RefineError, RefineObjective,
};
use crate::visibility::{visibility_matrix, Bvh, EndpointShrink};

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Ilp(#[from] IlpError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error("coverage ratio {rho} is not reachable with {k} sensors at any radius")]
    Unachievable { k: usize, rho: f64 },
    #[error("feasibility solve at radius {radius} hit its limit before deciding")]
    Inconclusive { radius: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Result of a one-shot coverage solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageOutcome {
    pub placement: Placement,
    pub report: CoverageReport,
    pub result: SolveResult,
}

/// Problem 1: maximize the number of samples seen by at least one sensor.
pub fn solve_problem1(
    instance: &CoverageInstance,
    k: usize,
    limits: SolveLimits,
) -> Result<CoverageOutcome, DriverError> {
    let model = build_visibility_model(instance, k, Weighting::Uniform)?;
    let result = solve(&model, limits);
    let placement = result.placement.clone().unwrap_or_default();
    let report = evaluate(instance, &placement, None)?;
    Ok(CoverageOutcome {
        placement,
        report,
        result,
    })
}

/// Problem 3: maximize the number of samples whose summed quality reaches `phi`.
pub fn solve_problem3(
    instance: &CoverageInstance,
    k: usize,
    phi: f64,
    limits: SolveLimits,
) -> Result<CoverageOutcome, DriverError> {
    let model = build_cumulative_model(instance, k, phi, Weighting::Uniform)?;
    let result = solve(&model, limits);
    let placement = result.placement.clone().unwrap_or_default();
    let report = evaluate(instance, &placement, Some(phi))?;
    Ok(CoverageOutcome {
        placement,
        report,
        result,
    })
}

/// Result of the radius search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusOutcome {
    /// Smallest radius at which the coverage ratio is reachable.
    pub radius: f64,
    /// `1 / radius`, the guaranteed quality over the covered samples.
    pub min_quality: f64,
    pub placement: Placement,
    pub result: SolveResult,
    /// Number of feasibility models solved by the search.
    pub feasibility_solves: usize,
}

/// Sorted distinct sample-to-candidate distances over visible pairs.
pub fn candidate_radii(instance: &CoverageInstance) -> Vec<f64> {
    let vis = instance.vis();
    let mut radii: Vec<f64> = (0..instance.n_samples())
        .flat_map(|i| vis.visible_from(i).map(move |j| (i, j)))
        .map(|(i, j)| instance.distance(i, j))
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
}

/// Solve the feasibility model at radius `r`. `Ok(None)` means infeasible.
pub fn feasible_at(
    instance: &CoverageInstance,
    k: usize,
    r: f64,
    rho: f64,
    limits: SolveLimits,
) -> Result<Option<SolveResult>, DriverError> {
    let model = build_feasibility_model(instance, k, r, rho)?;
    let result = solve(&model, limits);
    match result.status {
        SolveStatus::Optimal => Ok(Some(result)),
        SolveStatus::Infeasible => Ok(None),
        _ => Err(DriverError::Inconclusive { radius: r }),
    }
}

/// Problem 2: the smallest radius `r` such that `k` sensors put a `rho`
/// fraction of all samples within `r` of a visible sensor. Binary search
/// over [`candidate_radii`], so the answer is exact.
pub fn solve_problem2(
    instance: &CoverageInstance,
    k: usize,
    rho: f64,
    limits: SolveLimits,
) -> Result<RadiusOutcome, DriverError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(DriverError::InvalidArgument(format!(
            "coverage ratio must lie in [0, 1], got {rho}"
        )));
    }
    let radii = candidate_radii(instance);
    let Some(&r_max) = radii.last() else {
        return Err(DriverError::Unachievable { k, rho });
    };
    let mut solves = 1;
    let Some(mut best) = feasible_at(instance, k, r_max, rho, limits)? else {
        return Err(DriverError::Unachievable { k, rho });
    };
    let (mut lo, mut hi) = (0, radii.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        solves += 1;
        match feasible_at(instance, k, radii[mid], rho, limits)? {
            Some(res) => {
                hi = mid;
                best = res;
            }
            None => lo = mid + 1,
        }
    }
    let radius = radii[hi];
    Ok(RadiusOutcome {
        radius,
        min_quality: 1.0 / radius,
        placement: best.placement.clone().unwrap_or_default(),
        result: best,
        feasibility_solves: solves,
    })
}

/// Which problem a pipeline run targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "kebab-case")]
pub enum Problem {
    /// Problem 1.
    Visibility,
    /// Problem 2. With `relaxed`, visibility is ignored and phase 1 is
    /// farthest-point clustering on the sensor plane (all samples covered).
    Radius { rho: f64, relaxed: bool },
    /// Problem 3.
    Threshold { phi: f64 },
}

/// Geometry shared by both phases.
pub struct SceneHandles<'a> {
    pub bvh: &'a Bvh,
    pub samples: &'a SampleSet,
    pub region: CandidateRegion,
    pub shrink: EndpointShrink,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoPhaseConfig {
    pub problem: Problem,
    pub k: usize,
    pub coarse_pitch: f64,
    pub fine_pitch: f64,
    /// Passes of the fine-grid refinement.
    pub rounds: usize,
    pub limits: SolveLimits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub method: String,
    /// Covered count (Problems 1 and 3) or radius (Problem 2).
    pub objective: f64,
    /// Best proven bound on the phase's optimum, when one is known.
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    /// Seconds.
    pub elapsed: f64,
    pub positions: Vec<Point3>,
    /// Proven ratio between this phase's radius and the continuous optimum.
    pub certified_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub problem: Problem,
    pub k: usize,
    pub coarse_pitch: f64,
    pub fine_pitch: f64,
    pub n_samples: usize,
    pub n_candidates: usize,
    pub phase1: PhaseReport,
    pub phase2: PhaseReport,
}

fn positions_of(instance: &CoverageInstance, placement: &Placement) -> Vec<Point3> {
    placement
        .selected
        .iter()
        .map(|&j| *instance.candidates().get(j))
        .collect()
}

/// Coarse global solve followed by local improvement.
///
/// Problems 1 and 3 and the visibility-aware Problem 2 solve the ILP on
/// candidates at `coarse_pitch`, then move sensors on the `fine_pitch`
/// lattice within one coarse cell. The relaxed Problem 2 runs farthest-point
/// clustering and then plane-constrained re-centering, and reports the
/// certified factor of both phases.
pub fn two_phase(
    scene: &SceneHandles<'_>,
    config: &TwoPhaseConfig,
) -> Result<PipelineReport, DriverError> {
    if !(config.fine_pitch > 0.0 && config.coarse_pitch >= config.fine_pitch) {
        return Err(DriverError::InvalidArgument(format!(
            "need coarse pitch {} >= fine pitch {} > 0",
            config.coarse_pitch, config.fine_pitch
        )));
    }
    if let Problem::Radius { relaxed: true, .. } = config.problem {
        return relaxed_radius_pipeline(scene, config);
    }

    let t = Instant::now();
    let cands = generate_candidates(&scene.region, config.coarse_pitch)?;
    let vis = visibility_matrix(scene.bvh, scene.samples, &cands, scene.shrink);
    let kind = match config.problem {
        Problem::Threshold { .. } => QualityKind::LambertInverseSquare,
        _ => QualityKind::Visibility,
    };
    let n_candidates = cands.len();
    let instance = build_instance(scene.samples.clone(), cands, vis, kind)?;
    let (objective, result, placement, refine_objective) = match config.problem {
        Problem::Visibility => {
            let out = solve_problem1(&instance, config.k, config.limits)?;
            let obj = out.report.covered_ids.len() as f64;
            (obj, out.result, out.placement, RefineObjective::Visibility)
        }
        Problem::Threshold { phi } => {
            let out = solve_problem3(&instance, config.k, phi, config.limits)?;
            let obj = out.report.covered_ids.len() as f64;
            (obj, out.result, out.placement, RefineObjective::Threshold { phi })
        }
        Problem::Radius { rho, .. } => {
            let out = solve_problem2(&instance, config.k, rho, config.limits)?;
            (out.radius, out.result, out.placement, RefineObjective::Radius { rho })
        }
    };
    let is_radius = matches!(config.problem, Problem::Radius { .. });
    let phase1 = PhaseReport {
        method: "ilp".into(),
        objective,
        bound: (!is_radius).then_some(result.dual_bound),
        gap: (!is_radius).then_some(result.gap),
        elapsed: t.elapsed().as_secs_f64(),
        positions: positions_of(&instance, &placement),
        certified_factor: None,
    };

    let t = Instant::now();
    let ctx = RefineContext {
        bvh: scene.bvh,
        samples: scene.samples,
        region: scene.region,
        objective: refine_objective,
        shrink: scene.shrink,
    };
    let refined = refine_grid(
        &ctx,
        &phase1.positions,
        config.fine_pitch,
        config.coarse_pitch,
        config.rounds,
    )?;
    let phase2 = PhaseReport {
        method: "grid".into(),
        objective: refined.objective_after,
        bound: None,
        gap: None,
        elapsed: t.elapsed().as_secs_f64(),
        positions: refined.positions,
        certified_factor: None,
    };
    Ok(PipelineReport {
        problem: config.problem,
        k: config.k,
        coarse_pitch: config.coarse_pitch,
        fine_pitch: config.fine_pitch,
        n_samples: scene.samples.len(),
        n_candidates,
        phase1,
        phase2,
    })
}

fn relaxed_radius_pipeline(
    scene: &SceneHandles<'_>,
    config: &TwoPhaseConfig,
) -> Result<PipelineReport, DriverError> {
    let Some(height) = scene.region.plane_height() else {
        return Err(DriverError::InvalidArgument(
            "the relaxed radius pipeline needs a plane sensor region".into(),
        ));
    };
    let plane = PlaneDeployment::for_samples(height, scene.samples);

    let t = Instant::now();
    let centers = farthest_point_clustering(scene.samples, config.k, &plane)?;
    let r_c = coverage_radius(&centers, scene.samples)?;
    // Every optimum is at least this large, so dividing by it certifies a factor.
    let lower = optimum_lower_bound(r_c, plane.clearance);
    let phase1 = PhaseReport {
        method: "fpc".into(),
        objective: r_c,
        bound: Some(lower),
        gap: None,
        elapsed: t.elapsed().as_secs_f64(),
        positions: centers.clone(),
        certified_factor: Some(r_c / lower),
    };

    let t = Instant::now();
    let improved = improve_quality_max(scene.samples, &centers, &plane)?;
    let phase2 = PhaseReport {
        method: "onecenter".into(),
        objective: improved.r_new,
        bound: Some(lower),
        gap: None,
        elapsed: t.elapsed().as_secs_f64(),
        positions: improved.positions,
        certified_factor: Some(improved.r_new / lower),
    };
    Ok(PipelineReport {
        problem: config.problem,
        k: config.k,
        coarse_pitch: config.coarse_pitch,
        fine_pitch: config.fine_pitch,
        n_samples: scene.samples.len(),
        n_candidates: 0,
        phase1,
        phase2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{CandidateSet, RegionKind};
    use crate::visibility::VisibilityMatrix;

    fn line_instance() -> CoverageInstance {
        let samples = SampleSet::from_points(&[
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(4.0, 0.0, 0.0),
            Point3::new(8.0, 0.0, 0.0),
        ])
        .unwrap();
        let cands = CandidateSet::from_positions(
            [Point3::new(0.0, 0.0, 0.0), Point3::new(8.0, 0.0, 0.0)],
            RegionKind::ExplicitList,
        )
        .unwrap();
        let vis = VisibilityMatrix::all_visible(&samples, &cands);
        build_instance(samples, cands, vis, QualityKind::Visibility).unwrap()
    }

    #[test]
    fn radius_search_line() {
        let inst = line_instance();
        assert_eq!(candidate_radii(&inst), vec![0.0, 4.0, 8.0]);
        let out = solve_problem2(&inst, 2, 1.0, SolveLimits::default()).unwrap();
        assert_eq!(out.radius, 4.0);
        assert_eq!(out.min_quality, 0.25);
        let out = solve_problem2(&inst, 1, 1.0, SolveLimits::default()).unwrap();
        assert_eq!(out.radius, 8.0);
        let out = solve_problem2(&inst, 1, 0.0, SolveLimits::default()).unwrap();
        assert_eq!(out.radius, 0.0);
    }

    #[test]
    fn unreachable_ratio() {
        let samples = SampleSet::from_points(&[Point3::origin(), Point3::new(1.0, 0.0, 0.0)]).unwrap();
        let cands =
            CandidateSet::from_positions([Point3::new(0.0, 0.0, 1.0)], RegionKind::ExplicitList)
                .unwrap();
        let vis = VisibilityMatrix::from_rows(&[vec![true], vec![false]], &samples, &cands);
        let inst = build_instance(samples, cands, vis, QualityKind::InverseDistance).unwrap();
        assert!(matches!(
            solve_problem2(&inst, 1, 1.0, SolveLimits::default()),
            Err(DriverError::Unachievable { .. })
        ));
        let out = solve_problem2(&inst, 1, 0.5, SolveLimits::default()).unwrap();
        assert_eq!(out.radius, 1.0);
    }

    #[test]
    fn problem1_budget_extremes() {
        let inst = line_instance();
        let out = solve_problem1(&inst, 0, SolveLimits::default()).unwrap();
        assert_eq!(out.report.ratio(), 0.0);
        let out = solve_problem1(&inst, 2, SolveLimits::default()).unwrap();
        assert_eq!(out.report.ratio(), 1.0);
    }
}
