//! The three 0/1 coverage models, an exact branch-and-bound solver for
//! them, an exhaustive oracle and CPLEX-LP export.

mod brute;
mod lp_format;
mod model;
mod solver;

use thiserror::Error;

pub use brute::{binomial, brute_force_solve, ProblemParams, BRUTE_FORCE_CAP};
pub use lp_format::{export_lp, format_coef, to_lp_string};
pub use model::{
    build_cumulative_model, build_feasibility_model, build_visibility_model, ratio_rhs, CoverRow,
    IlpModel, LinearRow, ModelKind, Sense, Var,
};
pub use solver::{solve, SolveLimits, SolveResult, SolveStatus};

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum IlpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("brute force would enumerate {subsets} subsets (cap {BRUTE_FORCE_CAP})")]
    TooLarge { subsets: u128 },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point3;
    use crate::mesh::{CandidateSet, RegionKind, SampleSet};
    use crate::model::{build_instance, CoverageInstance, QualityKind, Weighting};
    use crate::visibility::VisibilityMatrix;

    /// Instance from a visibility table; geometry is a line of samples
    /// under a row of candidates.
    fn vis_instance(rows: &[Vec<bool>]) -> CoverageInstance {
        let n = rows.len();
        let m = rows[0].len();
        let samples = SampleSet::from_points(
            &(0..n).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect::<Vec<_>>(),
        )
        .unwrap();
        let cands = CandidateSet::from_positions(
            (0..m).map(|j| Point3::new(j as f64, 0.0, 1.0)),
            RegionKind::ExplicitList,
        )
        .unwrap();
        let vis = VisibilityMatrix::from_rows(rows, &samples, &cands);
        build_instance(samples, cands, vis, QualityKind::Visibility).unwrap()
    }

    /// c1 -> {o1, o2}, c2 -> {o2, o3, o4}, c3 -> {o1}
    fn three_column_instance() -> CoverageInstance {
        vis_instance(&[
            vec![true, false, true],
            vec![true, true, false],
            vec![false, true, false],
            vec![false, true, false],
        ])
    }

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
    fn visibility_model_shape() {
        let inst = three_column_instance();
        let m = build_visibility_model(&inst, 1, Weighting::Uniform).unwrap();
        assert_eq!(m.n_constraints(), 5);
        assert_eq!(m.n_variables(), 7);
        assert_eq!(m.linear_rows().len(), 5);
    }

    #[test]
    fn empty_row_forces_zero() {
        let inst = vis_instance(&[vec![false, false], vec![true, false]]);
        let m = build_visibility_model(&inst, 2, Weighting::Uniform).unwrap();
        assert!(m.rows[0].terms.is_empty());
        let r = solve(&m, SolveLimits::default());
        assert_eq!(r.primal, 1.0);
    }

    #[test]
    fn full_budget_covers_every_visible_sample() {
        let inst = vis_instance(&[
            vec![true, false, false],
            vec![false, false, false],
            vec![false, true, true],
            vec![false, false, true],
        ]);
        let m = build_visibility_model(&inst, 3, Weighting::Uniform).unwrap();
        let r = solve(&m, SolveLimits::default());
        assert!(r.is_optimal());
        assert_eq!(r.primal, 3.0);
    }

    #[test]
    fn worked_example_k1_and_k2() {
        let inst = three_column_instance();
        let r = solve(
            &build_visibility_model(&inst, 1, Weighting::Uniform).unwrap(),
            SolveLimits::default(),
        );
        assert_eq!(r.primal, 3.0);
        assert_eq!(r.placement.unwrap().selected, vec![1]);
        let r = solve(
            &build_visibility_model(&inst, 2, Weighting::Uniform).unwrap(),
            SolveLimits::default(),
        );
        assert_eq!(r.primal, 4.0);
        assert_eq!(r.placement.unwrap().selected, vec![0, 1]);
        assert_eq!(r.gap, 0.0);
        assert_eq!(r.dual_bound, 4.0);
    }

    #[test]
    fn brute_force_matches_worked_example() {
        let inst = three_column_instance();
        let b = brute_force_solve(&inst, 1, ProblemParams::Visibility, Weighting::Uniform).unwrap();
        assert_eq!(b.primal, 3.0);
        assert_eq!(b.placement.unwrap().selected, vec![1]);
        let b = brute_force_solve(&inst, 0, ProblemParams::Visibility, Weighting::Uniform).unwrap();
        assert_eq!(b.primal, 0.0);
    }

    #[test]
    fn brute_force_cap() {
        let inst = vis_instance(&[vec![true; 40]]);
        assert!(matches!(
            brute_force_solve(&inst, 20, ProblemParams::Visibility, Weighting::Uniform),
            Err(IlpError::TooLarge { .. })
        ));
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn feasibility_line_examples() {
        let inst = line_instance();
        let feasible = |k, r| {
            solve(
                &build_feasibility_model(&inst, k, r, 1.0).unwrap(),
                SolveLimits::default(),
            )
            .is_optimal()
        };
        assert!(feasible(1, 8.0));
        assert!(!feasible(1, 7.9));
        assert!(feasible(2, 4.0));
        assert!(!feasible(2, 3.9));
    }

    #[test]
    fn feasibility_model_rows() {
        let inst = line_instance();
        let m = build_feasibility_model(&inst, 1, 4.0, 0.5).unwrap();
        assert_eq!(m.n_constraints(), 3 + 2);
        assert_eq!(m.ratio_rhs, Some(2));
        // sample at x = 4 reaches both candidates at distance exactly 4
        assert_eq!(m.rows[1].terms.len(), 2);
        assert!(build_feasibility_model(&inst, 1, 4.0, 1.5).is_err());
    }

    #[test]
    fn ratio_rhs_rounds_up() {
        assert_eq!(ratio_rhs(3, 1.0), 3);
        assert_eq!(ratio_rhs(5, 0.8), 4);
        assert_eq!(ratio_rhs(10, 0.81), 9);
        assert_eq!(ratio_rhs(10, 0.0), 0);
    }

    fn lambert_stack(heights: &[f64]) -> CoverageInstance {
        // One upward-facing sample at the origin, candidates straight above.
        let samples = SampleSet::from_points(&[Point3::origin()]).unwrap();
        let cands = CandidateSet::from_positions(
            heights.iter().map(|&h| Point3::new(0.0, 0.0, h)),
            RegionKind::ExplicitList,
        )
        .unwrap();
        let vis = VisibilityMatrix::all_visible(&samples, &cands);
        build_instance(samples, cands, vis, QualityKind::LambertInverseSquare).unwrap()
    }

    #[test]
    fn cumulative_insufficient_total() {
        // φ = 1/4 + 1/16 < 0.5 even with both sensors.
        let inst = lambert_stack(&[2.0, 4.0]);
        let r = solve(
            &build_cumulative_model(&inst, 2, 0.5, Weighting::Uniform).unwrap(),
            SolveLimits::default(),
        );
        assert_eq!(r.primal, 0.0);
        assert!(r.is_optimal());
    }

    #[test]
    fn cumulative_boundary_is_inclusive() {
        let inst = lambert_stack(&[2.0]);
        let r = solve(
            &build_cumulative_model(&inst, 1, 0.25, Weighting::Uniform).unwrap(),
            SolveLimits::default(),
        );
        assert_eq!(r.primal, 1.0);
    }

    #[test]
    fn cumulative_needs_two_sensors() {
        // 0.25 + 0.0625 >= 0.3 needs both.
        let inst = lambert_stack(&[2.0, 4.0]);
        let m = build_cumulative_model(&inst, 1, 0.3, Weighting::Uniform).unwrap();
        assert_eq!(solve(&m, SolveLimits::default()).primal, 0.0);
        let m = build_cumulative_model(&inst, 2, 0.3, Weighting::Uniform).unwrap();
        assert_eq!(solve(&m, SolveLimits::default()).primal, 1.0);
        assert!(build_cumulative_model(&inst, 2, 0.0, Weighting::Uniform).is_err());
    }

    #[test]
    fn wrong_kind_rejected() {
        let inst = line_instance();
        assert!(build_cumulative_model(&inst, 1, 0.1, Weighting::Uniform).is_err());
    }

    #[test]
    fn node_limit_reports_time_limit_status() {
        let rows: Vec<Vec<bool>> = (0..30)
            .map(|i| (0..12).map(|j| (i * 7 + j * 3) % 5 < 2).collect())
            .collect();
        let inst = vis_instance(&rows);
        let m = build_visibility_model(&inst, 3, Weighting::Uniform).unwrap();
        let limits = SolveLimits {
            node_limit: Some(0),
            ..SolveLimits::default()
        };
        let r = solve(&m, limits);
        assert!(r.placement.is_some());
        assert!(r.dual_bound >= r.primal);
        match r.status {
            SolveStatus::TimeLimit { gap } => assert!(gap > 0.0),
            SolveStatus::Optimal => assert_eq!(r.gap, 0.0),
            s => panic!("unexpected {s:?}"),
        }
    }

    #[test]
    fn lp_export_minimal() {
        let inst = vis_instance(&[vec![true]]);
        let m = build_visibility_model(&inst, 1, Weighting::Uniform).unwrap();
        let text = to_lp_string(&m);
        assert!(text.contains("Maximize\n obj: y0\n"));
        assert!(text.contains("Subject To\n"));
        assert!(text.contains(" cover0: y0 - z0 <= 0\n"));
        assert!(text.contains(" card: z0 <= 1\n"));
        assert!(text.contains("Binary\n y0\n z0\n"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn lp_export_ratio_row_and_coefficients() {
        let inst = line_instance();
        let m = build_feasibility_model(&inst, 1, 8.0, 1.0).unwrap();
        let text = to_lp_string(&m);
        assert!(text.contains(" ratio: y0 + y1 + y2 >= 3\n"), "{text}");
        let inst = lambert_stack(&[2.0, 3.0]);
        let m = build_cumulative_model(&inst, 1, 0.2, Weighting::Uniform).unwrap();
        let text = to_lp_string(&m);
        assert!(text.contains(" cover0: 0.2 y0 - 0.25 z0 - 0.111111111111 z1 <= 0\n"), "{text}");
    }

    #[test]
    fn coefficient_formatting() {
        assert_eq!(format_coef(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_coef(2.0), "2");
        assert_eq!(format_coef(1.234e-7), "1.234e-7");
    }
}
