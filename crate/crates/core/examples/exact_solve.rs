//! Exact branch-and-bound on a small random instance, checked against
//! exhaustive enumeration, then exported as CPLEX-LP.
//!
//! cargo run --example exact_solve

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sensorcover::geom::Point3;
use sensorcover::ilp::{brute_force_solve, build_visibility_model, solve, to_lp_string, ProblemParams, SolveLimits};
use sensorcover::mesh::{CandidateSet, RegionKind};
use sensorcover::model::{build_instance, QualityKind, Weighting};
use sensorcover::{SampleSet, VisibilityMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let points: Vec<Point3> = (0..30)
        .map(|_| Point3::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), 0.0))
        .collect();
    let samples = SampleSet::from_points(&points)?;
    let candidates = CandidateSet::from_positions(
        (0..12).map(|_| Point3::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), 3.0)),
        RegionKind::ExplicitList,
    )?;
    let rows: Vec<Vec<bool>> = (0..30).map(|_| (0..12).map(|_| rng.random_bool(0.3)).collect()).collect();
    let vis = VisibilityMatrix::from_rows(&rows, &samples, &candidates);
    let instance = build_instance(samples, candidates, vis, QualityKind::Visibility)?;

    for k in 1..=4 {
        let model = build_visibility_model(&instance, k, Weighting::Uniform)?;
        let result = solve(&model, SolveLimits::default());
        let check = brute_force_solve(&instance, k, ProblemParams::Visibility, Weighting::Uniform)?;
        println!(
            "k = {k}: covered {} (enumeration {}), {} nodes, placement {:?}",
            result.primal,
            check.primal,
            result.nodes,
            result.placement.unwrap().selected
        );
    }

    let model = build_visibility_model(&instance, 2, Weighting::Uniform)?;
    let lp = to_lp_string(&model);
    println!("\nLP export, first lines:");
    for line in lp.lines().take(6) {
        println!("{line}");
    }
    Ok(())
}
