//! Move sensors of a coarse exact solution on a finer lattice.
//!
//! cargo run --release --example grid_refine

use sensorcover::driver::solve_problem1;
use sensorcover::geom::Point3;
use sensorcover::ilp::SolveLimits;
use sensorcover::model::{build_instance, QualityKind};
use sensorcover::refine::{refine_grid, RefineContext, RefineObjective};
use sensorcover::scene::{reference_room, REFERENCE_ROOM_SAMPLE_PITCH};
use sensorcover::visibility::build_bvh;
use sensorcover::{generate_candidates, sample_surface, visibility_matrix, EndpointShrink};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let room = reference_room();
    let bvh = build_bvh(&room.mesh);
    let samples = sample_surface(&room.mesh, REFERENCE_ROOM_SAMPLE_PITCH, 0.0)?;
    let coarse_pitch = 1.2;
    let candidates = generate_candidates(&room.sensor_region, coarse_pitch)?;
    let shrink = EndpointShrink::default();
    let vis = visibility_matrix(&bvh, &samples, &candidates, shrink);
    let instance = build_instance(samples.clone(), candidates, vis, QualityKind::Visibility)?;

    let ctx = RefineContext {
        bvh: &bvh,
        samples: &samples,
        region: room.sensor_region,
        objective: RefineObjective::Visibility,
        shrink,
    };
    for k in 1..=3 {
        let coarse = solve_problem1(&instance, k, SolveLimits::default())?;
        let start: Vec<Point3> = coarse.placement.selected.iter().map(|&j| *instance.candidates().get(j)).collect();
        let out = refine_grid(&ctx, &start, 0.3, coarse_pitch, 10)?;
        println!(
            "k = {k}: {} -> {} samples seen, {} moves in {} passes",
            out.objective_before, out.objective_after, out.moves, out.rounds
        );
    }
    Ok(())
}
