//! Write generated scenes as OBJ and a solved coverage as a colored PLY.
//!
//! cargo run --release --example scenes_export [out_dir]

use sensorcover::driver::solve_problem1;
use sensorcover::export::{color_by_assignment, write_ply};
use sensorcover::ilp::SolveLimits;
use sensorcover::model::{build_instance, QualityKind};
use sensorcover::scene::{gen_terrain, reference_room, REFERENCE_ROOM_PITCH, REFERENCE_ROOM_SAMPLE_PITCH};
use sensorcover::visibility::build_bvh;
use sensorcover::{generate_candidates, sample_surface, visibility_matrix, EndpointShrink};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;

    let terrain = gen_terrain(1, [40.0, 40.0], 32, 1.5)?;
    terrain.write_obj(&out.join("terrain.obj"))?;
    let room = reference_room();
    room.mesh.write_obj(&out.join("room.obj"))?;

    let samples = sample_surface(&room.mesh, REFERENCE_ROOM_SAMPLE_PITCH, 0.0)?;
    let candidates = generate_candidates(&room.sensor_region, REFERENCE_ROOM_PITCH)?;
    let vis = visibility_matrix(&build_bvh(&room.mesh), &samples, &candidates, EndpointShrink::default());
    let instance = build_instance(samples, candidates, vis, QualityKind::Visibility)?;
    let solved = solve_problem1(&instance, 3, SolveLimits::default())?;

    let points: Vec<_> = instance.samples().positions().copied().collect();
    let colors = color_by_assignment(&solved.report.assignment);
    let ply = out.join("room_coverage.ply");
    write_ply(&ply, &points, &colors)?;
    println!(
        "wrote terrain.obj, room.obj and {} ({} points, {:.1}% covered)",
        ply.display(),
        points.len(),
        100.0 * solved.report.ratio()
    );
    Ok(())
}
