//! Occlusion queries and the sample × candidate visibility matrix in the
//! reference room, with a round trip through the binary format.
//!
//! cargo run --release --example visibility

use sensorcover::geom::Point3;
use sensorcover::scene::{reference_room, REFERENCE_ROOM_PITCH, REFERENCE_ROOM_SAMPLE_PITCH};
use sensorcover::visibility::build_bvh;
use sensorcover::{generate_candidates, sample_surface, visibility_matrix, EndpointShrink, VisibilityMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let room = reference_room();
    let bvh = build_bvh(&room.mesh);
    println!("BVH over {} triangles, depth {}", bvh.triangle_count(), bvh.depth());

    let shrink = EndpointShrink::default();
    let ceiling = Point3::new(2.0, 1.5, 2.7);
    let under_bed = Point3::new(2.0, 1.5, 0.3);
    let bed_top = Point3::new(2.0, 1.5, 0.6);
    println!("ceiling -> inside bed occluded: {}", bvh.segment_occluded(&ceiling, &under_bed, shrink));
    println!("ceiling -> bed top occluded:    {}", bvh.segment_occluded(&ceiling, &bed_top, shrink));

    let samples = sample_surface(&room.mesh, REFERENCE_ROOM_SAMPLE_PITCH, 0.0)?;
    let candidates = generate_candidates(&room.sensor_region, REFERENCE_ROOM_PITCH)?;
    let vis = visibility_matrix(&bvh, &samples, &candidates, shrink);
    let total = vis.n_samples() * vis.n_candidates();
    println!(
        "{} x {} matrix, {:.1}% of pairs visible",
        vis.n_samples(),
        vis.n_candidates(),
        100.0 * vis.count_ones() as f64 / total as f64
    );
    let hidden = (0..vis.n_samples()).filter(|&i| vis.visible_from(i).next().is_none()).count();
    println!("{hidden} samples see no candidate");

    let path = std::env::temp_dir().join("room.spvm");
    vis.write(&path)?;
    let back = VisibilityMatrix::read(&path)?;
    back.check_matches(&samples, &candidates)?;
    println!("round trip through {} ok", path.display());
    Ok(())
}
