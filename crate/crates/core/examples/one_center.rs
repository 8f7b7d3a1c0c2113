//! Plane-constrained enclosing spheres and the re-centering loop.
//!
//! cargo run --example one_center

use sensorcover::approx::{farthest_point_clustering, PlaneDeployment};
use sensorcover::geom::Point3;
use sensorcover::refine::{improve_quality_max, min_sphere_fixed_plane};
use sensorcover::sample_surface;
use sensorcover::scene::gen_terrain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pts = [Point3::new(0.0, 0.0, 0.0), Point3::new(4.0, 0.0, 0.0), Point3::new(2.0, 3.0, 1.0)];
    for height in [0.5, 2.0, 10.0] {
        let s = min_sphere_fixed_plane(&pts, height)?;
        println!(
            "plane z = {height:>4}: center ({:.3}, {:.3}), radius {:.4}, support {:?}",
            s.center.x, s.center.y, s.radius, s.support
        );
    }

    let mesh = gen_terrain(9, [20.0, 20.0], 16, 0.6)?;
    let samples = sample_surface(&mesh, 0.8, 0.0)?;
    let plane = PlaneDeployment::for_samples(4.0, &samples);
    for k in [2, 4, 6] {
        let start = farthest_point_clustering(&samples, k, &plane)?;
        let out = improve_quality_max(&samples, &start, &plane)?;
        println!(
            "k = {k}: radius {:.3} -> {:.3} m after {} rounds",
            out.r_initial, out.r_new, out.iterations
        );
    }
    Ok(())
}
