//! Farthest-point clustering on a terrain and its radius guarantee.
//!
//! cargo run --release --example farthest_point

use sensorcover::approx::{coverage_radius, farthest_point_clustering, optimum_lower_bound, prop1_bound, PlaneDeployment};
use sensorcover::refine::min_sphere_fixed_plane;
use sensorcover::sample_surface;
use sensorcover::scene::gen_terrain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = gen_terrain(3, [30.0, 30.0], 24, 0.5)?;
    let samples = sample_surface(&mesh, 1.0, 0.0)?;
    let plane = PlaneDeployment::for_samples(6.0, &samples);
    println!("{} samples, plane z = 6, clearance h = {:.3} m", samples.len(), plane.clearance);

    // One center: the exact optimum is the plane-constrained enclosing sphere.
    let pts: Vec<_> = samples.positions().copied().collect();
    let r1 = min_sphere_fixed_plane(&pts, plane.height)?.radius;
    let c = farthest_point_clustering(&samples, 1, &plane)?;
    let rc = coverage_radius(&c, &samples)?;
    println!("k = 1: clustering {rc:.3} m, optimum {r1:.3} m, guarantee {:.3} m", prop1_bound(r1, plane.clearance)?);

    for k in 2..=8 {
        let centers = farthest_point_clustering(&samples, k, &plane)?;
        let r = coverage_radius(&centers, &samples)?;
        println!(
            "k = {k}: radius {r:.3} m, optimum at least {:.3} m (factor <= {:.3})",
            optimum_lower_bound(r, plane.clearance),
            r / optimum_lower_bound(r, plane.clearance)
        );
    }
    Ok(())
}
