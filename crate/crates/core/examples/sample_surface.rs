//! Generate a terrain, sample its surface and lay out candidate sensors.
//!
//! cargo run --example sample_surface

use sensorcover::scene::gen_terrain;
use sensorcover::{generate_candidates, sample_surface, CandidateRegion};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = gen_terrain(7, [20.0, 20.0], 16, 0.8)?;
    println!(
        "terrain: {} vertices, {} triangles, bounds {:?}",
        mesh.vertices().len(),
        mesh.triangles().len(),
        mesh.bounds()
    );

    for pitch in [2.0, 1.0, 0.5] {
        let samples = sample_surface(&mesh, pitch, 0.0)?;
        println!(
            "pitch {pitch:>4}: {:>5} samples, total area {:.3} m²",
            samples.len(),
            samples.total_weight()
        );
    }

    let region = CandidateRegion::Plane { z: 5.0, x0: 0.0, y0: 0.0, x1: 20.0, y1: 20.0 };
    let candidates = generate_candidates(&region, 2.5)?;
    println!("{} candidates at z = 5 on a 2.5 m grid", candidates.len());

    let s = sample_surface(&mesh, 1.0, 0.0)?;
    let first = s.get(0);
    println!("sample 0 at {:?}, normal {:?}", first.position, first.normal);
    Ok(())
}
