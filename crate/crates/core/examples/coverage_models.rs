//! Score one placement under the three quality models.
//!
//! cargo run --release --example coverage_models

use sensorcover::model::{build_instance, evaluate, Placement, QualityKind};
use sensorcover::scene::{reference_room, REFERENCE_ROOM_PHI, REFERENCE_ROOM_PITCH, REFERENCE_ROOM_SAMPLE_PITCH};
use sensorcover::visibility::build_bvh;
use sensorcover::{generate_candidates, sample_surface, visibility_matrix, EndpointShrink};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let room = reference_room();
    let samples = sample_surface(&room.mesh, REFERENCE_ROOM_SAMPLE_PITCH, 0.0)?;
    let candidates = generate_candidates(&room.sensor_region, REFERENCE_ROOM_PITCH)?;
    let vis = visibility_matrix(&build_bvh(&room.mesh), &samples, &candidates, EndpointShrink::default());
    let visibility = build_instance(samples, candidates, vis, QualityKind::Visibility)?;

    // Two sensors near opposite corners of the ceiling grid.
    let placement = Placement::new(vec![0, visibility.n_candidates() - 1]);

    let r = evaluate(&visibility, &placement, None)?;
    println!("visibility: {} of {} samples seen ({:.1}%)", r.covered_ids.len(), visibility.n_samples(), 100.0 * r.ratio());

    let best = visibility.with_kind(QualityKind::InverseDistance)?;
    let r = evaluate(&best, &placement, None)?;
    let worst = r.covered_ids.iter().map(|&i| r.per_sample_f[i]).fold(f64::INFINITY, f64::min);
    println!("best sensor: farthest seen sample at {:.3} m (quality {worst:.3} 1/m)", 1.0 / worst);

    let lambert = visibility.with_kind(QualityKind::LambertInverseSquare)?;
    let r = evaluate(&lambert, &placement, Some(REFERENCE_ROOM_PHI))?;
    println!(
        "cumulative exposure >= {REFERENCE_ROOM_PHI}: {} samples, {:.2} m² of surface",
        r.covered_ids.len(),
        r.covered_weight
    );
    Ok(())
}
