//! The three placement problems on the reference room for k = 1..6.
//!
//! cargo run --release --example room_problems

use sensorcover::driver::{solve_problem1, solve_problem2, solve_problem3};
use sensorcover::ilp::SolveLimits;
use sensorcover::model::{build_instance, QualityKind};
use sensorcover::scene::{reference_room, REFERENCE_ROOM_PHI, REFERENCE_ROOM_PITCH, REFERENCE_ROOM_SAMPLE_PITCH};
use sensorcover::visibility::build_bvh;
use sensorcover::{generate_candidates, sample_surface, visibility_matrix, EndpointShrink};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let room = reference_room();
    let samples = sample_surface(&room.mesh, REFERENCE_ROOM_SAMPLE_PITCH, 0.0)?;
    let candidates = generate_candidates(&room.sensor_region, REFERENCE_ROOM_PITCH)?;
    let vis = visibility_matrix(&build_bvh(&room.mesh), &samples, &candidates, EndpointShrink::default());
    let visibility = build_instance(samples, candidates, vis, QualityKind::Visibility)?;
    let distance = visibility.with_kind(QualityKind::InverseDistance)?;
    let lambert = visibility.with_kind(QualityKind::LambertInverseSquare)?;
    let limits = SolveLimits::default();
    let rho = 0.8;

    println!("N = {}, M = {}", visibility.n_samples(), visibility.n_candidates());
    println!(" k  seen   r*(rho={rho})  exposed(phi={REFERENCE_ROOM_PHI})  seconds");
    for k in 1..=6 {
        let t = std::time::Instant::now();
        let p1 = solve_problem1(&visibility, k, limits)?;
        let p2 = solve_problem2(&distance, k, rho, limits)?;
        let p3 = solve_problem3(&lambert, k, REFERENCE_ROOM_PHI, limits)?;
        println!(
            "{k:>2}  {:>5.1}%  {:>8.3} m    {:>6.1}%           {:.2}",
            100.0 * p1.report.ratio(),
            p2.radius,
            100.0 * p3.report.ratio(),
            t.elapsed().as_secs_f64()
        );
    }

    // A time limit returns the incumbent with its gap.
    let r = solve_problem3(&lambert, 5, 0.15, SolveLimits::with_time_limit(0.5))?;
    println!("\nk = 5, phi = 0.15 under 0.5 s: {:?}, covered {}, bound {}", r.result.status, r.result.primal, r.result.dual_bound);
    Ok(())
}
