//! Coarse global solve plus local improvement.
//!
//! cargo run --release --example two_phase

use sensorcover::driver::{two_phase, Problem, SceneHandles, TwoPhaseConfig};
use sensorcover::ilp::SolveLimits;
use sensorcover::scene::{gen_terrain, reference_room, REFERENCE_ROOM_PHI, REFERENCE_ROOM_PITCH, REFERENCE_ROOM_SAMPLE_PITCH};
use sensorcover::visibility::build_bvh;
use sensorcover::{sample_surface, CandidateRegion, EndpointShrink};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let room = reference_room();
    let bvh = build_bvh(&room.mesh);
    let samples = sample_surface(&room.mesh, REFERENCE_ROOM_SAMPLE_PITCH, 0.0)?;
    let scene = SceneHandles { bvh: &bvh, samples: &samples, region: room.sensor_region, shrink: EndpointShrink::default() };
    for problem in [
        Problem::Visibility,
        Problem::Threshold { phi: REFERENCE_ROOM_PHI },
        Problem::Radius { rho: 0.8, relaxed: false },
    ] {
        let config = TwoPhaseConfig {
            problem,
            k: 3,
            coarse_pitch: REFERENCE_ROOM_PITCH,
            fine_pitch: 0.3,
            rounds: 5,
            limits: SolveLimits::default(),
        };
        let report = two_phase(&scene, &config)?;
        println!(
            "{problem:?}: {} {:.3} -> {} {:.3}",
            report.phase1.method, report.phase1.objective, report.phase2.method, report.phase2.objective
        );
    }

    // Without occlusion: clustering, then re-centering, with certified factors.
    let mesh = gen_terrain(5, [30.0, 30.0], 20, 0.5)?;
    let bvh = build_bvh(&mesh);
    let samples = sample_surface(&mesh, 1.0, 0.0)?;
    let scene = SceneHandles {
        bvh: &bvh,
        samples: &samples,
        region: CandidateRegion::Plane { z: 6.0, x0: 0.0, y0: 0.0, x1: 30.0, y1: 30.0 },
        shrink: EndpointShrink::default(),
    };
    let config = TwoPhaseConfig {
        problem: Problem::Radius { rho: 1.0, relaxed: true },
        k: 5,
        coarse_pitch: 1.0,
        fine_pitch: 1.0,
        rounds: 0,
        limits: SolveLimits::default(),
    };
    let report = two_phase(&scene, &config)?;
    for phase in [&report.phase1, &report.phase2] {
        println!(
            "{}: radius {:.3} m, optimum >= {:.3} m, certified factor {:.3}",
            phase.method,
            phase.objective,
            phase.bound.unwrap_or(f64::NAN),
            phase.certified_factor.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
