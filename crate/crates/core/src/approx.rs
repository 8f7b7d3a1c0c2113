//! Farthest-point clustering for the radius problem with visibility relaxed,
//! and the radius bound it satisfies.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{dist, Point3};
use crate::mesh::SampleSet;

#[derive(Debug, Error, PartialEq)]
pub enum ApproxError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("center list is empty")]
    NoCenters,
    #[error("optimal radius {r_opt} is below the clearance {h}")]
    RadiusBelowClearance { r_opt: f64, h: f64 },
    #[error("invalid plane: {0}")]
    InvalidPlane(String),
}

/// Horizontal sensor plane `z = height` and its clearance above (or below)
/// the target surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneDeployment {
    pub height: f64,
    pub clearance: f64,
}

impl PlaneDeployment {
    pub fn new(height: f64, clearance: f64) -> Result<Self, ApproxError> {
        if !height.is_finite() || !(clearance >= 0.0 && clearance.is_finite()) {
            return Err(ApproxError::InvalidPlane(format!(
                "height {height}, clearance {clearance}"
            )));
        }
        Ok(Self { height, clearance })
    }

    /// Plane at `height` with the clearance measured from `samples`.
    pub fn for_samples(height: f64, samples: &SampleSet) -> Self {
        let clearance = samples
            .positions()
            .map(|p| (p.z - height).abs())
            .fold(f64::INFINITY, f64::min);
        Self { height, clearance }
    }

    /// Vertical projection onto the plane.
    pub fn project(&self, p: &Point3) -> Point3 {
        Point3::new(p.x, p.y, self.height)
    }
}

/// Seed with the projection of sample 0, then k−1 times add the
/// projection of the sample farthest from the current centers (lowest id on
/// ties). Returns exactly `k` centers; a center may repeat once every sample
/// is already as close as its own projection allows.
pub fn farthest_point_clustering(
    samples: &SampleSet,
    k: usize,
    plane: &PlaneDeployment,
) -> Result<Vec<Point3>, ApproxError> {
    if k == 0 {
        return Err(ApproxError::ZeroK);
    }
    let pts: Vec<Point3> = samples.positions().copied().collect();
    let mut centers = vec![plane.project(&pts[0])];
    let mut nearest: Vec<f64> = pts.iter().map(|p| dist(p, &centers[0])).collect();
    while centers.len() < k {
        let mut far = 0;
        for (i, &d) in nearest.iter().enumerate() {
            if d > nearest[far] {
                far = i;
            }
        }
        let c = plane.project(&pts[far]);
        for (d, p) in nearest.iter_mut().zip(&pts) {
            *d = d.min(dist(p, &c));
        }
        centers.push(c);
    }
    Ok(centers)
}

/// Index of the nearest center for every sample, lowest index on ties.
pub fn assign_nearest(centers: &[Point3], samples: &SampleSet) -> Vec<usize> {
    samples
        .positions()
        .map(|p| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, c) in centers.iter().enumerate() {
                let d = dist(p, c);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            best
        })
        .collect()
}

/// `max_o min_c ‖o − c‖`.
pub fn coverage_radius(centers: &[Point3], samples: &SampleSet) -> Result<f64, ApproxError> {
    if centers.is_empty() {
        return Err(ApproxError::NoCenters);
    }
    Ok(samples
        .positions()
        .map(|p| {
            centers
                .iter()
                .map(|c| dist(p, c))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max))
}

/// `√(4 r_opt² − 3 h²)`, the radius farthest-point clustering is guaranteed
/// to reach when the optimum is `r_opt` and the clearance is `h`.
pub fn prop1_bound(r_opt: f64, h: f64) -> Result<f64, ApproxError> {
    // Allow for rounding when r_opt was itself computed as exactly h.
    if r_opt < h - 1e-12 * h.max(1.0) {
        return Err(ApproxError::RadiusBelowClearance { r_opt, h });
    }
    Ok((4.0 * r_opt * r_opt - 3.0 * h * h).max(0.0).sqrt())
}

/// Lower bound on the optimal radius implied by a clustering radius `r_c`.
/// Inverse of [`prop1_bound`].
pub fn optimum_lower_bound(r_c: f64, h: f64) -> f64 {
    ((r_c * r_c + 3.0 * h * h) / 4.0).sqrt().max(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(points: &[(f64, f64, f64)]) -> SampleSet {
        let pts: Vec<Point3> = points.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
        SampleSet::from_points(&pts).unwrap()
    }

    #[test]
    fn single_point() {
        let s = set(&[(0.0, 0.0, 0.0)]);
        let plane = PlaneDeployment::for_samples(2.0, &s);
        let c = farthest_point_clustering(&s, 1, &plane).unwrap();
        assert_eq!(c, vec![Point3::new(0.0, 0.0, 2.0)]);
    }

    #[test]
    fn hand_trace_two_centers() {
        let s = set(&[(0.0, 0.0, 0.0), (10.0, 0.0, 0.0), (5.0, 0.0, 0.0)]);
        let plane = PlaneDeployment::for_samples(2.0, &s);
        assert_eq!(plane.clearance, 2.0);
        let c = farthest_point_clustering(&s, 2, &plane).unwrap();
        assert_eq!(c, vec![Point3::new(0.0, 0.0, 2.0), Point3::new(10.0, 0.0, 2.0)]);
        let r = coverage_radius(&c, &s).unwrap();
        assert!((r - 29f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn duplicates_not_both_selected() {
        let s = set(&[(0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (3.0, 0.0, 0.0)]);
        let plane = PlaneDeployment::for_samples(1.0, &s);
        let c = farthest_point_clustering(&s, 2, &plane).unwrap();
        assert_eq!(c[1], Point3::new(3.0, 0.0, 1.0));
    }

    #[test]
    fn radius_examples() {
        let s = set(&[(0.0, 0.0, 0.0), (3.0, 0.0, 0.0)]);
        let r = coverage_radius(&[Point3::new(0.0, 0.0, 2.0)], &s).unwrap();
        assert!((r - 13f64.sqrt()).abs() < 1e-12);
        let plane = PlaneDeployment::for_samples(1.5, &s);
        let all: Vec<Point3> = s.positions().map(|p| plane.project(p)).collect();
        assert_eq!(coverage_radius(&all, &s).unwrap(), 1.5);
        assert_eq!(coverage_radius(&[], &s), Err(ApproxError::NoCenters));
    }

    #[test]
    fn bound_examples() {
        assert_eq!(prop1_bound(3.0, 3.0).unwrap(), 3.0);
        assert_eq!(prop1_bound(2.5, 0.0).unwrap(), 5.0);
        assert!((prop1_bound(5.0, 3.0).unwrap() - 73f64.sqrt()).abs() < 1e-12);
        assert!(prop1_bound(2.0, 3.0).is_err());
        let lb = optimum_lower_bound(73f64.sqrt(), 3.0);
        assert!((lb - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_k_rejected() {
        let s = set(&[(0.0, 0.0, 0.0)]);
        let plane = PlaneDeployment::for_samples(1.0, &s);
        assert_eq!(farthest_point_clustering(&s, 0, &plane), Err(ApproxError::ZeroK));
    }
}
