//! Coverage quality functions and the three aggregate coverage models.
//!
//! * `Visibility`: a sample is covered when any selected sensor sees it.
//! * `InverseDistance`: per-sample quality is the best single sensor,
//!   `1 / distance`; the placement is scored by the worst sample.
//! * `LambertInverseSquare`: per-sample quality is the sum over visible
//!   sensors of `cos(angle) / distance²`; covered when it reaches a threshold.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{dist, Point3, Vec3};
use crate::mesh::{CandidateSet, SampleSet};
use crate::visibility::VisibilityMatrix;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("quality undefined: sample {sample} coincides with candidate {candidate}")]
    Coincident { sample: usize, candidate: usize },
    #[error("quality undefined: points coincide")]
    CoincidentPoints,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("the cumulative model needs a coverage threshold")]
    ThresholdRequired,
    #[error("operation needs a {expected:?} instance, got {found:?}")]
    WrongKind {
        expected: QualityKind,
        found: QualityKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QualityKind {
    Visibility,
    InverseDistance,
    LambertInverseSquare,
}

impl QualityKind {
    /// Cumulative kinds add sensor contributions, the others take the best one.
    pub fn is_cumulative(self) -> bool {
        matches!(self, QualityKind::LambertInverseSquare)
    }
}

/// How samples count toward coverage objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// Every sample counts 1.
    #[default]
    Uniform,
    /// Every sample counts its surface area.
    Area,
}

impl Weighting {
    pub fn weights(self, samples: &SampleSet) -> Vec<f64> {
        match self {
            Weighting::Uniform => vec![1.0; samples.len()],
            Weighting::Area => samples.samples().iter().map(|s| s.weight).collect(),
        }
    }
}

/// `1 / |p - c|` in 1/m.
pub fn phi_inverse_distance(p: &Point3, c: &Point3) -> Result<f64, ModelError> {
    let d = dist(p, c);
    if d == 0.0 {
        return Err(ModelError::CoincidentPoints);
    }
    Ok(1.0 / d)
}

/// Lambertian inverse-square exposure in 1/m², clamped at zero for sensors
/// behind the surface's tangent plane.
pub fn phi_lambert(p: &Point3, n: &Vec3, c: &Point3) -> Result<f64, ModelError> {
    let v = c - p;
    let d = v.norm();
    if d == 0.0 {
        return Err(ModelError::CoincidentPoints);
    }
    let cos = n.dot(&v) / d;
    Ok(cos.max(0.0) / (d * d))
}

/// A set of distinct candidate indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Placement {
    pub selected: Vec<usize>,
}

impl Placement {
    pub fn new(selected: Vec<usize>) -> Self {
        Self { selected }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn validate(&self, n_candidates: usize) -> Result<(), ModelError> {
        let mut seen = vec![false; n_candidates];
        for &j in &self.selected {
            if j >= n_candidates {
                return Err(ModelError::InvalidPlacement(format!(
                    "candidate index {j} out of range (M = {n_candidates})"
                )));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(ModelError::InvalidPlacement(format!(
                    "candidate {j} selected twice"
                )));
            }
        }
        Ok(())
    }

    /// Selected indices in ascending order.
    pub fn sorted(&self) -> Vec<usize> {
        let mut s = self.selected.clone();
        s.sort_unstable();
        s
    }
}

/// Samples, candidates, visibility and the dense quality matrix.
#[derive(Debug, Clone)]
pub struct CoverageInstance {
    samples: SampleSet,
    candidates: CandidateSet,
    vis: VisibilityMatrix,
    phi: Vec<f64>,
    kind: QualityKind,
}

impl CoverageInstance {
    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn vis(&self) -> &VisibilityMatrix {
        &self.vis
    }

    pub fn kind(&self) -> QualityKind {
        self.kind
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn n_candidates(&self) -> usize {
        self.candidates.len()
    }

    #[inline]
    pub fn phi(&self, i: usize, j: usize) -> f64 {
        self.phi[i * self.candidates.len() + j]
    }

    /// Row `i` of the quality matrix.
    pub fn phi_row(&self, i: usize) -> &[f64] {
        let m = self.candidates.len();
        &self.phi[i * m..(i + 1) * m]
    }

    /// Distance between sample `i` and candidate `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(&self.samples.get(i).position, self.candidates.get(j))
    }

    pub fn require_kind(&self, expected: QualityKind) -> Result<(), ModelError> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(ModelError::WrongKind {
                expected,
                found: self.kind,
            })
        }
    }

    /// Same geometry and visibility under another quality kind.
    pub fn with_kind(&self, kind: QualityKind) -> Result<CoverageInstance, ModelError> {
        build_instance(
            self.samples.clone(),
            self.candidates.clone(),
            self.vis.clone(),
            kind,
        )
    }
}

/// Assemble an instance, computing `phi(i, j)` masked by visibility.
pub fn build_instance(
    samples: SampleSet,
    candidates: CandidateSet,
    vis: VisibilityMatrix,
    kind: QualityKind,
) -> Result<CoverageInstance, ModelError> {
    let (n, m) = (samples.len(), candidates.len());
    if vis.n_samples() != n || vis.n_candidates() != m {
        return Err(ModelError::Dimension(format!(
            "visibility matrix is {}x{}, instance is {n}x{m}",
            vis.n_samples(),
            vis.n_candidates()
        )));
    }
    let mut phi = vec![0.0; n * m];
    for (i, s) in samples.samples().iter().enumerate() {
        for (j, c) in candidates.positions().iter().enumerate() {
            if !vis.get(i, j) {
                continue;
            }
            let q = match kind {
                QualityKind::Visibility => Ok(1.0),
                QualityKind::InverseDistance => phi_inverse_distance(&s.position, c),
                QualityKind::LambertInverseSquare => phi_lambert(&s.position, &s.normal, c),
            };
            phi[i * m + j] = q.map_err(|_| ModelError::Coincident {
                sample: i,
                candidate: j,
            })?;
        }
    }
    Ok(CoverageInstance {
        samples,
        candidates,
        vis,
        phi,
        kind,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Covered sample ids, ascending.
    pub covered_ids: Vec<usize>,
    /// Covered count for the visibility and cumulative kinds; the minimum
    /// per-sample quality for the inverse-distance kind.
    pub objective: f64,
    pub per_sample_f: Vec<f64>,
    /// Total area of the covered samples.
    pub covered_weight: f64,
    /// Per sample, the position in `placement.selected` of its best sensor
    /// (largest single quality, lowest candidate index on ties).
    pub assignment: Vec<Option<usize>>,
}

impl CoverageReport {
    pub fn ratio(&self) -> f64 {
        if self.per_sample_f.is_empty() {
            0.0
        } else {
            self.covered_ids.len() as f64 / self.per_sample_f.len() as f64
        }
    }
}

/// Score `placement` on `instance`.
///
/// A sample is covered when its aggregate quality is positive, or reaches
/// `threshold` when one is given. The threshold comparison is inclusive to
/// agree with the threshold model's `Φ·y ≤ Σ φ·z` rows.
pub fn evaluate(
    instance: &CoverageInstance,
    placement: &Placement,
    threshold: Option<f64>,
) -> Result<CoverageReport, ModelError> {
    placement.validate(instance.n_candidates())?;
    if instance.kind.is_cumulative() && threshold.is_none() {
        return Err(ModelError::ThresholdRequired);
    }
    // Sum in ascending candidate order so the result does not depend on
    // the order of `placement.selected`.
    let mut slots: Vec<(usize, usize)> = placement
        .selected
        .iter()
        .enumerate()
        .map(|(slot, &j)| (j, slot))
        .collect();
    slots.sort_unstable();

    let n = instance.n_samples();
    let mut per_sample_f = Vec::with_capacity(n);
    let mut assignment = Vec::with_capacity(n);
    let mut covered_ids = Vec::new();
    let mut covered_weight = 0.0;
    for i in 0..n {
        let row = instance.phi_row(i);
        let mut best: Option<(f64, usize)> = None;
        let mut sum = 0.0;
        for &(j, slot) in &slots {
            let q = row[j];
            sum += q;
            if q > 0.0 && best.is_none_or(|(b, _)| q > b) {
                best = Some((q, slot));
            }
        }
        let f = if instance.kind.is_cumulative() {
            sum
        } else {
            best.map_or(0.0, |(q, _)| q)
        };
        let covered = match threshold {
            Some(t) => f >= t && f > 0.0,
            None => f > 0.0,
        };
        if covered {
            covered_ids.push(i);
            covered_weight += instance.samples.get(i).weight;
        }
        per_sample_f.push(f);
        assignment.push(best.map(|(_, slot)| slot));
    }
    let objective = match instance.kind {
        QualityKind::InverseDistance => per_sample_f.iter().copied().fold(f64::INFINITY, f64::min),
        _ => covered_ids.len() as f64,
    };
    Ok(CoverageReport {
        covered_ids,
        objective: if objective.is_finite() { objective } else { 0.0 },
        per_sample_f,
        covered_weight,
        assignment,
    })
}
