use serde::{Deserialize, Serialize};

use super::IlpError;
use crate::model::{CoverageInstance, QualityKind, Weighting};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `y_i ≤ Σ_{j visible} z_j`, `Σ z ≤ k`, maximize `Σ y`.
    MaxVisibilityCoverage,
    /// `Φ·y_i ≤ Σ_j φ_ij z_j`, `Σ z ≤ k`, maximize `Σ y`.
    ThresholdCoverage,
    /// `y_i ≤ Σ_{j visible, d_ij ≤ r} z_j`, `Σ z ≤ k`, `Σ y ≥ ⌈Nρ⌉`.
    FeasibilityCover,
}

/// Coverage row `threshold · y_i ≤ Σ coef · z_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverRow {
    pub threshold: f64,
    /// `(candidate, coefficient)` pairs with non-zero coefficient, ascending.
    pub terms: Vec<(u32, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    Y(u32),
    Z(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
}

/// A constraint in plain `Σ a·x (≤|≥) b` form.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRow {
    pub name: String,
    pub terms: Vec<(Var, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A 0/1 coverage model over `N` coverage variables `y` and `M` selection
/// variables `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IlpModel {
    pub kind: ModelKind,
    pub n_y: usize,
    pub n_z: usize,
    /// Sensor budget of the single cardinality row.
    pub k: usize,
    pub rows: Vec<CoverRow>,
    /// Objective coefficient of each `y_i`.
    pub objective: Vec<f64>,
    pub threshold: Option<f64>,
    pub radius: Option<f64>,
    pub rho: Option<f64>,
    /// Right-hand side of `Σ y ≥ rhs` for feasibility models.
    pub ratio_rhs: Option<u64>,
}

impl IlpModel {
    /// Every constraint in generic form: the coverage rows, the cardinality
    /// row and, for feasibility models, the ratio row.
    pub fn linear_rows(&self) -> Vec<LinearRow> {
        let mut out = Vec::with_capacity(self.rows.len() + 2);
        for (i, row) in self.rows.iter().enumerate() {
            let mut terms = Vec::with_capacity(row.terms.len() + 1);
            terms.push((Var::Y(i as u32), row.threshold));
            terms.extend(row.terms.iter().map(|&(j, c)| (Var::Z(j), -c)));
            out.push(LinearRow {
                name: format!("cover{i}"),
                terms,
                sense: Sense::Le,
                rhs: 0.0,
            });
        }
        out.push(LinearRow {
            name: "card".into(),
            terms: (0..self.n_z as u32).map(|j| (Var::Z(j), 1.0)).collect(),
            sense: Sense::Le,
            rhs: self.k as f64,
        });
        if let Some(rhs) = self.ratio_rhs {
            out.push(LinearRow {
                name: "ratio".into(),
                terms: (0..self.n_y as u32).map(|i| (Var::Y(i), 1.0)).collect(),
                sense: Sense::Ge,
                rhs: rhs as f64,
            });
        }
        out
    }

    pub fn n_constraints(&self) -> usize {
        self.rows.len() + 1 + usize::from(self.ratio_rhs.is_some())
    }

    pub fn n_variables(&self) -> usize {
        self.n_y + self.n_z
    }

    pub fn is_feasibility(&self) -> bool {
        self.kind == ModelKind::FeasibilityCover
    }

    /// Objective value of `selected` with each `y_i` set as high as its row
    /// allows. Loads are summed in ascending candidate order.
    pub fn objective_of(&self, selected: &[usize]) -> f64 {
        self.covered_rows(selected)
            .iter()
            .map(|&i| self.objective[i])
            .sum()
    }

    /// Rows whose `y_i` can be 1 under `selected`.
    pub fn covered_rows(&self, selected: &[usize]) -> Vec<usize> {
        let mut chosen = vec![false; self.n_z];
        for &j in selected {
            chosen[j] = true;
        }
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, row)| {
                let load: f64 = row
                    .terms
                    .iter()
                    .filter(|(j, _)| chosen[*j as usize])
                    .map(|(_, c)| c)
                    .sum();
                row.threshold <= load
            })
            .map(|(i, _)| i)
            .collect()
    }
}

fn objective(instance: &CoverageInstance, weighting: Weighting) -> Vec<f64> {
    weighting.weights(instance.samples())
}

/// Model for maximizing the number (or area) of visible samples.
pub fn build_visibility_model(
    instance: &CoverageInstance,
    k: usize,
    weighting: Weighting,
) -> Result<IlpModel, IlpError> {
    instance.require_kind(QualityKind::Visibility)?;
    let vis = instance.vis();
    let rows = (0..instance.n_samples())
        .map(|i| CoverRow {
            threshold: 1.0,
            terms: vis.visible_from(i).map(|j| (j as u32, 1.0)).collect(),
        })
        .collect();
    Ok(IlpModel {
        kind: ModelKind::MaxVisibilityCoverage,
        n_y: instance.n_samples(),
        n_z: instance.n_candidates(),
        k,
        rows,
        objective: objective(instance, weighting),
        threshold: None,
        radius: None,
        rho: None,
        ratio_rhs: None,
    })
}

/// Model for maximizing the samples whose summed exposure reaches `threshold`.
pub fn build_cumulative_model(
    instance: &CoverageInstance,
    k: usize,
    threshold: f64,
    weighting: Weighting,
) -> Result<IlpModel, IlpError> {
    instance.require_kind(QualityKind::LambertInverseSquare)?;
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(IlpError::InvalidParameter(format!(
            "coverage threshold must be positive, got {threshold}"
        )));
    }
    let rows = (0..instance.n_samples())
        .map(|i| CoverRow {
            threshold,
            terms: instance
                .phi_row(i)
                .iter()
                .enumerate()
                .filter(|(_, &q)| q > 0.0)
                .map(|(j, &q)| (j as u32, q))
                .collect(),
        })
        .collect();
    Ok(IlpModel {
        kind: ModelKind::ThresholdCoverage,
        n_y: instance.n_samples(),
        n_z: instance.n_candidates(),
        k,
        rows,
        objective: objective(instance, weighting),
        threshold: Some(threshold),
        radius: None,
        rho: None,
        ratio_rhs: None,
    })
}

/// `⌈Nρ⌉`, tolerant of representation error in `ρ`.
pub fn ratio_rhs(n: usize, rho: f64) -> u64 {
    let raw = n as f64 * rho;
    let r = (raw - 1e-9 * raw.abs().max(1.0)).ceil();
    r.clamp(0.0, n as f64) as u64
}

/// Decision model: can `k` sensors put a `ρ` fraction of samples within
/// distance `radius` of a visible sensor?
pub fn build_feasibility_model(
    instance: &CoverageInstance,
    k: usize,
    radius: f64,
    rho: f64,
) -> Result<IlpModel, IlpError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(IlpError::InvalidParameter(format!(
            "coverage ratio must lie in [0, 1], got {rho}"
        )));
    }
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(IlpError::InvalidParameter(format!(
            "radius must be finite and non-negative, got {radius}"
        )));
    }
    let vis = instance.vis();
    let rows = (0..instance.n_samples())
        .map(|i| CoverRow {
            threshold: 1.0,
            terms: vis
                .visible_from(i)
                .filter(|&j| instance.distance(i, j) <= radius)
                .map(|j| (j as u32, 1.0))
                .collect(),
        })
        .collect();
    let n = instance.n_samples();
    Ok(IlpModel {
        kind: ModelKind::FeasibilityCover,
        n_y: n,
        n_z: instance.n_candidates(),
        k,
        rows,
        objective: vec![1.0; n],
        threshold: None,
        radius: Some(radius),
        rho: Some(rho),
        ratio_rhs: Some(ratio_rhs(n, rho)),
    })
}
