use serde::{Deserialize, Serialize};

use super::model::ratio_rhs;
use super::solver::{SolveResult, SolveStatus};
use super::IlpError;
use crate::model::{evaluate, CoverageInstance, Placement, Weighting};

/// Largest number of subsets `brute_force_solve` will enumerate.
pub const BRUTE_FORCE_CAP: u128 = 1_000_000;

/// Which coverage question a solve answers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ProblemParams {
    Visibility,
    Threshold { phi: f64 },
    Feasibility { radius: f64, rho: f64 },
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Visit every `k`-subset of `0..m` in lexicographic order.
fn for_each_subset(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // Rightmost position that can still advance.
        let mut i = k;
        while i > 0 && idx[i - 1] == m - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for t in i..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Exhaustive enumeration of every placement of `min(k, M)` sensors, scored
/// through [`crate::model::evaluate`]. Ground truth for small instances.
pub fn brute_force_solve(
    instance: &CoverageInstance,
    k: usize,
    params: ProblemParams,
    weighting: Weighting,
) -> Result<SolveResult, IlpError> {
    let start = std::time::Instant::now();
    let m = instance.n_candidates();
    let k = k.min(m);
    let count = binomial(m, k);
    if count > BRUTE_FORCE_CAP {
        return Err(IlpError::TooLarge { subsets: count });
    }
    let weights = weighting.weights(instance.samples());
    let n = instance.n_samples();

    let score = |sel: &[usize]| -> Result<f64, IlpError> {
        let placement = Placement::new(sel.to_vec());
        Ok(match params {
            ProblemParams::Visibility => {
                let r = evaluate(instance, &placement, None)?;
                r.covered_ids.iter().map(|&i| weights[i]).sum()
            }
            ProblemParams::Threshold { phi } => {
                let r = evaluate(instance, &placement, Some(phi))?;
                r.covered_ids.iter().map(|&i| weights[i]).sum()
            }
            ProblemParams::Feasibility { radius, .. } => (0..n)
                .filter(|&i| {
                    sel.iter().any(|&j| {
                        instance.vis().get(i, j) && instance.distance(i, j) <= radius
                    })
                })
                .count() as f64,
        })
    };

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut err = None;
    for_each_subset(m, k, |sel| {
        if err.is_some() {
            return;
        }
        match score(sel) {
            Ok(v) => {
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, sel.to_vec()));
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let (primal, selected) = best.unwrap_or((0.0, Vec::new()));
    let elapsed = start.elapsed().as_secs_f64();
    let feasible = match params {
        ProblemParams::Feasibility { rho, .. } => primal >= ratio_rhs(n, rho) as f64,
        _ => true,
    };
    Ok(SolveResult {
        status: if feasible {
            SolveStatus::Optimal
        } else {
            SolveStatus::Infeasible
        },
        placement: feasible.then(|| Placement::new(selected)),
        primal,
        dual_bound: primal,
        gap: 0.0,
        nodes: count as u64,
        elapsed,
    })
}
