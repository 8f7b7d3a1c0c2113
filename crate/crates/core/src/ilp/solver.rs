//! Depth-first branch-and-bound over the selection variables.
//!
//! Coverage variables are never branched on: once the selection is fixed,
//! each `y_i` is 1 exactly when its row allows it. The upper bound at a node
//! gives every free candidate a fractional score
//!
//! ```text
//! g_j = Σ_{i uncovered, reachable} w_i · min(1, φ_ij / (Φ_i − load_i))
//! ```
//!
//! and adds the `b` largest scores (`b` = remaining budget) to the covered
//! weight, capped by the total weight of rows that free candidates can still
//! complete. For 0/1 rows `g_j` is the plain marginal gain and the bound is
//! the usual submodular greedy bound.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::model::IlpModel;
use crate::model::Placement;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveLimits {
    /// Wall-clock limit; `None` runs to completion.
    #[serde(with = "opt_secs")]
    pub time_limit: Option<Duration>,
    /// Stop once the relative gap is at most this value.
    pub gap_tol: f64,
    /// Deterministic alternative to the time limit.
    pub node_limit: Option<u64>,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self {
            time_limit: None,
            gap_tol: 0.0,
            node_limit: None,
        }
    }
}

impl SolveLimits {
    pub fn with_time_limit(secs: f64) -> Self {
        Self {
            time_limit: Some(Duration::from_secs_f64(secs)),
            ..Self::default()
        }
    }
}

mod opt_secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        match d {
            Some(d) => s.serialize_some(&d.as_secs_f64()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.map(Duration::from_secs_f64))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SolveStatus {
    /// Search completed; the primal value is proven optimal (or, for a
    /// feasibility model, the ratio row is satisfied).
    Optimal,
    /// Stopped early because the gap dropped below the tolerance.
    Feasible { gap: f64 },
    /// Proven that the feasibility model has no solution.
    Infeasible,
    /// A time or node limit stopped the search.
    TimeLimit { gap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    #[serde(flatten)]
    pub status: SolveStatus,
    pub placement: Option<Placement>,
    pub primal: f64,
    pub dual_bound: f64,
    pub gap: f64,
    pub nodes: u64,
    pub elapsed: f64,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    pub fn is_infeasible(&self) -> bool {
        self.status == SolveStatus::Infeasible
    }
}

pub(crate) fn relative_gap(dual: f64, primal: f64) -> f64 {
    ((dual - primal) / primal.abs().max(1.0)).max(0.0)
}

/// A model reduced for search: always-true rows folded into `base`,
/// never-coverable rows dropped, identical rows merged with summed weight.
struct Compact {
    thresholds: Vec<f64>,
    weights: Vec<f64>,
    row_terms: Vec<Vec<(u32, f64)>>,
    /// `row_terms` by decreasing coefficient (ties: lower index).
    row_desc: Vec<Vec<(u32, f64)>>,
    cols: Vec<Vec<(u32, f64)>>,
    base: f64,
    integral: bool,
}

impl Compact {
    fn new(model: &IlpModel) -> Self {
        let mut index: HashMap<(u64, Vec<(u32, u64)>), usize> = HashMap::new();
        let mut c = Compact {
            thresholds: Vec::new(),
            weights: Vec::new(),
            row_terms: Vec::new(),
            row_desc: Vec::new(),
            cols: vec![Vec::new(); model.n_z],
            base: 0.0,
            integral: model.objective.iter().all(|w| w.fract() == 0.0),
        };
        for (row, &w) in model.rows.iter().zip(&model.objective) {
            if w == 0.0 {
                continue;
            }
            if row.threshold <= 0.0 {
                c.base += w;
                continue;
            }
            let total: f64 = row.terms.iter().map(|t| t.1).sum();
            if total < row.threshold * (1.0 - 1e-12) {
                continue;
            }
            let key = (
                row.threshold.to_bits(),
                row.terms.iter().map(|&(j, q)| (j, q.to_bits())).collect(),
            );
            match index.get(&key) {
                Some(&r) => c.weights[r] += w,
                None => {
                    index.insert(key, c.thresholds.len());
                    c.thresholds.push(row.threshold);
                    c.weights.push(w);
                    c.row_terms.push(row.terms.clone());
                }
            }
        }
        for (r, terms) in c.row_terms.iter().enumerate() {
            for &(j, q) in terms {
                c.cols[j as usize].push((r as u32, q));
            }
            let mut desc = terms.clone();
            desc.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            c.row_desc.push(desc);
        }
        c
    }

    fn n_rows(&self) -> usize {
        self.thresholds.len()
    }

    fn m(&self) -> usize {
        self.cols.len()
    }

    /// Covered weight of a selection, summing loads in ascending order.
    fn eval(&self, set: &[u32], loads: &mut [f64]) -> f64 {
        loads.iter_mut().for_each(|l| *l = 0.0);
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        for &j in &sorted {
            for &(r, q) in &self.cols[j as usize] {
                loads[r as usize] += q;
            }
        }
        (0..self.n_rows())
            .filter(|&r| self.thresholds[r] <= loads[r])
            .map(|r| self.weights[r])
            .sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum VarState {
    Free,
    In,
    Out,
}

struct NodeBound {
    value: f64,
    /// Free candidates with positive score, best first (ties: lower index).
    ranked: Vec<u32>,
}

struct Search<'a> {
    p: &'a Compact,
    k: usize,
    target: Option<f64>,
    load: Vec<f64>,
    covered: Vec<bool>,
    covered_w: f64,
    state: Vec<VarState>,
    selected: Vec<u32>,
    trail: Vec<(u32, f64, bool)>,
    best: f64,
    best_set: Vec<u32>,
    nodes: u64,
    start: Instant,
    limits: SolveLimits,
    aborted: bool,
    open_bound: f64,
    done: bool,
    root_bound: f64,
    stopped_on_gap: bool,
    score: Vec<f64>,
    reachable: Vec<bool>,
    scratch: Vec<f64>,
    /// Smallest coefficient that can still take part in completing a row.
    qmin: Vec<f64>,
}

impl<'a> Search<'a> {
    fn new(p: &'a Compact, k: usize, target: Option<f64>, limits: SolveLimits) -> Self {
        let n = p.n_rows();
        Self {
            p,
            k,
            target,
            load: vec![0.0; n],
            covered: vec![false; n],
            covered_w: 0.0,
            state: vec![VarState::Free; p.m()],
            selected: Vec::new(),
            trail: Vec::new(),
            best: f64::NEG_INFINITY,
            best_set: Vec::new(),
            nodes: 0,
            start: Instant::now(),
            limits,
            aborted: false,
            open_bound: f64::NEG_INFINITY,
            done: false,
            root_bound: f64::INFINITY,
            stopped_on_gap: false,
            score: vec![0.0; p.m()],
            reachable: vec![false; n],
            scratch: vec![0.0; n],
            qmin: vec![0.0; n],
        }
    }

    fn add(&mut self, j: u32) -> usize {
        let mark = self.trail.len();
        for &(r, q) in &self.p.cols[j as usize] {
            let r_us = r as usize;
            self.trail.push((r, self.load[r_us], self.covered[r_us]));
            self.load[r_us] += q;
            if !self.covered[r_us] && self.p.thresholds[r_us] <= self.load[r_us] {
                self.covered[r_us] = true;
                self.covered_w += self.p.weights[r_us];
            }
        }
        self.selected.push(j);
        mark
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (r, load, was_covered) = self.trail.pop().unwrap();
            let r = r as usize;
            if self.covered[r] && !was_covered {
                self.covered_w -= self.p.weights[r];
            }
            self.load[r] = load;
            self.covered[r] = was_covered;
        }
        self.selected.pop();
    }

    fn budget(&self) -> usize {
        self.k.saturating_sub(self.selected.len())
    }

    fn node_bound(&mut self) -> NodeBound {
        let b = self.budget();
        if b == 0 {
            return NodeBound {
                value: self.covered_w,
                ranked: Vec::new(),
            };
        }
        let p = self.p;
        let mut cap = 0.0;
        for r in 0..p.n_rows() {
            self.reachable[r] = false;
            if self.covered[r] {
                continue;
            }
            // At most `b` more sensors can contribute to the row, so a
            // candidate outside the top `b` only helps if, together with
            // the top `b − 1`, it reaches the deficit.
            let mut top_b = 0.0;
            let mut top_b1 = 0.0;
            let mut taken = 0;
            for &(j, q) in &p.row_desc[r] {
                if taken == b {
                    break;
                }
                if self.state[j as usize] == VarState::Free {
                    top_b1 = top_b;
                    top_b += q;
                    taken += 1;
                }
            }
            let t = p.thresholds[r];
            let deficit = t - self.load[r];
            if self.load[r] + top_b >= t - 1e-9 * t {
                self.reachable[r] = true;
                self.qmin[r] = deficit - top_b1 - 2e-9 * t;
                cap += p.weights[r];
            }
        }
        let mut ranked = Vec::new();
        for j in 0..p.m() {
            self.score[j] = 0.0;
            if self.state[j] != VarState::Free {
                continue;
            }
            let mut g = 0.0;
            for &(r, q) in &p.cols[j] {
                let r = r as usize;
                if !self.reachable[r] || q < self.qmin[r] {
                    continue;
                }
                let deficit = p.thresholds[r] - self.load[r];
                g += p.weights[r] * if q >= deficit { 1.0 } else { q / deficit };
            }
            self.score[j] = g;
            if g > 0.0 {
                ranked.push(j as u32);
            }
        }
        let score = &self.score;
        ranked.sort_by(|&a, &b| {
            score[b as usize]
                .total_cmp(&score[a as usize])
                .then(a.cmp(&b))
        });
        let top: f64 = ranked.iter().take(b).map(|&j| score[j as usize]).sum();
        NodeBound {
            value: self.covered_w + cap.min(top),
            ranked,
        }
    }

    /// Bound rounded to something safe to compare against incumbents.
    fn effective(&self, bound: f64) -> f64 {
        if self.p.integral {
            (bound + 1e-6).floor()
        } else {
            bound * (1.0 + 1e-12) + 1e-12
        }
    }

    fn limits_hit(&self) -> bool {
        if let Some(n) = self.limits.node_limit {
            if self.nodes > n {
                return true;
            }
        }
        if let Some(t) = self.limits.time_limit {
            if self.nodes % 16 == 0 && self.start.elapsed() >= t {
                return true;
            }
        }
        false
    }

    fn offer(&mut self, value: f64, set: &[u32]) -> bool {
        if value > self.best {
            self.best = value;
            self.best_set = set.to_vec();
            if let Some(t) = self.target {
                if value >= t {
                    self.done = true;
                }
            } else if self.limits.gap_tol > 0.0
                && relative_gap(self.root_bound, self.best) <= self.limits.gap_tol
            {
                self.done = true;
                self.stopped_on_gap = true;
            }
            true
        } else {
            false
        }
    }

    /// First-improvement 1-swap local search, then offer the result.
    fn improve_and_offer(&mut self, set: Vec<u32>) {
        let mut set = set;
        let mut value = self.p.eval(&set, &mut self.scratch);
        let mut in_set = vec![false; self.p.m()];
        for &j in &set {
            in_set[j as usize] = true;
        }
        let mut improved = true;
        while improved && !self.done {
            improved = false;
            'outer: for s in 0..set.len() {
                for j in 0..self.p.m() as u32 {
                    if in_set[j as usize] {
                        continue;
                    }
                    let old = set[s];
                    set[s] = j;
                    let v = self.p.eval(&set, &mut self.scratch);
                    if v > value {
                        in_set[old as usize] = false;
                        in_set[j as usize] = true;
                        value = v;
                        improved = true;
                        break 'outer;
                    }
                    set[s] = old;
                }
            }
            if self.target.is_some_and(|t| value >= t) {
                break;
            }
        }
        self.offer(value, &set);
    }

    fn greedy_start(&mut self) {
        let mut marks = Vec::new();
        while self.budget() > 0 {
            let nb = self.node_bound();
            let Some(&j) = nb.ranked.first() else { break };
            marks.push(self.add(j));
            self.state[j as usize] = VarState::In;
        }
        let set = self.selected.clone();
        while let Some(m) = marks.pop() {
            let j = *self.selected.last().unwrap();
            self.state[j as usize] = VarState::Free;
            self.undo(m);
        }
        self.improve_and_offer(set);
    }

    fn node(&mut self) {
        self.nodes += 1;
        if self.limits_hit() {
            self.aborted = true;
        }
        let nb = self.node_bound();
        let ub = self.effective(nb.value);
        if self.aborted {
            self.open_bound = self.open_bound.max(ub);
            return;
        }
        let current = self.covered_w;
        let here = self.selected.clone();
        self.offer(current, &here);
        if self.done || ub <= self.best {
            return;
        }
        if let Some(t) = self.target {
            if ub < t {
                return;
            }
        }
        let b = self.budget();
        if b == 0 || nb.ranked.is_empty() {
            return;
        }

        // Rounding: current selection plus the best-scored free candidates.
        let mut rounded = here.clone();
        rounded.extend(nb.ranked.iter().take(b));
        let v = self.p.eval(&rounded, &mut self.scratch);
        if v > self.best {
            self.improve_and_offer(rounded);
            if self.done || ub <= self.best {
                return;
            }
        }

        let j = nb.ranked[0];
        let mark = self.add(j);
        self.state[j as usize] = VarState::In;
        self.node();
        self.undo(mark);
        self.state[j as usize] = VarState::Free;
        if self.aborted {
            self.open_bound = self.open_bound.max(ub);
            return;
        }
        if self.done {
            return;
        }
        self.state[j as usize] = VarState::Out;
        self.node();
        self.state[j as usize] = VarState::Free;
    }
}

/// Solve `model` to optimality (or until a limit), returning the best
/// placement found. Never fails: hard instances end in `TimeLimit`.
pub fn solve(model: &IlpModel, limits: SolveLimits) -> SolveResult {
    let start = Instant::now();
    let compact = Compact::new(model);
    let k = model.k.min(model.n_z);
    let target = model
        .ratio_rhs
        .map(|rhs| rhs as f64 - compact.base);

    let mut search = Search::new(&compact, k, target, limits);
    search.start = start;
    if target.is_some_and(|t| t <= 0.0) {
        search.offer(0.0, &[]);
    } else {
        let root = search.node_bound();
        search.root_bound = search.effective(root.value);
        search.greedy_start();
        if !search.done {
            search.node();
        }
    }

    let mut chosen: Vec<usize> = search.best_set.iter().map(|&j| j as usize).collect();
    pad_selection(&mut chosen, k, model.n_z);
    let primal = model.objective_of(&chosen);
    let elapsed = start.elapsed().as_secs_f64();
    let placement = Some(Placement::new(chosen));

    if let Some(rhs) = model.ratio_rhs {
        let feasible = primal >= rhs as f64;
        if feasible {
            return SolveResult {
                status: SolveStatus::Optimal,
                placement,
                primal,
                dual_bound: primal,
                gap: 0.0,
                nodes: search.nodes,
                elapsed,
            };
        }
        if search.aborted {
            let dual = (search.open_bound + compact.base).max(primal);
            return SolveResult {
                status: SolveStatus::TimeLimit {
                    gap: relative_gap(dual, primal),
                },
                placement,
                primal,
                dual_bound: dual,
                gap: relative_gap(dual, primal),
                nodes: search.nodes,
                elapsed,
            };
        }
        // Exhausted: no selection reaches the ratio row.
        let dual = (rhs as f64 - 1.0).max(primal);
        return SolveResult {
            status: SolveStatus::Infeasible,
            placement: None,
            primal,
            dual_bound: dual,
            gap: relative_gap(dual, primal),
            nodes: search.nodes,
            elapsed,
        };
    }

    let (status, dual) = if search.aborted {
        let dual = (search.open_bound.max(search.best) + compact.base).max(primal);
        let gap = relative_gap(dual, primal);
        if gap == 0.0 {
            (SolveStatus::Optimal, primal)
        } else {
            (SolveStatus::TimeLimit { gap }, dual)
        }
    } else if search.stopped_on_gap {
        let dual = (search.root_bound + compact.base).max(primal);
        let gap = relative_gap(dual, primal);
        if gap == 0.0 {
            (SolveStatus::Optimal, primal)
        } else {
            (SolveStatus::Feasible { gap }, dual)
        }
    } else {
        (SolveStatus::Optimal, primal)
    };
    SolveResult {
        status,
        placement,
        primal,
        dual_bound: dual,
        gap: relative_gap(dual, primal),
        nodes: search.nodes,
        elapsed,
    }
}

/// Fill unused budget with the lowest-index unselected candidates, then sort.
/// Coverage is monotone in the selection, so this never lowers the objective.
pub(crate) fn pad_selection(chosen: &mut Vec<usize>, k: usize, m: usize) {
    let mut used = vec![false; m];
    for &j in chosen.iter() {
        used[j] = true;
    }
    let mut j = 0;
    while chosen.len() < k.min(m) {
        if !used[j] {
            chosen.push(j);
            used[j] = true;
        }
        j += 1;
    }
    chosen.sort_unstable();
}
