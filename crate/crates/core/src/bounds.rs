//! Lower bounds: bins needed for an item set, and two bounds on `L_max`.
//!
//! `lb1` combines the bin-count bound with due-date prefixes. `lb3` solves
//! the relaxation that keeps bin assignment and orientation but replaces the
//! geometry by the feasibility constraints of a [`DffMatrix`]; its optimum is
//! found by binary search over candidate lateness values with an exact
//! depth-first feasibility test at each probe.

use crate::budget::{Meter, SearchBudget};
use crate::dff::DffMatrix;
use crate::model::{Instance, Item};
use serde::{Deserialize, Serialize};

/// Incremental load of one bin: item area plus scaled row sums.
#[derive(Debug, Clone)]
pub struct BinLoad {
    bin_area: i64,
    area: i64,
    rows: Vec<i64>,
    caps: Vec<i64>,
}

impl BinLoad {
    pub fn new(width: i64, height: i64, matrix: &DffMatrix) -> Self {
        BinLoad {
            bin_area: width * height,
            area: 0,
            rows: vec![0; matrix.len()],
            caps: matrix.rows.iter().map(|r| r.capacity).collect(),
        }
    }

    /// Adds an instance item in its cheapest orientation per row.
    pub fn add_item(&mut self, item: &Item, matrix: &DffMatrix) {
        self.area += item.area();
        for (acc, row) in self.rows.iter_mut().zip(&matrix.rows) {
            *acc += row.scaled_min(item.id - 1);
        }
    }

    pub fn remove_item(&mut self, item: &Item, matrix: &DffMatrix) {
        self.area -= item.area();
        for (acc, row) in self.rows.iter_mut().zip(&matrix.rows) {
            *acc -= row.scaled_min(item.id - 1);
        }
    }

    /// Adds an arbitrary rectangle (both orientations considered when `turnable`).
    pub fn add_rect(&mut self, w: i64, h: i64, turnable: bool, matrix: &DffMatrix) {
        self.area += w * h;
        for (acc, row) in self.rows.iter_mut().zip(&matrix.rows) {
            let o = row.scaled(w, h);
            *acc += if turnable { o.min(row.scaled(h, w)) } else { o };
        }
    }

    pub fn is_empty(&self) -> bool {
        self.area == 0
    }

    /// Lower bound on the number of bins this load needs.
    pub fn lb(&self) -> usize {
        if self.area == 0 {
            return 0;
        }
        let by_area = ceil_div(self.area, self.bin_area);
        self.rows
            .iter()
            .zip(&self.caps)
            .map(|(&s, &c)| ceil_div(s, c))
            .fold(by_area, i64::max) as usize
    }

    /// Same as `lb() <= 1`, without the divisions.
    pub fn fits_one_bin(&self) -> bool {
        self.area <= self.bin_area && self.rows.iter().zip(&self.caps).all(|(s, c)| s <= c)
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    (a + b - 1).div_euclid(b)
}

/// Valid lower bound on the number of `W × H` bins needed for `items`:
/// the larger of the area bound and, for every matrix row, the row sum with
/// each item in its cheaper orientation, rounded up.
pub fn bin_count_lb<'a>(
    items: impl IntoIterator<Item = &'a Item>,
    width: i64,
    height: i64,
    matrix: &DffMatrix,
) -> usize {
    let mut load = BinLoad::new(width, height, matrix);
    for it in items {
        load.add_item(it, matrix);
    }
    load.lb()
}

/// `max_j (P · LB(S_j) − d_[j])` over due-date prefixes `S_j`.
pub fn lb1(inst: &Instance, matrix: &DffMatrix) -> i64 {
    let mut load = BinLoad::new(inst.width, inst.height, matrix);
    let mut best = i64::MIN;
    for id in inst.due_order() {
        let it = inst.item(id);
        load.add_item(it, matrix);
        best = best.max(inst.proc_time * load.lb() as i64 - it.due);
    }
    best
}

/// Three-valued answer of a budgeted decision procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decision<T> {
    Feasible(T),
    Infeasible,
    Unknown,
}

impl<T> Decision<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Decision::Feasible(_))
    }
}

/// A witness for the relaxation: bin (1-based) and orientation per item index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaxAssignment {
    pub bin: Vec<usize>,
    pub rotated: Vec<bool>,
}

struct RelaxSearch<'a> {
    matrix: &'a DffMatrix,
    order: Vec<usize>,
    limit: Vec<usize>,
    suffix_min_limit: Vec<usize>,
    /// Per item: scaled row values for (unrotated, rotated?).
    values: Vec<(Vec<i64>, Option<Vec<i64>>)>,
    thresholds: Vec<usize>,
    /// demand[depth][t][c]: cheapest row-c mass of unassigned items with limit ≤ thresholds[t].
    demand: Vec<Vec<Vec<i64>>>,
    load: Vec<Vec<i64>>,
    count: Vec<usize>,
    bin_of: Vec<usize>,
    rotated: Vec<bool>,
    meter: Meter,
}

impl RelaxSearch<'_> {
    fn capacity_ok(&self, depth: usize) -> bool {
        let m = self.matrix.len();
        for c in 0..m {
            let cap = self.matrix.rows[c].capacity;
            let mut free = 0i64;
            let mut k = 0usize;
            for (t, &th) in self.thresholds.iter().enumerate() {
                while k < th {
                    free += cap - self.load[k][c];
                    k += 1;
                }
                if self.demand[depth][t][c] > free {
                    return false;
                }
            }
        }
        true
    }

    fn fits(&self, bin: usize, vals: &[i64]) -> bool {
        self.load[bin]
            .iter()
            .zip(vals)
            .zip(&self.matrix.rows)
            .all(|((l, v), row)| l + v <= row.capacity)
    }

    fn apply(&mut self, bin: usize, item: usize, rotated: bool, sign: i64) {
        let vals = if rotated {
            self.values[item].1.as_ref().expect("rotated values")
        } else {
            &self.values[item].0
        };
        for (l, v) in self.load[bin].iter_mut().zip(vals) {
            *l += sign * v;
        }
        if sign > 0 {
            self.count[bin] += 1;
            self.bin_of[item] = bin + 1;
            self.rotated[item] = rotated;
        } else {
            self.count[bin] -= 1;
        }
    }

    fn dfs(&mut self, depth: usize) -> Option<bool> {
        if !self.meter.tick() {
            return None;
        }
        if depth == self.order.len() {
            return Some(true);
        }
        if !self.capacity_ok(depth) {
            return Some(false);
        }
        let item = self.order[depth];
        let limit = self.limit[item];
        let interchangeable = self.suffix_min_limit[depth];

        let mut orientations = vec![false];
        if self.values[item].1.is_some() {
            orientations.push(true);
        }
        let peak = |v: &[i64]| -> f64 {
            v.iter()
                .zip(&self.matrix.rows)
                .map(|(&x, r)| x as f64 / r.capacity as f64)
                .fold(0.0, f64::max)
        };
        if orientations.len() == 2 {
            let o = peak(&self.values[item].0);
            let r = peak(self.values[item].1.as_ref().unwrap());
            if r < o {
                orientations.swap(0, 1);
            }
        }

        for rotated in orientations {
            let mut tried_fresh = false;
            for bin in 0..limit {
                if self.count[bin] == 0 && bin < interchangeable {
                    if tried_fresh {
                        continue;
                    }
                    tried_fresh = true;
                }
                let ok = {
                    let vals = if rotated {
                        self.values[item].1.as_ref().unwrap()
                    } else {
                        &self.values[item].0
                    };
                    self.fits(bin, vals)
                };
                if !ok {
                    continue;
                }
                self.apply(bin, item, rotated, 1);
                let res = self.dfs(depth + 1);
                self.apply(bin, item, rotated, -1);
                match res {
                    Some(false) => {}
                    other => return other,
                }
            }
        }
        Some(false)
    }
}

/// Is there an assignment of every item to bins `1..=b` (with orientation)
/// such that each item's lateness is at most `l` and every bin satisfies
/// every matrix row? Returns the decision and the nodes spent.
pub fn relax_feasible(
    inst: &Instance,
    matrix: &DffMatrix,
    l: i64,
    b: usize,
    budget: &SearchBudget,
) -> (Decision<RelaxAssignment>, u64) {
    let n = inst.n();
    let limit: Vec<usize> = inst
        .items
        .iter()
        .map(|it| ((l + it.due).div_euclid(inst.proc_time)).clamp(0, b as i64) as usize)
        .collect();
    if limit.contains(&0) {
        return (Decision::Infeasible, 0);
    }

    let values: Vec<(Vec<i64>, Option<Vec<i64>>)> = (0..n)
        .map(|idx| {
            let o = matrix.rows.iter().map(|r| r.scaled_o[idx]).collect();
            let r = inst.rotatable(idx + 1).then(|| {
                matrix
                    .rows
                    .iter()
                    .map(|r| r.scaled_r[idx].unwrap())
                    .collect()
            });
            (o, r)
        })
        .collect();

    let peak_o = |idx: usize| -> f64 {
        matrix
            .rows
            .iter()
            .map(|r| r.scaled_o[idx] as f64 / r.capacity as f64)
            .fold(0.0, f64::max)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| peak_o(b).total_cmp(&peak_o(a)).then(a.cmp(&b)));

    let mut suffix_min_limit = vec![usize::MAX; n + 1];
    for d in (0..n).rev() {
        suffix_min_limit[d] = suffix_min_limit[d + 1].min(limit[order[d]]);
    }

    let mut thresholds: Vec<usize> = limit.clone();
    thresholds.sort_unstable();
    thresholds.dedup();
    let m = matrix.len();
    let mut demand = vec![vec![vec![0i64; m]; thresholds.len()]; n + 1];
    for d in (0..n).rev() {
        let idx = order[d];
        demand[d] = demand[d + 1].clone();
        for (t, &th) in thresholds.iter().enumerate() {
            if limit[idx] <= th {
                for (c, row) in matrix.rows.iter().enumerate() {
                    demand[d][t][c] += row.scaled_min(idx);
                }
            }
        }
    }

    let mut search = RelaxSearch {
        matrix,
        order,
        limit,
        suffix_min_limit,
        values,
        thresholds,
        demand,
        load: vec![vec![0; m]; b],
        count: vec![0; b],
        bin_of: vec![0; n],
        rotated: vec![false; n],
        meter: budget.meter(),
    };
    let res = search.dfs(0);
    let nodes = search.meter.nodes;
    let decision = match res {
        Some(true) => Decision::Feasible(RelaxAssignment {
            bin: search.bin_of,
            rotated: search.rotated,
        }),
        Some(false) => Decision::Infeasible,
        None => Decision::Unknown,
    };
    (decision, nodes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lb3Outcome {
    /// Smallest candidate not proven infeasible; `None` when no candidate
    /// up to `b` bins is feasible.
    pub value: Option<i64>,
    /// True only when the optimum of the relaxation was proven.
    pub valid: bool,
    pub nodes: u64,
    pub probes: u32,
}

/// Candidate optimal values of the relaxation: `{kP − d_i}` for `k ≤ b`.
pub fn lateness_candidates(inst: &Instance, b: usize) -> Vec<i64> {
    let mut c: Vec<i64> = (1..=b as i64)
        .flat_map(|k| inst.items.iter().map(move |it| k * inst.proc_time - it.due))
        .collect();
    c.sort_unstable();
    c.dedup();
    c
}

/// Optimal value of the relaxation with `b` bins. `budget` applies to each
/// feasibility probe separately.
pub fn lb3(inst: &Instance, matrix: &DffMatrix, b: usize, budget: &SearchBudget) -> Lb3Outcome {
    let cand = lateness_candidates(inst, b);
    let (mut lo, mut hi) = (0usize, cand.len());
    let mut valid = true;
    let mut nodes = 0;
    let mut probes = 0;
    // Invariant: every candidate below `lo` is infeasible; `hi` is feasible
    // (or one past the end, or an unresolved probe when `valid` is false).
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (d, spent) = relax_feasible(inst, matrix, cand[mid], b, budget);
        nodes += spent;
        probes += 1;
        match d {
            Decision::Feasible(_) => hi = mid,
            Decision::Infeasible => lo = mid + 1,
            Decision::Unknown => {
                valid = false;
                hi = mid;
            }
        }
    }
    let value = cand.get(lo).copied();
    if value.is_none() {
        valid = false;
    }
    Lb3Outcome {
        value,
        valid,
        nodes,
        probes,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub lb1: i64,
    pub lb3: Option<i64>,
    pub lb3_valid: bool,
    pub lb3_nodes: u64,
    pub lb3_probes: u32,
    /// Bins the relaxation was allowed to use.
    pub bins: usize,
}

/// Both bounds; `upper` is any known achievable `L_max` and fixes the number
/// of bins the relaxation may use.
pub fn compute_bounds(
    inst: &Instance,
    matrix: &DffMatrix,
    upper: i64,
    budget: &SearchBudget,
) -> BoundsReport {
    let bins = inst.bins_for_bound(upper).max(1);
    let l1 = lb1(inst, matrix);
    let o = lb3(inst, matrix, bins, budget);
    BoundsReport {
        lb1: l1,
        lb3: o.value,
        lb3_valid: o.valid,
        lb3_nodes: o.nodes,
        lb3_probes: o.probes,
        bins,
    }
}
