//! The assignment subproblem: put unpacked items into free regions.
//!
//! Every item either goes to the anchor of one region it fits (optionally
//! turned), is reserved for a later round in some bin (full mode), or stays
//! out (relaxed mode). At most one item per region, placed items in
//! overlapping regions must not collide, and in full mode every bin keeps the
//! matrix rows satisfied for what is already packed, what is placed now and
//! what is reserved. The objective rewards items by profit over region area.

use crate::budget::SearchBudget;
use crate::dff::DffMatrix;
use crate::model::Instance;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A free rectangle of a bin, anchored at its bottom-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Region {
    pub bin: usize,
    pub x: i64,
    pub y: i64,
    pub width: i64,
    pub height: i64,
}

impl Region {
    pub fn area(&self) -> i64 {
        self.width * self.height
    }

    pub fn fits(&self, w: i64, h: i64) -> bool {
        w <= self.width && h <= self.height
    }

    pub fn intersects(&self, other: &Region) -> bool {
        self.bin == other.bin
            && self.x < other.x + other.width
            && other.x < self.x + self.width
            && self.y < other.y + other.height
            && other.y < self.y + self.height
    }
}

/// How two overlapping regions of one bin sit relative to each other, seen
/// from the first one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OverlapPattern {
    /// First is left of and higher than the second.
    I,
    /// First is left of and lower than the second.
    II,
    /// Same left edge, first is higher.
    III,
    /// Same bottom edge, first is further left.
    IV,
    None,
}

pub fn classify_pair(e: &Region, f: &Region) -> OverlapPattern {
    if !e.intersects(f) {
        return OverlapPattern::None;
    }
    use std::cmp::Ordering::*;
    match (e.x.cmp(&f.x), e.y.cmp(&f.y)) {
        (Less, Greater) => OverlapPattern::I,
        (Less, Less) => OverlapPattern::II,
        (Equal, Greater) => OverlapPattern::III,
        (Less, Equal) => OverlapPattern::IV,
        _ => OverlapPattern::None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssignMode {
    /// Every item is placed now or reserved for a later round.
    Full,
    /// Items may stay out; no reservations and no row constraints.
    Relaxed,
}

/// One unpacked item as the model sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignItem {
    pub id: usize,
    pub width: i64,
    pub height: i64,
    pub profit: f64,
    /// (region index, rotated) pairs the item fits within the lateness bound.
    pub places: Vec<(usize, bool)>,
    /// (bin, rotated) pairs available for reservation.
    pub reserves: Vec<(usize, bool)>,
    row_o: Vec<i64>,
    row_r: Option<Vec<i64>>,
}

impl AssignItem {
    pub fn extents(&self, rotated: bool) -> (i64, i64) {
        if rotated {
            (self.height, self.width)
        } else {
            (self.width, self.height)
        }
    }

    fn rows(&self, rotated: bool) -> &[i64] {
        if rotated {
            self.row_r.as_deref().expect("rotatable item")
        } else {
            &self.row_o
        }
    }
}

/// The linear constraints of the model, listed for inspection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// At most one item per region.
    RegionCapacity {
        region: usize,
    },
    /// Item placed, reserved, or (relaxed) neither.
    ItemCompleteness {
        item: usize,
        exact: bool,
    },
    /// Row `row` of bin `bin` with remaining scaled capacity `rhs`.
    Feasibility {
        bin: usize,
        row: usize,
        rhs: i64,
    },
    UsedWidth {
        region: usize,
    },
    UsedHeight {
        region: usize,
    },
    /// Used part of `left` ends before `right` starts, when selected.
    LeftOf {
        left: usize,
        right: usize,
    },
    /// Pattern I: used part of `lower` ends below `upper`, when selected.
    BelowLower {
        lower: usize,
        upper: usize,
    },
    /// Pattern II: used part of `lower` ends below `upper`, when selected.
    BelowUpper {
        lower: usize,
        upper: usize,
    },
    /// Pattern III: an item in `upper` caps the used height of `lower`.
    AlignedVertical {
        upper: usize,
        lower: usize,
    },
    /// Pattern IV: an item in `right` caps the used width of `left`.
    AlignedHorizontal {
        left: usize,
        right: usize,
    },
    /// Pattern I: left-of or below must hold.
    DisjunctionLower {
        first: usize,
        second: usize,
    },
    /// Pattern II: left-of or below must hold.
    DisjunctionUpper {
        first: usize,
        second: usize,
    },
    /// Two regions with one anchor cannot both be used.
    SameAnchor {
        first: usize,
        second: usize,
    },
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::RegionCapacity { region } => write!(f, "region_capacity e{region}"),
            Constraint::ItemCompleteness { item, exact } => {
                write!(
                    f,
                    "item_completeness i{item} {}",
                    if *exact { "=1" } else { "<=1" }
                )
            }
            Constraint::Feasibility { bin, row, rhs } => {
                write!(f, "feasibility k{bin} c{row} rhs={rhs}")
            }
            Constraint::UsedWidth { region } => write!(f, "used_width e{region}"),
            Constraint::UsedHeight { region } => write!(f, "used_height e{region}"),
            Constraint::LeftOf { left, right } => write!(f, "left_of e{left} e{right}"),
            Constraint::BelowLower { lower, upper } => write!(f, "below_lower e{lower} e{upper}"),
            Constraint::BelowUpper { lower, upper } => write!(f, "below_upper e{lower} e{upper}"),
            Constraint::AlignedVertical { upper, lower } => {
                write!(f, "aligned_vertical e{upper} e{lower}")
            }
            Constraint::AlignedHorizontal { left, right } => {
                write!(f, "aligned_horizontal e{left} e{right}")
            }
            Constraint::DisjunctionLower { first, second } => {
                write!(f, "disjunction_lower e{first} e{second}")
            }
            Constraint::DisjunctionUpper { first, second } => {
                write!(f, "disjunction_upper e{first} e{second}")
            }
            Constraint::SameAnchor { first, second } => write!(f, "same_anchor e{first} e{second}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssignModel {
    pub mode: AssignMode,
    pub regions: Vec<Region>,
    pub items: Vec<AssignItem>,
    pub bins: usize,
    /// Scaled capacity left per bin (1-based, index 0 unused) and row.
    pub residual: Vec<Vec<i64>>,
    /// Ordered overlapping pairs with their pattern (same-anchor pairs too).
    pub pairs: Vec<(usize, usize, OverlapPattern)>,
    /// Some item has neither a region nor a reservation.
    pub trivially_infeasible: bool,
}

/// Inputs describing the current partial packing.
pub struct ModelInput<'a> {
    pub inst: &'a Instance,
    pub matrix: &'a DffMatrix,
    pub regions: &'a [Region],
    /// Ids of the items still to pack.
    pub unpacked: &'a [usize],
    /// Profit per item, indexed by id − 1.
    pub profits: &'a [f64],
    /// Scaled row load already committed per bin (1-based, index 0 unused).
    pub packed_load: &'a [Vec<i64>],
    /// Items must end with lateness strictly below this.
    pub bound: i64,
    pub bins: usize,
    pub mode: AssignMode,
}

pub fn build_model(input: &ModelInput<'_>) -> AssignModel {
    let inst = input.inst;
    let matrix = input.matrix;
    let regions = input.regions.to_vec();
    let mut items = Vec::with_capacity(input.unpacked.len());
    let mut trivially_infeasible = false;
    for &id in input.unpacked {
        let it = inst.item(id);
        let rot = inst.rotatable(id) && it.width != it.height;
        let mut places = Vec::new();
        for (r, e) in regions.iter().enumerate() {
            if e.bin > input.bins || inst.lateness(id, e.bin) >= input.bound {
                continue;
            }
            if e.fits(it.width, it.height) {
                places.push((r, false));
            }
            if rot && e.fits(it.height, it.width) {
                places.push((r, true));
            }
        }
        let mut reserves = Vec::new();
        if input.mode == AssignMode::Full {
            for k in 1..=input.bins {
                for rotated in [false, true] {
                    if places
                        .iter()
                        .any(|&(r, o)| o == rotated && regions[r].bin == k)
                    {
                        reserves.push((k, rotated));
                    }
                }
            }
        }
        if places.is_empty() && reserves.is_empty() {
            trivially_infeasible = true;
        }
        items.push(AssignItem {
            id,
            width: it.width,
            height: it.height,
            profit: input.profits[id - 1],
            places,
            reserves,
            row_o: matrix.rows.iter().map(|row| row.scaled_o[id - 1]).collect(),
            row_r: rot.then(|| {
                matrix
                    .rows
                    .iter()
                    .map(|row| row.scaled_r[id - 1].unwrap())
                    .collect()
            }),
        });
    }

    let mut residual = vec![Vec::new(); input.bins + 1];
    for (k, res) in residual.iter_mut().enumerate().skip(1) {
        *res = matrix
            .rows
            .iter()
            .enumerate()
            .map(|(c, row)| row.capacity - input.packed_load.get(k).map_or(0, |l| l[c]))
            .collect();
    }

    let mut pairs = Vec::new();
    for a in 0..regions.len() {
        for b in 0..regions.len() {
            if a == b {
                continue;
            }
            let p = classify_pair(&regions[a], &regions[b]);
            let same_anchor = a < b
                && regions[a].intersects(&regions[b])
                && (regions[a].x, regions[a].y) == (regions[b].x, regions[b].y);
            if p != OverlapPattern::None || same_anchor {
                pairs.push((a, b, p));
            }
        }
    }

    AssignModel {
        mode: input.mode,
        regions,
        items,
        bins: input.bins,
        residual,
        pairs,
        trivially_infeasible,
    }
}

impl AssignModel {
    /// Every constraint of the model, in a fixed order.
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut out = Vec::new();
        for region in 0..self.regions.len() {
            out.push(Constraint::RegionCapacity { region });
        }
        for it in &self.items {
            out.push(Constraint::ItemCompleteness {
                item: it.id,
                exact: self.mode == AssignMode::Full,
            });
        }
        if self.mode == AssignMode::Full {
            for bin in 1..=self.bins {
                for (row, &rhs) in self.residual[bin].iter().enumerate() {
                    out.push(Constraint::Feasibility { bin, row, rhs });
                }
            }
        }
        for region in 0..self.regions.len() {
            out.push(Constraint::UsedWidth { region });
            out.push(Constraint::UsedHeight { region });
        }
        for &(e, f, p) in &self.pairs {
            match p {
                OverlapPattern::I => {
                    out.push(Constraint::LeftOf { left: e, right: f });
                    out.push(Constraint::BelowLower { lower: f, upper: e });
                    out.push(Constraint::DisjunctionLower {
                        first: e,
                        second: f,
                    });
                }
                OverlapPattern::II => {
                    out.push(Constraint::LeftOf { left: e, right: f });
                    out.push(Constraint::BelowUpper { lower: e, upper: f });
                    out.push(Constraint::DisjunctionUpper {
                        first: e,
                        second: f,
                    });
                }
                OverlapPattern::III => out.push(Constraint::AlignedVertical { upper: e, lower: f }),
                OverlapPattern::IV => out.push(Constraint::AlignedHorizontal { left: e, right: f }),
                OverlapPattern::None => out.push(Constraint::SameAnchor {
                    first: e,
                    second: f,
                }),
            }
        }
        out
    }

    /// Objective of a complete assignment, or `None` when it breaks a
    /// constraint. `placements` and `reservations` use the layout of
    /// [`AssignResult`].
    pub fn evaluate(
        &self,
        placements: &[(usize, usize, bool)],
        reservations: &[(usize, usize, bool)],
    ) -> Option<f64> {
        let full = self.mode == AssignMode::Full;
        if !full && !reservations.is_empty() {
            return None;
        }
        let mut used: Vec<Option<(i64, i64)>> = vec![None; self.regions.len()];
        let mut residual = self.residual.clone();
        let mut seen = vec![0usize; self.items.len()];
        let mut obj = 0.0;
        for &(id, r, rotated) in placements {
            let i = self.items.iter().position(|it| it.id == id)?;
            let it = &self.items[i];
            if !it.places.contains(&(r, rotated)) || used[r].is_some() {
                return None;
            }
            used[r] = Some(it.extents(rotated));
            seen[i] += 1;
            obj += it.profit / self.regions[r].area() as f64;
            for (c, v) in it.rows(rotated).iter().enumerate() {
                residual[self.regions[r].bin][c] -= v;
            }
        }
        for &(id, k, rotated) in reservations {
            let i = self.items.iter().position(|it| it.id == id)?;
            let it = &self.items[i];
            if !it.reserves.contains(&(k, rotated)) {
                return None;
            }
            seen[i] += 1;
            for (c, v) in it.rows(rotated).iter().enumerate() {
                residual[k][c] -= v;
            }
        }
        let complete = seen.iter().all(|&s| if full { s == 1 } else { s <= 1 });
        if !complete {
            return None;
        }
        if full && residual.iter().flatten().any(|&r| r < 0) {
            return None;
        }
        let pairs_ok = self
            .pairs
            .iter()
            .all(|&(e, f, p)| pair_ok(p, &self.regions[e], &self.regions[f], used[e], used[f]));
        pairs_ok.then_some(obj)
    }

    pub fn dump(&self) -> String {
        self.constraints()
            .iter()
            .map(|c| format!("{c}\n"))
            .collect()
    }
}

/// The pair conditions for used extents `(w, h)` of two regions (zero when
/// a region is empty).
fn pair_ok(
    p: OverlapPattern,
    e: &Region,
    f: &Region,
    ue: Option<(i64, i64)>,
    uf: Option<(i64, i64)>,
) -> bool {
    let (we, he) = ue.unwrap_or((0, 0));
    let (_wf, hf) = uf.unwrap_or((0, 0));
    match p {
        OverlapPattern::I => e.x + we <= f.x || f.y + hf <= e.y,
        OverlapPattern::II => e.x + we <= f.x || e.y + he <= f.y,
        OverlapPattern::III => ue.is_none() || hf <= e.y - f.y,
        OverlapPattern::IV => uf.is_none() || we <= f.x - e.x,
        OverlapPattern::None => ue.is_none() || uf.is_none(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AssignStatus {
    Optimal,
    /// Budget ran out after a feasible assignment was found.
    Incumbent,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignResult {
    pub status: AssignStatus,
    /// (item id, region index, rotated)
    pub placements: Vec<(usize, usize, bool)>,
    /// (item id, bin, rotated)
    pub reservations: Vec<(usize, usize, bool)>,
    pub objective: f64,
    pub nodes: u64,
    pub budget_exhausted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Choice {
    Place(usize, bool),
    Reserve(usize, bool),
    Skip,
}

struct Solver<'a> {
    model: &'a AssignModel,
    order: Vec<usize>,
    /// Per item: place options sorted by unit profit, with that profit.
    options: Vec<Vec<(usize, bool, f64)>>,
    /// best_suffix[d][r]: sum of the r largest best-unit-profits of order[d..].
    best_prefix: Vec<f64>,
    conflicts: Vec<Vec<(usize, OverlapPattern, bool)>>,
    used: Vec<Option<(i64, i64)>>,
    free_regions: usize,
    residual: Vec<Vec<i64>>,
    choice: Vec<Choice>,
    best: Option<(f64, Vec<Choice>)>,
    meter: crate::budget::Meter,
    exhausted: bool,
}

impl Solver<'_> {
    fn geometry_ok(&self, r: usize, ext: (i64, i64)) -> bool {
        let regions = &self.model.regions;
        self.conflicts[r].iter().all(|&(o, p, r_first)| {
            let uo = self.used[o];
            if r_first {
                pair_ok(p, &regions[r], &regions[o], Some(ext), uo)
            } else {
                pair_ok(p, &regions[o], &regions[r], uo, Some(ext))
            }
        })
    }

    fn rows_ok(&self, bin: usize, vals: &[i64]) -> bool {
        self.residual[bin].iter().zip(vals).all(|(r, v)| v <= r)
    }

    fn shift_rows(&mut self, bin: usize, vals: &[i64], sign: i64) {
        for (r, v) in self.residual[bin].iter_mut().zip(vals) {
            *r -= sign * v;
        }
    }

    fn bound(&self, depth: usize, obj: f64) -> f64 {
        let end = (depth + self.free_regions).min(self.order.len());
        obj + self.best_prefix[end] - self.best_prefix[depth]
    }

    fn dfs(&mut self, depth: usize, obj: f64) {
        if self.exhausted {
            return;
        }
        if !self.meter.tick() {
            self.exhausted = true;
            return;
        }
        if depth == self.order.len() {
            if self.best.as_ref().is_none_or(|(b, _)| obj > *b) {
                self.best = Some((obj, self.choice.clone()));
            }
            return;
        }
        if let Some((b, _)) = &self.best {
            if self.bound(depth, obj) <= *b {
                return;
            }
        }
        let full = self.model.mode == AssignMode::Full;
        let i = self.order[depth];
        let item = &self.model.items[i];

        for k in 0..self.options[i].len() {
            let (r, rotated, unit) = self.options[i][k];
            if self.used[r].is_some() {
                continue;
            }
            let ext = item.extents(rotated);
            if !self.geometry_ok(r, ext) {
                continue;
            }
            let bin = self.model.regions[r].bin;
            if full && !self.rows_ok(bin, item.rows(rotated)) {
                continue;
            }
            self.used[r] = Some(ext);
            self.free_regions -= 1;
            if full {
                self.shift_rows(bin, item.rows(rotated), 1);
            }
            self.choice[i] = Choice::Place(r, rotated);
            self.dfs(depth + 1, obj + unit);
            if full {
                self.shift_rows(bin, item.rows(rotated), -1);
            }
            self.free_regions += 1;
            self.used[r] = None;
            if self.exhausted {
                return;
            }
        }
        if full {
            for &(bin, rotated) in &item.reserves {
                if !self.rows_ok(bin, item.rows(rotated)) {
                    continue;
                }
                self.shift_rows(bin, item.rows(rotated), 1);
                self.choice[i] = Choice::Reserve(bin, rotated);
                self.dfs(depth + 1, obj);
                self.shift_rows(bin, item.rows(rotated), -1);
                if self.exhausted {
                    return;
                }
            }
        } else {
            self.choice[i] = Choice::Skip;
            self.dfs(depth + 1, obj);
        }
        self.choice[i] = Choice::Skip;
    }
}

/// Branch and bound over the model. Items are branched in non-increasing
/// order of their best profit per region area; places come before
/// reservations, and among equal objectives the first solution found wins.
pub fn solve(model: &AssignModel, budget: &SearchBudget) -> AssignResult {
    let infeasible = |nodes, exhausted| AssignResult {
        status: AssignStatus::Infeasible,
        placements: Vec::new(),
        reservations: Vec::new(),
        objective: 0.0,
        nodes,
        budget_exhausted: exhausted,
    };
    if model.mode == AssignMode::Full && model.trivially_infeasible {
        return infeasible(0, false);
    }
    let n = model.items.len();
    let options: Vec<Vec<(usize, bool, f64)>> = model
        .items
        .iter()
        .map(|it| {
            let mut v: Vec<(usize, bool, f64)> = it
                .places
                .iter()
                .map(|&(r, o)| (r, o, it.profit / model.regions[r].area() as f64))
                .collect();
            v.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
            v
        })
        .collect();
    let best_unit: Vec<f64> = options
        .iter()
        .map(|v| v.first().map_or(0.0, |o| o.2))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| best_unit[b].total_cmp(&best_unit[a]).then(a.cmp(&b)));
    let mut best_prefix = vec![0.0; n + 1];
    for d in 0..n {
        best_prefix[d + 1] = best_prefix[d] + best_unit[order[d]];
    }
    let mut conflicts = vec![Vec::new(); model.regions.len()];
    for &(e, f, p) in &model.pairs {
        conflicts[e].push((f, p, true));
        conflicts[f].push((e, p, false));
    }

    let mut s = Solver {
        model,
        order,
        options,
        best_prefix,
        conflicts,
        used: vec![None; model.regions.len()],
        free_regions: model.regions.len(),
        residual: model.residual.clone(),
        choice: vec![Choice::Skip; n],
        best: None,
        meter: budget.meter(),
        exhausted: false,
    };
    s.dfs(0, 0.0);
    let nodes = s.meter.nodes;
    let exhausted = s.exhausted;
    let Some((objective, choice)) = s.best else {
        return infeasible(nodes, exhausted);
    };
    let mut placements = Vec::new();
    let mut reservations = Vec::new();
    for (it, c) in model.items.iter().zip(choice) {
        match c {
            Choice::Place(r, o) => placements.push((it.id, r, o)),
            Choice::Reserve(k, o) => reservations.push((it.id, k, o)),
            Choice::Skip => {}
        }
    }
    AssignResult {
        status: if exhausted {
            AssignStatus::Incumbent
        } else {
            AssignStatus::Optimal
        },
        placements,
        reservations,
        objective,
        nodes,
        budget_exhausted: exhausted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dff::{build_matrix, DffParams};

    fn region(bin: usize, x: i64, y: i64, width: i64, height: i64) -> Region {
        Region {
            bin,
            x,
            y,
            width,
            height,
        }
    }

    fn model(
        inst: &Instance,
        regions: &[Region],
        unpacked: &[usize],
        bound: i64,
        bins: usize,
        mode: AssignMode,
    ) -> AssignModel {
        let matrix = build_matrix(inst, &DffParams::default());
        let profits: Vec<f64> = inst.items.iter().map(|it| it.area() as f64).collect();
        let load = vec![vec![0; matrix.len()]; bins + 1];
        build_model(&ModelInput {
            inst,
            matrix: &matrix,
            regions,
            unpacked,
            profits: &profits,
            packed_load: &load,
            bound,
            bins,
            mode,
        })
    }

    #[test]
    fn pattern_examples() {
        let e = region(1, 0, 3, 4, 4);
        let f = region(1, 2, 0, 4, 5);
        assert_eq!(classify_pair(&e, &f), OverlapPattern::I);
        assert_eq!(classify_pair(&f, &e), OverlapPattern::None);
        assert_eq!(
            classify_pair(&region(1, 0, 0, 2, 2), &region(1, 5, 5, 2, 2)),
            OverlapPattern::None
        );
        assert_eq!(
            classify_pair(&region(1, 0, 0, 2, 2), &region(1, 0, 0, 3, 1)),
            OverlapPattern::None
        );
        assert_eq!(
            classify_pair(&region(1, 0, 0, 4, 4), &region(1, 1, 1, 4, 4)),
            OverlapPattern::II
        );
        assert_eq!(
            classify_pair(&region(1, 0, 2, 4, 4), &region(1, 0, 0, 4, 4)),
            OverlapPattern::III
        );
        assert_eq!(
            classify_pair(&region(1, 0, 0, 4, 4), &region(1, 2, 0, 4, 4)),
            OverlapPattern::IV
        );
        assert_eq!(
            classify_pair(&region(1, 0, 0, 4, 4), &region(2, 0, 0, 4, 4)),
            OverlapPattern::None
        );
    }

    #[test]
    fn single_region_single_item() {
        let inst = Instance::new(10, 10, 100, [(4, 3, 100)]).unwrap();
        let m = model(
            &inst,
            &[region(1, 0, 0, 10, 10)],
            &[1],
            1,
            1,
            AssignMode::Full,
        );
        assert_eq!(m.items[0].places, vec![(0, false), (0, true)]);
        let r = solve(&m, &SearchBudget::UNLIMITED);
        assert_eq!(r.status, AssignStatus::Optimal);
        assert_eq!(r.placements, vec![(1, 0, false)]);
        assert!((r.objective - 12.0 / 100.0).abs() < 1e-12);
    }

    #[test]
    fn no_region_within_bound_is_trivially_infeasible() {
        let inst = Instance::new(10, 10, 100, [(4, 3, 100)]).unwrap();
        let m = model(
            &inst,
            &[region(1, 0, 0, 10, 10)],
            &[1],
            0,
            1,
            AssignMode::Full,
        );
        assert!(m.trivially_infeasible);
        assert_eq!(
            solve(&m, &SearchBudget::UNLIMITED).status,
            AssignStatus::Infeasible
        );
    }

    #[test]
    fn second_item_is_reserved() {
        let inst = Instance::new(10, 10, 100, [(6, 6, 100), (4, 4, 150)]).unwrap();
        let m = model(
            &inst,
            &[region(1, 0, 0, 10, 10)],
            &[1, 2],
            1000,
            1,
            AssignMode::Full,
        );
        let r = solve(&m, &SearchBudget::UNLIMITED);
        assert_eq!(r.status, AssignStatus::Optimal);
        assert_eq!(r.placements, vec![(1, 0, false)]);
        assert_eq!(r.reservations.len(), 1);
        assert_eq!(r.reservations[0].0, 2);
    }

    #[test]
    fn pattern_two_constraint_trace() {
        let inst = Instance::new(10, 10, 100, [(3, 3, 100), (3, 3, 100)]).unwrap();
        let regions = [region(1, 0, 0, 6, 6), region(1, 2, 2, 6, 6)];
        let m = model(&inst, &regions, &[1, 2], 1000, 1, AssignMode::Full);
        let cs = m.constraints();
        assert!(cs.contains(&Constraint::LeftOf { left: 0, right: 1 }));
        assert!(cs.contains(&Constraint::BelowUpper { lower: 0, upper: 1 }));
        assert!(cs.contains(&Constraint::DisjunctionUpper {
            first: 0,
            second: 1
        }));
        assert!(!cs.iter().any(|c| matches!(
            c,
            Constraint::BelowLower { .. }
                | Constraint::AlignedVertical { .. }
                | Constraint::AlignedHorizontal { .. }
        )));
    }

    #[test]
    fn aligned_vertical_blocks_second_item() {
        // Two regions share their left edge; an item in the upper one leaves
        // the lower one only 2 units of height, too little for a 3x3 item.
        let inst = Instance::new(10, 10, 100, [(3, 3, 100), (3, 3, 100)]).unwrap();
        let regions = [region(1, 0, 2, 3, 8), region(1, 0, 0, 3, 10)];
        let m = model(&inst, &regions, &[1, 2], 1000, 1, AssignMode::Full);
        assert!(m
            .constraints()
            .contains(&Constraint::AlignedVertical { upper: 0, lower: 1 }));
        // With reservations barred, both items must be placed now.
        let mut m = m;
        for it in &mut m.items {
            it.reserves.clear();
        }
        assert_eq!(
            solve(&m, &SearchBudget::UNLIMITED).status,
            AssignStatus::Infeasible
        );
    }

    #[test]
    fn relaxed_mode_is_never_infeasible() {
        let inst = Instance::new(10, 10, 100, [(6, 6, 100), (6, 6, 100)]).unwrap();
        let m = model(
            &inst,
            &[region(1, 0, 0, 7, 7)],
            &[1, 2],
            1000,
            1,
            AssignMode::Relaxed,
        );
        let r = solve(&m, &SearchBudget::UNLIMITED);
        assert_eq!(r.status, AssignStatus::Optimal);
        assert_eq!(r.placements.len(), 1);
        assert!(r.reservations.is_empty());
    }
}
