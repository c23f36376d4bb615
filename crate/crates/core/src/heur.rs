//! Region-based packing against a lateness bound.
//!
//! Each round solves the assignment subproblem over the current free regions,
//! commits the placed items at their region anchors and rebuilds the regions
//! from the committed layout: one region on top of every packed rectangle and
//! one to its right. Regions that no unpacked item can use in time are turned
//! into blocked rectangles that count against the bin's row capacities.

use crate::assign::{build_model, solve, AssignMode, AssignStatus, ModelInput, Region};
use crate::budget::SearchBudget;
use crate::dff::DffMatrix;
use crate::model::{Instance, Placement, Solution};
use serde::{Deserialize, Serialize};

/// A packed rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Block {
    fn of(r: &Region) -> Self {
        Block {
            x0: r.x,
            y0: r.y,
            x1: r.x + r.width,
            y1: r.y + r.height,
        }
    }

    fn overlaps(&self, o: &Block) -> bool {
        self.x0 < o.x1 && o.x0 < self.x1 && self.y0 < o.y1 && o.y0 < self.y1
    }
}

/// Region on top of block `i`: it starts at the block's top edge, spans the
/// free stretch of that line around the block's left edge and rises until the
/// first block above that stretch.
fn region_on_top(bin: usize, w: i64, h: i64, blocks: &[Block], i: usize) -> Option<Region> {
    let b = blocks[i];
    let y = b.y1;
    if y >= h {
        return None;
    }
    // Blocks crossing the horizontal line at height y.
    let crossing = |o: &&Block| o.y0 <= y && y < o.y1;
    if blocks
        .iter()
        .filter(crossing)
        .any(|o| o.x0 <= b.x0 && b.x0 < o.x1)
    {
        return None;
    }
    let left = blocks
        .iter()
        .filter(crossing)
        .filter(|o| o.x1 <= b.x0)
        .map(|o| o.x1)
        .max()
        .unwrap_or(0);
    let right = blocks
        .iter()
        .filter(crossing)
        .filter(|o| o.x0 > b.x0)
        .map(|o| o.x0)
        .min()
        .unwrap_or(w);
    let top = blocks
        .iter()
        .filter(|o| o.y0 >= y && o.x0 < right && left < o.x1)
        .map(|o| o.y0)
        .min()
        .unwrap_or(h);
    (top > y && right > left).then_some(Region {
        bin,
        x: left,
        y,
        width: right - left,
        height: top - y,
    })
}

/// Region to the right of block `i`, the mirror image of [`region_on_top`].
fn region_on_right(bin: usize, w: i64, h: i64, blocks: &[Block], i: usize) -> Option<Region> {
    let b = blocks[i];
    let x = b.x1;
    if x >= w {
        return None;
    }
    let crossing = |o: &&Block| o.x0 <= x && x < o.x1;
    if blocks
        .iter()
        .filter(crossing)
        .any(|o| o.y0 <= b.y0 && b.y0 < o.y1)
    {
        return None;
    }
    let bottom = blocks
        .iter()
        .filter(crossing)
        .filter(|o| o.y1 <= b.y0)
        .map(|o| o.y1)
        .max()
        .unwrap_or(0);
    let top = blocks
        .iter()
        .filter(crossing)
        .filter(|o| o.y0 > b.y0)
        .map(|o| o.y0)
        .min()
        .unwrap_or(h);
    let right = blocks
        .iter()
        .filter(|o| o.x0 >= x && o.y0 < top && bottom < o.y1)
        .map(|o| o.x0)
        .min()
        .unwrap_or(w);
    (right > x && top > bottom).then_some(Region {
        bin,
        x,
        y: bottom,
        width: right - x,
        height: top - bottom,
    })
}

/// Free regions of one bin given its packed blocks. An empty bin is one
/// region; duplicates are removed and of two regions with one anchor only
/// the larger is kept.
pub fn update_regions(bin: usize, w: i64, h: i64, blocks: &[Block]) -> Vec<Region> {
    if blocks.is_empty() {
        return vec![Region {
            bin,
            x: 0,
            y: 0,
            width: w,
            height: h,
        }];
    }
    let mut out: Vec<Region> = Vec::new();
    for i in 0..blocks.len() {
        for r in [
            region_on_top(bin, w, h, blocks, i),
            region_on_right(bin, w, h, blocks, i),
        ]
        .into_iter()
        .flatten()
        {
            match out.iter_mut().find(|o| (o.x, o.y) == (r.x, r.y)) {
                Some(o) if r.area() > o.area() => *o = r,
                Some(_) => {}
                None => out.push(r),
            }
        }
    }
    out
}

/// Splits regions into those some unpacked item can use within the bound and
/// the rest.
pub fn discard_useless(
    inst: &Instance,
    regions: Vec<Region>,
    unpacked: &[usize],
    bound: i64,
) -> (Vec<Region>, Vec<Region>) {
    regions.into_iter().partition(|e| {
        unpacked.iter().any(|&id| {
            let it = inst.item(id);
            inst.lateness(id, e.bin) < bound
                && (e.fits(it.width, it.height)
                    || (inst.rotatable(id) && e.fits(it.height, it.width)))
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeurOptions {
    pub mode: AssignMode,
    pub assign_budget: SearchBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeurStop {
    Packed,
    /// Some unpacked item has no region it could use.
    NoRegion,
    AssignInfeasible,
    /// A round committed nothing.
    NoProgress,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeurOutcome {
    /// The layout when every item was packed; its `l_max` is below the bound.
    pub solution: Option<Solution>,
    pub stop: HeurStop,
    pub rounds: u32,
    pub assign_nodes: u64,
    /// Blocked regions that overlap another blocked region of their bin.
    pub overlapping_dummies: u32,
}

/// Tries to pack every item into bins `1..=bins` with lateness below `bound`.
pub fn heur(
    inst: &Instance,
    matrix: &DffMatrix,
    bound: i64,
    bins: usize,
    profits: &[f64],
    opts: &HeurOptions,
) -> HeurOutcome {
    let m = matrix.len();
    // Committed items and blocked regions per bin; both are obstacles.
    let mut blocks: Vec<Vec<Block>> = vec![Vec::new(); bins + 1];
    let mut dummies: Vec<Vec<Block>> = vec![Vec::new(); bins + 1];
    let mut load: Vec<Vec<i64>> = vec![vec![0; m]; bins + 1];
    let mut item_load: Vec<Vec<i64>> = vec![vec![0; m]; bins + 1];
    let mut unpacked: Vec<usize> = inst.due_order();
    let mut placements: Vec<Placement> = Vec::with_capacity(inst.n());
    let mut out = HeurOutcome {
        solution: None,
        stop: HeurStop::NoRegion,
        rounds: 0,
        assign_nodes: 0,
        overlapping_dummies: 0,
    };

    loop {
        let mut regions = Vec::new();
        for k in 1..=bins {
            let obstacles: Vec<Block> = blocks[k].iter().chain(&dummies[k]).copied().collect();
            regions.extend(update_regions(k, inst.width, inst.height, &obstacles));
        }
        let (live, useless) = discard_useless(inst, regions, &unpacked, bound);
        for e in useless {
            let d = Block::of(&e);
            if dummies[e.bin].iter().any(|o| o.overlaps(&d)) {
                out.overlapping_dummies += 1;
            }
            dummies[e.bin].push(d);
            for (c, row) in matrix.rows.iter().enumerate() {
                load[e.bin][c] += row.scaled(e.width, e.height);
            }
        }
        let stranded = unpacked.iter().any(|&id| {
            let it = inst.item(id);
            !live.iter().any(|e| {
                inst.lateness(id, e.bin) < bound
                    && (e.fits(it.width, it.height)
                        || (inst.rotatable(id) && e.fits(it.height, it.width)))
            })
        });
        if stranded {
            out.stop = HeurStop::NoRegion;
            return out;
        }

        out.rounds += 1;
        let model = build_model(&ModelInput {
            inst,
            matrix,
            regions: &live,
            unpacked: &unpacked,
            profits,
            packed_load: &load,
            bound,
            bins,
            mode: opts.mode,
        });
        let res = solve(&model, &opts.assign_budget);
        out.assign_nodes += res.nodes;
        if res.status == AssignStatus::Infeasible {
            out.stop = HeurStop::AssignInfeasible;
            return out;
        }
        if res.placements.is_empty() {
            out.stop = HeurStop::NoProgress;
            return out;
        }
        for &(id, r, rotated) in &res.placements {
            let e = live[r];
            let (w, h) = inst.item(id).extents(rotated);
            let b = Block {
                x0: e.x,
                y0: e.y,
                x1: e.x + w,
                y1: e.y + h,
            };
            debug_assert!(blocks[e.bin].iter().all(|o| !o.overlaps(&b)));
            blocks[e.bin].push(b);
            for (c, row) in matrix.rows.iter().enumerate() {
                let v = if rotated {
                    row.scaled_r[id - 1].unwrap()
                } else {
                    row.scaled_o[id - 1]
                };
                load[e.bin][c] += v;
                item_load[e.bin][c] += v;
                debug_assert!(item_load[e.bin][c] <= row.capacity);
            }
            placements.push(Placement {
                item: id,
                bin: e.bin,
                x: e.x,
                y: e.y,
                rotated,
            });
        }
        unpacked.retain(|id| !res.placements.iter().any(|p| p.0 == *id));
        if unpacked.is_empty() {
            let sol = Solution::from_placements(inst, placements);
            debug_assert!(sol.l_max < bound);
            out.solution = Some(sol);
            out.stop = HeurStop::Packed;
            return out;
        }
    }
}
