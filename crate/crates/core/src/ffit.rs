//! First-fit construction in due-date order.
//!
//! Bins are filled one at a time. A bin first takes the longest due-date
//! prefix that passes the bin-count bound, sheds items from the back until
//! the set actually packs, then scans the remaining items and keeps each one
//! that still fits. Two optional limits keep the scan cheap on large
//! instances: a cap on consecutive failed tests (`sigma`) and a strip test
//! that rules out every later item at least as long as a failed one (`mu`).

use crate::bounds::{BinLoad, Decision};
use crate::budget::SearchBudget;
use crate::dff::DffMatrix;
use crate::model::{Instance, Placement, Solution};
use crate::opp::{pack, pack_items, PackStats, Rect, Spot};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FfOptions {
    pub pack_budget: SearchBudget,
    /// Close the bin after this many consecutive failed tests.
    pub sigma: Option<usize>,
    pub mu_strategy: bool,
}

impl Default for FfOptions {
    fn default() -> Self {
        FfOptions {
            pack_budget: SearchBudget::nodes(20_000),
            sigma: None,
            mu_strategy: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FfResult {
    pub solution: Solution,
    pub stats: PackStats,
}

fn max_dim(inst: &Instance, id: usize) -> i64 {
    let it = inst.item(id);
    it.width.max(it.height)
}

/// A `len × 1` strip, standing whichever way it fits.
fn strip(len: i64, bin_w: i64, bin_h: i64) -> Option<Rect> {
    if len <= bin_w {
        Some(Rect::new(len, 1, 1 <= bin_w && len <= bin_h))
    } else if len <= bin_h {
        Some(Rect::new(1, len, true))
    } else {
        None
    }
}

struct OpenBin<'a> {
    inst: &'a Instance,
    matrix: &'a DffMatrix,
    budget: SearchBudget,
    ids: Vec<usize>,
    load: BinLoad,
    spots: Vec<Spot>,
}

impl OpenBin<'_> {
    fn push(&mut self, id: usize) {
        self.ids.push(id);
        self.load.add_item(self.inst.item(id), self.matrix);
    }

    fn pop(&mut self) -> usize {
        let id = self.ids.pop().expect("bin is not empty");
        self.load.remove_item(self.inst.item(id), self.matrix);
        id
    }

    /// Tries to add `id`; keeps it only when the bound and the packing agree.
    fn try_add(&mut self, id: usize, stats: &mut PackStats) -> bool {
        self.push(id);
        if self.load.fits_one_bin() {
            if let Decision::Feasible(s) =
                pack_items(self.inst, &self.ids, self.matrix, &self.budget, stats)
            {
                self.spots = s;
                return true;
            }
        }
        self.pop();
        false
    }

    /// Does a `len × 1` strip still fit next to the current contents?
    fn strip_fits(&self, len: i64, stats: &mut PackStats) -> bool {
        let Some(dummy) = strip(len, self.inst.width, self.inst.height) else {
            return false;
        };
        let mut load = self.load.clone();
        load.add_rect(dummy.width, dummy.height, dummy.rotatable, self.matrix);
        if !load.fits_one_bin() {
            return false;
        }
        let mut rects: Vec<Rect> = self
            .ids
            .iter()
            .map(|&id| crate::opp::item_rect(self.inst, id))
            .collect();
        rects.push(dummy);
        let out = pack(
            &rects,
            self.inst.width,
            self.inst.height,
            self.matrix,
            &self.budget,
        )
        .expect("strip fits the bin");
        stats.record(&out);
        out.decision.is_feasible()
    }
}

pub fn first_fit(inst: &Instance, matrix: &DffMatrix, opts: &FfOptions) -> FfResult {
    let mut stats = PackStats::default();
    // (original position in due order, id)
    let mut pending: Vec<(usize, usize)> = inst.due_order().into_iter().enumerate().collect();
    let mut placements = Vec::with_capacity(inst.n());
    let mut bin = 0;

    while !pending.is_empty() {
        bin += 1;
        let mut open = OpenBin {
            inst,
            matrix,
            budget: opts.pack_budget,
            ids: Vec::new(),
            load: BinLoad::new(inst.width, inst.height, matrix),
            spots: Vec::new(),
        };
        let mut taken: Vec<(usize, usize)> = Vec::new();

        // Longest prefix allowed by the bound.
        while let Some(&(pos, id)) = pending.first() {
            open.push(id);
            if !open.load.fits_one_bin() {
                open.pop();
                break;
            }
            taken.push((pos, id));
            pending.remove(0);
        }
        // Shed from the back until it packs.
        loop {
            match pack_items(inst, &open.ids, matrix, &opts.pack_budget, &mut stats) {
                Decision::Feasible(s) => {
                    open.spots = s;
                    break;
                }
                _ => {
                    assert!(open.ids.len() > 1, "a single item always packs");
                    open.pop();
                    let back = taken.pop().unwrap();
                    let at = pending.partition_point(|&(p, _)| p < back.0);
                    pending.insert(at, back);
                }
            }
        }

        // Scan the rest.
        let mut failures = 0usize;
        let mut mu: Option<i64> = None;
        // Longest strip known to fit the current contents; shorter ones fit too.
        let mut strip_ok = 0i64;
        let mut k = 0;
        while k < pending.len() {
            if opts.sigma.is_some_and(|s| failures >= s) {
                break;
            }
            let (_, id) = pending[k];
            let len = max_dim(inst, id);
            if mu.is_some_and(|m| len >= m) {
                k += 1;
                continue;
            }
            if open.try_add(id, &mut stats) {
                pending.remove(k);
                failures = 0;
                strip_ok = 0;
                continue;
            }
            failures += 1;
            if opts.mu_strategy && len > strip_ok {
                if open.strip_fits(len, &mut stats) {
                    strip_ok = len;
                } else {
                    mu = Some(mu.map_or(len, |m| m.min(len)));
                }
            }
            k += 1;
        }

        for (&id, s) in open.ids.iter().zip(&open.spots) {
            placements.push(Placement {
                item: id,
                bin,
                x: s.x,
                y: s.y,
                rotated: s.rotated,
            });
        }
    }

    FfResult {
        solution: Solution::from_placements(inst, placements),
        stats,
    }
}
