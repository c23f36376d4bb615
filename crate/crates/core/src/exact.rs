//! Exact minimum `L_max` for small instances by enumerating bin assignments.
//!
//! Items are assigned in non-increasing area order to bins `1..=b_max`.
//! Every bin content reached is checked for an actual packing with an
//! unlimited [`pack`](crate::opp::pack) call, memoised on the content.
//! The search keeps the best complete assignment and prunes any branch whose
//! committed lateness already reaches it.

use crate::bounds::{lb1, BinLoad, Decision};
use crate::budget::SearchBudget;
use crate::dff::DffMatrix;
use crate::ffit::{first_fit, FfOptions};
use crate::model::{Instance, Placement, Solution};
use crate::opp::{pack_items, PackStats, Spot};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExactStatus {
    Optimal,
    /// The budget ran out; the optimum lies in `[lb, ub]`.
    Bound {
        lb: i64,
        ub: Option<i64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    pub status: ExactStatus,
    pub solution: Option<Solution>,
    pub nodes: u64,
    pub pack_calls: u64,
}

impl ExactResult {
    pub fn optimum(&self) -> Option<i64> {
        match self.status {
            ExactStatus::Optimal => self.solution.as_ref().map(|s| s.l_max),
            ExactStatus::Bound { .. } => None,
        }
    }
}

struct Search<'a> {
    inst: &'a Instance,
    matrix: &'a DffMatrix,
    order: Vec<usize>,
    /// `twin[i]`: the previous item in `order` is identical to item `order[i]`.
    twin: Vec<bool>,
    b_max: usize,
    bins: Vec<Vec<usize>>,
    loads: Vec<BinLoad>,
    assigned: Vec<usize>,
    memo: HashMap<Vec<usize>, Option<Vec<Spot>>>,
    stats: PackStats,
    best: i64,
    best_assign: Option<Vec<usize>>,
    floor: i64,
    meter: crate::budget::Meter,
    exhausted: bool,
}

impl Search<'_> {
    fn packs(&mut self, bin: usize) -> bool {
        let mut key = self.bins[bin].clone();
        key.sort_unstable();
        if let Some(r) = self.memo.get(&key) {
            return r.is_some();
        }
        let d = pack_items(
            self.inst,
            &key,
            self.matrix,
            &SearchBudget::UNLIMITED,
            &mut self.stats,
        );
        let r = match d {
            Decision::Feasible(s) => Some(s),
            _ => None,
        };
        let ok = r.is_some();
        self.memo.insert(key, r);
        ok
    }

    /// Returns `false` once the search should stop.
    fn dfs(&mut self, depth: usize, lateness: i64) -> bool {
        if !self.meter.tick() {
            self.exhausted = true;
            return false;
        }
        if depth == self.order.len() {
            self.best = lateness;
            self.best_assign = Some(self.assigned.clone());
            return lateness > self.floor;
        }
        let id = self.order[depth];
        let first = if self.twin[depth] {
            self.assigned[depth - 1]
        } else {
            1
        };
        for k in first..=self.b_max {
            let late = self.inst.lateness(id, k);
            if late >= self.best {
                break;
            }
            let item = self.inst.item(id);
            self.loads[k].add_item(item, self.matrix);
            self.bins[k].push(id);
            self.assigned.push(k);
            let ok = self.loads[k].fits_one_bin() && self.packs(k);
            let go_on = !ok || self.dfs(depth + 1, lateness.max(late));
            self.assigned.pop();
            self.bins[k].pop();
            self.loads[k].remove_item(item, self.matrix);
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Minimum `L_max` over assignments to at most `b_max` bins.
pub fn solve_exact(
    inst: &Instance,
    matrix: &DffMatrix,
    b_max: usize,
    budget: &SearchBudget,
) -> ExactResult {
    let mut order: Vec<usize> = (1..=inst.n()).collect();
    let key = |id: usize| {
        let it = inst.item(id);
        (
            std::cmp::Reverse(it.area()),
            it.width.max(it.height),
            it.width.min(it.height),
            it.due,
        )
    };
    order.sort_by_key(|&id| (key(id), id));
    let twin: Vec<bool> = (0..order.len())
        .map(|i| i > 0 && key(order[i]) == key(order[i - 1]))
        .collect();
    let floor = lb1(inst, matrix).max(
        inst.items
            .iter()
            .map(|it| inst.proc_time - it.due)
            .max()
            .unwrap_or(i64::MIN),
    );

    let ff = first_fit(
        inst,
        matrix,
        &FfOptions {
            pack_budget: SearchBudget::UNLIMITED,
            ..FfOptions::default()
        },
    );
    let mut s = Search {
        inst,
        matrix,
        order,
        twin,
        b_max,
        bins: vec![Vec::new(); b_max + 1],
        loads: vec![BinLoad::new(inst.width, inst.height, matrix); b_max + 1],
        assigned: Vec::new(),
        memo: HashMap::new(),
        stats: ff.stats,
        best: i64::MAX,
        best_assign: None,
        floor,
        meter: budget.meter(),
        exhausted: false,
    };
    let mut incumbent = None;
    if ff.solution.bins_used <= b_max {
        s.best = ff.solution.l_max;
        incumbent = Some(ff.solution);
    }
    if s.best > floor {
        s.dfs(0, i64::MIN);
    }

    let solution = match s.best_assign.take() {
        Some(assign) => {
            let mut placements = Vec::with_capacity(inst.n());
            for k in 1..=b_max {
                let mut ids: Vec<usize> = s
                    .order
                    .iter()
                    .zip(&assign)
                    .filter(|(_, &b)| b == k)
                    .map(|(&id, _)| id)
                    .collect();
                if ids.is_empty() {
                    continue;
                }
                ids.sort_unstable();
                let spots = s.memo[&ids].clone().expect("assigned bins pack");
                for (&id, sp) in ids.iter().zip(spots) {
                    placements.push(Placement {
                        item: id,
                        bin: k,
                        x: sp.x,
                        y: sp.y,
                        rotated: sp.rotated,
                    });
                }
            }
            Some(Solution::from_placements(inst, placements))
        }
        None => incumbent,
    };
    let status = if s.exhausted {
        ExactStatus::Bound {
            lb: floor,
            ub: solution.as_ref().map(|s| s.l_max),
        }
    } else {
        ExactStatus::Optimal
    };
    ExactResult {
        status,
        solution,
        nodes: s.meter.nodes,
        pack_calls: s.stats.calls,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dff::{build_matrix, DffParams};
    use crate::model::validate_solution;

    fn opt(inst: &Instance) -> ExactResult {
        let m = build_matrix(inst, &DffParams::default());
        let r = solve_exact(inst, &m, inst.n(), &SearchBudget::UNLIMITED);
        assert_eq!(r.status, ExactStatus::Optimal);
        assert!(validate_solution(inst, r.solution.as_ref().unwrap()).is_valid());
        r
    }

    #[test]
    fn one_item() {
        let inst = Instance::new(10, 10, 100, [(3, 4, 50)]).unwrap();
        assert_eq!(opt(&inst).optimum(), Some(50));
    }

    #[test]
    fn two_full_items() {
        let inst = Instance::new(10, 10, 100, [(10, 10, 100), (10, 10, 200)]).unwrap();
        let r = opt(&inst);
        assert_eq!(r.optimum(), Some(0));
        let sol = r.solution.unwrap();
        assert_eq!((sol.bin_of(1), sol.bin_of(2)), (Some(1), Some(2)));
    }

    #[test]
    fn small_item_cannot_share() {
        let inst = Instance::new(6, 6, 100, [(6, 6, 100), (6, 6, 200), (2, 2, 200)]).unwrap();
        assert_eq!(opt(&inst).optimum(), Some(100));
    }

    #[test]
    fn identical_items() {
        // Two 6-wide and two 4-wide columns: each bin takes one of each.
        let inst = Instance::new(
            10,
            10,
            100,
            [(6, 10, 100), (6, 10, 100), (4, 10, 100), (4, 10, 100)],
        )
        .unwrap();
        assert_eq!(opt(&inst).optimum(), Some(100));
    }

    #[test]
    fn tight_budget_reports_bounds() {
        let inst = Instance::new(
            10,
            10,
            100,
            [
                (5, 5, 150),
                (5, 5, 300),
                (6, 6, 100),
                (4, 4, 250),
                (3, 7, 120),
                (7, 3, 200),
            ],
        )
        .unwrap();
        let m = build_matrix(&inst, &DffParams::default());
        let full = solve_exact(&inst, &m, 6, &SearchBudget::UNLIMITED);
        let cut = solve_exact(&inst, &m, 6, &SearchBudget::nodes(2));
        let best = full.optimum().unwrap();
        match cut.status {
            ExactStatus::Bound { lb, ub } => {
                assert!(lb <= best);
                assert!(ub.is_none_or(|u| u >= best));
            }
            ExactStatus::Optimal => assert_eq!(cut.optimum(), Some(best)),
        }
    }
}
