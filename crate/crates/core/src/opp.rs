//! Single-bin orthogonal packing: does a set of rectangles fit one bin?
//!
//! Depth-first search placing rectangles in non-increasing area order at
//! normal-pattern coordinates. Every node is checked against residual area,
//! the rows of a [`DffMatrix`], and the column and row profiles implied by
//! the compulsory parts of the rectangles still to be placed.

use crate::bounds::Decision;
use crate::budget::{Meter, SearchBudget};
use crate::dff::DffMatrix;
use crate::model::Instance;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A rectangle to pack. Rotation is allowed when `rotatable` is set and the
/// turned rectangle fits the bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub width: i64,
    pub height: i64,
    pub rotatable: bool,
}

impl Rect {
    pub fn new(width: i64, height: i64, rotatable: bool) -> Self {
        Rect {
            width,
            height,
            rotatable,
        }
    }
}

/// Bottom-left corner and orientation of one packed rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spot {
    pub x: i64,
    pub y: i64,
    pub rotated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PackError {
    #[error("rectangle {index} ({width}x{height}) does not fit the {bin_w}x{bin_h} bin unrotated")]
    Oversized {
        index: usize,
        width: i64,
        height: i64,
        bin_w: i64,
        bin_h: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackOutcome {
    /// On success, one spot per input rectangle in input order.
    pub decision: Decision<Vec<Spot>>,
    pub nodes: u64,
}

#[derive(Debug, Clone, Copy)]
struct Orient {
    w: i64,
    h: i64,
    rotated: bool,
}

struct Search<'a> {
    bin_w: i64,
    bin_h: i64,
    matrix: &'a DffMatrix,
    order: Vec<usize>,
    orients: Vec<Vec<Orient>>,
    /// Per rectangle and orientation: scaled row values.
    row_vals: Vec<Vec<Vec<i64>>>,
    /// Row mass (cheapest orientation) of order[depth..].
    row_suffix: Vec<Vec<i64>>,
    /// Feasible x / y coordinates per rectangle (bitmaps over 0..=W, 0..=H).
    xs: Vec<Vec<bool>>,
    ys: Vec<Vec<bool>>,
    /// Compulsory column heights / row widths of order[depth..].
    col_suffix: Vec<Vec<i64>>,
    row_suffix_prof: Vec<Vec<i64>>,
    /// Same rectangle as the previous one in the order.
    twin_of_prev: Vec<bool>,
    row_load: Vec<i64>,
    col: Vec<i64>,
    line: Vec<i64>,
    spots: Vec<Option<Spot>>,
    /// Placed (x0, y0, x1, y1).
    placed: Vec<(i64, i64, i64, i64)>,
    meter: Meter,
}

/// Reachable sums of picking at most one extent from each option list.
fn subset_sums(options: impl Iterator<Item = Vec<i64>>, cap: i64) -> Vec<bool> {
    let mut reach = vec![false; cap as usize + 1];
    reach[0] = true;
    for opts in options {
        let prev = reach.clone();
        for v in opts {
            for s in (0..=cap - v).rev() {
                if prev[s as usize] {
                    reach[(s + v) as usize] = true;
                }
            }
        }
    }
    reach
}

/// Columns `[W − w, w)` are covered wherever a rectangle of width `w` sits.
fn compulsory(span: i64, extent: i64) -> std::ops::Range<usize> {
    if 2 * extent > span {
        (span - extent) as usize..extent as usize
    } else {
        0..0
    }
}

impl Search<'_> {
    fn profiles_ok(&self, depth: usize) -> bool {
        let cs = &self.col_suffix[depth];
        let ls = &self.row_suffix_prof[depth];
        self.col.iter().zip(cs).all(|(a, b)| a + b <= self.bin_h)
            && self.line.iter().zip(ls).all(|(a, b)| a + b <= self.bin_w)
    }

    fn rows_ok(&self, depth: usize) -> bool {
        self.row_load
            .iter()
            .zip(&self.row_suffix[depth])
            .zip(&self.matrix.rows)
            .all(|((l, s), r)| l + s <= r.capacity)
    }

    fn free(&self, x0: i64, y0: i64, x1: i64, y1: i64) -> bool {
        self.placed
            .iter()
            .all(|&(a0, b0, a1, b1)| x1 <= a0 || a1 <= x0 || y1 <= b0 || b1 <= y0)
    }

    fn mark(&mut self, r: usize, o: usize, x: i64, y: i64, sign: i64) {
        let Orient { w, h, rotated } = self.orients[r][o];
        for c in x..x + w {
            self.col[c as usize] += sign * h;
        }
        for l in y..y + h {
            self.line[l as usize] += sign * w;
        }
        for (acc, v) in self.row_load.iter_mut().zip(&self.row_vals[r][o]) {
            *acc += sign * v;
        }
        if sign > 0 {
            self.placed.push((x, y, x + w, y + h));
            self.spots[r] = Some(Spot { x, y, rotated });
        } else {
            self.placed.pop();
            self.spots[r] = None;
        }
    }

    fn dfs(&mut self, depth: usize) -> Option<bool> {
        if !self.meter.tick() {
            return None;
        }
        if depth == self.order.len() {
            return Some(true);
        }
        if !self.rows_ok(depth) || !self.profiles_ok(depth) {
            return Some(false);
        }
        let r = self.order[depth];
        // Identical rectangles are placed in increasing (y, x, rotated) order.
        let floor = if self.twin_of_prev[depth] {
            self.spots[self.order[depth - 1]].map(|s| (s.y, s.x, s.rotated))
        } else {
            None
        };
        for o in 0..self.orients[r].len() {
            let Orient { w, h, rotated } = self.orients[r][o];
            for y in 0..=self.bin_h - h {
                if !self.ys[r][y as usize] {
                    continue;
                }
                for x in 0..=self.bin_w - w {
                    if !self.xs[r][x as usize] {
                        continue;
                    }
                    if let Some(f) = floor {
                        if (y, x, rotated) <= f {
                            continue;
                        }
                    }
                    if !self.free(x, y, x + w, y + h) {
                        continue;
                    }
                    self.mark(r, o, x, y, 1);
                    let res = self.dfs(depth + 1);
                    self.mark(r, o, x, y, -1);
                    match res {
                        Some(false) => {}
                        Some(true) => {
                            // Restore the winning spot that the undo cleared.
                            self.spots[r] = Some(Spot { x, y, rotated });
                            return Some(true);
                        }
                        None => return None,
                    }
                }
            }
        }
        Some(false)
    }
}

/// Decides whether `rects` fit together into one `bin_w × bin_h` bin.
///
/// With an unlimited budget the answer is never `Unknown`; with a finite one
/// `Feasible` and `Infeasible` are still exact.
pub fn pack(
    rects: &[Rect],
    bin_w: i64,
    bin_h: i64,
    matrix: &DffMatrix,
    budget: &SearchBudget,
) -> Result<PackOutcome, PackError> {
    for (index, r) in rects.iter().enumerate() {
        if r.width < 1 || r.height < 1 || r.width > bin_w || r.height > bin_h {
            return Err(PackError::Oversized {
                index,
                width: r.width,
                height: r.height,
                bin_w,
                bin_h,
            });
        }
    }
    let n = rects.len();
    let done = |decision| Ok(PackOutcome { decision, nodes: 0 });
    if n == 0 {
        return done(Decision::Feasible(Vec::new()));
    }
    if n == 1 {
        return done(Decision::Feasible(vec![Spot {
            x: 0,
            y: 0,
            rotated: false,
        }]));
    }
    if rects.iter().map(|r| r.width * r.height).sum::<i64>() > bin_w * bin_h {
        return done(Decision::Infeasible);
    }

    let orients: Vec<Vec<Orient>> = rects
        .iter()
        .map(|r| {
            let mut v = vec![Orient {
                w: r.width,
                h: r.height,
                rotated: false,
            }];
            if r.rotatable && r.width != r.height && r.height <= bin_w && r.width <= bin_h {
                v.push(Orient {
                    w: r.height,
                    h: r.width,
                    rotated: true,
                });
            }
            v
        })
        .collect();

    let row_vals: Vec<Vec<Vec<i64>>> = orients
        .iter()
        .map(|os| {
            os.iter()
                .map(|o| matrix.rows.iter().map(|row| row.scaled(o.w, o.h)).collect())
                .collect()
        })
        .collect();
    let row_min: Vec<Vec<i64>> = row_vals
        .iter()
        .map(|vs| {
            (0..matrix.len())
                .map(|c| vs.iter().map(|v| v[c]).min().unwrap())
                .collect()
        })
        .collect();
    if (0..matrix.len())
        .any(|c| row_min.iter().map(|v| v[c]).sum::<i64>() > matrix.rows[c].capacity)
    {
        return done(Decision::Infeasible);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (&rects[a], &rects[b]);
        (rb.width * rb.height)
            .cmp(&(ra.width * ra.height))
            .then(rb.width.cmp(&ra.width))
            .then(rb.height.cmp(&ra.height))
            .then(rb.rotatable.cmp(&ra.rotatable))
            .then(a.cmp(&b))
    });
    let twin_of_prev: Vec<bool> = (0..n)
        .map(|d| d > 0 && rects[order[d]] == rects[order[d - 1]])
        .collect();

    let (wu, hu) = (bin_w as usize, bin_h as usize);
    let mut row_suffix = vec![vec![0i64; matrix.len()]; n + 1];
    let mut col_suffix = vec![vec![0i64; wu]; n + 1];
    let mut line_suffix = vec![vec![0i64; hu]; n + 1];
    for d in (0..n).rev() {
        let r = order[d];
        row_suffix[d] = row_suffix[d + 1]
            .iter()
            .zip(&row_min[r])
            .map(|(a, b)| a + b)
            .collect();
        let mut col = vec![i64::MAX; wu];
        let mut line = vec![i64::MAX; hu];
        for o in &orients[r] {
            let cr = compulsory(bin_w, o.w);
            for (c, v) in col.iter_mut().enumerate() {
                *v = (*v).min(if cr.contains(&c) { o.h } else { 0 });
            }
            let lr = compulsory(bin_h, o.h);
            for (l, v) in line.iter_mut().enumerate() {
                *v = (*v).min(if lr.contains(&l) { o.w } else { 0 });
            }
        }
        col_suffix[d] = col_suffix[d + 1]
            .iter()
            .zip(&col)
            .map(|(a, b)| a + b)
            .collect();
        line_suffix[d] = line_suffix[d + 1]
            .iter()
            .zip(&line)
            .map(|(a, b)| a + b)
            .collect();
    }

    let extents = |j: usize, horizontal: bool| -> Vec<i64> {
        orients[j]
            .iter()
            .map(|o| if horizontal { o.w } else { o.h })
            .collect()
    };
    let xs: Vec<Vec<bool>> = (0..n)
        .map(|i| subset_sums((0..n).filter(|&j| j != i).map(|j| extents(j, true)), bin_w))
        .collect();
    let ys: Vec<Vec<bool>> = (0..n)
        .map(|i| subset_sums((0..n).filter(|&j| j != i).map(|j| extents(j, false)), bin_h))
        .collect();

    let mut search = Search {
        bin_w,
        bin_h,
        matrix,
        order,
        orients,
        row_vals,
        row_suffix,
        xs,
        ys,
        col_suffix,
        row_suffix_prof: line_suffix,
        twin_of_prev,
        row_load: vec![0; matrix.len()],
        col: vec![0; wu],
        line: vec![0; hu],
        spots: vec![None; n],
        placed: Vec::with_capacity(n),
        meter: budget.meter(),
    };
    let res = search.dfs(0);
    let decision = match res {
        Some(true) => Decision::Feasible(
            search
                .spots
                .iter()
                .map(|s| s.expect("every rectangle placed"))
                .collect(),
        ),
        Some(false) => Decision::Infeasible,
        None => Decision::Unknown,
    };
    Ok(PackOutcome {
        decision,
        nodes: search.meter.nodes,
    })
}

/// Running totals over many [`pack`] calls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackStats {
    pub calls: u64,
    pub nodes: u64,
    pub unknown: u64,
}

impl PackStats {
    pub fn record(&mut self, out: &PackOutcome) {
        self.calls += 1;
        self.nodes += out.nodes;
        if out.decision == Decision::Unknown {
            self.unknown += 1;
        }
    }

    pub fn absorb(&mut self, other: &PackStats) {
        self.calls += other.calls;
        self.nodes += other.nodes;
        self.unknown += other.unknown;
    }
}

/// The packing rectangle of an instance item.
pub fn item_rect(inst: &Instance, id: usize) -> Rect {
    let it = inst.item(id);
    Rect::new(it.width, it.height, inst.rotatable(id))
}

/// Packs instance items (by id) into one bin, recording the call in `stats`.
/// Spots come back in the order of `ids`.
pub fn pack_items(
    inst: &Instance,
    ids: &[usize],
    matrix: &DffMatrix,
    budget: &SearchBudget,
    stats: &mut PackStats,
) -> Decision<Vec<Spot>> {
    let rects: Vec<Rect> = ids.iter().map(|&id| item_rect(inst, id)).collect();
    let out = pack(&rects, inst.width, inst.height, matrix, budget)
        .expect("instance items always fit the bin unrotated");
    stats.record(&out);
    out.decision
}
