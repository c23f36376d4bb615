#![allow(dead_code)]

use ddp_core::opp::Rect;
use ddp_core::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Brute-force packing check: fills the bin cell by cell, bottom row first.
/// The lowest, leftmost empty cell either receives the corner of some unused
/// rectangle (in any allowed orientation) or stays empty forever. Every
/// packing can be normalised to one this procedure reaches, so it is exact.
pub fn grid_fits(rects: &[Rect], w: i64, h: i64) -> bool {
    let (w, h) = (w as usize, h as usize);
    let area: i64 = rects.iter().map(|r| r.width * r.height).sum();
    if area > (w * h) as i64 {
        return false;
    }
    let mut grid = vec![false; w * h];
    let mut used = vec![false; rects.len()];
    fill(rects, w, h, &mut grid, &mut used, 0, (w * h) as i64 - area)
}

fn fill(
    rects: &[Rect],
    w: usize,
    h: usize,
    grid: &mut [bool],
    used: &mut [bool],
    from: usize,
    slack: i64,
) -> bool {
    if used.iter().all(|&u| u) {
        return true;
    }
    let Some(cell) = (from..w * h).find(|&c| !grid[c]) else {
        return false;
    };
    let (cx, cy) = (cell % w, cell / w);
    for i in 0..rects.len() {
        if used[i] {
            continue;
        }
        let r = rects[i];
        let mut shapes = vec![(r.width as usize, r.height as usize)];
        if r.rotatable && r.width != r.height {
            shapes.push((r.height as usize, r.width as usize));
        }
        for (rw, rh) in shapes {
            if cx + rw > w || cy + rh > h {
                continue;
            }
            let free = (cy..cy + rh).all(|y| (cx..cx + rw).all(|x| !grid[y * w + x]));
            if !free {
                continue;
            }
            set(grid, w, cx, cy, rw, rh, true);
            used[i] = true;
            let ok = fill(rects, w, h, grid, used, cell + 1, slack);
            used[i] = false;
            set(grid, w, cx, cy, rw, rh, false);
            if ok {
                return true;
            }
        }
    }
    if slack > 0 {
        grid[cell] = true;
        let ok = fill(rects, w, h, grid, used, cell + 1, slack - 1);
        grid[cell] = false;
        return ok;
    }
    false
}

fn set(grid: &mut [bool], w: usize, x0: usize, y0: usize, rw: usize, rh: usize, v: bool) {
    for y in y0..y0 + rh {
        for x in x0..x0 + rw {
            grid[y * w + x] = v;
        }
    }
}

pub fn item_rects(inst: &Instance, ids: &[usize]) -> Vec<Rect> {
    ids.iter()
        .map(|&id| ddp_core::opp::item_rect(inst, id))
        .collect()
}

/// Minimum `L_max` by trying every assignment of items to bins `1..=n`,
/// checking each bin with [`grid_fits`]. No pruning at all.
pub fn brute_optimum(inst: &Instance) -> i64 {
    let n = inst.n();
    let mut assign = vec![1usize; n];
    let mut best = i64::MAX;
    loop {
        let mut ok = true;
        for k in 1..=n {
            let ids: Vec<usize> = (1..=n).filter(|&id| assign[id - 1] == k).collect();
            if !ids.is_empty() && !grid_fits(&item_rects(inst, &ids), inst.width, inst.height) {
                ok = false;
                break;
            }
        }
        if ok {
            let l = (1..=n)
                .map(|id| inst.lateness(id, assign[id - 1]))
                .max()
                .unwrap();
            best = best.min(l);
        }
        // Next assignment in odometer order.
        let mut i = 0;
        while i < n && assign[i] == n {
            assign[i] = 1;
            i += 1;
        }
        if i == n {
            return best;
        }
        assign[i] += 1;
    }
}

/// A random instance with at most `max_n` items in a bin of at most
/// `max_side × max_side`, processing time 100 and due dates in `[1, 300]`.
pub fn tiny_instance(seed: u64, max_n: usize, max_side: i64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let n = rng.random_range(1..=max_n);
    let items: Vec<(i64, i64, i64)> = (0..n)
        .map(|_| {
            (
                rng.random_range(1..=w),
                rng.random_range(1..=h),
                rng.random_range(1..=300),
            )
        })
        .collect();
    Instance::new(w, h, 100, items).expect("items fit the bin")
}

/// Up to `max_items` random rectangles for a random bin of at most
/// `max_side × max_side`; rotation is allowed where the turned copy fits.
pub fn random_rects(seed: u64, max_items: usize, max_side: i64) -> (Vec<Rect>, Instance) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = rng.random_range(1..=max_side);
    let h = rng.random_range(1..=max_side);
    let n = rng.random_range(1..=max_items);
    let items: Vec<(i64, i64, i64)> = (0..n)
        .map(|_| (rng.random_range(1..=w), rng.random_range(1..=h), 100))
        .collect();
    let inst = Instance::new(w, h, 100, items).expect("items fit the bin");
    let ids: Vec<usize> = (1..=n).collect();
    (item_rects(&inst, &ids), inst)
}

/// Cuts a `w × h` bin into pieces by random guillotine cuts.
pub fn slice(rng: &mut ChaCha8Rng, w: i64, h: i64, depth: u32, out: &mut Vec<(i64, i64)>) {
    if depth == 0 || (w == 1 && h == 1) || rng.random_range(0..5) == 0 {
        out.push((w, h));
    } else if (rng.random_bool(0.5) && w > 1) || h == 1 {
        let c = rng.random_range(1..w);
        slice(rng, c, h, depth - 1, out);
        slice(rng, w - c, h, depth - 1, out);
    } else {
        let c = rng.random_range(1..h);
        slice(rng, w, c, depth - 1, out);
        slice(rng, w, h - c, depth - 1, out);
    }
}
