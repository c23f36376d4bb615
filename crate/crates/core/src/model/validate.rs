use super::{Instance, Solution};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    MissingItem(usize),
    DuplicateItem(usize),
    UnknownItem(usize),
    BadBin {
        item: usize,
    },
    IllegalRotation {
        item: usize,
    },
    OutsideBin {
        item: usize,
    },
    Overlap {
        bin: usize,
        first: usize,
        second: usize,
    },
    LmaxMismatch {
        stored: i64,
        actual: i64,
    },
    BinsUsedMismatch {
        stored: usize,
        actual: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingItem(i) => write!(f, "item {i} is not placed"),
            Violation::DuplicateItem(i) => write!(f, "item {i} is placed more than once"),
            Violation::UnknownItem(i) => write!(f, "item {i} does not exist"),
            Violation::BadBin { item } => write!(f, "item {item} has bin index 0"),
            Violation::IllegalRotation { item } => {
                write!(f, "item {item} is rotated but not rotatable")
            }
            Violation::OutsideBin { item } => write!(f, "item {item} sticks out of its bin"),
            Violation::Overlap { bin, first, second } => {
                write!(f, "items {first} and {second} overlap in bin {bin}")
            }
            Violation::LmaxMismatch { stored, actual } => {
                write!(f, "stored L_max {stored} differs from recomputed {actual}")
            }
            Violation::BinsUsedMismatch { stored, actual } => {
                write!(
                    f,
                    "stored bin count {stored} differs from recomputed {actual}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Recomputed maximum lateness over the placements that name real items.
    pub l_max: Option<i64>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Re-checks a solution geometrically: every item exactly once, inside its
/// bin, legal rotation, no positive-area overlap, consistent `l_max`.
/// (item, x0, y0, x1, y1)
type Corners = (usize, i64, i64, i64, i64);

pub fn validate_solution(inst: &Instance, sol: &Solution) -> ValidationReport {
    let mut violations = Vec::new();
    let mut seen = vec![0usize; inst.n() + 1];
    let mut by_bin: BTreeMap<usize, Vec<Corners>> = BTreeMap::new();
    let mut l_max: Option<i64> = None;

    for p in &sol.placements {
        if p.item == 0 || p.item > inst.n() {
            violations.push(Violation::UnknownItem(p.item));
            continue;
        }
        seen[p.item] += 1;
        if seen[p.item] == 2 {
            violations.push(Violation::DuplicateItem(p.item));
        }
        if p.bin == 0 {
            violations.push(Violation::BadBin { item: p.item });
            continue;
        }
        if p.rotated && !inst.rotatable(p.item) {
            violations.push(Violation::IllegalRotation { item: p.item });
        }
        let (w, h) = inst.item(p.item).extents(p.rotated);
        if p.x < 0 || p.y < 0 || p.x + w > inst.width || p.y + h > inst.height {
            violations.push(Violation::OutsideBin { item: p.item });
        }
        by_bin
            .entry(p.bin)
            .or_default()
            .push((p.item, p.x, p.y, p.x + w, p.y + h));
        let late = inst.lateness(p.item, p.bin);
        l_max = Some(l_max.map_or(late, |m| m.max(late)));
    }

    for (id, &count) in seen.iter().enumerate().skip(1) {
        if count == 0 {
            violations.push(Violation::MissingItem(id));
        }
    }

    for (&bin, rects) in &by_bin {
        for (a, ra) in rects.iter().enumerate() {
            for rb in &rects[a + 1..] {
                let apart = ra.3 <= rb.1 || rb.3 <= ra.1 || ra.4 <= rb.2 || rb.4 <= ra.2;
                if !apart {
                    violations.push(Violation::Overlap {
                        bin,
                        first: ra.0.min(rb.0),
                        second: ra.0.max(rb.0),
                    });
                }
            }
        }
    }

    if let Some(actual) = l_max {
        if actual != sol.l_max {
            violations.push(Violation::LmaxMismatch {
                stored: sol.l_max,
                actual,
            });
        }
    }
    let actual_bins = by_bin.keys().next_back().copied().unwrap_or(0);
    if actual_bins != sol.bins_used {
        violations.push(Violation::BinsUsedMismatch {
            stored: sol.bins_used,
            actual: actual_bins,
        });
    }

    ValidationReport { violations, l_max }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Placement;

    fn place(item: usize, bin: usize, x: i64, y: i64, rotated: bool) -> Placement {
        Placement {
            item,
            bin,
            x,
            y,
            rotated,
        }
    }

    #[test]
    fn full_bin_item_is_valid() {
        let inst = Instance::new(10, 10, 100, [(10, 10, 30)]).unwrap();
        let sol = Solution::from_placements(&inst, vec![place(1, 1, 0, 0, false)]);
        let rep = validate_solution(&inst, &sol);
        assert!(rep.is_valid(), "{:?}", rep.violations);
        assert_eq!(rep.l_max, Some(70));
    }

    #[test]
    fn overlap_is_reported() {
        let inst = Instance::new(10, 10, 100, [(3, 3, 100), (4, 4, 100)]).unwrap();
        let sol = Solution::from_placements(
            &inst,
            vec![place(1, 1, 0, 0, false), place(2, 1, 0, 0, false)],
        );
        let rep = validate_solution(&inst, &sol);
        assert_eq!(
            rep.violations,
            vec![Violation::Overlap {
                bin: 1,
                first: 1,
                second: 2
            }]
        );
    }

    #[test]
    fn touching_edges_do_not_overlap() {
        let inst = Instance::new(10, 10, 100, [(5, 10, 100), (5, 10, 100)]).unwrap();
        let sol = Solution::from_placements(
            &inst,
            vec![place(1, 1, 0, 0, false), place(2, 1, 5, 0, false)],
        );
        assert!(validate_solution(&inst, &sol).is_valid());
    }

    #[test]
    fn exact_rotated_fit() {
        let inst = Instance::new(10, 5, 100, [(5, 10, 100)]);
        // Unrotated the item is taller than the bin, so the instance is rejected...
        assert!(inst.is_err());
        // ...but a 5x5-high bin with a 5x10 item rotated into 10x5 is legal.
        let inst = Instance::new(10, 10, 100, [(5, 10, 100)]).unwrap();
        let sol = Solution::from_placements(&inst, vec![place(1, 1, 0, 5, true)]);
        assert!(validate_solution(&inst, &sol).is_valid());
    }

    #[test]
    fn reports_missing_duplicate_and_rotation() {
        let inst = Instance::new(10, 4, 100, [(10, 2, 100), (2, 2, 100), (1, 1, 100)]).unwrap();
        let mut sol = Solution::from_placements(
            &inst,
            vec![
                place(1, 1, 0, 0, true),
                place(2, 1, 0, 2, false),
                place(2, 2, 0, 0, false),
            ],
        );
        sol.l_max = 0;
        let rep = validate_solution(&inst, &sol);
        assert!(rep
            .violations
            .contains(&Violation::IllegalRotation { item: 1 }));
        assert!(rep.violations.contains(&Violation::DuplicateItem(2)));
        assert!(rep.violations.contains(&Violation::MissingItem(3)));
        assert!(rep.violations.contains(&Violation::OutsideBin { item: 1 }));
        assert!(rep.violations.iter().any(|v| matches!(
            v,
            Violation::LmaxMismatch {
                stored: 0,
                actual: 100
            }
        )));
    }
}
