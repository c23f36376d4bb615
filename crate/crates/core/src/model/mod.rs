//! Domain types for the two-dimensional bin packing problem with due dates.
//!
//! All geometry is integral. Bins are identical `W × H` rectangles that each
//! take `P` time units to process; an item packed into bin `k` (1-based)
//! completes at `k·P` and its lateness is `k·P − d`.

mod generate;
mod io;
mod validate;

pub use generate::{duplicate_instance, generate_instance, DueClass, GeneratorSpec};
pub use io::{parse_instance, parse_solution, serialize_instance, serialize_solution, ParseError};
pub use validate::{validate_solution, ValidationReport, Violation};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised when constructing a model object from raw values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(
        "bin dimensions and processing time must be positive (got {width}x{height}, P={proc_time})"
    )]
    BadBin {
        width: i64,
        height: i64,
        proc_time: i64,
    },
    #[error("instance has no items")]
    Empty,
    #[error("item {id}: width {width} exceeds bin width {bin}")]
    WidthExceedsBin { id: usize, width: i64, bin: i64 },
    #[error("item {id}: height {height} exceeds bin height {bin}")]
    HeightExceedsBin { id: usize, height: i64, bin: i64 },
    #[error("item {id}: dimensions must be positive")]
    NonPositiveDimension { id: usize },
    #[error("item {id}: due date must be at least 1 (got {due})")]
    BadDueDate { id: usize, due: i64 },
    #[error("unknown category {0} (expected 1..=10)")]
    BadCategory(u8),
    #[error("instance size must be at least 1")]
    BadSize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Item {
    /// 1-based, contiguous within an instance.
    pub id: usize,
    pub width: i64,
    pub height: i64,
    pub due: i64,
}

impl Item {
    pub fn area(&self) -> i64 {
        self.width * self.height
    }

    /// Extents `(w, h)` in the requested orientation.
    pub fn extents(&self, rotated: bool) -> (i64, i64) {
        if rotated {
            (self.height, self.width)
        } else {
            (self.width, self.height)
        }
    }
}

/// Where an instance came from, when it was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub category: u8,
    pub class: DueClass,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub width: i64,
    pub height: i64,
    pub proc_time: i64,
    pub items: Vec<Item>,
    pub meta: Option<Provenance>,
}

impl Instance {
    /// Builds an instance from `(w, h, d)` triples, assigning ids `1..=n`.
    pub fn new(
        width: i64,
        height: i64,
        proc_time: i64,
        dims: impl IntoIterator<Item = (i64, i64, i64)>,
    ) -> Result<Self, ModelError> {
        if width <= 0 || height <= 0 || proc_time <= 0 {
            return Err(ModelError::BadBin {
                width,
                height,
                proc_time,
            });
        }
        let items: Vec<Item> = dims
            .into_iter()
            .enumerate()
            .map(|(idx, (w, h, d))| Item {
                id: idx + 1,
                width: w,
                height: h,
                due: d,
            })
            .collect();
        let inst = Instance {
            width,
            height,
            proc_time,
            items,
            meta: None,
        };
        inst.check()?;
        Ok(inst)
    }

    pub fn with_meta(mut self, meta: Provenance) -> Self {
        self.meta = Some(meta);
        self
    }

    fn check(&self) -> Result<(), ModelError> {
        if self.items.is_empty() {
            return Err(ModelError::Empty);
        }
        for it in &self.items {
            if it.width <= 0 || it.height <= 0 {
                return Err(ModelError::NonPositiveDimension { id: it.id });
            }
            if it.width > self.width {
                return Err(ModelError::WidthExceedsBin {
                    id: it.id,
                    width: it.width,
                    bin: self.width,
                });
            }
            if it.height > self.height {
                return Err(ModelError::HeightExceedsBin {
                    id: it.id,
                    height: it.height,
                    bin: self.height,
                });
            }
            if it.due < 1 {
                return Err(ModelError::BadDueDate {
                    id: it.id,
                    due: it.due,
                });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    /// Looks an item up by its 1-based id.
    pub fn item(&self, id: usize) -> &Item {
        &self.items[id - 1]
    }

    /// An item may turn by 90° only when the turned copy still fits the bin.
    pub fn rotatable(&self, id: usize) -> bool {
        let it = self.item(id);
        it.height <= self.width && it.width <= self.height
    }

    pub fn lateness(&self, id: usize, bin: usize) -> i64 {
        bin as i64 * self.proc_time - self.item(id).due
    }

    /// Upper bound on the number of bins worth opening when every item must
    /// finish with lateness at most `ub`: `max_i ⌊(ub + d_i) / P⌋`.
    pub fn bins_for_bound(&self, ub: i64) -> usize {
        self.items
            .iter()
            .map(|it| (ub + it.due).div_euclid(self.proc_time))
            .max()
            .unwrap_or(0)
            .max(0) as usize
    }

    /// Item ids in non-decreasing due-date order, ties broken by id.
    pub fn due_order(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.items.iter().map(|it| it.id).collect();
        ids.sort_by_key(|&id| (self.item(id).due, id));
        ids
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Placement {
    pub item: usize,
    /// 1-based bin index; the bin's index is also its completion slot.
    pub bin: usize,
    pub x: i64,
    pub y: i64,
    pub rotated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub placements: Vec<Placement>,
    pub bins_used: usize,
    pub l_max: i64,
}

impl Solution {
    /// Sorts placements by item id and derives `bins_used` and `l_max`.
    pub fn from_placements(inst: &Instance, mut placements: Vec<Placement>) -> Self {
        placements.sort_by_key(|p| p.item);
        let bins_used = placements.iter().map(|p| p.bin).max().unwrap_or(0);
        let l_max = placements
            .iter()
            .map(|p| inst.lateness(p.item, p.bin))
            .max()
            .unwrap_or(i64::MIN);
        Solution {
            placements,
            bins_used,
            l_max,
        }
    }

    pub fn bin_of(&self, item: usize) -> Option<usize> {
        self.placements
            .iter()
            .find(|p| p.item == item)
            .map(|p| p.bin)
    }
}
