//! Seeded benchmark generator for the ten item categories.
//!
//! Stream order is fixed: for each item in order, its type draw (categories
//! 7–10 only), then width, then height; afterwards one due date per item in
//! order. The PRNG is ChaCha8 seeded from the 64-bit seed.

use super::{Instance, ModelError, Provenance};
use crate::bounds::bin_count_lb;
use crate::dff::{build_matrix, DffParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Processing time of every generated bin.
pub const GEN_PROC_TIME: i64 = 100;
/// Smallest due date the generator draws.
pub const GEN_MIN_DUE: i64 = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DueClass {
    A,
    B,
    C,
}

impl DueClass {
    /// Due-date spread factor as an exact fraction `(num, den)`.
    pub fn beta(self) -> (i64, i64) {
        match self {
            DueClass::A => (3, 5),
            DueClass::B => (4, 5),
            DueClass::C => (1, 1),
        }
    }
}

impl fmt::Display for DueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            DueClass::A => "A",
            DueClass::B => "B",
            DueClass::C => "C",
        };
        f.write_str(c)
    }
}

impl FromStr for DueClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" | "a" => Ok(DueClass::A),
            "B" | "b" => Ok(DueClass::B),
            "C" | "c" => Ok(DueClass::C),
            other => Err(format!(
                "unknown due-date class {other:?} (expected A, B or C)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub category: u8,
    pub class: DueClass,
    pub n: usize,
    pub seed: u64,
}

/// Square bin side for a category.
pub fn bin_side(category: u8) -> Option<i64> {
    Some(match category {
        1 => 10,
        2 => 30,
        3 => 40,
        4 | 5 | 7 | 8 | 9 | 10 => 100,
        6 => 300,
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy)]
struct SideRange {
    lo: i64,
    hi: i64,
}

impl SideRange {
    fn draw(self, rng: &mut ChaCha8Rng) -> i64 {
        rng.random_range(self.lo..=self.hi)
    }
}

/// Width and height ranges of the four item types used by categories 7–10.
fn type_ranges(kind: usize, side: i64) -> (SideRange, SideRange) {
    let wide = SideRange {
        lo: (2 * side + 2) / 3,
        hi: side,
    };
    let half_up = SideRange {
        lo: side / 2,
        hi: side,
    };
    let small = SideRange {
        lo: 1,
        hi: side / 2,
    };
    match kind {
        1 => (wide, small),
        2 => (small, wide),
        3 => (half_up, half_up),
        _ => (small, small),
    }
}

fn homogeneous_range(category: u8) -> SideRange {
    match category {
        1 | 2 => SideRange { lo: 1, hi: 10 },
        3 | 4 => SideRange { lo: 1, hi: 35 },
        _ => SideRange { lo: 1, hi: 100 },
    }
}

fn draw_dims(rng: &mut ChaCha8Rng, category: u8, side: i64, n: usize) -> Vec<(i64, i64)> {
    (0..n)
        .map(|_| {
            if category <= 6 {
                let r = homogeneous_range(category);
                let w = r.draw(rng);
                let h = r.draw(rng);
                (w, h)
            } else {
                let major = (category - 6) as usize;
                let minors: Vec<usize> = (1..=4).filter(|&t| t != major).collect();
                let t: u32 = rng.random_range(0..10);
                let kind = if t < 7 {
                    major
                } else {
                    minors[(t - 7) as usize]
                };
                let (wr, hr) = type_ranges(kind, side);
                let w = wr.draw(rng);
                let h = hr.draw(rng);
                (w, h)
            }
        })
        .collect()
}

/// Draws one due date per item from `Uniform[101, ⌊β·P·LB⌋]`, where `LB` is
/// the bin-count lower bound of the item set. An empty range collapses to 101.
fn draw_due_dates(
    rng: &mut ChaCha8Rng,
    dims: &[(i64, i64)],
    bin: (i64, i64, i64),
    class: DueClass,
) -> Result<Vec<i64>, ModelError> {
    let (width, height, proc_time) = bin;
    let probe = Instance::new(
        width,
        height,
        proc_time,
        dims.iter().map(|&(w, h)| (w, h, 1)),
    )?;
    let matrix = build_matrix(&probe, &DffParams::default());
    let lb = bin_count_lb(probe.items.iter(), width, height, &matrix) as i64;
    let (num, den) = class.beta();
    let hi = (num * proc_time * lb).div_euclid(den).max(GEN_MIN_DUE);
    Ok((0..dims.len())
        .map(|_| rng.random_range(GEN_MIN_DUE..=hi))
        .collect())
}

pub fn generate_instance(spec: &GeneratorSpec) -> Result<Instance, ModelError> {
    let side = bin_side(spec.category).ok_or(ModelError::BadCategory(spec.category))?;
    if spec.n == 0 {
        return Err(ModelError::BadSize);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let dims = draw_dims(&mut rng, spec.category, side, spec.n);
    let dues = draw_due_dates(&mut rng, &dims, (side, side, GEN_PROC_TIME), spec.class)?;
    let inst = Instance::new(
        side,
        side,
        GEN_PROC_TIME,
        dims.iter().zip(&dues).map(|(&(w, h), &d)| (w, h, d)),
    )?;
    Ok(inst.with_meta(Provenance {
        category: spec.category,
        class: spec.class,
        seed: spec.seed,
    }))
}

/// Repeats the item list `tau` times and draws fresh due dates for the whole
/// enlarged set.
pub fn duplicate_instance(
    base: &Instance,
    tau: usize,
    class: DueClass,
    seed: u64,
) -> Result<Instance, ModelError> {
    if tau == 0 {
        return Err(ModelError::BadSize);
    }
    let dims: Vec<(i64, i64)> = (0..tau)
        .flat_map(|_| base.items.iter().map(|it| (it.width, it.height)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dues = draw_due_dates(
        &mut rng,
        &dims,
        (base.width, base.height, base.proc_time),
        class,
    )?;
    let inst = Instance::new(
        base.width,
        base.height,
        base.proc_time,
        dims.iter().zip(&dues).map(|(&(w, h), &d)| (w, h, d)),
    )?;
    Ok(match base.meta {
        Some(m) => inst.with_meta(Provenance { class, seed, ..m }),
        None => inst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(category: u8, class: DueClass, n: usize, seed: u64) -> GeneratorSpec {
        GeneratorSpec {
            category,
            class,
            n,
            seed,
        }
    }

    #[test]
    fn category_one_uses_ten_by_ten_bins() {
        let inst = generate_instance(&spec(1, DueClass::A, 40, 3)).unwrap();
        assert_eq!((inst.width, inst.height, inst.proc_time), (10, 10, 100));
        for it in &inst.items {
            assert!((1..=10).contains(&it.width) && (1..=10).contains(&it.height));
        }
    }

    #[test]
    fn single_item_due_date_collapses_to_minimum() {
        // One item needs one bin, so the upper end β·100 is below 101.
        for class in [DueClass::A, DueClass::B, DueClass::C] {
            let inst = generate_instance(&spec(1, class, 1, 11)).unwrap();
            assert_eq!(inst.items[0].due, 101);
        }
    }

    #[test]
    fn type_one_ranges_for_w100() {
        let (w, h) = type_ranges(1, 100);
        assert_eq!((w.lo, w.hi, h.lo, h.hi), (67, 100, 1, 50));
        let (w, h) = type_ranges(3, 100);
        assert_eq!((w.lo, w.hi, h.lo, h.hi), (50, 100, 50, 100));
    }

    #[test]
    fn category_seven_is_mostly_wide() {
        let inst = generate_instance(&spec(7, DueClass::B, 400, 5)).unwrap();
        let wide = inst
            .items
            .iter()
            .filter(|it| it.width >= 67 && it.height <= 50)
            .count();
        // 70% type 1, plus type 3/4 items that land in the same box by chance.
        assert!(wide > 240 && wide < 360, "wide count {wide}");
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = generate_instance(&spec(4, DueClass::C, 60, 99)).unwrap();
        let b = generate_instance(&spec(4, DueClass::C, 60, 99)).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&spec(4, DueClass::C, 60, 100)).unwrap();
        assert_ne!(a.items, c.items);
    }

    #[test]
    fn bad_category_is_rejected() {
        assert_eq!(
            generate_instance(&spec(11, DueClass::A, 5, 1)),
            Err(ModelError::BadCategory(11))
        );
    }

    #[test]
    fn duplication_repeats_items() {
        let base = generate_instance(&spec(2, DueClass::A, 20, 8)).unwrap();
        let big = duplicate_instance(&base, 3, DueClass::A, 8).unwrap();
        assert_eq!(big.n(), 60);
        for (k, it) in big.items.iter().enumerate() {
            let src = &base.items[k % 20];
            assert_eq!((it.width, it.height), (src.width, src.height));
        }
    }
}
