//! Dual feasible functions and the feasibility-constraint matrix.
//!
//! A pair of dual feasible functions `(u1, u2)` turns each item into a
//! transformed area `u1(w/W)·u2(h/H)`; in any single-bin packing those areas
//! sum to at most one. Every row of a [`DffMatrix`] is one such inequality,
//! evaluated for both orientations of every item.
//!
//! All arithmetic is exact. Each row also carries an integer scale
//! (`capacity`) such that every transformed area of an integral rectangle is
//! an integer multiple of `1 / capacity`; the hot loops elsewhere work on
//! those scaled integers.

use crate::model::Instance;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DffError {
    #[error("argument {0} outside [0, 1]")]
    Domain(Rational),
}

/// One of the three function families, with its parameter where it has one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dff {
    /// `x` if `2x` is integral, else `⌊2x⌋`.
    U1,
    /// Rounds big items up to 1 and drops small items (below `ε`).
    Ueps(Rational),
    /// Rounds to multiples of `ε`: down below 1/2, up above it.
    PhiEps(Rational),
}

impl fmt::Display for Dff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dff::U1 => write!(f, "U1"),
            Dff::Ueps(e) => write!(f, "U({e})"),
            Dff::PhiEps(e) => write!(f, "phi({e})"),
        }
    }
}

fn floor_ratio(x: Rational) -> i64 {
    x.numer().div_floor(x.denom())
}

impl Dff {
    pub fn epsilon(&self) -> Option<Rational> {
        match *self {
            Dff::U1 => None,
            Dff::Ueps(e) | Dff::PhiEps(e) => Some(e),
        }
    }

    pub fn eval(&self, x: Rational) -> Result<Rational, DffError> {
        if x < Rational::zero() || x > Rational::one() {
            return Err(DffError::Domain(x));
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: Rational) -> Rational {
        let half = Rational::new(1, 2);
        match *self {
            Dff::U1 => {
                let twice = x * 2;
                if twice.is_integer() {
                    x
                } else {
                    Rational::from_integer(floor_ratio(twice))
                }
            }
            Dff::Ueps(eps) => {
                if x > Rational::one() - eps {
                    Rational::one()
                } else if x >= eps {
                    x
                } else {
                    Rational::zero()
                }
            }
            Dff::PhiEps(eps) => {
                if x > half {
                    Rational::one() - eps * floor_ratio((Rational::one() - x) / eps)
                } else if x == half {
                    x
                } else {
                    eps * floor_ratio(x / eps)
                }
            }
        }
    }

    /// Smallest integer `s` such that `s · self(v / side)` is integral for
    /// every integer `0 ≤ v ≤ side`.
    pub fn scale(&self, side: i64) -> i64 {
        match self.epsilon() {
            None => side,
            Some(e) => side.lcm(e.denom()),
        }
    }

    fn rank(&self) -> (u8, Rational) {
        match *self {
            Dff::U1 => (0, Rational::zero()),
            Dff::Ueps(e) => (1, e),
            Dff::PhiEps(e) => (2, e),
        }
    }
}

/// Parameters for matrix generation.
#[derive(Debug, Clone, PartialEq)]
pub struct DffParams {
    /// Parameters of the width function.
    pub p: Vec<Rational>,
    /// Parameters of the height function.
    pub q: Vec<Rational>,
    /// Rows kept after redundancy filtering, in enumeration order.
    pub max_rows: usize,
}

impl Default for DffParams {
    fn default() -> Self {
        let eps = vec![
            Rational::new(3, 20),
            Rational::new(3, 10),
            Rational::new(9, 20),
        ];
        DffParams {
            p: eps.clone(),
            q: eps,
            max_rows: 27,
        }
    }
}

impl DffParams {
    /// No rows at all: every feasibility check degenerates to "true".
    pub fn empty() -> Self {
        DffParams {
            p: Vec::new(),
            q: Vec::new(),
            max_rows: 0,
        }
    }
}

/// One feasibility constraint evaluated on every item of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DffRow {
    pub gen: (Dff, Dff),
    /// Transformed area of each item (by index `id − 1`) without rotation.
    pub alpha_o: Vec<Rational>,
    /// Same with rotation, `None` when the item cannot turn.
    pub alpha_r: Vec<Option<Rational>>,
    /// `capacity · α` is integral for every integral rectangle in the bin.
    pub capacity: i64,
    pub scaled_o: Vec<i64>,
    pub scaled_r: Vec<Option<i64>>,
    bin: (i64, i64),
}

impl DffRow {
    fn new(gen: (Dff, Dff), inst: &Instance) -> Self {
        let bin = (inst.width, inst.height);
        let capacity = gen.0.scale(inst.width) * gen.1.scale(inst.height);
        let mut row = DffRow {
            gen,
            alpha_o: Vec::with_capacity(inst.n()),
            alpha_r: Vec::with_capacity(inst.n()),
            capacity,
            scaled_o: Vec::with_capacity(inst.n()),
            scaled_r: Vec::with_capacity(inst.n()),
            bin,
        };
        for it in &inst.items {
            let o = row.alpha(it.width, it.height);
            let r = inst
                .rotatable(it.id)
                .then(|| row.alpha(it.height, it.width));
            row.scaled_o.push(row.to_scaled(o));
            row.scaled_r.push(r.map(|v| row.to_scaled(v)));
            row.alpha_o.push(o);
            row.alpha_r.push(r);
        }
        row
    }

    /// Transformed area of a `w × h` rectangle standing as given.
    pub fn alpha(&self, w: i64, h: i64) -> Rational {
        let a = self.gen.0.eval_unchecked(Rational::new(w, self.bin.0));
        let b = self.gen.1.eval_unchecked(Rational::new(h, self.bin.1));
        a * b
    }

    fn to_scaled(&self, v: Rational) -> i64 {
        let s = v * self.capacity;
        debug_assert!(
            s.is_integer(),
            "row scale {} does not clear {}",
            self.capacity,
            v
        );
        s.to_integer()
    }

    /// `capacity · alpha(w, h)`.
    pub fn scaled(&self, w: i64, h: i64) -> i64 {
        self.to_scaled(self.alpha(w, h))
    }

    /// Cheapest orientation of item `idx`, scaled.
    pub fn scaled_min(&self, idx: usize) -> i64 {
        match self.scaled_r[idx] {
            Some(r) => r.min(self.scaled_o[idx]),
            None => self.scaled_o[idx],
        }
    }

    fn max_orientation_sum(&self) -> Rational {
        self.alpha_o
            .iter()
            .zip(&self.alpha_r)
            .map(|(&o, r)| r.map_or(o, |r| r.max(o)))
            .sum()
    }

    /// Componentwise `self ≤ other` over both orientations (absent = 0).
    fn dominated_by(&self, other: &DffRow) -> bool {
        let zero = Rational::zero();
        self.alpha_o.iter().zip(&other.alpha_o).all(|(a, b)| a <= b)
            && self
                .alpha_r
                .iter()
                .zip(&other.alpha_r)
                .all(|(a, b)| a.unwrap_or(zero) <= b.unwrap_or(zero))
    }

    fn same_values(&self, other: &DffRow) -> bool {
        self.alpha_o == other.alpha_o && self.alpha_r == other.alpha_r
    }
}

/// The non-redundant feasibility constraints of one instance.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DffMatrix {
    pub rows: Vec<DffRow>,
}

impl DffMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Reduced-fraction CSV, one line per row and orientation:
    /// `row,u1,u2,orientation,a_1,...,a_n` (`-` for a missing rotation).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (c, row) in self.rows.iter().enumerate() {
            let o: Vec<String> = row.alpha_o.iter().map(ToString::to_string).collect();
            let r: Vec<String> = row
                .alpha_r
                .iter()
                .map(|v| v.map_or_else(|| "-".to_string(), |v| v.to_string()))
                .collect();
            out.push_str(&format!(
                "{},{},{},o,{}\n",
                c + 1,
                row.gen.0,
                row.gen.1,
                o.join(",")
            ));
            out.push_str(&format!(
                "{},{},{},r,{}\n",
                c + 1,
                row.gen.0,
                row.gen.1,
                r.join(",")
            ));
        }
        out
    }
}

fn family(params: &[Rational]) -> Vec<Dff> {
    let mut sorted = params.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut out = vec![Dff::U1];
    out.extend(sorted.iter().map(|&e| Dff::Ueps(e)));
    out.extend(sorted.iter().map(|&e| Dff::PhiEps(e)));
    out
}

/// Filters the rows of [`candidate_rows`] and keeps at most
/// `params.max_rows` of them in enumeration order.
pub fn build_matrix(inst: &Instance, params: &DffParams) -> DffMatrix {
    if params.max_rows == 0 {
        return DffMatrix::default();
    }
    let mut rows = filter_redundant(candidate_rows(inst, params));
    rows.truncate(params.max_rows);
    DffMatrix { rows }
}

/// One row per `(u1, u2)` in `{U1, U(p), φ(p)} × {U1, U(q), φ(q)}` over all
/// parameter values, before any filtering.
pub fn candidate_rows(inst: &Instance, params: &DffParams) -> Vec<DffRow> {
    let widths = family(&params.p);
    let heights = family(&params.q);
    let mut pairs: Vec<(Dff, Dff)> = Vec::new();
    for &u1 in &widths {
        for &u2 in &heights {
            if !pairs.contains(&(u1, u2)) {
                pairs.push((u1, u2));
            }
        }
    }
    pairs.sort_by_key(|(a, b)| (a.rank(), b.rank()));
    pairs.into_iter().map(|g| DffRow::new(g, inst)).collect()
}

/// Drops rows that can never bind: those whose orientation-maximal sum is at
/// most one, and those dominated componentwise by another row. Of several
/// identical rows the lowest-indexed survives.
pub fn filter_redundant(rows: Vec<DffRow>) -> Vec<DffRow> {
    let one = Rational::one();
    let keep: Vec<bool> = rows
        .iter()
        .enumerate()
        .map(|(c, row)| {
            if row.max_orientation_sum() <= one {
                return false;
            }
            !rows.iter().enumerate().any(|(d, other)| {
                d != c && row.dominated_by(other) && (d < c || !row.same_values(other))
            })
        })
        .collect();
    rows.into_iter()
        .zip(keep)
        .filter_map(|(r, k)| k.then_some(r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn u1_fixes_half() {
        assert_eq!(Dff::U1.eval(r(1, 2)).unwrap(), r(1, 2));
        assert_eq!(Dff::U1.eval(r(2, 5)).unwrap(), r(0, 1));
        assert_eq!(Dff::U1.eval(r(3, 5)).unwrap(), r(1, 1));
        assert_eq!(Dff::U1.eval(r(1, 1)).unwrap(), r(1, 1));
    }

    #[test]
    fn ueps_values() {
        let u = Dff::Ueps(r(3, 10));
        assert_eq!(u.eval(r(1, 5)).unwrap(), r(0, 1));
        assert_eq!(u.eval(r(1, 2)).unwrap(), r(1, 2));
        assert_eq!(u.eval(r(3, 4)).unwrap(), r(1, 1));
        // Breakpoints are inclusive on the identity part.
        assert_eq!(u.eval(r(3, 10)).unwrap(), r(3, 10));
        assert_eq!(u.eval(r(7, 10)).unwrap(), r(7, 10));
    }

    #[test]
    fn phi_values() {
        let u = Dff::PhiEps(r(3, 10));
        assert_eq!(u.eval(r(3, 5)).unwrap(), r(7, 10));
        assert_eq!(u.eval(r(2, 5)).unwrap(), r(3, 10));
        assert_eq!(u.eval(r(1, 2)).unwrap(), r(1, 2));
        assert_eq!(u.eval(r(1, 10)).unwrap(), r(0, 1));
    }

    #[test]
    fn domain_error_outside_unit_interval() {
        assert!(Dff::U1.eval(r(-1, 3)).is_err());
        assert!(Dff::PhiEps(r(1, 4)).eval(r(5, 4)).is_err());
    }

    #[test]
    fn scale_clears_every_value() {
        for d in [
            Dff::U1,
            Dff::Ueps(r(3, 20)),
            Dff::PhiEps(r(3, 20)),
            Dff::PhiEps(r(9, 20)),
        ] {
            for side in [1, 7, 10, 30, 100] {
                let s = d.scale(side);
                for v in 0..=side {
                    assert!((d.eval(r(v, side)).unwrap() * s).is_integer());
                }
            }
        }
    }

    #[test]
    fn single_full_item_has_unit_rows() {
        let inst = Instance::new(10, 10, 100, [(10, 10, 100)]).unwrap();
        let row = DffRow::new((Dff::U1, Dff::U1), &inst);
        assert_eq!(row.alpha_o, vec![r(1, 1)]);
    }

    #[test]
    fn half_height_items() {
        let inst = Instance::new(10, 10, 100, [(10, 5, 100), (10, 5, 100)]).unwrap();
        let row = DffRow::new((Dff::U1, Dff::U1), &inst);
        assert_eq!(row.alpha_o, vec![r(1, 2), r(1, 2)]);
        let total: Rational = row.alpha_o.iter().sum();
        assert!(total <= r(1, 1));
        // The default matrix keeps every row within capacity as well.
        let m = build_matrix(&inst, &DffParams::default());
        for row in &m.rows {
            assert!(row.scaled_o.iter().sum::<i64>() <= row.capacity);
        }
    }

    #[test]
    fn unrotatable_item_has_no_rotated_alpha() {
        let inst = Instance::new(10, 4, 100, [(10, 3, 100), (3, 3, 100)]).unwrap();
        let row = DffRow::new((Dff::U1, Dff::U1), &inst);
        assert_eq!(row.alpha_r[0], None);
        assert!(row.alpha_r[1].is_some());
    }

    fn raw_row(o: &[(i64, i64)], rot: &[Option<(i64, i64)>]) -> DffRow {
        DffRow {
            gen: (Dff::U1, Dff::U1),
            alpha_o: o.iter().map(|&(n, d)| r(n, d)).collect(),
            alpha_r: rot.iter().map(|v| v.map(|(n, d)| r(n, d))).collect(),
            capacity: 1,
            scaled_o: Vec::new(),
            scaled_r: Vec::new(),
            bin: (1, 1),
        }
    }

    #[test]
    fn filter_drops_zero_and_duplicate_rows() {
        let zero = raw_row(&[(0, 1), (0, 1)], &[None, None]);
        let a = raw_row(&[(3, 5), (3, 5)], &[None, Some((1, 5))]);
        let b = a.clone();
        let kept = filter_redundant(vec![zero, a.clone(), b]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0], a);
    }

    #[test]
    fn filter_drops_dominated_row() {
        let hi = raw_row(&[(4, 5), (4, 5)], &[Some((4, 5)), None]);
        let lo = raw_row(&[(3, 5), (3, 5)], &[Some((1, 5)), None]);
        let kept = filter_redundant(vec![lo, hi.clone()]);
        assert_eq!(kept, vec![hi]);
    }

    #[test]
    fn matrix_is_capped() {
        let inst = Instance::new(
            100,
            100,
            100,
            (1..=30).map(|k| ((k * 7) % 100 + 1, (k * 13) % 100 + 1, 100)),
        )
        .unwrap();
        let m = build_matrix(&inst, &DffParams::default());
        assert!(m.len() <= 27);
        assert!(!m.is_empty());
        for row in &m.rows {
            for v in &row.alpha_o {
                assert!(*v >= r(0, 1) && *v <= r(1, 1));
            }
        }
    }
}
