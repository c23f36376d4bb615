mod common;

use common::{slice, tiny_instance};
use ddp_core::approx::{approx, ApproxOptions};
use ddp_core::assign::{build_model, solve, AssignMode, AssignStatus, ModelInput, Region};
use ddp_core::bounds::bin_count_lb;
use ddp_core::dff::{build_matrix, candidate_rows, filter_redundant, Dff, DffParams, Rational};
use ddp_core::ffit::{first_fit, FfOptions};
use ddp_core::heur::{heur, update_regions, Block, HeurOptions};
use ddp_core::{
    generate_instance, validate_solution, DueClass, GeneratorSpec, Instance, SearchBudget,
};
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn dffs_for(eps: Rational) -> [Dff; 3] {
    [Dff::U1, Dff::Ueps(eps), Dff::PhiEps(eps)]
}

proptest! {
    #![proptest_config(cfg(300))]

    #[test]
    fn dff_sums_stay_below_one(
        eps_num in 1i64..=50,
        parts in prop::collection::vec(1i64..=60, 1..8),
        den in 1i64..=400,
    ) {
        let eps = Rational::new(eps_num, 100);
        let total: i64 = parts.iter().sum();
        let den = den.max(total);
        for f in dffs_for(eps) {
            let s: Rational = parts
                .iter()
                .map(|&p| f.eval(Rational::new(p, den)).unwrap())
                .sum();
            prop_assert!(s <= Rational::one(), "{f} on {parts:?}/{den}: {s}");
        }
    }

    #[test]
    fn rows_hold_for_sliced_bins(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = rng.random_range(1..=20);
        let h = rng.random_range(1..=20);
        let mut pieces = Vec::new();
        slice(&mut rng, w, h, 6, &mut pieces);
        let inst = Instance::new(w, h, 100, pieces.iter().map(|&(a, b)| (a, b, 100))).unwrap();
        for row in candidate_rows(&inst, &DffParams::default()) {
            let s: Rational = row.alpha_o.iter().sum();
            prop_assert!(s <= Rational::one(), "{:?}: {}", row.gen, s);
        }
    }

    #[test]
    fn filtering_keeps_the_feasible_set(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let side = rng.random_range(2..=12);
        let n = rng.random_range(1..=12);
        let inst = Instance::new(
            side,
            side + rng.random_range(0..3),
            100,
            (0..n).map(|_| (rng.random_range(1..=side), rng.random_range(1..=side), 100)),
        )
        .unwrap();
        let all = candidate_rows(&inst, &DffParams::default());
        let kept = filter_redundant(all.clone());
        let ok = |rows: &[ddp_core::dff::DffRow], pick: &[Option<bool>]| {
            rows.iter().all(|row| {
                let s: Rational = pick
                    .iter()
                    .enumerate()
                    .filter_map(|(i, p)| p.map(|rot| if rot { row.alpha_r[i].unwrap() } else { row.alpha_o[i] }))
                    .sum();
                s <= Rational::one()
            })
        };
        for _ in 0..64 {
            let pick: Vec<Option<bool>> = (1..=n)
                .map(|id| {
                    rng.random_bool(0.6)
                        .then(|| inst.rotatable(id) && rng.random_bool(0.5))
                })
                .collect();
            prop_assert_eq!(ok(&kept, &pick), ok(&all, &pick));
        }
    }

    #[test]
    fn generated_instances_respect_ranges(
        category in 1u8..=10,
        class in prop::sample::select(vec![DueClass::A, DueClass::B, DueClass::C]),
        n in 1usize..=60,
        seed in any::<u64>(),
    ) {
        let spec = GeneratorSpec { category, class, n, seed };
        let inst = generate_instance(&spec).unwrap();
        prop_assert_eq!(&inst, &generate_instance(&spec).unwrap());
        prop_assert_eq!(inst.n(), n);
        let m = build_matrix(&inst, &DffParams::default());
        let lb = bin_count_lb(inst.items.iter(), inst.width, inst.height, &m) as i64;
        let (num, den) = class.beta();
        let hi = (num * inst.proc_time * lb / den).max(101);
        for it in &inst.items {
            prop_assert!(it.width >= 1 && it.width <= inst.width);
            prop_assert!(it.height >= 1 && it.height <= inst.height);
            prop_assert!((101..=hi).contains(&it.due), "due {} outside [101, {hi}]", it.due);
        }
    }
}

proptest! {
    #![proptest_config(cfg(120))]

    #[test]
    fn first_fit_is_valid_and_deterministic(seed in any::<u64>()) {
        let inst = tiny_instance(seed, 9, 8);
        let m = build_matrix(&inst, &DffParams::default());
        let opts = FfOptions { pack_budget: SearchBudget::nodes(200), ..FfOptions::default() };
        let r = first_fit(&inst, &m, &opts);
        prop_assert!(validate_solution(&inst, &r.solution).is_valid());
        prop_assert!(r.solution.bins_used >= bin_count_lb(inst.items.iter(), inst.width, inst.height, &m));
        prop_assert_eq!(&r, &first_fit(&inst, &m, &opts));
        let one = first_fit(&inst, &m, &FfOptions { sigma: Some(1), ..opts });
        prop_assert!(validate_solution(&inst, &one.solution).is_valid());
        prop_assert!(r.solution.bins_used <= one.solution.bins_used);
        let mu = first_fit(&inst, &m, &FfOptions { sigma: Some(2), mu_strategy: true, ..opts });
        prop_assert!(validate_solution(&inst, &mu.solution).is_valid());
    }

    #[test]
    fn heur_beats_its_bound_or_fails(seed in any::<u64>(), relaxed in any::<bool>()) {
        let inst = tiny_instance(seed, 8, 8);
        let m = build_matrix(&inst, &DffParams::default());
        let ff = first_fit(&inst, &m, &FfOptions::default());
        let mode = if relaxed { AssignMode::Relaxed } else { AssignMode::Full };
        let profits: Vec<f64> = inst.items.iter().map(|it| it.area() as f64).collect();
        for bound in [ff.solution.l_max + 1, ff.solution.l_max] {
            let bins = inst.bins_for_bound(bound);
            let out = heur(&inst, &m, bound, bins, &profits, &HeurOptions {
                mode,
                assign_budget: SearchBudget::nodes(5_000),
            });
            prop_assert!(out.rounds as usize <= inst.n());
            if let Some(sol) = out.solution {
                prop_assert!(validate_solution(&inst, &sol).is_valid());
                prop_assert!(sol.l_max < bound);
                prop_assert!(sol.bins_used <= bins);
            }
        }
    }

    #[test]
    fn approx_never_loses_to_first_fit(seed in any::<u64>(), rng_seed in 0u64..4) {
        let inst = tiny_instance(seed, 8, 8);
        let m = build_matrix(&inst, &DffParams::default());
        let opts = ApproxOptions { a_lim_heur: 3, a_lim_relaxed: 3, seed: rng_seed, ..ApproxOptions::default() };
        let r = approx(&inst, &m, &opts);
        prop_assert!(validate_solution(&inst, &r.solution).is_valid());
        prop_assert!(r.solution.l_max <= r.ff_solution.l_max);
        for w in r.trace.windows(2) {
            prop_assert!(w[1].ub < w[0].ub);
            let allowed = inst.bins_for_bound(w[0].ub);
            prop_assert!(w[1].bins <= allowed.max(1));
        }
        prop_assert_eq!(r.trace.last().unwrap().ub, r.solution.l_max);
        prop_assert_eq!(&approx(&inst, &m, &opts).trace, &r.trace);
    }
}

/// Random non-overlapping blocks, placed by rejection.
fn random_blocks(rng: &mut ChaCha8Rng, w: i64, h: i64) -> Vec<Block> {
    let mut blocks: Vec<Block> = Vec::new();
    for _ in 0..rng.random_range(0..8) {
        let x0 = rng.random_range(0..w);
        let y0 = rng.random_range(0..h);
        let b = Block {
            x0,
            y0,
            x1: rng.random_range(x0 + 1..=w),
            y1: rng.random_range(y0 + 1..=h),
        };
        let clash = blocks
            .iter()
            .any(|o| b.x0 < o.x1 && o.x0 < b.x1 && b.y0 < o.y1 && o.y0 < b.y1);
        if !clash {
            blocks.push(b);
        }
    }
    blocks
}

#[test]
fn regions_are_free_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let (w, h) = (rng.random_range(1..=12), rng.random_range(1..=12));
        let blocks = random_blocks(&mut rng, w, h);
        for r in update_regions(1, w, h, &blocks) {
            assert!(r.x >= 0 && r.y >= 0 && r.x + r.width <= w && r.y + r.height <= h);
            assert!(r.width > 0 && r.height > 0);
            for b in &blocks {
                let apart =
                    r.x + r.width <= b.x0 || b.x1 <= r.x || r.y + r.height <= b.y0 || b.y1 <= r.y;
                assert!(apart, "{r:?} hits {b:?} among {blocks:?}");
            }
        }
    }
}

#[test]
fn assign_output_never_overlaps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let side = rng.random_range(3..=10);
        let n = rng.random_range(1..=5);
        let inst = Instance::new(
            side,
            side,
            100,
            (0..n).map(|_| (rng.random_range(1..=side), rng.random_range(1..=side), 200)),
        )
        .unwrap();
        let regions: Vec<Region> = (0..rng.random_range(1..=5))
            .map(|_| {
                let x = rng.random_range(0..side);
                let y = rng.random_range(0..side);
                Region {
                    bin: 1,
                    x,
                    y,
                    width: rng.random_range(1..=side - x),
                    height: rng.random_range(1..=side - y),
                }
            })
            .collect();
        let m = build_matrix(&inst, &DffParams::default());
        let profits: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..10.0)).collect();
        let packed: Vec<Vec<i64>> = vec![vec![0; m.len()]; 2];
        let unpacked: Vec<usize> = (1..=n).collect();
        for mode in [AssignMode::Relaxed, AssignMode::Full] {
            let model = build_model(&ModelInput {
                inst: &inst,
                matrix: &m,
                regions: &regions,
                unpacked: &unpacked,
                profits: &profits,
                packed_load: &packed,
                bound: 300,
                bins: 1,
                mode,
            });
            let res = solve(&model, &SearchBudget::nodes(20_000));
            if mode == AssignMode::Relaxed {
                assert_ne!(res.status, AssignStatus::Infeasible, "case {case}");
            }
            if res.status == AssignStatus::Infeasible {
                continue;
            }
            let rects: Vec<(i64, i64, i64, i64)> = res
                .placements
                .iter()
                .map(|&(id, r, rot)| {
                    let (w, h) = inst.item(id).extents(rot);
                    let e = regions[r];
                    assert!(e.fits(w, h));
                    (e.x, e.y, e.x + w, e.y + h)
                })
                .collect();
            for (a, p) in rects.iter().enumerate() {
                for q in &rects[a + 1..] {
                    assert!(
                        p.2 <= q.0 || q.2 <= p.0 || p.3 <= q.1 || q.3 <= p.1,
                        "case {case}"
                    );
                }
            }
            if mode == AssignMode::Full {
                // Placed plus reserved mass stays within every row, exactly.
                for row in &m.rows {
                    let mut s = Rational::zero();
                    for &(id, _, rot) in res.placements.iter().chain(&res.reservations) {
                        s += if rot {
                            row.alpha_r[id - 1].unwrap()
                        } else {
                            row.alpha_o[id - 1]
                        };
                    }
                    assert!(s <= Rational::one(), "case {case}");
                }
            }
        }
    }
}
