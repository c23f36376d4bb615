//! First fit followed by repeated region packing against a shrinking bound.
//!
//! The first-fit layout sets the starting bound. Each later pass asks the
//! region packer for a layout strictly better than the current best, first
//! without reservations or row constraints and then with both. A failed
//! attempt perturbs the item profits at random; after too many failures in a
//! row the pass ends. Every success restarts the pass from plain profits.

use crate::assign::AssignMode;
use crate::budget::SearchBudget;
use crate::dff::{DffMatrix, Rational};
use crate::ffit::{first_fit, FfOptions};
use crate::heur::{heur, HeurOptions};
use crate::model::{Instance, Solution};
use crate::opp::PackStats;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// Settings for instances of up to about a hundred items.
    Paper,
    /// Cheaper settings for instances with hundreds of items.
    Large,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxOptions {
    /// Failures tolerated in the pass with row constraints.
    pub a_lim_heur: u32,
    /// Failures tolerated in the pass without them.
    pub a_lim_relaxed: u32,
    /// Ask for at least this percentage of improvement first.
    pub delta_percent: Option<Rational>,
    pub seed: u64,
    pub ff: FfOptions,
    pub assign_budget: SearchBudget,
    /// Stop as soon as the best value reaches this known lower bound.
    pub lower_bound: Option<i64>,
}

impl ApproxOptions {
    pub fn profile(profile: Profile, category: Option<u8>) -> Self {
        match profile {
            Profile::Paper => ApproxOptions {
                a_lim_heur: 100,
                a_lim_relaxed: 100,
                delta_percent: None,
                seed: 0,
                ff: FfOptions::default(),
                assign_budget: SearchBudget::nodes(2_000),
                lower_bound: None,
            },
            Profile::Large => {
                let small_items = matches!(category, Some(2 | 4 | 6 | 10));
                ApproxOptions {
                    a_lim_heur: 30,
                    a_lim_relaxed: 10,
                    delta_percent: Some(Rational::from_integer(2)),
                    seed: 0,
                    ff: FfOptions {
                        pack_budget: SearchBudget::nodes(30_000),
                        sigma: small_items.then_some(40),
                        mu_strategy: small_items,
                    },
                    assign_budget: SearchBudget::nodes(2_000),
                    lower_bound: None,
                }
            }
        }
    }
}

impl Default for ApproxOptions {
    fn default() -> Self {
        ApproxOptions::profile(Profile::Paper, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceMode {
    FirstFit,
    Relaxed,
    Full,
}

impl TraceMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceMode::FirstFit => "ff",
            TraceMode::Relaxed => "relaxed",
            TraceMode::Full => "full",
        }
    }
}

/// One accepted improvement (the first entry is the first-fit start).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: u32,
    pub mode: TraceMode,
    pub ub: i64,
    pub bins: usize,
    /// Packer calls since the previous entry.
    pub attempts: u32,
    /// Search nodes since the previous entry.
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxResult {
    pub solution: Solution,
    pub ff_solution: Solution,
    pub trace: Vec<TraceEntry>,
    pub ff_stats: PackStats,
    /// Region-packer calls per pass (relaxed, full).
    pub heur_calls: [u32; 2],
    pub assign_nodes: u64,
}

/// Bound a δ-step asks for: at least `max(1, ⌈δ·|ub|/100⌉)` better.
fn delta_target(ub: i64, delta: Rational) -> i64 {
    let step = (delta * ub.abs() / 100).ceil().to_integer().max(1);
    ub - step + 1
}

fn areas(inst: &Instance) -> Vec<f64> {
    inst.items.iter().map(|it| it.area() as f64).collect()
}

pub fn approx(inst: &Instance, matrix: &DffMatrix, opts: &ApproxOptions) -> ApproxResult {
    let ff = first_fit(inst, matrix, &opts.ff);
    let mut best = ff.solution.clone();
    let mut ub = best.l_max;
    let mut trace = vec![TraceEntry {
        iteration: 0,
        mode: TraceMode::FirstFit,
        ub,
        bins: inst.bins_for_bound(ub),
        attempts: 0,
        nodes: ff.stats.nodes,
    }];
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut heur_calls = [0u32; 2];
    let mut assign_nodes = 0u64;
    let mut since_attempts = 0u32;
    let mut since_nodes = 0u64;
    let done = |ub: i64| opts.lower_bound.is_some_and(|lb| ub <= lb);

    for (pass, mode, a_lim) in [
        (0, AssignMode::Relaxed, opts.a_lim_relaxed),
        (1, AssignMode::Full, opts.a_lim_heur),
    ] {
        let heur_opts = HeurOptions {
            mode,
            assign_budget: opts.assign_budget,
        };
        let mut use_delta = opts.delta_percent.is_some();
        'outer: while !done(ub) {
            let mut profits = areas(inst);
            let mut count = 0u32;
            loop {
                let target = match (use_delta, opts.delta_percent) {
                    (true, Some(d)) => delta_target(ub, d),
                    _ => ub,
                };
                let bins = inst.bins_for_bound(target);
                let out = heur(inst, matrix, target, bins, &profits, &heur_opts);
                heur_calls[pass] += 1;
                since_attempts += 1;
                since_nodes += out.assign_nodes;
                assign_nodes += out.assign_nodes;
                if let Some(sol) = out.solution {
                    debug_assert!(sol.l_max < ub);
                    ub = sol.l_max;
                    best = sol;
                    trace.push(TraceEntry {
                        iteration: trace.len() as u32,
                        mode: if mode == AssignMode::Full {
                            TraceMode::Full
                        } else {
                            TraceMode::Relaxed
                        },
                        ub,
                        bins: inst.bins_for_bound(ub),
                        attempts: since_attempts,
                        nodes: since_nodes,
                    });
                    since_attempts = 0;
                    since_nodes = 0;
                    continue 'outer;
                }
                count += 1;
                if count > a_lim {
                    if use_delta {
                        use_delta = false;
                        continue 'outer;
                    }
                    break 'outer;
                }
                for (s, it) in profits.iter_mut().zip(&inst.items) {
                    *s = rng.random_range(1.0..3.0) * it.area() as f64;
                }
            }
        }
    }

    ApproxResult {
        solution: best,
        ff_solution: ff.solution,
        trace,
        ff_stats: ff.stats,
        heur_calls,
        assign_nodes,
    }
}
