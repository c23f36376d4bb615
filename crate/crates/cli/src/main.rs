use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ddp_core::approx::{approx, ApproxOptions, Profile, TraceMode};
use ddp_core::bench::{
    aggregate, aggregates_to_csv, instance_name, provenance_from_name, render_report,
    rows_from_csv, rows_to_csv, run_bench, BenchConfig, Method,
};
use ddp_core::bounds::{compute_bounds, Decision};
use ddp_core::dff::{build_matrix, DffParams, Rational};
use ddp_core::exact::{solve_exact, ExactStatus};
use ddp_core::ffit::first_fit;
use ddp_core::opp::{pack, Rect};
use ddp_core::{
    duplicate_instance, generate_instance, parse_instance, serialize_instance, serialize_solution,
    validate_solution, DueClass, GeneratorSpec, Instance, SearchBudget, Solution,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXT: &str = "2bpp";

#[derive(Parser)]
#[command(
    name = "ddp",
    version,
    about = "Bin packing with due dates: bounds, heuristics and exact solving"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for generators and randomised heuristics.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Node limit of each packing test.
    #[arg(long, global = true)]
    node_budget_pack: Option<u64>,
    /// Node limit of each assignment model.
    #[arg(long, global = true)]
    node_budget_assign: Option<u64>,
    /// Heuristic settings: `paper` for instances up to about 100 items, `large` beyond.
    #[arg(long, global = true, value_enum, default_value_t = ProfileArg::Paper)]
    profile: ProfileArg,
    /// Output file (or directory for `gen`). Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Paper,
    Large,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Paper => Profile::Paper,
            ProfileArg::Large => Profile::Large,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ff,
    Approx,
    Exact,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instance files and a manifest.
    Gen(GenArgs),
    /// Lower bounds of an instance, as JSON.
    Bounds {
        file: PathBuf,
        /// Node limit of each lower-bound probe.
        #[arg(long, default_value_t = 5_000_000)]
        bound_nodes: u64,
    },
    /// Solve an instance and print the solution.
    Solve(SolveArgs),
    /// Run methods over every instance file of a directory.
    Bench(BenchArgs),
    /// Summarise a bench CSV.
    Report {
        file: PathBuf,
        /// JSON instead of text tables.
        #[arg(long)]
        json: bool,
    },
    /// Cross-check the packing test on random rectangle sets.
    #[command(hide = true)]
    OppCheck {
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = 5)]
        max_items: usize,
        #[arg(long, default_value_t = 6)]
        max_side: i64,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=10), required_unless_present = "from")]
    category: Option<u8>,
    /// Due-date class: A, B or C.
    #[arg(long, value_parser = parse_class)]
    class: Option<DueClass>,
    #[arg(long, required_unless_present = "from")]
    n: Option<usize>,
    /// Instances to write, with seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Repeat the items of `--from` this many times with fresh due dates.
    #[arg(long, requires = "from")]
    tau: Option<usize>,
    #[arg(long, requires = "tau", conflicts_with_all = ["category", "n"])]
    from: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Approx)]
    method: MethodArg,
    /// Required improvement per step, in percent (approx only).
    #[arg(long, value_parser = parse_percent)]
    delta: Option<Rational>,
    /// Largest instance the exact solver accepts without `--force`.
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    #[arg(long)]
    force: bool,
    /// Node limit of the exact search.
    #[arg(long)]
    node_budget_exact: Option<u64>,
}

#[derive(Args)]
struct BenchArgs {
    dir: PathBuf,
    /// Comma-separated subset of ff, approx, exact.
    #[arg(long, default_value = "ff,approx", value_delimiter = ',')]
    methods: Vec<Method>,
    /// Node limit of each lower-bound probe.
    #[arg(long, default_value_t = 5_000_000)]
    bound_nodes: u64,
    /// Larger instances get a `skipped` exact row.
    #[arg(long, default_value_t = 8)]
    exact_max_n: usize,
    /// Record wall-clock times (makes the output run-dependent).
    #[arg(long)]
    timings: bool,
}

fn parse_class(s: &str) -> Result<DueClass, String> {
    s.parse()
}

/// A non-negative decimal such as `2` or `0.5`.
fn parse_percent(s: &str) -> Result<Rational, String> {
    let bad = || format!("not a non-negative decimal: {s:?}");
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty()
        || frac.len() > 9
        || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()))
    {
        return Err(bad());
    }
    let digits: i64 = format!("{int}{frac}").parse().map_err(|_| bad())?;
    Ok(Rational::new(digits, 10i64.pow(frac.len() as u32)))
}

/// Exit status classes: usage 1, I/O 2, internal invariant 3.
enum Failure {
    Usage(anyhow::Error),
    Io(anyhow::Error),
    Internal(anyhow::Error),
}

type Res<T> = Result<T, Failure>;

fn io<T>(r: std::io::Result<T>, what: impl FnOnce() -> String) -> Res<T> {
    r.with_context(what).map_err(Failure::Io)
}

fn read_instance(path: &Path) -> Res<Instance> {
    let text = io(fs::read_to_string(path), || {
        format!("reading {}", path.display())
    })?;
    let inst =
        parse_instance(&text).map_err(|e| Failure::Io(anyhow!("{}: {e}", path.display())))?;
    Ok(attach_meta(inst, path))
}

fn attach_meta(inst: Instance, path: &Path) -> Instance {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    match provenance_from_name(stem) {
        Some((p, n)) if n == inst.n() => inst.with_meta(p),
        _ => inst,
    }
}

fn emit(out: Option<&Path>, text: &str) -> Res<()> {
    match out {
        Some(p) => io(fs::write(p, text), || format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            io(stdout.write_all(text.as_bytes()), || {
                "writing stdout".into()
            })
        }
    }
}

fn approx_options(g: &Global, inst: &Instance) -> ApproxOptions {
    let mut o = ApproxOptions::profile(g.profile.into(), inst.meta.map(|m| m.category));
    o.seed = g.seed;
    if let Some(n) = g.node_budget_pack {
        o.ff.pack_budget = SearchBudget::nodes(n);
    }
    if let Some(n) = g.node_budget_assign {
        o.assign_budget = SearchBudget::nodes(n);
    }
    o
}

fn ensure_valid(inst: &Instance, sol: &Solution) -> Res<()> {
    let report = validate_solution(inst, sol);
    match report.violations.first() {
        None => Ok(()),
        Some(v) => Err(Failure::Internal(anyhow!(
            "produced an invalid solution: {v} ({} violations)",
            report.violations.len()
        ))),
    }
}

fn cmd_gen(g: &Global, a: &GenArgs) -> Res<()> {
    let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("."));
    io(fs::create_dir_all(&dir), || {
        format!("creating {}", dir.display())
    })?;
    let mut made: Vec<(String, Instance)> = Vec::new();
    if let (Some(tau), Some(from)) = (a.tau, &a.from) {
        let base = read_instance(from)?;
        let class = a
            .class
            .or(base.meta.map(|m| m.class))
            .unwrap_or(DueClass::A);
        let inst =
            duplicate_instance(&base, tau, class, g.seed).map_err(|e| Failure::Usage(e.into()))?;
        let name = match inst.meta {
            Some(p) => instance_name(&p, inst.n()),
            None => {
                let stem = from
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("instance");
                format!("{stem}_tau{tau}_s{}", g.seed)
            }
        };
        made.push((name, inst));
    } else {
        let (category, n) = (a.category.expect("required"), a.n.expect("required"));
        let class = a.class.unwrap_or(DueClass::A);
        for seed in g.seed..g.seed + a.count {
            let inst = generate_instance(&GeneratorSpec {
                category,
                class,
                n,
                seed,
            })
            .map_err(|e| Failure::Usage(e.into()))?;
            made.push((instance_name(&inst.meta.expect("generated"), n), inst));
        }
    }
    let mut entries = Vec::new();
    for (name, inst) in &made {
        let file = format!("{name}.{EXT}");
        let path = dir.join(&file);
        io(fs::write(&path, serialize_instance(inst)), || {
            format!("writing {}", path.display())
        })?;
        entries.push(serde_json::json!({
            "file": file,
            "category": inst.meta.map(|m| m.category),
            "class": inst.meta.map(|m| m.class.to_string()),
            "n": inst.n(),
            "seed": inst.meta.map(|m| m.seed),
        }));
    }
    let manifest = serde_json::to_string_pretty(&serde_json::json!({ "instances": entries }))
        .expect("plain json");
    let path = dir.join("manifest.json");
    io(fs::write(&path, manifest + "\n"), || {
        format!("writing {}", path.display())
    })?;
    eprintln!("wrote {} instance(s) to {}", made.len(), dir.display());
    Ok(())
}

fn cmd_bounds(g: &Global, file: &Path, bound_nodes: u64) -> Res<()> {
    let inst = read_instance(file)?;
    let matrix = build_matrix(&inst, &DffParams::default());
    let opts = approx_options(g, &inst);
    let ff = first_fit(&inst, &matrix, &opts.ff);
    ensure_valid(&inst, &ff.solution)?;
    let b = compute_bounds(
        &inst,
        &matrix,
        ff.solution.l_max,
        &SearchBudget::nodes(bound_nodes),
    );
    let json = serde_json::json!({
        "lb1": b.lb1,
        "lb3": b.lb3,
        "lb3_valid": b.lb3_valid,
        "lb3_nodes": b.lb3_nodes,
        "lb3_probes": b.lb3_probes,
        "bins": b.bins,
        "upper": ff.solution.l_max,
        "rows": matrix.len(),
    });
    emit(
        g.out.as_deref(),
        &(serde_json::to_string_pretty(&json).expect("plain json") + "\n"),
    )
}

fn cmd_solve(g: &Global, a: &SolveArgs) -> Res<()> {
    let inst = read_instance(&a.file)?;
    let matrix = build_matrix(&inst, &DffParams::default());
    let mut opts = approx_options(g, &inst);
    let sol = match a.method {
        MethodArg::Ff => {
            let r = first_fit(&inst, &matrix, &opts.ff);
            eprintln!(
                "ff: L_max {} in {} bins, {} pack calls",
                r.solution.l_max, r.solution.bins_used, r.stats.calls
            );
            r.solution
        }
        MethodArg::Approx => {
            if a.delta.is_some() {
                opts.delta_percent = a.delta;
            }
            let r = approx(&inst, &matrix, &opts);
            eprintln!(
                "approx: L_max {} in {} bins (first fit {}), {} improvements",
                r.solution.l_max,
                r.solution.bins_used,
                r.ff_solution.l_max,
                r.trace
                    .iter()
                    .filter(|t| t.mode != TraceMode::FirstFit)
                    .count()
            );
            r.solution
        }
        MethodArg::Exact => {
            if inst.n() > a.max_n && !a.force {
                return Err(Failure::Usage(anyhow!(
                    "exact solving is limited to {} items (this instance has {}); pass --force to try anyway",
                    a.max_n,
                    inst.n()
                )));
            }
            let budget = a
                .node_budget_exact
                .map_or(SearchBudget::UNLIMITED, SearchBudget::nodes);
            let r = solve_exact(&inst, &matrix, inst.n(), &budget);
            match r.status {
                ExactStatus::Optimal => eprintln!("exact: optimal, {} nodes", r.nodes),
                ExactStatus::Bound { lb, ub } => eprintln!(
                    "exact: budget exhausted after {} nodes; optimum in [{lb}, {}]",
                    r.nodes,
                    ub.map_or("?".to_string(), |u| u.to_string())
                ),
            }
            match r.solution {
                Some(s) => s,
                None => return Err(Failure::Io(anyhow!("no solution found within the budget"))),
            }
        }
    };
    ensure_valid(&inst, &sol)?;
    emit(g.out.as_deref(), &serialize_solution(&sol))
}

fn threads() -> usize {
    let cap = std::env::var("DDP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok());
    let hw = std::thread::available_parallelism().map_or(1, |n| n.get());
    cap.unwrap_or(hw).max(1)
}

fn cmd_bench(g: &Global, a: &BenchArgs) -> Res<()> {
    let listing = io(fs::read_dir(&a.dir), || {
        format!("reading {}", a.dir.display())
    })?;
    let mut paths = Vec::new();
    for entry in listing {
        let path = io(entry, || format!("reading {}", a.dir.display()))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(EXT) {
            paths.push(path);
        }
    }
    paths.sort();
    let instances: Vec<(String, Result<Instance, String>)> = paths
        .iter()
        .map(|p| {
            let name = p
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("")
                .to_string();
            let inst = fs::read_to_string(p)
                .map_err(|e| e.to_string())
                .and_then(|t| parse_instance(&t).map_err(|e| e.to_string()))
                .map(|i| attach_meta(i, p));
            (name, inst)
        })
        .collect();
    let cfg = BenchConfig {
        methods: a.methods.clone(),
        profile: g.profile.into(),
        seed: g.seed,
        pack_nodes: g.node_budget_pack,
        assign_nodes: g.node_budget_assign,
        bound_nodes: a.bound_nodes,
        exact_max_n: a.exact_max_n,
        timings: a.timings,
    };
    let rows = run_bench(&instances, &cfg, threads().min(instances.len().max(1)));
    let csv = rows_to_csv(&rows);
    emit(g.out.as_deref(), &csv)?;
    if let Some(out) = &g.out {
        let path = out.with_extension("aggregates.csv");
        io(
            fs::write(&path, aggregates_to_csv(&aggregate(&rows))),
            || format!("writing {}", path.display()),
        )?;
    }
    if rows.iter().any(|r| r.status.contains("invalid solution")) {
        return Err(Failure::Internal(anyhow!(
            "a method produced an invalid solution; see the status column"
        )));
    }
    Ok(())
}

fn cmd_report(g: &Global, file: &Path, json: bool) -> Res<()> {
    let text = io(fs::read_to_string(file), || {
        format!("reading {}", file.display())
    })?;
    let rows = rows_from_csv(&text).map_err(|e| Failure::Io(anyhow!("{}: {e}", file.display())))?;
    let aggs = aggregate(&rows);
    let out = if json {
        serde_json::to_string_pretty(&aggs).expect("plain json") + "\n"
    } else {
        render_report(&aggs)
    };
    emit(g.out.as_deref(), &out)
}

fn cmd_opp_check(g: &Global, count: u64, max_items: usize, max_side: i64) -> Res<()> {
    if max_items == 0 || max_side < 1 {
        return Err(Failure::Usage(anyhow!(
            "--max-items and --max-side must be positive"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let (mut feasible, mut unknown) = (0u64, 0u64);
    for case in 0..count {
        let (w, h) = (
            rng.random_range(1..=max_side),
            rng.random_range(1..=max_side),
        );
        let n = rng.random_range(1..=max_items);
        let dims: Vec<(i64, i64, i64)> = (0..n)
            .map(|_| (rng.random_range(1..=w), rng.random_range(1..=h), 1))
            .collect();
        let inst = Instance::new(w, h, 1, dims.iter().copied()).expect("items fit the bin");
        let rects: Vec<Rect> = (1..=n)
            .map(|id| ddp_core::opp::item_rect(&inst, id))
            .collect();
        let matrix = build_matrix(&inst, &DffParams::default());
        let full = pack(&rects, w, h, &matrix, &SearchBudget::UNLIMITED)
            .map_err(|e| Failure::Internal(e.into()))?;
        let breach =
            |msg: String| Failure::Internal(anyhow!("case {case} ({w}x{h}, {dims:?}): {msg}"));
        match &full.decision {
            Decision::Unknown => return Err(breach("unknown without a node limit".into())),
            Decision::Feasible(spots) => {
                feasible += 1;
                let placements = spots
                    .iter()
                    .enumerate()
                    .map(|(i, s)| ddp_core::Placement {
                        item: i + 1,
                        bin: 1,
                        x: s.x,
                        y: s.y,
                        rotated: s.rotated,
                    })
                    .collect();
                let sol = Solution::from_placements(&inst, placements);
                if let Some(v) = validate_solution(&inst, &sol).violations.first() {
                    return Err(breach(format!("witness is not a packing: {v}")));
                }
            }
            Decision::Infeasible => {}
        }
        for limit in [10, 100] {
            let part = pack(&rects, w, h, &matrix, &SearchBudget::nodes(limit))
                .map_err(|e| Failure::Internal(e.into()))?;
            match part.decision {
                Decision::Unknown => unknown += 1,
                d if d.is_feasible() != full.decision.is_feasible() => {
                    return Err(breach(format!(
                        "node limit {limit} disagrees with the full search"
                    )))
                }
                _ => {}
            }
        }
    }
    let line = format!("{count} sets, {feasible} feasible, {unknown} unknown under node limits, no disagreements\n");
    emit(g.out.as_deref(), &line)
}

fn run(cli: Cli) -> Res<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(a) => cmd_gen(g, a),
        Command::Bounds { file, bound_nodes } => cmd_bounds(g, file, *bound_nodes),
        Command::Solve(a) => cmd_solve(g, a),
        Command::Bench(a) => cmd_bench(g, a),
        Command::Report { file, json } => cmd_report(g, file, *json),
        Command::OppCheck {
            count,
            max_items,
            max_side,
        } => cmd_opp_check(g, *count, *max_items, *max_side),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, err) = match f {
                Failure::Usage(e) => (1, e),
                Failure::Io(e) => (2, e),
                Failure::Internal(e) => (3, e),
            };
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
