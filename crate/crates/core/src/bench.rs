//! Batch runs over instance files and the summary statistics of a run.
//!
//! A run yields one [`BenchRow`] per instance and method. Bounds are computed
//! once per instance and repeated on each of its rows. Rows are sorted by
//! instance and method, so the CSV does not depend on the number of workers.
//! Wall-clock columns stay empty unless timings are requested.

use crate::approx::{approx, ApproxOptions, Profile};
use crate::bounds::compute_bounds;
use crate::budget::SearchBudget;
use crate::dff::{build_matrix, DffParams};
use crate::exact::{solve_exact, ExactStatus};
use crate::ffit::first_fit;
use crate::model::{validate_solution, DueClass, Instance, Provenance, Solution};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;
use thiserror::Error;

pub const SCHEMA: &str = "v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ff,
    Approx,
    Exact,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Ff => "ff",
            Method::Approx => "approx",
            Method::Exact => "exact",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ff" => Ok(Method::Ff),
            "approx" => Ok(Method::Approx),
            "exact" => Ok(Method::Exact),
            other => Err(format!(
                "unknown method {other:?} (expected ff, approx or exact)"
            )),
        }
    }
}

/// Parses `cat<C>_cls<A|B|C>_n<N>_s<seed>` (the generator's file naming).
pub fn provenance_from_name(stem: &str) -> Option<(Provenance, usize)> {
    let mut parts = stem.split('_');
    let category = parts.next()?.strip_prefix("cat")?.parse().ok()?;
    let class = parts.next()?.strip_prefix("cls")?.parse().ok()?;
    let n = parts.next()?.strip_prefix('n')?.parse().ok()?;
    let seed = parts.next()?.strip_prefix('s')?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((
        Provenance {
            category,
            class,
            seed,
        },
        n,
    ))
}

/// The generator's file stem for an instance.
pub fn instance_name(p: &Provenance, n: usize) -> String {
    format!("cat{}_cls{}_n{}_s{}", p.category, p.class, n, p.seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub profile: Profile,
    pub seed: u64,
    pub pack_nodes: Option<u64>,
    pub assign_nodes: Option<u64>,
    /// Node budget of each lower-bound probe.
    pub bound_nodes: u64,
    /// Larger instances get a `skipped` exact row.
    pub exact_max_n: usize,
    pub timings: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            methods: vec![Method::Ff, Method::Approx],
            profile: Profile::Paper,
            seed: 0,
            pack_nodes: None,
            assign_nodes: None,
            bound_nodes: 5_000_000,
            exact_max_n: 8,
            timings: false,
        }
    }
}

impl BenchConfig {
    /// Heuristic settings for an instance of the given category.
    pub fn approx_options(&self, category: Option<u8>) -> ApproxOptions {
        let mut o = ApproxOptions::profile(self.profile, category);
        o.seed = self.seed;
        if let Some(n) = self.pack_nodes {
            o.ff.pack_budget = SearchBudget::nodes(n);
        }
        if let Some(n) = self.assign_nodes {
            o.assign_budget = SearchBudget::nodes(n);
        }
        o
    }
}

/// One instance and method of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    /// Schema tag; the column header is the tag itself.
    #[serde(rename = "v1")]
    pub schema: String,
    pub instance: String,
    pub category: Option<u8>,
    pub class: Option<DueClass>,
    pub n: usize,
    pub seed: Option<u64>,
    pub method: Method,
    /// `ok`, `skipped`, or `error: <reason>`.
    pub status: String,
    pub lb1: Option<i64>,
    pub lb3: Option<i64>,
    pub lb3_valid: Option<bool>,
    pub lmax: Option<i64>,
    pub bins: Option<usize>,
    /// Exact rows only: whether the optimum was proven.
    pub optimal: Option<bool>,
    pub pack_calls: Option<u64>,
    pub nodes: Option<u64>,
    pub bound_nodes: Option<u64>,
    pub millis: Option<u64>,
}

impl BenchRow {
    fn new(name: &str, inst: &Instance, method: Method) -> Self {
        BenchRow {
            schema: SCHEMA.to_string(),
            instance: name.to_string(),
            category: inst.meta.map(|m| m.category),
            class: inst.meta.map(|m| m.class),
            n: inst.n(),
            seed: inst.meta.map(|m| m.seed),
            method,
            status: "ok".to_string(),
            lb1: None,
            lb3: None,
            lb3_valid: None,
            lmax: None,
            bins: None,
            optimal: None,
            pack_calls: None,
            nodes: None,
            bound_nodes: None,
            millis: None,
        }
    }
}

fn elapsed(t: Instant, on: bool) -> Option<u64> {
    on.then(|| t.elapsed().as_millis() as u64)
}

/// All rows of one instance, in method order.
pub fn bench_instance(name: &str, inst: &Instance, cfg: &BenchConfig) -> Vec<BenchRow> {
    let matrix = build_matrix(inst, &DffParams::default());
    let opts = cfg.approx_options(inst.meta.map(|m| m.category));
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();

    let lb1 = crate::bounds::lb1(inst, &matrix);
    let check = |row: &mut BenchRow, sol: &Solution| {
        let report = validate_solution(inst, sol);
        if let Some(v) = report.violations.first() {
            row.status = format!("error: invalid solution ({v})");
        }
    };
    let fill = |row: &mut BenchRow, sol: &Solution| {
        row.lmax = Some(sol.l_max);
        row.bins = Some(sol.bins_used);
        check(row, sol);
    };

    let t = Instant::now();
    let ff = first_fit(inst, &matrix, &opts.ff);
    let ff_ms = elapsed(t, cfg.timings);
    let mut upper = ff.solution.l_max;
    let mut rows = Vec::new();
    for m in methods {
        let mut row = BenchRow::new(name, inst, m);
        match m {
            Method::Ff => {
                fill(&mut row, &ff.solution);
                row.pack_calls = Some(ff.stats.calls);
                row.nodes = Some(ff.stats.nodes);
                row.millis = ff_ms;
            }
            Method::Approx => {
                let t = Instant::now();
                let mut o = opts.clone();
                o.lower_bound = Some(lb1);
                let r = approx(inst, &matrix, &o);
                row.millis = elapsed(t, cfg.timings);
                fill(&mut row, &r.solution);
                row.pack_calls = Some(r.ff_stats.calls);
                row.nodes = Some(r.ff_stats.nodes + r.assign_nodes);
                upper = upper.min(r.solution.l_max);
            }
            Method::Exact if inst.n() > cfg.exact_max_n => row.status = "skipped".to_string(),
            Method::Exact => {
                let t = Instant::now();
                let r = solve_exact(inst, &matrix, inst.n(), &SearchBudget::UNLIMITED);
                row.millis = elapsed(t, cfg.timings);
                row.optimal = Some(r.status == ExactStatus::Optimal);
                row.pack_calls = Some(r.pack_calls);
                row.nodes = Some(r.nodes);
                if let Some(sol) = &r.solution {
                    fill(&mut row, sol);
                    upper = upper.min(sol.l_max);
                }
            }
        }
        rows.push(row);
    }

    // The relaxation gets as few bins as the best known schedule allows.
    let bounds = compute_bounds(inst, &matrix, upper, &SearchBudget::nodes(cfg.bound_nodes));
    for row in &mut rows {
        row.lb1 = Some(bounds.lb1);
        row.lb3 = bounds.lb3;
        row.lb3_valid = Some(bounds.lb3_valid);
        row.bound_nodes = Some(bounds.lb3_nodes);
    }
    rows
}

/// Runs every instance on up to `threads` workers and returns the rows in
/// (instance, method) order. Instances that failed to load are passed as
/// errors and get one error row per method.
pub fn run_bench(
    instances: &[(String, Result<Instance, String>)],
    cfg: &BenchConfig,
    threads: usize,
) -> Vec<BenchRow> {
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<BenchRow>> = Mutex::new(Vec::new());
    let work = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some((name, inst)) = instances.get(i) else {
            return;
        };
        let rows = match inst {
            Ok(inst) => bench_instance(name, inst, cfg),
            Err(e) => error_rows(name, cfg, e),
        };
        out.lock().expect("no worker panicked").extend(rows);
    };
    std::thread::scope(|s| {
        for _ in 0..threads.max(1) {
            s.spawn(work);
        }
    });
    let mut rows = out.into_inner().expect("no worker panicked");
    rows.sort_by(|a, b| (&a.instance, a.method).cmp(&(&b.instance, b.method)));
    rows
}

fn error_rows(name: &str, cfg: &BenchConfig, err: &str) -> Vec<BenchRow> {
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let (meta, n) = match provenance_from_name(name) {
        Some((p, n)) => (Some(p), n),
        None => (None, 0),
    };
    methods
        .into_iter()
        .map(|method| BenchRow {
            schema: SCHEMA.to_string(),
            instance: name.to_string(),
            category: meta.map(|m| m.category),
            class: meta.map(|m| m.class),
            n,
            seed: meta.map(|m| m.seed),
            method,
            status: format!("error: {}", err.replace(['\n', '\r'], " ")),
            lb1: None,
            lb3: None,
            lb3_valid: None,
            lmax: None,
            bins: None,
            optimal: None,
            pack_calls: None,
            nodes: None,
            bound_nodes: None,
            millis: None,
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("missing or unsupported header (expected first column {SCHEMA:?})")]
    Header,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn header() -> Vec<&'static str> {
    vec![
        SCHEMA,
        "instance",
        "category",
        "class",
        "n",
        "seed",
        "method",
        "status",
        "lb1",
        "lb3",
        "lb3_valid",
        "lmax",
        "bins",
        "optimal",
        "pack_calls",
        "nodes",
        "bound_nodes",
        "millis",
    ]
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header()).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn rows_from_csv(text: &str) -> Result<Vec<BenchRow>, CsvError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let head = rdr.headers().map_err(|_| CsvError::Header)?.clone();
    if head.iter().collect::<Vec<_>>() != header() {
        return Err(CsvError::Header);
    }
    let mut rows = Vec::new();
    for rec in rdr.deserialize::<BenchRow>() {
        let row = rec.map_err(|e| CsvError::Row {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if row.schema != SCHEMA {
            return Err(CsvError::Row {
                line: 0,
                message: format!("unsupported schema tag {:?}", row.schema),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Deviation of a lower bound from the best one, in percent; `None` ("NA")
/// when the best bound is not positive.
pub fn gap_percent(best: i64, value: i64) -> Option<f64> {
    (best > 0).then(|| 100.0 * (best - value) as f64 / best as f64)
}

/// Bound statistics of one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstanceBounds {
    pub lb1: i64,
    pub lb3: Option<i64>,
    pub lb3_valid: bool,
    pub exact: Option<i64>,
    /// Best available lower bound.
    pub best: i64,
    pub gamma1: Option<f64>,
    pub gamma3: Option<f64>,
}

impl InstanceBounds {
    pub fn new(lb1: i64, lb3: Option<i64>, lb3_valid: bool, exact: Option<i64>) -> Self {
        let valid3 = lb3.filter(|_| lb3_valid);
        let best = [Some(lb1), valid3, exact]
            .into_iter()
            .flatten()
            .max()
            .expect("lb1 is present");
        InstanceBounds {
            lb1,
            lb3,
            lb3_valid,
            exact,
            best,
            gamma1: gap_percent(best, lb1),
            gamma3: valid3.and_then(|v| gap_percent(best, v)),
        }
    }

    pub fn lb1_is_best(&self) -> bool {
        self.lb1 == self.best
    }

    pub fn lb3_is_best(&self) -> bool {
        self.lb3_valid && self.lb3 == Some(self.best)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MethodSummary {
    pub runs: usize,
    /// Mean and median of `100 · (L_max − LB*) / LB*` over runs with `LB* > 0`.
    pub mean_gap: Option<f64>,
    pub median_gap: Option<f64>,
    /// Runs whose `L_max` equals the best lower bound (proven optimal).
    pub at_bound: usize,
    pub errors: usize,
}

/// Summary of one (category, class, n) group.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub category: Option<u8>,
    pub class: Option<DueClass>,
    pub n: usize,
    pub instances: usize,
    pub mean_gamma1: Option<f64>,
    pub median_gamma1: Option<f64>,
    pub mean_gamma3: Option<f64>,
    pub median_gamma3: Option<f64>,
    pub eta1: usize,
    pub eta3: usize,
    pub lb3_invalid: usize,
    pub methods: BTreeMap<Method, MethodSummary>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() / 2;
    Some(if s.len() % 2 == 1 {
        s[k]
    } else {
        (s[k - 1] + s[k]) / 2.0
    })
}

type GroupKey = (Option<u8>, Option<DueClass>, usize);
type Group<'a> = Vec<(Option<InstanceBounds>, Vec<&'a BenchRow>)>;

/// Aggregates rows per (category, class, n), in key order.
pub fn aggregate(rows: &[BenchRow]) -> Vec<Aggregate> {
    // instance -> its rows
    let mut by_instance: BTreeMap<&str, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        by_instance.entry(&r.instance).or_default().push(r);
    }
    let mut groups: BTreeMap<GroupKey, Group> = BTreeMap::new();
    for (_, rs) in by_instance {
        let first = rs[0];
        let exact = rs
            .iter()
            .find(|r| r.method == Method::Exact && r.optimal == Some(true))
            .and_then(|r| r.lmax);
        let bounds = first.lb1.map(|lb1| {
            InstanceBounds::new(lb1, first.lb3, first.lb3_valid.unwrap_or(false), exact)
        });
        groups
            .entry((first.category, first.class, first.n))
            .or_default()
            .push((bounds, rs));
    }

    groups
        .into_iter()
        .map(|((category, class, n), insts)| {
            let bounded: Vec<InstanceBounds> = insts.iter().filter_map(|(b, _)| *b).collect();
            let g1: Vec<f64> = bounded.iter().filter_map(|b| b.gamma1).collect();
            let g3: Vec<f64> = bounded.iter().filter_map(|b| b.gamma3).collect();
            let mut methods: BTreeMap<Method, MethodSummary> = BTreeMap::new();
            let mut gaps: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
            for (b, rs) in &insts {
                for r in rs {
                    if r.status == "skipped" {
                        continue;
                    }
                    let s = methods.entry(r.method).or_default();
                    s.runs += 1;
                    if r.status != "ok" {
                        s.errors += 1;
                        continue;
                    }
                    if let (Some(b), Some(l)) = (b, r.lmax) {
                        if l == b.best {
                            s.at_bound += 1;
                        }
                        if b.best > 0 {
                            gaps.entry(r.method)
                                .or_default()
                                .push(100.0 * (l - b.best) as f64 / b.best as f64);
                        }
                    }
                }
            }
            for (m, v) in gaps {
                let s = methods.entry(m).or_default();
                s.mean_gap = mean(&v);
                s.median_gap = median(&v);
            }
            Aggregate {
                category,
                class,
                n,
                instances: insts.len(),
                mean_gamma1: mean(&g1),
                median_gamma1: median(&g1),
                mean_gamma3: mean(&g3),
                median_gamma3: median(&g3),
                eta1: bounded.iter().filter(|b| b.lb1_is_best()).count(),
                eta3: bounded.iter().filter(|b| b.lb3_is_best()).count(),
                lb3_invalid: bounded.iter().filter(|b| !b.lb3_valid).count(),
                methods,
            }
        })
        .collect()
}

fn opt_num(v: Option<f64>) -> String {
    v.map_or("NA".to_string(), |x| format!("{x:.2}"))
}

fn opt_str<T: ToString>(v: Option<T>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

pub fn aggregates_to_csv(aggs: &[Aggregate]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        SCHEMA,
        "category",
        "class",
        "n",
        "instances",
        "mean_gamma1",
        "median_gamma1",
        "mean_gamma3",
        "median_gamma3",
        "eta1",
        "eta3",
        "lb3_invalid",
        "method",
        "runs",
        "mean_gap",
        "median_gap",
        "at_bound",
        "errors",
    ])
    .expect("in-memory write");
    for a in aggs {
        let base = [
            SCHEMA.to_string(),
            opt_str(a.category),
            opt_str(a.class),
            a.n.to_string(),
            a.instances.to_string(),
            opt_num(a.mean_gamma1),
            opt_num(a.median_gamma1),
            opt_num(a.mean_gamma3),
            opt_num(a.median_gamma3),
            a.eta1.to_string(),
            a.eta3.to_string(),
            a.lb3_invalid.to_string(),
        ];
        let methods: Vec<(String, Option<&MethodSummary>)> = if a.methods.is_empty() {
            vec![(String::new(), None)]
        } else {
            a.methods
                .iter()
                .map(|(m, s)| (m.to_string(), Some(s)))
                .collect()
        };
        for (m, s) in methods {
            let mut rec: Vec<String> = base.to_vec();
            rec.push(m);
            match s {
                Some(s) => rec.extend([
                    s.runs.to_string(),
                    opt_num(s.mean_gap),
                    opt_num(s.median_gap),
                    s.at_bound.to_string(),
                    s.errors.to_string(),
                ]),
                None => rec.extend(std::iter::repeat_n(String::new(), 5)),
            }
            w.write_record(&rec).expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Plain-text tables of the aggregates.
pub fn render_report(aggs: &[Aggregate]) -> String {
    let mut out = String::new();
    out.push_str(
        "group                 inst  g1_mean g1_med  g3_mean g3_med  eta1 eta3 lb3_invalid\n",
    );
    for a in aggs {
        let group = format!(
            "cat{} cls{} n{}",
            opt_str(a.category),
            opt_str(a.class),
            a.n
        );
        out.push_str(&format!(
            "{:<21} {:>5} {:>8} {:>7} {:>8} {:>7} {:>5} {:>4} {:>11}\n",
            group,
            a.instances,
            opt_num(a.mean_gamma1),
            opt_num(a.median_gamma1),
            opt_num(a.mean_gamma3),
            opt_num(a.median_gamma3),
            a.eta1,
            a.eta3,
            a.lb3_invalid
        ));
        for (m, s) in &a.methods {
            out.push_str(&format!(
                "  {:<8} runs {:>4}  gap_mean {:>7}  gap_med {:>7}  at_bound {:>4}  errors {}\n",
                m.to_string(),
                s.runs,
                opt_num(s.mean_gap),
                opt_num(s.median_gap),
                s.at_bound,
                s.errors
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(instance: &str, method: Method, lb1: i64, lb3: i64, valid: bool, lmax: i64) -> BenchRow {
        BenchRow {
            schema: SCHEMA.into(),
            instance: instance.into(),
            category: Some(1),
            class: Some(DueClass::A),
            n: 5,
            seed: Some(1),
            method,
            status: "ok".into(),
            lb1: Some(lb1),
            lb3: Some(lb3),
            lb3_valid: Some(valid),
            lmax: Some(lmax),
            bins: Some(2),
            optimal: (method == Method::Exact).then_some(true),
            pack_calls: None,
            nodes: None,
            bound_nodes: None,
            millis: None,
        }
    }

    #[test]
    fn equal_bounds_have_zero_gaps() {
        let a = aggregate(&[row("x", Method::Exact, 50, 50, true, 50)]);
        assert_eq!(a[0].mean_gamma1, Some(0.0));
        assert_eq!(a[0].mean_gamma3, Some(0.0));
        assert_eq!((a[0].eta1, a[0].eta3), (1, 1));
    }

    #[test]
    fn gap_formula() {
        let b = InstanceBounds::new(50, Some(100), true, Some(100));
        assert_eq!(b.gamma1, Some(50.0));
        assert_eq!(b.gamma3, Some(0.0));
    }

    #[test]
    fn non_positive_best_is_na() {
        let a = aggregate(&[row("x", Method::Exact, 0, -20, true, 0)]);
        assert_eq!(a[0].mean_gamma1, None);
        assert_eq!(a[0].eta1, 1);
        assert_eq!(a[0].eta3, 0);
        assert!(aggregates_to_csv(&a).contains("NA"));
    }

    #[test]
    fn csv_roundtrip() {
        let mut rows = vec![
            row("a", Method::Ff, 10, 12, true, 30),
            row("a", Method::Approx, 10, 12, true, 20),
        ];
        rows[1].class = None;
        rows[1].status = "error: bad, \"quoted\"".into();
        let text = rows_to_csv(&rows);
        assert!(text.starts_with("v1,instance,"));
        assert_eq!(rows_from_csv(&text).unwrap(), rows);
    }

    #[test]
    fn empty_run_is_a_header() {
        let text = rows_to_csv(&[]);
        assert_eq!(text.lines().count(), 1);
        assert!(rows_from_csv(&text).unwrap().is_empty());
    }

    #[test]
    fn malformed_row_names_its_line() {
        let mut text = rows_to_csv(&[row("a", Method::Ff, 1, 1, true, 1)]);
        text.push_str("v1,b,1,A,5,1,ff,ok,notanumber,,,,,,,,,\n");
        match rows_from_csv(&text) {
            Err(CsvError::Row { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn names_roundtrip() {
        let p = Provenance {
            category: 7,
            class: DueClass::B,
            seed: 42,
        };
        let name = instance_name(&p, 20);
        assert_eq!(name, "cat7_clsB_n20_s42");
        assert_eq!(provenance_from_name(&name), Some((p, 20)));
        assert_eq!(provenance_from_name("random"), None);
    }
}
