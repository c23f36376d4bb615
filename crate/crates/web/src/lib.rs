//! Browser bindings: generate an instance, compute its bounds, and solve it.
//! Every binding is a thin wrapper over a plain function that returns JSON,
//! so the logic is testable natively.

use ddp_core::approx::{approx, ApproxOptions};
use ddp_core::bounds::compute_bounds;
use ddp_core::dff::{build_matrix, DffParams};
use ddp_core::exact::{solve_exact, ExactStatus};
use ddp_core::ffit::first_fit;
use ddp_core::{
    generate_instance, parse_instance, serialize_instance, validate_solution, DueClass,
    GeneratorSpec, Instance, SearchBudget, Solution,
};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Exact solving is offered up to this many items.
pub const EXACT_MAX_N: usize = 8;
const BOUND_NODES: u64 = 200_000;

pub fn generate(category: u8, class: &str, n: usize, seed: u64) -> Result<String, String> {
    let class: DueClass = class.parse()?;
    if !(1..=60).contains(&n) {
        return Err("n must be between 1 and 60 in the demo".into());
    }
    let inst = generate_instance(&GeneratorSpec {
        category,
        class,
        n,
        seed,
    })
    .map_err(|e| e.to_string())?;
    Ok(serialize_instance(&inst))
}

fn parse(text: &str) -> Result<Instance, String> {
    parse_instance(text).map_err(|e| e.to_string())
}

pub fn bounds(text: &str) -> Result<String, String> {
    let inst = parse(text)?;
    let m = build_matrix(&inst, &DffParams::default());
    let ff = first_fit(&inst, &m, &ApproxOptions::default().ff);
    let b = compute_bounds(
        &inst,
        &m,
        ff.solution.l_max,
        &SearchBudget::nodes(BOUND_NODES),
    );
    Ok(json!({
        "lb1": b.lb1,
        "lb3": b.lb3,
        "lb3_valid": b.lb3_valid,
        "upper": ff.solution.l_max,
        "rows": m.len(),
    })
    .to_string())
}

fn layout(inst: &Instance, sol: &Solution) -> Value {
    let placements: Vec<Value> = sol
        .placements
        .iter()
        .map(|p| {
            let (w, h) = inst.item(p.item).extents(p.rotated);
            json!({
                "item": p.item,
                "bin": p.bin,
                "x": p.x,
                "y": p.y,
                "w": w,
                "h": h,
                "rotated": p.rotated,
                "lateness": inst.lateness(p.item, p.bin),
            })
        })
        .collect();
    json!({
        "width": inst.width,
        "height": inst.height,
        "l_max": sol.l_max,
        "bins": sol.bins_used,
        "placements": placements,
    })
}

pub fn solve(text: &str, method: &str, seed: u64) -> Result<String, String> {
    let inst = parse(text)?;
    let m = build_matrix(&inst, &DffParams::default());
    let opts = ApproxOptions {
        seed,
        ..ApproxOptions::default()
    };
    let (sol, note) = match method {
        "ff" => (first_fit(&inst, &m, &opts.ff).solution, String::new()),
        "approx" => {
            let r = approx(&inst, &m, &opts);
            let note = format!("first fit reached {}", r.ff_solution.l_max);
            (r.solution, note)
        }
        "exact" => {
            if inst.n() > EXACT_MAX_N {
                return Err(format!("exact solving is limited to {EXACT_MAX_N} items"));
            }
            let r = solve_exact(&inst, &m, inst.n(), &SearchBudget::UNLIMITED);
            let note = match r.status {
                ExactStatus::Optimal => "proven optimal".to_string(),
                ExactStatus::Bound { lb, .. } => format!("optimum is at least {lb}"),
            };
            (r.solution.ok_or("no solution found")?, note)
        }
        other => return Err(format!("unknown method {other:?}")),
    };
    if let Some(v) = validate_solution(&inst, &sol).violations.first() {
        return Err(format!("internal error: invalid solution ({v})"));
    }
    let mut out = layout(&inst, &sol);
    out["note"] = note.into();
    Ok(out.to_string())
}

#[wasm_bindgen(js_name = generate)]
pub fn generate_js(category: u8, class: &str, n: usize, seed: u64) -> Result<String, JsError> {
    generate(category, class, n, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = bounds)]
pub fn bounds_js(text: &str) -> Result<String, JsError> {
    bounds(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = solve)]
pub fn solve_js(text: &str, method: &str, seed: u64) -> Result<String, JsError> {
    solve(text, method, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(json: &str, key: &str) -> Value {
        serde_json::from_str::<Value>(json).unwrap()[key].clone()
    }

    #[test]
    fn generate_then_solve() {
        let text = generate(1, "C", 6, 3).unwrap();
        assert_eq!(text, generate(1, "C", 6, 3).unwrap());
        let mut values = Vec::new();
        for method in ["ff", "approx", "exact"] {
            let out = solve(&text, method, 0).unwrap();
            assert_eq!(field(&out, "placements").as_array().unwrap().len(), 6);
            values.push(field(&out, "l_max").as_i64().unwrap());
        }
        assert!(values[2] <= values[1] && values[1] <= values[0]);
        let b = bounds(&text).unwrap();
        assert!(field(&b, "lb1").as_i64().unwrap() <= values[2]);
    }

    #[test]
    fn errors_are_messages() {
        assert!(generate(11, "A", 5, 0).is_err());
        assert!(generate(1, "D", 5, 0).is_err());
        assert!(solve("1 1", "ff", 0).unwrap_err().contains("line"));
        let big = generate(1, "A", 12, 0).unwrap();
        assert!(solve(&big, "exact", 0).is_err());
        assert!(solve(&big, "magic", 0).is_err());
    }
}
