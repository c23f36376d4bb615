//! Plain-text instance and solution files.
//!
//! Instance: `W H P`, then `n`, then `n` lines of `w h d`.
//! Solution: one `item bin x y rotated` line per item, then `LMAX <value>`.

use super::{Instance, ModelError, Placement, Solution};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

fn numbers(line_no: usize, line: &str, expected: usize) -> Result<Vec<i64>, ParseError> {
    let vals = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<i64>()
                .map_err(|_| ParseError::new(line_no, format!("not an integer: {tok:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if vals.len() != expected {
        return Err(ParseError::new(
            line_no,
            format!("expected {expected} fields, found {}", vals.len()),
        ));
    }
    Ok(vals)
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hl, header) = lines
        .next()
        .ok_or_else(|| ParseError::new(1, "missing header `W H P`"))?;
    let hv = numbers(hl, header, 3)?;
    let (width, height, proc_time) = (hv[0], hv[1], hv[2]);
    if width <= 0 || height <= 0 || proc_time <= 0 {
        return Err(ParseError::new(
            hl,
            "bin dimensions and processing time must be positive",
        ));
    }

    let (nl, count) = lines
        .next()
        .ok_or_else(|| ParseError::new(hl + 1, "missing item count"))?;
    let n = numbers(nl, count, 1)?[0];
    if n < 1 {
        return Err(ParseError::new(nl, "item count must be at least 1"));
    }

    let mut dims = Vec::with_capacity(n as usize);
    let mut last = nl;
    for _ in 0..n {
        let (ln, line) = lines.next().ok_or_else(|| {
            ParseError::new(last + 1, format!("expected {n} items, file ended early"))
        })?;
        let v = numbers(ln, line, 3)?;
        let (w, h, d) = (v[0], v[1], v[2]);
        if w <= 0 || h <= 0 {
            return Err(ParseError::new(ln, "non-positive item dimension"));
        }
        if w > width {
            return Err(ParseError::new(ln, "width exceeds bin"));
        }
        if h > height {
            return Err(ParseError::new(ln, "height exceeds bin"));
        }
        if d < 1 {
            return Err(ParseError::new(ln, "due date must be at least 1"));
        }
        dims.push((w, h, d));
        last = ln;
    }
    if let Some((ln, _)) = lines.next() {
        return Err(ParseError::new(ln, "trailing content after the last item"));
    }
    Instance::new(width, height, proc_time, dims)
        .map_err(|e: ModelError| ParseError::new(hl, e.to_string()))
}

pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = format!(
        "{} {} {}\n{}\n",
        inst.width,
        inst.height,
        inst.proc_time,
        inst.n()
    );
    for it in &inst.items {
        out.push_str(&format!("{} {} {}\n", it.width, it.height, it.due));
    }
    out
}

pub fn serialize_solution(sol: &Solution) -> String {
    let mut out = String::new();
    for p in &sol.placements {
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            p.item,
            p.bin,
            p.x,
            p.y,
            u8::from(p.rotated)
        ));
    }
    out.push_str(&format!("LMAX {}\n", sol.l_max));
    out
}

/// Parses a solution file. `bins_used` is derived from the placements; the
/// stored `LMAX` is kept verbatim so that validation can flag a mismatch.
pub fn parse_solution(text: &str) -> Result<Solution, ParseError> {
    let mut placements = Vec::new();
    let mut l_max = None;
    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if l_max.is_some() {
            return Err(ParseError::new(ln, "content after LMAX line"));
        }
        if let Some(rest) = line.strip_prefix("LMAX") {
            let v = rest
                .trim()
                .parse::<i64>()
                .map_err(|_| ParseError::new(ln, "bad LMAX value"))?;
            l_max = Some(v);
            continue;
        }
        let v = numbers(ln, line, 5)?;
        if v[0] < 1 || v[1] < 1 {
            return Err(ParseError::new(ln, "item id and bin must be at least 1"));
        }
        if v[2] < 0 || v[3] < 0 {
            return Err(ParseError::new(ln, "negative coordinate"));
        }
        let rotated = match v[4] {
            0 => false,
            1 => true,
            _ => return Err(ParseError::new(ln, "rotated flag must be 0 or 1")),
        };
        placements.push(Placement {
            item: v[0] as usize,
            bin: v[1] as usize,
            x: v[2],
            y: v[3],
            rotated,
        });
    }
    let l_max =
        l_max.ok_or_else(|| ParseError::new(text.lines().count() + 1, "missing LMAX line"))?;
    placements.sort_by_key(|p| p.item);
    let bins_used = placements.iter().map(|p| p.bin).max().unwrap_or(0);
    Ok(Solution {
        placements,
        bins_used,
        l_max,
    })
}
