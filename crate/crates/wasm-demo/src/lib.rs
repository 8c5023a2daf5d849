//! Browser bindings for three `verikit` checks. Every export returns a JSON
//! string; failures come back as `{"error": "..."}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use verikit::generate::random_colored_sequence;
use verikit::partition::{build_conflict_graph, chromatic_number, find_coloring, shift_counterexample, shift_pairs};
use verikit::scalar::{rat, Surd};
use verikit::tiling::{build_alpha_construction, splitting_criterion, CircleIntervalSet, CircleWitness, TilingSpec};
use verikit::wilber::{decompose, merge_report, Color};

fn arcs(set: &CircleIntervalSet) -> Vec<[f64; 2]> {
    set.pieces().iter().map(|(a, b)| [a.to_f64(), b.to_f64()]).collect()
}

fn witness_json(w: &CircleWitness) -> Value {
    match w {
        CircleWitness::Overlap { start, end, .. } => {
            json!({ "kind": "overlap", "start": start.to_string(), "end": end.to_string(), "arc": [start.to_f64(), end.to_f64()] })
        }
        CircleWitness::Uncovered { start, end } => {
            json!({ "kind": "uncovered", "start": start.to_string(), "end": end.to_string(), "arc": [start.to_f64(), end.to_f64()] })
        }
    }
}

/// The three-fibre construction for `ε = (p + q√d)/r`, with `α₁` optionally
/// shifted by `shift_num/shift_den`, checked with the splitting criterion.
pub fn tiling_report(p: i64, q: i64, r: i64, d: u32, shift_num: i64, shift_den: i64) -> Result<Value, String> {
    let eps = Surd::new(p, q, r, d as u64).map_err(|e| e.to_string())?;
    let (tile, spec) = build_alpha_construction(&eps).map_err(|e| e.to_string())?;
    if shift_den == 0 {
        return Err("shift denominator is zero".into());
    }
    let mut alpha = spec.alpha().to_vec();
    alpha[1] = &alpha[1] + &Surd::from_rational(&rat(shift_num, shift_den));
    let spec = TilingSpec::new(spec.q(), spec.beta().to_vec(), alpha).map_err(|e| e.to_string())?;
    let report = splitting_criterion(&tile, &spec).map_err(|e| e.to_string())?;
    let fibers: Vec<Value> = tile
        .fibers()
        .iter()
        .map(|(h, set)| json!({ "h": h, "arcs": arcs(set), "measure": set.measure().to_string() }))
        .collect();
    let residues: Vec<Value> = report
        .residues
        .iter()
        .map(|res| {
            json!({
                "residue": res.residue,
                "alpha": spec.alpha()[res.residue].to_string(),
                "partition": res.partition.holds,
                "shifted": res.shifted.iter().map(|(h, set)| json!({ "h": h, "arcs": arcs(set) })).collect::<Vec<_>>(),
                "witness": res.partition.witness.as_ref().map(witness_json),
            })
        })
        .collect();
    Ok(json!({
        "epsilon": eps.to_string(),
        "holds": report.holds,
        "fibers": fibers,
        "residues": residues,
    }))
}

/// A seeded random coloured sequence with its merge report and per-interval sums.
pub fn wilber_report(seed: u64, n: u32, len: usize) -> Result<Value, String> {
    if n == 0 || n > 1024 || len > 4096 {
        return Err("need 1 ≤ n ≤ 1024 and length ≤ 4096".into());
    }
    let z = random_colored_sequence(seed, n, len);
    let m = merge_report(&z);
    let d = decompose(&z);
    let items: Vec<Value> = z
        .items()
        .iter()
        .map(|a| json!([a.key, if a.color == Color::Red { "red" } else { "blue" }]))
        .collect();
    let intervals: Vec<Value> = d
        .intervals
        .iter()
        .filter(|r| r.alternations > 0)
        .map(|r| {
            json!({
                "lo": r.interval.lo, "hi": r.interval.hi,
                "alternations": r.alternations, "bichromatic": r.bichromatic,
                "new": r.new_left.len() + r.new_right.len(),
                "budget": 2 * (r.alternations_red + r.alternations_blue),
                "identity": r.identity_holds(), "charging": r.charging_holds(),
            })
        })
        .collect();
    Ok(json!({
        "n": n,
        "items": items,
        "w_merged": m.w_merged,
        "w_red": m.w_red,
        "w_blue": m.w_blue,
        "bound": m.bound,
        "holds": m.holds,
        "decomposition_holds": d.identities_hold && d.charging_holds && d.telescoping_holds,
        "intervals": intervals,
    }))
}

/// Optimal colouring of the shift graph on pairs `i < j ≤ m`.
pub fn shift_report(m: usize) -> Result<Value, String> {
    if !(2..=8).contains(&m) {
        return Err("m must lie in 2..=8".into());
    }
    let sys = shift_counterexample(m, 3).map_err(|e| e.to_string())?;
    let graph = build_conflict_graph(&sys).map_err(|e| e.to_string())?;
    let chi = chromatic_number(&graph).map_err(|e| e.to_string())?;
    let colors = find_coloring(&graph, chi).ok_or("no colouring found")?;
    Ok(json!({
        "m": m,
        "chi": chi,
        "vertices": shift_pairs(m),
        "edges": graph.edges().collect::<Vec<_>>(),
        "colors": colors,
    }))
}

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

#[wasm_bindgen]
pub fn tiling(p: i32, q: i32, r: i32, d: u32, shift_num: i32, shift_den: i32) -> String {
    respond(tiling_report(p as i64, q as i64, r as i64, d, shift_num as i64, shift_den as i64))
}

#[wasm_bindgen]
pub fn wilber(seed: u32, n: u32, len: u32) -> String {
    respond(wilber_report(seed as u64, n, len as usize))
}

#[wasm_bindgen]
pub fn shift_graph(m: u32) -> String {
    respond(shift_report(m as usize))
}
