use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use verikit::cce::{
    babichenko_upper_bound, brute_min_k, build_game, correlation_report, max_regret, ActionProfile, GameSpec,
    UniformDistribution,
};
use verikit::generate::{random_colored_sequence, random_distribution, random_forest, random_kkos};
use verikit::graph::Graph;
use verikit::heap::{
    analyze_trace, explicit_inequality_check, level_area_check, packing_check, random_trace, HeapOp, HeapTrace,
    TracePolicy,
};
use verikit::kkos::{
    dominated_edge, forest_optimize, is_feasible, reduction_decision, support_feasibility_lp, KkosError, KkosInstance,
    SupportCertificate,
};
use verikit::oracle::max_clique;
use verikit::partition::{
    build_conflict_graph, chromatic_number, color_system, cyclic_construction, find_coloring, is_proper,
    random_distinct_system, shift_counterexample, validate_system, BoundMode, FiberWitness, FunctionSystem,
    PartitionError,
};
use verikit::scalar::{Rational, Surd};
use verikit::tiling::{
    build_alpha_construction, column_tile_necessary_check, splitting_criterion, CircleIntervalSet, CircleWitness,
    ColumnTile, TilingSpec,
};
use verikit::wilber::{decompose, interleave, merge_report, wilber_bound, Color, ColoredSequence};

use crate::report::{Report, Verdict};
use crate::wire::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    KkosSolve,
    KkosReduce,
    KkosCertify,
    WilberBound,
    WilberMergeCheck,
    WilberDecompose,
    HeapAnalyze,
    HeapCheck,
    PartitionColor,
    PartitionCounterexample,
    PartitionChi,
    TilingVerify,
    TilingConstruct,
    CceBuild,
    CceCheck,
    CceSearch,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::KkosSolve => "kkos solve",
            Command::KkosReduce => "kkos reduce",
            Command::KkosCertify => "kkos certify",
            Command::WilberBound => "wilber bound",
            Command::WilberMergeCheck => "wilber merge-check",
            Command::WilberDecompose => "wilber decompose",
            Command::HeapAnalyze => "heap analyze",
            Command::HeapCheck => "heap check",
            Command::PartitionColor => "partition color",
            Command::PartitionCounterexample => "partition counterexample",
            Command::PartitionChi => "partition chi",
            Command::TilingVerify => "tiling verify",
            Command::TilingConstruct => "tiling construct",
            Command::CceBuild => "cce build",
            Command::CceCheck => "cce check",
            Command::CceSearch => "cce search",
        }
    }

    pub fn kind(self) -> Kind {
        use Command::*;
        match self {
            KkosSolve | KkosReduce | KkosCertify => Kind::Kkos,
            WilberBound | WilberMergeCheck | WilberDecompose => Kind::Wilber,
            HeapAnalyze | HeapCheck => Kind::Heap,
            PartitionColor | PartitionCounterexample | PartitionChi => Kind::Partition,
            TilingVerify | TilingConstruct => Kind::Tiling,
            CceBuild | CceCheck | CceSearch => Kind::Cce,
        }
    }
}

/// Command-line overrides; each takes precedence over the matching payload field.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub epsilon: Option<Rational>,
    pub kmax: Option<usize>,
    pub assert_greater: Option<usize>,
}

type Outcome = Result<Report, InputError>;

pub fn execute(cmd: Command, file: &InstanceFile, flags: &Flags) -> Report {
    let name = cmd.name();
    if file.kind() != cmd.kind() {
        return Report::input_error(
            name,
            &InputError::at("$.kind", format!("expected kind {:?}, got {:?}", cmd.kind().name(), file.kind().name())),
        );
    }
    let out = match (&file.payload, cmd) {
        (Payload::Kkos(p), Command::KkosSolve) => kkos_solve(name, p),
        (Payload::Kkos(p), Command::KkosReduce) => kkos_reduce(name, p),
        (Payload::Kkos(p), Command::KkosCertify) => kkos_certify(name, p),
        (Payload::Wilber(p), Command::WilberBound) => wilber_cmd(name, p, 0),
        (Payload::Wilber(p), Command::WilberMergeCheck) => wilber_cmd(name, p, 1),
        (Payload::Wilber(p), Command::WilberDecompose) => wilber_cmd(name, p, 2),
        (Payload::Heap(p), Command::HeapAnalyze) => heap_analyze(name, p),
        (Payload::Heap(p), Command::HeapCheck) => heap_check(name, p, flags),
        (Payload::Partition(p), Command::PartitionColor) => partition_color(name, p),
        (Payload::Partition(p), Command::PartitionCounterexample) => partition_counterexample(name, p),
        (Payload::Partition(p), Command::PartitionChi) => partition_chi(name, p, flags),
        (Payload::Tiling(p), Command::TilingVerify) => tiling_verify(name, p),
        (Payload::Tiling(p), Command::TilingConstruct) => tiling_construct(name, p),
        (Payload::Cce(p), Command::CceBuild) => cce_build(name, p),
        (Payload::Cce(p), Command::CceCheck) => cce_check(name, p, flags),
        (Payload::Cce(p), Command::CceSearch) => cce_search(name, p, flags),
        _ => unreachable!("kind checked above"),
    };
    out.unwrap_or_else(|e| Report::input_error(name, &e))
}

fn rats(v: &[Rational]) -> Value {
    Value::Array(v.iter().map(rat_json).collect())
}

// ---------------------------------------------------------------- kkos

fn graph_of(g: &GraphWire) -> Result<Graph, InputError> {
    Graph::from_edges(g.n, g.edges.iter().copied()).map_err(|e| InputError::at("$.payload.graph", e.to_string()))
}

fn kkos_instance(p: &KkosPayload) -> Result<KkosInstance, InputError> {
    let graph = graph_of(&p.graph)?;
    let n = graph.n();
    if n == 0 {
        return Err(InputError::at("$.payload.graph.n", "graph has no vertices"));
    }
    let y = match &p.y {
        Some(y) => y.iter().map(|r| r.0.clone()).collect(),
        None => vec![Rational::new(1.into(), (n as i64).into()); n],
    };
    let c = match &p.c {
        Some(c) => c.iter().map(|r| r.0.clone()).collect(),
        None => vec![Rational::one(); n],
    };
    KkosInstance::new(graph, y, c, p.threshold.as_ref().map(|t| t.0.clone()))
        .map_err(|e| InputError::at("$.payload", e.to_string()))
}

fn kkos_solve(name: &str, p: &KkosPayload) -> Outcome {
    let instance = kkos_instance(p)?;
    let sol = match forest_optimize(&instance) {
        Ok(sol) => sol,
        Err(KkosError::NotAForest(cycle)) => {
            return Err(InputError::at("$.payload.graph", format!("graph is not a forest: cycle {cycle:?}")))
        }
        Err(e) => return Err(InputError::at("$.payload", e.to_string())),
    };
    let feasible = is_feasible(&instance, &sol.x).map(|f| f.feasible).unwrap_or(false);
    let data = json!({
        "x": rats(&sol.x),
        "support": sol.support,
        "cost": rat_json(&sol.cost),
        "anchor": sol.anchor,
        "dissociation_set": sol.dissociation_set,
        "feasible": feasible,
        "threshold": instance.threshold.as_ref().map(rat_json),
    });
    match &instance.threshold {
        Some(t) if &sol.cost > t => Ok(Report::failed(
            name,
            Verdict::Infeasible,
            data,
            json!({ "optimum": rat_json(&sol.cost), "threshold": rat_json(t) }),
        )),
        _ => Ok(Report::holds(name, data)),
    }
}

fn certificate_json(cert: &SupportCertificate) -> Value {
    match cert {
        SupportCertificate::Certified { x, delta, cost } => {
            json!({ "status": "certified", "x": rats(x), "delta": rat_json(delta), "cost": rat_json(cost) })
        }
        SupportCertificate::Infeasible => json!({ "status": "infeasible" }),
        SupportCertificate::ZeroMargin => json!({ "status": "zero_margin" }),
    }
}

fn kkos_reduce(name: &str, p: &KkosPayload) -> Outcome {
    let h = graph_of(&p.graph)?;
    let k = p.k.ok_or_else(|| InputError::at("$.payload.k", "kkos reduce needs a clique size k"))?;
    let decision = reduction_decision(&h, k).map_err(|e| InputError::at("$.payload", e.to_string()))?;
    let data = json!({
        "m": h.n(),
        "k": k,
        "threshold": rat_json(&decision.threshold),
        "support": decision.support,
        "certificate": decision.certificate.as_ref().map(certificate_json),
    });
    if decision.holds() {
        Ok(Report::holds(name, data))
    } else {
        Ok(Report::failed(
            name,
            Verdict::Infeasible,
            data,
            json!({ "supports_checked": 1u64 << h.n(), "max_clique": max_clique(&h) }),
        ))
    }
}

fn kkos_certify(name: &str, p: &KkosPayload) -> Outcome {
    let instance = kkos_instance(p)?;
    let support = p
        .support
        .as_ref()
        .ok_or_else(|| InputError::at("$.payload.support", "kkos certify needs a support set"))?;
    let cert = support_feasibility_lp(&instance, support).map_err(|e| InputError::at("$.payload.support", e.to_string()))?;
    let data = json!({ "support": support, "certificate": certificate_json(&cert) });
    if cert.is_certified() {
        Ok(Report::holds(name, data))
    } else {
        let induced = instance.graph.induced(support);
        Ok(Report::failed(
            name,
            Verdict::Infeasible,
            data,
            json!({
                "reason": certificate_json(&cert)["status"],
                "dominated_edge": dominated_edge(&induced),
            }),
        ))
    }
}

// ---------------------------------------------------------------- wilber

fn colored_sequence(p: &WilberPayload) -> Result<ColoredSequence, InputError> {
    let z = match (&p.sequence, &p.interleave) {
        (Some(seq), _) => {
            let pairs: Vec<(u32, Color)> = seq
                .iter()
                .map(|&(k, c)| (k, if c == ColorWire::Red { Color::Red } else { Color::Blue }))
                .collect();
            ColoredSequence::from_pairs(p.n, &pairs)
        }
        (_, Some(il)) => interleave(&il.x, &il.y, p.n),
        _ => unreachable!("validated"),
    };
    z.map_err(|e| InputError::at("$.payload", e.to_string()))
}

fn wilber_cmd(name: &str, p: &WilberPayload, which: u8) -> Outcome {
    let z = colored_sequence(p)?;
    match which {
        0 => {
            let bound = wilber_bound(&z.keys(), z.n()).map_err(|e| InputError::at("$.payload", e.to_string()))?;
            Ok(Report::holds(name, json!({ "n": z.n(), "len": z.len(), "bound": bound })))
        }
        1 => {
            let r = merge_report(&z);
            let data = json!({
                "w_merged": r.w_merged, "w_red": r.w_red, "w_blue": r.w_blue, "len": r.len, "bound": r.bound,
            });
            let witness = json!({ "w_merged": r.w_merged, "bound": r.bound });
            Ok(Report::verdict(name, r.holds, data, || witness))
        }
        _ => {
            let d = decompose(&z);
            let intervals: Vec<Value> = d
                .intervals
                .iter()
                .map(|r| {
                    json!({
                        "lo": r.interval.lo, "hi": r.interval.hi,
                        "alternations": r.alternations,
                        "bichromatic": r.bichromatic,
                        "changes": r.changes,
                        "new_left": r.new_left.len(), "new_right": r.new_right.len(),
                        "alternations_red": r.alternations_red, "alternations_blue": r.alternations_blue,
                        "identity": r.identity_holds(), "charging": r.charging_holds(),
                    })
                })
                .collect();
            let holds = d.identities_hold && d.charging_holds && d.telescoping_holds;
            let data = json!({
                "sum_bichromatic": d.sum_bichromatic,
                "sum_new": d.sum_new,
                "telescoping": d.telescoping_holds,
                "intervals": intervals,
            });
            let witness = || {
                let bad = d.intervals.iter().position(|r| !r.identity_holds() || !r.charging_holds());
                json!({ "interval": bad.map(|i| intervals[i].clone()), "telescoping": d.telescoping_holds })
            };
            Ok(Report::verdict(name, holds, data.clone(), witness))
        }
    }
}

// ---------------------------------------------------------------- heap

fn trace_of(p: &HeapPayload) -> Result<HeapTrace, InputError> {
    let ops = p
        .ops
        .iter()
        .map(|op| match *op {
            OpWire::Insert(id) => HeapOp::Insert(id),
            OpWire::Extract(id) => HeapOp::Extract(id),
        })
        .collect();
    HeapTrace::new(ops).map_err(|e| InputError::at("$.payload.ops", e.to_string()))
}

fn heap_analyze(name: &str, p: &HeapPayload) -> Outcome {
    let trace = trace_of(p)?;
    let a = analyze_trace(&trace);
    let packing = packing_check(&trace);
    let stats: Vec<Value> = a
        .stats
        .iter()
        .map(|s| json!({ "id": s.id, "inserted": s.inserted, "extracted": s.extracted, "lifetime": s.lifetime, "strong": s.strong }))
        .collect();
    let dominated = a.stats.iter().find(|s| s.strong > s.lifetime);
    let holds = packing.holds && dominated.is_none();
    let data = json!({ "m": a.m, "stats": stats, "never_extracted": a.never_extracted, "packing": packing.holds });
    Ok(Report::verdict(name, holds, data, || match (&packing.witness, dominated) {
        (Some(w), _) => json!({ "packing": { "time": w.time, "k": w.k, "elements": w.elements } }),
        (None, Some(s)) => json!({ "element": s.id, "lifetime": s.lifetime, "strong": s.strong }),
        (None, None) => Value::Null,
    }))
}

fn heap_check(name: &str, p: &HeapPayload, flags: &Flags) -> Outcome {
    let trace = trace_of(p)?;
    let eps = flags
        .epsilon
        .clone()
        .or_else(|| p.epsilon.as_ref().map(|e| e.0.clone()))
        .unwrap_or_else(Rational::one);
    let levels = level_area_check(&trace, &eps).map_err(|e| InputError::at("epsilon", e.to_string()))?;
    let ineq = explicit_inequality_check(&trace, &eps).map_err(|e| InputError::at("epsilon", e.to_string()))?;
    let level_json: Vec<Value> = levels
        .iter()
        .map(|l| json!({ "level": l.level, "count": l.count, "total_lifetime": l.total_lifetime, "cap": l.cap.to_string(), "holds": l.holds }))
        .collect();
    let bad_level = levels.iter().position(|l| !l.holds);
    let data = json!({
        "epsilon": rat_json(&eps),
        "b": ineq.b,
        "m": ineq.m,
        "lhs": [rat_json(&ineq.lhs.0), rat_json(&ineq.lhs.1)],
        "rhs": [rat_json(&ineq.rhs.0), rat_json(&ineq.rhs.1)],
        "inequality": ineq.holds,
        "levels": level_json,
    });
    let holds = ineq.holds && bad_level.is_none();
    Ok(Report::verdict(name, holds, data, || match bad_level {
        Some(i) => json!({ "level": level_json[i] }),
        None => json!({ "lhs": [rat_json(&ineq.lhs.0), rat_json(&ineq.lhs.1)], "rhs": [rat_json(&ineq.rhs.0), rat_json(&ineq.rhs.1)] }),
    }))
}

// ---------------------------------------------------------------- partition

fn system_of(p: &PartitionPayload) -> Result<FunctionSystem, InputError> {
    let built = match (&p.system, &p.shift, &p.cyclic) {
        (Some(s), _, _) => FunctionSystem::new(s.size_e, s.size_f, s.functions.clone()),
        (_, Some(s), _) => shift_counterexample(s.m, s.k),
        (_, _, Some(c)) => cyclic_construction(c.k),
        _ => unreachable!("validated"),
    };
    built.map_err(|e| InputError::at("$.payload", e.to_string()))
}

fn mode_of(p: &PartitionPayload) -> BoundMode {
    match p.mode.unwrap_or(ModeWire::Pairwise) {
        ModeWire::Original => BoundMode::Original,
        ModeWire::Pairwise => BoundMode::Pairwise,
        ModeWire::Uniform => BoundMode::Uniform,
    }
}

fn fiber_json(w: &FiberWitness) -> Value {
    json!({ "value": w.value, "functions": w.functions, "sizes": w.sizes })
}

fn partition_color(name: &str, p: &PartitionPayload) -> Outcome {
    let sys = system_of(p)?;
    let n = p.n.unwrap_or(1);
    let mode = mode_of(p);
    match color_system(&sys, n, mode) {
        Ok(col) => {
            let graph = build_conflict_graph(&sys).map_err(|e| InputError::at("$.payload", e.to_string()))?;
            let proper = is_proper(&graph, &col.colors);
            let data = json!({
                "colors": col.colors,
                "palette": col.palette,
                "bound": col.bound,
                "max_indegree": col.max_indegree,
                "degeneracy": col.degeneracy,
                "proper": proper,
            });
            let holds = proper && col.palette <= col.bound;
            Ok(Report::verdict(name, holds, data, || {
                let bad = graph.edges().find(|&(u, v)| col.colors[u] == col.colors[v]);
                json!({ "palette": col.palette, "bound": col.bound, "monochromatic_edge": bad })
            }))
        }
        Err(PartitionError::NotBounded { witness, .. }) => Ok(Report::failed(
            name,
            Verdict::Infeasible,
            json!({ "n": n, "mode": format!("{mode:?}").to_lowercase() }),
            json!({ "fiber": fiber_json(&witness) }),
        )),
        Err(e) => Err(InputError::at("$.payload", e.to_string())),
    }
}

/// Holds when the system meets the original fibre hypothesis with `n` yet
/// admits no valid partition into `2n + 1` parts.
fn partition_counterexample(name: &str, p: &PartitionPayload) -> Outcome {
    let sys = system_of(p)?;
    let n = p.n.unwrap_or(1);
    let parts = 2 * n + 1;
    let validation = validate_system(&sys, n, BoundMode::Original);
    let graph = build_conflict_graph(&sys).map_err(|e| InputError::at("$.payload", e.to_string()))?;
    let mut data = json!({
        "n": n,
        "parts": parts,
        "vertices": graph.n(),
        "edges": graph.edge_count(),
        "hypothesis": validation.holds,
    });
    if let Some(w) = validation.witness {
        return Ok(Report::failed(name, Verdict::Violated, data, json!({ "fiber": fiber_json(&w) })));
    }
    match find_coloring(&graph, parts) {
        Some(colors) => Ok(Report::failed(name, Verdict::Violated, data, json!({ "colors": colors }))),
        None => {
            data["colorable"] = json!(false);
            Ok(Report::holds(name, data))
        }
    }
}

fn partition_chi(name: &str, p: &PartitionPayload, flags: &Flags) -> Outcome {
    let sys = system_of(p)?;
    let graph = build_conflict_graph(&sys).map_err(|e| InputError::at("$.payload", e.to_string()))?;
    let chi = chromatic_number(&graph).map_err(|e| InputError::at("$.payload", e.to_string()))?;
    let colors = find_coloring(&graph, chi).expect("χ colours suffice");
    let complete = graph.edge_count() == graph.n() * graph.n().saturating_sub(1) / 2;
    let data = json!({
        "chi": chi,
        "colors": colors,
        "vertices": graph.n(),
        "edges": graph.edge_count(),
        "complete": complete,
        "assert_greater": flags.assert_greater,
    });
    match flags.assert_greater {
        Some(bound) if chi <= bound => Ok(Report::failed(
            name,
            Verdict::Violated,
            data,
            json!({ "chi": chi, "colors": colors }),
        )),
        _ => Ok(Report::holds(name, data)),
    }
}

// ---------------------------------------------------------------- tiling

fn pair_surds(v: &[(SurdWire, SurdWire)]) -> Vec<(Surd, Surd)> {
    v.iter().map(|(a, b)| (a.0.clone(), b.0.clone())).collect()
}

pub fn tiling_from_payload(p: &TilingPayload) -> Result<(ColumnTile, TilingSpec), InputError> {
    if let Some(eps) = &p.epsilon {
        return build_alpha_construction(&eps.0).map_err(|e| InputError::at("$.payload.epsilon", e.to_string()));
    }
    let (tile, spec) = (p.tile.as_ref().expect("validated"), p.spec.as_ref().expect("validated"));
    let mut fibers = BTreeMap::new();
    for (i, f) in tile.iter().enumerate() {
        let loc = format!("$.payload.tile[{i}]");
        let set = CircleIntervalSet::normalize(&pair_surds(&f.intervals)).map_err(|e| InputError::at(&loc, e.to_string()))?;
        if fibers.insert(f.h, set).is_some() {
            return Err(InputError::at(loc, format!("fibre h = {} given twice", f.h)));
        }
    }
    let tile = ColumnTile::new(fibers).map_err(|e| InputError::at("$.payload.tile", e.to_string()))?;
    let unwrap = |v: &[SurdWire]| v.iter().map(|s| s.0.clone()).collect::<Vec<_>>();
    let spec = TilingSpec::new(spec.q, unwrap(&spec.beta), unwrap(&spec.alpha))
        .map_err(|e| InputError::at("$.payload.spec", e.to_string()))?;
    Ok((tile, spec))
}

pub fn tiling_to_payload(tile: &ColumnTile, spec: &TilingSpec) -> TilingPayload {
    let wrap = |v: &[Surd]| v.iter().cloned().map(SurdWire).collect::<Vec<_>>();
    TilingPayload {
        epsilon: None,
        tile: Some(
            tile.fibers()
                .iter()
                .map(|(&h, set)| FiberWire {
                    h,
                    intervals: set.pieces().iter().map(|(a, b)| (SurdWire(a.clone()), SurdWire(b.clone()))).collect(),
                })
                .collect(),
        ),
        spec: Some(SpecWire { q: spec.q(), beta: wrap(spec.beta()), alpha: wrap(spec.alpha()) }),
    }
}

fn circle_witness_json(w: &CircleWitness) -> Value {
    match w {
        CircleWitness::Overlap { first, second, start, end } => json!({
            "overlap": { "first": first, "second": second, "start": surd_json(start), "end": surd_json(end) }
        }),
        CircleWitness::Uncovered { start, end } => {
            json!({ "uncovered": { "start": surd_json(start), "end": surd_json(end) } })
        }
    }
}

fn tiling_check_data(tile: &ColumnTile, spec: &TilingSpec) -> Result<(bool, Value, Option<Value>), InputError> {
    let report = splitting_criterion(tile, spec).map_err(|e| InputError::at("$.payload", e.to_string()))?;
    let column = column_tile_necessary_check(tile);
    let residues: Vec<Value> = report
        .residues
        .iter()
        .map(|r| json!({ "residue": r.residue, "partition": r.partition.holds }))
        .collect();
    let data = json!({
        "splitting": report.holds,
        "residues": residues,
        "column_check": {
            "passes": column.passes,
            "measures": column.measures.iter().map(|(h, m)| json!([h, surd_json(m)])).collect::<Vec<_>>(),
            "k": column.k.map(|k| k.to_string()),
        },
    });
    let witness = report.residues.iter().find(|r| !r.partition.holds).map(|r| {
        json!({
            "residue": r.residue,
            "circle": r.partition.witness.as_ref().map(circle_witness_json),
        })
    });
    Ok((report.holds, data, witness))
}

fn tiling_verify(name: &str, p: &TilingPayload) -> Outcome {
    let (tile, spec) = tiling_from_payload(p)?;
    let (holds, data, witness) = tiling_check_data(&tile, &spec)?;
    Ok(Report::verdict(name, holds, data, || witness.unwrap_or(Value::Null)))
}

fn tiling_construct(name: &str, p: &TilingPayload) -> Outcome {
    let eps = p
        .epsilon
        .as_ref()
        .ok_or_else(|| InputError::at("$.payload.epsilon", "tiling construct needs epsilon"))?;
    let (tile, spec) = tiling_from_payload(p)?;
    let (holds, mut data, witness) = tiling_check_data(&tile, &spec)?;
    data["epsilon"] = surd_json(&eps.0);
    data["instance"] = InstanceFile { payload: Payload::Tiling(tiling_to_payload(&tile, &spec)) }.to_value();
    Ok(Report::verdict(name, holds, data, || witness.unwrap_or(Value::Null)))
}

// ---------------------------------------------------------------- cce

fn game_of(p: &CcePayload) -> Result<GameSpec, InputError> {
    build_game(p.s).map_err(|e| InputError::at("$.payload.s", e.to_string()))
}

fn distribution_of(p: &CcePayload) -> Result<UniformDistribution, InputError> {
    let profiles = p
        .profiles
        .as_ref()
        .ok_or_else(|| InputError::at("$.payload.profiles", "profiles are required"))?;
    let parsed = profiles
        .iter()
        .enumerate()
        .map(|(t, a)| ActionProfile::from_signs(a).map_err(|e| InputError::at(format!("$.payload.profiles[{t}]"), e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    UniformDistribution::new(parsed).map_err(|e| InputError::at("$.payload.profiles", e.to_string()))
}

fn epsilon_for(p: &CcePayload, flags: &Flags) -> Option<Rational> {
    flags.epsilon.clone().or_else(|| p.epsilon.as_ref().map(|e| e.0.clone()))
}

fn cce_build(name: &str, p: &CcePayload) -> Outcome {
    let game = game_of(p)?;
    let players: Vec<Value> = game.players().iter().map(|&(i, j)| json!([i, j])).collect();
    let cross: Vec<Value> = (0..game.n()).map(|q| json!(game.cross_set(q))).collect();
    let s_sets: Vec<Value> = (1..=game.s()).map(|i| json!(game.s_set(i))).collect();
    Ok(Report::holds(
        name,
        json!({ "s": game.s(), "n": game.n(), "players": players, "cross_sets": cross, "s_sets": s_sets }),
    ))
}

fn cce_check(name: &str, p: &CcePayload, flags: &Flags) -> Outcome {
    let game = game_of(p)?;
    let dist = distribution_of(p)?;
    for (t, a) in p.profiles.iter().flatten().enumerate() {
        if a.len() != game.n() {
            return Err(InputError::at(format!("$.payload.profiles[{t}]"), format!("expected {} actions", game.n())));
        }
    }
    let eps = epsilon_for(p, flags).unwrap_or_else(Rational::zero);
    let regret = max_regret(&game, &dist);
    let corr = correlation_report(&game, &dist);
    let two_eps = &eps + &eps;
    let data = json!({
        "epsilon": rat_json(&eps),
        "k": dist.k(),
        "max_regret": rat_json(&regret.max_regret),
        "correlation": {
            "per_player": rats(&corr.per_player),
            "per_pair": corr.per_pair.iter().map(|((a, b), v)| json!([a, b, rat_json(v)])).collect::<Vec<_>>(),
            "identity": corr.identity_holds,
            "max_abs": rat_json(&corr.max_abs()),
            "within_two_epsilon": corr.max_abs() <= two_eps,
        },
    });
    let holds = regret.is_epsilon_cce(&eps);
    Ok(Report::verdict(name, holds, data, || {
        json!({
            "player": game.players()[regret.player],
            "deviation": regret.deviation,
            "regret": rat_json(&regret.max_regret),
        })
    }))
}

fn cce_search(name: &str, p: &CcePayload, flags: &Flags) -> Outcome {
    let game = game_of(p)?;
    let eps = epsilon_for(p, flags).ok_or_else(|| InputError::at("epsilon", "cce search needs --epsilon or payload.epsilon"))?;
    let kmax = flags.kmax.or(p.kmax).unwrap_or(4);
    let found = brute_min_k(&game, &eps, kmax).map_err(|e| InputError::at("$.payload", e.to_string()))?;
    let upper = if eps.is_positive() {
        babichenko_upper_bound(2, game.n() as u64, &eps).ok().map(|b| rat_json(&b))
    } else {
        None
    };
    match found {
        Some(m) => {
            let n = game.n();
            let data = json!({
                "epsilon": rat_json(&eps),
                "kmax": kmax,
                "k": m.k,
                "profiles": m.witness.iter().map(|a| a.signs(n)).collect::<Vec<_>>(),
                "max_regret": rat_json(&m.max_regret),
                "sampling_upper_bound": upper,
            });
            Ok(Report::holds(name, data))
        }
        None => Ok(Report::failed(
            name,
            Verdict::Infeasible,
            json!({ "epsilon": rat_json(&eps), "kmax": kmax, "sampling_upper_bound": upper }),
            json!({ "searched_up_to": kmax }),
        )),
    }
}

// ---------------------------------------------------------------- generators

/// Reproducible sample instance of `kind`; `size` scales it.
pub fn generate(kind: Kind, seed: u64, size: usize) -> Result<InstanceFile, InputError> {
    let size = size.max(1);
    let payload = match kind {
        Kind::Kkos => {
            let inst = random_kkos(seed, random_forest(seed, size));
            Payload::Kkos(KkosPayload {
                graph: GraphWire { n: inst.n(), edges: inst.graph.edges().collect() },
                y: Some(inst.y.iter().cloned().map(Rat).collect()),
                c: Some(inst.c.iter().cloned().map(Rat).collect()),
                threshold: None,
                support: None,
                k: None,
            })
        }
        Kind::Wilber => {
            let n = size as u32;
            let z = random_colored_sequence(seed, n, 2 * size);
            Payload::Wilber(WilberPayload {
                n,
                sequence: Some(
                    z.items()
                        .iter()
                        .map(|a| (a.key, if a.color == Color::Red { ColorWire::Red } else { ColorWire::Blue }))
                        .collect(),
                ),
                interleave: None,
            })
        }
        Kind::Heap => {
            let trace = random_trace(seed, size, TracePolicy::RandomPresent);
            Payload::Heap(HeapPayload {
                ops: trace
                    .ops()
                    .iter()
                    .map(|op| match *op {
                        HeapOp::Insert(id) => OpWire::Insert(id),
                        HeapOp::Extract(id) => OpWire::Extract(id),
                    })
                    .collect(),
                epsilon: None,
            })
        }
        Kind::Partition => {
            let k = 3;
            let sys = random_distinct_system(seed, size, 3 * k + 2, k);
            let n = (1..=size).find(|&n| validate_system(&sys, n, BoundMode::Pairwise).holds).unwrap_or(size);
            Payload::Partition(PartitionPayload {
                system: Some(SystemWire { size_e: sys.size_e(), size_f: sys.size_f(), functions: sys.funcs().to_vec() }),
                shift: None,
                cyclic: None,
                n: Some(n),
                mode: Some(ModeWire::Pairwise),
            })
        }
        Kind::Tiling => {
            // ε = √d / r with d ∈ {2, 3, 5} and r large enough that ε < 1/3
            let d = [2u64, 3, 5][(seed % 3) as usize];
            let r = 7 + (seed / 3 % 5) as i64 + size as i64;
            let eps = Surd::new(0, 1, r, d).map_err(|e| InputError::new(e.to_string()))?;
            let (tile, spec) = build_alpha_construction(&eps).map_err(|e| InputError::new(e.to_string()))?;
            Payload::Tiling(tiling_to_payload(&tile, &spec))
        }
        Kind::Cce => {
            let s = size.clamp(2, 3);
            let n = s * (s - 1);
            let dist = random_distribution(seed, n, 4);
            Payload::Cce(CcePayload {
                s,
                profiles: Some(dist.profiles().iter().map(|a| a.signs(n)).collect()),
                epsilon: None,
                kmax: None,
            })
        }
    };
    Ok(InstanceFile { payload })
}
