//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
//!
//! Runs without the libtest harness so the lines show up in plain `cargo test`
//! output.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use verikit::cce::{
    brute_min_k, build_game, correlation_report, max_regret, payoff, signature_vectors, ActionProfile,
    UniformDistribution,
};
use verikit::generate::{
    all_trees, random_colored_sequence, random_distribution, random_forest, random_graph, random_kkos, rng,
};
use verikit::graph::Graph;
use verikit::heap::{
    analyze_trace, explicit_inequality_check, level_area_check, packing_check, random_trace, HeapOp, HeapTrace,
    TracePolicy,
};
use verikit::kkos::{forest_optimize, is_feasible, reduction_decisions, KkosInstance};
use verikit::oracle;
use verikit::partition::{
    build_conflict_graph, chromatic_number, color_system, cyclic_construction, random_distinct_system,
    shift_counterexample, validate_system, BoundMode, FunctionSystem,
};
use verikit::scalar::{rat, Rational, Surd};
use verikit::tiling::{
    build_alpha_construction, column_tile_necessary_check, coverage_count, splitting_criterion, ColumnTile,
    TilingSpec,
};
use verikit::wilber::{decompose, merge_report, Access, Color, ColoredSequence};

use rand::Rng;

/// Outcome of one criterion: failures (empty on success) and a short summary.
struct Outcome {
    failures: Vec<String>,
    summary: String,
}

fn check(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok && failures.len() < 20 {
        failures.push(what());
    }
}

// ---------------------------------------------------------------- 1

fn kkos_equivalence() -> Outcome {
    let mut failures = Vec::new();
    let mut count = 0;
    let mut compare = |instance: &KkosInstance, label: &str, failures: &mut Vec<String>| {
        count += 1;
        let sol = match forest_optimize(instance) {
            Ok(s) => s,
            Err(e) => return failures.push(format!("{label}: {e}")),
        };
        let (best, _) = oracle::min_dissociation_cost(instance);
        check(failures, sol.cost == best, || format!("{label}: dp {} vs brute {best}", sol.cost));
        check(failures, instance.cost(&sol.x) == sol.cost, || format!("{label}: reported cost mismatch"));
        check(failures, is_feasible(instance, &sol.x).map(|f| f.feasible).unwrap_or(false), || {
            format!("{label}: solution infeasible")
        });
    };
    let mut seed = 0u64;
    compare(&random_kkos(seed, Graph::empty(1)), "n=1", &mut failures);
    for n in 2..=7 {
        for (t, tree) in all_trees(n).into_iter().enumerate() {
            seed += 1;
            compare(&random_kkos(seed, tree), &format!("tree n={n} #{t}"), &mut failures);
        }
    }
    for s in 0..200u64 {
        let n = 1 + (s as usize % 10);
        compare(&random_kkos(50_000 + s, random_forest(s, n)), &format!("forest seed {s}"), &mut failures);
    }
    Outcome { failures, summary: format!("{count} instances") }
}

// ---------------------------------------------------------------- 2

fn reduction_soundness() -> Outcome {
    let mut failures = Vec::new();
    let densities = [(1, 4), (1, 2), (3, 4), (9, 10)];
    for seed in 0..100u64 {
        let m = 1 + (seed as usize % 8);
        let (num, den) = densities[(seed / 8) as usize % densities.len()];
        let h = random_graph(seed, m, num, den);
        let omega = oracle::max_clique(&h);
        match reduction_decisions(&h, 8) {
            Ok(decided) => {
                for k in 1..=8 {
                    check(&mut failures, decided[k - 1] == (omega >= k), || {
                        format!("seed {seed} m={m} k={k}: lp {} vs ω={omega}", decided[k - 1])
                    });
                }
            }
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    Outcome { failures, summary: "100 graphs × k = 1..8".into() }
}

// ---------------------------------------------------------------- 3

/// Heap index of leaf `key` in the complete tree over `1..=8`.
fn leaf(key: u32) -> u32 {
    7 + key
}

/// Depth-first walk over canonical coloured sequences on `n = 8`.
///
/// Swapping the children of any internal node and swapping the colours leave
/// every Wilber count unchanged. Each orbit has exactly one member whose
/// first item is red and in which the first key to enter each node's subtree
/// enters its left child, so visiting those members covers every sequence.
fn canonical_sweep(items: &mut Vec<Access>, entered: u16, max_len: usize, visit: &mut impl FnMut(&[Access])) {
    visit(items);
    if items.len() == max_len {
        return;
    }
    for key in 1..=8 {
        let l = leaf(key);
        let mut e = entered;
        let mut canonical = true;
        for d in (1..=3).rev() {
            let node = l >> d;
            if e & (1 << node) == 0 {
                if (l >> (d - 1)) & 1 == 1 {
                    canonical = false;
                    break;
                }
                e |= 1 << node;
            }
        }
        if !canonical {
            continue;
        }
        for color in [Color::Red, Color::Blue] {
            if items.is_empty() && color == Color::Blue {
                continue;
            }
            items.push(Access { key, color });
            canonical_sweep(items, e, max_len, visit);
            items.pop();
        }
    }
}

fn intervals_ok(z: &ColoredSequence) -> Result<(), String> {
    let d = decompose(z);
    for r in &d.intervals {
        if !(r.identity_holds() && r.charging_holds() && r.split_holds() && r.targets_valid) {
            return Err(format!("interval [{}, {}] of {:?}", r.interval.lo, r.interval.hi, z.items()));
        }
    }
    if !d.telescoping_holds {
        return Err(format!("telescoping on {:?}", z.items()));
    }
    Ok(())
}

fn wilber_inequality() -> Outcome {
    let mut failures = Vec::new();

    // merge inequality: every sequence with |Z| ≤ 8 on n = 8, up to symmetry;
    // smaller n embed as the leftmost subtree of the same padded tree
    let mut merged = 0u64;
    canonical_sweep(&mut Vec::with_capacity(8), 0, 8, &mut |items| {
        merged += 1;
        let z = ColoredSequence::new(8, items.to_vec()).expect("keys in range");
        let r = merge_report(&z);
        check(&mut failures, r.holds, || format!("merge fails on {items:?}: {} > {}", r.w_merged, r.bound));
    });

    // the embedding claim, directly: n < 8 agrees with n = 8 on the same keys
    for seed in 0..300u64 {
        let n = 1 + (seed % 7) as u32;
        let z = random_colored_sequence(seed, n, (seed % 9) as usize);
        let big = ColoredSequence::new(8, z.items().to_vec()).unwrap();
        let (a, b) = (merge_report(&z), merge_report(&big));
        check(&mut failures, (a.w_merged, a.w_red, a.w_blue) == (b.w_merged, b.w_red, b.w_blue), || {
            format!("n={n} embedding differs on {:?}", z.items())
        });
    }

    // per-interval identity and charging depend only on the (side, colour)
    // word of Z restricted to the interval, so n = 2 with |Z| ≤ 8 covers every
    // interval of every sequence with |Z| ≤ 8
    let mut words = 0u64;
    for len in 0..=8u32 {
        for code in 0..4u32.pow(len) {
            let items: Vec<Access> = (0..len)
                .map(|i| {
                    let sym = code >> (2 * i) & 3;
                    Access { key: 1 + (sym & 1), color: if sym & 2 == 0 { Color::Red } else { Color::Blue } }
                })
                .collect();
            words += 1;
            let z = ColoredSequence::new(2, items).unwrap();
            if let Err(e) = intervals_ok(&z) {
                check(&mut failures, false, || e);
            }
        }
    }

    // and directly on the n = 8 canonical sequences up to length 6
    let mut direct = 0u64;
    canonical_sweep(&mut Vec::new(), 0, 6, &mut |items| {
        direct += 1;
        if let Err(e) = intervals_ok(&ColoredSequence::new(8, items.to_vec()).unwrap()) {
            check(&mut failures, false, || e);
        }
    });

    for seed in 0..1000u64 {
        let n = 1 + (seed % 64) as u32;
        let len = (seed as usize * 37) % 257;
        let z = random_colored_sequence(90_000 + seed, n, len);
        let r = merge_report(&z);
        check(&mut failures, r.holds, || format!("random seed {seed}: {} > {}", r.w_merged, r.bound));
        if let Err(e) = intervals_ok(&z) {
            check(&mut failures, false, || format!("random seed {seed}: {e}"));
        }
    }
    Outcome {
        failures,
        summary: format!(
            "{merged} canonical sequences, {words} interval words, {direct} direct decompositions, 1000 random"
        ),
    }
}

// ---------------------------------------------------------------- 4

fn epsilons() -> [Rational; 3] {
    [rat(1, 1), rat(1, 2), rat(1, 4)]
}

fn heap_checks(trace: &HeapTrace) -> Result<(), String> {
    let a = analyze_trace(trace);
    if let Some(s) = a.stats.iter().find(|s| s.strong > s.lifetime) {
        return Err(format!("K > L for element {}", s.id));
    }
    let p = packing_check(trace);
    if !p.holds {
        return Err(format!("packing: {:?}", p.witness));
    }
    for eps in epsilons() {
        let levels = level_area_check(trace, &eps).map_err(|e| e.to_string())?;
        if let Some(l) = levels.iter().find(|l| !l.holds) {
            return Err(format!("level area ε={eps}: level {} total {} cap {}", l.level, l.total_lifetime, l.cap));
        }
        let ineq = explicit_inequality_check(trace, &eps).map_err(|e| e.to_string())?;
        if !ineq.holds {
            return Err(format!("explicit inequality ε={eps}"));
        }
    }
    Ok(())
}

/// Every valid trace of length ≤ `max_len`; ids are assigned in insertion order.
fn all_traces(ops: &mut Vec<HeapOp>, present: &mut Vec<u32>, next: u32, max_len: usize, visit: &mut impl FnMut(&[HeapOp])) {
    visit(ops);
    if ops.len() == max_len {
        return;
    }
    ops.push(HeapOp::Insert(next));
    present.push(next);
    all_traces(ops, present, next + 1, max_len, visit);
    present.pop();
    ops.pop();
    for i in 0..present.len() {
        let id = present.remove(i);
        ops.push(HeapOp::Extract(id));
        all_traces(ops, present, next, max_len, visit);
        ops.pop();
        present.insert(i, id);
    }
}

fn heap_equivalence() -> Outcome {
    let mut failures = Vec::new();
    let mut exhaustive = 0u64;
    all_traces(&mut Vec::new(), &mut Vec::new(), 0, 8, &mut |ops| {
        exhaustive += 1;
        let trace = HeapTrace::new(ops.to_vec()).expect("valid by construction");
        if let Err(e) = heap_checks(&trace) {
            check(&mut failures, false, || format!("{ops:?}: {e}"));
        }
    });
    let policies = [TracePolicy::Fifo, TracePolicy::Stack, TracePolicy::RandomPresent];
    for seed in 0..1000u64 {
        let m = 1 + (seed as usize * 7) % 400;
        let trace = random_trace(seed, m, policies[seed as usize % 3]);
        if let Err(e) = heap_checks(&trace) {
            check(&mut failures, false, || format!("random seed {seed} m={m}: {e}"));
        }
    }
    Outcome { failures, summary: format!("{exhaustive} exhaustive traces, 1000 random, ε ∈ {{1, 1/2, 1/4}}") }
}

// ---------------------------------------------------------------- 5

/// Conflict edges straight from the definition.
fn conflicts_by_definition(sys: &FunctionSystem) -> Vec<(usize, usize)> {
    let f = sys.funcs();
    let mut edges = Vec::new();
    for x in 0..sys.size_e() {
        for y in x + 1..sys.size_e() {
            let clash = (0..f.len()).any(|p| (0..f.len()).any(|q| p != q && f[p][x] == f[q][y]));
            if clash {
                edges.push((x, y));
            }
        }
    }
    edges
}

fn partition_criterion() -> Outcome {
    let mut failures = Vec::new();
    let shift = shift_counterexample(5, 3).unwrap();
    let chi = chromatic_number(&build_conflict_graph(&shift).unwrap()).unwrap();
    check(&mut failures, chi == 3, || format!("χ(shift 5) = {chi}"));
    check(&mut failures, validate_system(&shift, 1, BoundMode::Original).holds, || {
        "shift system misses the original hypothesis".into()
    });
    for k in 2..=4 {
        let sys = cyclic_construction(k).unwrap();
        let g = build_conflict_graph(&sys).unwrap();
        let order = 2 * k - 1;
        check(&mut failures, g.n() == order && g.is_clique(&(0..order).collect::<Vec<_>>()), || {
            format!("cyclic k={k} is not K_{order}")
        });
        let chi = chromatic_number(&g).unwrap();
        check(&mut failures, chi == order, || format!("cyclic k={k}: χ = {chi}"));
    }

    let mut colored = 0;
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let k = r.gen_range(2..=4);
        let size_e = r.gen_range(1..=24);
        let size_f = k + r.gen_range(0..3 * k + 4);
        let sys = random_distinct_system(seed, size_e, size_f, k);
        let edges = conflicts_by_definition(&sys);
        let graph = build_conflict_graph(&sys).unwrap();
        check(&mut failures, graph.edges().collect::<Vec<_>>() == edges, || format!("seed {seed}: conflict graph"));
        for (mode, factor) in [(BoundMode::Pairwise, 2), (BoundMode::Uniform, 1)] {
            let n = (0..=size_e).find(|&n| validate_system(&sys, n, mode).holds).expect("n = |E| always holds");
            if n == 0 {
                continue;
            }
            let col = match color_system(&sys, n, mode) {
                Ok(c) => c,
                Err(e) => {
                    failures.push(format!("seed {seed} {mode:?}: {e}"));
                    continue;
                }
            };
            colored += 1;
            let bound = factor * n * k * (k - 1) + 1;
            check(&mut failures, col.bound == bound && col.palette <= bound, || {
                format!("seed {seed} {mode:?}: palette {} bound {} expected {bound}", col.palette, col.bound)
            });
            let proper = edges.iter().all(|&(x, y)| col.colors[x] != col.colors[y]);
            check(&mut failures, proper, || format!("seed {seed} {mode:?}: improper colouring"));
        }
    }
    Outcome { failures, summary: format!("χ(shift 5) = 3, cyclic k = 2..4, {colored} colourings") }
}

// ---------------------------------------------------------------- 6

fn sample_points(count: i64) -> impl Iterator<Item = (i64, Surd)> {
    (0..count).map(move |s| (s % 7 - 3, Surd::from_rational(&rat(s, count + 3))))
}

/// `Some(true)` when every sample point is covered once; `Some(false)` at the
/// first point that is not.
fn coverage_verdict(tile: &ColumnTile, spec: &TilingSpec, points: i64) -> Result<bool, String> {
    for (j, theta) in sample_points(points) {
        if coverage_count(tile, spec, j, &theta).map_err(|e| e.to_string())? != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

fn mutations(eps: &Surd, tile: &ColumnTile, spec: &TilingSpec) -> Vec<(String, ColumnTile, TilingSpec)> {
    let mut out = Vec::new();
    let r = |n, d| Surd::from_rational(&rat(n, d));
    let deltas = [
        r(1, 10),
        r(-1, 10),
        r(1, 7),
        r(1, 2),
        r(1, 3),
        r(-1, 3),
        r(1, 1000),
        r(-1, 997),
        r(3, 5),
        eps.scale(&rat(1, 2)),
        -eps.clone(),
        eps.scale(&rat(2, 1)),
        eps + &r(1, 5),
        eps.scale(&rat(-3, 2)),
        eps.scale(&rat(1, 10)),
    ];
    for d in deltas {
        let mut alpha = spec.alpha().to_vec();
        alpha[1] = &alpha[1] + &d;
        let mutated = TilingSpec::new(spec.q(), spec.beta().to_vec(), alpha).unwrap();
        out.push((format!("α₁ + {d}"), tile.clone(), mutated));
    }
    let hs = tile.support();
    let perms: [[usize; 3]; 5] = [[1, 0, 2], [2, 1, 0], [0, 2, 1], [1, 2, 0], [2, 0, 1]];
    for p in perms {
        let fibers: BTreeMap<i64, _> =
            hs.iter().enumerate().map(|(i, &h)| (h, tile.fiber(hs[p[i]]).unwrap().clone())).collect();
        out.push((format!("fibres permuted {p:?}"), ColumnTile::new(fibers).unwrap(), spec.clone()));
    }
    out
}

fn tiling_criterion() -> Outcome {
    let mut failures = Vec::new();
    let epsilons = [
        Surd::new(0, 1, 5, 2).unwrap(),
        Surd::new(-1, 1, 4, 5).unwrap(),
        Surd::new(0, 1, 6, 3).unwrap(),
    ];
    let mut mutated = 0;
    for eps in &epsilons {
        let (tile, spec) = build_alpha_construction(eps).unwrap();
        let holds = splitting_criterion(&tile, &spec).unwrap().holds;
        check(&mut failures, holds, || format!("ε = {eps}: criterion fails"));
        let column = column_tile_necessary_check(&tile);
        let measures: Vec<Surd> = column.measures.iter().map(|(_, m)| m.clone()).collect();
        let expected = vec![eps.clone(), &Surd::one() - &eps.scale(&rat(2, 1)), eps.clone()];
        check(&mut failures, !column.passes && measures == expected, || {
            format!("ε = {eps}: column check {:?}", column.measures)
        });
        match coverage_verdict(&tile, &spec, 100_000) {
            Ok(v) => check(&mut failures, v == holds, || format!("ε = {eps}: oracle disagrees")),
            Err(e) => failures.push(e),
        }
        let muts = mutations(eps, &tile, &spec);
        check(&mut failures, muts.len() == 20, || format!("{} mutations", muts.len()));
        for (label, t, s) in muts {
            mutated += 1;
            let verdict = splitting_criterion(&t, &s).unwrap().holds;
            check(&mut failures, !verdict, || format!("ε = {eps}, {label}: criterion still passes"));
            match coverage_verdict(&t, &s, 100_000) {
                Ok(v) => check(&mut failures, v == verdict, || format!("ε = {eps}, {label}: oracle disagrees")),
                Err(e) => failures.push(e),
            }
        }
    }
    Outcome { failures, summary: format!("3 constructions, {mutated} mutations, 10^5 sample points each") }
}

// ---------------------------------------------------------------- 7

fn cce_criterion() -> Outcome {
    let mut failures = Vec::new();
    for s in 2..=4 {
        let game = build_game(s).unwrap();
        for mask in 0..1u64 << game.n() {
            let a = ActionProfile::from_mask(mask);
            for p in 0..game.n() {
                let u = payoff(&game, p, &a);
                let v = payoff(&game, game.partner(p), &a);
                check(&mut failures, (u == 0 || u == 1) && u + v == 1, || format!("s={s} mask {mask} player {p}"));
            }
        }
    }
    for s in [2, 3] {
        let game = build_game(s).unwrap();
        let r = max_regret(&game, &UniformDistribution::all_profiles(game.n()));
        check(&mut failures, r.max_regret.is_zero(), || format!("s={s}: uniform regret {}", r.max_regret));
    }

    let mut found = 0;
    let probes: [(usize, &[(i64, i64)]); 2] = [
        (2, &[(1, 1), (3, 4), (1, 2), (1, 3), (1, 4), (1, 5), (0, 1)]),
        (3, &[(1, 1), (1, 2), (1, 3), (1, 4)]),
    ];
    for (s, eps_list) in probes {
        let game = build_game(s).unwrap();
        for &(num, den) in eps_list {
            let eps = rat(num, den);
            let Some(m) = brute_min_k(&game, &eps, 4).unwrap() else { continue };
            found += 1;
            let dist = UniformDistribution::new(m.witness.clone()).unwrap();
            check(&mut failures, max_regret(&game, &dist).max_regret <= eps, || format!("s={s} ε={eps}: witness"));
            let corr = correlation_report(&game, &dist);
            let two = &eps + &eps;
            check(&mut failures, corr.per_player.iter().all(|v| v.abs() <= two), || {
                format!("s={s} ε={eps}: per-player bound")
            });
            check(&mut failures, corr.per_pair.iter().all(|(_, v)| v.abs() <= two), || {
                format!("s={s} ε={eps}: per-pair bound")
            });
            check(&mut failures, corr.identity_holds, || format!("s={s} ε={eps}: pair identity"));
        }
        if s == 2 {
            for &(num, den) in eps_list {
                let eps = rat(num, den);
                let a = brute_min_k(&game, &eps, 4).unwrap().map(|m| m.k);
                let b = oracle::min_uniform_cce_k(&game, &eps, 4);
                check(&mut failures, a == b, || format!("s=2 ε={eps}: search {a:?} vs tuples {b:?}"));
            }
        }
    }

    for seed in 0..500u64 {
        let mut r = rng(seed);
        let n = r.gen_range(2..=12);
        let k = r.gen_range(1..=16);
        let dist = random_distribution(seed, n, k);
        let sets: Vec<Vec<usize>> = (0..r.gen_range(2..=5))
            .map(|_| (0..n).filter(|_| r.gen_bool(0.5)).collect())
            .collect();
        let rep = signature_vectors(&dist, &sets);
        // recompute the vectors from the signs
        let vectors: Vec<Vec<i64>> = sets
            .iter()
            .map(|set| dist.profiles().iter().map(|a| set.iter().map(|&p| a.get(p)).product()).collect())
            .collect();
        check(&mut failures, rep.vectors == vectors, || format!("seed {seed}: vectors"));
        for p in &rep.pairs {
            let dot: i64 = vectors[p.first].iter().zip(&vectors[p.second]).map(|(x, y)| x * y).sum();
            let dh = vectors[p.first].iter().zip(&vectors[p.second]).filter(|(x, y)| x != y).count() as i64;
            check(&mut failures, p.identity_holds && dot.abs() == (k as i64 - 2 * dh).abs(), || {
                format!("seed {seed}: pair ({}, {})", p.first, p.second)
            });
        }
    }
    Outcome { failures, summary: format!("payoffs s ≤ 4, {found} minimal CCEs, 500 signature inputs") }
}

// ---------------------------------------------------------------- 8

fn cli_criterion() -> Outcome {
    let mut failures = common::check_roundtrip();
    failures.extend(common::check_exit_matrix());
    Outcome {
        failures,
        summary: format!(
            "{} fixtures, {} matrix rows",
            common::fixture_files("valid").len(),
            common::exit_matrix().len()
        ),
    }
}

fn main() {
    // libtest flags (e.g. `--nocapture`, filters) are accepted and ignored
    let criteria: [(u32, &str, u64, fn() -> Outcome); 8] = [
        (1, "KKOS oracle equivalence", 60, kkos_equivalence),
        (2, "reduction soundness", 60, reduction_soundness),
        (3, "Wilber merge inequality", 60, wilber_inequality),
        (4, "heap working-set bounds", 60, heap_equivalence),
        (5, "partition colourings", 60, partition_criterion),
        (6, "tiling splitting criterion", 120, tiling_criterion),
        (7, "CCE lemmas", 120, cce_criterion),
        (8, "CLI contract", 10, cli_criterion),
    ];
    let mut all_pass = true;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = outcome.failures.is_empty() && in_time;
        all_pass &= pass;
        println!(
            "{} criterion {id} ({name}): {}; {:.2} s of {limit} s",
            if pass { "PASS" } else { "FAIL" },
            outcome.summary,
            elapsed.as_secs_f64()
        );
        if !in_time {
            println!("    over the time limit");
        }
        for f in &outcome.failures {
            println!("    {f}");
        }
    }
    if !all_pass {
        std::process::exit(1);
    }
}
