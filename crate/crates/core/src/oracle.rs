//! Brute-force references. Each function recomputes a quantity straight from
//! its definition, sharing no search logic with the fast implementations, so
//! tests can cross-check the two.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::cce::{payoff, ActionProfile, GameSpec};
use crate::graph::Graph;
use crate::heap::{HeapOp, HeapTrace};
use crate::kkos::{fixed_support_cost, KkosInstance};
use crate::scalar::{Rational, Surd};
use crate::tiling::CircleIntervalSet;
use crate::wilber::padded_size;

fn subset(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Induced maximum degree at most one.
pub fn is_dissociation(graph: &Graph, set: &[usize]) -> bool {
    set.iter()
        .all(|&v| set.iter().filter(|&&w| graph.has_edge(v, w)).count() <= 1)
}

/// Minimum of `fixed_support_cost` over all nonempty dissociation sets, with
/// the lexicographically first minimising set (by bitmask order). `n ≤ 20`.
pub fn min_dissociation_cost(instance: &KkosInstance) -> (Rational, Vec<usize>) {
    let n = instance.n();
    assert!(n <= 20, "exhaustive oracle limited to 20 vertices");
    let mut best: Option<(Rational, Vec<usize>)> = None;
    for mask in 1u64..1 << n {
        let set = subset(mask, n);
        if !is_dissociation(&instance.graph, &set) {
            continue;
        }
        let cost = fixed_support_cost(instance, &set).expect("valid set").cost;
        if best.as_ref().map_or(true, |(b, _)| &cost < b) {
            best = Some((cost, set));
        }
    }
    best.expect("singletons are dissociation sets")
}

/// Size of a largest clique by subset enumeration. `n ≤ 20`.
pub fn max_clique(graph: &Graph) -> usize {
    let n = graph.n();
    assert!(n <= 20, "exhaustive oracle limited to 20 vertices");
    (0u64..1 << n)
        .map(|mask| subset(mask, n))
        .filter(|s| s.iter().all(|&u| s.iter().all(|&v| u == v || graph.has_edge(u, v))))
        .map(|s| s.len())
        .max()
        .unwrap_or(0)
}

/// Chromatic number by trying every assignment of `t` colours, `t = 1, 2, …`.
/// `n ≤ 10`.
pub fn chromatic_number_brute(graph: &Graph) -> usize {
    let n = graph.n();
    assert!(n <= 10, "exhaustive oracle limited to 10 vertices");
    if n == 0 {
        return 0;
    }
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    for t in 1..=n {
        let total = t.pow(n as u32);
        for code in 0..total {
            let mut colors = vec![0; n];
            let mut c = code;
            for slot in colors.iter_mut() {
                *slot = c % t;
                c /= t;
            }
            if edges.iter().all(|&(u, v)| colors[u] != colors[v]) {
                return t;
            }
        }
    }
    n
}

/// Wilber's bound recounted interval by interval: for every internal dyadic
/// interval, filter the keys it contains and count child switches.
pub fn wilber_recount(keys: &[u32], n: u32) -> u64 {
    let size = padded_size(n);
    let mut total = 0;
    let mut width = size;
    while width >= 2 {
        let mut lo = 1;
        while lo <= size {
            let hi = lo + width - 1;
            let mid = lo + width / 2 - 1;
            let sides: Vec<bool> = keys
                .iter()
                .filter(|&&k| lo <= k && k <= hi)
                .map(|&k| k <= mid)
                .collect();
            total += sides.windows(2).filter(|w| w[0] != w[1]).count() as u64;
            lo += width;
        }
        width /= 2;
    }
    total
}

/// `(L_x, K_x)` for every extracted element, in extraction order, computed by
/// rebuilding `W_{t,x}` as a set at every step.
pub fn working_set_costs(trace: &HeapTrace) -> Vec<(u64, u64)> {
    let ops = trace.ops();
    let time_of = |target: HeapOp| ops.iter().position(|&op| op == target).map(|i| i + 1);
    let mut out = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        let HeapOp::Extract(x) = *op else { continue };
        let tx = time_of(HeapOp::Insert(x)).expect("inserted before extraction");
        let tx_out = i + 1;
        let mut peak = 0;
        for t in tx..tx_out {
            let w: BTreeSet<u32> = ops[tx..t]
                .iter()
                .filter_map(|op| match *op {
                    HeapOp::Insert(y) => Some(y),
                    HeapOp::Extract(_) => None,
                })
                .filter(|&y| {
                    time_of(HeapOp::Extract(y)).map_or(true, |e| e > t)
                })
                .collect();
            peak = peak.max(w.len() as u64);
        }
        out.push(((tx_out - tx + 1) as u64, peak + 1));
    }
    out
}

/// Number of sets containing the circle point `theta`.
pub fn point_multiplicity(sets: &[CircleIntervalSet], theta: &Surd) -> usize {
    sets.iter()
        .filter(|s| s.contains(theta).expect("shared field"))
        .count()
}

/// Exact max regret from the payoff definition, enumerating every deviation.
pub fn regret_by_definition(game: &GameSpec, profiles: &[ActionProfile]) -> Rational {
    let mut best: Option<Rational> = None;
    for p in 0..game.n() {
        for dev in [-1i64, 1] {
            let mut total = 0i64;
            for a in profiles {
                let deviated = ActionProfile::from_signs(
                    &(0..game.n())
                        .map(|q| if q == p { dev } else { a.get(q) })
                        .collect::<Vec<_>>(),
                )
                .expect("signs");
                total += payoff(game, p, &deviated) - payoff(game, p, a);
            }
            let r = Rational::new(BigInt::from(total), BigInt::from(profiles.len()));
            if best.as_ref().map_or(true, |b| &r > b) {
                best = Some(r);
            }
        }
    }
    best.unwrap_or_else(Rational::zero)
}

/// Smallest `k ≤ k_max` such that some ordered `k`-tuple of profiles is an
/// `ε`-CCE, trying all `(2^n)^k` tuples.
pub fn min_uniform_cce_k(game: &GameSpec, eps: &Rational, k_max: usize) -> Option<usize> {
    let universe = 1usize << game.n();
    for k in 1..=k_max {
        let total = universe.pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let tuple: Vec<ActionProfile> = (0..k)
                .map(|_| {
                    let a = ActionProfile::from_mask((c % universe) as u64);
                    c /= universe;
                    a
                })
                .collect();
            if &regret_by_definition(game, &tuple) <= eps {
                return Some(k);
            }
        }
    }
    None
}
