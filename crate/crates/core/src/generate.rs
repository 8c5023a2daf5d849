//! Seeded instance generators. The same seed always yields the same instance.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cce::{ActionProfile, UniformDistribution};
use crate::graph::Graph;
use crate::kkos::KkosInstance;
use crate::scalar::Rational;
use crate::wilber::{Access, Color, ColoredSequence};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Tree on `code.len() + 2` vertices from its Prüfer code.
pub fn prufer_tree(code: &[usize]) -> Graph {
    let n = code.len() + 2;
    let mut degree = vec![1usize; n];
    for &v in code {
        degree[v] += 1;
    }
    let mut g = Graph::empty(n);
    for &v in code {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf remains");
        g.add_edge(leaf, v);
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    g.add_edge(rest[0], rest[1]);
    g
}

/// Every labelled tree on `n ≥ 2` vertices, in Prüfer-code order.
pub fn all_trees(n: usize) -> Vec<Graph> {
    assert!(n >= 2);
    let len = n - 2;
    let total = n.pow(len as u32);
    (0..total)
        .map(|mut c| {
            let code: Vec<usize> = (0..len)
                .map(|_| {
                    let d = c % n;
                    c /= n;
                    d
                })
                .collect();
            prufer_tree(&code)
        })
        .collect()
}

/// Random forest on `n` vertices: each vertex after the first attaches to an
/// earlier one with probability 3/4, then labels are shuffled.
pub fn random_forest(seed: u64, n: usize) -> Graph {
    let mut r = rng(seed);
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(&mut r);
    let mut g = Graph::empty(n);
    for v in 1..n {
        if r.gen_ratio(3, 4) {
            let u = r.gen_range(0..v);
            g.add_edge(labels[u], labels[v]);
        }
    }
    g
}

/// `G(n, p)` with `p = num/den`.
pub fn random_graph(seed: u64, n: usize, num: u32, den: u32) -> Graph {
    let mut r = rng(seed);
    let mut g = Graph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_ratio(num, den) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Random instance on `graph`: `y` from small integer weights (zeros allowed,
/// not all zero), normalised; costs in `{0, …, 4}` so ties are common.
pub fn random_kkos(seed: u64, graph: Graph) -> KkosInstance {
    let mut r = rng(seed);
    let n = graph.n();
    let mut w: Vec<i64> = (0..n).map(|_| r.gen_range(0..6)).collect();
    if w.iter().all(|&x| x == 0) {
        w[r.gen_range(0..n)] = 1;
    }
    let total: i64 = w.iter().sum();
    let y = w.iter().map(|&x| Rational::new(BigInt::from(x), BigInt::from(total))).collect();
    let c = (0..n).map(|_| Rational::from_integer(BigInt::from(r.gen_range(0..5)))).collect();
    KkosInstance::new(graph, y, c, None).expect("valid by construction")
}

/// Uniform random colored sequence over keys `1..=n`.
pub fn random_colored_sequence(seed: u64, n: u32, len: usize) -> ColoredSequence {
    let mut r = rng(seed);
    let items = (0..len)
        .map(|_| Access {
            key: r.gen_range(1..=n),
            color: if r.gen_bool(0.5) { Color::Red } else { Color::Blue },
        })
        .collect();
    ColoredSequence::new(n, items).expect("keys in range")
}

/// `k` uniformly random profiles of an `n`-player game.
pub fn random_distribution(seed: u64, n: usize, k: usize) -> UniformDistribution {
    let mut r = rng(seed);
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    UniformDistribution::new((0..k).map(|_| ActionProfile::from_mask(r.gen::<u64>() & mask)).collect())
        .expect("k ≥ 1")
}
