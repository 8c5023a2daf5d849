//! Partitioning a ground set so that no class sees two of `f_1, …, f_k`
//! collide, via colourings of the conflict graph.
//!
//! `E = {0, …, size_e − 1}` and `F = {0, …, size_f − 1}`; functions are
//! indexed from 0 here, so "`f_1`" in the usual notation is `funcs[0]`.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PartitionError {
    #[error("function {func} has {got} values, expected {expected}")]
    WrongLength { func: usize, expected: usize, got: usize },
    #[error("function {func} maps element {element} to {value}, outside [0, {size_f})")]
    ValueOutOfRange {
        func: usize,
        element: usize,
        value: usize,
        size_f: usize,
    },
    #[error("pointwise distinctness fails at element {element}: f_{i} and f_{j} agree")]
    NotDistinct { element: usize, i: usize, j: usize },
    #[error("system is not {mode:?} {n}-bounded: {witness:?}")]
    NotBounded {
        mode: BoundMode,
        n: usize,
        witness: FiberWitness,
    },
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("graph has {0} vertices; exact chromatic number is limited to 32")]
    TooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSystem {
    size_e: usize,
    size_f: usize,
    funcs: Vec<Vec<usize>>,
}

impl FunctionSystem {
    /// Checks shapes and value ranges; pointwise distinctness is checked separately.
    pub fn new(size_e: usize, size_f: usize, funcs: Vec<Vec<usize>>) -> Result<Self, PartitionError> {
        for (func, f) in funcs.iter().enumerate() {
            if f.len() != size_e {
                return Err(PartitionError::WrongLength {
                    func,
                    expected: size_e,
                    got: f.len(),
                });
            }
            if let Some((element, &value)) = f.iter().enumerate().find(|(_, &v)| v >= size_f) {
                return Err(PartitionError::ValueOutOfRange {
                    func,
                    element,
                    value,
                    size_f,
                });
            }
        }
        Ok(FunctionSystem {
            size_e,
            size_f,
            funcs,
        })
    }

    pub fn size_e(&self) -> usize {
        self.size_e
    }

    pub fn size_f(&self) -> usize {
        self.size_f
    }

    pub fn k(&self) -> usize {
        self.funcs.len()
    }

    pub fn funcs(&self) -> &[Vec<usize>] {
        &self.funcs
    }

    pub fn check_distinct(&self) -> Result<(), PartitionError> {
        for element in 0..self.size_e {
            for i in 0..self.k() {
                for j in i + 1..self.k() {
                    if self.funcs[i][element] == self.funcs[j][element] {
                        return Err(PartitionError::NotDistinct { element, i, j });
                    }
                }
            }
        }
        Ok(())
    }

    /// `fibers[i][z]` = `f_i^{-1}(z)`, sorted.
    pub fn fibers(&self) -> Vec<Vec<Vec<usize>>> {
        let mut fibers = vec![vec![Vec::new(); self.size_f]; self.k()];
        for (i, f) in self.funcs.iter().enumerate() {
            for (x, &z) in f.iter().enumerate() {
                fibers[i][z].push(x);
            }
        }
        fibers
    }
}

/// `x ~ y` iff `f_p(x) = f_q(y)` for some `p ≠ q`.
pub fn build_conflict_graph(sys: &FunctionSystem) -> Result<Graph, PartitionError> {
    sys.check_distinct()?;
    let fibers = sys.fibers();
    let mut g = Graph::empty(sys.size_e());
    for z in 0..sys.size_f() {
        for p in 0..sys.k() {
            for q in 0..sys.k() {
                if p == q {
                    continue;
                }
                for &x in &fibers[p][z] {
                    for &y in &fibers[q][z] {
                        if x != y {
                            g.add_edge(x, y);
                        }
                    }
                }
            }
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMode {
    /// Every value has some function with a fiber of size ≤ n.
    Original,
    /// Every value and every pair of functions: the smaller fiber has size ≤ n.
    Pairwise,
    /// Every fiber of every function has size ≤ n.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberWitness {
    pub value: usize,
    /// Functions whose fibers at `value` violate the condition.
    pub functions: Vec<usize>,
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Validation {
    pub holds: bool,
    pub witness: Option<FiberWitness>,
}

pub fn validate_system(sys: &FunctionSystem, n: usize, mode: BoundMode) -> Validation {
    let fibers = sys.fibers();
    let size = |i: usize, z: usize| fibers[i][z].len();
    for z in 0..sys.size_f() {
        let witness = match mode {
            BoundMode::Original => (0..sys.k()).all(|i| size(i, z) > n).then(|| FiberWitness {
                value: z,
                functions: (0..sys.k()).collect(),
                sizes: (0..sys.k()).map(|i| size(i, z)).collect(),
            }),
            BoundMode::Pairwise => (0..sys.k())
                .flat_map(|p| (p + 1..sys.k()).map(move |q| (p, q)))
                .find(|&(p, q)| size(p, z).min(size(q, z)) > n)
                .map(|(p, q)| FiberWitness {
                    value: z,
                    functions: vec![p, q],
                    sizes: vec![size(p, z), size(q, z)],
                }),
            BoundMode::Uniform => (0..sys.k()).find(|&i| size(i, z) > n).map(|i| FiberWitness {
                value: z,
                functions: vec![i],
                sizes: vec![size(i, z)],
            }),
        };
        if witness.is_some() {
            return Validation {
                holds: false,
                witness,
            };
        }
    }
    Validation {
        holds: true,
        witness: None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub colors: Vec<usize>,
    pub palette: usize,
    /// Guaranteed palette bound for the mode: `2nk(k−1)+1` or `nk(k−1)+1`.
    pub bound: usize,
    /// Largest indegree of the small-fibre orientation (pairwise mode only).
    pub max_indegree: Option<usize>,
    /// Largest degree at removal along the elimination order.
    pub degeneracy: usize,
}

/// Orientation `tail → head` of every conflict edge, pointing away from the
/// endpoint whose fibre is small. For edge `{x, y}` with `x < y` the first
/// witness `(p, q)` (lexicographic) with `f_p(x) = f_q(y)` decides; when both
/// fibres are small the edge points `x → y`.
pub fn orient_conflicts(sys: &FunctionSystem, graph: &Graph, n: usize) -> Vec<(usize, usize)> {
    let fibers = sys.fibers();
    let mut arcs = Vec::with_capacity(graph.edge_count());
    for (x, y) in graph.edges() {
        let (p, q) = (0..sys.k())
            .flat_map(|p| (0..sys.k()).map(move |q| (p, q)))
            .find(|&(p, q)| p != q && sys.funcs[p][x] == sys.funcs[q][y])
            .expect("conflict edge has a witness");
        let z = sys.funcs[p][x];
        if fibers[p][z].len() <= n {
            arcs.push((x, y));
        } else {
            debug_assert!(fibers[q][z].len() <= n, "pairwise bound");
            arcs.push((y, x));
        }
    }
    arcs
}

/// Elimination order: repeatedly remove a vertex of minimum remaining degree
/// (smallest id on ties). Returns the order and the largest degree seen at removal.
pub fn degeneracy_order(graph: &Graph) -> (Vec<usize>, usize) {
    let n = graph.n();
    let mut deg: Vec<usize> = (0..n).map(|v| graph.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut buckets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n.max(1)];
    for v in 0..n {
        buckets[deg[v]].insert(v);
    }
    let mut order = Vec::with_capacity(n);
    let mut degeneracy = 0;
    for _ in 0..n {
        let d = (0..buckets.len()).find(|&d| !buckets[d].is_empty()).expect("vertex left");
        let v = buckets[d].pop_first().expect("nonempty bucket");
        degeneracy = degeneracy.max(d);
        removed[v] = true;
        order.push(v);
        for &w in graph.neighbors(v) {
            if !removed[w] {
                buckets[deg[w]].remove(&w);
                deg[w] -= 1;
                buckets[deg[w]].insert(w);
            }
        }
    }
    (order, degeneracy)
}

/// First-fit colouring in the given vertex order.
pub fn greedy_color(graph: &Graph, order: &[usize]) -> Vec<usize> {
    let mut colors = vec![usize::MAX; graph.n()];
    for &v in order {
        let used: BTreeSet<usize> = graph
            .neighbors(v)
            .iter()
            .map(|&w| colors[w])
            .filter(|&c| c != usize::MAX)
            .collect();
        colors[v] = (0..).find(|c| !used.contains(c)).expect("free colour");
    }
    colors
}

pub fn palette_size(colors: &[usize]) -> usize {
    colors.iter().copied().max().map_or(0, |c| c + 1)
}

pub fn is_proper(graph: &Graph, colors: &[usize]) -> bool {
    colors.len() == graph.n() && graph.edges().all(|(u, v)| colors[u] != colors[v])
}

/// Colour classes `E_i` with `f_p(E_i) ∩ f_q(E_i) = ∅` for all `p < q`.
pub fn classes_are_disjoint(sys: &FunctionSystem, colors: &[usize]) -> bool {
    let palette = palette_size(colors);
    (0..palette).all(|class| {
        let members: Vec<usize> = (0..sys.size_e()).filter(|&x| colors[x] == class).collect();
        (0..sys.k()).all(|p| {
            let image_p: BTreeSet<usize> = members.iter().map(|&x| sys.funcs[p][x]).collect();
            (p + 1..sys.k()).all(|q| members.iter().all(|&x| !image_p.contains(&sys.funcs[q][x])))
        })
    })
}

pub fn color_system(sys: &FunctionSystem, n: usize, mode: BoundMode) -> Result<Coloring, PartitionError> {
    if mode == BoundMode::Original {
        return Err(PartitionError::BadParameter(
            "original n-boundedness gives no colouring guarantee".into(),
        ));
    }
    let validation = validate_system(sys, n, mode);
    if let Some(witness) = validation.witness {
        return Err(PartitionError::NotBounded { mode, n, witness });
    }
    let graph = build_conflict_graph(sys)?;
    let k = sys.k();
    let d = n * k * k.saturating_sub(1);
    let (order, degeneracy) = degeneracy_order(&graph);
    let max_indegree = (mode == BoundMode::Pairwise).then(|| {
        let mut indeg = vec![0usize; graph.n()];
        for (_, head) in orient_conflicts(sys, &graph, n) {
            indeg[head] += 1;
        }
        indeg.into_iter().max().unwrap_or(0)
    });
    let reversed: Vec<usize> = order.into_iter().rev().collect();
    let colors = greedy_color(&graph, &reversed);
    let palette = palette_size(&colors);
    let bound = match mode {
        BoundMode::Pairwise => 2 * d + 1,
        _ => d + 1,
    };
    Ok(Coloring {
        colors,
        palette,
        bound,
        max_indegree,
        degeneracy,
    })
}

/// Labels of the shift-counterexample ground set: pairs `(i, j)`, `1 ≤ i < j ≤ m`,
/// in lexicographic order.
pub fn shift_pairs(m: usize) -> Vec<(usize, usize)> {
    (1..=m)
        .flat_map(|i| (i + 1..=m).map(move |j| (i, j)))
        .collect()
}

/// `f_1(i,j) = i`, `f_2(i,j) = j`, `f_3 ≡ 0` on pairs `i < j ≤ m`, plus
/// constant functions `f_4, …, f_k` onto fresh values `m+1, m+2, …`.
pub fn shift_counterexample(m: usize, k: usize) -> Result<FunctionSystem, PartitionError> {
    if m < 2 {
        return Err(PartitionError::BadParameter(format!("m = {m} < 2")));
    }
    if k < 3 {
        return Err(PartitionError::BadParameter(format!("k = {k} < 3")));
    }
    let pairs = shift_pairs(m);
    let mut funcs = vec![
        pairs.iter().map(|&(i, _)| i).collect(),
        pairs.iter().map(|&(_, j)| j).collect(),
        vec![0; pairs.len()],
    ];
    for t in 4..=k {
        funcs.push(vec![m + t - 3; pairs.len()]);
    }
    FunctionSystem::new(pairs.len(), m + 1 + (k - 3), funcs)
}

/// `E = F = ℤ_{2k−1}`, `f_i(x) = x + i` for `i = 1..k`.
pub fn cyclic_construction(k: usize) -> Result<FunctionSystem, PartitionError> {
    if k < 2 {
        return Err(PartitionError::BadParameter(format!("k = {k} < 2")));
    }
    let size = 2 * k - 1;
    let funcs = (1..=k)
        .map(|i| (0..size).map(|x| (x + i) % size).collect())
        .collect();
    FunctionSystem::new(size, size, funcs)
}

/// Random system satisfying pointwise distinctness: each element gets `k`
/// distinct values from `[0, size_f)`.
pub fn random_distinct_system(seed: u64, size_e: usize, size_f: usize, k: usize) -> FunctionSystem {
    assert!(k <= size_f, "need at least k values");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut funcs = vec![vec![0; size_e]; k];
    for x in 0..size_e {
        let mut used = BTreeSet::new();
        for f in funcs.iter_mut() {
            let v = loop {
                let v = rng.gen_range(0..size_f);
                if used.insert(v) {
                    break v;
                }
            };
            f[x] = v;
        }
    }
    FunctionSystem::new(size_e, size_f, funcs).expect("values in range")
}

/// Exact chromatic number by iterative deepening over `t`-colourability with
/// a greedy clique as the starting lower bound. Limited to 32 vertices.
pub fn chromatic_number(graph: &Graph) -> Result<usize, PartitionError> {
    let n = graph.n();
    if n > 32 {
        return Err(PartitionError::TooLarge(n));
    }
    if n == 0 {
        return Ok(0);
    }
    let (order, _) = degeneracy_order(graph);
    let upper = palette_size(&greedy_color(graph, &order.iter().rev().copied().collect::<Vec<_>>()));
    let lower = greedy_clique(graph).len().max(1);
    // highest degree first
    let mut vs: Vec<usize> = (0..n).collect();
    vs.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    for t in lower..upper {
        let mut colors = vec![usize::MAX; n];
        if colorable(graph, &vs, 0, t, 0, &mut colors) {
            return Ok(t);
        }
    }
    Ok(upper)
}

/// A proper colouring with at most `t` colours, if one exists.
pub fn find_coloring(graph: &Graph, t: usize) -> Option<Vec<usize>> {
    let mut vs: Vec<usize> = (0..graph.n()).collect();
    vs.sort_by_key(|&v| (std::cmp::Reverse(graph.degree(v)), v));
    let mut colors = vec![usize::MAX; graph.n()];
    colorable(graph, &vs, 0, t, 0, &mut colors).then_some(colors)
}

fn colorable(
    graph: &Graph,
    order: &[usize],
    idx: usize,
    t: usize,
    used: usize,
    colors: &mut [usize],
) -> bool {
    let Some(&v) = order.get(idx) else {
        return true;
    };
    // a fresh colour is interchangeable with any other fresh colour
    for c in 0..t.min(used + 1) {
        if graph.neighbors(v).iter().any(|&w| colors[w] == c) {
            continue;
        }
        colors[v] = c;
        if colorable(graph, order, idx + 1, t, used.max(c + 1), colors) {
            return true;
        }
        colors[v] = usize::MAX;
    }
    false
}

fn greedy_clique(graph: &Graph) -> Vec<usize> {
    let mut best = Vec::new();
    for start in 0..graph.n() {
        let mut clique = vec![start];
        let mut cands: Vec<usize> = graph.neighbors(start).iter().copied().collect();
        cands.sort_by_key(|&v| std::cmp::Reverse(graph.degree(v)));
        for v in cands {
            if clique.iter().all(|&u| graph.has_edge(u, v)) {
                clique.push(v);
            }
        }
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_ranges_give_empty_graph() {
        let sys = FunctionSystem::new(3, 6, vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        assert_eq!(build_conflict_graph(&sys).unwrap().edge_count(), 0);
        let c = color_system(&sys, 1, BoundMode::Uniform).unwrap();
        assert_eq!(c.palette, 1);
    }

    #[test]
    fn distinctness_violation_reported() {
        let sys = FunctionSystem::new(2, 3, vec![vec![0, 1], vec![2, 1]]).unwrap();
        assert_eq!(
            build_conflict_graph(&sys),
            Err(PartitionError::NotDistinct { element: 1, i: 0, j: 1 })
        );
    }

    #[test]
    fn cyclic_k2_is_triangle() {
        let sys = cyclic_construction(2).unwrap();
        let g = build_conflict_graph(&sys).unwrap();
        assert_eq!(g, Graph::complete(3));
        let c = color_system(&sys, 1, BoundMode::Uniform).unwrap();
        assert_eq!(c.palette, 3);
        assert!(c.palette <= c.bound);
        assert!(validate_system(&sys, 1, BoundMode::Uniform).holds);
    }

    #[test]
    fn shift_m3_edges() {
        let sys = shift_counterexample(3, 3).unwrap();
        let g = build_conflict_graph(&sys).unwrap();
        // pairs: 0 = (1,2), 1 = (1,3), 2 = (2,3)
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 2)]);
        assert!(shift_counterexample(1, 3).is_err());
    }

    #[test]
    fn shift_original_bound_is_vacuous() {
        for m in 2..8 {
            for k in 3..6 {
                let sys = shift_counterexample(m, k).unwrap();
                sys.check_distinct().unwrap();
                assert!(validate_system(&sys, 1, BoundMode::Original).holds);
            }
        }
        // but it is not pairwise-bounded once some value has two big fibres
        let sys = shift_counterexample(6, 3).unwrap();
        assert!(!validate_system(&sys, 1, BoundMode::Pairwise).holds);
    }

    #[test]
    fn pairwise_violation_witness() {
        // two constant functions onto distinct values, |E| = 5
        let sys = FunctionSystem::new(5, 2, vec![vec![0; 5], vec![1; 5]]).unwrap();
        assert!(validate_system(&sys, 4, BoundMode::Pairwise).holds);
        let sys = FunctionSystem::new(5, 2, vec![vec![0, 0, 0, 0, 0], vec![1, 1, 1, 1, 1]]).unwrap();
        // swap one function's role so both fibres at 0 are large
        let both = FunctionSystem::new(
            10,
            2,
            vec![
                vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1],
                vec![1, 1, 1, 1, 1, 0, 0, 0, 0, 0],
            ],
        )
        .unwrap();
        let v = validate_system(&both, 4, BoundMode::Pairwise);
        assert!(!v.holds);
        assert_eq!(
            v.witness,
            Some(FiberWitness {
                value: 0,
                functions: vec![0, 1],
                sizes: vec![5, 5]
            })
        );
        assert!(validate_system(&sys, 5, BoundMode::Uniform).holds);
        assert!(!validate_system(&sys, 4, BoundMode::Uniform).holds);
    }

    #[test]
    fn chromatic_examples() {
        assert_eq!(chromatic_number(&Graph::empty(0)), Ok(0));
        assert_eq!(chromatic_number(&Graph::empty(4)), Ok(1));
        assert_eq!(chromatic_number(&Graph::complete(5)), Ok(5));
        let g = build_conflict_graph(&shift_counterexample(5, 3).unwrap()).unwrap();
        assert_eq!(chromatic_number(&g), Ok(3));
        assert!(find_coloring(&g, 2).is_none());
        assert!(find_coloring(&g, 3).is_some());
        assert_eq!(chromatic_number(&Graph::empty(33)), Err(PartitionError::TooLarge(33)));
        let c5 = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        assert_eq!(chromatic_number(&c5), Ok(3));
    }

    #[test]
    fn degeneracy_of_known_graphs() {
        assert_eq!(degeneracy_order(&Graph::path(5)).1, 1);
        assert_eq!(degeneracy_order(&Graph::complete(4)).1, 3);
        assert_eq!(degeneracy_order(&Graph::star(6)).0[0], 1);
    }
}
