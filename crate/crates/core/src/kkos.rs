//! Closest-equilibrium optimisation in the KKOS local model.
//!
//! A distribution `x` on the vertices is feasible when every edge whose two
//! endpoints both carry positive mass joins vertices of equal closed
//! neighbourhood mass `(Ax)_v = x_v + Σ_{u∼v} x_u`. The cost of `x` is the
//! weighted ℓ₁ distance `Σ c_v |x_v − y_v|` to the initial distribution `y`.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::Graph;
use crate::scalar::{rat, Rational};
use crate::simplex::{LinearProgram, LpStatus, Relation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KkosError {
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("negative entry {value} at vertex {vertex}")]
    NegativeEntry { vertex: usize, value: Rational },
    #[error("entries sum to {0}, expected 1")]
    NotNormalized(Rational),
    #[error("support set is empty")]
    EmptySupport,
    #[error("graph is not a forest: cycle {0:?}")]
    NotAForest(Vec<usize>),
    #[error("clique size must be at least 1")]
    InvalidCliqueSize,
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph has {n} vertices; limit is {max}")]
    TooLarge { n: usize, max: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct KkosInstance {
    pub graph: Graph,
    pub y: Vec<Rational>,
    pub c: Vec<Rational>,
    pub threshold: Option<Rational>,
}

impl KkosInstance {
    /// Validates `y ≥ 0`, `Σy = 1`, `c ≥ 0` and the vector lengths.
    pub fn new(
        graph: Graph,
        y: Vec<Rational>,
        c: Vec<Rational>,
        threshold: Option<Rational>,
    ) -> Result<Self, KkosError> {
        let n = graph.n();
        check_distribution(&y, n)?;
        check_len(&c, n)?;
        check_nonnegative(&c)?;
        Ok(KkosInstance {
            graph,
            y,
            c,
            threshold,
        })
    }

    /// Uniform `y`, unit costs.
    pub fn uniform(graph: Graph) -> Self {
        let n = graph.n();
        let y = vec![rat(1, n as i64); n];
        let c = vec![Rational::one(); n];
        KkosInstance {
            graph,
            y,
            c,
            threshold: None,
        }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// `Σ c_v |x_v − y_v|`.
    pub fn cost(&self, x: &[Rational]) -> Rational {
        self.c
            .iter()
            .zip(x.iter().zip(&self.y))
            .map(|(c, (xv, yv))| c * (xv - yv).abs())
            .sum()
    }

    pub fn y_of(&self, set: &[usize]) -> Rational {
        set.iter().map(|&v| self.y[v].clone()).sum()
    }
}

fn check_len(v: &[Rational], n: usize) -> Result<(), KkosError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(KkosError::DimensionMismatch {
            expected: n,
            got: v.len(),
        })
    }
}

fn check_nonnegative(v: &[Rational]) -> Result<(), KkosError> {
    match v.iter().position(Signed::is_negative) {
        Some(i) => Err(KkosError::NegativeEntry {
            vertex: i,
            value: v[i].clone(),
        }),
        None => Ok(()),
    }
}

fn check_distribution(x: &[Rational], n: usize) -> Result<(), KkosError> {
    check_len(x, n)?;
    check_nonnegative(x)?;
    let total: Rational = x.iter().sum();
    if total.is_one() {
        Ok(())
    } else {
        Err(KkosError::NotNormalized(total))
    }
}

fn check_set(graph: &Graph, set: &[usize]) -> Result<(), KkosError> {
    match set.iter().find(|&&v| v >= graph.n()) {
        Some(&v) => Err(KkosError::VertexOutOfRange {
            vertex: v,
            n: graph.n(),
        }),
        None => Ok(()),
    }
}

fn mass_unchecked(graph: &Graph, x: &[Rational], v: usize) -> Rational {
    graph
        .neighbors(v)
        .iter()
        .fold(x[v].clone(), |acc, &u| acc + &x[u])
}

/// `(Ax)_v`: weight on the closed neighbourhood of `v`.
pub fn mass(instance: &KkosInstance, x: &[Rational], v: usize) -> Result<Rational, KkosError> {
    check_len(x, instance.n())?;
    instance.graph.check_vertex(v).map_err(|_| KkosError::VertexOutOfRange {
        vertex: v,
        n: instance.n(),
    })?;
    Ok(mass_unchecked(&instance.graph, x, v))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    pub feasible: bool,
    /// First support edge (lexicographic) whose endpoint masses differ.
    pub violating_edge: Option<(usize, usize)>,
}

pub fn is_feasible(instance: &KkosInstance, x: &[Rational]) -> Result<Feasibility, KkosError> {
    check_distribution(x, instance.n())?;
    let g = &instance.graph;
    let violating_edge = g.edges().find(|&(u, v)| {
        x[u].is_positive()
            && x[v].is_positive()
            && mass_unchecked(g, x, u) != mass_unchecked(g, x, v)
    });
    Ok(Feasibility {
        feasible: violating_edge.is_none(),
        violating_edge,
    })
}

/// An edge `(u, v)` with `N[u] ⊊ N[v]`, which rules out any strictly positive
/// vector with equal masses on all edges.
pub fn dominated_edge(graph: &Graph) -> Option<(usize, usize)> {
    for (a, b) in graph.edges() {
        let (na, nb) = (graph.closed_neighborhood(a), graph.closed_neighborhood(b));
        if na.len() < nb.len() && na.is_subset(&nb) {
            return Some((a, b));
        }
        if nb.len() < na.len() && nb.is_subset(&na) {
            return Some((b, a));
        }
    }
    None
}

/// True iff `G[set]` has maximum degree at most one.
pub fn is_dissociation_set(graph: &Graph, set: &[usize]) -> Result<bool, KkosError> {
    check_set(graph, set)?;
    let members: BTreeSet<usize> = set.iter().copied().collect();
    Ok(members
        .iter()
        .all(|&v| graph.neighbors(v).intersection(&members).count() <= 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedSupportCost {
    pub cost: Rational,
    /// Cheapest vertex of the set (smallest id on ties); it absorbs the deficit.
    pub anchor: usize,
    pub x: Vec<Rational>,
}

/// Minimum cost over distributions supported within `set`:
/// `Σ_{i∉S} c_i y_i + (1 − y(S))·min_{i∈S} c_i`, with a witnessing `x`.
pub fn fixed_support_cost(
    instance: &KkosInstance,
    set: &[usize],
) -> Result<FixedSupportCost, KkosError> {
    check_set(&instance.graph, set)?;
    let members: BTreeSet<usize> = set.iter().copied().collect();
    let anchor = *members
        .iter()
        .min_by(|&&a, &&b| instance.c[a].cmp(&instance.c[b]).then(a.cmp(&b)))
        .ok_or(KkosError::EmptySupport)?;
    let inside: Rational = members.iter().map(|&v| instance.y[v].clone()).sum();
    let deficit = Rational::one() - inside;
    let outside: Rational = (0..instance.n())
        .filter(|v| !members.contains(v))
        .map(|v| &instance.c[v] * &instance.y[v])
        .sum();
    let cost = outside + &deficit * &instance.c[anchor];
    let mut x = vec![Rational::zero(); instance.n()];
    for &v in &members {
        x[v] = instance.y[v].clone();
    }
    x[anchor] += deficit;
    Ok(FixedSupportCost { cost, anchor, x })
}

/// Clique-to-KKOS reduction: `H` plus a universal vertex `z` (id `m`), unit
/// costs, `y_z = 2/3`, `y_u = 1/(3m)`, threshold `2/3 − 2k/(3m)`.
///
/// The resulting instance admits a feasible `x` of cost at most the threshold
/// iff `H` has a clique on `k` vertices.
pub fn clique_reduction(h: &Graph, k: usize) -> Result<KkosInstance, KkosError> {
    if k == 0 {
        return Err(KkosError::InvalidCliqueSize);
    }
    let m = h.n();
    if m == 0 {
        return Err(KkosError::EmptyGraph);
    }
    let graph = h.with_universal_vertex();
    let mut y = vec![rat(1, 3 * m as i64); m];
    y.push(rat(2, 3));
    let c = vec![Rational::one(); m + 1];
    let threshold = rat(2, 3) - rat(2 * k as i64, 3 * m as i64);
    Ok(KkosInstance {
        graph,
        y,
        c,
        threshold: Some(threshold),
    })
}

/// Reduction threshold `T_k = 2/3 − 2k/(3m)`.
pub fn clique_threshold(m: usize, k: usize) -> Rational {
    rat(2, 3) - rat(2 * k as i64, 3 * m as i64)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SupportCertificate {
    /// A feasible distribution with support exactly `S` and cost within the threshold.
    Certified {
        x: Vec<Rational>,
        delta: Rational,
        cost: Rational,
    },
    /// The max-margin program has no solution at all (cost row or mass rows conflict).
    Infeasible,
    /// Solutions exist but every one leaves some vertex of `S` at zero.
    ZeroMargin,
}

impl SupportCertificate {
    pub fn is_certified(&self) -> bool {
        matches!(self, SupportCertificate::Certified { .. })
    }
}

/// Builds the max-margin program for support `S = {s_0 < s_1 < …}`.
///
/// Variables: `u_j` (mass on `s_j`), `t_j ≥ |u_j − y_{s_j}|`, then `δ` last.
/// Maximise `δ` subject to `u ≥ δ`, `Σu = 1`, equal closed-neighbourhood mass
/// across every edge inside `S`, and, when a threshold `B` is set,
/// `Σ c_{s_j} t_j ≤ B − Σ_{v∉S} c_v y_v` (mass off `S` is zero). `δ ≤ 1` keeps
/// the program bounded.
pub fn support_program(instance: &KkosInstance, set: &[usize]) -> Result<LinearProgram, KkosError> {
    check_set(&instance.graph, set)?;
    let members: Vec<usize> = set.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if members.is_empty() {
        return Err(KkosError::EmptySupport);
    }
    let s = members.len();
    let slot = |v: usize| members.binary_search(&v).ok();
    let u = |j: usize| j;
    let t = |j: usize| s + j;
    let delta = 2 * s;
    let one = Rational::one;
    let mut lp = LinearProgram::new(2 * s + 1);
    lp.set_objective(delta, one());
    for (j, &v) in members.iter().enumerate() {
        lp.add_constraint([(u(j), one()), (delta, -one())], Relation::Ge, Rational::zero());
        lp.add_constraint([(t(j), one()), (u(j), -one())], Relation::Ge, -&instance.y[v]);
        lp.add_constraint([(t(j), one()), (u(j), one())], Relation::Ge, instance.y[v].clone());
    }
    lp.add_constraint((0..s).map(|j| (u(j), one())), Relation::Eq, one());
    let g = &instance.graph;
    for (a, b) in g.edges() {
        let (Some(_), Some(_)) = (slot(a), slot(b)) else {
            continue;
        };
        let closed = |v: usize| std::iter::once(v).chain(g.neighbors(v).iter().copied()).filter_map(slot);
        let terms: Vec<(usize, Rational)> = closed(a)
            .map(|j| (u(j), one()))
            .chain(closed(b).map(|j| (u(j), -one())))
            .collect();
        lp.add_constraint(terms, Relation::Eq, Rational::zero());
    }
    if let Some(b) = &instance.threshold {
        let outside: Rational = (0..instance.n())
            .filter(|&v| slot(v).is_none())
            .map(|v| &instance.c[v] * &instance.y[v])
            .sum();
        lp.add_constraint(
            members.iter().enumerate().map(|(j, &v)| (t(j), instance.c[v].clone())),
            Relation::Le,
            b - outside,
        );
    }
    lp.add_constraint([(delta, one())], Relation::Le, one());
    Ok(lp)
}

/// Decides whether a feasible distribution with support exactly `set` and cost
/// at most the instance threshold exists, returning an exact certificate.
pub fn support_feasibility_lp(
    instance: &KkosInstance,
    set: &[usize],
) -> Result<SupportCertificate, KkosError> {
    let lp = support_program(instance, set)?;
    let members: Vec<usize> = set.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    Ok(match lp.maximize() {
        LpStatus::Infeasible => SupportCertificate::Infeasible,
        LpStatus::Unbounded => unreachable!("δ is bounded by 1"),
        LpStatus::Optimal { x, value } => {
            if value.is_positive() {
                let mut u = vec![Rational::zero(); instance.n()];
                for (j, &v) in members.iter().enumerate() {
                    u[v] = x[j].clone();
                }
                let cost = instance.cost(&u);
                SupportCertificate::Certified {
                    x: u,
                    delta: value,
                    cost,
                }
            } else {
                SupportCertificate::ZeroMargin
            }
        }
    })
}

/// Largest host graph accepted by the support enumeration below.
pub const MAX_REDUCTION_VERTICES: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionDecision {
    pub k: usize,
    pub threshold: Rational,
    /// First support `{z} ∪ C` (by bitmask of `C`) certified by the LP.
    pub support: Option<Vec<usize>>,
    pub certificate: Option<SupportCertificate>,
}

impl ReductionDecision {
    pub fn holds(&self) -> bool {
        self.support.is_some()
    }
}

fn reduction_supports(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << m).map(move |mask| {
        let mut set: Vec<usize> = (0..m).filter(|v| mask >> v & 1 == 1).collect();
        set.push(m);
        set
    })
}

fn check_reduction_size(h: &Graph) -> Result<(), KkosError> {
    if h.n() > MAX_REDUCTION_VERTICES {
        return Err(KkosError::TooLarge {
            n: h.n(),
            max: MAX_REDUCTION_VERTICES,
        });
    }
    Ok(())
}

/// Decides the reduced instance for clique size `k` by certifying every
/// support `{z} ∪ C`, `C ⊆ V(H)`, with the max-margin LP.
pub fn reduction_decision(h: &Graph, k: usize) -> Result<ReductionDecision, KkosError> {
    check_reduction_size(h)?;
    let instance = clique_reduction(h, k)?;
    for set in reduction_supports(h.n()) {
        let cert = support_feasibility_lp(&instance, &set)?;
        if cert.is_certified() {
            return Ok(ReductionDecision {
                k,
                threshold: instance.threshold.clone().expect("reduction sets a threshold"),
                support: Some(set),
                certificate: Some(cert),
            });
        }
    }
    Ok(ReductionDecision {
        k,
        threshold: instance.threshold.expect("reduction sets a threshold"),
        support: None,
        certificate: None,
    })
}

/// Decisions for every `k = 1..=k_max` at once. Each support is certified for
/// increasing `k` until the first failure; thresholds fall as `k` grows, so
/// later `k` would fail too.
pub fn reduction_decisions(h: &Graph, k_max: usize) -> Result<Vec<bool>, KkosError> {
    check_reduction_size(h)?;
    let instances = (1..=k_max)
        .map(|k| clique_reduction(h, k))
        .collect::<Result<Vec<_>, _>>()?;
    let mut decided = vec![false; k_max];
    for set in reduction_supports(h.n()) {
        for (i, instance) in instances.iter().enumerate() {
            if decided[i] {
                continue;
            }
            if !support_feasibility_lp(instance, &set)?.is_certified() {
                break;
            }
            decided[i] = true;
        }
    }
    Ok(decided)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution {
    pub x: Vec<Rational>,
    /// `{v : x_v > 0}`.
    pub support: Vec<usize>,
    pub cost: Rational,
    pub anchor: usize,
    /// The maximum-weight dissociation set the solution was built from; may
    /// strictly contain `support` when some `y_v = 0`.
    pub dissociation_set: Vec<usize>,
}

/// Three DP states per vertex of a rooted tree; `with_child` is `None` when
/// no child is available to pair with.
#[derive(Debug, Clone)]
struct DpState {
    without: Rational,
    alone: Rational,
    with_child: Option<Rational>,
}

impl DpState {
    fn best(&self) -> (Rational, Choice) {
        let mut best = (self.without.clone(), Choice::Without);
        if self.alone > best.0 {
            best = (self.alone.clone(), Choice::Alone);
        }
        if let Some(r) = &self.with_child {
            if *r > best.0 {
                best = (r.clone(), Choice::WithChild);
            }
        }
        best
    }

    fn best_selected(&self) -> (Rational, Choice) {
        match &self.with_child {
            Some(r) if *r > self.alone => (r.clone(), Choice::WithChild),
            _ => (self.alone.clone(), Choice::Alone),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Choice {
    Without,
    Alone,
    WithChild,
}

struct ForestDp<'a> {
    graph: &'a Graph,
    allowed: Vec<bool>,
    weight: Vec<Rational>,
    states: Vec<Option<DpState>>,
    /// child picked for the `with_child` state
    partner: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
}

impl<'a> ForestDp<'a> {
    fn new(graph: &'a Graph, allowed: Vec<bool>, weight: Vec<Rational>) -> Self {
        let n = graph.n();
        ForestDp {
            graph,
            allowed,
            weight,
            states: vec![None; n],
            partner: vec![None; n],
            children: vec![Vec::new(); n],
        }
    }

    /// Roots the tree containing `root` and fills the states bottom-up.
    fn solve_tree(&mut self, root: usize) {
        let mut order = Vec::new();
        let mut stack = vec![(root, usize::MAX)];
        while let Some((v, parent)) = stack.pop() {
            order.push(v);
            let kids: Vec<usize> = self
                .graph
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| w != parent && self.allowed[w])
                .collect();
            for &w in kids.iter().rev() {
                stack.push((w, v));
            }
            self.children[v] = kids;
        }
        for &v in order.iter().rev() {
            let mut without = Rational::zero();
            let mut base = self.weight[v].clone();
            let mut gain: Option<(Rational, usize)> = None;
            for &u in &self.children[v] {
                let su = self.states[u].as_ref().expect("child solved");
                without += su.best().0;
                base += &su.without;
                let g = &su.alone - &su.without;
                // strict comparison keeps the smallest id on ties
                if gain.as_ref().is_none_or(|(bg, bu)| g > *bg || (g == *bg && u < *bu)) {
                    gain = Some((g, u));
                }
            }
            let with_child = gain.as_ref().map(|(g, _)| &base + g);
            self.partner[v] = gain.map(|(_, u)| u);
            self.states[v] = Some(DpState {
                without,
                alone: base,
                with_child,
            });
        }
    }

    fn collect(&self, v: usize, choice: Choice, out: &mut Vec<usize>) {
        match choice {
            Choice::Without => {
                for &u in &self.children[v] {
                    let (_, c) = self.states[u].as_ref().unwrap().best();
                    self.collect(u, c, out);
                }
            }
            Choice::Alone | Choice::WithChild => {
                out.push(v);
                let partner = if choice == Choice::WithChild {
                    self.partner[v]
                } else {
                    None
                };
                for &u in &self.children[v] {
                    let c = if Some(u) == partner {
                        Choice::Alone
                    } else {
                        Choice::Without
                    };
                    self.collect(u, c, out);
                }
            }
        }
    }
}

/// Maximum-weight dissociation set of the forest restricted to `allowed`
/// that contains `anchor`, with its weight.
fn anchored_max_dissociation(
    graph: &Graph,
    allowed: Vec<bool>,
    weight: Vec<Rational>,
    anchor: usize,
) -> (Rational, Vec<usize>) {
    let n = graph.n();
    let mut dp = ForestDp::new(graph, allowed, weight);
    dp.solve_tree(anchor);
    let (mut total, choice) = dp.states[anchor].as_ref().unwrap().best_selected();
    let mut set = Vec::new();
    dp.collect(anchor, choice, &mut set);
    for v in 0..n {
        if dp.allowed[v] && dp.states[v].is_none() {
            dp.solve_tree(v);
            let (w, c) = dp.states[v].as_ref().unwrap().best();
            total += w;
            dp.collect(v, c, &mut set);
        }
    }
    set.sort_unstable();
    (total, set)
}

/// Minimum-cost feasible distribution on a forest in `O(n²)` rational operations.
///
/// For each anchor `r`, restrict to `{i : c_i ≥ c_r}`, weight `(c_i + c_r)·y_i`,
/// and find the heaviest dissociation set through `r` by a three-state tree
/// DP. The optimum is `min_r (Σ c_i y_i + c_r − M_r)`; ties go to the smallest `r`.
pub fn forest_optimize(instance: &KkosInstance) -> Result<EquilibriumSolution, KkosError> {
    let g = &instance.graph;
    if let Some(cycle) = g.find_cycle() {
        return Err(KkosError::NotAForest(cycle));
    }
    let n = g.n();
    if n == 0 {
        return Err(KkosError::EmptyGraph);
    }
    let base: Rational = instance.c.iter().zip(&instance.y).map(|(c, y)| c * y).sum();
    let mut best: Option<(Rational, usize, Vec<usize>)> = None;
    for r in 0..n {
        let cr = &instance.c[r];
        let allowed: Vec<bool> = instance.c.iter().map(|ci| ci >= cr).collect();
        let weight: Vec<Rational> = (0..n)
            .map(|i| (&instance.c[i] + cr) * &instance.y[i])
            .collect();
        let (m_r, set) = anchored_max_dissociation(g, allowed, weight, r);
        let value = &base + cr - m_r;
        if best.as_ref().is_none_or(|(bv, _, _)| value < *bv) {
            best = Some((value, r, set));
        }
    }
    let (cost, anchor, set) = best.expect("nonempty graph");
    let mut x = vec![Rational::zero(); n];
    for &v in &set {
        x[v] = instance.y[v].clone();
    }
    x[anchor] += Rational::one() - instance.y_of(&set);
    let support = (0..n).filter(|&v| x[v].is_positive()).collect();
    Ok(EquilibriumSolution {
        x,
        support,
        cost,
        anchor,
        dissociation_set: set,
    })
}
