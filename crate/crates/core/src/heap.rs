//! Lifetime (weak) and strong working-set parameters of heap operation traces.
//!
//! For an element `x` inserted at time `t_x` and extracted at `t'_x`:
//! `L_x = t'_x − t_x + 1`, and `K_x = max_{t_x ≤ t < t'_x} |W_{t,x}| + 1`
//! where `W_{t,x}` holds the elements inserted after `x` that are still present
//! right after operation `t`. Times are 1-based.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::{inv_ln2_upper, log2_bounds, Rational};

pub type ElementId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeapOp {
    Insert(ElementId),
    Extract(ElementId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("time {time}: element {id} inserted twice")]
    DoubleInsert { time: usize, id: ElementId },
    #[error("time {time}: element {id} extracted while not present")]
    ExtractAbsent { time: usize, id: ElementId },
    #[error("epsilon {0} outside (0, 1]")]
    EpsilonOutOfRange(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HeapTrace {
    ops: Vec<HeapOp>,
}

impl HeapTrace {
    pub fn new(ops: Vec<HeapOp>) -> Result<Self, TraceError> {
        let trace = HeapTrace { ops };
        trace.validate()?;
        Ok(trace)
    }

    pub fn ops(&self) -> &[HeapOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    fn validate(&self) -> Result<(), TraceError> {
        let mut ever = BTreeSet::new();
        let mut present = BTreeSet::new();
        for (i, op) in self.ops.iter().enumerate() {
            let time = i + 1;
            match *op {
                HeapOp::Insert(id) => {
                    if !ever.insert(id) {
                        return Err(TraceError::DoubleInsert { time, id });
                    }
                    present.insert(id);
                }
                HeapOp::Extract(id) => {
                    if !present.remove(&id) {
                        return Err(TraceError::ExtractAbsent { time, id });
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementStats {
    pub id: ElementId,
    pub inserted: usize,
    pub extracted: usize,
    /// `L_x`
    pub lifetime: u64,
    /// `K_x`
    pub strong: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceAnalysis {
    pub m: usize,
    /// Extracted elements in extraction order.
    pub stats: Vec<ElementStats>,
    pub never_extracted: Vec<ElementId>,
    /// `alive[t-1]` = `A(t)`, the elements present right after operation `t`.
    pub alive: Vec<Vec<ElementId>>,
}

impl TraceAnalysis {
    pub fn stats_of(&self, id: ElementId) -> Option<&ElementStats> {
        self.stats.iter().find(|s| s.id == id)
    }
}

pub fn analyze_trace(trace: &HeapTrace) -> TraceAnalysis {
    let ops = trace.ops();
    let m = ops.len();
    let mut insert_time: BTreeMap<ElementId, usize> = BTreeMap::new();
    let mut extract_time: BTreeMap<ElementId, usize> = BTreeMap::new();
    for (i, op) in ops.iter().enumerate() {
        match *op {
            HeapOp::Insert(id) => insert_time.insert(id, i + 1),
            HeapOp::Extract(id) => extract_time.insert(id, i + 1),
        };
    }
    let mut alive = Vec::with_capacity(m);
    let mut present = BTreeSet::new();
    for op in ops {
        match *op {
            HeapOp::Insert(id) => present.insert(id),
            HeapOp::Extract(id) => present.remove(&id),
        };
        alive.push(present.iter().copied().collect());
    }

    let mut stats = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        let HeapOp::Extract(id) = *op else { continue };
        let extracted = i + 1;
        let inserted = insert_time[&id];
        // sweep t = t_x..t'_x−1, tracking |W_{t,x}|
        let mut younger = 0u64;
        let mut peak = 0u64;
        for t in inserted..extracted {
            match ops[t - 1] {
                HeapOp::Insert(_) if t > inserted => younger += 1,
                HeapOp::Extract(other) if insert_time[&other] > inserted => younger -= 1,
                _ => {}
            }
            peak = peak.max(younger);
        }
        stats.push(ElementStats {
            id,
            inserted,
            extracted,
            lifetime: (extracted - inserted + 1) as u64,
            strong: peak + 1,
        });
    }
    let never_extracted = insert_time
        .keys()
        .copied()
        .filter(|id| !extract_time.contains_key(id))
        .collect();
    TraceAnalysis {
        m,
        stats,
        never_extracted,
        alive,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackingWitness {
    pub time: usize,
    pub k: u64,
    /// Elements of `A(time)` with `K_x ≤ k`; more than `k` of them.
    pub elements: Vec<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackingReport {
    pub holds: bool,
    pub witness: Option<PackingWitness>,
    /// Times at which some `k` is met with equality.
    pub tight_times: Vec<(usize, u64)>,
}

/// For every `t` and `k ≥ 1`: at most `k` elements of `A(t)` (among those
/// eventually extracted) have `K_x ≤ k`.
pub fn packing_check(trace: &HeapTrace) -> PackingReport {
    let analysis = analyze_trace(trace);
    let strong: BTreeMap<ElementId, u64> =
        analysis.stats.iter().map(|s| (s.id, s.strong)).collect();
    let mut tight_times = Vec::new();
    for (i, alive) in analysis.alive.iter().enumerate() {
        let mut ks: Vec<(u64, ElementId)> = alive
            .iter()
            .filter_map(|id| strong.get(id).map(|&k| (k, *id)))
            .collect();
        ks.sort_unstable();
        // #{K ≤ k} ≤ k for all k  ⇔  the j-th smallest K (1-based) is ≥ j
        for (j, &(k, _)) in ks.iter().enumerate() {
            if j + 1 < ks.len() && ks[j + 1].0 == k {
                continue;
            }
            let count = (j + 1) as u64;
            if count > k {
                return PackingReport {
                    holds: false,
                    witness: Some(PackingWitness {
                        time: i + 1,
                        k,
                        elements: ks[..=j].iter().map(|p| p.1).collect(),
                    }),
                    tight_times,
                };
            }
            if count == k {
                tight_times.push((i + 1, k));
            }
        }
    }
    PackingReport {
        holds: true,
        witness: None,
        tight_times,
    }
}

/// `b = ⌈1/ε⌉` for `0 < ε ≤ 1`.
pub fn level_width(epsilon: &Rational) -> Result<u32, TraceError> {
    if *epsilon <= Rational::zero() || *epsilon > Rational::one() {
        return Err(TraceError::EpsilonOutOfRange(epsilon.clone()));
    }
    let b = epsilon.recip().ceil().to_integer();
    Ok(u32::try_from(b).expect("b fits u32 for desk-scale epsilon"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelArea {
    pub level: u32,
    pub count: usize,
    pub total_lifetime: u64,
    /// `2m·2^{b(j+1)}`
    pub cap: BigInt,
    pub holds: bool,
}

/// Per-level lifetime totals `Σ_{x∈X_j} L_x ≤ 2m·2^{b(j+1)}` where
/// `X_j = {x : 2^{bj} ≤ K_x < 2^{b(j+1)}}`.
pub fn level_area_check(trace: &HeapTrace, epsilon: &Rational) -> Result<Vec<LevelArea>, TraceError> {
    let b = level_width(epsilon)?;
    let analysis = analyze_trace(trace);
    let mut levels: BTreeMap<u32, (usize, u64)> = BTreeMap::new();
    for s in &analysis.stats {
        // floor(log2 K) / b
        let j = (63 - s.strong.leading_zeros()) / b;
        let e = levels.entry(j).or_default();
        e.0 += 1;
        e.1 += s.lifetime;
    }
    let m = BigInt::from(analysis.m);
    Ok(levels
        .into_iter()
        .map(|(level, (count, total))| {
            let cap = BigInt::from(2) * &m * (BigInt::one() << (b * (level + 1)) as usize);
            LevelArea {
                level,
                count,
                total_lifetime: total,
                holds: BigInt::from(total) <= cap,
                cap,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub b: u32,
    pub m: usize,
    /// Certified enclosure of `Σ log₂ L_x`.
    pub lhs: (Rational, Rational),
    /// Certified enclosure of `(1 + 1/b)·Σ log₂ K_x + m·(b + 2 + 1.4427)`.
    pub rhs: (Rational, Rational),
    pub holds: bool,
}

/// Checks `Σ log₂ L_x ≤ (1 + 1/b)·Σ log₂ K_x + m·(b + 2 + 14427/10000)` with
/// `b = ⌈1/ε⌉`, exactly.
///
/// Scaling by `b` gives `log₂(ΠL^b / ΠK^{b+1}) ≤ m·b·(b + 2 + 14427/10000)`;
/// an integer budget is decided by comparing integers directly, otherwise the
/// left side is bracketed by certified rational logarithms with growing
/// precision until the comparison is decided.
pub fn explicit_inequality_check(
    trace: &HeapTrace,
    epsilon: &Rational,
) -> Result<InequalityReport, TraceError> {
    let b = level_width(epsilon)?;
    let analysis = analyze_trace(trace);
    let m = analysis.m;
    let prod_l: BigInt = analysis.stats.iter().map(|s| BigInt::from(s.lifetime)).product();
    let prod_k: BigInt = analysis.stats.iter().map(|s| BigInt::from(s.strong)).product();
    let br = Rational::from_integer(BigInt::from(b));
    let constant = Rational::from_integer(BigInt::from(m))
        * (&br + Rational::from_integer(BigInt::from(2)) + inv_ln2_upper());

    let lhs = log2_bounds(&Rational::from_integer(prod_l.clone()), 40);
    let logk = log2_bounds(&Rational::from_integer(prod_k.clone()), 40);
    let factor = (&br + Rational::one()) / &br;
    let rhs = (&logk.0 * &factor + &constant, &logk.1 * &factor + &constant);

    let scaled_budget = &constant * &br;
    let a = num_traits::pow(prod_l, b as usize);
    let bb = num_traits::pow(prod_k, b as usize + 1);
    let holds = if a <= bb {
        true
    } else if scaled_budget.is_integer() {
        let p = usize::try_from(scaled_budget.to_integer()).expect("budget fits usize");
        a <= bb << p
    } else {
        // a/bb is rational, so log₂(a/bb) cannot equal a non-integer budget
        // and refinement terminates
        let ratio = Rational::new(a, bb);
        let mut bits = 32;
        loop {
            let (lo, hi) = log2_bounds(&ratio, bits);
            if hi <= scaled_budget {
                break true;
            }
            if lo > scaled_budget {
                break false;
            }
            bits *= 2;
        }
    };
    Ok(InequalityReport {
        b,
        m,
        lhs,
        rhs,
        holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TracePolicy {
    /// Extract the oldest present element.
    Fifo,
    /// Extract the youngest present element.
    Stack,
    /// Extract a uniformly random present element.
    RandomPresent,
}

/// Deterministic valid trace of `m` operations. FIFO and stack traces insert
/// the first half and extract the rest; random-present traces flip a fair
/// coin at each step (inserting when nothing is present).
pub fn random_trace(seed: u64, m: usize, policy: TracePolicy) -> HeapTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ops = Vec::with_capacity(m);
    let mut present: Vec<ElementId> = Vec::new();
    let mut next: ElementId = 0;
    for i in 0..m {
        let insert = match policy {
            TracePolicy::Fifo | TracePolicy::Stack => i < m.div_ceil(2),
            TracePolicy::RandomPresent => present.is_empty() || rng.gen_bool(0.5),
        };
        if insert {
            ops.push(HeapOp::Insert(next));
            present.push(next);
            next += 1;
        } else {
            let idx = match policy {
                TracePolicy::Fifo => 0,
                TracePolicy::Stack => present.len() - 1,
                TracePolicy::RandomPresent => rng.gen_range(0..present.len()),
            };
            ops.push(HeapOp::Extract(present.remove(idx)));
        }
    }
    HeapTrace { ops }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, rat_int};
    use HeapOp::{Extract as E, Insert as I};

    fn trace(ops: &[HeapOp]) -> HeapTrace {
        HeapTrace::new(ops.to_vec()).unwrap()
    }

    #[test]
    fn validation_errors() {
        assert_eq!(
            HeapTrace::new(vec![I(1), I(1)]),
            Err(TraceError::DoubleInsert { time: 2, id: 1 })
        );
        assert_eq!(
            HeapTrace::new(vec![I(1), E(2)]),
            Err(TraceError::ExtractAbsent { time: 2, id: 2 })
        );
        assert_eq!(
            HeapTrace::new(vec![I(1), E(1), E(1)]),
            Err(TraceError::ExtractAbsent { time: 3, id: 1 })
        );
    }

    #[test]
    fn analyze_examples() {
        let a = analyze_trace(&trace(&[I(0), E(0)]));
        assert_eq!((a.stats[0].lifetime, a.stats[0].strong), (2, 1));

        let a = analyze_trace(&trace(&[I(0), I(1), E(1), E(0)]));
        let s0 = a.stats_of(0).unwrap();
        let s1 = a.stats_of(1).unwrap();
        assert_eq!((s0.strong, s0.lifetime), (2, 4));
        assert_eq!((s1.strong, s1.lifetime), (1, 2));

        let a = analyze_trace(&trace(&[I(0), I(1), I(2), E(0), E(1), E(2)]));
        let ks: Vec<u64> = (0..3).map(|i| a.stats_of(i).unwrap().strong).collect();
        assert_eq!(ks, vec![3, 2, 1]);

        let a = analyze_trace(&trace(&[I(0), I(1), E(0)]));
        assert_eq!(a.never_extracted, vec![1]);
        assert_eq!(a.alive, vec![vec![0], vec![0, 1], vec![1]]);
    }

    #[test]
    fn packing_examples() {
        let stack = random_trace(1, 10, TracePolicy::Stack);
        let rep = packing_check(&stack);
        assert!(rep.holds);
        assert!(packing_check(&HeapTrace::default()).holds);
    }

    #[test]
    fn epsilon_guard() {
        assert!(explicit_inequality_check(&HeapTrace::default(), &rat_int(0)).is_err());
        assert!(explicit_inequality_check(&HeapTrace::default(), &rat(3, 2)).is_err());
        assert_eq!(level_width(&rat(1, 3)), Ok(3));
        assert_eq!(level_width(&rat(2, 5)), Ok(3));
        assert_eq!(level_width(&rat_int(1)), Ok(1));
    }

    #[test]
    fn inequality_examples() {
        let rep = explicit_inequality_check(&HeapTrace::default(), &rat_int(1)).unwrap();
        assert!(rep.holds);
        let pairs: Vec<HeapOp> = (0..10).flat_map(|i| [I(i), E(i)]).collect();
        let rep = explicit_inequality_check(&trace(&pairs), &rat(1, 2)).unwrap();
        assert!(rep.holds);
        // Σ log₂ 2 over 10 elements = m/2
        assert_eq!(rep.lhs, (rat_int(10), rat_int(10)));
    }

    #[test]
    fn random_trace_policies() {
        assert!(random_trace(1, 0, TracePolicy::Fifo).is_empty());
        assert_eq!(
            random_trace(1, 4, TracePolicy::Fifo).ops(),
            &[I(0), I(1), E(0), E(1)]
        );
        assert_eq!(
            random_trace(1, 4, TracePolicy::Stack).ops(),
            &[I(0), I(1), E(1), E(0)]
        );
        for seed in 0..20 {
            let t = random_trace(seed, 50, TracePolicy::RandomPresent);
            assert!(HeapTrace::new(t.ops().to_vec()).is_ok());
            assert_eq!(t, random_trace(seed, 50, TracePolicy::RandomPresent));
        }
    }
}
