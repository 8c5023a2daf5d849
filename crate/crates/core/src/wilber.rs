//! Wilber's first lower bound over dyadic intervals and the merge inequality
//! `W(Z) ≤ 3·W(R) + 3·W(B) + |Z|` for two-coloured sequences.
//!
//! Keys are 1-indexed in `[1, n]`; `n` is padded up to a power of two. Only
//! internal dyadic intervals (size ≥ 2) contribute.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WilberError {
    #[error("key {key} at position {position} outside [1, {n}]")]
    KeyOutOfRange { position: usize, key: u32, n: u32 },
    #[error("interleave needs equal lengths, got {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("[{lo}, {hi}] is not an internal dyadic interval of [1, {n}]")]
    NotDyadic { lo: u32, hi: u32, n: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Color {
    Red,
    Blue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub key: u32,
    pub color: Color,
}

/// Smallest power of two ≥ `n` (and ≥ 1).
pub fn padded_size(n: u32) -> u32 {
    n.max(1).next_power_of_two()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredSequence {
    n: u32,
    items: Vec<Access>,
}

impl ColoredSequence {
    pub fn new(n: u32, items: Vec<Access>) -> Result<Self, WilberError> {
        let n = padded_size(n);
        check_keys(items.iter().map(|a| a.key), n)?;
        Ok(ColoredSequence { n, items })
    }

    pub fn from_pairs(n: u32, pairs: &[(u32, Color)]) -> Result<Self, WilberError> {
        Self::new(
            n,
            pairs.iter().map(|&(key, color)| Access { key, color }).collect(),
        )
    }

    /// Padded key-space size.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn items(&self) -> &[Access] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn keys(&self) -> Vec<u32> {
        self.items.iter().map(|a| a.key).collect()
    }
}

fn check_keys(keys: impl Iterator<Item = u32>, n: u32) -> Result<(), WilberError> {
    for (position, key) in keys.enumerate() {
        if key == 0 || key > n {
            return Err(WilberError::KeyOutOfRange { position, key, n });
        }
    }
    Ok(())
}

/// Closed key range `[lo, hi]` whose size is a power of two ≥ 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    pub lo: u32,
    pub hi: u32,
}

impl DyadicInterval {
    pub fn root(n: u32) -> Option<Self> {
        let n = padded_size(n);
        (n >= 2).then_some(DyadicInterval { lo: 1, hi: n })
    }

    /// Validates that `[lo, hi]` is an internal dyadic interval of `[1, n]`.
    pub fn new(lo: u32, hi: u32, n: u32) -> Result<Self, WilberError> {
        let n = padded_size(n);
        let size = hi.wrapping_sub(lo).wrapping_add(1);
        let ok = lo >= 1
            && hi <= n
            && hi > lo
            && size.is_power_of_two()
            && (lo - 1) % size == 0;
        if ok {
            Ok(DyadicInterval { lo, hi })
        } else {
            Err(WilberError::NotDyadic { lo, hi, n })
        }
    }

    pub fn size(&self) -> u32 {
        self.hi - self.lo + 1
    }

    pub fn mid(&self) -> u32 {
        self.lo + self.size() / 2 - 1
    }

    pub fn contains(&self, key: u32) -> bool {
        (self.lo..=self.hi).contains(&key)
    }

    pub fn in_left(&self, key: u32) -> bool {
        key >= self.lo && key <= self.mid()
    }

    /// Child ranges as `(lo, hi)`; leaves have size 1 and are not `DyadicInterval`s.
    pub fn left(&self) -> (u32, u32) {
        (self.lo, self.mid())
    }

    pub fn right(&self) -> (u32, u32) {
        (self.mid() + 1, self.hi)
    }

    pub fn left_interval(&self) -> Option<DyadicInterval> {
        let (lo, hi) = self.left();
        (hi > lo).then_some(DyadicInterval { lo, hi })
    }

    pub fn right_interval(&self) -> Option<DyadicInterval> {
        let (lo, hi) = self.right();
        (hi > lo).then_some(DyadicInterval { lo, hi })
    }
}

/// All internal dyadic intervals of `[1, n]`, root first, level by level.
pub fn internal_intervals(n: u32) -> Vec<DyadicInterval> {
    let n = padded_size(n);
    let mut out = Vec::new();
    let mut size = n;
    while size >= 2 {
        let mut lo = 1;
        while lo <= n {
            out.push(DyadicInterval {
                lo,
                hi: lo + size - 1,
            });
            lo += size;
        }
        size /= 2;
    }
    out
}

/// `W(S) = Σ_I α_I(S)`. Each key walks its root-to-leaf path once, comparing
/// the side it takes at every internal interval with the previous key that
/// passed through there.
pub fn wilber_bound(keys: &[u32], n: u32) -> Result<u64, WilberError> {
    let n = padded_size(n);
    check_keys(keys.iter().copied(), n)?;
    let mut walker = PathWalker::new(n);
    Ok(keys.iter().map(|&k| walker.push(k)).sum())
}

/// Last side taken at each internal interval, in heap order (root = 1).
struct PathWalker {
    n: u32,
    last: Vec<u8>,
}

impl PathWalker {
    fn new(n: u32) -> Self {
        PathWalker {
            n,
            last: vec![0; n as usize],
        }
    }

    /// Records `key` and returns the number of intervals where it switches side.
    fn push(&mut self, key: u32) -> u64 {
        let (mut node, mut lo, mut size) = (1usize, 1u32, self.n);
        let mut switches = 0;
        while size >= 2 {
            let mid = lo + size / 2 - 1;
            let side = if key <= mid { 1 } else { 2 };
            let prev = self.last[node];
            if prev != 0 && prev != side {
                switches += 1;
            }
            self.last[node] = side;
            node = 2 * node + (side as usize - 1);
            if side == 2 {
                lo = mid + 1;
            }
            size /= 2;
        }
        switches
    }
}

/// `α_I(S)`: consecutive pairs of `S|_I` lying in different children of `I`.
pub fn alternations_at(keys: &[u32], interval: DyadicInterval) -> u64 {
    let restricted: Vec<bool> = keys
        .iter()
        .filter(|&&k| interval.contains(k))
        .map(|&k| interval.in_left(k))
        .collect();
    restricted.windows(2).filter(|w| w[0] != w[1]).count() as u64
}

/// `X ⊔⊔ Y = (x₁, y₁, x₂, y₂, …)` with `X` red and `Y` blue.
pub fn interleave(x: &[u32], y: &[u32], n: u32) -> Result<ColoredSequence, WilberError> {
    if x.len() != y.len() {
        return Err(WilberError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let items = x
        .iter()
        .zip(y)
        .flat_map(|(&a, &b)| {
            [
                Access {
                    key: a,
                    color: Color::Red,
                },
                Access {
                    key: b,
                    color: Color::Blue,
                },
            ]
        })
        .collect();
    ColoredSequence::new(n, items)
}

/// Order-preserving red and blue subsequences.
pub fn split_by_color(z: &ColoredSequence) -> (Vec<u32>, Vec<u32>) {
    let mut red = Vec::new();
    let mut blue = Vec::new();
    for a in z.items() {
        match a.color {
            Color::Red => red.push(a.key),
            Color::Blue => blue.push(a.key),
        }
    }
    (red, blue)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeReport {
    pub w_merged: u64,
    pub w_red: u64,
    pub w_blue: u64,
    pub len: u64,
    /// `3·W(R) + 3·W(B) + |Z|`.
    pub bound: u64,
    pub holds: bool,
}

pub fn merge_report(z: &ColoredSequence) -> MergeReport {
    let n = padded_size(z.n());
    let (mut all, mut red, mut blue) = (PathWalker::new(n), PathWalker::new(n), PathWalker::new(n));
    let (mut w_merged, mut w_red, mut w_blue) = (0, 0, 0);
    for a in z.items() {
        w_merged += all.push(a.key);
        match a.color {
            Color::Red => w_red += red.push(a.key),
            Color::Blue => w_blue += blue.push(a.key),
        }
    }
    let len = z.len() as u64;
    let bound = 3 * w_red + 3 * w_blue + len;
    MergeReport {
        w_merged,
        w_red,
        w_blue,
        len,
        bound,
        holds: w_merged <= bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeCase {
    /// The gap holds a point of the first endpoint's colour; charge to the first such point.
    SameColorInGap,
    /// The gap is entirely the second endpoint's colour; charge from its last point.
    GapOfOtherColor,
}

/// A newly created colour change `(source.0, source.1)` on one child side,
/// charged to an alternation `target` of a monochromatic restriction.
/// Positions index into the original sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Charge {
    pub side: Side,
    pub source: (usize, usize),
    pub target: (usize, usize),
    pub case: ChargeCase,
}

/// Every counter in the per-interval accounting of the merge inequality,
/// computed directly from definitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalReport {
    pub interval: DyadicInterval,
    /// `α_I(Z)`
    pub alternations: u64,
    pub monochromatic: u64,
    /// `M_I`: bichromatic alternations
    pub bichromatic: u64,
    /// `C(Z|_I)`
    pub changes: u64,
    /// `C(Z|_{L(I)})`, `C(Z|_{R(I)})`
    pub changes_left: u64,
    pub changes_right: u64,
    /// colour changes of `Z|_I` with both endpoints in the left (right) child
    pub changes_ll: u64,
    pub changes_rr: u64,
    pub new_left: Vec<(usize, usize)>,
    pub new_right: Vec<(usize, usize)>,
    /// `α_I(Z_r)`, `α_I(Z_b)`
    pub alternations_red: u64,
    pub alternations_blue: u64,
    pub charges: Vec<Charge>,
    /// Largest number of charges landing on a single target.
    pub max_preimages: usize,
    /// Every charge target is an alternation of the matching monochromatic restriction.
    pub targets_valid: bool,
}

impl IntervalReport {
    /// `M_I = C(Z|_I) − C(Z|_L) − C(Z|_R) + |New_L| + |New_R|`.
    pub fn identity_holds(&self) -> bool {
        self.bichromatic as i64
            == self.changes as i64 - self.changes_left as i64 - self.changes_right as i64
                + self.new_left.len() as i64
                + self.new_right.len() as i64
    }

    /// `|New_L| + |New_R| ≤ 2(α_I(Z_r) + α_I(Z_b))`.
    pub fn charging_holds(&self) -> bool {
        (self.new_left.len() + self.new_right.len()) as u64
            <= 2 * (self.alternations_red + self.alternations_blue)
    }

    pub fn split_holds(&self) -> bool {
        self.alternations == self.monochromatic + self.bichromatic
            && self.changes == self.changes_ll + self.changes_rr + self.bichromatic
    }
}

fn color_changes(items: &[Access], positions: &[usize]) -> u64 {
    positions
        .windows(2)
        .filter(|w| items[w[0]].color != items[w[1]].color)
        .count() as u64
}

pub fn alternation_decomposition(z: &ColoredSequence, interval: DyadicInterval) -> IntervalReport {
    let items = z.items();
    let in_i: Vec<usize> = (0..items.len())
        .filter(|&p| interval.contains(items[p].key))
        .collect();
    let side = |p: usize| {
        if interval.in_left(items[p].key) {
            Side::Left
        } else {
            Side::Right
        }
    };
    let in_l: Vec<usize> = in_i.iter().copied().filter(|&p| side(p) == Side::Left).collect();
    let in_r: Vec<usize> = in_i.iter().copied().filter(|&p| side(p) == Side::Right).collect();

    let mut alternations = 0;
    let mut monochromatic = 0;
    let mut changes_ll = 0;
    let mut changes_rr = 0;
    for w in in_i.windows(2) {
        let (a, b) = (w[0], w[1]);
        let straddles = side(a) != side(b);
        let mono = items[a].color == items[b].color;
        if straddles {
            alternations += 1;
            if mono {
                monochromatic += 1;
            }
        } else if !mono {
            if side(a) == Side::Left {
                changes_ll += 1;
            } else {
                changes_rr += 1;
            }
        }
    }
    let bichromatic = alternations - monochromatic;

    // position within Z|_I, for adjacency tests
    let mut rank = BTreeMap::new();
    for (i, &p) in in_i.iter().enumerate() {
        rank.insert(p, i);
    }
    let new_changes = |child: &[usize]| -> Vec<(usize, usize)> {
        child
            .windows(2)
            .filter(|w| items[w[0]].color != items[w[1]].color && rank[&w[1]] != rank[&w[0]] + 1)
            .map(|w| (w[0], w[1]))
            .collect()
    };
    let new_left = new_changes(&in_l);
    let new_right = new_changes(&in_r);

    // alternations in the monochromatic restrictions Z_r|_I, Z_b|_I
    let mono_alternations = |color: Color| -> Vec<(usize, usize)> {
        let seq: Vec<usize> = in_i.iter().copied().filter(|&p| items[p].color == color).collect();
        seq.windows(2)
            .filter(|w| side(w[0]) != side(w[1]))
            .map(|w| (w[0], w[1]))
            .collect()
    };
    let red_alts = mono_alternations(Color::Red);
    let blue_alts = mono_alternations(Color::Blue);

    let mut charges = Vec::new();
    for (side_tag, news) in [(Side::Left, &new_left), (Side::Right, &new_right)] {
        for &(u, v) in news.iter() {
            let gap = &in_i[rank[&u] + 1..rank[&v]];
            let cu = items[u].color;
            let charge = match gap.iter().find(|&&p| items[p].color == cu) {
                Some(&x) => Charge {
                    side: side_tag,
                    source: (u, v),
                    target: (u, x),
                    case: ChargeCase::SameColorInGap,
                },
                None => Charge {
                    side: side_tag,
                    source: (u, v),
                    target: (*gap.last().expect("non-adjacent pair has a gap"), v),
                    case: ChargeCase::GapOfOtherColor,
                },
            };
            charges.push(charge);
        }
    }
    let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for c in &charges {
        *counts.entry(c.target).or_default() += 1;
    }
    let max_preimages = counts.values().copied().max().unwrap_or(0);
    let targets_valid = charges.iter().all(|c| {
        let alts = match items[c.target.0].color {
            Color::Red => &red_alts,
            Color::Blue => &blue_alts,
        };
        alts.contains(&c.target)
    });

    IntervalReport {
        interval,
        alternations,
        monochromatic,
        bichromatic,
        changes: color_changes(items, &in_i),
        changes_left: color_changes(items, &in_l),
        changes_right: color_changes(items, &in_r),
        changes_ll,
        changes_rr,
        new_left,
        new_right,
        alternations_red: red_alts.len() as u64,
        alternations_blue: blue_alts.len() as u64,
        charges,
        max_preimages,
        targets_valid,
    }
}

/// Aggregate of the per-interval reports over every internal interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub intervals: Vec<IntervalReport>,
    pub sum_bichromatic: u64,
    pub sum_new: u64,
    /// `Σ M_I ≤ |Z| + Σ (|New_L| + |New_R|)`
    pub telescoping_holds: bool,
    pub identities_hold: bool,
    pub charging_holds: bool,
}

pub fn decompose(z: &ColoredSequence) -> Decomposition {
    let intervals: Vec<IntervalReport> = internal_intervals(z.n())
        .into_iter()
        .map(|i| alternation_decomposition(z, i))
        .collect();
    let sum_bichromatic = intervals.iter().map(|r| r.bichromatic).sum();
    let sum_new = intervals
        .iter()
        .map(|r| (r.new_left.len() + r.new_right.len()) as u64)
        .sum();
    let identities_hold = intervals.iter().all(|r| r.identity_holds() && r.split_holds());
    let charging_holds = intervals
        .iter()
        .all(|r| r.charging_holds() && r.max_preimages <= 2 && r.targets_valid);
    Decomposition {
        telescoping_holds: sum_bichromatic <= z.len() as u64 + sum_new,
        intervals,
        sum_bichromatic,
        sum_new,
        identities_hold,
        charging_holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Color::{Blue as B, Red as R};

    #[test]
    fn bound_examples() {
        assert_eq!(wilber_bound(&[1, 1, 1], 2), Ok(0));
        assert_eq!(wilber_bound(&[1, 2, 1, 2], 2), Ok(3));
        assert_eq!(wilber_bound(&[1, 3, 2, 4], 4), Ok(5));
        assert_eq!(wilber_bound(&[], 8), Ok(0));
        assert_eq!(
            wilber_bound(&[1, 5], 4),
            Err(WilberError::KeyOutOfRange {
                position: 1,
                key: 5,
                n: 4
            })
        );
        // n = 3 pads to 4
        assert_eq!(wilber_bound(&[1, 3, 2, 4], 3), Ok(5));
    }

    #[test]
    fn interleave_examples() {
        let z = interleave(&[1, 2], &[3, 4], 4).unwrap();
        assert_eq!(
            z,
            ColoredSequence::from_pairs(4, &[(1, R), (3, B), (2, R), (4, B)]).unwrap()
        );
        assert!(interleave(&[], &[], 4).unwrap().is_empty());
        assert_eq!(
            interleave(&[5], &[5], 8).unwrap().items(),
            &[Access { key: 5, color: R }, Access { key: 5, color: B }]
        );
        assert!(interleave(&[1], &[], 2).is_err());
    }

    #[test]
    fn split_examples() {
        let z = ColoredSequence::from_pairs(4, &[(1, R), (3, B), (2, R), (4, B)]).unwrap();
        assert_eq!(split_by_color(&z), (vec![1, 2], vec![3, 4]));
        let all_red = ColoredSequence::from_pairs(4, &[(1, R), (4, R)]).unwrap();
        assert_eq!(split_by_color(&all_red), (vec![1, 4], vec![]));
        let empty = ColoredSequence::new(4, vec![]).unwrap();
        assert_eq!(split_by_color(&empty), (vec![], vec![]));
    }

    #[test]
    fn merge_examples() {
        let z = interleave(&[1, 2], &[3, 4], 4).unwrap();
        let rep = merge_report(&z);
        assert_eq!((rep.w_merged, rep.w_red, rep.w_blue, rep.bound), (5, 1, 1, 10));
        assert!(rep.holds);
        let z = ColoredSequence::from_pairs(2, &[(1, R), (2, B), (1, R), (2, B)]).unwrap();
        let rep = merge_report(&z);
        assert_eq!((rep.w_merged, rep.bound), (3, 4));
        assert!(rep.holds);
    }

    #[test]
    fn decomposition_examples() {
        let root = DyadicInterval::root(4).unwrap();
        let z = ColoredSequence::from_pairs(4, &[(1, R), (3, B), (1, R)]).unwrap();
        let rep = alternation_decomposition(&z, root);
        assert_eq!(rep.changes, 2);
        assert_eq!(rep.bichromatic, 2);
        assert_eq!((rep.changes_ll, rep.changes_rr), (0, 0));
        assert!(rep.new_left.is_empty());
        assert!(rep.identity_holds());

        let z = ColoredSequence::from_pairs(4, &[(1, R), (3, B), (2, B), (1, R)]).unwrap();
        let rep = alternation_decomposition(&z, root);
        assert!(rep.identity_holds());
        // Z|_L = (1r, 2b, 1r): the first change (1r, 2b) is new, the second is inherited
        assert_eq!(rep.new_left, vec![(0, 2)]);
        assert_eq!(rep.charges[0].case, ChargeCase::GapOfOtherColor);
        assert_eq!(rep.charges[0].target, (1, 2));

        let mono = ColoredSequence::from_pairs(4, &[(1, R), (4, R), (2, R)]).unwrap();
        let rep = alternation_decomposition(&mono, root);
        assert_eq!(rep.bichromatic, 0);
        assert_eq!((rep.changes, rep.changes_left, rep.changes_right), (0, 0, 0));
    }

    #[test]
    fn dyadic_validation() {
        assert!(DyadicInterval::new(1, 4, 8).is_ok());
        assert!(DyadicInterval::new(5, 8, 8).is_ok());
        assert!(DyadicInterval::new(3, 6, 8).is_err());
        assert!(DyadicInterval::new(1, 1, 8).is_err());
        assert!(DyadicInterval::new(1, 16, 8).is_err());
        assert_eq!(internal_intervals(4).len(), 3);
        assert_eq!(internal_intervals(1).len(), 0);
    }
}
