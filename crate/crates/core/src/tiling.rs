//! Translational tilings of `G = ℤ × 𝕋` by finite unions of fibres
//! `{h} × J_h`, with every circle endpoint held as an exact surd.
//!
//! Intervals are half-open `[a, b)` throughout, so "disjoint up to null sets"
//! turns into exact endpoint bookkeeping.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::scalar::{rat, Rational, Surd, SurdError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TilingError {
    #[error(transparent)]
    Field(#[from] SurdError),
    #[error("interval [{start}, {end}) is reversed or longer than the circle")]
    BadInterval { start: Surd, end: Surd },
    #[error("input pieces overlap on [{start}, {end})")]
    Overlap { start: Surd, end: Surd },
    #[error("fibre at {0} is empty")]
    EmptyFiber(i64),
    #[error("support element {h} is not a multiple of q = {q}")]
    SupportNotInLattice { h: i64, q: u64 },
    #[error("spec has q = {q} but {betas} shifts β and {alphas} slopes α")]
    BadSpec { q: u64, betas: usize, alphas: usize },
    #[error("epsilon {0} is rational")]
    RationalEpsilon(Surd),
    #[error("epsilon {0} is outside (0, 1/3)")]
    EpsilonOutOfRange(Surd),
}

fn cmp(a: &Surd, b: &Surd) -> Ordering {
    a.compare(b).expect("field checked on entry")
}

fn max_surd<'a>(a: &'a Surd, b: &'a Surd) -> &'a Surd {
    if cmp(a, b) == Ordering::Less {
        b
    } else {
        a
    }
}

fn min_surd<'a>(a: &'a Surd, b: &'a Surd) -> &'a Surd {
    if cmp(a, b) == Ordering::Greater {
        b
    } else {
        a
    }
}

/// Radicand shared by all values; rationals fit any field.
pub fn common_field<'a>(values: impl IntoIterator<Item = &'a Surd>) -> Result<u64, SurdError> {
    let mut acc = Surd::zero();
    for v in values {
        let d = acc.common_field(v)?;
        if d != 0 && acc.d() == 0 {
            acc = v.clone();
        }
    }
    Ok(acc.d())
}

/// Disjoint, sorted, non-adjacent half-open arcs inside `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircleIntervalSet {
    pieces: Vec<(Surd, Surd)>,
}

impl CircleIntervalSet {
    pub fn empty() -> Self {
        CircleIntervalSet { pieces: Vec::new() }
    }

    pub fn full() -> Self {
        CircleIntervalSet {
            pieces: vec![(Surd::zero(), Surd::one())],
        }
    }

    /// Canonicalises real intervals `[a, b)` (with `a ≤ b ≤ a + 1`) taken mod 1.
    /// Overlapping input is an error; touching pieces merge.
    pub fn normalize(raw: &[(Surd, Surd)]) -> Result<Self, TilingError> {
        common_field(raw.iter().flat_map(|(a, b)| [a, b]))?;
        let one = Surd::one();
        let mut pieces = Vec::new();
        for (a, b) in raw {
            let len = b.checked_sub(a)?;
            if len.signum() == Ordering::Less || cmp(&len, &one) == Ordering::Greater {
                return Err(TilingError::BadInterval {
                    start: a.clone(),
                    end: b.clone(),
                });
            }
            if len.is_zero() {
                continue;
            }
            if len == one {
                pieces.push((Surd::zero(), one.clone()));
                continue;
            }
            let start = a.reduce_mod_1();
            let end = start.checked_add(&len)?;
            if cmp(&end, &one) == Ordering::Greater {
                pieces.push((start, one.clone()));
                pieces.push((Surd::zero(), end.checked_sub(&one)?));
            } else {
                pieces.push((start, end));
            }
        }
        pieces.sort_by(|x, y| cmp(&x.0, &y.0).then_with(|| cmp(&x.1, &y.1)));
        let mut merged: Vec<(Surd, Surd)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            if let Some(last) = merged.last_mut() {
                match cmp(&a, &last.1) {
                    Ordering::Less => {
                        return Err(TilingError::Overlap {
                            end: min_surd(&b, &last.1).clone(),
                            start: a,
                        })
                    }
                    Ordering::Equal => {
                        last.1 = b;
                        continue;
                    }
                    Ordering::Greater => {}
                }
            }
            merged.push((a, b));
        }
        Ok(CircleIntervalSet { pieces: merged })
    }

    pub fn pieces(&self) -> &[(Surd, Surd)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn field(&self) -> Result<u64, SurdError> {
        common_field(self.pieces.iter().flat_map(|(a, b)| [a, b]))
    }

    pub fn measure(&self) -> Surd {
        self.pieces.iter().fold(Surd::zero(), |acc, (a, b)| {
            &acc + &(b - a)
        })
    }

    /// Rotation by `delta` on the circle.
    pub fn shift_mod1(&self, delta: &Surd) -> Result<Self, TilingError> {
        let raw = self
            .pieces
            .iter()
            .map(|(a, b)| Ok((a.checked_add(delta)?, b.checked_add(delta)?)))
            .collect::<Result<Vec<_>, SurdError>>()?;
        Self::normalize(&raw)
    }

    /// Membership of the circle point `theta mod 1`.
    pub fn contains(&self, theta: &Surd) -> Result<bool, SurdError> {
        let t = theta.reduce_mod_1();
        for (a, b) in &self.pieces {
            if a.compare(&t)? != Ordering::Greater && t.compare(b)? == Ordering::Less {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CircleWitness {
    /// `[start, end)` lies in both `first` and `second` (indices into the input list).
    Overlap {
        first: usize,
        second: usize,
        start: Surd,
        end: Surd,
    },
    /// `[start, end)` lies in none of the sets.
    Uncovered { start: Surd, end: Surd },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CirclePartition {
    pub holds: bool,
    pub witness: Option<CircleWitness>,
}

/// Whether the sets are pairwise disjoint and cover `[0, 1)`.
pub fn is_circle_partition(sets: &[CircleIntervalSet]) -> Result<CirclePartition, TilingError> {
    common_field(sets.iter().flat_map(|s| s.pieces.iter().flat_map(|(a, b)| [a, b])))?;
    let mut tagged: Vec<(usize, &Surd, &Surd)> = sets
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.pieces.iter().map(move |(a, b)| (i, a, b)))
        .collect();
    tagged.sort_by(|x, y| cmp(x.1, y.1).then_with(|| x.0.cmp(&y.0)));
    let mut cursor = Surd::zero();
    let mut owner = None;
    for (i, a, b) in tagged {
        match cmp(a, &cursor) {
            Ordering::Less => {
                return Ok(CirclePartition {
                    holds: false,
                    witness: Some(CircleWitness::Overlap {
                        first: owner.expect("cursor advanced by some piece"),
                        second: i,
                        start: a.clone(),
                        end: min_surd(b, &cursor).clone(),
                    }),
                })
            }
            Ordering::Greater => {
                return Ok(CirclePartition {
                    holds: false,
                    witness: Some(CircleWitness::Uncovered {
                        start: cursor,
                        end: a.clone(),
                    }),
                })
            }
            Ordering::Equal => {
                cursor = max_surd(&cursor, b).clone();
                owner = Some(i);
            }
        }
    }
    if cmp(&cursor, &Surd::one()) == Ordering::Less {
        return Ok(CirclePartition {
            holds: false,
            witness: Some(CircleWitness::Uncovered {
                start: cursor,
                end: Surd::one(),
            }),
        });
    }
    Ok(CirclePartition {
        holds: true,
        witness: None,
    })
}

/// `A = ⋃_h {h} × A_h` with finitely many nonempty fibres.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnTile {
    fibers: BTreeMap<i64, CircleIntervalSet>,
}

impl ColumnTile {
    pub fn new(fibers: BTreeMap<i64, CircleIntervalSet>) -> Result<Self, TilingError> {
        if let Some((&h, _)) = fibers.iter().find(|(_, s)| s.is_empty()) {
            return Err(TilingError::EmptyFiber(h));
        }
        common_field(fibers.values().flat_map(|s| s.pieces.iter().flat_map(|(a, b)| [a, b])))?;
        Ok(ColumnTile { fibers })
    }

    pub fn fibers(&self) -> &BTreeMap<i64, CircleIntervalSet> {
        &self.fibers
    }

    pub fn support(&self) -> Vec<i64> {
        self.fibers.keys().copied().collect()
    }

    pub fn fiber(&self, h: i64) -> Option<&CircleIntervalSet> {
        self.fibers.get(&h)
    }

    /// Point membership of `(n, theta)`.
    pub fn contains(&self, n: i64, theta: &Surd) -> Result<bool, SurdError> {
        match self.fibers.get(&n) {
            Some(f) => f.contains(theta),
            None => Ok(false),
        }
    }
}

/// Translate set `T = ⋃_r {(qk + r, β_r + kα_r) : k ∈ ℤ}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingSpec {
    q: u64,
    beta: Vec<Surd>,
    alpha: Vec<Surd>,
}

impl TilingSpec {
    pub fn new(q: u64, beta: Vec<Surd>, alpha: Vec<Surd>) -> Result<Self, TilingError> {
        if q == 0 || beta.len() as u64 != q || alpha.len() as u64 != q {
            return Err(TilingError::BadSpec {
                q,
                betas: beta.len(),
                alphas: alpha.len(),
            });
        }
        common_field(beta.iter().chain(&alpha))?;
        Ok(TilingSpec { q, beta, alpha })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn beta(&self) -> &[Surd] {
        &self.beta
    }

    pub fn alpha(&self) -> &[Surd] {
        &self.alpha
    }

    /// The translate with index `k` in residue class `r`.
    pub fn translate(&self, r: usize, k: i64) -> (i64, Surd) {
        let shift = &self.beta[r] + &self.alpha[r].scale(&Rational::from_integer(BigInt::from(k)));
        (self.q as i64 * k + r as i64, shift.reduce_mod_1())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueReport {
    pub residue: usize,
    /// The shifted fibres `J_h − (h/q)·α_r`, in support order.
    pub shifted: Vec<(i64, CircleIntervalSet)>,
    pub partition: CirclePartition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplittingReport {
    pub holds: bool,
    pub residues: Vec<ResidueReport>,
}

/// Checks, for every residue `r`, that the rotated fibres `J_h − (h/q)α_r`
/// partition the circle. The conjunction is equivalent to `A ⊕ T = G`.
pub fn splitting_criterion(tile: &ColumnTile, spec: &TilingSpec) -> Result<SplittingReport, TilingError> {
    let q = spec.q as i64;
    if let Some(&h) = tile.fibers.keys().find(|&&h| h.rem_euclid(q) != 0) {
        return Err(TilingError::SupportNotInLattice { h, q: spec.q });
    }
    let mut residues = Vec::with_capacity(spec.q as usize);
    for (r, alpha) in spec.alpha.iter().enumerate() {
        let shifted = tile
            .fibers
            .iter()
            .map(|(&h, fiber)| {
                let delta = -alpha.scale(&Rational::from_integer(BigInt::from(h / q)));
                Ok((h, fiber.shift_mod1(&delta)?))
            })
            .collect::<Result<Vec<_>, TilingError>>()?;
        let sets: Vec<CircleIntervalSet> = shifted.iter().map(|(_, s)| s.clone()).collect();
        let partition = is_circle_partition(&sets)?;
        residues.push(ResidueReport {
            residue: r,
            shifted,
            partition,
        });
    }
    Ok(SplittingReport {
        holds: residues.iter().all(|r| r.partition.holds),
        residues,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnCheck {
    pub measures: Vec<(i64, Surd)>,
    /// `k` with every fibre of measure `1/k`, when one exists.
    pub k: Option<BigInt>,
    pub passes: bool,
}

/// Necessary condition for a column tile: all fibres have measure `1/k` for one
/// positive integer `k`. Failure certifies that the set is not a column tile.
pub fn column_tile_necessary_check(tile: &ColumnTile) -> ColumnCheck {
    let measures: Vec<(i64, Surd)> = tile.fibers.iter().map(|(&h, f)| (h, f.measure())).collect();
    let k = measures.first().and_then(|(_, m0)| {
        if measures.iter().any(|(_, m)| m != m0) {
            return None;
        }
        let v = m0.to_rational()?;
        (v.is_positive() && v.numer().is_one()).then(|| v.denom().clone())
    });
    ColumnCheck {
        passes: k.is_some(),
        measures,
        k,
    }
}

/// The three-fibre tile `{0}×[ε,2ε) ∪ {2}×[2ε,1) ∪ {4}×[0,ε)` with translates
/// `(2k, 0)` and `(2k+1, k(1−ε))`.
pub fn build_alpha_construction(eps: &Surd) -> Result<(ColumnTile, TilingSpec), TilingError> {
    if eps.is_rational() {
        return Err(TilingError::RationalEpsilon(eps.clone()));
    }
    let third = Surd::from_rational(&rat(1, 3));
    if eps.signum() != Ordering::Greater || eps.compare(&third)? != Ordering::Less {
        return Err(TilingError::EpsilonOutOfRange(eps.clone()));
    }
    let two_eps = eps.scale(&rat(2, 1));
    let fibers = BTreeMap::from([
        (0, CircleIntervalSet::normalize(&[(eps.clone(), two_eps.clone())])?),
        (2, CircleIntervalSet::normalize(&[(two_eps, Surd::one())])?),
        (4, CircleIntervalSet::normalize(&[(Surd::zero(), eps.clone())])?),
    ]);
    let alpha = &Surd::one() - eps;
    let spec = TilingSpec::new(2, vec![Surd::zero(), Surd::zero()], vec![Surd::zero(), alpha])?;
    Ok((ColumnTile::new(fibers)?, spec))
}

/// Number of translates `A + t`, `t ∈ T`, containing the point `(j, theta)`,
/// found by scanning every residue class and every fibre.
pub fn coverage_count(tile: &ColumnTile, spec: &TilingSpec, j: i64, theta: &Surd) -> Result<usize, SurdError> {
    let q = spec.q as i64;
    let mut count = 0;
    for r in 0..spec.q as usize {
        for &h in tile.fibers.keys() {
            let offset = j - r as i64 - h;
            if offset.rem_euclid(q) != 0 {
                continue;
            }
            let (n, shift) = spec.translate(r, offset.div_euclid(q));
            debug_assert_eq!(n + h, j);
            if tile.contains(h, &theta.checked_sub(&shift)?)? {
                count += 1;
            }
        }
    }
    Ok(count)
}
