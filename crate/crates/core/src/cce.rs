//! A two-action game on ordered pairs whose small-support coarse correlated
//! equilibria are forced to be large, with exact regret evaluation.
//!
//! Players are `(i, j)` with `1 ≤ i ≠ j ≤ s`, indexed in lexicographic order.
//! An action profile stores one sign per player as a bitmask (bit set = −1).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::scalar::{ln2_upper, log2_bounds, rat_int, Rational};

/// Profiles are `u64` bitmasks, so at most 64 players (s ≤ 8).
pub const MAX_S: usize = 8;
/// Brute-force search enumerates all `2^n` profiles; n ≤ 8.
pub const MAX_SEARCH_PLAYERS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CceError {
    #[error("s = {0} is outside [2, {MAX_S}]")]
    BadS(usize),
    #[error("distribution is empty")]
    EmptyDistribution,
    #[error("profile has {got} actions, game has {expected} players")]
    ProfileLength { expected: usize, got: usize },
    #[error("action {0} is not ±1")]
    BadAction(i64),
    #[error("player index {0} out of range")]
    PlayerOutOfRange(usize),
    #[error("game has {0} players; exhaustive search is limited to {MAX_SEARCH_PLAYERS}")]
    SearchTooLarge(usize),
    #[error("m, n must be ≥ 1 and epsilon > 0")]
    BadBoundInput,
}

pub type Player = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSpec {
    s: usize,
    players: Vec<Player>,
    /// Per player `(i, j)`: index of `(j, i)`.
    partner: Vec<usize>,
    /// Per player: the player indices in `S_{i,j}`.
    cross: Vec<Vec<usize>>,
}

impl GameSpec {
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.players.len()
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn index_of(&self, player: Player) -> Option<usize> {
        self.players.binary_search(&player).ok()
    }

    pub fn partner(&self, idx: usize) -> usize {
        self.partner[idx]
    }

    /// `S_i = {(i, j) : j ≠ i}` as player indices.
    pub fn s_set(&self, i: usize) -> Vec<usize> {
        (0..self.n()).filter(|&p| self.players[p].0 == i).collect()
    }

    /// `S_{i,j} = (S_i Δ S_j) \ {(i,j), (j,i)}` as player indices.
    pub fn cross_set(&self, idx: usize) -> &[usize] {
        &self.cross[idx]
    }
}

pub fn build_game(s: usize) -> Result<GameSpec, CceError> {
    if !(2..=MAX_S).contains(&s) {
        return Err(CceError::BadS(s));
    }
    let players: Vec<Player> = (1..=s)
        .flat_map(|i| (1..=s).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let index = |p: Player| players.binary_search(&p).expect("player exists");
    let mut partner = Vec::with_capacity(players.len());
    let mut cross = Vec::with_capacity(players.len());
    for &(i, j) in &players {
        partner.push(index((j, i)));
        let set: BTreeSet<usize> = (0..players.len())
            .filter(|&p| {
                let (a, b) = players[p];
                (a == i) != (a == j) && (a, b) != (i, j) && (a, b) != (j, i)
            })
            .collect();
        cross.push(set.into_iter().collect());
    }
    Ok(GameSpec {
        s,
        players,
        partner,
        cross,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionProfile {
    minus: u64,
}

impl ActionProfile {
    pub fn all_plus() -> Self {
        ActionProfile { minus: 0 }
    }

    /// Bit `p` set means player `p` plays −1.
    pub fn from_mask(minus: u64) -> Self {
        ActionProfile { minus }
    }

    pub fn from_signs(signs: &[i64]) -> Result<Self, CceError> {
        let mut minus = 0u64;
        for (p, &a) in signs.iter().enumerate() {
            match a {
                1 => {}
                -1 => minus |= 1 << p,
                other => return Err(CceError::BadAction(other)),
            }
        }
        Ok(ActionProfile { minus })
    }

    pub fn mask(&self) -> u64 {
        self.minus
    }

    pub fn get(&self, p: usize) -> i64 {
        if self.minus >> p & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn with(&self, p: usize, action: i64) -> Self {
        let minus = if action < 0 {
            self.minus | 1 << p
        } else {
            self.minus & !(1 << p)
        };
        ActionProfile { minus }
    }

    pub fn signs(&self, n: usize) -> Vec<i64> {
        (0..n).map(|p| self.get(p)).collect()
    }
}

/// `P = (1/k) Σ_t a^t`; profiles may repeat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformDistribution {
    profiles: Vec<ActionProfile>,
}

impl UniformDistribution {
    pub fn new(profiles: Vec<ActionProfile>) -> Result<Self, CceError> {
        if profiles.is_empty() {
            return Err(CceError::EmptyDistribution);
        }
        Ok(UniformDistribution { profiles })
    }

    /// Every profile of an `n`-player game once.
    pub fn all_profiles(n: usize) -> Self {
        UniformDistribution {
            profiles: (0..1u64 << n).map(ActionProfile::from_mask).collect(),
        }
    }

    pub fn profiles(&self) -> &[ActionProfile] {
        &self.profiles
    }

    pub fn k(&self) -> usize {
        self.profiles.len()
    }
}

/// `χ_T(a) = Π_{p ∈ T} a_p`; the empty product is +1.
pub fn chi(set: &[usize], a: &ActionProfile) -> i64 {
    let mask = set.iter().fold(0u64, |m, &p| m | 1 << p);
    parity_sign(a.minus & mask)
}

fn parity_sign(bits: u64) -> i64 {
    if bits.count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `(1 + a_{ij} a_{ji} χ_{S_{ij}}(a)) / 2` for `i < j`, with the sign flipped for `i > j`.
pub fn payoff(game: &GameSpec, player: usize, a: &ActionProfile) -> i64 {
    let (i, j) = game.players[player];
    let prod = a.get(player) * a.get(game.partner[player]) * chi(&game.cross[player], a);
    if i < j {
        (1 + prod) / 2
    } else {
        (1 - prod) / 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegretReport {
    pub max_regret: Rational,
    /// Player and deviation attaining the maximum (first in player order, −1 before +1).
    pub player: usize,
    pub deviation: i64,
    /// Average regret per player and deviation `[−1, +1]`.
    pub per_player: Vec<[Rational; 2]>,
}

impl RegretReport {
    pub fn is_epsilon_cce(&self, eps: &Rational) -> bool {
        &self.max_regret <= eps
    }
}

/// Exact `max_{i, a'_i} E_P[u_i(a'_i; a_{−i}) − u_i(a)]`.
pub fn max_regret(game: &GameSpec, dist: &UniformDistribution) -> RegretReport {
    let k = BigInt::from(dist.k());
    let mut per_player = Vec::with_capacity(game.n());
    let mut best: Option<(Rational, usize, i64)> = None;
    for p in 0..game.n() {
        let mut pair = [Rational::zero(), Rational::zero()];
        for (slot, dev) in [-1i64, 1].into_iter().enumerate() {
            let total: i64 = dist
                .profiles
                .iter()
                .map(|a| payoff(game, p, &a.with(p, dev)) - payoff(game, p, a))
                .sum();
            let r = Rational::new(BigInt::from(total), k.clone());
            if best.as_ref().map_or(true, |(b, _, _)| &r > b) {
                best = Some((r.clone(), p, dev));
            }
            pair[slot] = r;
        }
        per_player.push(pair);
    }
    let (max_regret, player, deviation) = best.expect("game has players");
    RegretReport {
        max_regret,
        player,
        deviation,
        per_player,
    }
}

pub fn is_epsilon_cce(game: &GameSpec, dist: &UniformDistribution, eps: &Rational) -> bool {
    max_regret(game, dist).is_epsilon_cce(eps)
}

fn expectation(dist: &UniformDistribution, f: impl Fn(&ActionProfile) -> i64) -> Rational {
    let total: i64 = dist.profiles.iter().map(f).sum();
    Rational::new(BigInt::from(total), BigInt::from(dist.k()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationReport {
    /// Per player `(i,j)`: `E[a_{ij} a_{ji} χ_{S_{ij}}]`.
    pub per_player: Vec<Rational>,
    /// Per pair `i < j` (1-indexed): `E[χ_{S_i Δ S_j}]`.
    pub per_pair: Vec<((usize, usize), Rational)>,
    /// Whether each pair value equals the value of player `(i, j)`.
    pub identity_holds: bool,
}

impl CorrelationReport {
    /// Largest absolute value over players and pairs.
    pub fn max_abs(&self) -> Rational {
        self.per_player
            .iter()
            .chain(self.per_pair.iter().map(|(_, v)| v))
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

pub fn correlation_report(game: &GameSpec, dist: &UniformDistribution) -> CorrelationReport {
    let per_player: Vec<Rational> = (0..game.n())
        .map(|p| {
            expectation(dist, |a| {
                a.get(p) * a.get(game.partner[p]) * chi(&game.cross[p], a)
            })
        })
        .collect();
    let mut per_pair = Vec::new();
    let mut identity_holds = true;
    for i in 1..=game.s {
        for j in i + 1..=game.s {
            let si: BTreeSet<usize> = game.s_set(i).into_iter().collect();
            let sj: BTreeSet<usize> = game.s_set(j).into_iter().collect();
            let delta: Vec<usize> = si.symmetric_difference(&sj).copied().collect();
            let v = expectation(dist, |a| chi(&delta, a));
            let p = game.index_of((i, j)).expect("player exists");
            identity_holds &= v == per_player[p];
            per_pair.push(((i, j), v));
        }
    }
    CorrelationReport {
        per_player,
        per_pair,
        identity_holds,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignaturePair {
    pub first: usize,
    pub second: usize,
    pub inner_product: i64,
    pub hamming: usize,
    /// `|v·v'| = |k − 2·d_H|`
    pub identity_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureReport {
    pub vectors: Vec<Vec<i64>>,
    pub pairs: Vec<SignaturePair>,
}

/// `v_ℓ = (χ_{R_ℓ}(a^1), …, χ_{R_ℓ}(a^k))` for each set, with pairwise inner
/// products and Hamming distances.
pub fn signature_vectors(dist: &UniformDistribution, sets: &[Vec<usize>]) -> SignatureReport {
    let vectors: Vec<Vec<i64>> = sets
        .iter()
        .map(|r| dist.profiles.iter().map(|a| chi(r, a)).collect())
        .collect();
    let k = dist.k() as i64;
    let mut pairs = Vec::new();
    for l in 0..vectors.len() {
        for m in l + 1..vectors.len() {
            let inner_product: i64 = vectors[l].iter().zip(&vectors[m]).map(|(x, y)| x * y).sum();
            let hamming = vectors[l].iter().zip(&vectors[m]).filter(|(x, y)| x != y).count();
            pairs.push(SignaturePair {
                first: l,
                second: m,
                inner_product,
                hamming,
                identity_holds: inner_product.abs() == (k - 2 * hamming as i64).abs(),
            });
        }
    }
    SignatureReport { vectors, pairs }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinSupport {
    pub k: usize,
    /// Colex-first multiset of profiles achieving the bound, sorted.
    pub witness: Vec<ActionProfile>,
    pub max_regret: Rational,
}

/// Smallest `k ≤ k_max` with a `k`-uniform `ε`-CCE, by exhaustive colex
/// enumeration of size-`k` multisets of profiles.
pub fn brute_min_k(game: &GameSpec, eps: &Rational, k_max: usize) -> Result<Option<MinSupport>, CceError> {
    let n = game.n();
    if n > MAX_SEARCH_PLAYERS {
        return Err(CceError::SearchTooLarge(n));
    }
    let profiles = 1usize << n;
    // u_p(a) = (1 + σ_p a_p x_p(a)) / 2 with x_p independent of a_p, so the best
    // deviation gains (|Σx_p| − σ_p Σ a_p x_p) / 2k.
    let mut x = vec![vec![0i64; n]; profiles];
    let mut ax = vec![vec![0i64; n]; profiles];
    let sigma: Vec<i64> = game
        .players
        .iter()
        .map(|&(i, j)| if i < j { 1 } else { -1 })
        .collect();
    for mask in 0..profiles {
        let a = ActionProfile::from_mask(mask as u64);
        for p in 0..n {
            x[mask][p] = a.get(game.partner[p]) * chi(&game.cross[p], &a);
            ax[mask][p] = a.get(p) * x[mask][p];
        }
    }
    let (num, den) = (eps.numer(), eps.denom());
    for k in 1..=k_max {
        let bound = BigInt::from(2 * k as i64) * num;
        let mut combo = vec![0usize; k];
        loop {
            let mut worst = i64::MIN;
            for p in 0..n {
                let sx: i64 = combo.iter().map(|&c| x[c][p]).sum();
                let sax: i64 = combo.iter().map(|&c| ax[c][p]).sum();
                worst = worst.max(sx.abs() - sigma[p] * sax);
            }
            if BigInt::from(worst) * den <= bound {
                let witness: Vec<ActionProfile> =
                    combo.iter().map(|&c| ActionProfile::from_mask(c as u64)).collect();
                let max_regret = Rational::new(BigInt::from(worst), BigInt::from(2 * k as i64));
                return Ok(Some(MinSupport {
                    k,
                    witness,
                    max_regret,
                }));
            }
            if !next_multiset_colex(&mut combo, profiles) {
                break;
            }
        }
    }
    Ok(None)
}

/// Advances a nondecreasing sequence over `[0, universe)` to its colex successor.
pub fn next_multiset_colex(combo: &mut [usize], universe: usize) -> bool {
    let len = combo.len();
    for i in 0..len {
        let cap = if i + 1 < len { combo[i + 1] } else { universe - 1 };
        if combo[i] < cap {
            combo[i] += 1;
            for c in combo[..i].iter_mut() {
                *c = 0;
            }
            return true;
        }
    }
    false
}

/// Certified rational upper bound on `2(ln m + ln n)/ε²`.
pub fn babichenko_upper_bound(m: u64, n: u64, eps: &Rational) -> Result<Rational, CceError> {
    if m == 0 || n == 0 || !eps.is_positive() {
        return Err(CceError::BadBoundInput);
    }
    let mn = BigInt::from(m) * BigInt::from(n);
    let ln_upper = if mn == BigInt::from(1) {
        Rational::zero()
    } else {
        let (_, hi) = log2_bounds(&Rational::from_integer(mn), 40);
        hi * ln2_upper()
    };
    Ok(rat_int(2) * ln_upper / (eps * eps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn prof(signs: &[i64]) -> ActionProfile {
        ActionProfile::from_signs(signs).unwrap()
    }

    #[test]
    fn game_shapes() {
        let g = build_game(2).unwrap();
        assert_eq!(g.players(), &[(1, 2), (2, 1)]);
        assert!(g.cross_set(0).is_empty());
        assert_eq!(build_game(3).unwrap().n(), 6);
        let g4 = build_game(4).unwrap();
        assert_eq!(g4.cross_set(g4.index_of((1, 2)).unwrap()).len(), 4);
        assert_eq!(build_game(1), Err(CceError::BadS(1)));
    }

    #[test]
    fn chi_examples() {
        let a = prof(&[-1, -1, 1]);
        assert_eq!(chi(&[], &a), 1);
        assert_eq!(chi(&[0], &a), -1);
        assert_eq!(chi(&[0, 1, 2], &a), 1);
    }

    #[test]
    fn payoff_examples() {
        let g = build_game(2).unwrap();
        let pp = prof(&[1, 1]);
        assert_eq!((payoff(&g, 0, &pp), payoff(&g, 1, &pp)), (1, 0));
        let pm = prof(&[1, -1]);
        assert_eq!((payoff(&g, 0, &pm), payoff(&g, 1, &pm)), (0, 1));
    }

    #[test]
    fn regret_examples() {
        let g = build_game(2).unwrap();
        let all = UniformDistribution::all_profiles(2);
        assert_eq!(max_regret(&g, &all).max_regret, Rational::zero());
        let one = UniformDistribution::new(vec![prof(&[1, 1])]).unwrap();
        let r = max_regret(&g, &one);
        assert_eq!(r.max_regret, rat(1, 1));
        assert_eq!((r.player, r.deviation), (1, -1));
        assert!(r.is_epsilon_cce(&rat(1, 1)));
        assert!(!r.is_epsilon_cce(&rat(1, 2)));
    }

    #[test]
    fn correlation_examples() {
        let g = build_game(2).unwrap();
        let rep = correlation_report(&g, &UniformDistribution::all_profiles(2));
        assert!(rep.per_player.iter().all(|v| v.is_zero()));
        assert!(rep.identity_holds);
        let rep = correlation_report(&g, &UniformDistribution::new(vec![prof(&[1, 1])]).unwrap());
        assert_eq!(rep.per_player[0], rat(1, 1));
    }

    #[test]
    fn signature_examples() {
        let dist = UniformDistribution::new(vec![prof(&[1, -1]), prof(&[-1, -1]), prof(&[1, 1])]).unwrap();
        let rep = signature_vectors(&dist, &[vec![], vec![], vec![0]]);
        assert_eq!(rep.vectors[0], vec![1, 1, 1]);
        assert_eq!(rep.pairs[0].inner_product, 3);
        assert_eq!(rep.pairs[0].hamming, 0);
        assert!(rep.pairs.iter().all(|p| p.identity_holds));
    }

    #[test]
    fn min_support_small() {
        let g = build_game(2).unwrap();
        assert_eq!(brute_min_k(&g, &rat(1, 1), 4).unwrap().unwrap().k, 1);
        let half = brute_min_k(&g, &rat(1, 2), 4).unwrap().unwrap();
        assert_eq!(half.k, 2);
        let dist = UniformDistribution::new(half.witness.clone()).unwrap();
        assert_eq!(max_regret(&g, &dist).max_regret, half.max_regret);
        assert!(matches!(
            brute_min_k(&build_game(4).unwrap(), &rat(1, 2), 2),
            Err(CceError::SearchTooLarge(12))
        ));
    }

    #[test]
    fn colex_multisets() {
        let mut c = vec![0, 0];
        let mut seen = vec![c.clone()];
        while next_multiset_colex(&mut c, 3) {
            seen.push(c.clone());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![1, 1],
                vec![0, 2],
                vec![1, 2],
                vec![2, 2]
            ]
        );
    }

    #[test]
    fn upper_bound() {
        assert_eq!(babichenko_upper_bound(1, 1, &rat(1, 3)).unwrap(), Rational::zero());
        let b = babichenko_upper_bound(2, 2, &rat(1, 1)).unwrap();
        // 4 ln 2 = 2.7725887…
        assert!(b >= rat(27_725_887, 10_000_000));
        assert!(b < rat(2_773, 1_000));
        let mut prev = Rational::zero();
        for n in 1..50 {
            let v = babichenko_upper_bound(2, n, &rat(1, 4)).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }
}
