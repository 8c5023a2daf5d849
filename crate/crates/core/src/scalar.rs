//! Exact scalars: arbitrary-precision rationals and quadratic surds `(p + q·√d) / r`.
//!
//! Every comparison and field operation here reduces to integer sign tests, so
//! downstream checks (interval disjointness, regret bounds, LP pivots) are
//! bit-exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational, always stored reduced with a positive denominator.
pub type Rational = BigRational;

/// Shorthand for building a rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurdError {
    #[error("incomparable field: operands live in Q(sqrt {left}) and Q(sqrt {right})")]
    IncomparableField { left: u64, right: u64 },
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("radicand {0} is not square-free")]
    NotSquareFree(u64),
}

/// A real number `(p + q·√d) / r` with `r > 0`.
///
/// Canonical form: `d` is square-free and at least 2 whenever `q ≠ 0`; a
/// rational value always has `q = 0` and `d = 0`; `gcd(p, q, r) = 1`. Equality
/// is therefore structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    p: BigInt,
    q: BigInt,
    r: BigInt,
    d: u64,
}

pub fn is_square_free(d: u64) -> bool {
    if d < 4 {
        return true;
    }
    let mut f = 2u64;
    while f * f <= d {
        if d % (f * f) == 0 {
            return false;
        }
        f += 1;
    }
    true
}

impl Surd {
    /// Builds `(p + q·√d) / r`. Fails on `r = 0` or a radicand with a square factor.
    pub fn new(
        p: impl Into<BigInt>,
        q: impl Into<BigInt>,
        r: impl Into<BigInt>,
        d: u64,
    ) -> Result<Self, SurdError> {
        let (p, q, r) = (p.into(), q.into(), r.into());
        if r.is_zero() {
            return Err(SurdError::ZeroDenominator);
        }
        if !is_square_free(d) {
            return Err(SurdError::NotSquareFree(d));
        }
        Ok(Self::canonical(p, q, r, d))
    }

    fn canonical(mut p: BigInt, mut q: BigInt, mut r: BigInt, mut d: u64) -> Self {
        match d {
            0 => q = BigInt::zero(),
            1 => {
                p += &q;
                q = BigInt::zero();
            }
            _ => {}
        }
        if q.is_zero() {
            d = 0;
        }
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_one() && !g.is_zero() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        Surd { p, q, r, d }
    }

    pub fn from_rational(v: &Rational) -> Self {
        Self::canonical(v.numer().clone(), BigInt::zero(), v.denom().clone(), 0)
    }

    pub fn from_int(v: i64) -> Self {
        Self::canonical(BigInt::from(v), BigInt::zero(), BigInt::one(), 0)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `q·√d / r`, e.g. `Surd::sqrt_term(1, 5, 2)` is `√2/5`.
    pub fn sqrt_term(q: i64, r: i64, d: u64) -> Result<Self, SurdError> {
        Self::new(0, q, r, d)
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn r(&self) -> &BigInt {
        &self.r
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn to_rational(&self) -> Option<Rational> {
        self.is_rational()
            .then(|| Rational::new(self.p.clone(), self.r.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    /// Shared radicand of two operands, or an error if both are irrational over different fields.
    pub fn common_field(&self, other: &Surd) -> Result<u64, SurdError> {
        match (self.d, other.d) {
            (0, d) | (d, 0) => Ok(d),
            (a, b) if a == b => Ok(a),
            (a, b) => Err(SurdError::IncomparableField { left: a, right: b }),
        }
    }

    pub fn checked_add(&self, other: &Surd) -> Result<Surd, SurdError> {
        let d = self.common_field(other)?;
        Ok(Self::canonical(
            &self.p * &other.r + &other.p * &self.r,
            &self.q * &other.r + &other.q * &self.r,
            &self.r * &other.r,
            d,
        ))
    }

    pub fn checked_sub(&self, other: &Surd) -> Result<Surd, SurdError> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Surd) -> Result<Surd, SurdError> {
        let d = self.common_field(other)?;
        let dd = BigInt::from(d);
        Ok(Self::canonical(
            &self.p * &other.p + &self.q * &other.q * &dd,
            &self.p * &other.q + &self.q * &other.p,
            &self.r * &other.r,
            d,
        ))
    }

    pub fn scale(&self, k: &Rational) -> Surd {
        Self::canonical(
            &self.p * k.numer(),
            &self.q * k.numer(),
            &self.r * k.denom(),
            self.d,
        )
    }

    fn neg_ref(&self) -> Surd {
        Surd {
            p: -&self.p,
            q: -&self.q,
            r: self.r.clone(),
            d: self.d,
        }
    }

    /// Sign of the real value, decided by squaring when `p` and `q·√d` disagree.
    pub fn signum(&self) -> Ordering {
        let ps = self.p.sign();
        let qs = self.q.sign();
        match (ps, qs) {
            (Sign::NoSign, Sign::NoSign) => Ordering::Equal,
            (s, Sign::NoSign) | (Sign::NoSign, s) => sign_to_ord(s),
            (a, b) if a == b => sign_to_ord(a),
            (a, _) => {
                let p2 = &self.p * &self.p;
                let q2d = &self.q * &self.q * BigInt::from(self.d);
                // q ≠ 0 and d square-free ≥ 2, so p² = q²d is impossible
                match p2.cmp(&q2d) {
                    Ordering::Greater => sign_to_ord(a),
                    _ => sign_to_ord(a).reverse(),
                }
            }
        }
    }

    /// Exact ordering of real values.
    pub fn compare(&self, other: &Surd) -> Result<Ordering, SurdError> {
        Ok(self.checked_sub(other)?.signum())
    }

    /// Greatest integer not above the value.
    pub fn floor(&self) -> BigInt {
        // t = floor(q·√d)
        let t = if self.q.is_zero() {
            BigInt::zero()
        } else {
            let s = (&self.q * &self.q * BigInt::from(self.d)).sqrt();
            if self.q.is_negative() {
                -s - 1
            } else {
                s
            }
        };
        let mut f = (&self.p + t).div_floor(&self.r);
        loop {
            let next = Surd::canonical(&f + 1, BigInt::zero(), BigInt::one(), 0);
            if self.compare(&next).expect("rational operand") == Ordering::Less {
                break;
            }
            f += 1;
        }
        loop {
            let cur = Surd::canonical(f.clone(), BigInt::zero(), BigInt::one(), 0);
            if self.compare(&cur).expect("rational operand") != Ordering::Less {
                break;
            }
            f -= 1;
        }
        f
    }

    /// The value translated by an integer into `[0, 1)`.
    pub fn reduce_mod_1(&self) -> Surd {
        let f = self.floor();
        Self::canonical(&self.p - f * &self.r, self.q.clone(), self.r.clone(), self.d)
    }

    pub fn to_f64(&self) -> f64 {
        let p = self.p.to_f64().unwrap_or(f64::NAN);
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        let r = self.r.to_f64().unwrap_or(f64::NAN);
        (p + q * (self.d as f64).sqrt()) / r
    }
}

fn sign_to_ord(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

impl fmt::Debug for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            if self.r.is_one() {
                write!(f, "{}", self.p)
            } else {
                write!(f, "{}/{}", self.p, self.r)
            }
        } else {
            let sign = if self.q.is_negative() { '-' } else { '+' };
            let mag = self.q.abs();
            let head = if self.p.is_zero() {
                if self.q.is_negative() {
                    "-".to_string()
                } else {
                    String::new()
                }
            } else {
                format!("{}{}", self.p, sign)
            };
            let coef = if mag.is_one() {
                String::new()
            } else {
                mag.to_string()
            };
            if self.r.is_one() {
                write!(f, "{head}{coef}√{}", self.d)
            } else if self.p.is_zero() {
                write!(f, "{head}{coef}√{}/{}", self.d, self.r)
            } else {
                write!(f, "({head}{coef}√{})/{}", self.d, self.r)
            }
        }
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        self.neg_ref()
    }
}

impl Neg for &Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        self.neg_ref()
    }
}

// The operator impls panic on mixed fields; callers that cannot rule that out
// use the `checked_*` forms.
impl Add for &Surd {
    type Output = Surd;
    fn add(self, rhs: &Surd) -> Surd {
        self.checked_add(rhs).expect("surd addition across fields")
    }
}

impl Sub for &Surd {
    type Output = Surd;
    fn sub(self, rhs: &Surd) -> Surd {
        self.checked_sub(rhs).expect("surd subtraction across fields")
    }
}

impl Mul for &Surd {
    type Output = Surd;
    fn mul(self, rhs: &Surd) -> Surd {
        self.checked_mul(rhs).expect("surd multiplication across fields")
    }
}

impl From<&Rational> for Surd {
    fn from(v: &Rational) -> Self {
        Surd::from_rational(v)
    }
}

impl From<i64> for Surd {
    fn from(v: i64) -> Self {
        Surd::from_int(v)
    }
}

/// Operation selector mirroring the field operations exposed over `Q(√d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurdOp {
    Add,
    Sub,
    Mul,
    Neg,
    ReduceMod1,
}

/// Applies `op`; unary operations ignore `y`.
pub fn surd_arith(x: &Surd, y: &Surd, op: SurdOp) -> Result<Surd, SurdError> {
    match op {
        SurdOp::Add => x.checked_add(y),
        SurdOp::Sub => x.checked_sub(y),
        SurdOp::Mul => x.checked_mul(y),
        SurdOp::Neg => Ok(-x),
        SurdOp::ReduceMod1 => Ok(x.reduce_mod_1()),
    }
}

pub fn surd_compare(x: &Surd, y: &Surd) -> Result<Ordering, SurdError> {
    x.compare(y)
}

/// Certified bounds `lo ≤ log₂(x) ≤ hi` for a positive rational, with
/// `hi − lo ≤ 2^(1 − frac_bits)`.
///
/// Works by repeated squaring in fixed point, rounding down for the lower
/// chain and up for the upper chain, so no floating point is involved.
pub fn log2_bounds(x: &Rational, frac_bits: u32) -> (Rational, Rational) {
    assert!(x.is_positive(), "log2 of a non-positive number");
    if x < &Rational::one() {
        let (lo, hi) = log2_bounds(&x.recip(), frac_bits);
        return (-hi, -lo);
    }
    // integer part e with 2^e ≤ x < 2^(e+1)
    let (num, den) = (x.numer(), x.denom());
    let mut e = num.bits() as i64 - den.bits() as i64;
    let pow = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(BigInt::one() << k as usize)
        } else {
            Rational::new(BigInt::one(), BigInt::one() << (-k) as usize)
        }
    };
    while &pow(e) > x {
        e -= 1;
    }
    while &pow(e + 1) <= x {
        e += 1;
    }
    let y = x / pow(e);
    if y.is_one() {
        let v = Rational::from_integer(BigInt::from(e));
        return (v.clone(), v);
    }
    // fixed point with `prec` fractional bits
    let prec = frac_bits as usize + 16;
    let scale = BigInt::one() << prec;
    let two = BigInt::from(2) << prec;
    let scaled = y.numer() * &scale;
    let mut lo = scaled.div_floor(y.denom());
    let mut hi = scaled.div_ceil(y.denom());
    let mut n_lo = BigInt::zero();
    let mut n_hi = BigInt::zero();
    for _ in 0..frac_bits {
        lo = (&lo * &lo) >> prec;
        let sq = &hi * &hi;
        hi = (&sq >> prec) + if (&sq & (&scale - 1u32)).is_zero() { 0 } else { 1 };
        n_lo <<= 1;
        n_hi <<= 1;
        if lo >= two {
            lo >>= 1;
            n_lo += 1;
        }
        while hi >= two {
            hi = (&hi + 1u32) >> 1;
            n_hi += 1;
        }
    }
    let denom = BigInt::one() << frac_bits as usize;
    let base = Rational::from_integer(BigInt::from(e));
    (
        &base + Rational::new(n_lo, denom.clone()),
        base + Rational::new(n_hi + 1, denom),
    )
}

/// Over-approximation of `ln 2` (= 0.693147180…).
pub fn ln2_upper() -> Rational {
    rat(6_931_472, 10_000_000)
}

/// Under-approximation of `ln 2`.
pub fn ln2_lower() -> Rational {
    rat(6_931_471, 10_000_000)
}

/// Over-approximation of `1/ln 2` (= 1.442695…).
pub fn inv_ln2_upper() -> Rational {
    rat(14_427, 10_000)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: i64, q: i64, r: i64, d: u64) -> Surd {
        Surd::new(p, q, r, d).unwrap()
    }

    #[test]
    fn canonical_form() {
        assert_eq!(s(2, 0, 2, 2), Surd::one());
        assert_eq!(s(2, 4, 6, 2), s(1, 2, 3, 2));
        assert_eq!(s(1, 1, -1, 3), s(-1, -1, 1, 3));
        assert_eq!(s(3, 2, 1, 1), Surd::from_int(5));
        assert_eq!(s(3, 7, 2, 0), s(3, 0, 2, 0));
        assert!(Surd::new(1, 1, 1, 8).is_err());
        assert!(Surd::new(1, 1, 0, 2).is_err());
    }

    #[test]
    fn compare_examples() {
        let one_plus_rt2 = s(1, 1, 1, 2);
        assert_eq!(one_plus_rt2.compare(&Surd::from_int(2)), Ok(Ordering::Greater));
        assert_eq!(s(2, 0, 2, 2).compare(&Surd::one()), Ok(Ordering::Equal));
        // √2/5 vs 1/3: 9·2 − 25 < 0
        let eps = s(0, 1, 5, 2);
        let third = Surd::from_rational(&rat(1, 3));
        assert_eq!(eps.compare(&third), Ok(Ordering::Less));
        assert_eq!(
            s(0, 1, 1, 2).compare(&s(0, 1, 1, 3)),
            Err(SurdError::IncomparableField { left: 2, right: 3 })
        );
    }

    #[test]
    fn arith_examples() {
        let rt2 = s(0, 1, 1, 2);
        let one_minus = s(1, -1, 1, 2);
        assert_eq!(surd_arith(&rt2, &one_minus, SurdOp::Add).unwrap(), Surd::one());
        assert_eq!(surd_arith(&rt2, &rt2, SurdOp::Mul).unwrap(), Surd::from_int(2));
        assert_eq!(
            surd_arith(&Surd::zero(), &Surd::zero(), SurdOp::Neg).unwrap(),
            Surd::zero()
        );
        assert!(surd_arith(&rt2, &s(0, 1, 1, 3), SurdOp::Mul).is_err());
    }

    #[test]
    fn reduce_mod_1_example() {
        // 3ε − 1 with ε = √2/5 lands on 3√2/5
        let eps = s(0, 1, 5, 2);
        let v = &eps.scale(&rat_int(3)) - &Surd::one();
        let red = surd_arith(&v, &Surd::zero(), SurdOp::ReduceMod1).unwrap();
        assert_eq!(red, s(0, 3, 5, 2));
        assert!((red.to_f64() - 0.848_528).abs() < 1e-5);
        assert_eq!(s(-7, -1, 2, 3).floor(), BigInt::from(-5));
        assert_eq!(Surd::from_int(-3).floor(), BigInt::from(-3));
    }

    #[test]
    fn floor_matches_float_bracketing() {
        for p in -12..12 {
            for q in -5..6 {
                for r in 1..5 {
                    let x = s(p, q, r, 7);
                    let f = x.to_f64().floor() as i64;
                    assert_eq!(x.floor(), BigInt::from(f), "{x}");
                }
            }
        }
    }

    #[test]
    fn display() {
        assert_eq!(s(0, 1, 5, 2).to_string(), "√2/5");
        assert_eq!(s(-1, 1, 4, 5).to_string(), "(-1+√5)/4");
        assert_eq!(s(1, -3, 1, 2).to_string(), "1-3√2");
        assert_eq!(s(3, 0, 4, 0).to_string(), "3/4");
    }

    #[test]
    fn log2_bounds_bracket() {
        for (n, d) in [(3, 1), (10, 1), (1, 3), (5, 4), (1024, 1), (7, 5)] {
            let x = rat(n, d);
            let (lo, hi) = log2_bounds(&x, 30);
            let v = (n as f64 / d as f64).log2();
            assert!(lo.to_f64().unwrap() <= v + 1e-12);
            assert!(hi.to_f64().unwrap() >= v - 1e-12);
            assert!((&hi - &lo) <= rat(1, 1 << 29));
        }
        let (lo, hi) = log2_bounds(&rat(8, 1), 10);
        assert_eq!(lo, rat_int(3));
        assert_eq!(hi, rat_int(3));
    }

    #[test]
    fn ln2_constants_bracket() {
        let l = std::f64::consts::LN_2;
        assert!(ln2_lower().to_f64().unwrap() < l && l < ln2_upper().to_f64().unwrap());
        assert!(inv_ln2_upper().to_f64().unwrap() > 1.0 / l);
    }
}
