//! Scalar coefficients: arbitrary precision rationals and residues modulo a prime.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest admissible modulus (exclusive). Products of two residues fit in `u128`.
pub const MAX_PRIME: u64 = 1 << 62;

/// An exact rational number in lowest terms.
///
/// Integers that fit in an `i64` are stored inline; everything else falls back
/// to a `BigRational`. The `Big` variant never holds a value representable as
/// `Small`, so derived equality and hashing are structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Rat {
    Small(i64),
    Big(BigRational),
}

impl Rat {
    pub fn zero() -> Self {
        Rat::Small(0)
    }

    pub fn one() -> Self {
        Rat::Small(1)
    }

    pub fn from_int(v: i64) -> Self {
        Rat::Small(v)
    }

    pub fn from_bigint(v: BigInt) -> Self {
        match v.to_i64() {
            Some(s) => Rat::Small(s),
            None => Rat::Big(BigRational::from_integer(v)),
        }
    }

    /// Builds `num/den`, reduced. Panics if `den` is zero.
    pub fn new(num: i64, den: i64) -> Self {
        Rat::from_big(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_big(v: BigRational) -> Self {
        if v.is_integer() {
            if let Some(s) = v.numer().to_i64() {
                return Rat::Small(s);
            }
        }
        Rat::Big(v)
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(s) => BigRational::from_integer(BigInt::from(*s)),
            Rat::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rat::Small(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Rat::Small(1))
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Rat::Small(_) => true,
            Rat::Big(b) => b.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rat::Small(s) => *s < 0,
            Rat::Big(b) => b.is_negative(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Rat::Small(s) => BigInt::from(*s),
            Rat::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Rat::Small(_) => BigInt::one(),
            Rat::Big(b) => b.denom().clone(),
        }
    }

    pub fn add(&self, other: &Rat) -> Rat {
        if let (Rat::Small(a), Rat::Small(b)) = (self, other) {
            if let Some(s) = a.checked_add(*b) {
                return Rat::Small(s);
            }
        }
        Rat::from_big(self.to_big() + other.to_big())
    }

    pub fn sub(&self, other: &Rat) -> Rat {
        if let (Rat::Small(a), Rat::Small(b)) = (self, other) {
            if let Some(s) = a.checked_sub(*b) {
                return Rat::Small(s);
            }
        }
        Rat::from_big(self.to_big() - other.to_big())
    }

    pub fn mul(&self, other: &Rat) -> Rat {
        if let (Rat::Small(a), Rat::Small(b)) = (self, other) {
            if let Some(s) = a.checked_mul(*b) {
                return Rat::Small(s);
            }
        }
        Rat::from_big(self.to_big() * other.to_big())
    }

    /// Panics on division by zero.
    pub fn div(&self, other: &Rat) -> Rat {
        assert!(!other.is_zero(), "rational division by zero");
        if let (Rat::Small(a), Rat::Small(b)) = (self, other) {
            if *b != 0 && a % b == 0 {
                if let Some(q) = a.checked_div(*b) {
                    return Rat::Small(q);
                }
            }
        }
        Rat::from_big(self.to_big() / other.to_big())
    }

    pub fn neg(&self) -> Rat {
        match self {
            Rat::Small(s) => match s.checked_neg() {
                Some(n) => Rat::Small(n),
                None => Rat::from_big(-self.to_big()),
            },
            Rat::Big(b) => Rat::from_big(-b.clone()),
        }
    }

    pub fn abs(&self) -> Rat {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    pub fn pow(&self, e: u32) -> Rat {
        let mut acc = Rat::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rat::Small(s) => *s as f64,
            Rat::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Integer gcd of two integral rationals (non-negative result).
    pub fn int_gcd(&self, other: &Rat) -> Rat {
        match (self, other) {
            (Rat::Small(a), Rat::Small(b)) => {
                let g = a.unsigned_abs().gcd(&b.unsigned_abs());
                match i64::try_from(g) {
                    Ok(v) => Rat::Small(v),
                    Err(_) => Rat::from_bigint(BigInt::from(g)),
                }
            }
            _ => Rat::from_bigint(self.numer().gcd(&other.numer())),
        }
    }

    /// Reduces modulo `p`; fails when `p` divides the denominator.
    pub fn reduce_mod(&self, p: u64) -> Result<u64> {
        let pb = BigInt::from(p);
        let num = self.numer().mod_floor(&pb);
        let den = self.denom().mod_floor(&pb);
        if den.is_zero() {
            return Err(Error::BadPrime(format!("{p} divides a coefficient denominator")));
        }
        let num = num.to_u64().expect("residue fits");
        let den = den.to_u64().expect("residue fits");
        Ok(mod_mul(num, mod_inv(den, p), p))
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rat::Small(a), Rat::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(s) => write!(f, "{s}"),
            Rat::Big(b) => {
                if b.is_integer() {
                    write!(f, "{}", b.numer())
                } else {
                    write!(f, "{}/{}", b.numer(), b.denom())
                }
            }
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<i64> for Rat {
    fn from(v: i64) -> Self {
        Rat::Small(v)
    }
}

pub(crate) fn mod_mul(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn mod_add(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % p as u128) as u64
}

pub(crate) fn mod_sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        p - (b - a)
    }
}

pub(crate) fn mod_pow(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mod_mul(acc, base, p);
        }
        base = mod_mul(base, base, p);
        e >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue modulo a prime.
pub(crate) fn mod_inv(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "inverse of zero residue");
    mod_pow(a, p - 2, p)
}

/// Deterministic Miller-Rabin, valid for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mod_mul(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The coefficient field of a polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Rational,
    Prime(u64),
}

impl Domain {
    /// Validates a prime modulus.
    pub fn prime(p: u64) -> Result<Domain> {
        if p >= MAX_PRIME || !is_prime(p) {
            return Err(Error::BadPrime(format!("{p} is not a prime below 2^62")));
        }
        Ok(Domain::Prime(p))
    }

    pub fn zero(&self) -> Coefficient {
        match self {
            Domain::Rational => Coefficient::Rational(Rat::zero()),
            Domain::Prime(_) => Coefficient::Residue(0),
        }
    }

    pub fn one(&self) -> Coefficient {
        match self {
            Domain::Rational => Coefficient::Rational(Rat::one()),
            Domain::Prime(_) => Coefficient::Residue(1),
        }
    }

    pub fn from_int(&self, v: i64) -> Coefficient {
        match self {
            Domain::Rational => Coefficient::Rational(Rat::from_int(v)),
            Domain::Prime(p) => {
                Coefficient::Residue((v as i128).rem_euclid(*p as i128) as u64)
            }
        }
    }

    /// Maps a rational into this domain; fails on a denominator clash.
    pub fn from_rat(&self, r: &Rat) -> Result<Coefficient> {
        match self {
            Domain::Rational => Ok(Coefficient::Rational(r.clone())),
            Domain::Prime(p) => Ok(Coefficient::Residue(r.reduce_mod(*p)?)),
        }
    }

    pub fn add(&self, a: &Coefficient, b: &Coefficient) -> Coefficient {
        match (self, a, b) {
            (Domain::Rational, Coefficient::Rational(x), Coefficient::Rational(y)) => {
                Coefficient::Rational(x.add(y))
            }
            (Domain::Prime(p), Coefficient::Residue(x), Coefficient::Residue(y)) => {
                Coefficient::Residue(mod_add(*x, *y, *p))
            }
            _ => panic!("coefficient/domain mismatch"),
        }
    }

    pub fn sub(&self, a: &Coefficient, b: &Coefficient) -> Coefficient {
        match (self, a, b) {
            (Domain::Rational, Coefficient::Rational(x), Coefficient::Rational(y)) => {
                Coefficient::Rational(x.sub(y))
            }
            (Domain::Prime(p), Coefficient::Residue(x), Coefficient::Residue(y)) => {
                Coefficient::Residue(mod_sub(*x, *y, *p))
            }
            _ => panic!("coefficient/domain mismatch"),
        }
    }

    pub fn mul(&self, a: &Coefficient, b: &Coefficient) -> Coefficient {
        match (self, a, b) {
            (Domain::Rational, Coefficient::Rational(x), Coefficient::Rational(y)) => {
                Coefficient::Rational(x.mul(y))
            }
            (Domain::Prime(p), Coefficient::Residue(x), Coefficient::Residue(y)) => {
                Coefficient::Residue(mod_mul(*x, *y, *p))
            }
            _ => panic!("coefficient/domain mismatch"),
        }
    }

    /// Panics when `b` is zero.
    pub fn div(&self, a: &Coefficient, b: &Coefficient) -> Coefficient {
        match (self, a, b) {
            (Domain::Rational, Coefficient::Rational(x), Coefficient::Rational(y)) => {
                Coefficient::Rational(x.div(y))
            }
            (Domain::Prime(p), Coefficient::Residue(x), Coefficient::Residue(y)) => {
                Coefficient::Residue(mod_mul(*x, mod_inv(*y, *p), *p))
            }
            _ => panic!("coefficient/domain mismatch"),
        }
    }

    pub fn neg(&self, a: &Coefficient) -> Coefficient {
        match (self, a) {
            (Domain::Rational, Coefficient::Rational(x)) => Coefficient::Rational(x.neg()),
            (Domain::Prime(p), Coefficient::Residue(x)) => {
                Coefficient::Residue(if *x == 0 { 0 } else { p - x })
            }
            _ => panic!("coefficient/domain mismatch"),
        }
    }

    pub fn pow(&self, a: &Coefficient, e: u32) -> Coefficient {
        match (self, a) {
            (Domain::Rational, Coefficient::Rational(x)) => Coefficient::Rational(x.pow(e)),
            (Domain::Prime(p), Coefficient::Residue(x)) => {
                Coefficient::Residue(mod_pow(*x, e as u64, *p))
            }
            _ => panic!("coefficient/domain mismatch"),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Rational => write!(f, "QQ"),
            Domain::Prime(p) => write!(f, "ZZ/{p}"),
        }
    }
}

/// A nonzero-or-zero scalar of some [`Domain`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Coefficient {
    Rational(Rat),
    /// Always in `[0, p)` for the owning domain's prime `p`.
    Residue(u64),
}

impl Coefficient {
    pub fn is_zero(&self) -> bool {
        match self {
            Coefficient::Rational(r) => r.is_zero(),
            Coefficient::Residue(r) => *r == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Coefficient::Rational(r) => r.is_one(),
            Coefficient::Residue(r) => *r == 1,
        }
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            Coefficient::Rational(r) => Some(r),
            Coefficient::Residue(_) => None,
        }
    }

    pub fn as_residue(&self) -> Option<u64> {
        match self {
            Coefficient::Residue(r) => Some(*r),
            Coefficient::Rational(_) => None,
        }
    }

    /// Sign used for canonical normalization: rationals by sign, residues are never negative.
    pub fn is_negative(&self) -> bool {
        match self {
            Coefficient::Rational(r) => r.is_negative(),
            Coefficient::Residue(_) => false,
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Rational(r) => write!(f, "{r}"),
            Coefficient::Residue(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_overflow_promotes() {
        let a = Rat::from_int(i64::MAX);
        let b = a.add(&Rat::one());
        assert!(matches!(b, Rat::Big(_)));
        assert_eq!(b.sub(&Rat::one()), a);
    }

    #[test]
    fn division_normalizes() {
        let r = Rat::from_int(6).div(&Rat::from_int(3));
        assert_eq!(r, Rat::Small(2));
        let h = Rat::from_int(1).div(&Rat::from_int(2));
        assert_eq!(h.mul(&Rat::from_int(2)), Rat::one());
    }

    #[test]
    fn half_mod_five_is_three() {
        assert_eq!(Rat::new(1, 2).reduce_mod(5).unwrap(), 3);
        assert!(Rat::new(1, 3).reduce_mod(3).is_err());
    }

    #[test]
    fn primality() {
        assert!(is_prime(2_147_483_647));
        assert!(is_prime(1_000_003));
        assert!(!is_prime(1_000_001));
        assert!(Domain::prime(4).is_err());
    }
}
