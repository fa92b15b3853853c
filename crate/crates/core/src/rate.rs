//! Exact rational numbers used for decay rates and frequency scales.
//!
//! Values live in `i128` while they fit and are promoted to arbitrary-width
//! rationals on overflow. The representation is canonical (reduced, positive
//! denominator, small whenever possible), so derived equality and hashing are
//! exact.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Debug)]
enum Repr {
    Small { num: i128, den: i128 },
    Big(BigRational),
}

/// An exact rational number.
#[derive(Clone, Debug)]
pub struct Rate(Repr);

impl Rate {
    pub const ZERO: Rate = Rate(Repr::Small { num: 0, den: 1 });
    pub const ONE: Rate = Rate(Repr::Small { num: 1, den: 1 });

    pub fn integer(n: i128) -> Self {
        Rate(Repr::Small { num: n, den: 1 })
    }

    /// `num / den`. Panics if `den == 0`.
    pub fn new(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        Self::small_reduced(num, den).unwrap_or_else(|| {
            Self::from_big(BigRational::new(BigInt::from(num), BigInt::from(den)))
        })
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Self::from_big(BigRational::from_integer(n))
    }

    fn small_reduced(num: i128, den: i128) -> Option<Self> {
        if num == i128::MIN || den == i128::MIN {
            return None;
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = if g == 0 { (0, 1) } else { (num / g, den / g) };
        if d < 0 {
            n = -n;
            d = -d;
        }
        Some(Rate(Repr::Small { num: n, den: d }))
    }

    fn from_big(r: BigRational) -> Self {
        // BigRational::new already reduces and normalises the sign.
        match (r.numer().to_i128(), r.denom().to_i128()) {
            (Some(n), Some(d)) if n != i128::MIN && d != i128::MIN => {
                Rate(Repr::Small { num: n, den: d })
            }
            _ => Rate(Repr::Big(r)),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => {
                BigRational::new_raw(BigInt::from(*num), BigInt::from(*den))
            }
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num > 0,
            Repr::Big(r) => r.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    /// Whether the value fits the `i128` fast path.
    pub fn is_small(&self) -> bool {
        matches!(self.0, Repr::Small { .. })
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small { num, .. } => BigInt::from(*num),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small { den, .. } => BigInt::from(*den),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => {
                if *den == 1 {
                    *num as f64
                } else if num.unsigned_abs() < (1 << 53) && *den < (1 << 53) {
                    *num as f64 / *den as f64
                } else {
                    self.to_big().to_f64().unwrap_or(f64::NAN)
                }
            }
            Repr::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn add(&self, other: &Rate) -> Rate {
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) = (&self.0, &other.0)
        {
            if b == d {
                if let Some(n) = a.checked_add(*c) {
                    return Self::small_reduced(n, *b).expect("reduced");
                }
            } else if let (Some(ad), Some(cb), Some(bd)) =
                (a.checked_mul(*d), c.checked_mul(*b), b.checked_mul(*d))
            {
                if let Some(n) = ad.checked_add(cb) {
                    if let Some(r) = Self::small_reduced(n, bd) {
                        return r;
                    }
                }
            }
        }
        Self::from_big(self.to_big() + other.to_big())
    }

    pub fn neg(&self) -> Rate {
        match &self.0 {
            Repr::Small { num, den } if *num != i128::MIN => Rate(Repr::Small { num: -num, den: *den }),
            _ => Self::from_big(-self.to_big()),
        }
    }

    pub fn sub(&self, other: &Rate) -> Rate {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Rate) -> Rate {
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) = (&self.0, &other.0)
        {
            if let (Some(n), Some(dd)) = (a.checked_mul(*c), b.checked_mul(*d)) {
                if let Some(r) = Self::small_reduced(n, dd) {
                    return r;
                }
            }
        }
        Self::from_big(self.to_big() * other.to_big())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Rate {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            Repr::Small { num, den } => Self::new(*den, *num),
            Repr::Big(r) => Self::from_big(r.recip()),
        }
    }

    pub fn square(&self) -> Rate {
        self.mul(self)
    }
}

impl Default for Rate {
    fn default() -> Self {
        Rate::ZERO
    }
}

impl From<i64> for Rate {
    fn from(n: i64) -> Self {
        Rate::integer(n as i128)
    }
}

impl From<i128> for Rate {
    fn from(n: i128) -> Self {
        Rate::integer(n)
    }
}

impl From<BigInt> for Rate {
    fn from(n: BigInt) -> Self {
        Rate::from_bigint(n)
    }
}

impl PartialEq for Rate {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => a == c && b == d,
            (Repr::Big(a), Repr::Big(b)) => a == b,
            // Canonical form: a value representable as Small is never Big.
            _ => false,
        }
    }
}

impl Eq for Rate {}

impl Hash for Rate {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small { num, den } => {
                0u8.hash(state);
                num.hash(state);
                den.hash(state);
            }
            Repr::Big(r) => {
                1u8.hash(state);
                r.hash(state);
            }
        }
    }
}

impl Ord for Rate {
    fn cmp(&self, other: &Self) -> Ordering {
        if let (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) = (&self.0, &other.0)
        {
            if b == d {
                return a.cmp(c);
            }
            if let (Some(ad), Some(cb)) = (a.checked_mul(*d), c.checked_mul(*b)) {
                return ad.cmp(&cb);
            }
        }
        self.to_big().cmp(&other.to_big())
    }
}

impl PartialOrd for Rate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}`")]
pub struct ParseRateError(pub String);

impl FromStr for Rate {
    type Err = ParseRateError;

    /// Accepts `p`, `p/q` with arbitrary-width integers.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRateError(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        Ok(Self::from_big(BigRational::new(n, d)))
    }
}

/// Exact square of a big integer vector norm, `Σ n_i²`.
pub(crate) fn sum_of_squares(components: &[i64]) -> Rate {
    let mut acc: i128 = 0;
    for &c in components {
        let sq = (c as i128) * (c as i128);
        match acc.checked_add(sq) {
            Some(v) => acc = v,
            None => {
                let big: BigInt = components
                    .iter()
                    .map(|&c| BigInt::from(c) * BigInt::from(c))
                    .sum();
                return Rate::from_bigint(big);
            }
        }
    }
    Rate::integer(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_normalises_sign() {
        assert_eq!(Rate::new(6, -4), Rate::new(-3, 2));
        assert_eq!(Rate::new(0, -7), Rate::ZERO);
        assert_eq!(Rate::new(6, -4).to_string(), "-3/2");
    }

    #[test]
    fn overflow_promotes_and_demotes() {
        let big = Rate::integer(i128::MAX);
        let sum = big.add(&Rate::ONE);
        assert!(!sum.is_small());
        assert_eq!(sum.sub(&Rate::ONE), big);
        assert!(sum.sub(&Rate::ONE).is_small());
        let sq = Rate::integer(1 << 100).square();
        assert_eq!(sq.numer(), BigInt::from(1) << 200);
    }

    #[test]
    fn ordering_is_exact() {
        let a = Rate::new(1, 3);
        let b = Rate::new(333_333_333_333_333_333, 1_000_000_000_000_000_000);
        assert!(b < a);
        let huge = Rate::from_bigint(BigInt::from(1) << 300);
        assert!(huge > Rate::integer(i128::MAX));
        assert!(huge.neg() < Rate::integer(i128::MIN + 1));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["0/1", "-7/3", "5/1", "340282366920938463463374607431768211457/2"] {
            let r: Rate = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        assert!("1/0".parse::<Rate>().is_err());
        assert!("x".parse::<Rate>().is_err());
        assert_eq!("4/2".parse::<Rate>().unwrap(), Rate::integer(2));
    }

    #[test]
    fn sum_of_squares_wide() {
        let n = 1i64 << 62;
        let s = sum_of_squares(&[n, n]);
        assert_eq!(s.numer(), BigInt::from(2) * (BigInt::from(1) << 124));
        assert_eq!(sum_of_squares(&[3, 4]), Rate::integer(25));
    }
}
