//! Extended natural numbers `N ∪ {∞}`, the value space of lower-semicontinuous
//! functions, and the matching extended nonnegative rationals used for
//! functional values.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A natural number or `∞`. Addition absorbs `∞`; the order is total with
/// `∞` on top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtNat {
    Fin(u64),
    Inf,
}

pub use ExtNat::{Fin, Inf};

impl ExtNat {
    pub const ZERO: ExtNat = Fin(0);
    pub const ONE: ExtNat = Fin(1);

    pub fn is_zero(self) -> bool {
        self == Fin(0)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Fin(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Fin(n) => Some(n),
            Inf => None,
        }
    }

    /// Scalar multiple; `0 · ∞ = 0`.
    pub fn scale(self, k: u64) -> ExtNat {
        match self {
            _ if k == 0 => Fin(0),
            Fin(n) => Fin(n.checked_mul(k).expect("ExtNat overflow")),
            Inf => Inf,
        }
    }

    /// Truncated subtraction. `∞ - n = ∞`, `n - ∞ = 0`, `∞ - ∞ = ∞`.
    pub fn saturating_sub(self, other: ExtNat) -> ExtNat {
        match (self, other) {
            (Inf, _) => Inf,
            (Fin(_), Inf) => Fin(0),
            (Fin(a), Fin(b)) => Fin(a.saturating_sub(b)),
        }
    }

    pub fn min_fin(self, cap: u64) -> u64 {
        match self {
            Fin(n) => n.min(cap),
            Inf => cap,
        }
    }
}

impl Default for ExtNat {
    fn default() -> Self {
        Fin(0)
    }
}

impl From<u64> for ExtNat {
    fn from(n: u64) -> Self {
        Fin(n)
    }
}

impl Add for ExtNat {
    type Output = ExtNat;

    fn add(self, rhs: ExtNat) -> ExtNat {
        match (self, rhs) {
            (Fin(a), Fin(b)) => Fin(a.checked_add(b).expect("ExtNat overflow")),
            _ => Inf,
        }
    }
}

impl AddAssign for ExtNat {
    fn add_assign(&mut self, rhs: ExtNat) {
        *self = *self + rhs;
    }
}

impl std::iter::Sum for ExtNat {
    fn sum<I: Iterator<Item = ExtNat>>(iter: I) -> ExtNat {
        iter.fold(Fin(0), |a, b| a + b)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fin(n) => write!(f, "{n}"),
            Inf => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Fin(n) => s.serialize_u64(*n),
            Inf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtNat;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtNat, E> {
                Ok(Fin(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtNat, E> {
                u64::try_from(v)
                    .map(Fin)
                    .map_err(|_| E::custom(format!("negative value {v}")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtNat, E> {
                match v {
                    "inf" | "∞" => Ok(Inf),
                    _ => v
                        .parse::<u64>()
                        .map(Fin)
                        .map_err(|_| E::custom(format!("bad extended natural {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// A nonnegative rational or `∞`; values of functionals and states.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Fin(BigRational),
    Inf,
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Fin(BigRational::zero())
    }

    pub fn from_int(n: u64) -> Self {
        ExtRational::Fin(BigRational::from_integer(BigInt::from(n)))
    }

    /// `value · weight` with `∞ · 0 = 0`.
    pub fn times(value: ExtNat, weight: &BigRational) -> Self {
        match value {
            Fin(n) => ExtRational::Fin(BigRational::from_integer(BigInt::from(n)) * weight),
            Inf if weight.is_zero() => ExtRational::zero(),
            Inf => ExtRational::Inf,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Fin(_))
    }
}

impl Add for ExtRational {
    type Output = ExtRational;

    fn add(self, rhs: ExtRational) -> ExtRational {
        match (self, rhs) {
            (ExtRational::Fin(a), ExtRational::Fin(b)) => ExtRational::Fin(a + b),
            _ => ExtRational::Inf,
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Fin(a), ExtRational::Fin(b)) => a.cmp(b),
            (ExtRational::Fin(_), ExtRational::Inf) => Ordering::Less,
            (ExtRational::Inf, ExtRational::Fin(_)) => Ordering::Greater,
            (ExtRational::Inf, ExtRational::Inf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Fin(q) => write!(f, "{}", fmt_rational(q)),
            ExtRational::Inf => write!(f, "inf"),
        }
    }
}

/// `p/q` in lowest terms, or `p` for integers.
pub fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let q = match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            BigRational::new(n, d)
        }
        None => BigRational::from_integer(s.parse().ok()?),
    };
    Some(q)
}

pub fn is_nonnegative(q: &BigRational) -> bool {
    !q.is_negative()
}
