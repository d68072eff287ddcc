//! Exact scalars and infinitesimal-extended values.
//!
//! The arithmetic engine (linear expressions, Simplex, branch and bound) is
//! generic over [`Scalar`], an exact ordered field. The solver itself is
//! instantiated with [`BigRational`](num_rational::BigRational); the
//! fixed-width [`Rational64`](num_rational::Rational64) instance exists for
//! small experiments and tests where overflow is ruled out by construction.

use std::cmp::Ordering;
use std::fmt;
use std::hash::Hash;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio, Rational64};
use num_traits::{Signed, Zero};

/// An exact ordered field usable by the Simplex engine.
pub trait Scalar:
    Clone
    + Ord
    + Hash
    + fmt::Debug
    + fmt::Display
    + Signed
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    fn from_int(v: i64) -> Self;
    fn from_frac(num: i64, den: i64) -> Self;
    fn floor(&self) -> Self;
    fn is_integer(&self) -> bool;
}

macro_rules! impl_scalar_for_ratio {
    ($t:ty, $int:ty, $conv:expr) => {
        impl Scalar for $t {
            fn from_int(v: i64) -> Self {
                Ratio::from_integer($conv(v))
            }
            fn from_frac(num: i64, den: i64) -> Self {
                Ratio::new($conv(num), $conv(den))
            }
            fn floor(&self) -> Self {
                Ratio::floor(self)
            }
            fn is_integer(&self) -> bool {
                Ratio::is_integer(self)
            }
        }
    };
}

impl_scalar_for_ratio!(BigRational, BigInt, BigInt::from);
impl_scalar_for_ratio!(Rational64, i64, |v: i64| v);

/// `real + delta * δ` for a positive infinitesimal δ.
///
/// Ordering is lexicographic on `(real, delta)`, which is what the derived
/// `Ord` gives with this field order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Delta<T> {
    pub real: T,
    pub delta: T,
}

impl<T: Scalar> Delta<T> {
    pub fn new(real: T, delta: T) -> Self {
        Delta { real, delta }
    }

    pub fn from_real(real: T) -> Self {
        Delta { real, delta: T::zero() }
    }

    pub fn zero() -> Self {
        Delta { real: T::zero(), delta: T::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.real.is_zero() && self.delta.is_zero()
    }

    /// True when the δ part vanishes.
    pub fn is_standard(&self) -> bool {
        self.delta.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.real += &other.real;
        out.delta += &other.delta;
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.real -= &other.real;
        out.delta -= &other.delta;
        out
    }

    pub fn scale(&self, k: &T) -> Self {
        let mut out = self.clone();
        out.real *= k;
        out.delta *= k;
        out
    }

    pub fn div_scalar(&self, k: &T) -> Self {
        let mut out = self.clone();
        out.real /= k;
        out.delta /= k;
        out
    }

    pub fn add_scaled(&mut self, other: &Self, k: &T) {
        let mut r = other.real.clone();
        r *= k;
        self.real += &r;
        let mut d = other.delta.clone();
        d *= k;
        self.delta += &d;
    }

    /// Substitute a concrete positive rational for δ.
    pub fn at(&self, delta_value: &T) -> T {
        let mut d = self.delta.clone();
        d *= delta_value;
        let mut out = self.real.clone();
        out += &d;
        out
    }

    /// Floor in the δ-extended order: `⌊q − kδ⌋ = q − 1` for integral `q`
    /// and `k > 0`.
    pub fn floor(&self) -> T {
        if self.real.is_integer() && self.delta.is_negative() {
            let mut f = self.real.clone();
            f -= &T::one();
            f
        } else {
            self.real.floor()
        }
    }

    pub fn is_integer(&self) -> bool {
        self.delta.is_zero() && self.real.is_integer()
    }
}

impl<T: Scalar> Neg for Delta<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Delta { real: -self.real, delta: -self.delta }
    }
}

impl<T: Scalar> From<T> for Delta<T> {
    fn from(real: T) -> Self {
        Delta::from_real(real)
    }
}

impl<T: Scalar> fmt::Display for Delta<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.delta.is_zero() {
            write!(f, "{}", self.real)
        } else if self.delta.is_negative() {
            write!(f, "{}-{}d", self.real, self.delta.abs())
        } else {
            write!(f, "{}+{}d", self.real, self.delta)
        }
    }
}

/// Largest δ for which `lhs ≤ rhs` still holds after substitution, given that
/// `lhs ≤ rhs` in the δ-extended order. `None` means every δ > 0 works.
pub fn delta_limit<T: Scalar>(lhs: &Delta<T>, rhs: &Delta<T>) -> Option<T> {
    debug_assert!(lhs <= rhs);
    if lhs.real < rhs.real && lhs.delta > rhs.delta {
        let mut gap = rhs.real.clone();
        gap -= &lhs.real;
        let mut slope = lhs.delta.clone();
        slope -= &rhs.delta;
        gap /= &slope;
        Some(gap)
    } else {
        None
    }
}

/// A δ small enough for every `(lhs, rhs)` pair: half the tightest limit,
/// capped at one. Halving keeps strict comparisons strict after substitution.
pub fn choose_delta<'a, T: Scalar + 'a>(
    pairs: impl IntoIterator<Item = (&'a Delta<T>, &'a Delta<T>)>,
) -> T {
    let mut best = T::one();
    for (lhs, rhs) in pairs {
        if let Some(limit) = delta_limit(lhs, rhs) {
            if limit < best {
                best = limit;
            }
        }
    }
    best /= &T::from_int(2);
    best
}

/// Parse `p`, `p/q`, or a decimal such as `-0.125` into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int_part, frac_part)) = text.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        let mag: BigInt = digits.parse().ok()?;
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        let v = BigRational::new(mag, den);
        return Some(if negative { -v } else { v });
    }
    let p: BigInt = text.parse().ok()?;
    Some(BigRational::from_integer(p))
}

/// Parse the textual form produced by `Delta`'s `Display`.
pub fn parse_delta(text: &str) -> Option<Delta<BigRational>> {
    let text = text.trim();
    if let Some(body) = text.strip_suffix('d') {
        // split at the sign that separates real and δ parts (not a leading sign)
        let idx = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last()?;
        let real = parse_rational(&body[..idx])?;
        let mut delta = parse_rational(&body[idx + 1..])?;
        if body.as_bytes()[idx] == b'-' {
            delta = -delta;
        }
        Some(Delta::new(real, delta))
    } else {
        parse_rational(text).map(Delta::from_real)
    }
}

/// Compare a δ-value against a plain scalar.
pub fn cmp_with_real<T: Scalar>(v: &Delta<T>, r: &T) -> Ordering {
    v.real.cmp(r).then_with(|| v.delta.cmp(&T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_frac(n, d)
    }

    #[test]
    fn floor_respects_infinitesimals() {
        assert_eq!(Delta::new(q(3, 1), q(-1, 1)).floor(), q(2, 1));
        assert_eq!(Delta::new(q(3, 1), q(1, 1)).floor(), q(3, 1));
        assert_eq!(Delta::new(q(5, 2), q(0, 1)).floor(), q(2, 1));
        assert_eq!(Delta::new(q(-5, 2), q(0, 1)).floor(), q(-3, 1));
    }

    #[test]
    fn delta_text_round_trip() {
        for text in ["-12", "27/10", "3/2+1d", "-4-1/2d", "0+2d"] {
            let v = parse_delta(text).unwrap();
            assert_eq!(v.to_string(), text);
        }
        assert_eq!(parse_rational("0.707"), Some(q(707, 1000)));
        assert_eq!(parse_rational("-1.5"), Some(q(-3, 2)));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn chosen_delta_preserves_order() {
        let a = Delta::new(q(-1, 1), q(3, 1));
        let b = Delta::new(q(0, 1), q(-1, 1));
        let d = choose_delta([(&a, &b)]);
        assert!(a.at(&d) < b.at(&d));
    }

    #[test]
    fn generic_over_fixed_width_rationals() {
        let a = Delta::new(Rational64::from_int(1), Rational64::from_int(-1));
        let b = Delta::from_real(Rational64::from_frac(1, 2));
        assert!(b < a);
        assert_eq!(a.add(&b).real, Rational64::from_frac(3, 2));
    }

    proptest! {
        #[test]
        fn rational_field_laws(a in -50i64..50, b in 1i64..20, c in -50i64..50, d in 1i64..20, e in -9i64..9) {
            let (x, y, z) = (q(a, b), q(c, d), q(e, 1));
            prop_assert_eq!(&(&x + &y) - &y, x.clone());
            prop_assert_eq!((&x + &y) + &z, &x + (&y + &z));
            prop_assert_eq!(&x * (&y + &z), &x * &y + &x * &z);
        }

        #[test]
        fn delta_order_is_lexicographic(r in -20i64..20, k1 in -20i64..20, k2 in -20i64..20) {
            let a = Delta::new(q(r, 1), q(k1, 1));
            let b = Delta::new(q(r, 1), q(k2, 1));
            prop_assert_eq!(a < b, k1 < k2);
            prop_assert_eq!(cmp_with_real(&Delta::new(q(r, 1), q(0, 1)), &q(r, 1)), Ordering::Equal);
        }
    }
}
