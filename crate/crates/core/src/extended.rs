//! Values in `[0, ∞]` with an explicit infinity.

use crate::scalar::{to_f64, Scalar};
use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// A nonnegative real or `+∞`.
///
/// Construction rejects negative and NaN inputs, so the order is total.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedNonNeg<T> {
    Finite(T),
    Infinite,
}

pub type Ext<T> = ExtendedNonNeg<T>;

impl<T: Scalar> ExtendedNonNeg<T> {
    pub fn zero() -> Self {
        ExtendedNonNeg::Finite(T::zero())
    }

    pub fn infinity() -> Self {
        ExtendedNonNeg::Infinite
    }

    /// `None` for negative or NaN input; `+∞` input maps to the sentinel.
    pub fn new(v: T) -> Option<Self> {
        if v.is_nan() || v < T::zero() {
            None
        } else if v.is_infinite() {
            Some(ExtendedNonNeg::Infinite)
        } else {
            Some(ExtendedNonNeg::Finite(v + T::zero()))
        }
    }

    /// Like [`new`](Self::new) but clamps negative values to zero.
    pub fn clamped(v: T) -> Self {
        if v.is_nan() {
            panic!("NaN is not an extended nonnegative value");
        }
        Self::new(v.max(T::zero())).expect("clamped value is valid")
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedNonNeg::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        !self.is_finite()
    }

    pub fn finite(&self) -> Option<T> {
        match self {
            ExtendedNonNeg::Finite(v) => Some(*v),
            ExtendedNonNeg::Infinite => None,
        }
    }

    /// Value as a float, `+∞` for the sentinel.
    pub fn to_float(&self) -> T {
        self.finite().unwrap_or_else(T::infinity)
    }

    pub fn to_f64(&self) -> f64 {
        self.finite().map(to_f64).unwrap_or(f64::INFINITY)
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    /// `|a − b| ≤ tol`, with `∞` only close to `∞`.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        match (self, other) {
            (ExtendedNonNeg::Finite(a), ExtendedNonNeg::Finite(b)) => (*a - *b).abs() <= tol,
            (ExtendedNonNeg::Infinite, ExtendedNonNeg::Infinite) => true,
            _ => false,
        }
    }

    /// `a ≤ b + tol`.
    pub fn le_tol(&self, other: &Self, tol: T) -> bool {
        match (self, other) {
            (_, ExtendedNonNeg::Infinite) => true,
            (ExtendedNonNeg::Infinite, _) => false,
            (ExtendedNonNeg::Finite(a), ExtendedNonNeg::Finite(b)) => *a <= *b + tol,
        }
    }

    /// `a < r` for a real threshold `r`.
    pub fn lt_real(&self, r: T) -> bool {
        matches!(self, ExtendedNonNeg::Finite(a) if *a < r)
    }

    /// Arithmetic mean, absorbing `∞`.
    pub fn mean(self, other: Self) -> Self {
        match (self, other) {
            (ExtendedNonNeg::Finite(a), ExtendedNonNeg::Finite(b)) => {
                ExtendedNonNeg::Finite((a + b) / (T::one() + T::one()))
            }
            _ => ExtendedNonNeg::Infinite,
        }
    }
}

impl<T: Scalar> Add for ExtendedNonNeg<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtendedNonNeg::Finite(a), ExtendedNonNeg::Finite(b)) => {
                let s = a + b;
                if s.is_finite() {
                    ExtendedNonNeg::Finite(s)
                } else {
                    ExtendedNonNeg::Infinite
                }
            }
            _ => ExtendedNonNeg::Infinite,
        }
    }
}

impl<T: Scalar> Eq for ExtendedNonNeg<T> {}

impl<T: Scalar> PartialOrd for ExtendedNonNeg<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for ExtendedNonNeg<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtendedNonNeg::Finite(a), ExtendedNonNeg::Finite(b)) => {
                a.partial_cmp(b).expect("no NaN in extended values")
            }
            (ExtendedNonNeg::Finite(_), ExtendedNonNeg::Infinite) => Ordering::Less,
            (ExtendedNonNeg::Infinite, ExtendedNonNeg::Finite(_)) => Ordering::Greater,
            (ExtendedNonNeg::Infinite, ExtendedNonNeg::Infinite) => Ordering::Equal,
        }
    }
}

impl<T: Scalar> fmt::Display for ExtendedNonNeg<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedNonNeg::Finite(v) => write!(f, "{v}"),
            ExtendedNonNeg::Infinite => f.write_str("inf"),
        }
    }
}

impl<T: Scalar> std::str::FromStr for ExtendedNonNeg<T> {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(ExtendedNonNeg::Infinite);
        }
        let v: f64 = s.parse().map_err(|e| format!("{s}: {e}"))?;
        T::from_f64(v)
            .and_then(Self::new)
            .ok_or_else(|| format!("{s}: not a nonnegative value"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    type E = ExtendedNonNeg<f64>;

    #[test]
    fn saturating_sum_and_order() {
        let a = E::new(1.0).unwrap();
        let inf = E::infinity();
        assert_eq!(a + inf, inf);
        assert_eq!(inf + a, inf);
        assert!(a < inf);
        assert_eq!(a.min(inf), a);
        assert_eq!(a.max(inf), inf);
        assert_eq!(E::new(f64::MAX).unwrap() + E::new(f64::MAX).unwrap(), inf);
        assert!(E::new(-1.0).is_none());
        assert!(E::new(f64::NAN).is_none());
    }

    #[test]
    fn tolerant_comparisons() {
        let a = E::new(1.0).unwrap();
        let b = E::new(1.05).unwrap();
        assert!(a.approx_eq(&b, 0.1));
        assert!(!a.approx_eq(&E::infinity(), 1e9));
        assert!(b.le_tol(&a, 0.06));
        assert!(!E::infinity().le_tol(&a, 1e9));
        assert!(!E::infinity().lt_real(1e300));
    }

    #[test]
    fn text_roundtrip() {
        let v: E = "inf".parse().unwrap();
        assert_eq!(v, E::infinity());
        assert_eq!(v.to_string(), "inf");
        let w: E = "2.5".parse().unwrap();
        assert_eq!(w.to_string().parse::<E>().unwrap(), w);
        assert!("-1".parse::<E>().is_err());
    }
}
