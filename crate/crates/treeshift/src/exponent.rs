//! Hölder exponents `p ∈ [1, ∞]` with their conjugates.

use std::fmt;

/// An exponent `p ∈ [1, ∞]` together with exact handling of the conjugate
/// `p*` defined by `1/p + 1/p* = 1` (`p* = ∞` when `p = 1`, `p* = 1` when
/// `p = ∞`).
#[derive(Clone, Copy, PartialEq, Debug)]
pub enum Exponent {
    One,
    /// Strictly between 1 and ∞.
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self, InvalidExponent> {
        if p == 1.0 {
            Ok(Exponent::One)
        } else if p.is_infinite() && p > 0.0 {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p > 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(InvalidExponent(p))
        }
    }

    pub fn value(&self) -> f64 {
        match self {
            Exponent::One => 1.0,
            Exponent::Finite(p) => *p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn conjugate(&self) -> Exponent {
        match self {
            Exponent::One => Exponent::Infinity,
            Exponent::Infinity => Exponent::One,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    /// `p/p*` = `p − 1` for finite p.
    pub fn p_over_conj(&self) -> f64 {
        match self {
            Exponent::One => 0.0,
            Exponent::Finite(p) => p - 1.0,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, Exponent::Infinity)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::One => write!(f, "1"),
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("exponent must lie in [1, inf], got {0}")]
pub struct InvalidExponent(pub f64);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_identity() {
        for p in [1.5, 2.0, 3.0, 7.5] {
            let e = Exponent::new(p).unwrap();
            let q = e.conjugate().value();
            assert!((1.0 / p + 1.0 / q - 1.0).abs() < 1e-15);
        }
        assert_eq!(Exponent::One.conjugate(), Exponent::Infinity);
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::One);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Exponent::new(0.5).is_err());
        assert!(Exponent::new(f64::NAN).is_err());
        assert!(Exponent::new(-1.0).is_err());
    }
}
