use core::ops::Add;

/// A real number extended with `−∞` and `+∞`.
///
/// Payoffs and trading functions are extended-real valued: the perspective of
/// a reduced payoff is `−∞` when the numéraire price is zero, and an indicator
/// trading function is `0` on the trading set and `−∞` off it. NaN has no
/// representation; constructors reject it.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Extended {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Extended {
    pub const ZERO: Extended = Extended::Finite(0.0);

    /// Maps `±inf` to the matching sentinel; `None` for NaN.
    pub fn from_f64(x: f64) -> Option<Self> {
        if x.is_nan() {
            None
        } else if x == f64::INFINITY {
            Some(Extended::PosInf)
        } else if x == f64::NEG_INFINITY {
            Some(Extended::NegInf)
        } else {
            Some(Extended::Finite(x))
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    /// Lossless conversion to `f64` using IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            Extended::NegInf => f64::NEG_INFINITY,
            Extended::Finite(x) => x,
            Extended::PosInf => f64::INFINITY,
        }
    }

    /// `None` for the undefined sum `−∞ + ∞`.
    pub fn checked_add(self, rhs: Extended) -> Option<Extended> {
        use Extended::*;
        match (self, rhs) {
            (NegInf, PosInf) | (PosInf, NegInf) => None,
            (NegInf, _) | (_, NegInf) => Some(NegInf),
            (PosInf, _) | (_, PosInf) => Some(PosInf),
            (Finite(a), Finite(b)) => Some(Finite(a + b)),
        }
    }

    /// Multiplication by a nonnegative scalar, with `0 · (±∞) = 0`.
    pub fn scale(self, eta: f64) -> Extended {
        debug_assert!(eta >= 0.0, "scale factor must be nonnegative");
        match self {
            Extended::Finite(x) => Extended::Finite(eta * x),
            _ if eta == 0.0 => Extended::ZERO,
            inf => inf,
        }
    }
}

impl Add<f64> for Extended {
    type Output = Extended;

    /// Adds a finite real; infinite `rhs` values follow the sentinel rules.
    fn add(self, rhs: f64) -> Extended {
        match Extended::from_f64(rhs) {
            Some(r) => self.checked_add(r).unwrap_or(Extended::NegInf),
            None => Extended::NegInf,
        }
    }
}

impl From<Extended> for f64 {
    fn from(x: Extended) -> f64 {
        x.to_f64()
    }
}
