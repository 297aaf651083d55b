//! Extended reals used for objective values and conjugates.
//!
//! Primal-side quantities live in `R ∪ {+∞}` ([`ExtReal`]); the dual objective
//! lives in `R ∪ {-∞}` ([`DualValue`]). Neither type ever stores NaN.

use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Wraps a float. `+inf` maps to [`ExtReal::PosInf`]; NaN and `-inf` are rejected.
    pub fn new(v: f64) -> Option<ExtReal> {
        if v.is_nan() || v == f64::NEG_INFINITY {
            None
        } else if v == f64::INFINITY {
            Some(ExtReal::PosInf)
        } else {
            Some(ExtReal::Finite(v))
        }
    }

    /// Panics on NaN. Intended for values computed from finite closed forms.
    pub fn finite(v: f64) -> ExtReal {
        assert!(v.is_finite(), "ExtReal::finite got {v}");
        ExtReal::Finite(v)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// `f64` view, `+inf` for `PosInf`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// `self - d`, the difference of a primal-side value and a dual value.
    pub fn minus_dual(self, d: DualValue) -> ExtReal {
        match (self, d) {
            (ExtReal::Finite(p), DualValue::Finite(q)) => ExtReal::finite(p - q),
            _ => ExtReal::PosInf,
        }
    }

    pub fn scale(self, c: f64) -> ExtReal {
        debug_assert!(c >= 0.0);
        match self {
            ExtReal::Finite(v) => ExtReal::finite(c * v),
            ExtReal::PosInf if c == 0.0 => ExtReal::ZERO,
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl Add<f64> for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: f64) -> ExtReal {
        debug_assert!(rhs.is_finite());
        self + ExtReal::Finite(rhs)
    }
}

impl From<DualValue> for f64 {
    fn from(d: DualValue) -> f64 {
        d.to_f64()
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => f.write_str("+inf"),
        }
    }
}

// Serialized as a number, or `null` for +inf (JSON has no infinities).
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_none(),
        }
    }
}

/// `null` reads back as `+∞`.
impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Option::<f64>::deserialize(d)? {
            None => Ok(ExtReal::PosInf),
            Some(v) => ExtReal::new(v).ok_or_else(|| serde::de::Error::custom("NaN or -inf")),
        }
    }
}

/// Value of the dual objective: finite, or `-∞` outside its domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DualValue {
    Finite(f64),
    NegInf,
}

impl DualValue {
    /// `-(conjugate terms)`.
    pub fn from_negated(v: ExtReal) -> DualValue {
        match v {
            ExtReal::Finite(x) => DualValue::Finite(-x),
            ExtReal::PosInf => DualValue::NegInf,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, DualValue::Finite(_))
    }

    pub fn value(self) -> Option<f64> {
        match self {
            DualValue::Finite(v) => Some(v),
            DualValue::NegInf => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            DualValue::Finite(v) => v,
            DualValue::NegInf => f64::NEG_INFINITY,
        }
    }
}

impl fmt::Display for DualValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DualValue::Finite(v) => write!(f, "{v}"),
            DualValue::NegInf => f.write_str("-inf"),
        }
    }
}
