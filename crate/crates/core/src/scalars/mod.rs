//! Overloaded scalar types.
//!
//! Every compute kernel in this crate is written once against [`Scalar`]. The
//! concrete type decides what rides along with the value: nothing (`f64`), a
//! dense array of partial derivatives ([`Dual`]), a Legendre chaos expansion
//! ([`Pce`]), or derivatives whose entries are themselves expansions
//! ([`NestedDual`]).

mod basis;
mod dual;
mod pce;

pub use basis::BasisData;
pub use dual::{Dual, DualStorage, NestedDual, INLINE_WIDTH};
pub use pce::Pce;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalarError {
    #[error("derivative dimension mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },
    #[error("division by a zero value")]
    DivisionByZero,
    #[error("{function} evaluated outside its domain at {value}")]
    Domain { function: &'static str, value: f64 },
    #[error("polynomial chaos operands use different bases (degree {left} vs {right})")]
    BasisMismatch { left: usize, right: usize },
    #[error("singular spectral divisor (condition estimate {condition:e})")]
    SingularDivisor { condition: f64 },
    #[error("expected {expected} chaos coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
}

/// Which embedded information a scalar type carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalarKind {
    Real,
    Dual,
    Pce,
    NestedDual,
}

impl std::fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ScalarKind::Real => "real",
            ScalarKind::Dual => "dual",
            ScalarKind::Pce => "pce",
            ScalarKind::NestedDual => "nested-dual",
        };
        f.write_str(s)
    }
}

/// How a parameter value is pushed into a typed accessor.
#[derive(Debug, Clone)]
pub enum ParamValue {
    /// Plain value, no embedded information.
    Real(f64),
    /// Value carrying the unit seed `e_index` in a derivative array of `width`.
    Seeded {
        value: f64,
        index: usize,
        width: usize,
    },
    /// Uncertain value given by its chaos expansion.
    Expansion(Pce),
}

/// Arithmetic scalar used by every generic kernel.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + 'static
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    const KIND: ScalarKind;

    /// The value (or mean) with all embedded information dropped.
    fn value(&self) -> f64;

    fn zero() -> Self {
        Self::from(0.0)
    }

    /// Division that reports a zero (or singular) divisor instead of producing inf/NaN.
    fn checked_div(self, rhs: Self) -> Result<Self, ScalarError>;

    /// Build from a pushed parameter value. Types without derivative or
    /// spectral slots keep only the part they can represent.
    fn from_param(p: &ParamValue) -> Self {
        match p {
            ParamValue::Real(v) => Self::from(*v),
            ParamValue::Seeded { value, .. } => Self::from(*value),
            ParamValue::Expansion(e) => Self::from(e.mean()),
        }
    }
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Real;

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    fn checked_div(self, rhs: Self) -> Result<Self, ScalarError> {
        if rhs == 0.0 {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(self / rhs)
        }
    }
}

/// Explicit conversion that drops derivative and higher chaos information.
pub fn strip_derivatives<S: Scalar>(s: &S) -> f64 {
    s.value()
}
