use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use smallvec::SmallVec;

use super::{ParamValue, Pce, Scalar, ScalarError, ScalarKind};

/// Derivative arrays up to this width live inline, without a heap allocation.
pub const INLINE_WIDTH: usize = 16;

pub type DualStorage<T> = SmallVec<[T; INLINE_WIDTH]>;

/// Forward-mode dual number: a value plus a dense array of partial derivatives.
///
/// The derivative width `N` is fixed when the number is created. A width of zero
/// marks a constant: it combines with any width and behaves as if every partial
/// were zero. Mixing two nonzero widths that differ is a programming error; the
/// operators panic, the `try_*` methods report [`ScalarError::WidthMismatch`].
///
/// `PartialEq` and `PartialOrd` look at the value only.
#[derive(Clone, Debug)]
pub struct Dual<T: Scalar = f64> {
    val: T,
    dx: DualStorage<T>,
}

/// Dual number whose value and partials are chaos expansions.
pub type NestedDual = Dual<Pce>;

fn combine_width(left: usize, right: usize) -> Result<usize, ScalarError> {
    match (left, right) {
        (0, n) | (n, 0) => Ok(n),
        (a, b) if a == b => Ok(a),
        (a, b) => Err(ScalarError::WidthMismatch { left: a, right: b }),
    }
}

impl<T: Scalar> Dual<T> {
    pub fn new(val: T, dx: impl IntoIterator<Item = T>) -> Self {
        Dual {
            val,
            dx: dx.into_iter().collect(),
        }
    }

    pub fn constant(val: T) -> Self {
        Dual {
            val,
            dx: SmallVec::new(),
        }
    }

    /// Independent variable `index` out of `width`: partials are the unit vector `e_index`.
    pub fn variable(val: T, index: usize, width: usize) -> Self {
        assert!(
            index < width,
            "seed index {index} out of range for width {width}"
        );
        let mut dx: DualStorage<T> = (0..width).map(|_| T::zero()).collect();
        dx[index] = T::from(1.0);
        Dual { val, dx }
    }

    /// A value whose partial array is zero but has a definite width.
    pub fn with_zero_partials(val: T, width: usize) -> Self {
        Dual {
            val,
            dx: (0..width).map(|_| T::zero()).collect(),
        }
    }

    #[inline]
    pub fn val(&self) -> &T {
        &self.val
    }

    #[inline]
    pub fn dx(&self) -> &[T] {
        &self.dx
    }

    pub fn dx_mut(&mut self) -> &mut DualStorage<T> {
        &mut self.dx
    }

    pub fn val_mut(&mut self) -> &mut T {
        &mut self.val
    }

    /// Partial `j`; zero for constants.
    pub fn partial(&self, j: usize) -> T {
        if self.dx.is_empty() {
            T::zero()
        } else {
            self.dx[j].clone()
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.dx.len()
    }

    pub fn is_constant(&self) -> bool {
        self.dx.is_empty()
    }

    pub fn into_parts(self) -> (T, DualStorage<T>) {
        (self.val, self.dx)
    }

    /// Explicitly drop the derivative information.
    pub fn strip_derivatives(&self) -> T {
        self.val.clone()
    }

    pub fn try_add(self, rhs: Self) -> Result<Self, ScalarError> {
        combine_width(self.width(), rhs.width())?;
        let Dual {
            val: av,
            dx: mut adx,
        } = self;
        let Dual { val: bv, dx: bdx } = rhs;
        let dx = if bdx.is_empty() {
            adx
        } else if adx.is_empty() {
            bdx
        } else {
            for (a, b) in adx.iter_mut().zip(bdx) {
                *a += b;
            }
            adx
        };
        Ok(Dual { val: av + bv, dx })
    }

    pub fn try_sub(self, rhs: Self) -> Result<Self, ScalarError> {
        combine_width(self.width(), rhs.width())?;
        let Dual {
            val: av,
            dx: mut adx,
        } = self;
        let Dual { val: bv, dx: bdx } = rhs;
        let dx = if bdx.is_empty() {
            adx
        } else if adx.is_empty() {
            bdx.into_iter().map(|b| -b).collect()
        } else {
            for (a, b) in adx.iter_mut().zip(bdx) {
                *a -= b;
            }
            adx
        };
        Ok(Dual { val: av - bv, dx })
    }

    pub fn try_mul(self, rhs: Self) -> Result<Self, ScalarError> {
        combine_width(self.width(), rhs.width())?;
        let Dual { val: av, dx: adx } = self;
        let Dual { val: bv, dx: bdx } = rhs;
        let dx: DualStorage<T> = if bdx.is_empty() {
            adx.into_iter().map(|a| a * bv.clone()).collect()
        } else if adx.is_empty() {
            bdx.into_iter().map(|b| av.clone() * b).collect()
        } else {
            adx.into_iter()
                .zip(bdx)
                .map(|(a, b)| a * bv.clone() + av.clone() * b)
                .collect()
        };
        Ok(Dual { val: av * bv, dx })
    }

    /// Quotient rule in the form `d(a/b) = (da - (a/b) db) / b`.
    pub fn try_div(self, rhs: Self) -> Result<Self, ScalarError> {
        combine_width(self.width(), rhs.width())?;
        let Dual { val: av, dx: adx } = self;
        let Dual { val: bv, dx: bdx } = rhs;
        let q = T::checked_div(av, bv.clone())?;
        let dx: DualStorage<T> = if bdx.is_empty() {
            adx.into_iter().map(|a| a / bv.clone()).collect()
        } else if adx.is_empty() {
            bdx.into_iter()
                .map(|b| -(q.clone() * b) / bv.clone())
                .collect()
        } else {
            adx.into_iter()
                .zip(bdx)
                .map(|(a, b)| (a - q.clone() * b) / bv.clone())
                .collect()
        };
        Ok(Dual { val: q, dx })
    }

    /// Operator-style division: follows the value type's semantics for a zero divisor.
    fn div_unchecked(self, rhs: Self) -> Self {
        combine_width(self.width(), rhs.width()).unwrap_or_else(|e| panic!("{e}"));
        let Dual { val: av, dx: adx } = self;
        let Dual { val: bv, dx: bdx } = rhs;
        let q = av / bv.clone();
        let dx: DualStorage<T> = if bdx.is_empty() {
            adx.into_iter().map(|a| a / bv.clone()).collect()
        } else if adx.is_empty() {
            bdx.into_iter()
                .map(|b| -(q.clone() * b) / bv.clone())
                .collect()
        } else {
            adx.into_iter()
                .zip(bdx)
                .map(|(a, b)| (a - q.clone() * b) / bv.clone())
                .collect()
        };
        Dual { val: q, dx }
    }

    fn map_partials(self, val: T, f: impl Fn(T) -> T) -> Self {
        Dual {
            val,
            dx: self.dx.into_iter().map(f).collect(),
        }
    }
}

impl Dual<f64> {
    pub fn exp(&self) -> Result<Self, ScalarError> {
        let e = self.val.exp();
        Ok(self.clone().map_partials(e, |d| d * e))
    }

    pub fn ln(&self) -> Result<Self, ScalarError> {
        if self.val <= 0.0 {
            return Err(ScalarError::Domain {
                function: "ln",
                value: self.val,
            });
        }
        let v = self.val;
        Ok(self.clone().map_partials(v.ln(), |d| d / v))
    }

    pub fn sqrt(&self) -> Result<Self, ScalarError> {
        if self.val <= 0.0 {
            return Err(ScalarError::Domain {
                function: "sqrt",
                value: self.val,
            });
        }
        let s = self.val.sqrt();
        Ok(self.clone().map_partials(s, |d| d / (2.0 * s)))
    }

    /// `self^p` for a real exponent. Non-integer exponents need a positive base.
    pub fn powf(&self, p: f64) -> Result<Self, ScalarError> {
        let v = self.val;
        if v < 0.0 && p.fract() != 0.0 {
            return Err(ScalarError::Domain {
                function: "pow",
                value: v,
            });
        }
        if v == 0.0 && p < 1.0 && !self.dx.is_empty() {
            return Err(ScalarError::Domain {
                function: "pow",
                value: v,
            });
        }
        let slope = if p == 0.0 { 0.0 } else { p * v.powf(p - 1.0) };
        Ok(self.clone().map_partials(v.powf(p), |d| d * slope))
    }
}

impl<T: Scalar> From<f64> for Dual<T> {
    fn from(v: f64) -> Self {
        Dual::constant(T::from(v))
    }
}

impl<T: Scalar> PartialEq for Dual<T> {
    fn eq(&self, other: &Self) -> bool {
        self.val.value() == other.val.value()
    }
}

impl<T: Scalar> PartialOrd for Dual<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.val.value().partial_cmp(&other.val.value())
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.div_unchecked(rhs)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        let v = -self.val.clone();
        self.map_partials(v, |d| -d)
    }
}

impl<T: Scalar> Add<f64> for Dual<T> {
    type Output = Self;
    fn add(mut self, rhs: f64) -> Self {
        self.val = self.val + rhs;
        self
    }
}

impl<T: Scalar> Sub<f64> for Dual<T> {
    type Output = Self;
    fn sub(mut self, rhs: f64) -> Self {
        self.val = self.val - rhs;
        self
    }
}

impl<T: Scalar> Mul<f64> for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        let v = self.val.clone() * rhs;
        self.map_partials(v, |d| d * rhs)
    }
}

impl<T: Scalar> Div<f64> for Dual<T> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        let v = self.val.clone() / rhs;
        self.map_partials(v, |d| d / rhs)
    }
}

impl<T: Scalar> AddAssign for Dual<T> {
    fn add_assign(&mut self, rhs: Self) {
        let lhs = std::mem::replace(self, Dual::constant(T::zero()));
        *self = lhs + rhs;
    }
}

impl<T: Scalar> SubAssign for Dual<T> {
    fn sub_assign(&mut self, rhs: Self) {
        let lhs = std::mem::replace(self, Dual::constant(T::zero()));
        *self = lhs - rhs;
    }
}

impl<T: Scalar> MulAssign for Dual<T> {
    fn mul_assign(&mut self, rhs: Self) {
        let lhs = std::mem::replace(self, Dual::constant(T::zero()));
        *self = lhs * rhs;
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    const KIND: ScalarKind = match T::KIND {
        ScalarKind::Real => ScalarKind::Dual,
        _ => ScalarKind::NestedDual,
    };

    #[inline]
    fn value(&self) -> f64 {
        self.val.value()
    }

    fn from_param(p: &ParamValue) -> Self {
        match p {
            ParamValue::Seeded {
                value,
                index,
                width,
            } => Dual::variable(T::from(*value), *index, *width),
            other => Dual::constant(T::from_param(other)),
        }
    }

    fn checked_div(self, rhs: Self) -> Result<Self, ScalarError> {
        self.try_div(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: f64, dx: &[f64]) -> Dual {
        Dual::new(v, dx.iter().copied())
    }

    #[test]
    fn polynomial_chain_rule() {
        let x = d(3.0, &[1.0]);
        let y = x.clone() * x * 2.0 + 1.0;
        assert_eq!(*y.val(), 19.0);
        assert_eq!(y.dx(), &[12.0]);
    }

    #[test]
    fn self_subtraction() {
        let x = d(5.0, &[1.0]);
        let y = x.clone() - x;
        assert_eq!(*y.val(), 0.0);
        assert_eq!(y.dx(), &[0.0]);
    }

    #[test]
    fn quotient() {
        let x = d(2.0, &[1.0]);
        let y = x.clone() / (x + 1.0);
        assert!((y.val() - 2.0 / 3.0).abs() < 1e-15);
        assert!((y.dx()[0] - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn constant_has_zero_partials() {
        let c = Dual::<f64>::from(4.0);
        assert!(c.is_constant());
        assert_eq!(c.partial(3), 0.0);
        let x = Dual::variable(2.0, 1, 3);
        let y = c * x;
        assert_eq!(y.width(), 3);
        assert_eq!(y.dx(), &[0.0, 4.0, 0.0]);
    }

    #[test]
    fn width_mismatch() {
        let a = Dual::variable(1.0, 0, 2);
        let b = Dual::variable(1.0, 0, 3);
        assert_eq!(
            a.try_add(b).unwrap_err(),
            ScalarError::WidthMismatch { left: 2, right: 3 }
        );
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn operator_panics_on_mismatch() {
        let _ = Dual::variable(1.0, 0, 2) * Dual::variable(1.0, 0, 3);
    }

    #[test]
    fn division_by_zero_value() {
        let a = Dual::variable(1.0, 0, 1);
        let b = Dual::constant(0.0);
        assert_eq!(a.try_div(b).unwrap_err(), ScalarError::DivisionByZero);
    }

    #[test]
    fn transcendentals() {
        let e = d(0.0, &[1.0]).exp().unwrap();
        assert_eq!((*e.val(), e.dx()[0]), (1.0, 1.0));
        let l = d(1.0, &[2.0]).ln().unwrap();
        assert_eq!((*l.val(), l.dx()[0]), (0.0, 2.0));
        let s = d(4.0, &[1.0]).sqrt().unwrap();
        assert_eq!((*s.val(), s.dx()[0]), (2.0, 0.25));
        let p = d(2.0, &[1.0]).powf(3.0).unwrap();
        assert_eq!((*p.val(), p.dx()[0]), (8.0, 12.0));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            d(-1.0, &[1.0]).ln(),
            Err(ScalarError::Domain { function: "ln", .. })
        ));
        assert!(matches!(
            d(0.0, &[1.0]).sqrt(),
            Err(ScalarError::Domain {
                function: "sqrt",
                ..
            })
        ));
        assert!(matches!(
            d(-2.0, &[1.0]).powf(0.5),
            Err(ScalarError::Domain { .. })
        ));
    }

    #[test]
    fn comparisons_use_value_only() {
        let a = d(1.0, &[5.0]);
        let b = d(1.0, &[-5.0]);
        assert!(a == b);
        assert!(d(0.5, &[9.0]) < a);
    }

    #[test]
    fn seeded_parameter() {
        let p = <Dual as Scalar>::from_param(&ParamValue::Seeded {
            value: 2.0,
            index: 1,
            width: 3,
        });
        assert_eq!(p.dx(), &[0.0, 1.0, 0.0]);
        let r = <Dual as Scalar>::from_param(&ParamValue::Real(2.0));
        assert!(r.is_constant());
    }
}
