use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use smallvec::SmallVec;

use super::{BasisData, ParamValue, Scalar, ScalarError, ScalarKind};
use crate::quadrature::legendre_values;

type Coeffs = SmallVec<[f64; 4]>;

/// Polynomial chaos expansion `sum_k c_k P_k(xi)` on a Legendre basis.
///
/// A value built from a real constant carries no basis and a single
/// coefficient; it combines with any expansion. Products are Galerkin
/// projections truncated back to the basis degree; quotients solve the
/// corresponding dense `(P+1) x (P+1)` system.
///
/// `PartialEq` and `PartialOrd` compare means only.
#[derive(Clone, Debug)]
pub struct Pce {
    coeffs: Coeffs,
    basis: Option<Arc<BasisData>>,
}

impl Pce {
    pub fn new(
        coeffs: impl IntoIterator<Item = f64>,
        basis: &Arc<BasisData>,
    ) -> Result<Pce, ScalarError> {
        let coeffs: Coeffs = coeffs.into_iter().collect();
        if coeffs.len() != basis.size() {
            return Err(ScalarError::CoefficientCount {
                expected: basis.size(),
                got: coeffs.len(),
            });
        }
        Ok(Pce {
            coeffs,
            basis: Some(basis.clone()),
        })
    }

    /// Expansion with `c_0 = value` and all higher coefficients zero, tied to `basis`.
    pub fn deterministic(value: f64, basis: &Arc<BasisData>) -> Pce {
        let mut coeffs: Coeffs = SmallVec::from_elem(0.0, basis.size());
        coeffs[0] = value;
        Pce {
            coeffs,
            basis: Some(basis.clone()),
        }
    }

    pub fn constant(value: f64) -> Pce {
        Pce {
            coeffs: SmallVec::from_slice(&[value]),
            basis: None,
        }
    }

    pub fn basis(&self) -> Option<&Arc<BasisData>> {
        self.basis.as_ref()
    }

    /// Coefficient `k`; zero beyond the stored length.
    #[inline]
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn variance(&self) -> f64 {
        match &self.basis {
            None => 0.0,
            Some(b) => self
                .coeffs
                .iter()
                .zip(b.norms())
                .skip(1)
                .map(|(c, n)| c * c * n)
                .sum(),
        }
    }

    /// True when every coefficient above the mean is exactly zero.
    pub fn is_deterministic(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    /// Evaluate the expansion at `xi` with the three-term recurrence. No clamping is applied.
    pub fn evaluate(&self, xi: f64) -> f64 {
        let p = legendre_values(self.coeffs.len() - 1, xi);
        self.coeffs.iter().zip(p).map(|(c, p)| c * p).sum()
    }

    /// Give a basis-free constant the full coefficient layout of `basis`.
    pub fn expand_to(&self, basis: &Arc<BasisData>) -> Result<Pce, ScalarError> {
        match &self.basis {
            Some(b) if b.same_as(basis) => Ok(self.clone()),
            Some(b) => Err(ScalarError::BasisMismatch {
                left: b.degree(),
                right: basis.degree(),
            }),
            None => Ok(Pce::deterministic(self.coeffs[0], basis)),
        }
    }

    fn shared_basis(&self, other: &Pce) -> Result<Option<Arc<BasisData>>, ScalarError> {
        match (&self.basis, &other.basis) {
            (Some(a), Some(b)) => {
                if a.same_as(b) {
                    Ok(Some(a.clone()))
                } else {
                    Err(ScalarError::BasisMismatch {
                        left: a.degree(),
                        right: b.degree(),
                    })
                }
            }
            (Some(a), None) | (None, Some(a)) => Ok(Some(a.clone())),
            (None, None) => Ok(None),
        }
    }

    fn zip_with(mut self, other: &Pce, f: impl Fn(f64, f64) -> f64) -> Result<Pce, ScalarError> {
        let basis = self.shared_basis(other)?;
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (k, c) in self.coeffs.iter_mut().enumerate() {
            *c = f(*c, other.coeff(k));
        }
        self.basis = basis;
        Ok(self.fit())
    }

    pub fn try_add(self, rhs: &Pce) -> Result<Pce, ScalarError> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn try_sub(self, rhs: &Pce) -> Result<Pce, ScalarError> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn fit(mut self) -> Pce {
        if let Some(b) = &self.basis {
            self.coeffs.resize(b.size(), 0.0);
        }
        self
    }

    fn scale(mut self, s: f64) -> Pce {
        for c in self.coeffs.iter_mut() {
            *c *= s;
        }
        self
    }

    /// Galerkin product `c_k = sum_ij a_i b_j C_ijk / E[P_k^2]`.
    pub fn try_mul(self, rhs: &Pce) -> Result<Pce, ScalarError> {
        let basis = self.shared_basis(rhs)?;
        if rhs.is_deterministic() {
            let s = rhs.coeffs[0];
            let mut out = self.scale(s);
            out.basis = basis;
            return Ok(out.fit());
        }
        if self.is_deterministic() {
            let s = self.coeffs[0];
            let mut out = rhs.clone().scale(s);
            out.basis = basis;
            return Ok(out.fit());
        }
        let basis = basis.expect("non-deterministic expansions carry a basis");
        let mut out: Coeffs = SmallVec::from_elem(0.0, basis.size());
        for &(i, j, k, c) in basis.nonzero_triples() {
            out[k] += self.coeffs[i] * rhs.coeffs[j] * c;
        }
        for (o, n) in out.iter_mut().zip(basis.norms()) {
            *o /= n;
        }
        Ok(Pce {
            coeffs: out,
            basis: Some(basis),
        })
    }

    /// Galerkin quotient: solves `M x = a` with `M_kj = sum_i b_i C_ijk / E[P_k^2]`.
    pub fn try_div(self, rhs: &Pce) -> Result<Pce, ScalarError> {
        let basis = self.shared_basis(rhs)?;
        if rhs.is_deterministic() {
            let s = rhs.coeffs[0];
            if s == 0.0 {
                return Err(ScalarError::SingularDivisor {
                    condition: f64::INFINITY,
                });
            }
            let mut out = self;
            for c in out.coeffs.iter_mut() {
                *c /= s;
            }
            out.basis = basis;
            return Ok(out.fit());
        }
        let basis = basis.expect("non-deterministic expansions carry a basis");
        let n = basis.size();
        let mut m = vec![0.0; n * n];
        for &(i, j, k, c) in basis.nonzero_triples() {
            m[k * n + j] += rhs.coeffs[i] * c;
        }
        for k in 0..n {
            let nk = basis.norms()[k];
            for j in 0..n {
                m[k * n + j] /= nk;
            }
        }
        let mut x: Vec<f64> = (0..n).map(|k| self.coeff(k)).collect();
        small_solve(&mut m, &mut x, n)?;
        Ok(Pce {
            coeffs: x.into_iter().collect(),
            basis: Some(basis),
        })
    }
}

fn norm1(m: &[f64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| m[i * n + j].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Gaussian elimination with partial pivoting, in place. Rejects near-singular systems
/// and reports a 1-norm condition estimate.
fn small_solve(m: &mut [f64], b: &mut [f64], n: usize) -> Result<(), ScalarError> {
    let original: Vec<f64> = m.to_vec();
    let anorm = norm1(m, n);
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let (piv, pmax) = (col..n)
            .map(|r| (r, m[r * n + col].abs()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax <= 1e-14 * anorm || pmax == 0.0 {
            return Err(ScalarError::SingularDivisor {
                condition: condition_estimate(&original, n),
            });
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
            perm.swap(col, piv);
        }
        for r in (col + 1)..n {
            let f = m[r * n + col] / m[col * n + col];
            if f != 0.0 {
                for j in col..n {
                    m[r * n + j] -= f * m[col * n + j];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for r in (0..n).rev() {
        let mut s = b[r];
        for j in (r + 1)..n {
            s -= m[r * n + j] * b[j];
        }
        b[r] = s / m[r * n + r];
    }
    Ok(())
}

/// `||M||_1 ||M^-1||_1`, infinite if the inverse cannot be formed.
fn condition_estimate(m: &[f64], n: usize) -> f64 {
    let mat = nalgebra::DMatrix::from_row_slice(n, n, m);
    match mat.clone().try_inverse() {
        Some(inv) => {
            let inv_rows: Vec<f64> = (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .map(|(i, j)| inv[(i, j)])
                .collect();
            norm1(m, n) * norm1(&inv_rows, n)
        }
        None => f64::INFINITY,
    }
}

impl From<f64> for Pce {
    fn from(v: f64) -> Self {
        Pce::constant(v)
    }
}

impl PartialEq for Pce {
    fn eq(&self, other: &Self) -> bool {
        self.mean() == other.mean()
    }
}

impl PartialOrd for Pce {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.mean().partial_cmp(&other.mean())
    }
}

impl Add for Pce {
    type Output = Pce;
    fn add(self, rhs: Pce) -> Pce {
        self.try_add(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for Pce {
    type Output = Pce;
    fn sub(self, rhs: Pce) -> Pce {
        self.try_sub(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for Pce {
    type Output = Pce;
    fn mul(self, rhs: Pce) -> Pce {
        self.try_mul(&rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Div for Pce {
    type Output = Pce;
    /// A singular divisor yields NaN coefficients; use [`Pce::try_div`] to get an error.
    fn div(self, rhs: Pce) -> Pce {
        match self.clone().try_div(&rhs) {
            Ok(q) => q,
            Err(ScalarError::SingularDivisor { .. }) => {
                let mut q = self;
                if let Ok(b) = q.shared_basis(&rhs) {
                    q.basis = b;
                    if let Some(b) = &q.basis {
                        q.coeffs.resize(b.size(), 0.0);
                    }
                }
                for c in q.coeffs.iter_mut() {
                    *c = f64::NAN;
                }
                q
            }
            Err(e) => panic!("{e}"),
        }
    }
}

impl Neg for Pce {
    type Output = Pce;
    fn neg(mut self) -> Pce {
        for c in self.coeffs.iter_mut() {
            *c = -*c;
        }
        self
    }
}

impl Add<f64> for Pce {
    type Output = Pce;
    fn add(mut self, rhs: f64) -> Pce {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Pce {
    type Output = Pce;
    fn sub(mut self, rhs: f64) -> Pce {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Pce {
    type Output = Pce;
    fn mul(self, rhs: f64) -> Pce {
        self.scale(rhs)
    }
}

impl Div<f64> for Pce {
    type Output = Pce;
    fn div(mut self, rhs: f64) -> Pce {
        for c in self.coeffs.iter_mut() {
            *c /= rhs;
        }
        self
    }
}

impl AddAssign for Pce {
    fn add_assign(&mut self, rhs: Pce) {
        let lhs = std::mem::replace(self, Pce::constant(0.0));
        *self = lhs + rhs;
    }
}

impl SubAssign for Pce {
    fn sub_assign(&mut self, rhs: Pce) {
        let lhs = std::mem::replace(self, Pce::constant(0.0));
        *self = lhs - rhs;
    }
}

impl MulAssign for Pce {
    fn mul_assign(&mut self, rhs: Pce) {
        let lhs = std::mem::replace(self, Pce::constant(0.0));
        *self = lhs * rhs;
    }
}

impl Scalar for Pce {
    const KIND: ScalarKind = ScalarKind::Pce;

    #[inline]
    fn value(&self) -> f64 {
        self.mean()
    }

    fn checked_div(self, rhs: Self) -> Result<Self, ScalarError> {
        self.try_div(&rhs)
    }

    fn from_param(p: &ParamValue) -> Self {
        match p {
            ParamValue::Real(v) | ParamValue::Seeded { value: v, .. } => Pce::constant(*v),
            ParamValue::Expansion(e) => e.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    fn p(c: &[f64], b: &Arc<BasisData>) -> Pce {
        Pce::new(c.iter().copied(), b).unwrap()
    }

    /// Non-intrusive projection of `f` onto P_0..P_deg with an `npts`-point rule.
    fn project(f: impl Fn(f64) -> f64, deg: usize, npts: usize) -> Vec<f64> {
        let (x, w) = gauss_legendre(npts);
        (0..=deg)
            .map(|k| {
                let nk = 1.0 / (2.0 * k as f64 + 1.0);
                x.iter()
                    .zip(&w)
                    .map(|(&x, &w)| 0.5 * w * f(x) * legendre_values(deg, x)[k])
                    .sum::<f64>()
                    / nk
            })
            .collect()
    }

    #[test]
    fn xi_squared() {
        let b = BasisData::new(3);
        let x = p(&[0.0, 1.0, 0.0, 0.0], &b);
        let y = x.clone() * x;
        let expect = [1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0];
        for k in 0..4 {
            assert!((y.coeff(k) - expect[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn constant_times_expansion() {
        let b = BasisData::new(3);
        let a = p(&[1.0, 2.0, -1.0, 0.5], &b);
        let y = Pce::constant(3.0) * a.clone();
        assert_eq!(y.coeffs(), &[3.0, 6.0, -3.0, 1.5]);
        let y = p(&[3.0, 0.0, 0.0, 0.0], &b) * a;
        assert_eq!(y.coeffs(), &[3.0, 6.0, -3.0, 1.5]);
    }

    #[test]
    fn p1_times_p2() {
        let b = BasisData::new(3);
        let y = p(&[0.0, 1.0, 0.0, 0.0], &b) * p(&[0.0, 0.0, 1.0, 0.0], &b);
        // oracle: projection of xi * P2(xi)
        let oracle = project(|x| x * legendre_values(2, x)[2], 3, 20);
        for k in 0..4 {
            assert!((y.coeff(k) - oracle[k]).abs() < 1e-14);
        }
        assert!((oracle[1] - 0.4).abs() < 1e-14 && (oracle[3] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn divide_by_constant() {
        let b = BasisData::new(3);
        let a = p(&[2.0, 4.0, 6.0, 8.0], &b);
        let q = a / Pce::constant(2.0);
        assert_eq!(q.coeffs(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn divide_round_trip() {
        let b = BasisData::new(3);
        let d = p(&[1.0, 0.2, 0.0, 0.0], &b);
        let x = p(&[0.7, -0.3, 0.25, 0.1], &b);
        let back = (d.clone() * x.clone()).try_div(&d).unwrap();
        for k in 0..4 {
            assert!((back.coeff(k) - x.coeff(k)).abs() < 1e-13);
        }
    }

    #[test]
    fn reciprocal_matches_projection() {
        let b = BasisData::new(3);
        let q = Pce::constant(1.0)
            .try_div(&p(&[1.0, 0.5, 0.0, 0.0], &b))
            .unwrap();
        // Galerkin quotient frozen from an independent dense solve (numpy, 20-point triples)
        let galerkin = [
            1.0985703536493603,
            -0.5914221218961616,
            0.2106847253574071,
            -0.06320541760722215,
        ];
        for k in 0..4 {
            assert!((q.coeff(k) - galerkin[k]).abs() < 1e-13);
        }
        // the projection of 1/(1 + xi/2) differs from the Galerkin quotient by truncation error,
        // which grows with k
        let oracle = project(|x| 1.0 / (1.0 + 0.5 * x), 3, 20);
        for k in 0..2 {
            assert!(
                (q.coeff(k) - oracle[k]).abs() <= 1e-3,
                "k={k}: {} vs {}",
                q.coeff(k),
                oracle[k]
            );
        }
        for k in 2..4 {
            assert!(
                (q.coeff(k) - oracle[k]).abs() <= 1e-2,
                "k={k}: {} vs {}",
                q.coeff(k),
                oracle[k]
            );
        }
    }

    #[test]
    fn singular_divisor() {
        let b = BasisData::new(1);
        let zero = p(&[0.0, 0.0], &b);
        let err = Pce::constant(1.0).try_div(&zero).unwrap_err();
        assert!(matches!(err, ScalarError::SingularDivisor { .. }));
        let q = Pce::constant(1.0) / zero;
        assert!(q.coeffs().iter().all(|c| c.is_nan()));
    }

    #[test]
    fn basis_mismatch() {
        let a = Pce::deterministic(1.0, &BasisData::new(2));
        let b = Pce::deterministic(1.0, &BasisData::new(3));
        assert!(matches!(
            a.try_mul(&b),
            Err(ScalarError::BasisMismatch { left: 2, right: 3 })
        ));
    }

    #[test]
    fn evaluate() {
        let b = BasisData::new(3);
        assert_eq!(p(&[35.0, 15.0, 0.0, 0.0], &b).evaluate(1.0), 50.0);
        assert_eq!(p(&[7.0, 0.0, 0.0, 0.0], &b).evaluate(0.3), 7.0);
        assert_eq!(p(&[0.0, 0.0, 1.0, 0.0], &b).evaluate(0.0), -0.5);
    }

    #[test]
    fn constant_mean() {
        let c = Pce::from(4.5);
        assert_eq!(c.mean(), 4.5);
        assert_eq!(c.coeff(2), 0.0);
        assert_eq!(c.variance(), 0.0);
    }
}
