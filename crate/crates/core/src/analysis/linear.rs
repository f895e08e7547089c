//! Dense LU and ILU(0)-preconditioned restarted GMRES.

use nalgebra::linalg::LU;
use nalgebra::{DMatrix, DVector, Dyn};

use super::SolveError;
use crate::assembly::CsrMatrix;

/// Systems up to this size are factored densely under `LinearSolverKind::Auto`.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolverKind {
    Auto,
    DenseLu,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub restart: usize,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            restart: 50,
            tol: 1e-12,
            max_iters: 2000,
        }
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A factored operator that can be applied repeatedly.
pub enum Factorization {
    Dense(LU<f64, Dyn, Dyn>),
    Ilu {
        matrix: CsrMatrix,
        ilu: Ilu0,
        gmres: GmresConfig,
    },
}

impl Factorization {
    pub fn new(
        a: &CsrMatrix,
        kind: LinearSolverKind,
        gmres: GmresConfig,
    ) -> Result<Self, SolveError> {
        let dense = match kind {
            LinearSolverKind::Auto => a.dim() <= DENSE_LIMIT,
            LinearSolverKind::DenseLu => true,
            LinearSolverKind::Gmres => false,
        };
        if dense {
            let lu = a.to_dense().lu();
            if !lu.is_invertible() {
                return Err(SolveError::Singular);
            }
            Ok(Factorization::Dense(lu))
        } else {
            Ok(Factorization::Ilu {
                matrix: a.clone(),
                ilu: Ilu0::new(a)?,
                gmres,
            })
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        match self {
            Factorization::Dense(lu) => {
                let x = lu
                    .solve(&DVector::from_column_slice(b))
                    .ok_or(SolveError::Singular)?;
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(SolveError::Singular);
                }
                Ok(x.as_slice().to_vec())
            }
            Factorization::Ilu { matrix, ilu, gmres } => {
                let op = |x: &[f64], y: &mut [f64]| matrix.matvec(x, y);
                let pre = |x: &[f64], y: &mut [f64]| ilu.apply(x, y);
                let (x, _) = gmres_solve(&op, &pre, b, None, gmres)?;
                Ok(x)
            }
        }
    }
}

pub fn dense_solve(a: &DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>, SolveError> {
    let x = a
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .ok_or(SolveError::Singular)?;
    Ok(x.as_slice().to_vec())
}

/// Incomplete LU with the sparsity of the matrix itself.
pub struct Ilu0 {
    lu: CsrMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &CsrMatrix) -> Result<Ilu0, SolveError> {
        let mut lu = a.clone();
        let p = lu.pattern().clone();
        let n = p.dim();
        let diag: Vec<usize> = (0..n)
            .map(|i| p.find(i, i).ok_or(SolveError::Singular))
            .collect::<Result<_, _>>()?;
        let v = lu.values_mut();
        for i in 0..n {
            let range = p.row_range(i);
            for kk in range.clone() {
                let k = p.row(i)[kk - range.start];
                if k >= i {
                    break;
                }
                let pivot = v[diag[k]];
                if pivot == 0.0 {
                    return Err(SolveError::Singular);
                }
                v[kk] /= pivot;
                let lik = v[kk];
                for jj in kk + 1..range.end {
                    let j = p.row(i)[jj - range.start];
                    if let Some(kj) = p.find(k, j) {
                        v[jj] -= lik * v[kj];
                    }
                }
            }
            if v[diag[i]] == 0.0 {
                return Err(SolveError::Singular);
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    /// `y = (LU)^{-1} x`
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let p = self.lu.pattern();
        let v = self.lu.values();
        let n = p.dim();
        for i in 0..n {
            let mut s = x[i];
            for kk in p.row_range(i).start..self.diag[i] {
                s -= v[kk] * y[p.row(i)[kk - p.row_range(i).start]];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let r = p.row_range(i);
            let mut s = y[i];
            for kk in self.diag[i] + 1..r.end {
                s -= v[kk] * y[p.row(i)[kk - r.start]];
            }
            y[i] = s / v[self.diag[i]];
        }
    }
}

/// Right-preconditioned restarted GMRES. Returns the solution and the number
/// of inner iterations. Converges when `|b - A x| <= tol |b|`.
pub fn gmres_solve(
    op: &dyn Fn(&[f64], &mut [f64]),
    pre: &dyn Fn(&[f64], &mut [f64]),
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &GmresConfig,
) -> Result<(Vec<f64>, usize), SolveError> {
    let n = b.len();
    let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let target = cfg.tol * bnorm;
    let m = cfg.restart.max(1);
    let mut total = 0;
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    loop {
        op(&x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm(&r);
        if beta <= target {
            return Ok((x, total));
        }
        if total >= cfg.max_iters {
            return Err(SolveError::LinearBreakdown(format!(
                "GMRES reached {total} iterations with relative residual {:.3e}",
                beta / bnorm
            )));
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && total < cfg.max_iters {
            pre(&basis[k], &mut z);
            op(&z, &mut w);
            for (j, vj) in basis.iter().enumerate() {
                h[j][k] = dot(&w, vj);
                for i in 0..n {
                    w[i] -= h[j][k] * vj[i];
                }
            }
            let next = norm(&w);
            h[k + 1][k] = next;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                return Err(SolveError::LinearBreakdown("GMRES breakdown".into()));
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k += 1;
            if g[k].abs() <= target || next == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / next).collect());
        }
        // back substitution for the k Krylov coefficients
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut u = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                u[i] += yj * basis[j][i];
            }
        }
        pre(&u, &mut z);
        for i in 0..n {
            x[i] += z[i];
        }
    }
}
