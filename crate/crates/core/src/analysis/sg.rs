//! Intrusive stochastic Galerkin Newton and the non-intrusive projection oracle.

use std::sync::Arc;

use super::linear::{gmres_solve, norm, Factorization};
use super::newton::{initial_state, NewtonConfig};
use super::SolveError;
use crate::assembly::CsrMatrix;
use crate::physics::{Model, ModelError};
use crate::quadrature::{gauss_legendre, legendre_values};
use crate::scalars::{BasisData, Pce};

#[derive(Debug, Clone, PartialEq)]
pub struct SgResult {
    /// One state vector per chaos coefficient.
    pub x: Vec<Vec<f64>>,
    /// Block residual norms, initial first.
    pub history: Vec<f64>,
    pub gmres_iterations: Vec<usize>,
}

fn block_norm(f: &[Vec<f64>]) -> f64 {
    f.iter().map(|v| norm(v).powi(2)).sum::<f64>().sqrt()
}

/// `(J dX)_k = sum_ij C_ijk / <P_k^2> J_i dx_j`
fn apply_sg_operator(basis: &BasisData, jac: &[CsrMatrix], n: usize, x: &[f64], y: &mut [f64]) {
    y.fill(0.0);
    let norms = basis.norms();
    for &(i, j, k, c) in basis.nonzero_triples() {
        if i >= jac.len() {
            continue;
        }
        let xj = &x[j * n..(j + 1) * n];
        jac[i].matvec_add(c / norms[k], xj, &mut y[k * n..(k + 1) * n]);
    }
}

/// Block Newton on the stochastic Galerkin system with uncertain parameters
/// set to the given expansions. Each linear solve is GMRES on the full block
/// operator, preconditioned by the mean Jacobian applied to every block.
pub fn sg_newton_solve(
    model: &mut Model,
    basis: &Arc<BasisData>,
    uncertain: &[(&str, Pce)],
    x0: Option<&[Vec<f64>]>,
    cfg: &NewtonConfig,
) -> Result<SgResult, SolveError> {
    model.set_sg_basis(Some(basis.clone()));
    for (name, pce) in uncertain {
        model
            .params_mut()
            .set_expansion(name, Some(pce.clone()))
            .map_err(ModelError::from)?;
    }
    let result = sg_newton_inner(model, basis, x0, cfg);
    for (name, _) in uncertain {
        model
            .params_mut()
            .set_expansion(name, None)
            .map_err(ModelError::from)?;
    }
    result
}

fn sg_newton_inner(
    model: &mut Model,
    basis: &Arc<BasisData>,
    x0: Option<&[Vec<f64>]>,
    cfg: &NewtonConfig,
) -> Result<SgResult, SolveError> {
    let n = model.num_dofs();
    let p1 = basis.size();
    let mut x: Vec<Vec<f64>> = match x0 {
        Some(v) => v.to_vec(),
        None => {
            let mut v = vec![vec![0.0; n]; p1];
            v[0] = initial_state(model, cfg)?;
            v
        }
    };
    let mut f = model.sg_residual(&x)?;
    let f0 = block_norm(&f);
    let mut history = vec![f0];
    let mut gmres_iterations = Vec::new();
    let done = |r: f64| r <= cfg.abs_tol || r <= cfg.rel_tol * f0;
    while !done(*history.last().unwrap()) {
        if history.len() > cfg.max_iters {
            return Err(SolveError::MaxIterations {
                iterations: cfg.max_iters,
                norm: *history.last().unwrap(),
            });
        }
        let jo = model.sg_jacobian(&x)?;
        let mean = Factorization::new(&jo.jac[0], cfg.linear, cfg.gmres)?;
        let rhs: Vec<f64> = f.concat();
        let op = |v: &[f64], y: &mut [f64]| apply_sg_operator(basis, &jo.jac, n, v, y);
        let pre = |v: &[f64], y: &mut [f64]| {
            for k in 0..p1 {
                let z = mean
                    .solve(&v[k * n..(k + 1) * n])
                    .expect("mean Jacobian factored");
                y[k * n..(k + 1) * n].copy_from_slice(&z);
            }
        };
        let (dx, its) = gmres_solve(&op, &pre, &rhs, None, &cfg.gmres)?;
        gmres_iterations.push(its);
        for k in 0..p1 {
            for i in 0..n {
                x[k][i] -= dx[k * n + i];
            }
        }
        f = model.sg_residual(&x)?;
        let r = block_norm(&f);
        if !r.is_finite() {
            return Err(SolveError::Diverged);
        }
        log::debug!(
            "SG Newton iteration {}: |F| = {r:.6e} ({its} GMRES iterations)",
            history.len()
        );
        history.push(r);
    }
    Ok(SgResult {
        x,
        history,
        gmres_iterations,
    })
}

/// Project `output(xi)` onto the Legendre basis of `basis` with an
/// `order`-point Gauss rule: `c_k = sum_q w_q out(xi_q) P_k(xi_q) / (2 <P_k^2>)`.
pub fn nisp_project<E>(
    basis: &Arc<BasisData>,
    order: usize,
    mut output: impl FnMut(f64) -> Result<f64, E>,
) -> Result<Vec<f64>, E> {
    let (nodes, weights) = gauss_legendre(order);
    let mut c = vec![0.0; basis.size()];
    for (xi, w) in nodes.iter().zip(&weights) {
        let out = output(*xi)?;
        for (k, ck) in c.iter_mut().enumerate() {
            *ck += w * out * legendre_values(k, *xi)[k] / (2.0 * basis.norms()[k]);
        }
    }
    Ok(c)
}
