//! Element kernels written once against the generic scalar pair.
//!
//! Layouts: coordinates `[C,N,D]`, nodal values `[C,N]`, quadrature values
//! `[C,Q]`, quadrature vectors `[C,Q,D]`, weighted basis `[C,N,Q]`, gradients
//! `[C,N,Q,D]`. Only the first `ncells` cells are touched.

use super::{BasisSet, DiscretizationError};
use crate::fields::Field;
use crate::scalars::Scalar;

fn check(f: &[usize], want: &[usize], what: &str) -> Result<(), DiscretizationError> {
    if f.len() != want.len() || f.iter().zip(want).any(|(a, b)| a != b) {
        return Err(DiscretizationError::LayoutMismatch(format!(
            "{what}: expected {want:?}, got {f:?}"
        )));
    }
    Ok(())
}

#[inline]
fn mixed<S: Scalar + From<M>, M: Scalar>(s: &S, m: &M) -> S {
    s.clone() * S::from(m.clone())
}

/// Mapping Jacobian, physical basis gradients and quadrature-weighted basis
/// values. A non-positive determinant reports the local cell index.
pub fn compute_element_geometry<M: Scalar>(
    coords: &Field<M>,
    basis: &BasisSet,
    ncells: usize,
    jac_det_w: &mut Field<M>,
    grad_bf: &mut Field<M>,
    w_bf: &mut Field<M>,
    w_grad_bf: &mut Field<M>,
) -> Result<(), DiscretizationError> {
    let (nn, nq) = (basis.num_nodes(), basis.num_qps());
    let cells = coords.extent(0);
    check(coords.layout().extents(), &[cells, nn, 2], "coordinates")?;
    check(
        jac_det_w.layout().extents(),
        &[cells, nq],
        "jacobian determinant",
    )?;
    check(
        grad_bf.layout().extents(),
        &[cells, nn, nq, 2],
        "basis gradients",
    )?;
    check(w_bf.layout().extents(), &[cells, nn, nq], "weighted basis")?;
    check(
        w_grad_bf.layout().extents(),
        &[cells, nn, nq, 2],
        "weighted basis gradients",
    )?;
    for c in 0..ncells {
        for q in 0..nq {
            let mut jm = [M::zero(), M::zero(), M::zero(), M::zero()];
            for i in 0..nn {
                let g = basis.ref_grad(i, q);
                for a in 0..2 {
                    let x = &coords[(c, i, a)];
                    jm[2 * a] += x.clone() * g[0];
                    jm[2 * a + 1] += x.clone() * g[1];
                }
            }
            let [j00, j01, j10, j11] = jm;
            let det = j00.clone() * j11.clone() - j01.clone() * j10.clone();
            if !(det.value() > 0.0) {
                return Err(DiscretizationError::NonPositiveJacobian {
                    element: c,
                    det: det.value(),
                });
            }
            let inv = M::from(1.0) / det.clone();
            let dw = det * basis.weight(q);
            for i in 0..nn {
                let g = basis.ref_grad(i, q);
                let gx = (j11.clone() * g[0] - j10.clone() * g[1]) * inv.clone();
                let gy = (j00.clone() * g[1] - j01.clone() * g[0]) * inv.clone();
                w_grad_bf[(c, i, q, 0)] = gx.clone() * dw.clone();
                w_grad_bf[(c, i, q, 1)] = gy.clone() * dw.clone();
                grad_bf[(c, i, q, 0)] = gx;
                grad_bf[(c, i, q, 1)] = gy;
                w_bf[(c, i, q)] = dw.clone() * basis.value(i, q);
            }
            jac_det_w[(c, q)] = dw;
        }
    }
    Ok(())
}

/// `u(q) = sum_i phi_i(q) u_i`
pub fn interpolate_to_qp<S: Scalar>(
    nodal: &Field<S>,
    basis: &BasisSet,
    ncells: usize,
    out: &mut Field<S>,
) -> Result<(), DiscretizationError> {
    let (nn, nq) = (basis.num_nodes(), basis.num_qps());
    check(
        nodal.layout().extents(),
        &[nodal.extent(0), nn],
        "nodal values",
    )?;
    check(
        out.layout().extents(),
        &[nodal.extent(0), nq],
        "quadrature values",
    )?;
    for c in 0..ncells {
        for q in 0..nq {
            let mut u = nodal[(c, 0)].clone() * basis.value(0, q);
            for i in 1..nn {
                u += nodal[(c, i)].clone() * basis.value(i, q);
            }
            out[(c, q)] = u;
        }
    }
    Ok(())
}

/// `grad u(q) = sum_i grad phi_i(q) u_i`, in the promoted scalar.
pub fn gradient_at_qp<S: Scalar + From<M>, M: Scalar>(
    nodal: &Field<S>,
    grad_bf: &Field<M>,
    ncells: usize,
    out: &mut Field<S>,
) -> Result<(), DiscretizationError> {
    let (cells, nn, nq) = (grad_bf.extent(0), grad_bf.extent(1), grad_bf.extent(2));
    check(nodal.layout().extents(), &[cells, nn], "nodal values")?;
    check(
        out.layout().extents(),
        &[cells, nq, 2],
        "quadrature gradients",
    )?;
    for c in 0..ncells {
        for q in 0..nq {
            for d in 0..2 {
                let mut g = mixed(&nodal[(c, 0)], &grad_bf[(c, 0, q, d)]);
                for i in 1..nn {
                    g += mixed(&nodal[(c, i)], &grad_bf[(c, i, q, d)]);
                }
                out[(c, q, d)] = g;
            }
        }
    }
    Ok(())
}

/// `accum(c,i) += sum_q f(c,q) w_bf(c,i,q)`
pub fn integrate_scalar<S: Scalar + From<M>, M: Scalar>(
    accum: &mut Field<S>,
    integrand: &Field<S>,
    w_bf: &Field<M>,
    ncells: usize,
) -> Result<(), DiscretizationError> {
    let (cells, nn, nq) = (w_bf.extent(0), w_bf.extent(1), w_bf.extent(2));
    check(accum.layout().extents(), &[cells, nn], "accumulator")?;
    check(
        integrand.layout().extents(),
        &[cells, nq],
        "scalar integrand",
    )?;
    for c in 0..ncells {
        for i in 0..nn {
            let mut s = mixed(&integrand[(c, 0)], &w_bf[(c, i, 0)]);
            for q in 1..nq {
                s += mixed(&integrand[(c, q)], &w_bf[(c, i, q)]);
            }
            accum[(c, i)] += s;
        }
    }
    Ok(())
}

/// `accum(c,i) += sum_q sum_d f(c,q,d) w_grad_bf(c,i,q,d)`
pub fn integrate_vector<S: Scalar + From<M>, M: Scalar>(
    accum: &mut Field<S>,
    integrand: &Field<S>,
    w_grad_bf: &Field<M>,
    ncells: usize,
) -> Result<(), DiscretizationError> {
    let (cells, nn, nq) = (
        w_grad_bf.extent(0),
        w_grad_bf.extent(1),
        w_grad_bf.extent(2),
    );
    check(accum.layout().extents(), &[cells, nn], "accumulator")?;
    check(
        integrand.layout().extents(),
        &[cells, nq, 2],
        "vector integrand",
    )?;
    for c in 0..ncells {
        for i in 0..nn {
            let mut s = mixed(&integrand[(c, 0, 0)], &w_grad_bf[(c, i, 0, 0)]);
            s += mixed(&integrand[(c, 0, 1)], &w_grad_bf[(c, i, 0, 1)]);
            for q in 1..nq {
                s += mixed(&integrand[(c, q, 0)], &w_grad_bf[(c, i, q, 0)]);
                s += mixed(&integrand[(c, q, 1)], &w_grad_bf[(c, i, q, 1)]);
            }
            accum[(c, i)] += s;
        }
    }
    Ok(())
}
