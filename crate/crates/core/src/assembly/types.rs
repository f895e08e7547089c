//! Per-evaluation-type seed/gather and extract/scatter.
//!
//! This is the only place (besides the tag enumeration) with code written per
//! evaluation type; everything between gather and scatter is generic.

use super::{AssemblyContext, AssemblyError, AssemblyInput, CsrMatrix, TangentSeed, Workset};
use crate::fields::Field;
use crate::graph::{eval, EvalTag, EvalType};
use crate::scalars::{Dual, NestedDual, Pce};

/// Residual plus Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianOutput {
    pub f: Vec<f64>,
    pub jac: CsrMatrix,
}

/// Residual plus derivative columns (`df/dp`, or `J v` in direction mode).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentOutput {
    pub f: Vec<f64>,
    pub dfdp: Vec<Vec<f64>>,
}

/// Block residual and the chaos coefficients `J_k` of the Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct SgJacobianOutput {
    pub f: Vec<Vec<f64>>,
    pub jac: Vec<CsrMatrix>,
}

pub trait AssemblyType: EvalType {
    type Output: Send;

    fn new_output(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
    ) -> Result<Self::Output, AssemblyError>;
    fn gather_solution(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<Self::S>,
    );
    fn gather_coordinates(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<Self::M>,
    ) -> Result<(), AssemblyError>;
    /// `local` holds `ws.len` cells of `[Node, Eq]` residual values.
    fn scatter(ctx: &AssemblyContext, ws: &Workset, local: &[Self::S], out: &mut Self::Output);
    fn apply_dirichlet(ctx: &AssemblyContext, input: &AssemblyInput, out: &mut Self::Output);
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<(), AssemblyError> {
    if expected != got {
        return Err(AssemblyError::SizeMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}

fn check_x(ctx: &AssemblyContext, input: &AssemblyInput) -> Result<(), AssemblyError> {
    check_len("solution", ctx.conn.num_dofs(), input.x.len())
}

fn check_sg<'a>(
    ctx: &AssemblyContext,
    input: &AssemblyInput<'a>,
    tag: EvalTag,
) -> Result<&'a [Vec<f64>], AssemblyError> {
    let basis = ctx
        .sg_basis
        .ok_or(AssemblyError::MissingInput(tag, "a chaos basis"))?;
    let sg = input
        .sg_x
        .ok_or(AssemblyError::MissingInput(tag, "a stochastic state"))?;
    check_len("stochastic blocks", basis.size(), sg.len())?;
    for b in sg {
        check_len("stochastic block", ctx.conn.num_dofs(), b.len())?;
    }
    Ok(sg)
}

/// Fill `local(c, n, eq)` from `value(global dof, local column)`.
fn gather_with<S>(
    ctx: &AssemblyContext,
    ws: &Workset,
    local: &mut Field<S>,
    mut value: impl FnMut(usize, usize) -> S,
) {
    let neq = ctx.conn.num_eqs();
    let data = local.data_mut();
    let per_cell = 4 * neq;
    for (c, e) in ws.elements().enumerate() {
        for n in 0..4 {
            for q in 0..neq {
                let j = n * neq + q;
                data[c * per_cell + j] = value(ctx.conn.dof(e, n, q), j);
            }
        }
    }
}

fn gather_real_coords(ctx: &AssemblyContext, ws: &Workset, local: &mut Field<f64>) {
    let coords = ctx.mesh.coords();
    let data = local.data_mut();
    for (c, e) in ws.elements().enumerate() {
        for (n, &node) in ctx.mesh.element(e).iter().enumerate() {
            data[c * 8 + 2 * n] = coords[node][0];
            data[c * 8 + 2 * n + 1] = coords[node][1];
        }
    }
}

/// Call `f(row, local column, value)` for every local residual entry.
fn for_each_row<S>(ctx: &AssemblyContext, ws: &Workset, local: &[S], mut f: impl FnMut(usize, &S)) {
    let neq = ctx.conn.num_eqs();
    let per_cell = 4 * neq;
    for (c, e) in ws.elements().enumerate() {
        for n in 0..4 {
            for q in 0..neq {
                f(ctx.conn.dof(e, n, q), &local[c * per_cell + n * neq + q]);
            }
        }
    }
}

fn element_columns(ctx: &AssemblyContext, e: usize) -> [usize; 16] {
    let mut cols = [usize::MAX; 16];
    for (j, d) in ctx.conn.element_dofs(e).enumerate() {
        cols[j] = d;
    }
    cols
}

fn residual_dirichlet(ctx: &AssemblyContext, input: &AssemblyInput, f: &mut [f64]) {
    for (d, g) in ctx.dirichlet.iter() {
        f[d] = input.x[d] - g;
    }
}

impl AssemblyType for eval::Residual {
    type Output = Vec<f64>;

    fn new_output(ctx: &AssemblyContext, input: &AssemblyInput) -> Result<Vec<f64>, AssemblyError> {
        check_x(ctx, input)?;
        Ok(vec![0.0; ctx.conn.num_dofs()])
    }

    fn gather_solution(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<f64>,
    ) {
        gather_with(ctx, ws, local, |d, _| input.x[d]);
    }

    fn gather_coordinates(
        ctx: &AssemblyContext,
        _: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<f64>,
    ) -> Result<(), AssemblyError> {
        gather_real_coords(ctx, ws, local);
        Ok(())
    }

    fn scatter(ctx: &AssemblyContext, ws: &Workset, local: &[f64], out: &mut Vec<f64>) {
        for_each_row(ctx, ws, local, |row, v| out[row] += *v);
    }

    fn apply_dirichlet(ctx: &AssemblyContext, input: &AssemblyInput, out: &mut Vec<f64>) {
        residual_dirichlet(ctx, input, out);
    }
}

impl AssemblyType for eval::Jacobian {
    type Output = JacobianOutput;

    fn new_output(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
    ) -> Result<JacobianOutput, AssemblyError> {
        check_x(ctx, input)?;
        Ok(JacobianOutput {
            f: vec![0.0; ctx.conn.num_dofs()],
            jac: CsrMatrix::zeros(ctx.pattern),
        })
    }

    fn gather_solution(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<Dual>,
    ) {
        let width = 4 * ctx.conn.num_eqs();
        gather_with(ctx, ws, local, |d, j| Dual::variable(input.x[d], j, width));
    }

    fn gather_coordinates(
        ctx: &AssemblyContext,
        _: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<f64>,
    ) -> Result<(), AssemblyError> {
        gather_real_coords(ctx, ws, local);
        Ok(())
    }

    fn scatter(ctx: &AssemblyContext, ws: &Workset, local: &[Dual], out: &mut JacobianOutput) {
        let neq = ctx.conn.num_eqs();
        let per_cell = 4 * neq;
        for (c, e) in ws.elements().enumerate() {
            let cols = element_columns(ctx, e);
            for (j, v) in local[c * per_cell..(c + 1) * per_cell].iter().enumerate() {
                let row = cols[j];
                out.f[row] += *v.val();
                for (k, dx) in v.dx().iter().enumerate() {
                    out.jac.add(row, cols[k], *dx);
                }
            }
        }
    }

    fn apply_dirichlet(ctx: &AssemblyContext, input: &AssemblyInput, out: &mut JacobianOutput) {
        residual_dirichlet(ctx, input, &mut out.f);
        for (d, _) in ctx.dirichlet.iter() {
            out.jac.set_row_identity(d);
        }
    }
}

fn scatter_columns(ctx: &AssemblyContext, ws: &Workset, local: &[Dual], out: &mut TangentOutput) {
    for_each_row(ctx, ws, local, |row, v| {
        out.f[row] += *v.val();
        for (k, dx) in v.dx().iter().enumerate() {
            out.dfdp[k][row] += *dx;
        }
    });
}

impl AssemblyType for eval::Tangent {
    type Output = TangentOutput;

    fn new_output(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
    ) -> Result<TangentOutput, AssemblyError> {
        check_x(ctx, input)?;
        let n = ctx.conn.num_dofs();
        let cols = match input.tangent {
            TangentSeed::Params(k) => k,
            TangentSeed::Direction(v) => {
                check_len("direction", n, v.len())?;
                1
            }
        };
        Ok(TangentOutput {
            f: vec![0.0; n],
            dfdp: vec![vec![0.0; n]; cols],
        })
    }

    fn gather_solution(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<Dual>,
    ) {
        match input.tangent {
            TangentSeed::Params(_) => {
                gather_with(ctx, ws, local, |d, _| Dual::constant(input.x[d]))
            }
            TangentSeed::Direction(v) => {
                gather_with(ctx, ws, local, |d, _| Dual::new(input.x[d], [v[d]]))
            }
        }
    }

    fn gather_coordinates(
        ctx: &AssemblyContext,
        _: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<f64>,
    ) -> Result<(), AssemblyError> {
        gather_real_coords(ctx, ws, local);
        Ok(())
    }

    fn scatter(ctx: &AssemblyContext, ws: &Workset, local: &[Dual], out: &mut TangentOutput) {
        scatter_columns(ctx, ws, local, out);
    }

    fn apply_dirichlet(ctx: &AssemblyContext, input: &AssemblyInput, out: &mut TangentOutput) {
        residual_dirichlet(ctx, input, &mut out.f);
        for (d, _) in ctx.dirichlet.iter() {
            for (k, col) in out.dfdp.iter_mut().enumerate() {
                col[d] = match input.tangent {
                    TangentSeed::Direction(v) if k == 0 => v[d],
                    _ => 0.0,
                };
            }
        }
    }
}

impl AssemblyType for eval::ShapeTangent {
    type Output = TangentOutput;

    fn new_output(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
    ) -> Result<TangentOutput, AssemblyError> {
        check_x(ctx, input)?;
        let xp = input.xp.ok_or(AssemblyError::MissingInput(
            EvalTag::ShapeTangent,
            "coordinate sensitivities",
        ))?;
        for col in xp {
            check_len(
                "coordinate sensitivity column",
                2 * ctx.mesh.num_nodes(),
                col.len(),
            )?;
        }
        let n = ctx.conn.num_dofs();
        Ok(TangentOutput {
            f: vec![0.0; n],
            dfdp: vec![vec![0.0; n]; xp.len()],
        })
    }

    fn gather_solution(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<Dual>,
    ) {
        gather_with(ctx, ws, local, |d, _| Dual::constant(input.x[d]));
    }

    fn gather_coordinates(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<Dual>,
    ) -> Result<(), AssemblyError> {
        let xp = input.xp.ok_or(AssemblyError::MissingInput(
            EvalTag::ShapeTangent,
            "coordinate sensitivities",
        ))?;
        let coords = ctx.mesh.coords();
        let data = local.data_mut();
        for (c, e) in ws.elements().enumerate() {
            for (n, &node) in ctx.mesh.element(e).iter().enumerate() {
                for d in 0..2 {
                    let k = 2 * node + d;
                    data[c * 8 + 2 * n + d] =
                        Dual::new(coords[node][d], xp.iter().map(|col| col[k]));
                }
            }
        }
        Ok(())
    }

    fn scatter(ctx: &AssemblyContext, ws: &Workset, local: &[Dual], out: &mut TangentOutput) {
        scatter_columns(ctx, ws, local, out);
    }

    fn apply_dirichlet(ctx: &AssemblyContext, input: &AssemblyInput, out: &mut TangentOutput) {
        residual_dirichlet(ctx, input, &mut out.f);
        for (d, _) in ctx.dirichlet.iter() {
            for col in out.dfdp.iter_mut() {
                col[d] = 0.0;
            }
        }
    }
}

fn sg_dirichlet(ctx: &AssemblyContext, input: &AssemblyInput, f: &mut [Vec<f64>]) {
    let sg = input.sg_x.expect("checked in new_output");
    for (d, g) in ctx.dirichlet.iter() {
        for (k, fk) in f.iter_mut().enumerate() {
            fk[d] = sg[k][d] - if k == 0 { g } else { 0.0 };
        }
    }
}

fn gather_pce(ctx: &AssemblyContext, input: &AssemblyInput, d: usize) -> Pce {
    let basis = ctx.sg_basis.expect("checked in new_output");
    let sg = input.sg_x.expect("checked in new_output");
    Pce::new(sg.iter().map(|b| b[d]), basis).expect("block count checked")
}

fn add_pce(f: &mut [Vec<f64>], row: usize, v: &Pce) {
    for (k, c) in v.coeffs().iter().enumerate() {
        f[k][row] += c;
    }
}

impl AssemblyType for eval::SgResidual {
    type Output = Vec<Vec<f64>>;

    fn new_output(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
    ) -> Result<Vec<Vec<f64>>, AssemblyError> {
        let sg = check_sg(ctx, input, EvalTag::SgResidual)?;
        Ok(vec![vec![0.0; ctx.conn.num_dofs()]; sg.len()])
    }

    fn gather_solution(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<Pce>,
    ) {
        gather_with(ctx, ws, local, |d, _| gather_pce(ctx, input, d));
    }

    fn gather_coordinates(
        ctx: &AssemblyContext,
        _: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<f64>,
    ) -> Result<(), AssemblyError> {
        gather_real_coords(ctx, ws, local);
        Ok(())
    }

    fn scatter(ctx: &AssemblyContext, ws: &Workset, local: &[Pce], out: &mut Vec<Vec<f64>>) {
        for_each_row(ctx, ws, local, |row, v| add_pce(out, row, v));
    }

    fn apply_dirichlet(ctx: &AssemblyContext, input: &AssemblyInput, out: &mut Vec<Vec<f64>>) {
        sg_dirichlet(ctx, input, out);
    }
}

impl AssemblyType for eval::SgJacobian {
    type Output = SgJacobianOutput;

    fn new_output(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
    ) -> Result<SgJacobianOutput, AssemblyError> {
        let sg = check_sg(ctx, input, EvalTag::SgJacobian)?;
        Ok(SgJacobianOutput {
            f: vec![vec![0.0; ctx.conn.num_dofs()]; sg.len()],
            jac: (0..sg.len())
                .map(|_| CsrMatrix::zeros(ctx.pattern))
                .collect(),
        })
    }

    fn gather_solution(
        ctx: &AssemblyContext,
        input: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<NestedDual>,
    ) {
        let width = 4 * ctx.conn.num_eqs();
        gather_with(ctx, ws, local, |d, j| {
            NestedDual::variable(gather_pce(ctx, input, d), j, width)
        });
    }

    fn gather_coordinates(
        ctx: &AssemblyContext,
        _: &AssemblyInput,
        ws: &Workset,
        local: &mut Field<f64>,
    ) -> Result<(), AssemblyError> {
        gather_real_coords(ctx, ws, local);
        Ok(())
    }

    fn scatter(
        ctx: &AssemblyContext,
        ws: &Workset,
        local: &[NestedDual],
        out: &mut SgJacobianOutput,
    ) {
        let neq = ctx.conn.num_eqs();
        let per_cell = 4 * neq;
        for (c, e) in ws.elements().enumerate() {
            let cols = element_columns(ctx, e);
            for (j, v) in local[c * per_cell..(c + 1) * per_cell].iter().enumerate() {
                let row = cols[j];
                add_pce(&mut out.f, row, v.val());
                for (k, dx) in v.dx().iter().enumerate() {
                    for (i, c) in dx.coeffs().iter().enumerate() {
                        out.jac[i].add(row, cols[k], *c);
                    }
                }
            }
        }
    }

    fn apply_dirichlet(ctx: &AssemblyContext, input: &AssemblyInput, out: &mut SgJacobianOutput) {
        sg_dirichlet(ctx, input, &mut out.f);
        for (d, _) in ctx.dirichlet.iter() {
            out.jac[0].set_row_identity(d);
            for j in &mut out.jac[1..] {
                j.zero_row(d);
            }
        }
    }
}
