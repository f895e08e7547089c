use std::sync::Arc;

use super::{AssemblyError, AssemblyType, Connectivity, CsrPattern, DirichletSet, Workset};
use crate::discretization::Mesh;
use crate::fields::{Extent, FieldKind, FieldTag};
use crate::graph::EvaluatorGraph;
use crate::scalars::BasisData;

/// Gathered solution, `[Cell, Node, Eq]`.
pub const X_LOCAL: &str = "x_local";
/// Gathered coordinates, `[Cell, Node, Dim]`.
pub const COORDS: &str = "coords";
/// Element residual read by the scatter, `[Cell, Node, Eq]`.
pub const RESIDUAL_LOCAL: &str = "residual_local";

impl FieldTag {
    pub fn x_local() -> FieldTag {
        FieldTag::scalar(X_LOCAL, &[Extent::Cell, Extent::Node, Extent::Eq])
    }

    pub fn coords() -> FieldTag {
        FieldTag::mesh(COORDS, &[Extent::Cell, Extent::Node, Extent::Dim])
    }

    pub fn residual_local() -> FieldTag {
        FieldTag::scalar(RESIDUAL_LOCAL, &[Extent::Cell, Extent::Node, Extent::Eq])
    }
}

/// Read-only discretization state shared by every assembly.
pub struct AssemblyContext<'a> {
    pub mesh: &'a Mesh,
    pub conn: &'a Connectivity,
    pub worksets: &'a [Workset],
    pub dirichlet: &'a DirichletSet,
    pub pattern: &'a Arc<CsrPattern>,
    pub sg_basis: Option<&'a Arc<BasisData>>,
}

/// How Tangent assembly seeds derivatives.
#[derive(Debug, Clone, Copy)]
pub enum TangentSeed<'a> {
    /// Solution carries no partials; `n` parameters seed themselves.
    Params(usize),
    /// Solution partials are `v`; the single output column is `J v`.
    Direction(&'a [f64]),
}

/// Global inputs of one assembly.
#[derive(Debug, Clone, Copy)]
pub struct AssemblyInput<'a> {
    pub x: &'a [f64],
    /// Stochastic state, one vector per chaos coefficient.
    pub sg_x: Option<&'a [Vec<f64>]>,
    pub tangent: TangentSeed<'a>,
    /// Coordinate sensitivities, one column of length `2 * num_nodes` per shape parameter.
    pub xp: Option<&'a [Vec<f64>]>,
}

impl<'a> AssemblyInput<'a> {
    pub fn new(x: &'a [f64]) -> Self {
        AssemblyInput {
            x,
            sg_x: None,
            tangent: TangentSeed::Params(0),
            xp: None,
        }
    }

    pub fn stochastic(x: &'a [f64], sg_x: &'a [Vec<f64>]) -> Self {
        AssemblyInput {
            sg_x: Some(sg_x),
            ..Self::new(x)
        }
    }

    pub fn with_tangent(self, tangent: TangentSeed<'a>) -> Self {
        AssemblyInput { tangent, ..self }
    }

    pub fn with_xp(self, xp: &'a [Vec<f64>]) -> Self {
        AssemblyInput {
            xp: Some(xp),
            ..self
        }
    }
}

fn run_workset<A: AssemblyType>(
    ctx: &AssemblyContext,
    input: &AssemblyInput,
    graph: &mut EvaluatorGraph<A>,
    ws: &Workset,
) -> Result<(), AssemblyError> {
    let xs = graph
        .slot(X_LOCAL, FieldKind::Scalar)
        .expect("graph declares x_local");
    let cs = graph
        .slot(COORDS, FieldKind::Mesh)
        .expect("graph declares coords");
    A::gather_solution(ctx, input, ws, graph.arena_mut().scalar_mut(xs));
    A::gather_coordinates(ctx, input, ws, graph.arena_mut().mesh_mut(cs))?;
    graph.execute(ws).map_err(|source| AssemblyError::Graph {
        workset: ws.index,
        source,
    })
}

fn local_residual<'g, A: AssemblyType>(
    graph: &'g EvaluatorGraph<A>,
    ws: &Workset,
    per_cell: usize,
) -> &'g [A::S] {
    let rs = graph
        .slot(RESIDUAL_LOCAL, FieldKind::Scalar)
        .expect("graph requires residual_local");
    &graph.arena().scalar(rs).data()[..ws.len * per_cell]
}

/// Zero the outputs, run gather / graph / scatter over every workset, then
/// apply Dirichlet rows.
///
/// With more than one graph instance, worksets are distributed round-robin
/// over threads, each owning one instance; contributions are then scattered
/// on the calling thread in workset order, so the result does not depend on
/// the number of threads.
pub fn assemble<A: AssemblyType>(
    ctx: &AssemblyContext,
    graphs: &mut [&mut EvaluatorGraph<A>],
    input: &AssemblyInput,
) -> Result<A::Output, AssemblyError> {
    if graphs.is_empty() {
        return Err(AssemblyError::NoGraph);
    }
    let mut out = A::new_output(ctx, input)?;
    let per_cell = ctx.conn.nodes_per_element() * ctx.conn.num_eqs();
    if graphs.len() == 1 {
        let g = &mut *graphs[0];
        for ws in ctx.worksets {
            run_workset(ctx, input, g, ws)?;
            A::scatter(ctx, ws, local_residual(g, ws, per_cell), &mut out);
        }
    } else {
        let nt = graphs.len();
        let results: Vec<Result<Vec<(usize, Vec<A::S>)>, AssemblyError>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = graphs
                    .iter_mut()
                    .enumerate()
                    .map(|(t, g)| {
                        let g: &mut EvaluatorGraph<A> = g;
                        scope.spawn(move || {
                            let mut local = Vec::new();
                            for ws in ctx.worksets.iter().skip(t).step_by(nt) {
                                run_workset(ctx, input, g, ws)?;
                                local.push((ws.index, local_residual(g, ws, per_cell).to_vec()));
                            }
                            Ok(local)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("assembly worker panicked"))
                    .collect()
            });
        let mut buffers: Vec<Option<Vec<A::S>>> = vec![None; ctx.worksets.len()];
        let mut errors = Vec::new();
        for r in results {
            match r {
                Ok(list) => list.into_iter().for_each(|(i, v)| buffers[i] = Some(v)),
                Err(e) => errors.push(e),
            }
        }
        // Report the lowest failing workset, as the serial path would.
        if let Some(e) = errors.into_iter().min_by_key(|e| match e {
            AssemblyError::Graph { workset, .. } => *workset,
            _ => 0,
        }) {
            return Err(e);
        }
        for ws in ctx.worksets {
            A::scatter(
                ctx,
                ws,
                buffers[ws.index].as_deref().expect("every workset ran"),
                &mut out,
            );
        }
    }
    A::apply_dirichlet(ctx, input, &mut out);
    Ok(out)
}
