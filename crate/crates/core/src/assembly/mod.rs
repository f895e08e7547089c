//! Seed/gather and extract/scatter between global objects and element-local
//! fields, worksets, and the global sparse structures.

mod assembler;
mod csr;
mod dirichlet;
mod types;
mod workset;

pub use assembler::{
    assemble, AssemblyContext, AssemblyInput, TangentSeed, COORDS, RESIDUAL_LOCAL, X_LOCAL,
};
pub use csr::{vector_matrix_market, CsrMatrix, CsrPattern};
pub use dirichlet::DirichletSet;
pub use types::{AssemblyType, JacobianOutput, SgJacobianOutput, TangentOutput};
pub use workset::{build_worksets, Connectivity, Workset};

use thiserror::Error;

use crate::graph::GraphError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("workset {workset}: {source}")]
    Graph { workset: usize, source: GraphError },
    #[error("{what}: expected length {expected}, got {got}")]
    SizeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0} assembly needs {1}")]
    MissingInput(crate::graph::EvalTag, &'static str),
    #[error("no graph instance supplied")]
    NoGraph,
}
