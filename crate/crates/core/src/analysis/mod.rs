//! Newton, continuation, reduced gradients, optimization and stochastic Galerkin.

pub mod continuation;
pub mod linear;
pub mod newton;
pub mod optimize;
pub mod sensitivity;
pub mod sg;

pub use continuation::{continuation, ContinuationParam, ContinuationPoint, ContinuationResult};
pub use linear::{GmresConfig, LinearSolverKind};
pub use newton::{
    initial_state, newton_solve, order_estimates, NewtonConfig, NewtonResult, NonlinearSystem,
};
pub use optimize::{optimize, Iterate, OptimizeConfig, OptimizeResult};
pub use sensitivity::{reduced_gradient, ShapeProblem};
pub use sg::{nisp_project, sg_newton_solve, SgResult};

use thiserror::Error;

use crate::morphing::MorphError;
use crate::physics::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("Newton reached {iterations} iterations with residual norm {norm:.3e}")]
    MaxIterations { iterations: usize, norm: f64 },
    #[error("singular Jacobian")]
    Singular,
    #[error("linear solver: {0}")]
    LinearBreakdown(String),
    #[error("residual became non-finite")]
    Diverged,
    #[error("line search found no decrease of |f| = {norm:e} at Newton iteration {iteration}")]
    LineSearch { iteration: usize, norm: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Morph(#[from] MorphError),
}
