//! Generic-scalar finite element assembly.
//!
//! Physics kernels are written once over a pair of scalar types (solution
//! scalar, mesh scalar). Specialized gather (seed) and scatter (extract)
//! stages turn the same kernels into residuals, Jacobians, parameter and shape
//! sensitivities, and stochastic Galerkin residuals/Jacobians. On top of that
//! sit Newton, continuation, reduced-gradient optimization and intrusive UQ for
//! a coupled thermo-electric demonstration problem.

#![allow(clippy::result_large_err, clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod discretization;
pub mod fields;
pub mod graph;
pub mod morphing;
pub mod physics;
pub mod quadrature;
pub mod scalars;
