//! Structured quadrilateral meshes, bilinear basis functions and the generic
//! element kernels (geometry, interpolation, integration).

mod basis;
pub mod io;
mod kernels;
mod mesh;

pub use basis::BasisSet;
pub use kernels::{
    compute_element_geometry, gradient_at_qp, integrate_scalar, integrate_vector, interpolate_to_qp,
};
pub use mesh::{shoelace, GridInfo, Mesh, Region, SliderGeometry};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizationError {
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("unsupported quadrature order {0} (expected 1, 2 or 3)")]
    UnsupportedOrder(usize),
    #[error("non-positive Jacobian determinant {det} in element {element}")]
    NonPositiveJacobian { element: usize, det: f64 },
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("mesh format: {0}")]
    Format(String),
}
