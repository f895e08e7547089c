//! Evaluator DAG engine.
//!
//! Kernels declare the fields they read and write; [`EvaluatorGraph`] orders
//! them and runs the compute phase over one workset at a time. A graph is
//! instantiated once per evaluation type, so the same kernel code runs with
//! whatever scalar pair that type binds.

mod engine;
mod registry;

pub use engine::EvaluatorGraph;
pub use registry::{
    instantiate_for_all_types, AnyEvaluator, BuildContext, GenericRegistrar, GraphSet, GraphSpec,
    Registrar,
};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::assembly::Workset;
use crate::fields::{Field, FieldArena, FieldError, OwnedField, Slot};
use crate::physics::ParamError;
use crate::scalars::{Dual, NestedDual, Pce, Scalar, ScalarKind};

/// Error raised inside a kernel.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message}{}", .element.map(|e| format!(" (element {e})")).unwrap_or_default())]
pub struct KernelError {
    pub element: Option<usize>,
    pub message: String,
}

impl KernelError {
    pub fn at(element: usize, message: impl Into<String>) -> Self {
        KernelError {
            element: Some(element),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("field {field} needed by {consumer} has no producer")]
    Unsatisfied { field: String, consumer: String },
    #[error("field {field} produced by both {first} and {second}")]
    DuplicateProducer {
        field: String,
        first: String,
        second: String,
    },
    #[error("field {field}: producer {producer} declares {produced}, consumer {consumer} expects {expected}")]
    LayoutMismatch {
        field: String,
        producer: String,
        produced: String,
        consumer: String,
        expected: String,
    },
    #[error("evaluator {name}: {reason}")]
    InvalidEvaluator { name: String, reason: String },
    #[error("registrar {registrar} has no specialization for evaluation type {tag}")]
    MissingSpecialization { registrar: String, tag: EvalTag },
    #[error("evaluator {evaluator}: {source}")]
    Kernel {
        evaluator: String,
        source: KernelError,
    },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Closed set of evaluation types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EvalTag {
    Residual,
    Jacobian,
    Tangent,
    ShapeTangent,
    SgResidual,
    SgJacobian,
}

impl EvalTag {
    pub const ALL: [EvalTag; 6] = [
        EvalTag::Residual,
        EvalTag::Jacobian,
        EvalTag::Tangent,
        EvalTag::ShapeTangent,
        EvalTag::SgResidual,
        EvalTag::SgJacobian,
    ];

    /// `(ScalarT, MeshScalarT)` kinds bound by this type.
    pub fn scalar_kinds(self) -> (ScalarKind, ScalarKind) {
        self.visit(KindsOf)
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, EvalTag::SgResidual | EvalTag::SgJacobian)
    }

    /// Call `v.visit::<E>()` with the marker type for this tag.
    pub fn visit<V: TagVisitor>(self, v: V) -> V::Output {
        match self {
            EvalTag::Residual => v.visit::<eval::Residual>(),
            EvalTag::Jacobian => v.visit::<eval::Jacobian>(),
            EvalTag::Tangent => v.visit::<eval::Tangent>(),
            EvalTag::ShapeTangent => v.visit::<eval::ShapeTangent>(),
            EvalTag::SgResidual => v.visit::<eval::SgResidual>(),
            EvalTag::SgJacobian => v.visit::<eval::SgJacobian>(),
        }
    }
}

struct KindsOf;

impl TagVisitor for KindsOf {
    type Output = (ScalarKind, ScalarKind);
    fn visit<E: EvalType>(self) -> Self::Output {
        (<E::S as Scalar>::KIND, <E::M as Scalar>::KIND)
    }
}

/// Generic callback over the marker type of an [`EvalTag`].
pub trait TagVisitor {
    type Output;
    fn visit<E: EvalType>(self) -> Self::Output;
}

impl fmt::Display for EvalTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalTag::Residual => "Residual",
            EvalTag::Jacobian => "Jacobian",
            EvalTag::Tangent => "Tangent",
            EvalTag::ShapeTangent => "ShapeTangent",
            EvalTag::SgResidual => "SGResidual",
            EvalTag::SgJacobian => "SGJacobian",
        })
    }
}

impl FromStr for EvalTag {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        EvalTag::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown evaluation type {s}"))
    }
}

/// Binds the scalar pair used by one graph instantiation.
pub trait EvalType: Send + Sync + 'static {
    /// Scalar for solution-dependent fields.
    type S: Scalar + From<Self::M>;
    /// Scalar for coordinate-dependent fields.
    type M: Scalar;
    const TAG: EvalTag;
}

/// Marker types, one per [`EvalTag`].
pub mod eval {
    use super::*;

    #[derive(Debug, Clone, Copy)]
    pub struct Residual;
    #[derive(Debug, Clone, Copy)]
    pub struct Jacobian;
    #[derive(Debug, Clone, Copy)]
    pub struct Tangent;
    #[derive(Debug, Clone, Copy)]
    pub struct ShapeTangent;
    #[derive(Debug, Clone, Copy)]
    pub struct SgResidual;
    #[derive(Debug, Clone, Copy)]
    pub struct SgJacobian;

    impl EvalType for Residual {
        type S = f64;
        type M = f64;
        const TAG: EvalTag = EvalTag::Residual;
    }
    impl EvalType for Jacobian {
        type S = Dual;
        type M = f64;
        const TAG: EvalTag = EvalTag::Jacobian;
    }
    impl EvalType for Tangent {
        type S = Dual;
        type M = f64;
        const TAG: EvalTag = EvalTag::Tangent;
    }
    impl EvalType for ShapeTangent {
        type S = Dual;
        type M = Dual;
        const TAG: EvalTag = EvalTag::ShapeTangent;
    }
    impl EvalType for SgResidual {
        type S = Pce;
        type M = f64;
        const TAG: EvalTag = EvalTag::SgResidual;
    }
    impl EvalType for SgJacobian {
        type S = NestedDual;
        type M = f64;
        const TAG: EvalTag = EvalTag::SgJacobian;
    }
}

/// Field access handed to a kernel: read-only dependencies and the fields it writes,
/// both addressed by their position in the evaluator's declarations.
pub struct FieldAccess<'a, E: EvalType> {
    arena: &'a FieldArena<E::S, E::M>,
    inputs: &'a [Slot],
    outputs: &'a mut [OwnedField<E::S, E::M>],
}

impl<'a, E: EvalType> FieldAccess<'a, E> {
    pub fn dep_scalar(&self, i: usize) -> &'a Field<E::S> {
        self.arena.scalar(self.inputs[i])
    }

    pub fn dep_mesh(&self, i: usize) -> &'a Field<E::M> {
        self.arena.mesh(self.inputs[i])
    }

    pub fn dep_real(&self, i: usize) -> &'a Field<f64> {
        self.arena.real(self.inputs[i])
    }

    pub fn out_scalar(&mut self, i: usize) -> &mut Field<E::S> {
        match &mut self.outputs[i] {
            OwnedField::Scalar(f) => f,
            _ => panic!("output {i} is not a ScalarT field"),
        }
    }

    pub fn out_mesh(&mut self, i: usize) -> &mut Field<E::M> {
        match &mut self.outputs[i] {
            OwnedField::Mesh(f) => f,
            _ => panic!("output {i} is not a MeshScalarT field"),
        }
    }

    pub fn out_real(&mut self, i: usize) -> &mut Field<f64> {
        match &mut self.outputs[i] {
            OwnedField::Real(f) => f,
            _ => panic!("output {i} is not a real field"),
        }
    }

    /// All outputs at once, for kernels that fill several fields in one pass.
    pub fn outputs_mut(&mut self) -> &mut [OwnedField<E::S, E::M>] {
        self.outputs
    }
}

/// One node of the evaluation DAG.
pub trait Evaluator<E: EvalType>: Send {
    fn name(&self) -> &str;
    fn dependent_fields(&self) -> Vec<crate::fields::FieldTag>;
    fn evaluated_fields(&self) -> Vec<crate::fields::FieldTag>;
    fn evaluate(
        &mut self,
        ws: &Workset,
        fields: &mut FieldAccess<'_, E>,
    ) -> Result<(), KernelError>;
}
