use std::any::Any;
use std::collections::BTreeMap;
use std::sync::Arc;

use super::{EvalTag, EvalType, Evaluator, EvaluatorGraph, GraphError, TagVisitor};
use crate::fields::{Dims, FieldTag};
use crate::physics::ParameterLibrary;

/// A `Box<dyn Evaluator<E>>` with the evaluation type erased.
pub type AnyEvaluator = Box<dyn Any + Send>;

/// Shared construction state handed to registrars.
pub struct BuildContext<'a> {
    pub params: &'a mut ParameterLibrary,
    pub dims: Dims,
}

/// Builds one evaluator for a runtime evaluation tag.
pub trait Registrar: Send + Sync {
    fn name(&self) -> &str;
    fn build(&self, tag: EvalTag, ctx: &mut BuildContext<'_>) -> Result<AnyEvaluator, GraphError>;
}

/// A registrar whose evaluator is written once for every evaluation type.
pub trait GenericRegistrar: Send + Sync {
    fn name(&self) -> &str;
    fn build_for<E: EvalType>(
        &self,
        ctx: &mut BuildContext<'_>,
    ) -> Result<Box<dyn Evaluator<E>>, GraphError>;
}

struct BuildVisitor<'r, 'c, 'p, R: ?Sized> {
    reg: &'r R,
    ctx: &'c mut BuildContext<'p>,
}

impl<R: GenericRegistrar + ?Sized> TagVisitor for BuildVisitor<'_, '_, '_, R> {
    type Output = Result<AnyEvaluator, GraphError>;
    fn visit<E: EvalType>(self) -> Self::Output {
        let ev = self.reg.build_for::<E>(self.ctx)?;
        Ok(Box::new(ev))
    }
}

impl<T: GenericRegistrar> Registrar for T {
    fn name(&self) -> &str {
        GenericRegistrar::name(self)
    }

    fn build(&self, tag: EvalTag, ctx: &mut BuildContext<'_>) -> Result<AnyEvaluator, GraphError> {
        tag.visit(BuildVisitor { reg: self, ctx })
    }
}

/// Everything needed to instantiate the same graph for several evaluation types.
#[derive(Clone)]
pub struct GraphSpec {
    pub registrars: Vec<Arc<dyn Registrar>>,
    pub externals: Vec<FieldTag>,
    pub required: Vec<FieldTag>,
    pub dims: Dims,
}

struct InstantiateVisitor<'s, 'c, 'p> {
    spec: &'s GraphSpec,
    ctx: &'c mut BuildContext<'p>,
}

impl TagVisitor for InstantiateVisitor<'_, '_, '_> {
    type Output = Result<Box<dyn Any + Send>, GraphError>;
    fn visit<E: EvalType>(self) -> Self::Output {
        let mut evaluators: Vec<Box<dyn Evaluator<E>>> =
            Vec::with_capacity(self.spec.registrars.len());
        for r in &self.spec.registrars {
            let any = r.build(E::TAG, self.ctx)?;
            let ev = any.downcast::<Box<dyn Evaluator<E>>>().map_err(|_| {
                GraphError::InvalidEvaluator {
                    name: r.name().to_string(),
                    reason: format!(
                        "registrar returned an evaluator of the wrong type for {}",
                        E::TAG
                    ),
                }
            })?;
            evaluators.push(*ev);
        }
        let g = EvaluatorGraph::<E>::build(
            evaluators,
            &self.spec.externals,
            &self.spec.required,
            self.spec.dims,
        )?;
        Ok(Box::new(g))
    }
}

/// One independent graph per evaluation type.
#[derive(Default)]
pub struct GraphSet {
    graphs: BTreeMap<EvalTag, Box<dyn Any + Send>>,
}

impl GraphSet {
    pub fn tags(&self) -> Vec<EvalTag> {
        self.graphs.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn get<E: EvalType>(&self) -> Option<&EvaluatorGraph<E>> {
        self.graphs.get(&E::TAG).and_then(|g| g.downcast_ref())
    }

    pub fn get_mut<E: EvalType>(&mut self) -> Option<&mut EvaluatorGraph<E>> {
        self.graphs.get_mut(&E::TAG).and_then(|g| g.downcast_mut())
    }
}

/// Build the graph of `spec` once for each tag in `types`.
pub fn instantiate_for_all_types(
    spec: &GraphSpec,
    types: &[EvalTag],
    ctx: &mut BuildContext<'_>,
) -> Result<GraphSet, GraphError> {
    let mut set = GraphSet::default();
    for &tag in types {
        if set.graphs.contains_key(&tag) {
            continue;
        }
        let g = tag.visit(InstantiateVisitor { spec, ctx })?;
        set.graphs.insert(tag, g);
    }
    Ok(set)
}
