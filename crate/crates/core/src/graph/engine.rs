use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt::Write as _;

use super::{EvalType, Evaluator, FieldAccess, GraphError};
use crate::assembly::Workset;
use crate::fields::{Dims, FieldArena, FieldKind, FieldTag, OwnedField, Slot};

const EXTERNAL: &str = "<external>";
const REQUIRED: &str = "<required>";

struct Node<E: EvalType> {
    eval: Box<dyn Evaluator<E>>,
    inputs: Vec<Slot>,
    outputs: Vec<Slot>,
}

/// Scheduled evaluators plus the arena holding every field they touch.
pub struct EvaluatorGraph<E: EvalType> {
    nodes: Vec<Node<E>>,
    arena: FieldArena<E::S, E::M>,
    dims: Dims,
    edges: BTreeSet<(String, String, String)>,
    scratch: Vec<OwnedField<E::S, E::M>>,
    executions: usize,
}

#[derive(Clone, Copy)]
enum Producer {
    External,
    Eval(usize),
}

impl<E: EvalType> EvaluatorGraph<E> {
    /// Order the evaluators needed for `required` and allocate their fields.
    ///
    /// `externals` are fields the caller fills before each execution (gathered
    /// solution, coordinates). Evaluators not reachable from `required` are dropped.
    pub fn build(
        evaluators: Vec<Box<dyn Evaluator<E>>>,
        externals: &[FieldTag],
        required: &[FieldTag],
        dims: Dims,
    ) -> Result<Self, GraphError> {
        let deps: Vec<Vec<FieldTag>> = evaluators.iter().map(|e| e.dependent_fields()).collect();
        let outs: Vec<Vec<FieldTag>> = evaluators.iter().map(|e| e.evaluated_fields()).collect();
        let names: Vec<String> = evaluators.iter().map(|e| e.name().to_string()).collect();

        for (i, name) in names.iter().enumerate() {
            if outs[i].is_empty() {
                return Err(GraphError::InvalidEvaluator {
                    name: name.clone(),
                    reason: "evaluates no fields".into(),
                });
            }
            if let Some(f) = outs[i]
                .iter()
                .find(|o| deps[i].iter().any(|d| d.key() == o.key()))
            {
                return Err(GraphError::InvalidEvaluator {
                    name: name.clone(),
                    reason: format!("field {} is both dependent and evaluated", f.name),
                });
            }
        }

        let mut producers: HashMap<(String, FieldKind), (Producer, &FieldTag)> = HashMap::new();
        let producer_name = |p: Producer| match p {
            Producer::External => EXTERNAL.to_string(),
            Producer::Eval(i) => names[i].clone(),
        };
        let declared = externals.iter().map(|t| (Producer::External, t)).chain(
            outs.iter()
                .enumerate()
                .flat_map(|(i, o)| o.iter().map(move |t| (Producer::Eval(i), t))),
        );
        for (p, tag) in declared {
            if let Some((first, _)) = producers.get(&tag.key()) {
                return Err(GraphError::DuplicateProducer {
                    field: tag.name.clone(),
                    first: producer_name(*first),
                    second: producer_name(p),
                });
            }
            producers.insert(tag.key(), (p, tag));
        }

        let lookup = |tag: &FieldTag, consumer: &str| -> Result<Producer, GraphError> {
            let (p, declared) =
                producers
                    .get(&tag.key())
                    .ok_or_else(|| GraphError::Unsatisfied {
                        field: tag.name.clone(),
                        consumer: consumer.to_string(),
                    })?;
            if declared.layout != tag.layout {
                return Err(GraphError::LayoutMismatch {
                    field: tag.name.clone(),
                    producer: producer_name(*p),
                    produced: declared.layout.to_string(),
                    consumer: consumer.to_string(),
                    expected: tag.layout.to_string(),
                });
            }
            Ok(*p)
        };

        // Walk backwards from the requested outputs.
        let n = evaluators.len();
        let mut needed = vec![false; n];
        let mut stack = Vec::new();
        for tag in required {
            if let Producer::Eval(i) = lookup(tag, REQUIRED)? {
                stack.push(i);
            }
        }
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut edges = BTreeSet::new();
        while let Some(i) = stack.pop() {
            if needed[i] {
                continue;
            }
            needed[i] = true;
            for tag in &deps[i] {
                let p = lookup(tag, &names[i])?;
                edges.insert((producer_name(p), tag.name.clone(), names[i].clone()));
                if let Producer::Eval(j) = p {
                    if !preds[i].contains(&j) {
                        preds[i].push(j);
                    }
                    stack.push(j);
                }
            }
        }

        // Kahn's algorithm; the heap hands out the lowest registration index first.
        let mut indegree: Vec<usize> = (0..n).map(|i| preds[i].len()).collect();
        let mut succs: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            for &j in &preds[i] {
                succs[j].push(i);
            }
        }
        let mut ready: BinaryHeap<Reverse<usize>> = (0..n)
            .filter(|&i| needed[i] && indegree[i] == 0)
            .map(Reverse)
            .collect();
        let mut order = Vec::new();
        while let Some(Reverse(i)) = ready.pop() {
            order.push(i);
            for &s in &succs[i] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    ready.push(Reverse(s));
                }
            }
        }
        let scheduled = needed.iter().filter(|&&b| b).count();
        if order.len() != scheduled {
            let stuck: Vec<usize> = (0..n).filter(|&i| needed[i] && indegree[i] > 0).collect();
            return Err(GraphError::Cycle(
                find_cycle(&stuck, &preds)
                    .into_iter()
                    .map(|i| names[i].clone())
                    .collect(),
            ));
        }

        let mut arena = FieldArena::new();
        for tag in externals {
            arena.allocate(tag, &dims)?;
        }
        for &i in &order {
            for tag in &outs[i] {
                arena.allocate(tag, &dims)?;
            }
        }

        let slots_of = |tags: &[FieldTag]| -> Vec<Slot> {
            tags.iter()
                .map(|t| arena.slot(&t.name, t.kind).expect("allocated above"))
                .collect()
        };
        let mut pending: Vec<Option<Box<dyn Evaluator<E>>>> =
            evaluators.into_iter().map(Some).collect();
        let mut nodes = Vec::with_capacity(order.len());
        for &i in &order {
            let inputs = slots_of(&deps[i]);
            let outputs = slots_of(&outs[i]);
            nodes.push(Node {
                eval: pending[i].take().expect("scheduled once"),
                inputs,
                outputs,
            });
        }
        let width = nodes.iter().map(|n| n.outputs.len()).max().unwrap_or(0);

        Ok(EvaluatorGraph {
            nodes,
            arena,
            dims,
            edges,
            scratch: Vec::with_capacity(width),
            executions: 0,
        })
    }

    /// Run every scheduled kernel once, in order.
    pub fn execute(&mut self, ws: &Workset) -> Result<(), GraphError> {
        let EvaluatorGraph {
            nodes,
            arena,
            scratch,
            executions,
            ..
        } = self;
        for node in nodes.iter_mut() {
            for &s in &node.outputs {
                scratch.push(arena.take(s));
            }
            let result = {
                let mut access = FieldAccess::<E> {
                    arena: &*arena,
                    inputs: &node.inputs,
                    outputs: scratch.as_mut_slice(),
                };
                node.eval.evaluate(ws, &mut access)
            };
            for (&s, f) in node.outputs.iter().zip(scratch.drain(..)) {
                arena.restore(s, f);
            }
            *executions += 1;
            result.map_err(|source| GraphError::Kernel {
                evaluator: node.eval.name().to_string(),
                source,
            })?;
        }
        Ok(())
    }

    pub fn schedule(&self) -> Vec<&str> {
        self.nodes.iter().map(|n| n.eval.name()).collect()
    }

    /// `(producer, field, consumer)` triples; externals appear as `<external>`.
    pub fn edges(&self) -> &BTreeSet<(String, String, String)> {
        &self.edges
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Kernel invocations since the graph was built.
    pub fn execution_count(&self) -> usize {
        self.executions
    }

    pub fn allocation_count(&self) -> usize {
        self.arena.allocation_count()
    }

    pub fn slot(&self, name: &str, kind: FieldKind) -> Option<Slot> {
        self.arena.slot(name, kind)
    }

    pub fn arena(&self) -> &FieldArena<E::S, E::M> {
        &self.arena
    }

    pub fn arena_mut(&mut self) -> &mut FieldArena<E::S, E::M> {
        &mut self.arena
    }

    /// Text adjacency list, one `producer -> consumer [field]` line per edge.
    pub fn adjacency_text(&self) -> String {
        let mut s = String::new();
        for (p, f, c) in &self.edges {
            let _ = writeln!(s, "{p} -> {c} [{f}]");
        }
        s
    }

    pub fn to_dot(&self) -> String {
        let mut s = format!("digraph \"{}\" {{\n", E::TAG);
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                s,
                "  \"{}\" [label=\"{}: {}\"];",
                n.eval.name(),
                i,
                n.eval.name()
            );
        }
        for (p, f, c) in &self.edges {
            let _ = writeln!(s, "  \"{p}\" -> \"{c}\" [label=\"{f}\"];");
        }
        s.push_str("}\n");
        s
    }
}

/// Any cycle through the nodes left over by Kahn's algorithm.
fn find_cycle(stuck: &[usize], preds: &[Vec<usize>]) -> Vec<usize> {
    let Some(&start) = stuck.first() else {
        return Vec::new();
    };
    let mut path = vec![start];
    let mut cur = start;
    loop {
        let next = *preds[cur]
            .iter()
            .find(|p| stuck.contains(p))
            .expect("stuck node has a stuck predecessor");
        if let Some(pos) = path.iter().position(|&p| p == next) {
            let mut cycle: Vec<usize> = path[pos..].to_vec();
            cycle.reverse();
            cycle.push(cycle[0]);
            return cycle;
        }
        path.push(next);
        cur = next;
    }
}
