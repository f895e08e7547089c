//! String-keyed parameter library with push semantics.

use std::collections::BTreeMap;
use std::fmt::Debug;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::graph::EvalTag;
use crate::scalars::{ParamValue, Pce, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("unknown parameter {0}")]
    Unknown(String),
    #[error("parameter {0} registered twice")]
    Duplicate(String),
    #[error("parameter {0} registered after the library was frozen")]
    Frozen(String),
}

/// Receives values pushed by the library.
pub trait ParamAccessor: Send + Sync + Debug {
    fn push(&self, value: &ParamValue);
}

/// Typed parameter slot read by a kernel.
#[derive(Debug)]
pub struct ParamCell<S>(RwLock<S>);

impl<S: Scalar> ParamCell<S> {
    pub fn new(v: S) -> Self {
        ParamCell(RwLock::new(v))
    }

    pub fn get(&self) -> S {
        self.0.read().expect("parameter lock poisoned").clone()
    }
}

impl<S: Scalar> ParamAccessor for ParamCell<S> {
    fn push(&self, value: &ParamValue) {
        *self.0.write().expect("parameter lock poisoned") = S::from_param(value);
    }
}

#[derive(Debug)]
struct Entry {
    value: f64,
    expansion: Option<Pce>,
    seed: Option<(usize, usize)>,
    accessors: Vec<(EvalTag, Arc<dyn ParamAccessor>)>,
}

impl Entry {
    fn pushed_value(&self, tag: EvalTag) -> ParamValue {
        match (&self.expansion, self.seed) {
            (Some(e), _) if tag.is_stochastic() => ParamValue::Expansion(e.clone()),
            (_, Some((index, width))) if tag == EvalTag::Tangent => ParamValue::Seeded {
                value: self.value,
                index,
                width,
            },
            _ => ParamValue::Real(self.value),
        }
    }

    fn push_all(&self) {
        for (tag, a) in &self.accessors {
            a.push(&self.pushed_value(*tag));
        }
    }
}

/// Registry of named model parameters.
///
/// Setting a value pushes it into every typed accessor. Tangent accessors of
/// seeded parameters receive their unit seed; stochastic accessors receive the
/// expansion when one is set.
#[derive(Debug, Default)]
pub struct ParameterLibrary {
    entries: BTreeMap<String, Entry>,
    frozen: bool,
}

impl ParameterLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register_parameter(&mut self, name: &str, initial: f64) -> Result<(), ParamError> {
        if self.frozen {
            return Err(ParamError::Frozen(name.to_string()));
        }
        if self.entries.contains_key(name) {
            return Err(ParamError::Duplicate(name.to_string()));
        }
        self.entries.insert(
            name.to_string(),
            Entry {
                value: initial,
                expansion: None,
                seed: None,
                accessors: Vec::new(),
            },
        );
        Ok(())
    }

    /// Create a typed slot for `name`, attached to evaluation type `tag` and
    /// initialized with the current value.
    pub fn accessor<S: Scalar>(
        &mut self,
        name: &str,
        tag: EvalTag,
    ) -> Result<Arc<ParamCell<S>>, ParamError> {
        let entry = self
            .entries
            .get_mut(name)
            .ok_or_else(|| ParamError::Unknown(name.to_string()))?;
        let cell = Arc::new(ParamCell::new(S::from_param(&entry.pushed_value(tag))));
        entry.accessors.push((tag, cell.clone()));
        Ok(cell)
    }

    /// Forbid further registrations.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn list(&self) -> Vec<String> {
        self.entries.keys().cloned().collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn get_value(&self, name: &str) -> Result<f64, ParamError> {
        self.entries
            .get(name)
            .map(|e| e.value)
            .ok_or_else(|| ParamError::Unknown(name.to_string()))
    }

    pub fn get_expansion(&self, name: &str) -> Result<Option<&Pce>, ParamError> {
        self.entries
            .get(name)
            .map(|e| e.expansion.as_ref())
            .ok_or_else(|| ParamError::Unknown(name.to_string()))
    }

    pub fn set_parameter(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        let e = self
            .entries
            .get_mut(name)
            .ok_or_else(|| ParamError::Unknown(name.to_string()))?;
        e.value = value;
        e.push_all();
        Ok(())
    }

    /// Make `name` uncertain. Deterministic types keep seeing the mean.
    pub fn set_expansion(&mut self, name: &str, expansion: Option<Pce>) -> Result<(), ParamError> {
        let e = self
            .entries
            .get_mut(name)
            .ok_or_else(|| ParamError::Unknown(name.to_string()))?;
        if let Some(x) = &expansion {
            e.value = x.mean();
        }
        e.expansion = expansion;
        e.push_all();
        Ok(())
    }

    /// Seed `names[k]` with `e_k` in Tangent accessors; all other parameters lose their seeds.
    pub fn seed_tangent(&mut self, names: &[&str]) -> Result<(), ParamError> {
        for n in names {
            if !self.entries.contains_key(*n) {
                return Err(ParamError::Unknown(n.to_string()));
            }
        }
        for (name, e) in self.entries.iter_mut() {
            e.seed = names
                .iter()
                .position(|n| n == name)
                .map(|k| (k, names.len()));
            e.push_all();
        }
        Ok(())
    }

    pub fn clear_seeds(&mut self) {
        for e in self.entries.values_mut() {
            if e.seed.take().is_some() {
                e.push_all();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{BasisData, Dual};

    #[test]
    fn register_and_list() {
        let mut lib = ParameterLibrary::new();
        lib.register_parameter("Alpha", 0.0).unwrap();
        lib.register_parameter("Beta", 0.0).unwrap();
        assert_eq!(lib.list(), vec!["Alpha".to_string(), "Beta".to_string()]);
        assert_eq!(
            lib.register_parameter("Alpha", 1.0),
            Err(ParamError::Duplicate("Alpha".into()))
        );
        lib.freeze();
        assert_eq!(
            lib.register_parameter("Gamma", 1.0),
            Err(ParamError::Frozen("Gamma".into()))
        );
        assert_eq!(
            lib.set_parameter("Gamma", 1.0),
            Err(ParamError::Unknown("Gamma".into()))
        );
    }

    #[test]
    fn set_pushes_to_every_type() {
        let mut lib = ParameterLibrary::new();
        lib.register_parameter("Alpha", 1.0).unwrap();
        let r = lib.accessor::<f64>("Alpha", EvalTag::Residual).unwrap();
        let j = lib.accessor::<Dual>("Alpha", EvalTag::Jacobian).unwrap();
        assert_eq!(r.get(), 1.0);
        lib.set_parameter("Alpha", 2.0).unwrap();
        assert_eq!(r.get(), 2.0);
        assert_eq!(*j.get().val(), 2.0);
        assert_eq!(lib.get_value("Alpha").unwrap(), 2.0);
    }

    #[test]
    fn tangent_seeds() {
        let mut lib = ParameterLibrary::new();
        lib.register_parameter("Alpha", 1.0).unwrap();
        lib.register_parameter("Beta", 2.0).unwrap();
        let a = lib.accessor::<Dual>("Alpha", EvalTag::Tangent).unwrap();
        let b = lib.accessor::<Dual>("Beta", EvalTag::Tangent).unwrap();
        let bj = lib.accessor::<Dual>("Beta", EvalTag::Jacobian).unwrap();
        lib.seed_tangent(&["Beta", "Alpha"]).unwrap();
        assert_eq!(a.get().dx(), &[0.0, 1.0]);
        assert_eq!(b.get().dx(), &[1.0, 0.0]);
        assert!(bj.get().is_constant());
        lib.clear_seeds();
        assert!(a.get().is_constant());
    }

    #[test]
    fn expansion_reaches_stochastic_types_only() {
        let basis = BasisData::new(3);
        let mut lib = ParameterLibrary::new();
        lib.register_parameter("SigmaPad", 35.0).unwrap();
        let r = lib.accessor::<f64>("SigmaPad", EvalTag::Residual).unwrap();
        let sg = lib
            .accessor::<Pce>("SigmaPad", EvalTag::SgResidual)
            .unwrap();
        let e = Pce::new(vec![35.0, 15.0, 0.0, 0.0], &basis).unwrap();
        lib.set_expansion("SigmaPad", Some(e.clone())).unwrap();
        assert_eq!(r.get(), 35.0);
        assert_eq!(sg.get().coeffs(), e.coeffs());
    }
}
