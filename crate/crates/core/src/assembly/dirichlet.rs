use std::collections::BTreeMap;

/// Constrained dofs and their prescribed values, sorted by dof.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DirichletSet {
    entries: BTreeMap<usize, f64>,
}

impl DirichletSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Later insertions of the same dof overwrite earlier ones.
    pub fn insert(&mut self, dof: usize, value: f64) {
        self.entries.insert(dof, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&d, &v)| (d, v))
    }

    pub fn contains(&self, dof: usize) -> bool {
        self.entries.contains_key(&dof)
    }

    pub fn value(&self, dof: usize) -> Option<f64> {
        self.entries.get(&dof).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Overwrite constrained entries of `x` with their prescribed values.
    pub fn impose(&self, x: &mut [f64]) {
        for (d, v) in self.iter() {
            x[d] = v;
        }
    }

    /// Zero constrained entries (for update vectors).
    pub fn zero(&self, x: &mut [f64]) {
        for (d, _) in self.iter() {
            x[d] = 0.0;
        }
    }
}
