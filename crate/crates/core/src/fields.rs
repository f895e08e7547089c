//! Named multidimensional arrays over a generic scalar, and the arena that owns them.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Index, IndexMut};

use smallvec::SmallVec;
use thiserror::Error;

use crate::scalars::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("layout extents must all be >= 1, got {0:?}")]
    EmptyExtent(Vec<usize>),
    #[error("field {name}: expected layout {expected}, got {got}")]
    LayoutMismatch {
        name: String,
        expected: String,
        got: String,
    },
    #[error("field {0} already allocated")]
    Duplicate(String),
    #[error("no field named {0}")]
    Missing(String),
}

/// Symbolic extent of one field dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Extent {
    Cell,
    Node,
    QuadPoint,
    Eq,
    Dim,
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Extent::Cell => "Cell",
            Extent::Node => "Node",
            Extent::QuadPoint => "QP",
            Extent::Eq => "Eq",
            Extent::Dim => "Dim",
        })
    }
}

/// Concrete sizes for the symbolic extents of one workset layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub cells: usize,
    pub nodes: usize,
    pub qps: usize,
    pub eqs: usize,
    pub dims: usize,
}

impl Dims {
    pub fn extent(&self, e: Extent) -> usize {
        match e {
            Extent::Cell => self.cells,
            Extent::Node => self.nodes,
            Extent::QuadPoint => self.qps,
            Extent::Eq => self.eqs,
            Extent::Dim => self.dims,
        }
    }
}

/// Ordered symbolic extents, e.g. `[Cell, Node, QP]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LayoutSpec(pub Vec<Extent>);

impl LayoutSpec {
    pub fn new(extents: &[Extent]) -> Self {
        LayoutSpec(extents.to_vec())
    }

    pub fn resolve(&self, dims: &Dims) -> Result<Layout, FieldError> {
        Layout::new(&self.0.iter().map(|&e| dims.extent(e)).collect::<Vec<_>>())
    }
}

impl fmt::Display for LayoutSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Row-major (last index fastest) layout.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Layout {
    extents: SmallVec<[usize; 4]>,
    strides: SmallVec<[usize; 4]>,
}

impl Layout {
    pub fn new(extents: &[usize]) -> Result<Layout, FieldError> {
        if extents.contains(&0) {
            return Err(FieldError::EmptyExtent(extents.to_vec()));
        }
        let mut strides: SmallVec<[usize; 4]> = SmallVec::from_elem(1, extents.len());
        for d in (0..extents.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * extents[d + 1];
        }
        Ok(Layout {
            extents: SmallVec::from_slice(extents),
            strides,
        })
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn rank(&self) -> usize {
        self.extents.len()
    }

    pub fn size(&self) -> usize {
        self.extents.iter().product()
    }

    #[inline]
    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.extents.len(), "index rank mismatch");
        let mut off = 0;
        for ((&i, &n), &s) in index.iter().zip(&self.extents).zip(&self.strides) {
            debug_assert!(
                i < n,
                "index {index:?} out of bounds for {:?}",
                self.extents
            );
            off += i * s;
        }
        off
    }
}

/// Named dense array over scalar `S`.
#[derive(Debug, Clone)]
pub struct Field<S> {
    name: String,
    layout: Layout,
    data: Vec<S>,
}

impl<S> Default for Field<S> {
    fn default() -> Self {
        Field {
            name: String::new(),
            layout: Layout::default(),
            data: Vec::new(),
        }
    }
}

impl<S: Scalar> Field<S> {
    pub fn new(name: impl Into<String>, layout: Layout) -> Self {
        let data = vec![S::zero(); layout.size()];
        Field {
            name: name.into(),
            layout,
            data,
        }
    }

    /// Set every entry to `c` promoted to `S` (no derivative or higher chaos content).
    pub fn fill_constant(&mut self, c: f64) {
        for v in self.data.iter_mut() {
            *v = S::from(c);
        }
    }
}

impl<S> Field<S> {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn extent(&self, d: usize) -> usize {
        self.layout.extents[d]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn get(&self, index: &[usize]) -> &S {
        &self.data[self.layout.offset(index)]
    }

    pub fn get_mut(&mut self, index: &[usize]) -> &mut S {
        let o = self.layout.offset(index);
        &mut self.data[o]
    }
}

macro_rules! tuple_index {
    ($($i:ident),+) => {
        impl<S> Index<($(tuple_index!(@usize $i)),+)> for Field<S> {
            type Output = S;
            #[inline]
            fn index(&self, ($($i),+): ($(tuple_index!(@usize $i)),+)) -> &S {
                &self.data[self.layout.offset(&[$($i),+])]
            }
        }
        impl<S> IndexMut<($(tuple_index!(@usize $i)),+)> for Field<S> {
            #[inline]
            fn index_mut(&mut self, ($($i),+): ($(tuple_index!(@usize $i)),+)) -> &mut S {
                let o = self.layout.offset(&[$($i),+]);
                &mut self.data[o]
            }
        }
    };
    (@usize $i:ident) => { usize };
}

tuple_index!(a, b);
tuple_index!(a, b, c);
tuple_index!(a, b, c, d);

impl<S> Index<usize> for Field<S> {
    type Output = S;
    fn index(&self, i: usize) -> &S {
        &self.data[self.layout.offset(&[i])]
    }
}

impl<S> IndexMut<usize> for Field<S> {
    fn index_mut(&mut self, i: usize) -> &mut S {
        let o = self.layout.offset(&[i]);
        &mut self.data[o]
    }
}

/// Which generic scalar a field is stored in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FieldKind {
    /// Solution-dependent scalar.
    Scalar,
    /// Coordinate-dependent scalar.
    Mesh,
    /// Plain real.
    Real,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Scalar => "ScalarT",
            FieldKind::Mesh => "MeshScalarT",
            FieldKind::Real => "real",
        })
    }
}

/// Field declaration: name, symbolic layout and scalar kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldTag {
    pub name: String,
    pub layout: LayoutSpec,
    pub kind: FieldKind,
}

impl FieldTag {
    pub fn new(name: impl Into<String>, layout: &[Extent], kind: FieldKind) -> Self {
        FieldTag {
            name: name.into(),
            layout: LayoutSpec::new(layout),
            kind,
        }
    }

    pub fn scalar(name: impl Into<String>, layout: &[Extent]) -> Self {
        Self::new(name, layout, FieldKind::Scalar)
    }

    pub fn mesh(name: impl Into<String>, layout: &[Extent]) -> Self {
        Self::new(name, layout, FieldKind::Mesh)
    }

    pub fn real(name: impl Into<String>, layout: &[Extent]) -> Self {
        Self::new(name, layout, FieldKind::Real)
    }

    pub fn key(&self) -> (String, FieldKind) {
        (self.name.clone(), self.kind)
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}<{}>", self.name, self.layout, self.kind)
    }
}

/// Location of a field inside an arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub kind: FieldKind,
    pub index: usize,
}

/// A field moved out of the arena while an evaluator writes it.
#[derive(Debug)]
pub enum OwnedField<S, M> {
    Scalar(Field<S>),
    Mesh(Field<M>),
    Real(Field<f64>),
}

/// Storage for all fields of one graph instance, keyed by `(name, kind)`.
///
/// Allocation happens once when the graph is built; execution only moves
/// fields in and out of their slots.
#[derive(Debug)]
pub struct FieldArena<S, M> {
    scalar: Vec<Field<S>>,
    mesh: Vec<Field<M>>,
    real: Vec<Field<f64>>,
    slots: HashMap<(String, FieldKind), Slot>,
    allocations: usize,
}

impl<S, M> Default for FieldArena<S, M> {
    fn default() -> Self {
        FieldArena {
            scalar: Vec::new(),
            mesh: Vec::new(),
            real: Vec::new(),
            slots: HashMap::new(),
            allocations: 0,
        }
    }
}

impl<S: Scalar, M: Scalar> FieldArena<S, M> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn allocate(&mut self, tag: &FieldTag, dims: &Dims) -> Result<Slot, FieldError> {
        if self.slots.contains_key(&tag.key()) {
            return Err(FieldError::Duplicate(tag.to_string()));
        }
        let layout = tag.layout.resolve(dims)?;
        let slot = match tag.kind {
            FieldKind::Scalar => {
                self.scalar.push(Field::new(&tag.name, layout));
                Slot {
                    kind: tag.kind,
                    index: self.scalar.len() - 1,
                }
            }
            FieldKind::Mesh => {
                self.mesh.push(Field::new(&tag.name, layout));
                Slot {
                    kind: tag.kind,
                    index: self.mesh.len() - 1,
                }
            }
            FieldKind::Real => {
                self.real.push(Field::new(&tag.name, layout));
                Slot {
                    kind: tag.kind,
                    index: self.real.len() - 1,
                }
            }
        };
        self.allocations += 1;
        self.slots.insert(tag.key(), slot);
        Ok(slot)
    }

    /// Number of field allocations performed over the arena's lifetime.
    pub fn allocation_count(&self) -> usize {
        self.allocations
    }

    pub fn slot(&self, name: &str, kind: FieldKind) -> Option<Slot> {
        self.slots.get(&(name.to_string(), kind)).copied()
    }

    pub fn scalar(&self, slot: Slot) -> &Field<S> {
        debug_assert_eq!(slot.kind, FieldKind::Scalar);
        &self.scalar[slot.index]
    }

    pub fn mesh(&self, slot: Slot) -> &Field<M> {
        debug_assert_eq!(slot.kind, FieldKind::Mesh);
        &self.mesh[slot.index]
    }

    pub fn real(&self, slot: Slot) -> &Field<f64> {
        debug_assert_eq!(slot.kind, FieldKind::Real);
        &self.real[slot.index]
    }

    pub fn scalar_mut(&mut self, slot: Slot) -> &mut Field<S> {
        debug_assert_eq!(slot.kind, FieldKind::Scalar);
        &mut self.scalar[slot.index]
    }

    pub fn mesh_mut(&mut self, slot: Slot) -> &mut Field<M> {
        debug_assert_eq!(slot.kind, FieldKind::Mesh);
        &mut self.mesh[slot.index]
    }

    pub fn real_mut(&mut self, slot: Slot) -> &mut Field<f64> {
        debug_assert_eq!(slot.kind, FieldKind::Real);
        &mut self.real[slot.index]
    }

    pub fn take(&mut self, slot: Slot) -> OwnedField<S, M> {
        match slot.kind {
            FieldKind::Scalar => OwnedField::Scalar(std::mem::take(&mut self.scalar[slot.index])),
            FieldKind::Mesh => OwnedField::Mesh(std::mem::take(&mut self.mesh[slot.index])),
            FieldKind::Real => OwnedField::Real(std::mem::take(&mut self.real[slot.index])),
        }
    }

    pub fn restore(&mut self, slot: Slot, field: OwnedField<S, M>) {
        match field {
            OwnedField::Scalar(f) => self.scalar[slot.index] = f,
            OwnedField::Mesh(f) => self.mesh[slot.index] = f,
            OwnedField::Real(f) => self.real[slot.index] = f,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::Dual;

    #[test]
    fn linear_offsets() {
        assert_eq!(Layout::new(&[2, 3]).unwrap().offset(&[1, 2]), 5);
        assert_eq!(Layout::new(&[7]).unwrap().offset(&[0]), 0);
        assert_eq!(Layout::new(&[2, 2, 2]).unwrap().offset(&[1, 0, 1]), 5);
    }

    #[test]
    fn linearization_is_bijective() {
        let l = Layout::new(&[3, 4, 2, 5]).unwrap();
        let mut seen = vec![false; l.size()];
        for a in 0..3 {
            for b in 0..4 {
                for c in 0..2 {
                    for d in 0..5 {
                        let o = l.offset(&[a, b, c, d]);
                        assert!(!seen[o]);
                        seen[o] = true;
                    }
                }
            }
        }
        assert!(seen.into_iter().all(|s| s));
    }

    #[test]
    fn zero_extent_rejected() {
        assert!(matches!(
            Layout::new(&[2, 0]),
            Err(FieldError::EmptyExtent(_))
        ));
    }

    #[test]
    fn fill_and_sum() {
        let mut f: Field<f64> = Field::new("u", Layout::new(&[4]).unwrap());
        f.fill_constant(0.0);
        assert_eq!(f.data().iter().sum::<f64>(), 0.0);
        f.fill_constant(1.0);
        assert_eq!(f.data().iter().sum::<f64>(), 4.0);
    }

    #[test]
    fn fill_dual_has_zero_partials() {
        let mut f: Field<Dual> = Field::new("u", Layout::new(&[2, 3]).unwrap());
        f.fill_constant(2.5);
        assert!(f
            .data()
            .iter()
            .all(|d| *d.val() == 2.5 && d.dx().iter().all(|&x| x == 0.0)));
    }

    #[test]
    fn tuple_indexing() {
        let mut f: Field<f64> = Field::new("g", Layout::new(&[2, 3, 4, 2]).unwrap());
        f[(1, 2, 3, 1)] = 7.0;
        assert_eq!(f.data()[f.layout().size() - 1], 7.0);
        assert_eq!(*f.get(&[1, 2, 3, 1]), 7.0);
    }

    #[test]
    fn same_name_different_kind_coexist() {
        let dims = Dims {
            cells: 2,
            nodes: 4,
            qps: 4,
            eqs: 2,
            dims: 2,
        };
        let mut arena: FieldArena<Dual, f64> = FieldArena::new();
        let a = arena
            .allocate(&FieldTag::scalar("x", &[Extent::Cell, Extent::Node]), &dims)
            .unwrap();
        let b = arena
            .allocate(&FieldTag::mesh("x", &[Extent::Cell, Extent::Node]), &dims)
            .unwrap();
        arena.mesh_mut(b)[(0, 0)] = 3.0;
        assert_eq!(*arena.scalar(a)[(0, 0)].val(), 0.0);
        assert!(arena
            .allocate(&FieldTag::mesh("x", &[Extent::Cell]), &dims)
            .is_err());
        assert_eq!(arena.allocation_count(), 2);
    }
}
