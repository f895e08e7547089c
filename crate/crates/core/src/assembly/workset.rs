use std::ops::Range;

use crate::discretization::{Mesh, Region};

/// Contiguous, region-homogeneous block of elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Workset {
    pub index: usize,
    pub region: Region,
    pub start: usize,
    pub len: usize,
}

impl Workset {
    pub fn elements(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

/// Split the element range into worksets of at most `size` elements, breaking
/// at region changes.
pub fn build_worksets(mesh: &Mesh, size: usize) -> Vec<Workset> {
    assert!(size > 0, "workset size must be positive");
    let regions = mesh.regions();
    let mut out = Vec::new();
    let mut start = 0;
    while start < regions.len() {
        let region = regions[start];
        let mut end = start + 1;
        while end < regions.len() && end - start < size && regions[end] == region {
            end += 1;
        }
        out.push(Workset {
            index: out.len(),
            region,
            start,
            len: end - start,
        });
        start = end;
    }
    out
}

/// `(element, local node, equation) -> global dof`, interleaved `node * neq + eq`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connectivity {
    neq: usize,
    num_nodes: usize,
    elements: Vec<[usize; 4]>,
}

impl Connectivity {
    pub fn new(mesh: &Mesh, neq: usize) -> Self {
        Connectivity {
            neq,
            num_nodes: mesh.num_nodes(),
            elements: mesh.elements().to_vec(),
        }
    }

    #[inline]
    pub fn dof(&self, elem: usize, local_node: usize, eq: usize) -> usize {
        self.elements[elem][local_node] * self.neq + eq
    }

    pub fn num_dofs(&self) -> usize {
        self.num_nodes * self.neq
    }

    pub fn num_eqs(&self) -> usize {
        self.neq
    }

    pub fn nodes_per_element(&self) -> usize {
        4
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Element dofs in local order `node * neq + eq`.
    pub fn element_dofs(&self, elem: usize) -> impl Iterator<Item = usize> + '_ {
        (0..4).flat_map(move |n| (0..self.neq).map(move |q| self.dof(elem, n, q)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::SliderGeometry;

    #[test]
    fn worksets_partition_and_are_homogeneous() {
        let m = Mesh::slider(&SliderGeometry::default()).unwrap();
        for size in [1, 7, 50, 1000] {
            let ws = build_worksets(&m, size);
            let mut next = 0;
            for w in &ws {
                assert_eq!(w.start, next);
                assert!(w.len <= size && w.len > 0);
                assert!(w.elements().all(|e| m.region(e) == w.region));
                next += w.len;
            }
            assert_eq!(next, m.num_elements());
        }
        assert_eq!(build_worksets(&m, 1000).len(), 3);
    }

    #[test]
    fn dof_map_is_surjective() {
        let m = Mesh::rectangle(1.0, 1.0, 3, 2, Region::Slider).unwrap();
        let c = Connectivity::new(&m, 2);
        let mut hit = vec![false; c.num_dofs()];
        for e in 0..c.num_elements() {
            for d in c.element_dofs(e) {
                hit[d] = true;
            }
        }
        assert!(hit.iter().all(|&h| h));
        assert_eq!(c.dof(0, 2, 1), m.element(0)[2] * 2 + 1);
    }
}
