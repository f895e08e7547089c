use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::Connectivity;

/// Fixed sparsity pattern: the symbolic closure of the element graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsrPattern {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
}

impl CsrPattern {
    pub fn from_connectivity(conn: &Connectivity) -> Arc<CsrPattern> {
        let n = conn.num_dofs();
        let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for e in 0..conn.num_elements() {
            let dofs: Vec<usize> = conn.element_dofs(e).collect();
            for &r in &dofs {
                rows[r].extend(dofs.iter().copied());
            }
        }
        Self::from_rows(rows.into_iter().map(|r| r.into_iter().collect()).collect())
    }

    /// Rows of sorted column indices.
    pub fn from_rows(rows: Vec<Vec<usize>>) -> Arc<CsrPattern> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for r in rows {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        Arc::new(CsrPattern { n, row_ptr, cols })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let r = self.row_range(row);
        self.cols[r.clone()]
            .binary_search(&col)
            .ok()
            .map(|k| r.start + k)
    }
}

/// Square CSR matrix over a shared pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pattern: Arc<CsrPattern>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: &Arc<CsrPattern>) -> Self {
        CsrMatrix {
            pattern: pattern.clone(),
            values: vec![0.0; pattern.nnz()],
        }
    }

    pub fn pattern(&self) -> &Arc<CsrPattern> {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Panics when `(row, col)` is outside the pattern.
    #[inline]
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let k = self
            .pattern
            .find(row, col)
            .unwrap_or_else(|| panic!("({row},{col}) not in sparsity pattern"));
        self.values[k] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pattern.find(row, col).map_or(0.0, |k| self.values[k])
    }

    pub fn zero_row(&mut self, row: usize) {
        for k in self.pattern.row_range(row) {
            self.values[k] = 0.0;
        }
    }

    pub fn set_row_identity(&mut self, row: usize) {
        self.zero_row(row);
        self.add(row, row, 1.0);
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim()) {
            let r = self.pattern.row_range(i);
            *yi = self.pattern.cols[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&c, v)| v * x[c])
                .sum();
        }
    }

    /// `y += a A x`
    pub fn matvec_add(&self, a: f64, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.dim()) {
            let r = self.pattern.row_range(i);
            let s: f64 = self.pattern.cols[r.clone()]
                .iter()
                .zip(&self.values[r])
                .map(|(&c, v)| v * x[c])
                .sum();
            *yi += a * s;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in self.pattern.row_range(i) {
                m[(i, self.pattern.cols[k])] = self.values[k];
            }
        }
        m
    }

    /// MatrixMarket coordinate format, 1-based.
    pub fn to_matrix_market(&self) -> String {
        let n = self.dim();
        let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
        let _ = writeln!(s, "{n} {n} {}", self.pattern.nnz());
        for i in 0..n {
            for k in self.pattern.row_range(i) {
                let _ = writeln!(
                    s,
                    "{} {} {:.17e}",
                    i + 1,
                    self.pattern.cols[k] + 1,
                    self.values[k]
                );
            }
        }
        s
    }
}

/// MatrixMarket array format for a dense vector.
pub fn vector_matrix_market(v: &[f64]) -> String {
    let mut s = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} 1", v.len());
    for x in v {
        let _ = writeln!(s, "{x:.17e}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::{Mesh, Region};

    #[test]
    fn pattern_is_element_closure() {
        let m = Mesh::rectangle(2.0, 1.0, 2, 1, Region::Slider).unwrap();
        let c = Connectivity::new(&m, 1);
        let p = CsrPattern::from_connectivity(&c);
        // corner node 0 couples to the 4 nodes of element 0; middle node 1 to all 6
        assert_eq!(p.row(0), &[0, 1, 3, 4]);
        assert_eq!(p.row(1).len(), 6);
        let mut a = CsrMatrix::zeros(&p);
        a.add(1, 5, 2.0);
        a.add(1, 5, 1.0);
        assert_eq!(a.get(1, 5), 3.0);
        assert_eq!(a.get(0, 5), 0.0);
        let mut y = vec![0.0; 6];
        a.matvec(&[0.0, 0.0, 0.0, 0.0, 0.0, 2.0], &mut y);
        assert_eq!(y[1], 6.0);
        assert!(a.to_matrix_market().starts_with("%%MatrixMarket"));
    }

    #[test]
    #[should_panic(expected = "not in sparsity pattern")]
    fn pattern_miss_is_fatal() {
        let m = Mesh::rectangle(2.0, 1.0, 2, 1, Region::Slider).unwrap();
        let p = CsrPattern::from_connectivity(&Connectivity::new(&m, 1));
        CsrMatrix::zeros(&p).add(0, 5, 1.0);
    }
}
