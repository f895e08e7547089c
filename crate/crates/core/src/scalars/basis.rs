use std::sync::Arc;

use crate::quadrature::{gauss_legendre, legendre_values};

/// Shared data for a one-dimensional Legendre chaos basis of degree `P`.
///
/// Expectations are taken under the uniform density ½ on [-1, 1], so
/// `E[P_k^2] = 1 / (2k + 1)` and `E[P_0^2] = 1`.
#[derive(Debug, Clone)]
pub struct BasisData {
    degree: usize,
    norms: Vec<f64>,
    triple: Vec<f64>,
    /// Nonzero `(i, j, k, C_ijk)`, ordered by `k`, then `i`, then `j`.
    sparse: Vec<(usize, usize, usize, f64)>,
    quad_nodes: Vec<f64>,
    quad_weights: Vec<f64>,
}

impl BasisData {
    pub fn new(degree: usize) -> Arc<BasisData> {
        let n = degree + 1;
        // exact for polynomials of degree 3P
        let npts = (3 * degree) / 2 + 1;
        let (quad_nodes, quad_weights) = gauss_legendre(npts);
        let values: Vec<Vec<f64>> = quad_nodes
            .iter()
            .map(|&x| legendre_values(degree, x))
            .collect();

        let norms: Vec<f64> = (0..n).map(|k| 1.0 / (2.0 * k as f64 + 1.0)).collect();
        let mut triple = vec![0.0; n * n * n];
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let c = if (i + j + k) % 2 == 1 || k > i + j {
                        0.0
                    } else if i == 0 {
                        // C_0jk = delta_jk E[P_k^2]
                        if j == k {
                            norms[k]
                        } else {
                            0.0
                        }
                    } else {
                        0.5 * values
                            .iter()
                            .zip(&quad_weights)
                            .map(|(p, w)| w * p[i] * p[j] * p[k])
                            .sum::<f64>()
                    };
                    for (a, b, d) in [
                        (i, j, k),
                        (i, k, j),
                        (j, i, k),
                        (j, k, i),
                        (k, i, j),
                        (k, j, i),
                    ] {
                        triple[(a * n + b) * n + d] = c;
                    }
                }
            }
        }
        let mut sparse = Vec::new();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let c = triple[(i * n + j) * n + k];
                    if c != 0.0 {
                        sparse.push((i, j, k, c));
                    }
                }
            }
        }
        Arc::new(BasisData {
            degree,
            norms,
            triple,
            sparse,
            quad_nodes,
            quad_weights,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of chaos coefficients, `P + 1`.
    pub fn size(&self) -> usize {
        self.degree + 1
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    /// `E[P_i P_j P_k]`.
    #[inline]
    pub fn triple(&self, i: usize, j: usize, k: usize) -> f64 {
        let n = self.degree + 1;
        self.triple[(i * n + j) * n + k]
    }

    pub fn nonzero_triples(&self) -> &[(usize, usize, usize, f64)] {
        &self.sparse
    }

    pub fn quadrature(&self) -> (&[f64], &[f64]) {
        (&self.quad_nodes, &self.quad_weights)
    }

    pub fn same_as(&self, other: &BasisData) -> bool {
        std::ptr::eq(self, other) || self.degree == other.degree
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent projection with a 20-point rule.
    fn oracle_triple(i: usize, j: usize, k: usize) -> f64 {
        let (x, w) = gauss_legendre(20);
        x.iter()
            .zip(&w)
            .map(|(&x, &w)| {
                let p = legendre_values(i.max(j).max(k), x);
                0.5 * w * p[i] * p[j] * p[k]
            })
            .sum()
    }

    #[test]
    fn degree_zero() {
        let b = BasisData::new(0);
        assert_eq!(b.norms(), &[1.0]);
        assert_eq!(b.triple(0, 0, 0), 1.0);
    }

    #[test]
    fn degree_one_variance() {
        let b = BasisData::new(1);
        assert!((b.triple(0, 1, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn degree_three_c123() {
        // frozen from the 20-point oracle: 3/35
        let oracle = oracle_triple(1, 2, 3);
        assert!((oracle - 3.0 / 35.0).abs() < 1e-15);
        let b = BasisData::new(3);
        assert!((b.triple(1, 2, 3) - 3.0 / 35.0).abs() < 1e-15);
    }

    #[test]
    fn matches_oracle_everywhere() {
        for p in 0..=5 {
            let b = BasisData::new(p);
            for i in 0..=p {
                for j in 0..=p {
                    for k in 0..=p {
                        assert!((b.triple(i, j, k) - oracle_triple(i, j, k)).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn symmetry_and_parity() {
        let p = 4;
        let b = BasisData::new(p);
        for i in 0..=p {
            for j in 0..=p {
                for k in 0..=p {
                    let c = b.triple(i, j, k);
                    assert_eq!(c, b.triple(j, i, k));
                    assert_eq!(c, b.triple(k, j, i));
                    assert_eq!(c, b.triple(i, k, j));
                    if (i + j + k) % 2 == 1 || i > j + k || j > i + k || k > i + j {
                        assert_eq!(c, 0.0);
                    }
                }
                let expect = if i == j { b.norms()[i] } else { 0.0 };
                assert_eq!(b.triple(i, j, 0), expect);
            }
        }
    }
}
