use super::DiscretizationError;
use crate::quadrature::gauss_legendre;

/// Reference-node corners, counterclockwise.
const CORNERS: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// Bilinear basis values and reference gradients at tensor Gauss points on `[-1,1]^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    order: usize,
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
    /// `[node][qp]`
    values: Vec<Vec<f64>>,
    grads: Vec<Vec<[f64; 2]>>,
}

impl BasisSet {
    pub fn bilinear(order: usize) -> Result<BasisSet, DiscretizationError> {
        if !(1..=3).contains(&order) {
            return Err(DiscretizationError::UnsupportedOrder(order));
        }
        let (x, w) = gauss_legendre(order);
        let mut points = Vec::with_capacity(order * order);
        let mut weights = Vec::with_capacity(order * order);
        for b in 0..order {
            for a in 0..order {
                points.push([x[a], x[b]]);
                weights.push(w[a] * w[b]);
            }
        }
        let values = (0..4)
            .map(|i| points.iter().map(|p| shape(i, *p)).collect())
            .collect();
        let grads = (0..4)
            .map(|i| points.iter().map(|p| shape_grad(i, *p)).collect())
            .collect();
        Ok(BasisSet {
            order,
            points,
            weights,
            values,
            grads,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_nodes(&self) -> usize {
        4
    }

    pub fn num_qps(&self) -> usize {
        self.points.len()
    }

    pub fn point(&self, q: usize) -> [f64; 2] {
        self.points[q]
    }

    pub fn weight(&self, q: usize) -> f64 {
        self.weights[q]
    }

    pub fn value(&self, node: usize, q: usize) -> f64 {
        self.values[node][q]
    }

    pub fn ref_grad(&self, node: usize, q: usize) -> [f64; 2] {
        self.grads[node][q]
    }
}

/// Bilinear shape function of reference node `i` at `p`.
pub fn shape(i: usize, p: [f64; 2]) -> f64 {
    let c = CORNERS[i];
    0.25 * (1.0 + c[0] * p[0]) * (1.0 + c[1] * p[1])
}

fn shape_grad(i: usize, p: [f64; 2]) -> [f64; 2] {
    let c = CORNERS[i];
    [
        0.25 * c[0] * (1.0 + c[1] * p[1]),
        0.25 * c[1] * (1.0 + c[0] * p[0]),
    ]
}
