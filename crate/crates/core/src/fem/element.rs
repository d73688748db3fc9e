//! Lagrange P1 and P2 basis functions on affine triangles.
//!
//! Local P2 node order: the three vertices, then the midpoints of the local
//! edges `(0,1)`, `(1,2)`, `(2,0)`.

use crate::mesh::signed_area;

#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub coords: [[f64; 2]; 3],
    pub area: f64,
    /// Constant gradients of the barycentric coordinates.
    pub grad_lambda: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(coords: [[f64; 2]; 3]) -> Self {
        let area = signed_area(coords[0], coords[1], coords[2]);
        let mut grad_lambda = [[0.0; 2]; 3];
        for i in 0..3 {
            let pj = coords[(i + 1) % 3];
            let pk = coords[(i + 2) % 3];
            grad_lambda[i] = [(pj[1] - pk[1]) / (2.0 * area), (pk[0] - pj[0]) / (2.0 * area)];
        }
        ElementGeometry { coords, area, grad_lambda }
    }

    /// Physical point for barycentric coordinates `l`.
    pub fn map(&self, l: [f64; 3]) -> [f64; 2] {
        let c = &self.coords;
        [
            l[0] * c[0][0] + l[1] * c[1][0] + l[2] * c[2][0],
            l[0] * c[0][1] + l[1] * c[1][1] + l[2] * c[2][1],
        ]
    }

    /// Quadrature weight scale from reference to physical area.
    pub fn jacobian(&self) -> f64 {
        2.0 * self.area
    }
}

const EDGES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

pub fn p1_values(l: [f64; 3]) -> [f64; 3] {
    l
}

pub fn p2_values(l: [f64; 3]) -> [f64; 6] {
    let mut v = [0.0; 6];
    for i in 0..3 {
        v[i] = l[i] * (2.0 * l[i] - 1.0);
    }
    for (k, (i, j)) in EDGES.iter().enumerate() {
        v[3 + k] = 4.0 * l[*i] * l[*j];
    }
    v
}

pub fn p2_gradients(l: [f64; 3], geo: &ElementGeometry) -> [[f64; 2]; 6] {
    let g = &geo.grad_lambda;
    let mut d = [[0.0; 2]; 6];
    for i in 0..3 {
        let s = 4.0 * l[i] - 1.0;
        d[i] = [s * g[i][0], s * g[i][1]];
    }
    for (k, (i, j)) in EDGES.iter().enumerate() {
        d[3 + k] = [
            4.0 * (l[*j] * g[*i][0] + l[*i] * g[*j][0]),
            4.0 * (l[*j] * g[*i][1] + l[*i] * g[*j][1]),
        ];
    }
    d
}
