use crate::mesh::{BoundaryTag, Mesh};

/// Zero-mean pressure constraint that replaces one continuity row.
#[derive(Debug, Clone)]
pub struct GaugeConstraint {
    /// Global row (a pressure dof) replaced by the constraint.
    pub row: usize,
    /// `∫ ψ_q dx` for every P1 pressure basis function.
    pub weights: Vec<f64>,
}

/// Taylor-Hood P2 velocity / P1 pressure numbering.
///
/// Global layout: x-velocity block, y-velocity block, pressure block. Scalar P2
/// dofs are the mesh vertices followed by the mesh edges.
#[derive(Debug, Clone)]
pub struct MixedDofMap {
    pub n_vertices: usize,
    pub n_velocity_scalar: usize,
    pub n_velocity: usize,
    pub n_pressure: usize,
    /// Sorted by dof index, one entry per constrained velocity dof.
    pub dirichlet_dofs: Vec<(usize, f64)>,
    pub gauge: GaugeConstraint,
    element_nodes: Vec<[usize; 6]>,
}

impl MixedDofMap {
    /// Number the dofs of `mesh` with boundary velocity `bc(point, tag)`.
    pub fn new(mesh: &Mesh, bc: impl Fn([f64; 2], BoundaryTag) -> [f64; 2]) -> Self {
        let nv = mesh.num_vertices();
        let ns = nv + mesh.num_edges();

        let mut dirichlet = Vec::new();
        let mut constrain = |node: usize, value: [f64; 2]| {
            dirichlet.push((node, value[0]));
            dirichlet.push((ns + node, value[1]));
        };
        for &(v, tag) in &mesh.boundary_vertices {
            constrain(v, bc(mesh.vertices[v], tag));
        }
        for &(e, tag) in &mesh.boundary_edges {
            constrain(nv + e, bc(mesh.edge_midpoint(e), tag));
        }
        dirichlet.sort_by_key(|&(i, _)| i);

        let element_nodes = mesh
            .triangles
            .iter()
            .zip(&mesh.triangle_edges)
            .map(|(t, e)| [t[0], t[1], t[2], nv + e[0], nv + e[1], nv + e[2]])
            .collect();

        let mut weights = vec![0.0; nv];
        for t in 0..mesh.num_triangles() {
            let a = mesh.area(t) / 3.0;
            for &v in &mesh.triangles[t] {
                weights[v] += a;
            }
        }

        MixedDofMap {
            n_vertices: nv,
            n_velocity_scalar: ns,
            n_velocity: 2 * ns,
            n_pressure: nv,
            dirichlet_dofs: dirichlet,
            gauge: GaugeConstraint { row: 2 * ns, weights },
            element_nodes,
        }
    }

    /// Lid-driven cavity data: `(1, 0)` on the lid, no-slip elsewhere.
    pub fn cavity(mesh: &Mesh) -> Self {
        Self::cavity_with_lid(mesh, 1.0)
    }

    /// Cavity data with lid velocity `(speed, 0)`.
    pub fn cavity_with_lid(mesh: &Mesh, speed: f64) -> Self {
        Self::new(mesh, |_, tag| match tag {
            BoundaryTag::Lid => [speed, 0.0],
            BoundaryTag::Wall => [0.0, 0.0],
        })
    }

    /// Homogeneous no-slip data on the whole boundary.
    pub fn no_slip(mesh: &Mesh) -> Self {
        Self::new(mesh, |_, _| [0.0, 0.0])
    }

    pub fn n_total(&self) -> usize {
        self.n_velocity + self.n_pressure
    }

    pub fn pressure_offset(&self) -> usize {
        self.n_velocity
    }

    /// Scalar P2 node indices of triangle `t` in local order.
    pub fn element_nodes(&self, t: usize) -> &[usize; 6] {
        &self.element_nodes[t]
    }

    /// Boolean mask over velocity dofs marking Dirichlet constraints.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_velocity];
        for &(i, _) in &self.dirichlet_dofs {
            mask[i] = true;
        }
        mask
    }

    /// Velocity vector holding the boundary values and zero elsewhere.
    pub fn lifting(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.n_velocity];
        for &(i, g) in &self.dirichlet_dofs {
            u[i] = g;
        }
        u
    }

    /// P2 nodal interpolant of a vector field.
    pub fn interpolate(&self, mesh: &Mesh, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let ns = self.n_velocity_scalar;
        let mut u = vec![0.0; self.n_velocity];
        for (v, p) in mesh.vertices.iter().enumerate() {
            let val = f(*p);
            u[v] = val[0];
            u[ns + v] = val[1];
        }
        for e in 0..mesh.num_edges() {
            let val = f(mesh.edge_midpoint(e));
            u[self.n_vertices + e] = val[0];
            u[ns + self.n_vertices + e] = val[1];
        }
        u
    }

    /// P1 nodal interpolant of a scalar field.
    pub fn interpolate_pressure(&self, mesh: &Mesh, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        mesh.vertices.iter().map(|p| f(*p)).collect()
    }

    /// `∫ p dx` for a P1 pressure vector.
    pub fn pressure_integral(&self, p: &[f64]) -> f64 {
        self.gauge.weights.iter().zip(p).map(|(w, x)| w * x).sum()
    }
}
