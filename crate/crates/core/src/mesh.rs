//! Structured triangulations of the unit square.
//!
//! Two patterns are available. `Diagonal` splits every grid cell along the
//! diagonal from its lower-left to its upper-right corner; `Crossed` adds the
//! cell center and splits the cell into four triangles. Vertices on `y = 1`
//! are tagged [`BoundaryTag::Lid`] (the top corners included); every other
//! boundary vertex is a [`BoundaryTag::Wall`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};

/// Coordinate tolerance used for boundary classification.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    Diagonal,
    Crossed,
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Diagonal => f.write_str("diagonal"),
            Pattern::Crossed => f.write_str("crossed"),
        }
    }
}

impl std::str::FromStr for Pattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "diagonal" => Ok(Pattern::Diagonal),
            "crossed" => Ok(Pattern::Crossed),
            other => Err(Error::InvalidArgument(format!("unknown mesh pattern `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Lid,
    Wall,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Sorted vertex pairs `(a, b)` with `a < b`, in lexicographic order.
    pub edges: Vec<[usize; 2]>,
    /// For every triangle, the edge indices of the local edges `(0,1)`, `(1,2)`, `(2,0)`.
    pub triangle_edges: Vec<[usize; 3]>,
    pub boundary_vertices: Vec<(usize, BoundaryTag)>,
    pub boundary_edges: Vec<(usize, BoundaryTag)>,
    pub pattern: Pattern,
}

fn on_boundary(p: [f64; 2]) -> bool {
    p[0].abs() <= BOUNDARY_TOL
        || (p[0] - 1.0).abs() <= BOUNDARY_TOL
        || p[1].abs() <= BOUNDARY_TOL
        || (p[1] - 1.0).abs() <= BOUNDARY_TOL
}

fn on_lid(p: [f64; 2]) -> bool {
    (p[1] - 1.0).abs() <= BOUNDARY_TOL
}

/// True when both points lie on a common side of the unit square.
fn on_same_side(p: [f64; 2], q: [f64; 2]) -> bool {
    let near = |a: f64, b: f64| (a - b).abs() <= BOUNDARY_TOL;
    (near(p[0], 0.0) && near(q[0], 0.0))
        || (near(p[0], 1.0) && near(q[0], 1.0))
        || (near(p[1], 0.0) && near(q[1], 0.0))
        || (near(p[1], 1.0) && near(q[1], 1.0))
}

fn sorted_pair(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

pub fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Build a structured mesh with `n` cells per side.
pub fn build_unit_square_mesh(n: usize, pattern: Pattern) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument("mesh subdivisions must be at least 1".into()));
    }
    let h = 1.0 / n as f64;
    let grid = |i: usize, j: usize| j * (n + 1) + i;

    let mut vertices = Vec::with_capacity((n + 1) * (n + 1) + n * n);
    for j in 0..=n {
        for i in 0..=n {
            // Exact endpoints so boundary tests never depend on rounding.
            let x = if i == n { 1.0 } else { i as f64 * h };
            let y = if j == n { 1.0 } else { j as f64 * h };
            vertices.push([x, y]);
        }
    }

    let mut triangles = Vec::new();
    match pattern {
        Pattern::Diagonal => {
            triangles.reserve(2 * n * n);
            for j in 0..n {
                for i in 0..n {
                    let (v00, v10, v01, v11) =
                        (grid(i, j), grid(i + 1, j), grid(i, j + 1), grid(i + 1, j + 1));
                    triangles.push([v00, v10, v11]);
                    triangles.push([v00, v11, v01]);
                }
            }
        }
        Pattern::Crossed => {
            triangles.reserve(4 * n * n);
            for j in 0..n {
                for i in 0..n {
                    let c = vertices.len();
                    vertices.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
                    let (v00, v10, v01, v11) =
                        (grid(i, j), grid(i + 1, j), grid(i, j + 1), grid(i + 1, j + 1));
                    triangles.push([v00, v10, c]);
                    triangles.push([v10, v11, c]);
                    triangles.push([v11, v01, c]);
                    triangles.push([v01, v00, c]);
                }
            }
        }
    }

    Ok(Mesh::from_parts(vertices, triangles, pattern))
}

impl Mesh {
    /// Assemble edge tables and boundary tags from raw vertex and triangle arrays.
    pub fn from_parts(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>, pattern: Pattern) -> Mesh {
        let mut incidence: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for t in &triangles {
            for k in 0..3 {
                *incidence.entry(sorted_pair(t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        let edges: Vec<[usize; 2]> = incidence.keys().copied().collect();
        let index: HashMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let triangle_edges = triangles
            .iter()
            .map(|t| {
                let mut te = [0; 3];
                for k in 0..3 {
                    te[k] = index[&sorted_pair(t[k], t[(k + 1) % 3])];
                }
                te
            })
            .collect();

        let tag = |p: [f64; 2]| if on_lid(p) { BoundaryTag::Lid } else { BoundaryTag::Wall };
        let boundary_vertices = vertices
            .iter()
            .enumerate()
            .filter(|(_, p)| on_boundary(**p))
            .map(|(i, p)| (i, tag(*p)))
            .collect();
        let boundary_edges = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| incidence[*e] == 1)
            .map(|(i, e)| {
                let (a, b) = (vertices[e[0]], vertices[e[1]]);
                (i, tag([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]))
            })
            .collect();

        Mesh { vertices, triangles, edges, triangle_edges, boundary_vertices, boundary_edges, pattern }
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        signed_area(a, b, c)
    }

    pub fn edge_midpoint(&self, e: usize) -> [f64; 2] {
        let [a, b] = self.edges[e];
        let (p, q) = (self.vertices[a], self.vertices[b]);
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    /// Plain-text dump: a header line `V T`, then `x y` per vertex and `i j k` per triangle.
    pub fn write_node_element<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{} {}", self.num_vertices(), self.num_triangles())?;
        for p in &self.vertices {
            writeln!(out, "{:.17e} {:.17e}", p[0], p[1])?;
        }
        for t in &self.triangles {
            writeln!(out, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}

/// A broken mesh invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NonPositiveArea { triangle: usize, area: f64 },
    /// An edge shared by more than two triangles, or by a single triangle away from the boundary.
    EdgeIncidence { edge: [usize; 2], count: usize },
    /// A vertex referenced by no triangle.
    DanglingVertex { vertex: usize },
    /// The stored edge table disagrees with the edges implied by the triangles.
    EdgeTable { stored: usize, implied: usize },
    Euler { vertices: usize, edges: usize, triangles: usize },
    BoundaryTag { vertex: usize, expected: Option<BoundaryTag>, found: Option<BoundaryTag> },
    BadIndex { triangle: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveArea { triangle, area } => {
                write!(f, "negative area: triangle {triangle} has signed area {area:e}")
            }
            Violation::EdgeIncidence { edge, count } => {
                write!(f, "conformity: edge ({}, {}) is shared by {count} triangle(s)", edge[0], edge[1])
            }
            Violation::DanglingVertex { vertex } => {
                write!(f, "conformity: vertex {vertex} is not used by any triangle")
            }
            Violation::EdgeTable { stored, implied } => {
                write!(f, "conformity: edge table holds {stored} edges, triangles imply {implied}")
            }
            Violation::Euler { vertices, edges, triangles } => {
                write!(f, "euler: V - E + T = {vertices} - {edges} + {triangles} != 1")
            }
            Violation::BoundaryTag { vertex, expected, found } => {
                write!(f, "boundary tag: vertex {vertex} expected {expected:?}, found {found:?}")
            }
            Violation::BadIndex { triangle } => {
                write!(f, "index: triangle {triangle} references a missing vertex")
            }
        }
    }
}

/// Check every mesh invariant, returning one entry per offending entity.
pub fn validate(mesh: &Mesh) -> Vec<Violation> {
    let mut out = Vec::new();
    let nv = mesh.vertices.len();

    let mut referenced = vec![false; nv];
    let mut incidence: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if tri.iter().any(|&v| v >= nv) {
            out.push(Violation::BadIndex { triangle: t });
            continue;
        }
        for &v in tri {
            referenced[v] = true;
        }
        let area = mesh.area(t);
        if !(area > 0.0) {
            out.push(Violation::NonPositiveArea { triangle: t, area });
        }
        for k in 0..3 {
            *incidence.entry(sorted_pair(tri[k], tri[(k + 1) % 3])).or_default() += 1;
        }
    }

    for (edge, &count) in &incidence {
        let boundary = on_same_side(mesh.vertices[edge[0]], mesh.vertices[edge[1]]);
        let ok = match count {
            1 => boundary,
            2 => !boundary,
            _ => false,
        };
        if !ok {
            out.push(Violation::EdgeIncidence { edge: *edge, count });
        }
    }

    for (v, &used) in referenced.iter().enumerate() {
        if !used {
            out.push(Violation::DanglingVertex { vertex: v });
        }
    }

    let implied: Vec<[usize; 2]> = incidence.keys().copied().collect();
    if implied != mesh.edges {
        out.push(Violation::EdgeTable { stored: mesh.edges.len(), implied: implied.len() });
    }

    let v_used = referenced.iter().filter(|&&u| u).count();
    if v_used as i64 - implied.len() as i64 + mesh.triangles.len() as i64 != 1 {
        out.push(Violation::Euler {
            vertices: v_used,
            edges: implied.len(),
            triangles: mesh.triangles.len(),
        });
    }

    let tags: HashMap<usize, BoundaryTag> = mesh.boundary_vertices.iter().copied().collect();
    for (v, p) in mesh.vertices.iter().enumerate() {
        if !referenced[v] {
            continue;
        }
        let expected = if on_boundary(*p) {
            Some(if on_lid(*p) { BoundaryTag::Lid } else { BoundaryTag::Wall })
        } else {
            None
        };
        let found = tags.get(&v).copied();
        if expected != found {
            out.push(Violation::BoundaryTag { vertex: v, expected, found });
        }
    }

    out
}
