//! Element loops for the bilinear and trilinear forms of the discrete equations.
//!
//! Velocity coefficient vectors use the [`MixedDofMap`] layout (x block, then y
//! block). Every form is integrated with the degree-5 rule, which is exact for
//! the P2·∇P2·P2 convection integrand.

use super::dofmap::MixedDofMap;
use super::element::{p1_values, p2_gradients, p2_values, ElementGeometry};
use super::quadrature::QuadratureRule;
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::mesh::Mesh;

/// Basis data of one element at one quadrature point.
struct PointData {
    weight: f64,
    x: [f64; 2],
    n: [f64; 6],
    dn: [[f64; 2]; 6],
    p1: [f64; 3],
}

fn point_data(geo: &ElementGeometry, rule: &QuadratureRule, q: usize) -> PointData {
    let l = rule.points[q];
    PointData {
        weight: rule.weights[q] * geo.jacobian(),
        x: geo.map(l),
        n: p2_values(l),
        dn: p2_gradients(l, geo),
        p1: p1_values(l),
    }
}

fn geometry(mesh: &Mesh, t: usize) -> ElementGeometry {
    ElementGeometry::new(mesh.triangle_coords(t))
}

/// Velocity value and gradient `g[c][d] = ∂_d u_c` at a point.
fn eval_velocity(u: &[f64], nodes: &[usize; 6], ns: usize, pd: &PointData) -> ([f64; 2], [[f64; 2]; 2]) {
    let mut val = [0.0; 2];
    let mut grad = [[0.0; 2]; 2];
    for c in 0..2 {
        for a in 0..6 {
            let coef = u[c * ns + nodes[a]];
            val[c] += coef * pd.n[a];
            grad[c][0] += coef * pd.dn[a][0];
            grad[c][1] += coef * pd.dn[a][1];
        }
    }
    (val, grad)
}

fn check_velocity(u: &[f64], dofmap: &MixedDofMap, what: &'static str) -> Result<()> {
    if u.len() != dofmap.n_velocity {
        return Err(Error::DimensionMismatch { what, expected: dofmap.n_velocity, got: u.len() });
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

/// Element stiffness `∫ ∇φ_a · ∇φ_b` for the three P1 basis functions.
pub fn p1_element_stiffness(geo: &ElementGeometry) -> [[f64; 3]; 3] {
    let g = &geo.grad_lambda;
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = geo.area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        }
    }
    k
}

/// Element stiffness `∫ ∇φ_a · ∇φ_b` for the six P2 basis functions.
pub fn p2_element_stiffness(geo: &ElementGeometry, rule: &QuadratureRule) -> [[f64; 6]; 6] {
    let mut k = [[0.0; 6]; 6];
    for q in 0..rule.len() {
        let pd = point_data(geo, rule, q);
        for a in 0..6 {
            for b in 0..6 {
                k[a][b] += pd.weight * (pd.dn[a][0] * pd.dn[b][0] + pd.dn[a][1] * pd.dn[b][1]);
            }
        }
    }
    k
}

/// Vector Laplacian `(∇u, ∇v)` on velocity dofs, without the viscosity factor.
///
/// Also the Gram matrix of the H1-seminorm in which residuals are measured.
pub fn assemble_vector_laplacian(mesh: &Mesh, dofmap: &MixedDofMap) -> CsrMatrix {
    let rule = QuadratureRule::degree5();
    let ns = dofmap.n_velocity_scalar;
    let mut trip = Vec::with_capacity(mesh.num_triangles() * 72);
    for t in 0..mesh.num_triangles() {
        let k = p2_element_stiffness(&geometry(mesh, t), &rule);
        let nodes = dofmap.element_nodes(t);
        for c in 0..2 {
            for a in 0..6 {
                for b in 0..6 {
                    trip.push((c * ns + nodes[a], c * ns + nodes[b], k[a][b]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(dofmap.n_velocity, dofmap.n_velocity, &trip)
}

/// Vector mass matrix `(u, v)` on velocity dofs.
pub fn assemble_vector_mass(mesh: &Mesh, dofmap: &MixedDofMap) -> CsrMatrix {
    let rule = QuadratureRule::degree5();
    let ns = dofmap.n_velocity_scalar;
    let mut trip = Vec::with_capacity(mesh.num_triangles() * 72);
    for t in 0..mesh.num_triangles() {
        let geo = geometry(mesh, t);
        let nodes = dofmap.element_nodes(t);
        let mut m = [[0.0; 6]; 6];
        for q in 0..rule.len() {
            let pd = point_data(&geo, &rule, q);
            for a in 0..6 {
                for b in 0..6 {
                    m[a][b] += pd.weight * pd.n[a] * pd.n[b];
                }
            }
        }
        for c in 0..2 {
            for a in 0..6 {
                for b in 0..6 {
                    trip.push((c * ns + nodes[a], c * ns + nodes[b], m[a][b]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(dofmap.n_velocity, dofmap.n_velocity, &trip)
}

/// Divergence matrix with `(B u)_q = (∇·u, ψ_q)`.
pub fn assemble_divergence(mesh: &Mesh, dofmap: &MixedDofMap) -> CsrMatrix {
    let rule = QuadratureRule::degree5();
    let ns = dofmap.n_velocity_scalar;
    let mut trip = Vec::with_capacity(mesh.num_triangles() * 36);
    for t in 0..mesh.num_triangles() {
        let geo = geometry(mesh, t);
        let nodes = dofmap.element_nodes(t);
        let verts = mesh.triangles[t];
        let mut b = [[[0.0; 6]; 2]; 3];
        for q in 0..rule.len() {
            let pd = point_data(&geo, &rule, q);
            for i in 0..3 {
                for c in 0..2 {
                    for a in 0..6 {
                        b[i][c][a] += pd.weight * pd.p1[i] * pd.dn[a][c];
                    }
                }
            }
        }
        for i in 0..3 {
            for c in 0..2 {
                for a in 0..6 {
                    trip.push((verts[i], c * ns + nodes[a], b[i][c][a]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(dofmap.n_pressure, dofmap.n_velocity, &trip)
}

/// Load vector `(f, v)` for a body force given pointwise.
pub fn assemble_load(mesh: &Mesh, dofmap: &MixedDofMap, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
    let rule = QuadratureRule::degree5();
    let ns = dofmap.n_velocity_scalar;
    let mut load = vec![0.0; dofmap.n_velocity];
    for t in 0..mesh.num_triangles() {
        let geo = geometry(mesh, t);
        let nodes = dofmap.element_nodes(t);
        for q in 0..rule.len() {
            let pd = point_data(&geo, &rule, q);
            let fx = f(pd.x);
            for a in 0..6 {
                load[nodes[a]] += pd.weight * fx[0] * pd.n[a];
                load[ns + nodes[a]] += pd.weight * fx[1] * pd.n[a];
            }
        }
    }
    load
}

/// Skew-symmetrized convection form `b(u,v,w) = ½((u·∇v, w) − (u·∇w, v))`.
pub fn trilinear_b(u: &[f64], v: &[f64], w: &[f64], mesh: &Mesh, dofmap: &MixedDofMap) -> f64 {
    let rule = QuadratureRule::degree5();
    let ns = dofmap.n_velocity_scalar;
    let mut total = 0.0;
    for t in 0..mesh.num_triangles() {
        let geo = geometry(mesh, t);
        let nodes = dofmap.element_nodes(t);
        for q in 0..rule.len() {
            let pd = point_data(&geo, &rule, q);
            let (uu, _) = eval_velocity(u, nodes, ns, &pd);
            let (vv, gv) = eval_velocity(v, nodes, ns, &pd);
            let (ww, gw) = eval_velocity(w, nodes, ns, &pd);
            let mut s = 0.0;
            for c in 0..2 {
                let u_grad_v = uu[0] * gv[c][0] + uu[1] * gv[c][1];
                let u_grad_w = uu[0] * gw[c][0] + uu[1] * gw[c][1];
                s += u_grad_v * ww[c] - u_grad_w * vv[c];
            }
            total += 0.5 * pd.weight * s;
        }
    }
    total
}

/// Newton linearization at `u_prev`.
///
/// Returns the matrix `N` with `(N z)_i = b(u_prev, z, φ_i) + b(z, u_prev, φ_i)`
/// and the vector `r_i = b(u_prev, u_prev, φ_i)` that moves to the right-hand side.
pub fn assemble_newton_linearization(
    u_prev: &[f64],
    mesh: &Mesh,
    dofmap: &MixedDofMap,
) -> Result<(CsrMatrix, Vec<f64>)> {
    check_velocity(u_prev, dofmap, "linearization state")?;
    let rule = QuadratureRule::degree5();
    let ns = dofmap.n_velocity_scalar;
    let mut trip = Vec::with_capacity(mesh.num_triangles() * 144);
    let mut rhs = vec![0.0; dofmap.n_velocity];
    for t in 0..mesh.num_triangles() {
        let geo = geometry(mesh, t);
        let nodes = dofmap.element_nodes(t);
        // ke[ci][cj][a][b]: test (ci, a), trial (cj, b).
        let mut ke = [[[[0.0; 6]; 6]; 2]; 2];
        let mut re = [[0.0; 6]; 2];
        for q in 0..rule.len() {
            let pd = point_data(&geo, &rule, q);
            let (uu, g) = eval_velocity(u_prev, nodes, ns, &pd);
            let w = 0.5 * pd.weight;
            let adv: [f64; 6] = std::array::from_fn(|a| uu[0] * pd.dn[a][0] + uu[1] * pd.dn[a][1]);
            for a in 0..6 {
                for b in 0..6 {
                    let picard = w * (adv[b] * pd.n[a] - adv[a] * pd.n[b]);
                    let nn = pd.n[a] * pd.n[b];
                    for ci in 0..2 {
                        for cj in 0..2 {
                            let mut v = w * (nn * g[ci][cj] - pd.n[b] * pd.dn[a][cj] * uu[ci]);
                            if ci == cj {
                                v += picard;
                            }
                            ke[ci][cj][a][b] += v;
                        }
                    }
                }
                for ci in 0..2 {
                    let u_grad_u = uu[0] * g[ci][0] + uu[1] * g[ci][1];
                    re[ci][a] += w * (u_grad_u * pd.n[a] - adv[a] * uu[ci]);
                }
            }
        }
        for ci in 0..2 {
            for a in 0..6 {
                let row = ci * ns + nodes[a];
                rhs[row] += re[ci][a];
                for cj in 0..2 {
                    for b in 0..6 {
                        trip.push((row, cj * ns + nodes[b], ke[ci][cj][a][b]));
                    }
                }
            }
        }
    }
    Ok((CsrMatrix::from_triplets(dofmap.n_velocity, dofmap.n_velocity, &trip), rhs))
}

/// Picard linearization at `u_prev`: `(P z)_i = b(u_prev, z, φ_i)`.
pub fn assemble_picard_linearization(u_prev: &[f64], mesh: &Mesh, dofmap: &MixedDofMap) -> Result<CsrMatrix> {
    check_velocity(u_prev, dofmap, "linearization state")?;
    let rule = QuadratureRule::degree5();
    let ns = dofmap.n_velocity_scalar;
    let mut trip = Vec::with_capacity(mesh.num_triangles() * 72);
    for t in 0..mesh.num_triangles() {
        let geo = geometry(mesh, t);
        let nodes = dofmap.element_nodes(t);
        let mut ke = [[0.0; 6]; 6];
        for q in 0..rule.len() {
            let pd = point_data(&geo, &rule, q);
            let (uu, _) = eval_velocity(u_prev, nodes, ns, &pd);
            let w = 0.5 * pd.weight;
            let adv: [f64; 6] = std::array::from_fn(|a| uu[0] * pd.dn[a][0] + uu[1] * pd.dn[a][1]);
            for a in 0..6 {
                for b in 0..6 {
                    ke[a][b] += w * (adv[b] * pd.n[a] - adv[a] * pd.n[b]);
                }
            }
        }
        for c in 0..2 {
            for a in 0..6 {
                for b in 0..6 {
                    trip.push((c * ns + nodes[a], c * ns + nodes[b], ke[a][b]));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(dofmap.n_velocity, dofmap.n_velocity, &trip))
}

/// Mixed operator `[K, −Bᵀ; B, 0]` on the full velocity-pressure layout.
pub fn assemble_saddle(k: &CsrMatrix, div: &CsrMatrix) -> CsrMatrix {
    let nu = k.nrows();
    let np = div.nrows();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(nu + np);
    let div_t = div.transpose();
    for i in 0..nu {
        let mut row: Vec<(usize, f64)> = k.row(i).collect();
        row.extend(div_t.row(i).map(|(q, v)| (nu + q, -v)));
        rows.push(row);
    }
    for q in 0..np {
        rows.push(div.row(q).collect());
    }
    CsrMatrix::from_sorted_rows(nu + np, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_unit_square_mesh, Pattern};

    fn setup(n: usize, pattern: Pattern) -> (Mesh, MixedDofMap) {
        let mesh = build_unit_square_mesh(n, pattern).unwrap();
        let dm = MixedDofMap::cavity(&mesh);
        (mesh, dm)
    }

    #[test]
    fn reference_p1_stiffness() {
        let geo = ElementGeometry::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let k = p1_element_stiffness(&geo);
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for a in 0..3 {
            for b in 0..3 {
                assert!((k[a][b] - expected[a][b]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn laplacian_annihilates_constants() {
        let (mesh, dm) = setup(5, Pattern::Crossed);
        let a = assemble_vector_laplacian(&mesh, &dm);
        let c = dm.interpolate(&mesh, |_| [2.0, -3.0]);
        assert!(a.mul_vec(&c).iter().all(|v| v.abs() < 1e-12));
        assert!(a.symmetry_defect() < 1e-12);
    }

    #[test]
    fn laplacian_energy_of_linear_field() {
        for pattern in [Pattern::Diagonal, Pattern::Crossed] {
            let (mesh, dm) = setup(4, pattern);
            let a = assemble_vector_laplacian(&mesh, &dm);
            let u = dm.interpolate(&mesh, |p| [p[0], 0.0]);
            assert!((a.inner(&u, &u) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mass_is_symmetric_and_integrates_area() {
        let (mesh, dm) = setup(3, Pattern::Diagonal);
        let m = assemble_vector_mass(&mesh, &dm);
        assert!(m.symmetry_defect() < 1e-12);
        let ones = dm.interpolate(&mesh, |_| [1.0, 0.0]);
        assert!((m.inner(&ones, &ones) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_of_constant_field_vanishes() {
        let (mesh, dm) = setup(4, Pattern::Diagonal);
        let b = assemble_divergence(&mesh, &dm);
        assert_eq!((b.nrows(), b.ncols()), (dm.n_pressure, dm.n_velocity));
        let u = dm.interpolate(&mesh, |_| [1.0, 0.0]);
        assert!(b.mul_vec(&u).iter().all(|v| v.abs() < 1e-12));
        assert!(b.mul_vec(&vec![0.0; dm.n_velocity]).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_of_identity_field_integrates_to_two() {
        let (mesh, dm) = setup(4, Pattern::Crossed);
        let b = assemble_divergence(&mesh, &dm);
        let u = dm.interpolate(&mesh, |p| p);
        // P1 functions form a partition of unity, so the row sum is ∫ ∇·(x, y).
        let sum: f64 = b.mul_vec(&u).iter().sum();
        assert!((sum - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_state_linearizations_vanish() {
        let (mesh, dm) = setup(3, Pattern::Diagonal);
        let zero = vec![0.0; dm.n_velocity];
        let (n, r) = assemble_newton_linearization(&zero, &mesh, &dm).unwrap();
        assert_eq!(n.nnz(), 0);
        assert!(r.iter().all(|&v| v == 0.0));
        assert_eq!(assemble_picard_linearization(&zero, &mesh, &dm).unwrap().nnz(), 0);
    }

    #[test]
    fn linearizations_reject_non_finite_input() {
        let (mesh, dm) = setup(2, Pattern::Diagonal);
        let mut u = vec![0.0; dm.n_velocity];
        u[3] = f64::INFINITY;
        assert!(matches!(assemble_newton_linearization(&u, &mesh, &dm), Err(Error::NonFinite(_))));
        assert!(matches!(assemble_picard_linearization(&u, &mesh, &dm), Err(Error::NonFinite(_))));
    }

    #[test]
    fn saddle_layout() {
        let (mesh, dm) = setup(2, Pattern::Diagonal);
        let a = assemble_vector_laplacian(&mesh, &dm);
        let b = assemble_divergence(&mesh, &dm);
        let s = assemble_saddle(&a, &b);
        assert_eq!(s.nrows(), dm.n_total());
        let off = dm.pressure_offset();
        for q in 0..dm.n_pressure {
            for (j, v) in b.row(q) {
                assert_eq!(s.get(off + q, j), v);
                assert_eq!(s.get(j, off + q), -v);
            }
        }
    }
}
