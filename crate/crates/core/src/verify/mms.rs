use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::driver::{run, InitialGuess, Method, RunStatus, SolverConfig};
use crate::error::{Error, Result};
use crate::fem::element::{p1_values, p2_gradients};
use crate::fem::{ElementGeometry, MixedDofMap, QuadratureRule};
use crate::mesh::{build_unit_square_mesh, Pattern};
use crate::nse::{ProblemSetup, State};

/// Degree of the error quadrature, two above the assembly rule.
pub const ERROR_QUADRATURE_DEGREE: usize = 7;
/// Nonlinear tolerance of every inner solve.
pub const STUDY_TOL: f64 = 1e-12;

/// Closed-form solutions with divergence-free velocity and zero-mean pressure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManufacturedCase {
    /// `u = curl ψ`, `ψ = x²(1−x)²y²(1−y)²`, `p = sin πx cos πy`.
    StreamFunction,
    /// `u = (y, −x)`, `p = 0`; reproduced exactly by the discretization.
    Linear,
}

// ψ factor q(s) = s²(1−s)² and its derivatives.
fn q(s: f64) -> [f64; 4] {
    [
        s * s * (1.0 - s) * (1.0 - s),
        2.0 * s - 6.0 * s * s + 4.0 * s * s * s,
        2.0 - 12.0 * s + 12.0 * s * s,
        -12.0 + 24.0 * s,
    ]
}

impl ManufacturedCase {
    pub fn velocity(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            ManufacturedCase::StreamFunction => {
                let (x, y) = (q(p[0]), q(p[1]));
                [x[0] * y[1], -x[1] * y[0]]
            }
            ManufacturedCase::Linear => [p[1], -p[0]],
        }
    }

    /// `g[c][d] = ∂_d u_c`.
    pub fn velocity_gradient(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        match self {
            ManufacturedCase::StreamFunction => {
                let (x, y) = (q(p[0]), q(p[1]));
                [[x[1] * y[1], x[0] * y[2]], [-x[2] * y[0], -x[1] * y[1]]]
            }
            ManufacturedCase::Linear => [[0.0, 1.0], [-1.0, 0.0]],
        }
    }

    pub fn pressure(&self, p: [f64; 2]) -> f64 {
        match self {
            ManufacturedCase::StreamFunction => (PI * p[0]).sin() * (PI * p[1]).cos(),
            ManufacturedCase::Linear => 0.0,
        }
    }

    fn laplacian(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            ManufacturedCase::StreamFunction => {
                let (x, y) = (q(p[0]), q(p[1]));
                [x[2] * y[1] + x[0] * y[3], -x[3] * y[0] - x[1] * y[2]]
            }
            ManufacturedCase::Linear => [0.0, 0.0],
        }
    }

    fn pressure_gradient(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            ManufacturedCase::StreamFunction => {
                let (sx, cx) = (PI * p[0]).sin_cos();
                let (sy, cy) = (PI * p[1]).sin_cos();
                [PI * cx * cy, -PI * sx * sy]
            }
            ManufacturedCase::Linear => [0.0, 0.0],
        }
    }

    /// `f = −νΔu + (u·∇)u + ∇p`.
    pub fn forcing(&self, p: [f64; 2], nu: f64) -> [f64; 2] {
        let u = self.velocity(p);
        let g = self.velocity_gradient(p);
        let lap = self.laplacian(p);
        let gp = self.pressure_gradient(p);
        [0, 1].map(|c| -nu * lap[c] + u[0] * g[c][0] + u[1] * g[c][1] + gp[c])
    }

    /// Discrete problem with this forcing and the exact boundary values.
    pub fn setup(&self, n: usize, pattern: Pattern, nu: f64) -> Result<ProblemSetup> {
        let mesh = build_unit_square_mesh(n, pattern)?;
        let case = *self;
        let dofmap = MixedDofMap::new(&mesh, |p, _| case.velocity(p));
        let load = vec![0.0; dofmap.n_velocity];
        Ok(ProblemSetup::new(mesh, dofmap, nu, load)?.with_forcing(move |p| case.forcing(p, nu)))
    }

    /// `(‖∇(u_h − u)‖, ‖p_h − p‖)` by high-order quadrature.
    pub fn errors(&self, setup: &ProblemSetup, state: &State) -> (f64, f64) {
        let rule = QuadratureRule::collapsed(ERROR_QUADRATURE_DEGREE);
        let ns = setup.dofmap.n_velocity_scalar;
        let (mut eu, mut ep) = (0.0, 0.0);
        for t in 0..setup.mesh.num_triangles() {
            let geo = ElementGeometry::new(setup.mesh.triangle_coords(t));
            let nodes = setup.dofmap.element_nodes(t);
            let verts = setup.mesh.triangles[t];
            for (l, w) in rule.points.iter().zip(&rule.weights) {
                let x = geo.map(*l);
                let wt = w * geo.jacobian();
                let dn = p2_gradients(*l, &geo);
                let exact = self.velocity_gradient(x);
                for c in 0..2 {
                    for d in 0..2 {
                        let gh: f64 = (0..6).map(|a| state.velocity[c * ns + nodes[a]] * dn[a][d]).sum();
                        eu += wt * (gh - exact[c][d]).powi(2);
                    }
                }
                let ph: f64 = p1_values(*l).iter().zip(verts).map(|(n, v)| n * state.pressure[v]).sum();
                ep += wt * (ph - self.pressure(x)).powi(2);
            }
        }
        (eu.sqrt(), ep.sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsRow {
    pub n: usize,
    pub h: f64,
    pub err_u_h1: f64,
    pub rate_u: Option<f64>,
    pub err_p_l2: f64,
    pub rate_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmsStudy {
    pub rows: Vec<MmsRow>,
}

impl MmsStudy {
    pub fn to_csv(&self) -> String {
        let opt = |r: Option<f64>| r.map(|v| format!("{v:.6}")).unwrap_or_default();
        let mut s = String::from("n,h,err_u_H1,rate_u,err_p_L2,rate_p\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:.6e},{:.6e},{},{:.6e},{}",
                r.n,
                r.h,
                r.err_u_h1,
                opt(r.rate_u),
                r.err_p_l2,
                opt(r.rate_p)
            );
        }
        s
    }

    /// Rate between the first and last mesh.
    pub fn overall_rates(&self) -> Option<(f64, f64)> {
        let (a, b) = (self.rows.first()?, self.rows.last()?);
        if a.n == b.n {
            return None;
        }
        let k = (b.n as f64 / a.n as f64).log2();
        Some(((a.err_u_h1 / b.err_u_h1).log2() / k, (a.err_p_l2 / b.err_p_l2).log2() / k))
    }
}

/// Solve with Newton on each mesh and tabulate errors and log2 rates.
pub fn mms_convergence_study(case: ManufacturedCase, sizes: &[usize], nu: f64, pattern: Pattern) -> Result<MmsStudy> {
    let mut rows: Vec<MmsRow> = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let setup = case.setup(n, pattern, nu)?;
        let config = SolverConfig {
            method: Method::Newton,
            nu,
            mesh_n: n,
            pattern,
            tol: STUDY_TOL,
            max_iters: 50,
            initial: InitialGuess::Zero,
            ..SolverConfig::default()
        };
        let (state, log) = run(&setup, &config)?;
        if log.status != RunStatus::Converged {
            return Err(Error::NotConverged(format!(
                "mms n={n}: {} after {} iterations, residuals {:?}",
                log.status,
                log.iterations(),
                log.residuals()
            )));
        }
        let (err_u_h1, err_p_l2) = case.errors(&setup, &state);
        let rate = |prev: f64, cur: f64, pn: usize| (prev / cur).log2() / (n as f64 / pn as f64).log2();
        let (rate_u, rate_p) = match rows.last() {
            Some(p) => (Some(rate(p.err_u_h1, err_u_h1, p.n)), Some(rate(p.err_p_l2, err_p_l2, p.n))),
            None => (None, None),
        };
        rows.push(MmsRow { n, h: 1.0 / n as f64, err_u_h1, rate_u, err_p_l2, rate_p });
    }
    Ok(MmsStudy { rows })
}
