//! Solution operators of the discrete steady Navier-Stokes equations.
//!
//! [`newton_operator`] maps an iterate `u` to the solution `G(u)` of the
//! Newton-linearized problem
//!
//! ```text
//! b(u, G(u), v) + b(G(u), u, v) − b(u, u, v) + ν(∇G(u), ∇v) − (p, ∇·v) = (f, v)
//! (∇·G(u), q) = 0
//! ```
//!
//! solved in mixed velocity-pressure form. Fixed points of `G` are discrete
//! solutions. [`picard_operator`] lags only the transporting velocity.

use crate::error::{Error, Result};
use crate::fem::{
    apply_dirichlet, apply_homogeneous_dirichlet, assemble_divergence, assemble_load,
    assemble_newton_linearization, assemble_picard_linearization, assemble_saddle, assemble_vector_laplacian,
    MixedDofMap, SaddleSystem,
};
use crate::linalg::{CsrMatrix, SparseLu};
use crate::mesh::{build_unit_square_mesh, Mesh, Pattern};

/// One iterate: P2 velocity and P1 pressure coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

impl State {
    pub fn zeros(dofmap: &MixedDofMap) -> Self {
        State { velocity: vec![0.0; dofmap.n_velocity], pressure: vec![0.0; dofmap.n_pressure] }
    }

    pub fn is_finite(&self) -> bool {
        self.velocity.iter().chain(&self.pressure).all(|v| v.is_finite())
    }

    /// `Σ w_j s_j` over states with matching dimensions.
    pub fn combination(terms: &[(f64, &State)]) -> State {
        let (_, first) = terms[0];
        let mut out = State { velocity: vec![0.0; first.velocity.len()], pressure: vec![0.0; first.pressure.len()] };
        for (w, s) in terms {
            out.velocity.iter_mut().zip(&s.velocity).for_each(|(o, v)| *o += w * v);
            out.pressure.iter_mut().zip(&s.pressure).for_each(|(o, v)| *o += w * v);
        }
        out
    }
}

/// Immutable problem data shared by every operator call.
#[derive(Debug, Clone)]
pub struct ProblemSetup {
    pub nu: f64,
    pub mesh: Mesh,
    pub dofmap: MixedDofMap,
    /// Unconstrained vector Laplacian; also the H1-seminorm Gram matrix.
    pub laplacian: CsrMatrix,
    pub divergence: CsrMatrix,
    /// `(f, φ_i)` for every velocity basis function.
    pub load: Vec<f64>,
    /// When false the convection term is dropped and every operator is affine (Stokes).
    pub convection: bool,
}

impl ProblemSetup {
    pub fn new(mesh: Mesh, dofmap: MixedDofMap, nu: f64, load: Vec<f64>) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
        }
        if load.len() != dofmap.n_velocity {
            return Err(Error::DimensionMismatch { what: "load vector", expected: dofmap.n_velocity, got: load.len() });
        }
        let laplacian = assemble_vector_laplacian(&mesh, &dofmap);
        let divergence = assemble_divergence(&mesh, &dofmap);
        Ok(ProblemSetup { nu, mesh, dofmap, laplacian, divergence, load, convection: true })
    }

    /// Lid-driven cavity without forcing at Reynolds number `1/nu`.
    pub fn cavity(n: usize, pattern: Pattern, nu: f64) -> Result<Self> {
        Self::cavity_with_lid(n, pattern, nu, 1.0)
    }

    /// Cavity with lid velocity `(lid_speed, 0)`; zero speed gives the trivial problem.
    pub fn cavity_with_lid(n: usize, pattern: Pattern, nu: f64, lid_speed: f64) -> Result<Self> {
        if !lid_speed.is_finite() {
            return Err(Error::InvalidArgument(format!("lid speed must be finite, got {lid_speed}")));
        }
        let mesh = build_unit_square_mesh(n, pattern)?;
        let dofmap = MixedDofMap::cavity_with_lid(&mesh, lid_speed);
        let load = vec![0.0; dofmap.n_velocity];
        Self::new(mesh, dofmap, nu, load)
    }

    /// Replace the body force by `f` given pointwise.
    pub fn with_forcing(mut self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        self.load = assemble_load(&self.mesh, &self.dofmap, f);
        self
    }

    pub fn without_convection(mut self) -> Self {
        self.convection = false;
        self
    }

    pub fn reynolds(&self) -> f64 {
        1.0 / self.nu
    }

    /// Boundary values on the velocity, zero in the interior and for the pressure.
    pub fn initial_state(&self) -> State {
        State { velocity: self.dofmap.lifting(), pressure: vec![0.0; self.dofmap.n_pressure] }
    }

    /// `‖∇v‖ = sqrt(vᵀ A v)`.
    pub fn h1_seminorm(&self, v: &[f64]) -> f64 {
        self.laplacian.inner(v, v).max(0.0).sqrt()
    }

    /// `(∇a, ∇b)`.
    pub fn h1_inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.laplacian.inner(a, b)
    }

    /// `‖B u‖∞`.
    pub fn divergence_defect(&self, velocity: &[f64]) -> f64 {
        self.divergence.mul_vec(velocity).iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `ν A + C` with `C` a convection linearization.
    fn momentum_matrix(&self, convection: Option<&CsrMatrix>) -> Result<CsrMatrix> {
        match convection {
            Some(c) => self.laplacian.linear_combination(self.nu, c, 1.0),
            None => Ok(self.laplacian.scale(self.nu)),
        }
    }

    fn factor(&self, momentum: &CsrMatrix, rhs_velocity: Vec<f64>, homogeneous: bool) -> Result<(SparseLu, Vec<f64>)> {
        let mut rhs = rhs_velocity;
        rhs.resize(self.dofmap.n_total(), 0.0);
        let system = SaddleSystem { matrix: assemble_saddle(momentum, &self.divergence), rhs };
        let constrained = if homogeneous {
            apply_homogeneous_dirichlet(&system, &self.dofmap)
        } else {
            apply_dirichlet(&system, &self.dofmap)
        };
        Ok((SparseLu::factor(&constrained.matrix)?, constrained.rhs))
    }

    fn split(&self, x: Vec<f64>) -> Result<State> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("operator output"));
        }
        let mut velocity = x;
        let pressure = velocity.split_off(self.dofmap.n_velocity);
        Ok(State { velocity, pressure })
    }

    fn check(&self, s: &State) -> Result<()> {
        if s.velocity.len() != self.dofmap.n_velocity {
            return Err(Error::DimensionMismatch { what: "state velocity", expected: self.dofmap.n_velocity, got: s.velocity.len() });
        }
        if !s.velocity.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("state velocity"));
        }
        Ok(())
    }
}

/// Newton solution operator `G(u_prev)`.
pub fn newton_operator(setup: &ProblemSetup, u_prev: &State) -> Result<State> {
    setup.check(u_prev)?;
    let (momentum, rhs) = if setup.convection {
        let (n, r) = assemble_newton_linearization(&u_prev.velocity, &setup.mesh, &setup.dofmap)?;
        let rhs = setup.load.iter().zip(&r).map(|(f, b)| f + b).collect();
        (setup.momentum_matrix(Some(&n))?, rhs)
    } else {
        (setup.momentum_matrix(None)?, setup.load.clone())
    };
    let (lu, rhs) = setup.factor(&momentum, rhs, false)?;
    setup.split(lu.solve(&rhs)?)
}

/// Picard solution operator: convection lagged in the transporting velocity.
pub fn picard_operator(setup: &ProblemSetup, u_prev: &State) -> Result<State> {
    setup.check(u_prev)?;
    let momentum = if setup.convection {
        let p = assemble_picard_linearization(&u_prev.velocity, &setup.mesh, &setup.dofmap)?;
        setup.momentum_matrix(Some(&p))?
    } else {
        setup.momentum_matrix(None)?
    };
    let (lu, rhs) = setup.factor(&momentum, setup.load.clone(), false)?;
    setup.split(lu.solve(&rhs)?)
}

/// Velocity residual `y = u_new − u_prev` and its H1-seminorm.
pub fn residual(setup: &ProblemSetup, u_prev: &State, u_new: &State) -> (Vec<f64>, f64) {
    let y: Vec<f64> = u_new.velocity.iter().zip(&u_prev.velocity).map(|(a, b)| a - b).collect();
    let norm = setup.h1_seminorm(&y);
    (y, norm)
}

/// Derivative operator `G′(u; h)` of the Newton map.
///
/// Solves `b(u, z, v) + b(z, u, v) + ν(∇z, ∇v) = −b(h, G(u) − u, v) − b(G(u) − (u + h), h, v)`
/// with homogeneous boundary data. `g_u` is `G(u)` when already known.
pub fn frechet_operator(setup: &ProblemSetup, u: &State, g_u: Option<&State>, h: &[f64]) -> Result<Vec<f64>> {
    setup.check(u)?;
    if h.len() != setup.dofmap.n_velocity {
        return Err(Error::DimensionMismatch { what: "direction", expected: setup.dofmap.n_velocity, got: h.len() });
    }
    if !setup.convection {
        return Ok(vec![0.0; h.len()]);
    }
    let computed;
    let g_u = match g_u {
        Some(g) => g,
        None => {
            computed = newton_operator(setup, u)?;
            &computed
        }
    };
    let defect: Vec<f64> = g_u.velocity.iter().zip(&u.velocity).map(|(g, x)| g - x).collect();
    let defect_minus_h: Vec<f64> = defect.iter().zip(h).map(|(d, x)| d - x).collect();

    // (P(a) w)_i = b(a, w, φ_i)
    let p_h = assemble_picard_linearization(h, &setup.mesh, &setup.dofmap)?;
    let p_dh = assemble_picard_linearization(&defect_minus_h, &setup.mesh, &setup.dofmap)?;
    let rhs: Vec<f64> = p_h
        .mul_vec(&defect)
        .iter()
        .zip(p_dh.mul_vec(h))
        .map(|(a, b)| -(a + b))
        .collect();

    let (n, _) = assemble_newton_linearization(&u.velocity, &setup.mesh, &setup.dofmap)?;
    let momentum = setup.momentum_matrix(Some(&n))?;
    let (lu, rhs) = setup.factor(&momentum, rhs, true)?;
    Ok(setup.split(lu.solve(&rhs)?)?.velocity)
}
