use aanewton_core::fem::{
    apply_dirichlet, assemble_newton_linearization, assemble_picard_linearization, assemble_saddle, SaddleSystem,
};
use aanewton_core::linalg::{sparse_solve, CsrMatrix};
use aanewton_core::verify::{dense_solve, ManufacturedCase};
use aanewton_core::{newton_operator, residual, run, Pattern, ProblemSetup, RunStatus, SolverConfig, State};

fn newton_system(s: &ProblemSetup, u: &[f64]) -> SaddleSystem {
    let (n, r) = assemble_newton_linearization(u, &s.mesh, &s.dofmap).unwrap();
    let k = s.laplacian.linear_combination(s.nu, &n, 1.0).unwrap();
    let mut rhs: Vec<f64> = s.load.iter().zip(&r).map(|(f, b)| f + b).collect();
    rhs.resize(s.dofmap.n_total(), 0.0);
    apply_dirichlet(&SaddleSystem { matrix: assemble_saddle(&k, &s.divergence), rhs }, &s.dofmap)
}

#[test]
fn sparse_and_dense_saddle_solves_agree() {
    // n = 1 has too few interior velocity dofs to control the pressure.
    for n in 2..=4 {
        for pattern in [Pattern::Diagonal, Pattern::Crossed] {
            let s = ProblemSetup::cavity(n, pattern, 0.02).unwrap();
            let u = s.dofmap.interpolate(&s.mesh, |p| [p[1] * (1.0 - p[0]), p[0] * p[0] - 0.3]);
            let sys = newton_system(&s, &u);
            let a = sparse_solve(&sys.matrix, &sys.rhs).unwrap();
            let b = dense_solve(&sys.matrix, &sys.rhs).unwrap();
            let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-9 * scale, "n={n} {pattern}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn operator_output_satisfies_the_linearized_equations() {
    let s = ProblemSetup::cavity(4, Pattern::Crossed, 0.01).unwrap();
    let u = State {
        velocity: s.dofmap.interpolate(&s.mesh, |p| [p[1], -p[0] * p[1]]),
        pressure: vec![0.0; s.dofmap.n_pressure],
    };
    let g = newton_operator(&s, &u).unwrap();
    let sys = newton_system(&s, &u.velocity);
    let mut x = g.velocity.clone();
    x.extend_from_slice(&g.pressure);
    let ax = sys.matrix.mul_vec(&x);
    let defect = ax.iter().zip(&sys.rhs).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(defect < 1e-11, "{defect}");
}

fn converge(s: &ProblemSetup, nu: f64, n: usize) -> State {
    let cfg = SolverConfig { nu, mesh_n: n, tol: 1e-13, ..SolverConfig::default() };
    let (u, log) = run(s, &cfg).unwrap();
    assert_eq!(log.status, RunStatus::Converged);
    u
}

/// Momentum and continuity defects of the discrete equations at `u`, free rows only.
fn discrete_defect(s: &ProblemSetup, u: &State) -> f64 {
    let p = assemble_picard_linearization(&u.velocity, &s.mesh, &s.dofmap).unwrap();
    let conv = p.mul_vec(&u.velocity);
    let visc = s.laplacian.mul_vec(&u.velocity);
    let grad = s.divergence.transpose().mul_vec(&u.pressure);
    let mask = s.dofmap.dirichlet_mask();
    let momentum = (0..s.dofmap.n_velocity)
        .filter(|&i| !mask[i])
        .map(|i| (s.nu * visc[i] + conv[i] - grad[i] - s.load[i]).abs())
        .fold(0.0f64, f64::max);
    momentum.max(s.divergence_defect(&u.velocity))
}

#[test]
fn fixed_points_solve_the_discrete_equations() {
    let s = ProblemSetup::cavity(6, Pattern::Diagonal, 0.01).unwrap();
    let u = converge(&s, 0.01, 6);
    let g = newton_operator(&s, &u).unwrap();
    assert!(residual(&s, &u, &g).1 <= 1e-10);
    assert!(discrete_defect(&s, &u) <= 1e-10, "{}", discrete_defect(&s, &u));

    // A perturbed state is neither a fixed point nor a discrete solution.
    let mut v = u.clone();
    let bump = aanewton_core::verify::interior_bubble(&s);
    v.velocity.iter_mut().zip(&bump).for_each(|(a, b)| *a += 1e-3 * b);
    let gv = newton_operator(&s, &v).unwrap();
    assert!(residual(&s, &v, &gv).1 > 1e-6);
    assert!(discrete_defect(&s, &v) > 1e-6);
}

/// `sqrt(rᵀ A₀⁻¹ r)` with `A₀` the Laplacian on unconstrained velocity dofs.
fn dual_norm(s: &ProblemSetup, r: &[f64]) -> f64 {
    let mask = s.dofmap.dirichlet_mask();
    let free: Vec<usize> = (0..s.dofmap.n_velocity).filter(|&i| !mask[i]).collect();
    let mut index = vec![usize::MAX; s.dofmap.n_velocity];
    for (k, &i) in free.iter().enumerate() {
        index[i] = k;
    }
    let mut t = Vec::new();
    for (k, &i) in free.iter().enumerate() {
        for (j, a) in s.laplacian.row(i) {
            if index[j] != usize::MAX {
                t.push((k, index[j], a));
            }
        }
    }
    let a0 = CsrMatrix::from_triplets(free.len(), free.len(), &t);
    let rf: Vec<f64> = free.iter().map(|&i| r[i]).collect();
    let z = sparse_solve(&a0, &rf).unwrap();
    rf.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().sqrt()
}

#[test]
fn manufactured_forcing_is_consistent() {
    let case = ManufacturedCase::StreamFunction;
    let nu = 0.1;
    let mut norms = Vec::new();
    for n in [4, 8, 16] {
        let s = case.setup(n, Pattern::Diagonal, nu).unwrap();
        let u = s.dofmap.interpolate(&s.mesh, |p| case.velocity(p));
        let p = s.dofmap.interpolate_pressure(&s.mesh, |x| case.pressure(x));
        let conv = assemble_picard_linearization(&u, &s.mesh, &s.dofmap).unwrap().mul_vec(&u);
        let visc = s.laplacian.mul_vec(&u);
        let grad = s.divergence.transpose().mul_vec(&p);
        let r: Vec<f64> = (0..u.len()).map(|i| nu * visc[i] + conv[i] - grad[i] - s.load[i]).collect();
        norms.push(dual_norm(&s, &r));
    }
    for w in norms.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!(rate >= 1.9, "rate {rate}, norms {norms:?}");
    }
}

#[test]
fn stokes_solution_matches_dense_oracle() {
    let s = ProblemSetup::cavity(3, Pattern::Crossed, 1.0).unwrap().without_convection();
    let g = newton_operator(&s, &s.initial_state()).unwrap();
    let k = s.laplacian.scale(s.nu);
    let mut rhs = s.load.clone();
    rhs.resize(s.dofmap.n_total(), 0.0);
    let sys = apply_dirichlet(&SaddleSystem { matrix: assemble_saddle(&k, &s.divergence), rhs }, &s.dofmap);
    let x = dense_solve(&sys.matrix, &sys.rhs).unwrap();
    for (a, b) in g.velocity.iter().chain(&g.pressure).zip(&x) {
        assert!((a - b).abs() < 1e-10);
    }
}
