//! Small dense least-squares problems for Anderson mixing coefficients.
//!
//! Minimizes `‖y − Σ ξ_i d_i‖²` in a Gram inner product through the normal
//! equations `G ξ = r` with `G_ij = (d_i, d_j)` and `r_i = (y, d_i)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Condition estimate above which a Tikhonov shift is applied.
pub const CONDITION_LIMIT: f64 = 1e12;
/// Tikhonov shift relative to `trace(G) / m`.
pub const TIKHONOV_SCALE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct DenseLsProblem {
    pub gram: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsSolution {
    pub coefficients: Vec<f64>,
    pub regularized: bool,
    /// Every difference vanished; coefficients are zero.
    pub degenerate: bool,
}

impl DenseLsProblem {
    pub fn new(gram: DMatrix<f64>, rhs: DVector<f64>) -> Self {
        assert_eq!(gram.nrows(), gram.ncols());
        assert_eq!(gram.nrows(), rhs.len());
        DenseLsProblem { gram, rhs }
    }

    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    /// `‖y − Σ ξ_i d_i‖²` given `‖y‖²`.
    pub fn objective(&self, y_norm_sq: f64, xi: &[f64]) -> f64 {
        let x = DVector::from_column_slice(xi);
        y_norm_sq - 2.0 * self.rhs.dot(&x) + x.dot(&(&self.gram * &x))
    }
}

pub fn solve_anderson_ls(problem: &DenseLsProblem) -> LsSolution {
    let m = problem.size();
    let zero = |degenerate| LsSolution { coefficients: vec![0.0; m], regularized: false, degenerate };
    if m == 0 {
        return zero(false);
    }
    let trace = problem.gram.trace();
    if !trace.is_finite() || problem.gram.iter().all(|&g| g == 0.0) {
        return zero(true);
    }

    // Vanishing differences carry no information; pin their coefficients to zero.
    let active: Vec<usize> = (0..m).filter(|&i| problem.gram[(i, i)] > 0.0).collect();
    let k = active.len();
    let mut gram = DMatrix::from_fn(k, k, |i, j| problem.gram[(active[i], active[j])]);
    let rhs = DVector::from_fn(k, |i, _| problem.rhs[active[i]]);

    let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let regularized = condition > CONDITION_LIMIT;
    if regularized {
        let shift = TIKHONOV_SCALE * trace / m as f64;
        for i in 0..k {
            gram[(i, i)] += shift;
        }
    }

    let solved = match gram.clone().cholesky() {
        Some(chol) => Some(chol.solve(&rhs)),
        None => gram.lu().solve(&rhs),
    };
    let Some(xi) = solved.filter(|x| x.iter().all(|v| v.is_finite())) else {
        return zero(true);
    };

    let mut coefficients = vec![0.0; m];
    for (i, &a) in active.iter().enumerate() {
        coefficients[a] = xi[i];
    }
    LsSolution { coefficients, regularized, degenerate: false }
}
