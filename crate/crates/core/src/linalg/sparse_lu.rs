//! Sparse direct solves backed by faer's fill-reducing LU with partial pivoting.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::csr::{norm2, CsrMatrix};
use crate::error::{Error, Result};

/// Residual bound factor: `‖Ax − b‖₂ ≤ RESIDUAL_FACTOR · max(1, ‖b‖₂)`.
pub const RESIDUAL_FACTOR: f64 = 1e-10;

const REFINEMENT_STEPS: usize = 3;

/// A factorized square matrix. Immutable after construction; `solve` takes `&self`.
pub struct SparseLu {
    matrix: CsrMatrix,
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl std::fmt::Debug for SparseLu {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseLu").field("n", &self.matrix.nrows()).field("nnz", &self.matrix.nnz()).finish()
    }
}

impl SparseLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { what: "square matrix", expected: a.nrows(), got: a.ncols() });
        }
        if !a.is_finite() {
            return Err(Error::NonFinite("matrix entries"));
        }
        let triplets: Vec<Triplet<usize, usize, f64>> = (0..a.nrows())
            .flat_map(|i| a.row(i).map(move |(j, v)| Triplet::new(i, j, v)))
            .collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(a.nrows(), a.ncols(), &triplets)
            .map_err(|_| Error::InvalidArgument("sparse matrix construction failed".into()))?;
        let lu = mat.sp_lu().map_err(|e| match e {
            LuError::SymbolicSingular { index } => Error::SingularMatrix { pivot: index },
            LuError::Generic(err) => Error::InvalidArgument(format!("sparse LU failed: {err:?}")),
        })?;
        Ok(SparseLu { matrix: a.clone(), lu })
    }

    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        self.lu.solve_in_place(&mut rhs);
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    /// Solve `A x = b` with iterative refinement until the residual contract holds.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.matrix.nrows();
        if b.len() != n {
            return Err(Error::DimensionMismatch { what: "right-hand side", expected: n, got: b.len() });
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("right-hand side"));
        }
        let bound = RESIDUAL_FACTOR * norm2(b).max(1.0);
        let mut x = self.raw_solve(b);
        if let Some(pivot) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::SingularMatrix { pivot });
        }
        let mut residual = self.residual(&x, b);
        let mut rnorm = norm2(&residual);
        // Refine while the residual keeps shrinking, even once the bound holds.
        for _ in 0..REFINEMENT_STEPS {
            if rnorm == 0.0 {
                break;
            }
            let dx = self.raw_solve(&residual);
            let candidate: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let r = self.residual(&candidate, b);
            let rn = norm2(&r);
            if !(rn < rnorm) {
                break;
            }
            x = candidate;
            residual = r;
            rnorm = rn;
        }
        if rnorm <= bound {
            Ok(x)
        } else {
            Err(Error::InaccurateSolve { residual: rnorm, bound })
        }
    }

    /// `b − A x`.
    fn residual(&self, x: &[f64], b: &[f64]) -> Vec<f64> {
        let ax = self.matrix.mul_vec(x);
        b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }
}

/// Factor `a` and solve `a x = b`.
pub fn sparse_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    SparseLu::factor(a)?.solve(b)
}
