use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::nse::ProblemSetup;

/// Dense LU with partial pivoting; reference for small sparse solves.
pub fn dense_solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch { what: "dense rhs", expected: a.nrows(), got: b.len() });
    }
    let lu = a.to_dense().lu();
    let x = lu
        .solve(&nalgebra::DVector::from_column_slice(b))
        .ok_or(Error::SingularMatrix { pivot: 0 })?;
    Ok(x.iter().copied().collect())
}

/// Smooth velocity direction vanishing on the boundary.
pub fn interior_bubble(setup: &ProblemSetup) -> Vec<f64> {
    setup.dofmap.interpolate(&setup.mesh, |p| {
        let b = 16.0 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]);
        [b * (0.5 + p[1]), -b * (0.3 + p[0] * p[0])]
    })
}
