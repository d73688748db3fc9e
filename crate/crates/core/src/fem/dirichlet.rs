use super::dofmap::MixedDofMap;
use crate::linalg::CsrMatrix;

/// Saddle matrix and right-hand side on the full velocity-pressure layout.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// Impose the Dirichlet data of `dofmap` and the pressure gauge.
///
/// Constrained rows and columns become identity rows/columns with the
/// prescribed value moved to the right-hand side; the gauge row is replaced by
/// the discrete zero-mean condition.
pub fn apply_dirichlet(system: &SaddleSystem, dofmap: &MixedDofMap) -> SaddleSystem {
    constrain(system, dofmap, 1.0)
}

/// As [`apply_dirichlet`] with every prescribed value set to zero.
pub fn apply_homogeneous_dirichlet(system: &SaddleSystem, dofmap: &MixedDofMap) -> SaddleSystem {
    constrain(system, dofmap, 0.0)
}

fn constrain(system: &SaddleSystem, dofmap: &MixedDofMap, scale: f64) -> SaddleSystem {
    let n = system.matrix.nrows();
    assert_eq!(n, dofmap.n_total());
    assert_eq!(system.rhs.len(), n);

    let mut value: Vec<Option<f64>> = vec![None; n];
    for &(i, g) in &dofmap.dirichlet_dofs {
        value[i] = Some(scale * g);
    }
    let gauge_row = dofmap.gauge.row;
    let p0 = dofmap.pressure_offset();

    let mut rhs = system.rhs.clone();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        if let Some(g) = value[i] {
            rows.push(vec![(i, 1.0)]);
            rhs[i] = g;
        } else if i == gauge_row {
            rows.push(dofmap.gauge.weights.iter().enumerate().map(|(q, &w)| (p0 + q, w)).collect());
            rhs[i] = 0.0;
        } else {
            let mut row = Vec::new();
            for (j, a) in system.matrix.row(i) {
                match value[j] {
                    Some(g) => rhs[i] -= a * g,
                    None => row.push((j, a)),
                }
            }
            rows.push(row);
        }
    }
    SaddleSystem { matrix: CsrMatrix::from_sorted_rows(n, rows), rhs }
}
