//! Small dense solves backed by nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Ridge added to the normal equations when the design is rank deficient.
pub const RIDGE_FALLBACK: f64 = 1e-8;

/// Relative eigenvalue threshold under which `X'X` counts as singular.
const RANK_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares {
    pub coef: Vec<f64>,
    pub ridge_used: bool,
}

/// Least squares of `y` on the columns of `x` (row-major, `p` columns).
/// Falls back to `(X'X + 1e-8 I)^{-1} X'y` when `X'X` is numerically singular.
pub fn least_squares(x: &[f64], p: usize, y: &[f64]) -> Result<LeastSquares> {
    let m = y.len();
    if x.len() != m * p {
        return Err(Error::Shape(format!("design has {} cells, expected {}x{}", x.len(), m, p)));
    }
    let design = DMatrix::from_row_slice(m, p, x);
    let target = DVector::from_column_slice(y);
    let mut xtx = design.transpose() * &design;
    let xty = design.transpose() * target;

    let eig = SymmetricEigen::new(xtx.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let ridge_used = !(min > RANK_TOL * max) || max == 0.0;
    if ridge_used {
        for i in 0..p {
            xtx[(i, i)] += RIDGE_FALLBACK;
        }
    }
    let chol = xtx
        .cholesky()
        .ok_or_else(|| Error::Numerical("normal equations not positive definite after ridge".into()))?;
    let coef = chol.solve(&xty);
    if coef.iter().any(|c| !c.is_finite()) {
        return Err(Error::Numerical("non-finite regression coefficients".into()));
    }
    Ok(LeastSquares {
        coef: coef.iter().copied().collect(),
        ridge_used,
    })
}

/// Symmetric matrix with eigenvalues clamped at `floor`, plus a factor `L`
/// with `L L' = repaired`.
#[derive(Clone, Debug)]
pub struct PsdRepair {
    pub matrix: DMatrix<f64>,
    pub factor: DMatrix<f64>,
    pub min_eigenvalue: f64,
}

pub fn psd_repair(sym: &DMatrix<f64>, floor: f64) -> PsdRepair {
    let sym = (sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(floor)).collect();
    let v = &eig.eigenvectors;
    let n = vals.len();
    let mut factor = v.clone();
    for j in 0..n {
        let s = vals[j].sqrt();
        for i in 0..n {
            factor[(i, j)] *= s;
        }
    }
    let matrix = &factor * factor.transpose();
    PsdRepair {
        matrix,
        factor,
        min_eigenvalue: vals.iter().cloned().fold(f64::INFINITY, f64::min),
    }
}

pub fn min_eigenvalue(sym: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fit() {
        // y = 1 + 2x
        let xs = [0.0, 1.0, 2.0, 3.0];
        let design: Vec<f64> = xs.iter().flat_map(|&x| [1.0, x]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x).collect();
        let ls = least_squares(&design, 2, &y).unwrap();
        assert!(!ls.ridge_used);
        assert!((ls.coef[0] - 1.0).abs() < 1e-12);
        assert!((ls.coef[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_column_uses_ridge() {
        let xs = [0.5, 1.0, 2.0, 3.5, 4.0];
        let design: Vec<f64> = xs.iter().flat_map(|&x| [1.0, x, x]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 0.3 * x).collect();
        let ls = least_squares(&design, 3, &y).unwrap();
        assert!(ls.ridge_used);
        assert!(ls.coef.iter().all(|c| c.is_finite()));
        assert!((ls.coef[1] + ls.coef[2] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn repair_clamps_negative_eigenvalues() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]); // eigenvalues 3, -1
        let r = psd_repair(&m, 1e-12);
        assert!(min_eigenvalue(&r.matrix) >= 1e-12 - 1e-12);
        let back = &r.factor * r.factor.transpose();
        assert!((back - &r.matrix).abs().max() < 1e-12);
    }
}
