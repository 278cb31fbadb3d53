use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Result of an ordinary least-squares solve.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    /// Numerical rank of the regressor.
    pub rank: usize,
    /// Set when the regressor is rank deficient; `coefficients` is then the
    /// minimum-norm minimizer.
    pub rank_deficient: bool,
}

/// Least-squares solver for `min ½‖Ax − b‖²` that factorizes `A` once and
/// solves for any number of right-hand sides.
///
/// Full-rank systems are solved by Householder QR. When the triangular
/// factor reveals rank deficiency, or `A` has fewer rows than columns, the
/// solver switches to a truncated SVD and returns the minimum-norm solution.
pub struct LeastSquares {
    rows: usize,
    columns: usize,
    method: Method,
}

enum Method {
    Qr(nalgebra::QR<f64, nalgebra::Dyn, nalgebra::Dyn>, DMatrix<f64>),
    Svd(nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>, f64, usize),
}

fn check_finite_matrix(a: &DMatrix<f64>) -> Result<()> {
    for j in 0..a.ncols() {
        if let Some(i) = a.column(j).iter().position(|v| !v.is_finite()) {
            return Err(Error::data(i, format!("regressor column {j} is not finite")));
        }
    }
    Ok(())
}

fn rank_tolerance(a: &DMatrix<f64>, largest: f64) -> f64 {
    a.nrows().max(a.ncols()) as f64 * f64::EPSILON * largest
}

impl LeastSquares {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        if a.ncols() == 0 || a.nrows() == 0 {
            return Err(Error::InsufficientData("empty regressor matrix".into()));
        }
        check_finite_matrix(a)?;
        if a.nrows() >= a.ncols() {
            let qr = a.clone().qr();
            let r = qr.r();
            let diag: Vec<f64> = r.diagonal().iter().map(|v| v.abs()).collect();
            let largest = diag.iter().cloned().fold(0.0, f64::max);
            let tol = rank_tolerance(a, largest);
            if largest > 0.0 && diag.iter().all(|&d| d > tol) {
                return Ok(Self {
                    rows: a.nrows(),
                    columns: a.ncols(),
                    method: Method::Qr(qr, r),
                });
            }
        }
        let svd = a.clone().svd(true, true);
        let largest = svd.singular_values.max();
        let tol = rank_tolerance(a, largest);
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        Ok(Self {
            rows: a.nrows(),
            columns: a.ncols(),
            method: Method::Svd(svd, tol, rank),
        })
    }

    pub fn rank(&self) -> usize {
        match &self.method {
            Method::Qr(..) => self.columns,
            Method::Svd(_, _, rank) => *rank,
        }
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.rank() < self.columns
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<OlsFit> {
        if b.len() != self.rows {
            return Err(Error::Shape(format!(
                "target has {} rows, regressor has {}",
                b.len(),
                self.rows
            )));
        }
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(i, "target value is not finite"));
        }
        let coefficients = match &self.method {
            Method::Qr(qr, r) => {
                let mut qtb = b.clone();
                qr.q_tr_mul(&mut qtb);
                let head = qtb.rows(0, self.columns).into_owned();
                r.solve_upper_triangular(&head).ok_or_else(|| {
                    Error::Numerical("triangular solve failed on a full-rank factor".into())
                })?
            }
            Method::Svd(svd, tol, _) => {
                svd.solve(b, *tol).map_err(|e| Error::Numerical(e.to_string()))?
            }
        };
        if coefficients.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("least-squares solution is not finite".into()));
        }
        Ok(OlsFit {
            coefficients,
            rank: self.rank(),
            rank_deficient: self.is_rank_deficient(),
        })
    }
}

/// Solves `argmin ½‖Ax − b‖²`.
pub fn fit_ols(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<OlsFit> {
    LeastSquares::new(a)?.solve(b)
}
