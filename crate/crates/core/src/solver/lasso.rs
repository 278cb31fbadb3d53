use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `sign(z) · max(|z| − gamma, 0)`.
#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Active-set passes between full sweeps.
const ACTIVE_PASSES: usize = 50;

/// Support reductions tried per refinement.
const REFINE_STEPS: usize = 20;

enum Step {
    /// Moved to the restricted minimizer.
    Reached,
    /// Stopped where a coefficient hit zero.
    Pinned,
    /// No improving step.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoOptions {
    /// Stop once a full sweep moves no coefficient by more than this.
    pub tolerance: f64,
    /// Hard cap on coordinate sweeps (full and active-set sweeps together).
    pub max_sweeps: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_sweeps: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub coefficients: DVector<f64>,
    pub sweeps: usize,
    pub converged: bool,
    /// Final value of `½‖Ax − b‖² + λ‖x_penalized‖₁`.
    pub objective: f64,
    /// Objective after every sweep.
    pub objective_trace: Vec<f64>,
}

/// Cyclic coordinate descent for `½‖Ax − b‖² + λ Σ_{j penalized} |x_j|`.
///
/// The Gram matrix `AᵀA` is formed once, so each coordinate update costs
/// `O(p)` regardless of the row count and several targets can share one
/// solver. Sweeps alternate between a full pass and passes over the current
/// non-zero set, with an exact solve on the settled support in between;
/// convergence is only declared after a full pass.
pub struct LassoSolver<'a> {
    a: &'a DMatrix<f64>,
    gram: DMatrix<f64>,
    penalized: Vec<bool>,
}

impl<'a> LassoSolver<'a> {
    pub fn new(a: &'a DMatrix<f64>, penalized: &[bool]) -> Result<Self> {
        if penalized.len() != a.ncols() {
            return Err(Error::Shape(format!(
                "penalty mask has {} entries for {} columns",
                penalized.len(),
                a.ncols()
            )));
        }
        for j in 0..a.ncols() {
            if let Some(i) = a.column(j).iter().position(|v| !v.is_finite()) {
                return Err(Error::data(i, format!("regressor column {j} is not finite")));
            }
        }
        Ok(Self {
            a,
            gram: a.tr_mul(a),
            penalized: penalized.to_vec(),
        })
    }

    pub fn solve(&self, b: &DVector<f64>, lambda: f64, options: &LassoOptions) -> Result<LassoFit> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "lambda must be a finite non-negative number, got {lambda}"
            )));
        }
        if b.len() != self.a.nrows() {
            return Err(Error::Shape(format!(
                "target has {} rows, regressor has {}",
                b.len(),
                self.a.nrows()
            )));
        }
        if let Some(i) = b.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(i, "target value is not finite"));
        }

        let p = self.a.ncols();
        let correlation = self.a.tr_mul(b);
        let btb = b.dot(b);
        let mut x = DVector::<f64>::zeros(p);
        // Invariant: gx == gram * x.
        let mut gx = DVector::<f64>::zeros(p);

        let objective = |x: &DVector<f64>, gx: &DVector<f64>| -> f64 {
            let sse = (btb - 2.0 * correlation.dot(x) + x.dot(gx)).max(0.0);
            let l1: f64 = (0..p)
                .filter(|&j| self.penalized[j])
                .map(|j| x[j].abs())
                .sum();
            0.5 * sse + lambda * l1
        };

        let update = |j: usize, x: &mut DVector<f64>, gx: &mut DVector<f64>| -> f64 {
            let gjj = self.gram[(j, j)];
            if gjj <= 0.0 {
                return 0.0;
            }
            let rho = correlation[j] - (gx[j] - gjj * x[j]);
            let next = if self.penalized[j] {
                soft_threshold(rho, lambda) / gjj
            } else {
                rho / gjj
            };
            let delta = next - x[j];
            if delta != 0.0 {
                x[j] = next;
                gx.axpy(delta, &self.gram.column(j), 1.0);
            }
            delta.abs()
        };

        let mut trace = Vec::new();
        let mut sweeps = 0;
        let mut converged = false;
        'outer: while sweeps < options.max_sweeps {
            let mut max_delta: f64 = 0.0;
            for j in 0..p {
                max_delta = max_delta.max(update(j, &mut x, &mut gx));
            }
            sweeps += 1;
            trace.push(objective(&x, &gx));
            if max_delta < options.tolerance {
                converged = true;
                break;
            }
            let active: Vec<usize> = (0..p).filter(|&j| x[j] != 0.0).collect();
            for _ in 0..ACTIVE_PASSES {
                if sweeps >= options.max_sweeps {
                    break 'outer;
                }
                let mut max_delta: f64 = 0.0;
                for &j in &active {
                    max_delta = max_delta.max(update(j, &mut x, &mut gx));
                }
                sweeps += 1;
                trace.push(objective(&x, &gx));
                if max_delta < options.tolerance {
                    break;
                }
            }
            self.refine(&correlation, lambda, &mut x, &mut gx, &objective);
        }

        // Report the objective from an explicit residual rather than the
        // Gram expansion used for the per-sweep trace.
        let residual = self.a * &x - b;
        let l1: f64 = (0..p)
            .filter(|&j| self.penalized[j])
            .map(|j| x[j].abs())
            .sum();
        Ok(LassoFit {
            objective: 0.5 * residual.norm_squared() + lambda * l1,
            coefficients: x,
            sweeps,
            converged,
            objective_trace: trace,
        })
    }
}

impl LassoSolver<'_> {
    /// Coordinate descent crawls along strongly correlated columns. With the
    /// current support `S` and its signs fixed, the objective is a quadratic
    /// whose minimizer solves `G_SS z = c_S − λ s_S`. Moving from `x` toward
    /// `z`, the objective is exact until a coefficient crosses zero, so the
    /// step stops at whichever crossing (or `z` itself) scores lowest and
    /// pins the crossing coefficient to zero, then retries on the smaller
    /// support. Nothing moves unless the objective drops.
    fn refine(
        &self,
        correlation: &DVector<f64>,
        lambda: f64,
        x: &mut DVector<f64>,
        gx: &mut DVector<f64>,
        objective: &dyn Fn(&DVector<f64>, &DVector<f64>) -> f64,
    ) {
        for _ in 0..REFINE_STEPS {
            let support: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
            match self.refine_step(&support, correlation, lambda, x, gx, objective) {
                Step::Pinned => continue,
                Step::Reached | Step::Stalled => break,
            }
        }
    }

    fn refine_step(
        &self,
        support: &[usize],
        correlation: &DVector<f64>,
        lambda: f64,
        x: &mut DVector<f64>,
        gx: &mut DVector<f64>,
        objective: &dyn Fn(&DVector<f64>, &DVector<f64>) -> f64,
    ) -> Step {
        if support.is_empty() {
            return Step::Stalled;
        }
        let g = self.gram.select_rows(support).select_columns(support);
        let Some(cholesky) = g.cholesky() else {
            return Step::Stalled;
        };
        let rhs = DVector::from_iterator(
            support.len(),
            support.iter().map(|&j| {
                let pull = if self.penalized[j] { lambda * x[j].signum() } else { 0.0 };
                correlation[j] - pull
            }),
        );
        let z = cholesky.solve(&rhs);
        if z.iter().any(|v| !v.is_finite()) {
            return Step::Stalled;
        }
        let direction = DVector::from_iterator(
            support.len(),
            support.iter().zip(z.iter()).map(|(&j, &v)| v - x[j]),
        );
        let g_direction = self.gram.select_columns(support) * &direction;

        // (step, coefficient pinned to zero at that step)
        let mut steps: Vec<(f64, Option<usize>)> = vec![(1.0, None)];
        for (k, &j) in support.iter().enumerate() {
            if self.penalized[j] && z[k] * x[j] <= 0.0 {
                let t = x[j] / (x[j] - z[k]);
                if t > 0.0 && t < 1.0 {
                    steps.push((t, Some(j)));
                }
            }
        }
        let at = |t: f64, pin: Option<usize>| -> (f64, Option<usize>, DVector<f64>, DVector<f64>) {
            let mut cx = x.clone();
            for (k, &j) in support.iter().enumerate() {
                cx[j] += t * direction[k];
            }
            let mut cgx = gx.clone();
            cgx.axpy(t, &g_direction, 1.0);
            if let Some(j) = pin {
                cgx.axpy(-cx[j], &self.gram.column(j), 1.0);
                cx[j] = 0.0;
            }
            // `objective` takes |x| directly, so earlier crossings are still
            // scored exactly.
            let value = objective(&cx, &cgx);
            (value, pin, cx, cgx)
        };
        let current = objective(x, gx);
        let best = steps
            .into_iter()
            .map(|(t, pin)| at(t, pin))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        match best {
            Some((value, pin, cx, cgx)) if value < current => {
                *x = cx;
                *gx = cgx;
                if pin.is_some() {
                    Step::Pinned
                } else {
                    Step::Reached
                }
            }
            _ => Step::Stalled,
        }
    }
}

/// Solves `argmin ½‖Ax − b‖² + λ‖x_penalized‖₁` by cyclic coordinate
/// descent. `penalized[j] = false` exempts column `j` (the offset).
pub fn fit_lasso(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    lambda: f64,
    penalized: &[bool],
) -> Result<LassoFit> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "lambda must be a finite non-negative number, got {lambda}"
        )));
    }
    LassoSolver::new(a, penalized)?.solve(b, lambda, &LassoOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_closed_forms() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(1.0, 1.0), 0.0);
        assert_eq!(soft_threshold(2.5, 0.0), 2.5);
    }

    #[test]
    fn one_dimensional_problem() {
        // a = (0.6, 0.8) has unit norm, aᵀb = 0.6·3 + 0.8·1.5 = 3.
        let a = DMatrix::from_column_slice(2, 1, &[0.6, 0.8]);
        let b = DVector::from_vec(vec![3.0, 1.5]);
        assert!((a.column(0).dot(&b) - 3.0_f64).abs() < 1e-15);
        let fit = fit_lasso(&a, &b, 1.0, &[true]).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!(fit.converged);
    }

    #[test]
    fn unpenalized_column_is_plain_least_squares() {
        let a = DMatrix::from_element(4, 1, 1.0);
        let b = DVector::from_vec(vec![1.0, 2.0, 3.0, 6.0]);
        let fit = fit_lasso(&a, &b, 1e6, &[false]).unwrap();
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn negative_lambda() {
        let a = DMatrix::identity(2, 2);
        let err = fit_lasso(&a, &DVector::zeros(2), -0.1, &[true, true]).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec(_)));
    }

    #[test]
    fn sweep_cap_reports_non_convergence() {
        // Strongly correlated columns converge slowly.
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 1.001, 1.0, 0.999, 0.0, 0.001]);
        let b = DVector::from_vec(vec![1.0, 2.0, 0.5]);
        let solver = LassoSolver::new(&a, &[true, true]).unwrap();
        let fit = solver
            .solve(&b, 1e-9, &LassoOptions { tolerance: 1e-14, max_sweeps: 3 })
            .unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.sweeps, 3);
        assert_eq!(fit.objective_trace.len(), 3);
        assert!(fit.objective.is_finite());
    }

    #[test]
    fn mask_length_checked() {
        let a = DMatrix::identity(2, 2);
        assert!(matches!(LassoSolver::new(&a, &[true]), Err(Error::Shape(_))));
    }
}
