//! Per-output regression: ordinary least squares and L1-regularized least
//! squares over normalized regressor columns.

mod lasso;
mod normalize;
mod ols;

pub use lasso::{fit_lasso, soft_threshold, LassoFit, LassoOptions, LassoSolver};
pub use normalize::{denormalize_coefficients, normalize_features, ColumnRole, NormalizationStats};
pub use ols::{fit_ols, LeastSquares, OlsFit};
