use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Column, RegressorMatrix};

/// What normalization did with a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnRole {
    /// The all-ones column: left untouched and never penalized.
    Offset,
    /// Z-scored with the stored mean and scale.
    Normalized,
    /// Zero variance; excluded from the fit, coefficient fixed at 0.
    Degenerate,
}

/// Per-column statistics mapping raw regressor columns to the normalized
/// ones the solvers see. Scale is the population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub role: Vec<ColumnRole>,
}

/// A column counts as constant when its spread is below this fraction of its
/// magnitude.
const DEGENERATE_RELATIVE_SPREAD: f64 = 1e-12;

impl NormalizationStats {
    /// Statistics that leave every column unchanged (mean 0, scale 1), with
    /// `offset` optionally marked as the offset column.
    pub fn identity(columns: usize, offset: Option<usize>) -> Self {
        let mut role = vec![ColumnRole::Normalized; columns];
        if let Some(i) = offset {
            role[i] = ColumnRole::Offset;
        }
        Self {
            mean: vec![0.0; columns],
            scale: vec![1.0; columns],
            role,
        }
    }

    pub fn len(&self) -> usize {
        self.role.len()
    }

    pub fn is_empty(&self) -> bool {
        self.role.is_empty()
    }

    pub fn offset_column(&self) -> Option<usize> {
        self.role.iter().position(|r| *r == ColumnRole::Offset)
    }

    /// Columns that take part in the fit (offset and normalized).
    pub fn active_columns(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| self.role[j] != ColumnRole::Degenerate)
            .collect()
    }

    #[inline]
    pub fn normalize_value(&self, column: usize, value: f64) -> f64 {
        match self.role[column] {
            ColumnRole::Offset => value,
            ColumnRole::Normalized => (value - self.mean[column]) / self.scale[column],
            ColumnRole::Degenerate => 0.0,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        let n = self.role.len();
        if self.mean.len() != n || self.scale.len() != n {
            return Err(Error::Shape(format!(
                "normalization arrays disagree: {} means, {} scales, {} roles",
                self.mean.len(),
                self.scale.len(),
                n
            )));
        }
        for j in 0..n {
            if !self.mean[j].is_finite() || !self.scale[j].is_finite() {
                return Err(Error::Shape(format!("non-finite normalization entry in column {j}")));
            }
            if self.role[j] == ColumnRole::Normalized && self.scale[j] <= 0.0 {
                return Err(Error::Shape(format!("non-positive scale in column {j}")));
            }
        }
        Ok(())
    }
}

/// Z-scores every non-constant column of `a`. The layout's constant column
/// is kept as all ones and flagged as the offset; other zero-variance
/// columns are flagged degenerate and zeroed.
pub fn normalize_features(a: &RegressorMatrix) -> Result<(DMatrix<f64>, NormalizationStats)> {
    let values = a.values();
    let rows = values.nrows();
    if rows < 2 {
        return Err(Error::InsufficientData(format!(
            "normalization needs at least 2 rows, got {rows}"
        )));
    }
    let n = rows as f64;
    let mut normalized = values.clone();
    let mut stats = NormalizationStats::identity(values.ncols(), None);
    for (j, column) in a.layout().columns().iter().enumerate() {
        if matches!(column, Column::Constant) {
            stats.role[j] = ColumnRole::Offset;
            continue;
        }
        let col = values.column(j);
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        stats.mean[j] = mean;
        if !(std > DEGENERATE_RELATIVE_SPREAD * mean.abs()) || std == 0.0 {
            stats.role[j] = ColumnRole::Degenerate;
            stats.scale[j] = 1.0;
            normalized.column_mut(j).fill(0.0);
            continue;
        }
        stats.scale[j] = std;
        for v in normalized.column_mut(j).iter_mut() {
            *v = (*v - mean) / std;
        }
    }
    Ok((normalized, stats))
}

/// Maps coefficients fitted against normalized columns back to raw-column
/// units. The offset absorbs the mean shifts; degenerate columns map to 0.
pub fn denormalize_coefficients(
    x_norm: &DVector<f64>,
    stats: &NormalizationStats,
) -> Result<DVector<f64>> {
    if x_norm.len() != stats.len() {
        return Err(Error::Shape(format!(
            "{} coefficients for {} normalized columns",
            x_norm.len(),
            stats.len()
        )));
    }
    let mut out = DVector::zeros(x_norm.len());
    let mut shift = 0.0;
    for j in 0..x_norm.len() {
        match stats.role[j] {
            ColumnRole::Offset => out[j] = x_norm[j],
            ColumnRole::Normalized => {
                let c = x_norm[j] / stats.scale[j];
                out[j] = c;
                shift += c * stats.mean[j];
            }
            ColumnRole::Degenerate => {}
        }
    }
    match stats.offset_column() {
        Some(o) => out[o] -= shift,
        None if shift != 0.0 => {
            return Err(Error::Shape(
                "centered columns need an offset column to absorb their means".into(),
            ))
        }
        None => {}
    }
    Ok(out)
}
