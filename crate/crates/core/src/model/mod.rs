//! The calibrated model: fitting, prediction, sparsity inspection and the
//! JSON model document.
//!
//! Coefficients are stored in normalized feature units, the units the
//! solvers work in and the ones the L1 penalty and the effective-coefficient
//! threshold refer to. [`CalibrationModel::original_coefficients`] maps them
//! to raw units (N/bitᵈ, Nm/bitᵈ) for inspection.

mod document;
mod spec;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, RawSample, Wrench, INPUT_NAMES, OUTPUT_NAMES};
use crate::error::{Error, Result};
use crate::features::{build_regressor, build_regressor_arx, Column, ColumnLayout, RegressorMatrix};
use crate::solver::{
    denormalize_coefficients, normalize_features, ColumnRole, LassoOptions, LassoSolver,
    LeastSquares, NormalizationStats,
};

pub use document::{FORMAT_NAME, FORMAT_VERSION};
pub use spec::ModelSpec;

/// Magnitude below which a coefficient is treated as negligible.
pub const EFFECTIVE_THRESHOLD: f64 = 1e-9;

/// Non-fatal conditions met while fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWarning {
    /// The active regressor columns are linearly dependent; coefficients are
    /// the minimum-norm least-squares solution.
    RankDeficient { rank: usize, columns: usize },
    /// Coordinate descent hit its sweep cap for `output`.
    NotConverged {
        output: usize,
        sweeps: usize,
        objective: f64,
    },
    /// Zero-variance columns excluded from the fit.
    DegenerateColumns { columns: Vec<usize> },
}

impl std::fmt::Display for FitWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FitWarning::RankDeficient { rank, columns } => write!(
                f,
                "regressor is rank deficient (rank {rank} of {columns}); minimum-norm solution used"
            ),
            FitWarning::NotConverged {
                output,
                sweeps,
                objective,
            } => write!(
                f,
                "coordinate descent for output {} stopped after {sweeps} sweeps without converging (objective {objective:e})",
                OUTPUT_NAMES.get(*output).copied().unwrap_or("?")
            ),
            FitWarning::DegenerateColumns { columns } => {
                write!(f, "{} constant regressor column(s) excluded: {columns:?}", columns.len())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    /// SHA-256 of the training data.
    pub dataset_sha256: String,
    pub training_samples: usize,
    /// RFC 3339 fit time; absent for deterministic runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted_at: Option<String>,
    #[serde(default)]
    pub warnings: Vec<FitWarning>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub lasso: LassoOptions,
    /// Stamp the fit time into the metadata.
    pub record_time: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            lasso: LassoOptions::default(),
            record_time: true,
        }
    }
}

/// Past samples for dynamic models, oldest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

/// One row of a coefficient listing.
#[derive(Debug, Clone, PartialEq)]
pub struct TermEntry {
    pub output: usize,
    pub column: usize,
    pub term: String,
    pub normalized: f64,
    pub original: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationModel {
    spec: ModelSpec,
    layout: ColumnLayout,
    normalization: NormalizationStats,
    coefficients: Vec<DVector<f64>>,
    input_names: Vec<String>,
    output_names: Vec<String>,
    pub metadata: ModelMetadata,
}

fn default_input_names(inputs: usize) -> Vec<String> {
    if inputs <= INPUT_NAMES.len() {
        INPUT_NAMES[..inputs].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=inputs).map(|i| format!("u{i}")).collect()
    }
}

fn default_output_names(outputs: usize) -> Vec<String> {
    if outputs == OUTPUT_NAMES.len() {
        OUTPUT_NAMES.iter().map(|s| s.to_string()).collect()
    } else {
        (1..=outputs).map(|i| format!("y{i}")).collect()
    }
}

impl CalibrationModel {
    /// Assembles a model from its parts, checking every shape invariant.
    /// `coefficients` are in normalized feature units, one vector per output.
    pub fn from_parts(
        spec: ModelSpec,
        normalization: NormalizationStats,
        coefficients: Vec<DVector<f64>>,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        let layout = ColumnLayout::new(&spec)?;
        normalization.check()?;
        if normalization.len() != layout.len() {
            return Err(Error::Shape(format!(
                "normalization covers {} columns, layout has {}",
                normalization.len(),
                layout.len()
            )));
        }
        if normalization.offset_column() != Some(0)
            || normalization.role.iter().filter(|r| **r == ColumnRole::Offset).count() != 1
        {
            return Err(Error::Shape("column 0, and only column 0, must be the offset".into()));
        }
        if coefficients.len() != spec.outputs {
            return Err(Error::Shape(format!(
                "{} coefficient vectors for {} outputs",
                coefficients.len(),
                spec.outputs
            )));
        }
        for (i, x) in coefficients.iter().enumerate() {
            if x.len() != layout.len() {
                return Err(Error::Shape(format!(
                    "output {i} has {} coefficients, layout has {} columns",
                    x.len(),
                    layout.len()
                )));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Shape(format!("output {i} has non-finite coefficients")));
            }
        }
        Ok(Self {
            input_names: default_input_names(spec.inputs),
            output_names: default_output_names(spec.outputs),
            spec,
            layout,
            normalization,
            coefficients,
            metadata,
        })
    }

    /// Fits every output channel of `spec` on aligned input/output rows:
    /// ordinary least squares when `spec.lambda == 0`, LASSO otherwise.
    pub fn fit(
        spec: &ModelSpec,
        inputs: &[Vec<f64>],
        outputs: &[Vec<f64>],
        options: &FitOptions,
    ) -> Result<Self> {
        spec.validate()?;
        if inputs.len() != outputs.len() {
            return Err(Error::Shape(format!(
                "{} input rows but {} output rows",
                inputs.len(),
                outputs.len()
            )));
        }
        for (row, y) in outputs.iter().enumerate() {
            if y.len() != spec.outputs {
                return Err(Error::Shape(format!(
                    "output row {row} has {} values, expected {}",
                    y.len(),
                    spec.outputs
                )));
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(row, "output value is not finite"));
            }
        }
        let regressor = if spec.is_dynamic() {
            build_regressor_arx(inputs, outputs, spec)?
        } else {
            build_regressor(inputs, spec)?
        };
        let (normalized, stats) = normalize_features(&regressor)?;
        let active = stats.active_columns();
        let reduced = normalized.select_columns(&active);

        let mut warnings = Vec::new();
        let degenerate: Vec<usize> = (0..stats.len())
            .filter(|&j| stats.role[j] == ColumnRole::Degenerate)
            .collect();
        if !degenerate.is_empty() {
            warnings.push(FitWarning::DegenerateColumns { columns: degenerate });
        }

        let targets: Vec<DVector<f64>> = (0..spec.outputs)
            .map(|i| regressor.targets(outputs, i))
            .collect::<Result<_>>()?;

        let solved: Vec<DVector<f64>> = if spec.lambda == 0.0 {
            let solver = LeastSquares::new(&reduced)?;
            if solver.is_rank_deficient() {
                warnings.push(FitWarning::RankDeficient {
                    rank: solver.rank(),
                    columns: reduced.ncols(),
                });
            }
            targets
                .par_iter()
                .map(|b| solver.solve(b).map(|fit| fit.coefficients))
                .collect::<Result<_>>()?
        } else {
            let penalized: Vec<bool> = active
                .iter()
                .map(|&j| stats.role[j] == ColumnRole::Normalized)
                .collect();
            let solver = LassoSolver::new(&reduced, &penalized)?;
            let fits: Vec<_> = targets
                .par_iter()
                .map(|b| solver.solve(b, spec.lambda, &options.lasso))
                .collect::<Result<_>>()?;
            for (output, fit) in fits.iter().enumerate() {
                if !fit.converged {
                    warnings.push(FitWarning::NotConverged {
                        output,
                        sweeps: fit.sweeps,
                        objective: fit.objective,
                    });
                }
            }
            fits.into_iter().map(|f| f.coefficients).collect()
        };

        let coefficients = solved
            .into_iter()
            .map(|x| {
                let mut full = DVector::zeros(stats.len());
                for (k, &j) in active.iter().enumerate() {
                    full[j] = x[k];
                }
                full
            })
            .collect();

        let metadata = ModelMetadata {
            dataset_sha256: hash_rows(inputs, outputs),
            training_samples: inputs.len(),
            fitted_at: options.record_time.then(|| chrono::Utc::now().to_rfc3339()),
            warnings,
        };
        Self::from_parts(*spec, stats, coefficients, metadata)
    }

    /// Fits on a dataset. A 7-input spec requires the temperature column.
    pub fn fit_dataset(spec: &ModelSpec, dataset: &Dataset, options: &FitOptions) -> Result<Self> {
        let inputs = dataset.inputs(spec.inputs)?;
        let mut model = Self::fit(spec, &inputs, &dataset.outputs(), options)?;
        model.metadata.dataset_sha256 = dataset.content_hash();
        Ok(model)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layout(&self) -> &ColumnLayout {
        &self.layout
    }

    pub fn normalization(&self) -> &NormalizationStats {
        &self.normalization
    }

    pub fn input_names(&self) -> &[String] {
        &self.input_names
    }

    pub fn output_names(&self) -> &[String] {
        &self.output_names
    }

    /// Coefficients in normalized feature units, one vector per output.
    pub fn coefficients(&self) -> &[DVector<f64>] {
        &self.coefficients
    }

    /// Coefficients in raw units; the offset entry is in N or Nm.
    pub fn original_coefficients(&self) -> Vec<DVector<f64>> {
        self.coefficients
            .iter()
            .map(|x| denormalize_coefficients(x, &self.normalization).expect("layout checked"))
            .collect()
    }

    /// Total coefficient count, offsets included.
    pub fn total_coefficients(&self) -> usize {
        self.spec.outputs * self.layout.len()
    }

    /// For an instantaneous degree-1 model: the `ny × nu` calibration matrix
    /// `C` and offset `o` of `y = C·u + o`, in raw units.
    pub fn calibration_matrix(&self) -> Result<(DMatrix<f64>, DVector<f64>)> {
        if self.spec.degree != 1 || self.spec.is_dynamic() {
            return Err(Error::InvalidSpec(
                "a calibration matrix exists only for instantaneous degree-1 models".into(),
            ));
        }
        let original = self.original_coefficients();
        let ny = self.spec.outputs;
        let nu = self.spec.inputs;
        let mut c = DMatrix::zeros(ny, nu);
        let mut o = DVector::zeros(ny);
        for (i, x) in original.iter().enumerate() {
            o[i] = x[0];
            for (j, column) in self.layout.columns().iter().enumerate().skip(1) {
                if let Column::Input { monomial, .. } = column {
                    let channel = monomial.indices()[0];
                    c[(i, channel)] = x[j];
                }
            }
        }
        Ok((c, o))
    }

    #[inline]
    fn combine(&self, row: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = row
            .iter()
            .enumerate()
            .map(|(j, &v)| self.normalization.normalize_value(j, v))
            .collect();
        self.coefficients
            .iter()
            .map(|x| {
                let mut acc = 0.0;
                for (c, v) in x.iter().zip(&z) {
                    acc += c * v;
                }
                acc
            })
            .collect()
    }

    /// Predicts all outputs for one input row. Dynamic models need the
    /// previous `max(na, nb)` samples in `history`.
    pub fn predict(&self, input: &[f64], history: Option<&History>) -> Result<Vec<f64>> {
        let empty = History::default();
        let h = history.unwrap_or(&empty);
        let row = self.layout.evaluate_row(input, &h.inputs, &h.outputs)?;
        Ok(self.combine(&row))
    }

    pub fn predict_sample(&self, sample: &RawSample, history: Option<&History>) -> Result<Wrench> {
        let y = self.predict(&sample.to_input(self.spec.inputs)?, history)?;
        Wrench::from_slice(&y)
    }

    /// Predicts every row that has full history. Returns the index of the
    /// first predicted sample and the predictions from there on. Lagged
    /// outputs are taken from `outputs` (one-step-ahead prediction).
    pub fn predict_rows(
        &self,
        inputs: &[Vec<f64>],
        outputs: &[Vec<f64>],
    ) -> Result<(usize, Vec<Vec<f64>>)> {
        let regressor: RegressorMatrix = if self.spec.is_dynamic() {
            build_regressor_arx(inputs, outputs, &self.spec)?
        } else {
            build_regressor(inputs, &self.spec)?
        };
        let values = regressor.values();
        let mut row = vec![0.0; values.ncols()];
        let predictions = (0..values.nrows())
            .map(|r| {
                for (c, slot) in row.iter_mut().enumerate() {
                    *slot = values[(r, c)];
                }
                self.combine(&row)
            })
            .collect();
        Ok((regressor.first_sample(), predictions))
    }

    pub fn predict_dataset(&self, dataset: &Dataset) -> Result<(usize, Vec<Wrench>)> {
        let inputs = dataset.inputs(self.spec.inputs)?;
        let (first, rows) = self.predict_rows(&inputs, &dataset.outputs())?;
        let wrenches = rows
            .iter()
            .map(|y| Wrench::from_slice(y))
            .collect::<Result<_>>()?;
        Ok((first, wrenches))
    }

    /// Coefficients with `|value| > threshold`, across all outputs, offsets
    /// included.
    pub fn count_effective(&self, threshold: f64) -> usize {
        self.coefficients
            .iter()
            .flat_map(|x| x.iter())
            .filter(|v| v.abs() > threshold)
            .count()
    }

    /// Copy with every coefficient of magnitude `≤ threshold` set to zero.
    pub fn prune(&self, threshold: f64) -> CalibrationModel {
        let mut pruned = self.clone();
        for x in &mut pruned.coefficients {
            for v in x.iter_mut() {
                if v.abs() <= threshold {
                    *v = 0.0;
                }
            }
        }
        pruned
    }

    /// Display name of column `j`, e.g. `u1·u3²·temp` or `fx(k-1)`.
    pub fn term_name(&self, column: usize) -> String {
        let names: Vec<&str> = self.input_names.iter().map(String::as_str).collect();
        match &self.layout.columns()[column] {
            Column::Constant => "1".to_string(),
            Column::Input { lag: 0, monomial } => monomial.name(&names),
            Column::Input { lag, monomial } => {
                let lagged: Vec<String> = names.iter().map(|n| format!("{n}(k-{lag})")).collect();
                let lagged: Vec<&str> = lagged.iter().map(String::as_str).collect();
                monomial.name(&lagged)
            }
            Column::Output { lag, channel } => format!("{}(k-{lag})", self.output_names[*channel]),
        }
    }

    /// Coefficients above `threshold` (normalized units), largest first.
    pub fn inspect(&self, threshold: f64) -> Vec<TermEntry> {
        let original = self.original_coefficients();
        let mut entries: Vec<TermEntry> = self
            .coefficients
            .iter()
            .enumerate()
            .flat_map(|(output, x)| {
                let original = &original[output];
                x.iter()
                    .enumerate()
                    .filter(|(_, v)| v.abs() > threshold)
                    .map(move |(column, &v)| (output, column, v, original[column]))
                    .collect::<Vec<_>>()
            })
            .map(|(output, column, normalized, original)| TermEntry {
                output,
                column,
                term: self.term_name(column),
                normalized,
                original,
            })
            .collect();
        entries.sort_by(|a, b| {
            b.normalized
                .abs()
                .total_cmp(&a.normalized.abs())
                .then(a.output.cmp(&b.output))
                .then(a.column.cmp(&b.column))
        });
        entries
    }
}

fn hash_rows(inputs: &[Vec<f64>], outputs: &[Vec<f64>]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for (u, y) in inputs.iter().zip(outputs) {
        for v in u.iter().chain(y) {
            hasher.update(v.to_le_bytes());
        }
    }
    hex::encode(hasher.finalize())
}
