//! JSON model document, schema version 1.
//!
//! ```json
//! {
//!   "format": "ftcal-model",
//!   "version": 1,
//!   "spec": { "degree": 1, "inputs": 7, "outputs": 6, "lambda": 0.0,
//!             "output_lags": 0, "input_lags": 0 },
//!   "input_names": ["u1", …, "temp"],
//!   "output_names": ["fx", …, "tz"],
//!   "columns": [ { "kind": "constant" },
//!                { "kind": "input", "lag": 0, "monomial": [1, 0, 0, 0, 0, 0, 0] },
//!                { "kind": "output", "lag": 1, "channel": 0 }, … ],
//!   "normalization": { "mean": [...], "scale": [...], "role": ["offset", "normalized", …] },
//!   "coefficients": [[...], …],
//!   "coefficients_original": [[...], …],
//!   "metadata": { "dataset_sha256": "…", "training_samples": 5000,
//!                 "fitted_at": "…", "warnings": [] }
//! }
//! ```
//!
//! `coefficients` holds one row per output in normalized feature units and
//! is what predictions use. `coefficients_original` repeats them in raw
//! units for reading; it must agree with `coefficients` and `normalization`.
//! Floats are written in shortest round-trip form and parsed exactly.

use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{CalibrationModel, ModelMetadata, ModelSpec};
use crate::error::{Error, Result};
use crate::features::Column;
use crate::solver::{denormalize_coefficients, NormalizationStats};

pub const FORMAT_NAME: &str = "ftcal-model";
pub const FORMAT_VERSION: u32 = 1;

/// Relative disagreement tolerated between stored and recomputed raw-unit
/// coefficients.
const ORIGINAL_TOLERANCE: f64 = 1e-12;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    format: String,
    version: u32,
    spec: ModelSpec,
    input_names: Vec<String>,
    output_names: Vec<String>,
    columns: Vec<Column>,
    normalization: NormalizationStats,
    coefficients: Vec<Vec<f64>>,
    coefficients_original: Vec<Vec<f64>>,
    metadata: ModelMetadata,
}

#[derive(Deserialize)]
struct Header {
    format: Option<String>,
    version: Option<u32>,
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Document(format!("line {}, column {}: {e}", e.line(), e.column()))
}

impl CalibrationModel {
    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            spec: self.spec,
            input_names: self.input_names.clone(),
            output_names: self.output_names.clone(),
            columns: self.layout.columns().to_vec(),
            normalization: self.normalization.clone(),
            coefficients: self.coefficients.iter().map(|x| x.as_slice().to_vec()).collect(),
            coefficients_original: self
                .original_coefficients()
                .iter()
                .map(|x| x.as_slice().to_vec())
                .collect(),
            metadata: self.metadata.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("model document serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let header: Header = serde_json::from_str(text).map_err(parse_error)?;
        match header.format.as_deref() {
            Some(FORMAT_NAME) => {}
            Some(other) => {
                return Err(Error::Document(format!("unknown document format \"{other}\"")))
            }
            None => return Err(Error::Document("missing \"format\" field".into())),
        }
        match header.version {
            Some(FORMAT_VERSION) => {}
            Some(found) => {
                return Err(Error::Version {
                    found,
                    expected: FORMAT_VERSION,
                })
            }
            None => return Err(Error::Document("missing \"version\" field".into())),
        }
        let doc: ModelDocument = serde_json::from_str(text).map_err(parse_error)?;

        let coefficients = doc.coefficients.into_iter().map(DVector::from_vec).collect();
        let mut model =
            CalibrationModel::from_parts(doc.spec, doc.normalization, coefficients, doc.metadata)?;
        if doc.columns != model.layout.columns() {
            return Err(Error::Shape(format!(
                "column table ({} entries) does not match the layout implied by the spec ({} entries)",
                doc.columns.len(),
                model.layout.len()
            )));
        }
        if doc.input_names.len() != doc.spec.inputs || doc.output_names.len() != doc.spec.outputs {
            return Err(Error::Shape("channel name lists do not match the spec".into()));
        }
        if doc.coefficients_original.len() != doc.spec.outputs {
            return Err(Error::Shape(format!(
                "{} raw-unit coefficient rows for {} outputs",
                doc.coefficients_original.len(),
                doc.spec.outputs
            )));
        }
        for (i, stored) in doc.coefficients_original.iter().enumerate() {
            let expected = denormalize_coefficients(&model.coefficients[i], &model.normalization)?;
            if stored.len() != expected.len() {
                return Err(Error::Shape(format!(
                    "output {i} has {} raw-unit coefficients, layout has {} columns",
                    stored.len(),
                    expected.len()
                )));
            }
            for (j, (&s, &e)) in stored.iter().zip(expected.iter()).enumerate() {
                if (s - e).abs() > ORIGINAL_TOLERANCE * s.abs().max(e.abs()) {
                    return Err(Error::Document(format!(
                        "raw-unit coefficient [{i}][{j}] = {s} disagrees with the normalized coefficients ({e})"
                    )));
                }
            }
        }
        model.input_names = doc.input_names;
        model.output_names = doc.output_names;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
