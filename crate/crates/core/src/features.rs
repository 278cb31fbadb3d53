//! Polynomial monomials and regressor matrices.
//!
//! A model of degree `np` over `nu` input channels uses every monomial
//! `u_1^e_1 · … · u_nu^e_nu` with `e_1 + … + e_nu ≤ np`, counting commutative
//! products (`u_2·u_3` and `u_3·u_2`) once. The constant monomial carries the
//! offset. Monomials are ordered degree-major, then lexicographically on the
//! non-decreasing tuple of channel indices, so `u1·u1 < u1·u2 < u2·u2`.
//!
//! Regressor entries are evaluated as a left-to-right product over channels,
//! each power expanded into repeated multiplication starting from `1.0`.
//! That order is part of the contract: it makes entries reproducible bit for
//! bit.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelSpec;

/// Exponent vector of one polynomial term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial {
    exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self { exponents }
    }

    pub fn constant(inputs: usize) -> Self {
        Self {
            exponents: vec![0; inputs],
        }
    }

    /// Builds the monomial for a multiset of channel indices, e.g. `[0, 2, 2]`
    /// is `u1·u3²`.
    pub fn from_indices(inputs: usize, indices: &[usize]) -> Self {
        let mut exponents = vec![0; inputs];
        for &i in indices {
            exponents[i] += 1;
        }
        Self { exponents }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    /// Non-decreasing channel-index tuple, the inverse of [`Monomial::from_indices`].
    pub fn indices(&self) -> Vec<usize> {
        self.exponents
            .iter()
            .enumerate()
            .flat_map(|(channel, &e)| std::iter::repeat_n(channel, e as usize))
            .collect()
    }

    /// Evaluates the monomial at `input`. The width of `input` is not checked
    /// here; callers validate rows once up front.
    #[inline]
    pub fn evaluate(&self, input: &[f64]) -> f64 {
        let mut value = 1.0;
        for (&e, &u) in self.exponents.iter().zip(input) {
            for _ in 0..e {
                value *= u;
            }
        }
        value
    }

    /// Human-readable name such as `u1·u3²·temp`, using `names` per channel.
    pub fn name(&self, names: &[&str]) -> String {
        if self.is_constant() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (channel, &e) in self.exponents.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let base = names
                .get(channel)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("x{}", channel + 1));
            if e == 1 {
                parts.push(base);
            } else {
                parts.push(format!("{base}{}", superscript(e)));
            }
        }
        parts.join("·")
    }
}

fn superscript(n: u32) -> String {
    const DIGITS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
    n.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

/// Exact binomial coefficient `C(n, k)`, failing instead of overflowing.
pub fn binomial(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) is divisible by i at every step.
        acc = acc
            .checked_mul(n as u128 - k as u128 + i)
            .ok_or_else(|| Error::InvalidSpec(format!("C({n}, {k}) overflows")))?
            / i;
    }
    u64::try_from(acc).map_err(|_| Error::InvalidSpec(format!("C({n}, {k}) overflows")))
}

/// Number of monomials of degree exactly `degree` over `inputs` channels:
/// `(nu + r − 1)! / ((nu − 1)! · r!)`.
pub fn count_monomials_of_degree(inputs: usize, degree: usize) -> Result<u64> {
    if inputs == 0 {
        return Err(Error::InvalidSpec("input count must be at least 1".into()));
    }
    binomial((inputs + degree - 1) as u64, degree as u64)
}

/// Total coefficient count of an instantaneous polynomial model, offsets
/// included: `ny · C(nu + np, np)`.
pub fn count_coefficients(degree: usize, outputs: usize, inputs: usize) -> Result<u64> {
    if degree == 0 || outputs == 0 || inputs == 0 {
        return Err(Error::InvalidSpec(format!(
            "degree, outputs and inputs must all be at least 1 (got {degree}, {outputs}, {inputs})"
        )));
    }
    let per_output = binomial((inputs + degree) as u64, degree as u64)?;
    per_output
        .checked_mul(outputs as u64)
        .ok_or_else(|| Error::InvalidSpec("coefficient count overflows".into()))
}

/// Monomials of degree exactly `degree`, in lexicographic order of their
/// non-decreasing index tuples.
pub fn monomials_of_degree(inputs: usize, degree: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut tuple = Vec::with_capacity(degree);
    fn recurse(
        inputs: usize,
        remaining: usize,
        start: usize,
        tuple: &mut Vec<usize>,
        out: &mut Vec<Monomial>,
    ) {
        if remaining == 0 {
            out.push(Monomial::from_indices(inputs, tuple));
            return;
        }
        for channel in start..inputs {
            tuple.push(channel);
            recurse(inputs, remaining - 1, channel, tuple, out);
            tuple.pop();
        }
    }
    recurse(inputs, degree, 0, &mut tuple, &mut out);
    out
}

/// All monomials up to `degree`: the constant first, then degree 1, 2, ….
pub fn enumerate_monomials(inputs: usize, degree: usize) -> Result<Vec<Monomial>> {
    if inputs == 0 || degree == 0 {
        return Err(Error::InvalidSpec(format!(
            "enumeration needs at least one input and degree ≥ 1 (got nu={inputs}, np={degree})"
        )));
    }
    let mut all = vec![Monomial::constant(inputs)];
    for d in 1..=degree {
        all.extend(monomials_of_degree(inputs, d));
    }
    Ok(all)
}

/// One regressor column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Column {
    /// All-ones column carrying the offset.
    Constant,
    /// A non-constant monomial of the input sample `lag` steps back.
    Input { lag: usize, monomial: Monomial },
    /// Output channel `channel` observed `lag ≥ 1` steps back.
    Output { lag: usize, channel: usize },
}

/// Ordered column description shared by a regressor matrix, its
/// normalization statistics and the fitted coefficients.
///
/// Order: constant, then the input monomials for lag 0, 1, …, `nb`, then the
/// lagged outputs for lag 1, …, `na` (channel-minor).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnLayout {
    inputs: usize,
    outputs: usize,
    output_lags: usize,
    input_lags: usize,
    columns: Vec<Column>,
}

impl ColumnLayout {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        spec.validate()?;
        let monomials = enumerate_monomials(spec.inputs, spec.degree)?;
        let mut columns = vec![Column::Constant];
        for lag in 0..=spec.input_lags {
            columns.extend(
                monomials
                    .iter()
                    .filter(|m| !m.is_constant())
                    .map(|m| Column::Input {
                        lag,
                        monomial: m.clone(),
                    }),
            );
        }
        for lag in 1..=spec.output_lags {
            columns.extend((0..spec.outputs).map(|channel| Column::Output { lag, channel }));
        }
        Ok(Self {
            inputs: spec.inputs,
            outputs: spec.outputs,
            output_lags: spec.output_lags,
            input_lags: spec.input_lags,
            columns,
        })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Number of past samples a row needs: `max(na, nb)`.
    pub fn history(&self) -> usize {
        self.output_lags.max(self.input_lags)
    }

    pub fn is_dynamic(&self) -> bool {
        self.history() > 0
    }

    /// Evaluates one regressor row at time `k`, reading inputs `u(k − j)`
    /// and outputs `y(k − j)`. `inputs` and `outputs` must be indexable at
    /// `k − history()`.
    fn fill_row<'a>(
        &self,
        k: usize,
        inputs: &dyn Fn(usize) -> &'a [f64],
        outputs: &dyn Fn(usize) -> &'a [f64],
        row: &mut [f64],
    ) {
        for (slot, column) in row.iter_mut().zip(&self.columns) {
            *slot = match column {
                Column::Constant => 1.0,
                Column::Input { lag, monomial } => monomial.evaluate(inputs(k - lag)),
                Column::Output { lag, channel } => outputs(k - lag)[*channel],
            };
        }
    }

    /// Evaluates a single row for prediction. `input_history` and
    /// `output_history` hold past samples oldest-first; the last entry is one
    /// step back.
    pub fn evaluate_row(
        &self,
        input: &[f64],
        input_history: &[Vec<f64>],
        output_history: &[Vec<f64>],
    ) -> Result<Vec<f64>> {
        check_width(input, self.inputs, 0, "input")?;
        if input_history.len() < self.input_lags {
            return Err(Error::InsufficientHistory {
                needed: self.input_lags,
                got: input_history.len(),
            });
        }
        if output_history.len() < self.output_lags {
            return Err(Error::InsufficientHistory {
                needed: self.output_lags,
                got: output_history.len(),
            });
        }
        let ih = &input_history[input_history.len() - self.input_lags..];
        let oh = &output_history[output_history.len() - self.output_lags..];
        for (i, row) in ih.iter().enumerate() {
            check_width(row, self.inputs, i, "input history")?;
        }
        for (i, row) in oh.iter().enumerate() {
            check_width(row, self.outputs, i, "output history")?;
        }
        // Virtual time axis: k = history, so that k - lag indexes the windows.
        let h = self.history();
        let input_at = |t: usize| -> &[f64] {
            if t == h {
                input
            } else {
                &ih[ih.len() - (h - t)]
            }
        };
        let output_at = |t: usize| -> &[f64] { &oh[oh.len() - (h - t)] };
        let mut row = vec![0.0; self.len()];
        self.fill_row(h, &input_at, &output_at, &mut row);
        Ok(row)
    }
}

fn check_width(row: &[f64], expected: usize, index: usize, what: &str) -> Result<()> {
    if row.len() != expected {
        return Err(Error::Shape(format!(
            "{what} row {index} has {} values, expected {expected}",
            row.len()
        )));
    }
    Ok(())
}

fn check_rows(rows: &[Vec<f64>], width: usize, what: &str) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        check_width(row, width, i, what)?;
        if let Some(c) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(i, format!("{what} value {} is not finite", c + 1)));
        }
    }
    Ok(())
}

/// Dense regressor matrix together with its column layout.
///
/// Row `r` corresponds to sample `first_sample + r` of the data it was built
/// from; dynamic (lagged) layouts drop the leading samples that lack history.
#[derive(Debug, Clone)]
pub struct RegressorMatrix {
    values: DMatrix<f64>,
    layout: ColumnLayout,
    first_sample: usize,
}

impl RegressorMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn layout(&self) -> &ColumnLayout {
        &self.layout
    }

    pub fn first_sample(&self) -> usize {
        self.first_sample
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    /// Target vector for output `channel`, aligned with the matrix rows.
    pub fn targets(&self, outputs: &[Vec<f64>], channel: usize) -> Result<DVector<f64>> {
        if outputs.len() != self.first_sample + self.nrows() {
            return Err(Error::Shape(format!(
                "{} output rows for a regressor built from {} samples",
                outputs.len(),
                self.first_sample + self.nrows()
            )));
        }
        if channel >= self.layout.outputs {
            return Err(Error::Shape(format!("output channel {channel} out of range")));
        }
        Ok(DVector::from_iterator(
            self.nrows(),
            outputs[self.first_sample..].iter().map(|row| row[channel]),
        ))
    }
}

/// Instantaneous regressor: one row per input sample, one column per
/// monomial of `enumerate_monomials(spec.inputs, spec.degree)`.
pub fn build_regressor(inputs: &[Vec<f64>], spec: &ModelSpec) -> Result<RegressorMatrix> {
    if spec.output_lags != 0 || spec.input_lags != 0 {
        return Err(Error::InvalidSpec(
            "build_regressor is instantaneous; use build_regressor_arx for lagged models".into(),
        ));
    }
    let layout = ColumnLayout::new(spec)?;
    check_rows(inputs, spec.inputs, "input")?;
    Ok(fill(layout, inputs, &[]))
}

/// Lagged (ARX) regressor. Rows cover samples `max(na, nb) .. N`; earlier
/// samples only serve as history. With `na = nb = 0` this equals
/// [`build_regressor`].
pub fn build_regressor_arx(
    inputs: &[Vec<f64>],
    outputs: &[Vec<f64>],
    spec: &ModelSpec,
) -> Result<RegressorMatrix> {
    let layout = ColumnLayout::new(spec)?;
    if inputs.len() != outputs.len() {
        return Err(Error::Shape(format!(
            "{} input samples but {} output samples",
            inputs.len(),
            outputs.len()
        )));
    }
    let history = layout.history();
    if inputs.len() <= history {
        return Err(Error::InsufficientData(format!(
            "{} samples cannot support lags of order {history}",
            inputs.len()
        )));
    }
    check_rows(inputs, spec.inputs, "input")?;
    if spec.output_lags > 0 {
        check_rows(outputs, spec.outputs, "output")?;
    }
    Ok(fill(layout, inputs, outputs))
}

fn fill(layout: ColumnLayout, inputs: &[Vec<f64>], outputs: &[Vec<f64>]) -> RegressorMatrix {
    let first = layout.history();
    let rows = inputs.len() - first;
    let mut values = DMatrix::<f64>::zeros(rows, layout.len());
    let input_at = |t: usize| -> &[f64] { &inputs[t] };
    let output_at = |t: usize| -> &[f64] { &outputs[t] };
    let mut row = vec![0.0; layout.len()];
    for r in 0..rows {
        layout.fill_row(first + r, &input_at, &output_at, &mut row);
        for (c, v) in row.iter().enumerate() {
            values[(r, c)] = *v;
        }
    }
    RegressorMatrix {
        values,
        layout,
        first_sample: first,
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Column::Constant => write!(f, "1"),
            Column::Input { lag, monomial } => {
                let names: Vec<String> =
                    (1..=monomial.exponents().len()).map(|i| format!("u{i}")).collect();
                let names: Vec<&str> = names.iter().map(String::as_str).collect();
                write!(f, "{}", monomial.name(&names))?;
                if *lag > 0 {
                    write!(f, "(k-{lag})")?;
                }
                Ok(())
            }
            Column::Output { lag, channel } => write!(f, "y{}(k-{lag})", channel + 1),
        }
    }
}
