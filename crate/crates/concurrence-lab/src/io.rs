//! State file format and full-precision JSON emission.
//!
//! A state file is a JSON document
//!
//! ```json
//! {"kind": "pure", "dims": [2, 2], "data": [[0.7071, 0.0], ...]}
//! ```
//!
//! with `kind` either `"pure"` or `"density"` and `data` a row-major list of
//! `[re, im]` pairs: `d_a·d_b` amplitudes for pure states, `(d_a·d_b)²`
//! matrix entries (row-major over the composite index `i·d_b + j`) for
//! density matrices. Writers emit every float with 17 significant digits, so
//! parse → re-emit is byte-identical and lossless.

use std::io::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::states::{DensityMatrix, Dims, PureState};
use crate::{Error, Result};

/// A state loaded from a file.
#[derive(Debug, Clone)]
pub enum ParsedState {
    Pure(PureState),
    Density(DensityMatrix),
}

impl ParsedState {
    pub fn dims(&self) -> Dims {
        match self {
            ParsedState::Pure(p) => p.dims(),
            ParsedState::Density(rho) => rho.dims(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ParsedState::Pure(_) => "pure",
            ParsedState::Density(_) => "density",
        }
    }

    /// The state as a density matrix, projecting pure states.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            ParsedState::Pure(p) => DensityMatrix::from_pure(&p.normalize()?),
            ParsedState::Density(rho) => Ok(rho.clone()),
        }
    }
}

/// JSON serializer that writes every f64 with 17 significant digits.
struct FullPrecisionFormatter;

impl serde_json::ser::Formatter for FullPrecisionFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize a JSON value with full-precision floats (compact layout).
pub fn to_json_string_full(value: &Value) -> String {
    let mut out = Vec::new();
    let mut serializer = serde_json::Serializer::with_formatter(&mut out, FullPrecisionFormatter);
    value
        .serialize(&mut serializer)
        .expect("serializing serde_json::Value cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

fn complex_pairs(entries: impl Iterator<Item = C64>) -> Value {
    Value::Array(
        entries
            .map(|z| Value::Array(vec![json!(z.re), json!(z.im)]))
            .collect(),
    )
}

/// Row-major `[re, im]` flattening of a matrix.
fn matrix_pairs(m: &DMatrix<C64>) -> Value {
    complex_pairs((0..m.nrows()).flat_map(|r| (0..m.ncols()).map(move |c| (r, c))).map(|(r, c)| m[(r, c)]))
}

/// The state-file JSON document for a state.
pub fn state_to_json(state: &ParsedState) -> Value {
    match state {
        ParsedState::Pure(p) => json!({
            "kind": "pure",
            "dims": [p.dims().d_a(), p.dims().d_b()],
            "data": matrix_pairs(p.coeffs()),
        }),
        ParsedState::Density(rho) => json!({
            "kind": "density",
            "dims": [rho.dims().d_a(), rho.dims().d_b()],
            "data": matrix_pairs(rho.matrix()),
        }),
    }
}

fn schema_error(path: &Path, detail: impl Into<String>) -> Error {
    Error::SchemaError {
        path: path.display().to_string(),
        detail: detail.into(),
    }
}

fn parse_complex_list(value: &Value, expected: usize, path: &Path) -> Result<Vec<C64>> {
    let array = value
        .as_array()
        .ok_or_else(|| schema_error(path, "field `data` must be an array"))?;
    if array.len() != expected {
        return Err(schema_error(
            path,
            format!(
                "field `data` has {} entries, expected {expected}",
                array.len()
            ),
        ));
    }
    array
        .iter()
        .enumerate()
        .map(|(index, entry)| {
            let pair = entry.as_array().filter(|p| p.len() == 2).ok_or_else(|| {
                schema_error(path, format!("data[{index}] must be a [re, im] pair"))
            })?;
            let re = pair[0]
                .as_f64()
                .ok_or_else(|| schema_error(path, format!("data[{index}][0] must be a number")))?;
            let im = pair[1]
                .as_f64()
                .ok_or_else(|| schema_error(path, format!("data[{index}][1] must be a number")))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(schema_error(path, format!("data[{index}] is not finite")));
            }
            Ok(C64::new(re, im))
        })
        .collect()
}

/// Parse a state document. Structural problems surface as [`Error::SchemaError`]
/// with field diagnostics; content problems (Hermiticity, trace, positivity)
/// surface as their own validation errors, deviations named.
pub fn parse_state_value(value: &Value, path: &Path) -> Result<ParsedState> {
    let object = value
        .as_object()
        .ok_or_else(|| schema_error(path, "document must be a JSON object"))?;
    let kind = object
        .get("kind")
        .ok_or_else(|| schema_error(path, "missing field `kind`"))?
        .as_str()
        .ok_or_else(|| schema_error(path, "field `kind` must be a string"))?;
    let dims_value = object
        .get("dims")
        .ok_or_else(|| schema_error(path, "missing field `dims`"))?
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| schema_error(path, "field `dims` must be a two-element array"))?;
    let d_a = dims_value[0]
        .as_u64()
        .ok_or_else(|| schema_error(path, "dims[0] must be a positive integer"))?
        as usize;
    let d_b = dims_value[1]
        .as_u64()
        .ok_or_else(|| schema_error(path, "dims[1] must be a positive integer"))?
        as usize;
    let dims = Dims::new(d_a, d_b)
        .map_err(|e| schema_error(path, format!("field `dims`: {e}")))?;
    let data = object
        .get("data")
        .ok_or_else(|| schema_error(path, "missing field `data`"))?;

    match kind {
        "pure" => {
            let entries = parse_complex_list(data, dims.total(), path)?;
            let coeffs =
                DMatrix::from_fn(d_a, d_b, |i, j| entries[i * d_b + j]);
            Ok(ParsedState::Pure(PureState::new(dims, coeffs)?))
        }
        "density" => {
            let n = dims.total();
            let entries = parse_complex_list(data, n * n, path)?;
            let matrix = DMatrix::from_fn(n, n, |r, c| entries[r * n + c]);
            Ok(ParsedState::Density(DensityMatrix::new(dims, matrix)?))
        }
        other => Err(schema_error(
            path,
            format!("field `kind` must be \"pure\" or \"density\", got \"{other}\""),
        )),
    }
}

/// Read and parse a state file.
pub fn parse_state_file(path: &Path) -> Result<ParsedState> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| schema_error(path, format!("cannot read file: {e}")))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| {
        schema_error(
            path,
            format!("invalid JSON at line {}, column {}: {e}", e.line(), e.column()),
        )
    })?;
    parse_state_value(&value, path)
}

/// Write a state file with full-precision floats and a trailing newline.
pub fn write_state_file(path: &Path, state: &ParsedState) -> Result<()> {
    let text = to_json_string_full(&state_to_json(state));
    let mut file = std::fs::File::create(path)
        .map_err(|e| schema_error(path, format!("cannot create file: {e}")))?;
    writeln!(file, "{text}").map_err(|e| schema_error(path, format!("cannot write file: {e}")))?;
    Ok(())
}
