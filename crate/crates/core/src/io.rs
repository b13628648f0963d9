//! JSON envelopes and matrix input handling.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::clan::AffineClan;
use crate::correspondence::ClanMatrix;
use crate::dvr_linalg::{LinalgError, MatrixF};
use crate::reduction::Witness;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("matrix entry at row {row}, column {col} must be a string or an integer")]
    EntryType { row: usize, col: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `{"p": .., "q": .., "matrix": [[..]]}`; `p` and `q` are optional on input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixEnvelope {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    pub matrix: Vec<Vec<Value>>,
}

/// A parsed matrix together with any block sizes the input declared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixInput {
    pub p: Option<usize>,
    pub q: Option<usize>,
    pub matrix: MatrixF,
}

/// Reads a matrix in the text format or as a JSON envelope (input starting
/// with `{`).
pub fn parse_matrix_input(text: &str) -> Result<MatrixInput, IoError> {
    let trimmed = text.trim();
    if !trimmed.starts_with('{') {
        return Ok(MatrixInput { p: None, q: None, matrix: MatrixF::parse(trimmed)? });
    }
    let env: MatrixEnvelope = serde_json::from_str(trimmed).map_err(|e| IoError::Json(e.to_string()))?;
    let mut rows = Vec::with_capacity(env.matrix.len());
    for (r, row) in env.matrix.iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (c, v) in row.iter().enumerate() {
            out.push(match v {
                Value::String(s) => s.clone(),
                Value::Number(n) if n.is_i64() => n.to_string(),
                _ => return Err(IoError::EntryType { row: r + 1, col: c + 1 }),
            });
        }
        rows.push(out);
    }
    Ok(MatrixInput { p: env.p, q: env.q, matrix: MatrixF::from_string_rows(&rows)? })
}

pub fn matrix_json(p: usize, q: usize, g: &MatrixF) -> Value {
    json!({ "p": p, "q": q, "matrix": g.to_string_rows() })
}

pub fn clan_json(c: &AffineClan) -> Value {
    json!({ "clan": c.to_string() })
}

pub fn clan_matrix_json(cm: &ClanMatrix) -> Value {
    matrix_json(cm.p(), cm.q(), cm.matrix())
}

pub fn witness_json(w: &Witness) -> Value {
    json!({ "k": w.k.to_string_rows(), "b": w.b.to_string_rows() })
}
