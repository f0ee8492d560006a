//! JSONL datasets and `EMB1` embedding sidecars.
//!
//! A record carries its embeddings inline (`context_embedding`,
//! `node_embeddings`) or as row indices (`context_ref`, `node_ref`) into
//! the sidecars `<stem>.context.emb` and `<stem>.node.emb` next to the
//! JSONL file.

use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::graph::parse_conllu;
use crate::model::{ExampleRecord, LabelVector, LABEL_NAMES};

const EMB_MAGIC: &[u8; 4] = b"EMB1";

/// Decodes an `EMB1` table.
pub fn read_embeddings(bytes: &[u8]) -> Result<Array2<f64>> {
    if bytes.len() < 12 || &bytes[..4] != EMB_MAGIC {
        return Err(Error::Load("embedding file lacks the EMB1 header".into()));
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let expected = rows
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(12))
        .ok_or_else(|| Error::Load("embedding header overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::Load(format!(
            "embedding file is {} bytes, header ({rows} x {dim}) needs {expected}",
            bytes.len()
        )));
    }
    let data: Vec<f64> = bytes[12..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")) as f64)
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Load("embedding file contains non-finite values".into()));
    }
    Ok(Array2::from_shape_vec((rows, dim), data).expect("length checked"))
}

/// Encodes a table as `EMB1` (values rounded to 32-bit floats).
pub fn write_embeddings(table: &Array2<f64>) -> Vec<u8> {
    let (rows, dim) = table.dim();
    let mut out = Vec::with_capacity(12 + rows * dim * 4);
    out.extend_from_slice(EMB_MAGIC);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    for v in table.iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

/// `data/train.jsonl` + `context` -> `data/train.context.emb`.
pub fn sidecar_path(dataset: &Path, kind: &str) -> PathBuf {
    dataset.with_extension(format!("{kind}.emb"))
}

/// Embedding tables referenced by `*_ref` fields.
#[derive(Clone, Debug, Default)]
pub struct Sidecars {
    pub context: Option<Array2<f64>>,
    pub node: Option<Array2<f64>>,
}

/// Reads a JSONL dataset, loading sidecars only when some record refers to them.
pub fn load_dataset(path: &Path) -> Result<Vec<ExampleRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut sidecars = Sidecars::default();
    if text.contains("\"context_ref\"") {
        sidecars.context = Some(read_sidecar(&sidecar_path(path, "context"))?);
    }
    if text.contains("\"node_ref\"") {
        sidecars.node = Some(read_sidecar(&sidecar_path(path, "node"))?);
    }
    parse_dataset(&text, &sidecars)
}

fn read_sidecar(path: &Path) -> Result<Array2<f64>> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::Load(format!("embedding sidecar {}: {e}", path.display())))?;
    read_embeddings(&bytes)
}

/// Parses and validates JSONL text. Blank lines are ignored.
pub fn parse_dataset(text: &str, sidecars: &Sidecars) -> Result<Vec<ExampleRecord>> {
    let mut records: Vec<ExampleRecord> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(line, lineno + 1, sidecars)?;
        if let Some(first) = records.first() {
            if record.context_embedding.len() != first.context_embedding.len()
                || record.node_embeddings.ncols() != first.node_embeddings.ncols()
            {
                return Err(Error::dim(format!(
                    "record {}: embedding widths ({}, {}) differ from record {} ({}, {})",
                    record.id,
                    record.context_embedding.len(),
                    record.node_embeddings.ncols(),
                    first.id,
                    first.context_embedding.len(),
                    first.node_embeddings.ncols()
                )));
            }
        }
        records.push(record);
    }
    Ok(records)
}

struct Fields<'a> {
    id: String,
    obj: &'a Map<String, Value>,
}

impl Fields<'_> {
    fn err(&self, field: &str, message: impl Into<String>) -> Error {
        Error::Schema {
            record: self.id.clone(),
            field: field.into(),
            message: message.into(),
        }
    }

    fn get(&self, field: &str) -> Result<&Value> {
        self.obj.get(field).ok_or_else(|| self.err(field, "missing"))
    }

    fn str(&self, field: &str) -> Result<&str> {
        self.get(field)?
            .as_str()
            .ok_or_else(|| self.err(field, "expected a string"))
    }

    fn floats(&self, field: &str, v: &Value) -> Result<Vec<f64>> {
        let arr = v.as_array().ok_or_else(|| self.err(field, "expected an array of numbers"))?;
        arr.iter()
            .map(|x| x.as_f64().ok_or_else(|| self.err(field, "expected an array of numbers")))
            .collect()
    }

    fn index(&self, field: &str, v: &Value, table: &Array2<f64>) -> Result<usize> {
        let i = v
            .as_u64()
            .ok_or_else(|| self.err(field, "expected a non-negative integer row index"))? as usize;
        if i >= table.nrows() {
            return Err(self.err(
                field,
                format!("row {i} out of range for a sidecar with {} rows", table.nrows()),
            ));
        }
        Ok(i)
    }

    fn sidecar<'s>(&self, field: &str, table: &'s Option<Array2<f64>>) -> Result<&'s Array2<f64>> {
        table
            .as_ref()
            .ok_or_else(|| self.err(field, "refers to an embedding sidecar that was not provided"))
    }
}

fn parse_record(line: &str, line_no: usize, sidecars: &Sidecars) -> Result<ExampleRecord> {
    let value: Value = serde_json::from_str(line).map_err(|e| Error::Schema {
        record: format!("line {line_no}"),
        field: "(json)".into(),
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| Error::Schema {
        record: format!("line {line_no}"),
        field: "(json)".into(),
        message: "expected an object".into(),
    })?;
    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        _ => {
            return Err(Error::Schema {
                record: format!("line {line_no}"),
                field: "id".into(),
                message: "missing or not a string".into(),
            })
        }
    };
    let f = Fields { id, obj };

    let tokens: Vec<String> = f
        .get("tokens")?
        .as_array()
        .and_then(|a| a.iter().map(|t| t.as_str().map(String::from)).collect())
        .ok_or_else(|| f.err("tokens", "expected an array of strings"))?;

    let mut sentences = parse_conllu(f.str("conllu")?).map_err(|e| f.err("conllu", e.to_string()))?;
    if sentences.len() != 1 {
        return Err(f.err("conllu", format!("expected one sentence, found {}", sentences.len())));
    }
    let mut parse = sentences.pop().expect("one sentence");
    parse.id = f.id.clone();
    if tokens.len() != parse.len() {
        return Err(f.err(
            "tokens",
            format!("{} tokens but the parse has {} words", tokens.len(), parse.len()),
        ));
    }

    let context = match (obj.get("context_embedding"), obj.get("context_ref")) {
        (Some(v), None) => Array1::from(f.floats("context_embedding", v)?),
        (None, Some(v)) => {
            let table = f.sidecar("context_ref", &sidecars.context)?;
            table.row(f.index("context_ref", v, table)?).to_owned()
        }
        (Some(_), Some(_)) => {
            return Err(f.err("context_embedding", "both context_embedding and context_ref given"))
        }
        (None, None) => return Err(f.err("context_embedding", "missing")),
    };
    if context.is_empty() {
        return Err(f.err("context_embedding", "empty"));
    }

    let nodes = match (obj.get("node_embeddings"), obj.get("node_ref")) {
        (Some(v), None) => {
            let rows = v
                .as_array()
                .ok_or_else(|| f.err("node_embeddings", "expected an array of rows"))?;
            let rows: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| f.floats("node_embeddings", r))
                .collect::<Result<_>>()?;
            let dim = rows.first().map_or(0, Vec::len);
            if rows.iter().any(|r| r.len() != dim) {
                return Err(f.err("node_embeddings", "rows have different widths"));
            }
            Array2::from_shape_vec((rows.len(), dim), rows.concat()).expect("rectangular")
        }
        (None, Some(v)) => {
            let table = f.sidecar("node_ref", &sidecars.node)?;
            let idx = v
                .as_array()
                .ok_or_else(|| f.err("node_ref", "expected an array of row indices"))?
                .iter()
                .map(|i| f.index("node_ref", i, table))
                .collect::<Result<Vec<_>>>()?;
            table.select(ndarray::Axis(0), &idx)
        }
        (Some(_), Some(_)) => {
            return Err(f.err("node_embeddings", "both node_embeddings and node_ref given"))
        }
        (None, None) => return Err(f.err("node_embeddings", "missing")),
    };
    if nodes.nrows() != parse.len() {
        return Err(f.err(
            "node_embeddings",
            format!("{} rows for {} words", nodes.nrows(), parse.len()),
        ));
    }
    if nodes.ncols() == 0 {
        return Err(f.err("node_embeddings", "zero-width rows"));
    }

    let gold = match obj.get("labels") {
        None | Some(Value::Null) => None,
        Some(Value::Object(labels)) => {
            let mut bits = [false; LABEL_NAMES.len()];
            for (k, name) in LABEL_NAMES.iter().enumerate() {
                bits[k] = labels
                    .get(*name)
                    .and_then(Value::as_bool)
                    .ok_or_else(|| f.err(&format!("labels.{name}"), "missing or not a boolean"))?;
            }
            Some(LabelVector::from_array(bits))
        }
        Some(_) => return Err(f.err("labels", "expected an object")),
    };

    ExampleRecord::new(f.id.clone(), tokens, parse, context, nodes, gold)
}

/// One JSONL line with inline embeddings.
pub fn record_to_json(record: &ExampleRecord) -> Value {
    let mut obj = json!({
        "id": record.id,
        "tokens": record.tokens,
        "conllu": record.parse.to_conllu(),
        "context_embedding": record.context_embedding.to_vec(),
        "node_embeddings": record
            .node_embeddings
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect::<Vec<_>>(),
    });
    if let Some(gold) = record.gold {
        obj["labels"] = serde_json::to_value(gold).expect("plain struct");
    }
    obj
}

pub fn write_dataset(records: &[ExampleRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&record_to_json(r).to_string());
        out.push('\n');
    }
    out
}
