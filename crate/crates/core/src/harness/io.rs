//! Body persistence in the `convexop.body.v1` JSON schema.
//!
//! Numbers are written as the shortest decimal that round-trips the f64, and
//! vertices are in canonical order, so save(load(file)) is byte-identical.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::Body;

pub const BODY_SCHEMA: &str = "convexop.body.v1";

#[derive(Serialize, Deserialize)]
struct BodyDoc {
    schema: String,
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

pub fn body_to_value(body: &Body) -> Value {
    serde_json::to_value(BodyDoc {
        schema: BODY_SCHEMA.into(),
        dim: body.ambient_dim(),
        vertices: body.vertex_rows(),
    })
    .expect("body document serializes")
}

pub fn body_from_value(value: &Value) -> Result<Body> {
    let doc: BodyDoc = serde_json::from_value(value.clone())?;
    if doc.schema != BODY_SCHEMA {
        return Err(Error::BadSpec(format!("expected schema {BODY_SCHEMA}, found {}", doc.schema)));
    }
    if doc.vertices.iter().any(|v| v.len() != doc.dim) {
        return Err(Error::BadSpec(format!("every vertex must have {} coordinates", doc.dim)));
    }
    Body::from_rows(&doc.vertices)
}

pub fn body_to_json(body: &Body) -> String {
    let mut s = serde_json::to_string(&body_to_value(body)).expect("body serializes");
    s.push('\n');
    s
}

pub fn body_from_json(text: &str) -> Result<Body> {
    body_from_value(&serde_json::from_str(text)?)
}

pub fn save_body(body: &Body, path: &Path) -> Result<()> {
    fs::write(path, body_to_json(body))?;
    Ok(())
}

pub fn load_body(path: &Path) -> Result<Body> {
    body_from_json(&fs::read_to_string(path)?)
}
