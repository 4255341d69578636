//! JSON file formats for tensors and triple lists.
//!
//! Tensor: `{"name": optional string, "dims": [n1, n2, n3], "values": [...]}`
//! with `values` row-major, `k` fastest. Triples:
//! `{"triples": [{"tau": τ, "x": [...], "y": [...], "z": [...]}]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{Dims, Tensor3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub dims: [usize; 3],
    pub values: Vec<f64>,
}

impl TensorFile {
    pub fn into_tensor(self) -> Result<Tensor3> {
        let [n1, n2, n3] = self.dims;
        let t = Tensor3::new(Dims::new(n1, n2, n3), self.values)?;
        Ok(match self.name {
            Some(name) => t.with_name(name),
            None => t,
        })
    }
}

impl From<&Tensor3> for TensorFile {
    fn from(t: &Tensor3) -> Self {
        Self {
            name: t.name().map(str::to_owned),
            dims: t.dims().as_array(),
            values: t.values().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleEntry {
    pub tau: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriplesFile {
    pub triples: Vec<TripleEntry>,
}

pub fn parse_tensor(text: &str) -> Result<Tensor3> {
    let file: TensorFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_tensor()
}

pub fn parse_triples(text: &str) -> Result<TriplesFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    parse_tensor(&std::fs::read_to_string(path)?)
}

pub fn read_triples(path: impl AsRef<Path>) -> Result<TriplesFile> {
    parse_triples(&std::fs::read_to_string(path)?)
}

pub fn tensor_to_json(t: &Tensor3) -> String {
    serde_json::to_string(&TensorFile::from(t)).expect("tensor serialises")
}
