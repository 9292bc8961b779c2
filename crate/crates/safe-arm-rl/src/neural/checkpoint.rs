//! Checkpoint files: a JSON array of named parameter tensors with shape
//! headers.
//!
//! Values are written with serde_json's shortest-round-trip float formatting,
//! so every finite f64 reloads bit-exactly.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    schema: u32,
    tensors: Vec<NamedTensor>,
}

pub fn save_tensors(path: &Path, tensors: &[NamedTensor]) -> Result<()> {
    for t in tensors {
        let expect: usize = t.shape.iter().product();
        if expect != t.data.len() {
            return Err(Error::contract(format!(
                "tensor {} has {} values but shape {:?}",
                t.name,
                t.data.len(),
                t.shape
            )));
        }
    }
    let file = CheckpointFile {
        schema: 1,
        tensors: tensors.to_vec(),
    };
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

pub fn load_tensors(path: &Path) -> Result<Vec<NamedTensor>> {
    let text = std::fs::read_to_string(path)?;
    let file: CheckpointFile = serde_json::from_str(&text)?;
    if file.schema != 1 {
        return Err(Error::config(format!("unsupported checkpoint schema {}", file.schema)));
    }
    Ok(file.tensors)
}
