//! Model checkpoints.
//!
//! Layout: magic `SEGN`, one version byte, a little-endian `u32` byte length
//! followed by that many bytes of JSON header (model config and input shape),
//! then every parameter tensor as little-endian `f64` in declaration order
//! (see [`ModelParams::tensors`]).

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::net::{ModelConfig, ModelParams};
use crate::Scalar;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"SEGN";
const VERSION: u8 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    model: ModelConfig,
    input_channels: usize,
    input_length: usize,
}

pub fn encode_checkpoint<T: Scalar>(params: &ModelParams<T>) -> Vec<u8> {
    let header = Header {
        model: params.config.clone(),
        input_channels: params.input_channels,
        input_length: params.input_length,
    };
    let json = serde_json::to_vec(&header).expect("header serialises");
    let mut out = Vec::with_capacity(9 + json.len() + params.num_params() * 8);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for tensor in params.tensors() {
        for v in tensor {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
    }
    out
}

pub fn decode_checkpoint<T: Scalar>(bytes: &[u8]) -> std::result::Result<ModelParams<T>, String> {
    if bytes.len() < 9 || &bytes[..4] != CHECKPOINT_MAGIC {
        return Err("missing SEGN header".into());
    }
    if bytes[4] != VERSION {
        return Err(format!("unsupported checkpoint version {}", bytes[4]));
    }
    let len = u32::from_le_bytes(bytes[5..9].try_into().unwrap()) as usize;
    let json = bytes.get(9..9 + len).ok_or("truncated header")?;
    let header: Header = serde_json::from_slice(json).map_err(|e| e.to_string())?;
    let mut params = ModelParams::zeros(&header.model, header.input_channels, header.input_length)
        .map_err(|e| e.to_string())?;
    let body = &bytes[9 + len..];
    if body.len() != params.num_params() * 8 {
        return Err(format!("expected {} parameters, found {} bytes", params.num_params(), body.len()));
    }
    let mut values = body.chunks_exact(8).map(|c| T::of(f64::from_le_bytes(c.try_into().unwrap())));
    for tensor in params.tensors_mut() {
        for slot in tensor {
            *slot = values.next().expect("length checked");
        }
    }
    Ok(params)
}

pub fn write_checkpoint<T: Scalar>(path: &Path, params: &ModelParams<T>) -> Result<()> {
    fs::write(path, encode_checkpoint(params)).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint<T: Scalar>(path: &Path) -> Result<ModelParams<T>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes).map_err(|msg| Error::Format { path: path.to_owned(), msg })
}
