//! Checkpoint file: header (architecture id, config hash, epoch) followed by
//! the parameter tensors as little-endian float32 in declaration order.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

const MAGIC: &[u8; 4] = b"SCPT";

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointHeader {
    pub arch_id: String,
    pub config_hash: String,
    pub epoch: u32,
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    header: &CheckpointHeader,
    params: &[Tensor],
) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    write_str(&mut out, &header.arch_id);
    write_str(&mut out, &header.config_hash);
    out.extend_from_slice(&header.epoch.to_le_bytes());
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for t in params {
        out.extend_from_slice(&(t.shape.len() as u32).to_le_bytes());
        for &d in &t.shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
    }
    for t in params {
        for &v in &t.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(CheckpointHeader, Vec<Tensor>)> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        if *pos + n > bytes.len() {
            return Err(Error::Checkpoint(format!("{path:?}: truncated")));
        }
        let s = &bytes[*pos..*pos + n];
        *pos += n;
        Ok(s)
    };
    if take(&mut pos, 4)? != MAGIC {
        return Err(Error::Checkpoint(format!("{path:?}: bad magic")));
    }
    let arch_id = read_str(&bytes, &mut pos, path)?;
    let config_hash = read_str(&bytes, &mut pos, path)?;
    let epoch = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
    let n_tensors = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let mut shapes = Vec::with_capacity(n_tensors);
    for _ in 0..n_tensors {
        let ndims = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
        let mut shape = Vec::with_capacity(ndims);
        for _ in 0..ndims {
            shape.push(u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize);
        }
        shapes.push(shape);
    }
    let mut params = Vec::with_capacity(n_tensors);
    for shape in shapes {
        let n: usize = shape.iter().product();
        let raw = take(&mut pos, 4 * n)?;
        let data = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        params.push(Tensor { shape, data });
    }
    Ok((
        CheckpointHeader {
            arch_id,
            config_hash,
            epoch,
        },
        params,
    ))
}

fn write_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn read_str(bytes: &[u8], pos: &mut usize, path: &Path) -> Result<String> {
    if *pos + 4 > bytes.len() {
        return Err(Error::Checkpoint(format!("{path:?}: truncated")));
    }
    let n = u32::from_le_bytes(bytes[*pos..*pos + 4].try_into().unwrap()) as usize;
    *pos += 4;
    if *pos + n > bytes.len() {
        return Err(Error::Checkpoint(format!("{path:?}: truncated")));
    }
    let s = String::from_utf8(bytes[*pos..*pos + n].to_vec())
        .map_err(|_| Error::Checkpoint(format!("{path:?}: bad string")))?;
    *pos += n;
    Ok(s)
}
