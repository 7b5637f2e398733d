//! Binary checkpoint format: magic, version, config digest, named parameter
//! blobs with shapes.

use super::{ParamSet, Tensor};
use crate::error::{Error, Result};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 8] = b"WPNAVCK1";
const VERSION: u32 = 1;

pub fn save_checkpoint(path: &Path, params: &ParamSet, digest: &str) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    write_str(&mut out, digest);
    out.extend_from_slice(&(params.len() as u32).to_le_bytes());
    for (name, tensor) in params.iter() {
        write_str(&mut out, name);
        out.extend_from_slice(&(tensor.shape().len() as u32).to_le_bytes());
        for &d in tensor.shape() {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for &x in tensor.data() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path)?;
    file.write_all(&out)?;
    Ok(())
}

/// Load a checkpoint; refuses a digest mismatch unless overridden.
pub fn load_checkpoint(
    path: &Path,
    expected_digest: Option<&str>,
    allow_mismatch: bool,
) -> Result<(ParamSet, String)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let mut cur = Cursor { bytes: &bytes, pos: 0 };

    let magic = cur.take(8)?;
    if magic != MAGIC {
        return Err(Error::Parse { line: 0, msg: "not a checkpoint file (bad magic)".into() });
    }
    let version = cur.u32()?;
    if version != VERSION {
        return Err(Error::Parse { line: 0, msg: format!("unsupported version {version}") });
    }
    let digest = cur.string()?;
    if let Some(expected) = expected_digest {
        if digest != expected && !allow_mismatch {
            return Err(Error::DigestMismatch { expected: expected.into(), found: digest });
        }
    }
    let count = cur.u32()? as usize;
    let mut params = ParamSet::default();
    for _ in 0..count {
        let name = cur.string()?;
        let ndim = cur.u32()? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(cur.u32()? as usize);
        }
        let n: usize = shape.iter().product();
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            data.push(f64::from_le_bytes(cur.take(8)?.try_into().expect("8 bytes")));
        }
        params.insert(&name, Tensor::new(shape, data).map_err(|e| Error::Parse {
            line: 0,
            msg: e.to_string(),
        })?);
    }
    Ok((params, digest))
}

fn write_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::Parse { line: 0, msg: "truncated checkpoint".into() });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::Parse { line: 0, msg: "bad utf8 in checkpoint".into() })
    }
}
