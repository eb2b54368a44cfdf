//! Flat binary container for encoder parameters.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic   8 bytes  b"BBWEIGHT"
//! version u32      currently 1
//! layers  u32
//! per layer:
//!   heads u32, d u32, m u32, q u32
//!   heads * (w_q d*m, w_k d*m, w_v d*d) f64 payloads, row-major
//!   w1 d*q, b1 q, w2 q*d, b2 d           f64 payloads, row-major
//! ```

use crate::attn::HeadParams;
use crate::encoder::LayerParams;
use crate::error::{Error, Result};
use crate::mat::Mat;

pub const MAGIC: &[u8; 8] = b"BBWEIGHT";
pub const VERSION: u32 = 1;

pub fn write_layers(layers: &[LayerParams]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for p in layers {
        let (d, q) = p.dims();
        let m = p.heads.first().map_or(0, |h| h.w_q.cols());
        out.extend_from_slice(&(p.heads.len() as u32).to_le_bytes());
        out.extend_from_slice(&(d as u32).to_le_bytes());
        out.extend_from_slice(&(m as u32).to_le_bytes());
        out.extend_from_slice(&(q as u32).to_le_bytes());
        for h in &p.heads {
            push_floats(&mut out, h.w_q.data());
            push_floats(&mut out, h.w_k.data());
            push_floats(&mut out, h.w_v.data());
        }
        push_floats(&mut out, p.w1.data());
        push_floats(&mut out, &p.b1);
        push_floats(&mut out, p.w2.data());
        push_floats(&mut out, &p.b2);
    }
    out
}

pub fn read_layers(bytes: &[u8]) -> Result<Vec<LayerParams>> {
    let mut r = Reader { bytes, pos: 0 };
    let magic = r.take(8)?;
    if magic != MAGIC {
        return Err(Error::Parse(format!("bad magic {magic:?}")));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported version {version}")));
    }
    let n_layers = r.u32()? as usize;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let heads = r.u32()? as usize;
        let d = r.u32()? as usize;
        let m = r.u32()? as usize;
        let q = r.u32()? as usize;
        let mut head_params = Vec::with_capacity(heads);
        for _ in 0..heads {
            let w_q = Mat::from_vec(d, m, r.floats(d * m)?)?;
            let w_k = Mat::from_vec(d, m, r.floats(d * m)?)?;
            let w_v = Mat::from_vec(d, d, r.floats(d * d)?)?;
            head_params.push(HeadParams::new(w_q, w_k, w_v)?);
        }
        let w1 = Mat::from_vec(d, q, r.floats(d * q)?)?;
        let b1 = r.floats(q)?;
        let w2 = Mat::from_vec(q, d, r.floats(q * d)?)?;
        let b2 = r.floats(d)?;
        layers.push(LayerParams::new(head_params, w1, b1, w2, b2)?);
    }
    if r.pos != bytes.len() {
        return Err(Error::Parse(format!(
            "{} trailing bytes after last layer",
            bytes.len() - r.pos
        )));
    }
    Ok(layers)
}

fn push_floats(out: &mut Vec<u8>, vals: &[f64]) {
    for v in vals {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, len: usize) -> Result<&[u8]> {
        if self.pos + len > self.bytes.len() {
            return Err(Error::Parse("unexpected end of container".into()));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn floats(&mut self, count: usize) -> Result<Vec<f64>> {
        let b = self.take(count * 8)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}
