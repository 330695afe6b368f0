//! Binary checkpoints of the velocity.
//!
//! ```text
//! offset  size  content
//! 0       4     magic "G2CK"
//! 4       4     version (u32) = 1
//! 8       4     dim (u32)
//! 12      4     n (u32)
//! 16      8     alpha (f64)
//! 24      8     nu (f64)
//! 32      8     time (f64)
//! 40      ...   dim·n^dim coefficients û_k as (re, im) f64 pairs,
//!               component-major, row-major within a component
//! ```
//!
//! All integers and floats are little-endian.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{make_grid, SpectralGrid, VectorField};

pub const MAGIC: &[u8; 4] = b"G2CK";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CheckpointHeader {
    pub version: u32,
    pub dim: u32,
    pub n: u32,
    pub alpha: f64,
    pub nu: f64,
    pub time: f64,
}

impl CheckpointHeader {
    /// Total file length implied by the header.
    pub fn expected_len(&self) -> usize {
        let modes = (self.n as usize).pow(self.dim);
        HEADER_LEN + self.dim as usize * modes * 16
    }
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub u: VectorField,
}

pub fn encode(u: &VectorField, alpha: f64, nu: f64, time: f64) -> Vec<u8> {
    let g = u.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + u.ncomp() * g.len() * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    for v in [alpha, nu, time] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for c in u.components() {
        for z in c {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn f64_at(b: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

/// Parses and validates the header; the payload length is not checked.
pub fn decode_header(bytes: &[u8]) -> Result<CheckpointHeader> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        if bytes.len() < 4 && MAGIC.starts_with(bytes) {
            return Err(Error::Truncated(bytes.len() as u64));
        }
        return Err(Error::Checkpoint("bad magic, not a G2CK checkpoint".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated(bytes.len() as u64));
    }
    let h = CheckpointHeader {
        version: u32_at(bytes, 4),
        dim: u32_at(bytes, 8),
        n: u32_at(bytes, 12),
        alpha: f64_at(bytes, 16),
        nu: f64_at(bytes, 24),
        time: f64_at(bytes, 32),
    };
    if h.version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {}", h.version)));
    }
    if !(h.dim == 2 || h.dim == 3) || h.n < 8 || !h.n.is_multiple_of(2) || h.n > 4096 {
        return Err(Error::Checkpoint(format!("invalid grid {}D n = {}", h.dim, h.n)));
    }
    Ok(h)
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    let header = decode_header(bytes)?;
    let want = header.expected_len();
    if bytes.len() < want {
        return Err(Error::Truncated(bytes.len() as u64));
    }
    if bytes.len() > want {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes after the coefficients",
            bytes.len() - want
        )));
    }
    let grid: Arc<SpectralGrid> = make_grid(header.dim as usize, header.n as usize)?;
    let len = grid.len();
    let mut at = HEADER_LEN;
    let mut comps = Vec::with_capacity(header.dim as usize);
    for _ in 0..header.dim {
        let mut c = Vec::with_capacity(len);
        for _ in 0..len {
            c.push(Complex64::new(f64_at(bytes, at), f64_at(bytes, at + 8)));
            at += 16;
        }
        comps.push(c);
    }
    let u = VectorField::from_components(&grid, comps)?;
    Ok(Checkpoint { header, u })
}

pub fn save(path: &Path, u: &VectorField, alpha: f64, nu: f64, time: f64) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(u, alpha, nu, time))?;
    f.sync_all()?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode(&bytes)
}

/// Header of a checkpoint file after checking that the payload is complete.
pub fn inspect(path: &Path) -> Result<CheckpointHeader> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let h = decode_header(&bytes)?;
    if bytes.len() < h.expected_len() {
        return Err(Error::Truncated(bytes.len() as u64));
    }
    Ok(h)
}
