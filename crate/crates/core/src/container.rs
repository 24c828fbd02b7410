//! Self-describing binary container for one codeword.
//!
//! Layout (all integers little-endian):
//!
//! | offset | size | field            |
//! |--------|------|------------------|
//! | 0      | 4    | magic `"SLDC"`   |
//! | 4      | 1    | format version   |
//! | 5      | 1    | scheme version   |
//! | 6      | 8    | `n`              |
//! | 14     | 4    | `r`              |
//! | 18     | 4    | `d`              |
//! | 22     | 8    | master seed      |
//! | 30     | 8    | `ℓ`              |
//! | 38     | ⌈ℓ/8⌉ | payload         |
//!
//! Codeword bit `i` (1-based) is bit `(i-1) % 8` of payload byte
//! `(i-1) / 8`, least significant first. Pad bits are zero.

use thiserror::Error;

use crate::codebook::{default_k_max, CodeParams, SCHEME_VERSION};
use crate::codec::Codeword;

pub const MAGIC: [u8; 4] = *b"SLDC";
pub const FORMAT_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 38;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContainerError {
    #[error("bad magic: expected \"SLDC\"")]
    BadMagic,
    #[error("unsupported version: format {format}, scheme {scheme}")]
    UnsupportedVersion { format: u8, scheme: u8 },
    #[error("truncated container: need {expected} bytes, have {actual}")]
    TruncatedPayload { expected: usize, actual: usize },
    #[error("nonzero padding bits in the last payload byte")]
    NonzeroPadding,
    #[error("{0} trailing bytes after the payload")]
    TrailingBytes(usize),
    #[error("header parameters are invalid: {0}")]
    InvalidHeader(String),
}

/// Header fields as stored in a container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub format_version: u8,
    pub scheme_version: u8,
    pub n: u64,
    pub r: u32,
    pub d: u32,
    pub master_seed: u64,
    pub len: u64,
}

impl Header {
    /// Decoding parameters for this container: the header fields with the
    /// default search cap, raised to `ℓ` when the codeword is longer.
    pub fn params(&self) -> Result<CodeParams, ContainerError> {
        let k_max = default_k_max(self.n, self.r, self.d).max(self.len);
        CodeParams::with_k_max(self.n, self.r, self.d, self.master_seed, k_max)
            .map_err(|e| ContainerError::InvalidHeader(e.to_string()))
    }
}

fn payload_len(len: u64) -> usize {
    len.div_ceil(8) as usize
}

pub fn serialize_codeword(params: &CodeParams, c: &Codeword) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload_len(c.len()));
    out.extend_from_slice(&MAGIC);
    out.push(FORMAT_VERSION);
    out.push(params.scheme_version);
    out.extend_from_slice(&params.n.to_le_bytes());
    out.extend_from_slice(&params.r.to_le_bytes());
    out.extend_from_slice(&params.d.to_le_bytes());
    out.extend_from_slice(&params.master_seed.to_le_bytes());
    out.extend_from_slice(&c.len().to_le_bytes());
    let start = out.len();
    out.resize(start + payload_len(c.len()), 0);
    for &pos in c.ones() {
        let i = (pos - 1) as usize;
        out[start + i / 8] |= 1 << (i % 8);
    }
    out
}

fn le_u64(b: &[u8]) -> u64 {
    u64::from_le_bytes(b.try_into().unwrap())
}

fn le_u32(b: &[u8]) -> u32 {
    u32::from_le_bytes(b.try_into().unwrap())
}

pub fn parse_codeword(bytes: &[u8]) -> Result<(Header, Codeword), ContainerError> {
    if bytes.len() < 4 {
        return Err(ContainerError::TruncatedPayload { expected: HEADER_LEN, actual: bytes.len() });
    }
    if bytes[..4] != MAGIC {
        return Err(ContainerError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(ContainerError::TruncatedPayload { expected: HEADER_LEN, actual: bytes.len() });
    }
    let header = Header {
        format_version: bytes[4],
        scheme_version: bytes[5],
        n: le_u64(&bytes[6..14]),
        r: le_u32(&bytes[14..18]),
        d: le_u32(&bytes[18..22]),
        master_seed: le_u64(&bytes[22..30]),
        len: le_u64(&bytes[30..38]),
    };
    if header.format_version != FORMAT_VERSION || header.scheme_version != SCHEME_VERSION {
        return Err(ContainerError::UnsupportedVersion { format: header.format_version, scheme: header.scheme_version });
    }
    let need = payload_len(header.len);
    let payload = &bytes[HEADER_LEN..];
    if payload.len() < need {
        return Err(ContainerError::TruncatedPayload { expected: HEADER_LEN + need, actual: bytes.len() });
    }
    if payload.len() > need {
        return Err(ContainerError::TrailingBytes(payload.len() - need));
    }
    let used_bits = (header.len % 8) as u32;
    if used_bits != 0 && payload[need - 1] >> used_bits != 0 {
        return Err(ContainerError::NonzeroPadding);
    }
    let mut ones = Vec::new();
    for (b, &byte) in payload.iter().enumerate() {
        let mut rest = byte;
        while rest != 0 {
            let bit = rest.trailing_zeros();
            ones.push(b as u64 * 8 + bit as u64 + 1);
            rest &= rest - 1;
        }
    }
    let c = Codeword::new(header.len, ones).map_err(|e| ContainerError::InvalidHeader(e.to_string()))?;
    Ok((header, c))
}
