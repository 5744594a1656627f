//! Binary field files.
//!
//! Layout: the 16-byte magic `CONTACTLAB-FLD1\0`, then little-endian `u32 m`,
//! `f64 side`, and `m^3` complex values as `(re, im)` f64 pairs, x index fastest.

use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

use contactlab_core::numerics::{BoxGrid3D, GridError, WaveField};
use num_complex::Complex64;

pub const MAGIC: &[u8; 16] = b"CONTACTLAB-FLD1\0";
const HEADER: usize = 16 + 4 + 8;

#[derive(Debug, Error)]
pub enum FieldIoError {
    #[error("not a field file (magic {found:?})")]
    BadMagic { found: Vec<u8> },
    #[error("truncated field file: expected {expected} bytes, found {actual}")]
    Truncated { expected: u64, actual: u64 },
    #[error("field file is {actual} bytes, {expected} expected")]
    TrailingBytes { expected: u64, actual: u64 },
    #[error("points per axis must be a power of two, got {0}")]
    NotPowerOfTwo(u32),
    #[error("bad grid in field file: {0}")]
    Grid(#[from] GridError),
    #[error("field contains non-finite values")]
    NonFinite,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn expected_len(m: u32) -> u64 {
    HEADER as u64 + (m as u64).pow(3) * 16
}

pub fn encode_field(field: &WaveField) -> Vec<u8> {
    let m = field.grid.m() as u32;
    let mut out = Vec::with_capacity(expected_len(m) as usize);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&m.to_le_bytes());
    out.extend_from_slice(&field.grid.side().to_le_bytes());
    for v in &field.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<WaveField, FieldIoError> {
    let actual = bytes.len() as u64;
    if bytes.len() < 16 || &bytes[..16] != MAGIC {
        if bytes.len() < 16 && MAGIC.starts_with(bytes) {
            return Err(FieldIoError::Truncated {
                expected: HEADER as u64,
                actual,
            });
        }
        return Err(FieldIoError::BadMagic {
            found: bytes[..bytes.len().min(16)].to_vec(),
        });
    }
    if bytes.len() < HEADER {
        return Err(FieldIoError::Truncated {
            expected: HEADER as u64,
            actual,
        });
    }
    let m = u32::from_le_bytes(bytes[16..20].try_into().unwrap());
    let side = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
    if m == 0 || !m.is_power_of_two() {
        return Err(FieldIoError::NotPowerOfTwo(m));
    }
    let expected = expected_len(m);
    if actual < expected {
        return Err(FieldIoError::Truncated { expected, actual });
    }
    if actual > expected {
        return Err(FieldIoError::TrailingBytes { expected, actual });
    }
    let grid = BoxGrid3D::new(m as usize, side)?;
    let values: Vec<Complex64> = bytes[HEADER..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(FieldIoError::NonFinite);
    }
    WaveField::from_values(grid, values).map_err(|_| FieldIoError::NonFinite)
}

pub fn write_field(field: &WaveField, path: &Path) -> Result<(), FieldIoError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode_field(field))?;
    f.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<WaveField, FieldIoError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_field(&bytes)
}
